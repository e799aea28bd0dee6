use itertools::Itertools;
use pathfinding::prelude::{kuhn_munkres, Matrix};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeLabeling;
use crate::rng::{derive_seed, rng_from_seed, tags};

const LLOYD_MAX_ITERS: usize = 300;
/// Largest `K` handled by exhaustive permutation search.
const MAX_BRUTE_K: usize = 6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KmeansFit {
    pub labels: NodeLabeling,
    pub centers: Vec<Vec<f64>>,
    /// Within-cluster sum of squares.
    pub wcss: f64,
    /// Restart that produced this fit.
    pub restart: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centre; ties go to the lowest index.
fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centers.iter().enumerate() {
        let d = sq_dist(x, mu);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let (n, k, dim) = (points.len(), centers.len(), points[0].len());
    let mut assign = vec![usize::MAX; n];
    for _ in 0..LLOYD_MAX_ITERS {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let c = nearest(p, &centers).0;
            if assign[i] != c {
                assign[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assign) {
            counts[c] += 1;
            sums[c].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // Empty cluster: move it onto the worst-served point.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(&points[a], &centers[assign[a]]);
                        let db = sq_dist(&points[b], &centers[assign[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("non-empty");
                centers[c] = points[far].clone();
                assign[far] = c;
            }
        }
    }
    let wcss = points.iter().zip(&assign).map(|(p, &c)| sq_dist(p, &centers[c])).sum();
    (assign, centers, wcss)
}

/// k-means on the rows of `points` with k-means++ seeding and `restarts`
/// independent Lloyd runs; the lowest WCSS wins, earlier restarts on ties.
pub fn kmeans_communities(points: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Result<KmeansFit> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::Invalid(format!("cannot form {k} clusters from {n} points")));
    }
    if restarts == 0 {
        return Err(Error::Invalid("k-means needs at least one restart".into()));
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::Invalid("points must share a positive dimension".into()));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("non-finite coordinate".into()));
    }
    let runs: Vec<(Vec<usize>, Vec<Vec<f64>>, f64)> = (0..restarts)
        .into_par_iter()
        .map(|r| lloyd(points, plus_plus_init(points, k, derive_seed(seed, tags::KMEANS, r as u64))))
        .collect();
    let (restart, (assign, centers, wcss)) = runs
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1 .2.total_cmp(&b.1 .2).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    Ok(KmeansFit {
        labels: NodeLabeling::new(assign, k)?,
        centers,
        wcss,
        restart,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterEval {
    /// Estimated labels mapped onto the truth's label set.
    pub assignment: Vec<usize>,
    pub rate: f64,
    /// `permutation[a]` is the true label matched to estimated label `a`.
    pub permutation: Vec<usize>,
}

/// Misclassification rate minimised over relabelings of `est`.
pub fn misclassification(est: &NodeLabeling, truth: &NodeLabeling) -> Result<ClusterEval> {
    let n = truth.len();
    if est.len() != n {
        return Err(Error::Invalid(format!("{} estimated labels for {n} nodes", est.len())));
    }
    if n == 0 {
        return Err(Error::Invalid("empty labeling".into()));
    }
    let k = est.k().max(truth.k());
    let mut confusion = vec![vec![0i64; k]; k];
    for (&a, &b) in est.labels().iter().zip(truth.labels()) {
        confusion[a][b] += 1;
    }
    let permutation = if k <= MAX_BRUTE_K {
        let mut best: (i64, Vec<usize>) = (-1, Vec::new());
        for perm in (0..k).permutations(k) {
            let hits = (0..k).map(|a| confusion[a][perm[a]]).sum();
            if hits > best.0 {
                best = (hits, perm);
            }
        }
        best.1
    } else {
        let weights = Matrix::from_rows(confusion.clone()).expect("square");
        kuhn_munkres(&weights).1
    };
    let assignment: Vec<usize> = est.labels().iter().map(|&a| permutation[a]).collect();
    let wrong = assignment.iter().zip(truth.labels()).filter(|(a, b)| a != b).count();
    Ok(ClusterEval {
        assignment,
        rate: wrong as f64 / n as f64,
        permutation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn labeling(v: Vec<usize>, k: usize) -> NodeLabeling {
        NodeLabeling::new(v, k).unwrap()
    }

    #[test]
    fn separated_blobs_are_recovered() {
        let mut rng = rng_from_seed(3);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let centres = [[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]];
        let truth: Vec<usize> = (0..90).map(|i| i % 3).collect();
        let pts: Vec<Vec<f64>> = truth
            .iter()
            .map(|&c| centres[c].iter().map(|m| m + noise.sample(&mut rng)).collect())
            .collect();
        let fit = kmeans_communities(&pts, 3, 20, 1).unwrap();
        let eval = misclassification(&fit.labels, &labeling(truth, 3)).unwrap();
        assert_eq!(eval.rate, 0.0);
        let again = kmeans_communities(&pts, 3, 20, 1).unwrap();
        assert_eq!(fit.labels, again.labels);
        assert_eq!(fit.wcss, again.wcss);
    }

    #[test]
    fn kmeans_rejects_bad_input() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(kmeans_communities(&pts, 3, 5, 0).is_err());
        assert!(kmeans_communities(&pts, 1, 0, 0).is_err());
        assert!(kmeans_communities(&[vec![0.0], vec![f64::NAN]], 1, 1, 0).is_err());
    }

    #[test]
    fn identical_points_do_not_panic() {
        let pts = vec![vec![1.0, 1.0]; 10];
        let fit = kmeans_communities(&pts, 3, 4, 0).unwrap();
        assert_eq!(fit.wcss, 0.0);
    }

    #[test]
    fn relabeled_truth_scores_zero() {
        let truth = labeling(vec![0, 0, 1, 1, 2, 2], 3);
        let est = labeling(vec![2, 2, 0, 0, 1, 1], 3);
        let e = misclassification(&est, &truth).unwrap();
        assert_eq!(e.rate, 0.0);
        assert_eq!(e.permutation, vec![1, 2, 0]);
        assert_eq!(e.assignment, truth.labels());
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut rng = rng_from_seed(8);
        for _ in 0..20 {
            let truth: Vec<usize> = (0..60).map(|_| rng.random_range(0..6)).collect();
            let est: Vec<usize> = truth
                .iter()
                .map(|&t| if rng.random::<f64>() < 0.6 { (t + 2) % 6 } else { rng.random_range(0..6) })
                .collect();
            let brute = misclassification(&labeling(est.clone(), 6), &labeling(truth.clone(), 6)).unwrap();
            // Same data padded to K = 7 takes the assignment path.
            let hung = misclassification(&labeling(est, 7), &labeling(truth, 6)).unwrap();
            assert_eq!(brute.rate, hung.rate);
        }
    }

    #[test]
    fn random_two_labeling_is_near_half() {
        let mut rng = rng_from_seed(11);
        let truth = labeling((0..500).map(|i| i % 2).collect(), 2);
        let est = labeling((0..500).map(|_| rng.random_range(0..2)).collect(), 2);
        let r = misclassification(&est, &truth).unwrap().rate;
        assert!((0.4..=0.5).contains(&r), "{r}");
    }

    proptest! {
        #[test]
        fn rate_is_bounded(raw in prop::collection::vec((0usize..4, 0usize..4), 1..80)) {
            let (e, t): (Vec<usize>, Vec<usize>) = raw.into_iter().unzip();
            let r = misclassification(&labeling(e, 4), &labeling(t, 4)).unwrap().rate;
            prop_assert!((0.0..=1.0 - 1.0 / 4.0 + 1e-12).contains(&r));
        }
    }
}
