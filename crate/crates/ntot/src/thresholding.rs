//! Thresholding operators: hard thresholding, top-k index selection, and
//! the exact optimal k-thresholding operator by exhaustive enumeration.
//!
//! Ties between equal magnitudes always retain the lower index, and the
//! exhaustive search breaks objective ties by lexicographically smallest
//! support, so every operator here is deterministic.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Strictly increasing set of column indices within a capacity `n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SupportSet {
    indices: Vec<usize>,
    capacity: usize,
}

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, capacity: usize) -> Result<Self> {
        indices.sort_unstable();
        for pair in indices.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidConfig(format!(
                    "duplicate index {} in support",
                    pair[0]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= capacity {
                return Err(Error::InvalidConfig(format!(
                    "index {last} out of range for capacity {capacity}"
                )));
            }
        }
        Ok(SupportSet { indices, capacity })
    }

    pub fn empty(capacity: usize) -> Self {
        SupportSet {
            indices: Vec::new(),
            capacity,
        }
    }

    /// Support of the nonzero entries of a vector.
    pub fn of_nonzeros(x: &Vector) -> Self {
        SupportSet {
            indices: (0..x.len()).filter(|&i| x[i] != 0.0).collect(),
            capacity: x.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut merged: Vec<usize> = self
            .indices
            .iter()
            .chain(other.indices.iter())
            .copied()
            .collect();
        merged.sort_unstable();
        merged.dedup();
        SupportSet {
            indices: merged,
            capacity: self.capacity.max(other.capacity),
        }
    }

    /// Restricts `x` to this support (zeroing everything else).
    pub fn restrict(&self, x: &Vector) -> Vector {
        let mut out = Vector::zeros(x.len());
        for &i in &self.indices {
            out[i] = x[i];
        }
        out
    }

    /// Zeroes this support in `x`, keeping the complement.
    pub fn restrict_complement(&self, x: &Vector) -> Vector {
        let mut out = x.clone();
        for &i in &self.indices {
            out[i] = 0.0;
        }
        out
    }
}

/// Indices of the `k` largest magnitudes of `x`, ties to the lower index.
pub fn top_k_support(x: &Vector, k: usize) -> SupportSet {
    let k = k.min(x.len());
    let mut order: Vec<usize> = (0..x.len()).collect();
    // Stable order on descending magnitude keeps the lower index first
    // among equal magnitudes.
    order.sort_by(|&i, &j| x[j].abs().partial_cmp(&x[i].abs()).unwrap());
    let mut picked: Vec<usize> = order[..k].to_vec();
    picked.sort_unstable();
    SupportSet {
        indices: picked,
        capacity: x.len(),
    }
}

/// Hard thresholding H_k: keeps the `k` largest magnitudes, zeroes the rest.
pub fn hard_threshold(x: &Vector, k: usize) -> Vector {
    top_k_support(x, k).restrict(x)
}

/// Guard for the exhaustive optimal-thresholding oracle.
pub const ENUMERATION_GUARD: u64 = 2_000_000;

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        let num = (n - k + 1 + i) as u64;
        acc = match acc.checked_mul(num) {
            Some(v) => v / (i as u64 + 1),
            None => return u64::MAX,
        };
    }
    acc
}

/// Exact optimal k-thresholding by exhaustive enumeration of every binary
/// mask `w` with `e^T w = k`. Returns the minimizing mask and its objective
/// `||y - A(u ⊗ w)||^2`; objective ties go to the lexicographically
/// smallest support. Guarded to small instances.
pub fn exact_optimal_threshold(
    a: &Matrix,
    u: &Vector,
    y: &Vector,
    k: usize,
) -> Result<(Vector, f64)> {
    let n = a.cols();
    if u.len() != n || y.len() != a.rows() {
        return Err(Error::DimensionMismatch(
            "optimal thresholding: u/y lengths must match A".into(),
        ));
    }
    if k > n {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds n = {n}")));
    }
    if binomial(n, k) > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded(format!(
            "C({n}, {k}) = {} exceeds the exhaustive-oracle cap {ENUMERATION_GUARD}",
            binomial(n, k)
        )));
    }
    if k == 0 {
        return Ok((Vector::zeros(n), y.norm2().powi(2)));
    }
    // Scaled columns b_j = u_j * a_j, so the objective per support is
    // ||y - sum_{j in S} b_j||^2.
    let m = a.rows();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        cols.push((0..m).map(|i| a.get(i, j) * u[j]).collect());
    }
    let best = search_supports(&cols, y.as_slice(), n, k);
    let (obj, support) = best.expect("at least one support exists");
    let mut w = Vector::zeros(n);
    for &j in &support {
        w[j] = 1.0;
    }
    Ok((w, obj))
}

fn objective_for(cols: &[Vec<f64>], y: &[f64], support: &[usize]) -> f64 {
    let mut r = y.to_vec();
    for &j in support {
        for (ri, &c) in r.iter_mut().zip(&cols[j]) {
            *ri -= c;
        }
    }
    r.iter().map(|v| v * v).sum()
}

/// Takes the better of two (objective, support) candidates; ties resolve to
/// the lexicographically smaller support so parallel and sequential
/// execution agree exactly.
fn better(
    a: Option<(f64, Vec<usize>)>,
    b: Option<(f64, Vec<usize>)>,
) -> Option<(f64, Vec<usize>)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// Enumerates supports of size `k` whose smallest element is `first`,
/// in lexicographic order, tracking the best.
fn search_block(
    cols: &[Vec<f64>],
    y: &[f64],
    n: usize,
    k: usize,
    first: usize,
) -> Option<(f64, Vec<usize>)> {
    let mut support: Vec<usize> = (0..k).map(|i| first + i).collect();
    if *support.last().unwrap() >= n {
        return None;
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let obj = objective_for(cols, y, &support);
        best = better(best, Some((obj, support.clone())));
        // Advance positions 1..k only; position 0 is pinned to `first`.
        let mut i = k;
        loop {
            if i == 1 {
                return best;
            }
            i -= 1;
            if support[i] < n - (k - i) {
                support[i] += 1;
                for t in (i + 1)..k {
                    support[t] = support[t - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(feature = "parallel")]
fn search_supports(cols: &[Vec<f64>], y: &[f64], n: usize, k: usize) -> Option<(f64, Vec<usize>)> {
    use rayon::prelude::*;
    (0..=(n - k))
        .into_par_iter()
        .map(|first| search_block(cols, y, n, k, first))
        .reduce(|| None, better)
}

#[cfg(not(feature = "parallel"))]
fn search_supports(cols: &[Vec<f64>], y: &[f64], n: usize, k: usize) -> Option<(f64, Vec<usize>)> {
    (0..=(n - k)).fold(None, |acc, first| {
        better(acc, search_block(cols, y, n, k, first))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matvec;
    use crate::rng::GaussianRng;

    fn vec_of(v: &[f64]) -> Vector {
        Vector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn hard_threshold_magnitude_order() {
        let x = vec_of(&[3.0, -1.0, 0.0, 2.0]);
        assert_eq!(hard_threshold(&x, 2).as_slice(), &[3.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn hard_threshold_already_sparse() {
        let x = vec_of(&[0.0, 4.0, 0.0, 0.0]);
        assert_eq!(hard_threshold(&x, 2).as_slice(), x.as_slice());
    }

    #[test]
    fn hard_threshold_tie_keeps_lower_index() {
        let x = vec_of(&[1.0, -1.0, 1.0]);
        assert_eq!(hard_threshold(&x, 2).as_slice(), &[1.0, -1.0, 0.0]);
    }

    #[test]
    fn hard_threshold_k_zero() {
        let x = vec_of(&[1.0, 2.0]);
        assert_eq!(hard_threshold(&x, 0).as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn top_k_single_largest() {
        let x = vec_of(&[0.0, 5.0, 0.0, -7.0]);
        assert_eq!(top_k_support(&x, 1).indices(), &[3]);
    }

    #[test]
    fn top_k_all_zero_tie_rule() {
        let x = Vector::zeros(4);
        assert_eq!(top_k_support(&x, 2).indices(), &[0, 1]);
    }

    #[test]
    fn top_k_equal_entries_tie_rule() {
        let x = vec_of(&[2.0, 2.0]);
        assert_eq!(top_k_support(&x, 1).indices(), &[0]);
    }

    #[test]
    fn hard_threshold_consistent_with_top_k() {
        let mut rng = GaussianRng::new(5);
        for _ in 0..100 {
            let x = Vector::new(rng.gaussian_vec(9)).unwrap();
            let k = rng.next_below(10);
            let h = hard_threshold(&x, k);
            let s = top_k_support(&x, k);
            assert!(h.nnz() <= k);
            assert_eq!(h.nnz(), k.min(x.nnz()));
            for i in 0..x.len() {
                if s.contains(i) {
                    assert_eq!(h[i], x[i]);
                } else {
                    assert_eq!(h[i], 0.0);
                }
            }
        }
    }

    #[test]
    fn optimal_threshold_identity_exact_fit() {
        let a = Matrix::identity(2).unwrap();
        let u = vec_of(&[1.0, 0.0]);
        let y = vec_of(&[1.0, 0.0]);
        let (w, obj) = exact_optimal_threshold(&a, &u, &y, 1).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 0.0]);
        assert!(obj.abs() < 1e-15);
    }

    #[test]
    fn optimal_threshold_zero_u_lexicographic() {
        let a = Matrix::identity(4).unwrap();
        let u = Vector::zeros(4);
        let y = vec_of(&[1.0, 2.0, 3.0, 4.0]);
        let (w, obj) = exact_optimal_threshold(&a, &u, &y, 2).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 1.0, 0.0, 0.0]);
        assert!((obj - y.norm2().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn optimal_threshold_guard_trips() {
        let a = Matrix::zeros(2, 64).unwrap();
        let u = Vector::zeros(64);
        let y = Vector::zeros(2);
        assert!(matches!(
            exact_optimal_threshold(&a, &u, &y, 20),
            Err(Error::GuardExceeded(_))
        ));
    }

    /// Independently coded double-loop enumeration for k = 2.
    fn double_loop_oracle(a: &Matrix, u: &Vector, y: &Vector) -> (Vec<usize>, f64) {
        let n = a.cols();
        let mut best_obj = f64::INFINITY;
        let mut best = vec![0, 1];
        for i in 0..n {
            for j in (i + 1)..n {
                let mut x = Vector::zeros(n);
                x[i] = u[i];
                x[j] = u[j];
                let ax = matvec(a, &x).unwrap();
                let obj: f64 = (0..y.len()).map(|t| (y[t] - ax[t]).powi(2)).sum();
                if obj < best_obj {
                    best_obj = obj;
                    best = vec![i, j];
                }
            }
        }
        (best, best_obj)
    }

    #[test]
    fn optimal_threshold_matches_double_loop() {
        let mut rng = GaussianRng::new(99);
        for trial in 0..20 {
            let a = Matrix::new(5, 8, rng.gaussian_vec(40)).unwrap();
            let u = Vector::new(rng.gaussian_vec(8)).unwrap();
            let y = Vector::new(rng.gaussian_vec(5)).unwrap();
            let (w, obj) = exact_optimal_threshold(&a, &u, &y, 2).unwrap();
            let (support, oracle_obj) = double_loop_oracle(&a, &u, &y);
            assert!(
                (obj - oracle_obj).abs() <= 1e-10 * oracle_obj.max(1.0),
                "trial {trial}"
            );
            let picked: Vec<usize> = (0..8).filter(|&i| w[i] == 1.0).collect();
            assert_eq!(picked, support, "trial {trial}");
        }
    }

    #[test]
    fn optimal_beats_hard_threshold_somewhere() {
        // The motivating claim: Z_k^# never does worse than H_k, and on at
        // least one generated instance it is strictly better.
        let mut rng = GaussianRng::new(123);
        let mut strict = 0;
        for trial in 0..50 {
            let a = Matrix::new(4, 8, rng.gaussian_vec(32)).unwrap();
            let u = Vector::new(rng.gaussian_vec(8)).unwrap();
            let y = Vector::new(rng.gaussian_vec(4)).unwrap();
            let (_, opt_obj) = exact_optimal_threshold(&a, &u, &y, 2).unwrap();
            let h = hard_threshold(&u, 2);
            let ah = matvec(&a, &h).unwrap();
            let hard_obj: f64 = (0..4).map(|i| (y[i] - ah[i]).powi(2)).sum();
            assert!(opt_obj <= hard_obj + 1e-10, "trial {trial}");
            if opt_obj < hard_obj - 1e-8 {
                strict += 1;
            }
        }
        assert!(strict > 0, "no instance with a strict improvement");
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(10, 2), 45);
        assert_eq!(binomial(12, 3), 220);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(4, 5), 0);
    }
}
