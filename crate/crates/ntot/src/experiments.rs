//! Seeded problem generation and the three benchmark studies: residual
//! reduction over iterations, average iteration counts across a sparsity or
//! measurement grid, and success frequency with exact and noisy
//! measurements.
//!
//! Every study is driven entirely by a base seed. Per-trial seeds are
//! derived with [`crate::rng::trial_seed`], so trials are independent of
//! execution order and of how many workers run them; result rows are
//! assembled in (algorithm, grid point, trial) order, never completion
//! order.

use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix, Vector};
use crate::rng::{trial_seed, GaussianRng};
use crate::solvers::{solve, RecoveryProblem, SolverConfig, StopRule, Variant};

/// One seeded random instance: dimensions, sparsity, noise level, seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub noise_scale: f64,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn new(m: usize, n: usize, k: usize, noise_scale: f64, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidConfig("m and n must be >= 1".into()));
        }
        if m > n {
            return Err(Error::InvalidConfig(format!("need m <= n, got {m} > {n}")));
        }
        if k > n {
            return Err(Error::InvalidConfig(format!("need k <= n, got {k} > {n}")));
        }
        if !(noise_scale >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise_scale must be >= 0, got {noise_scale}"
            )));
        }
        Ok(ProblemSpec {
            m,
            n,
            k,
            noise_scale,
            seed,
        })
    }
}

/// Draws the Gaussian instance for `spec`.
///
/// Draw order is fixed: matrix entries (row-major), then the support by a
/// partial Fisher-Yates shuffle of `[0, n)`, then the nonzero values in
/// ascending index order, then the noise vector. `y = A x* + noise_scale * theta`.
pub fn gen_problem(spec: &ProblemSpec) -> Result<RecoveryProblem> {
    let mut rng = GaussianRng::new(spec.seed);
    let a = Matrix::new(spec.m, spec.n, rng.gaussian_vec(spec.m * spec.n))?;
    // Partial Fisher-Yates: the first k slots of the permuted index array
    // are a uniform k-subset.
    let mut idx: Vec<usize> = (0..spec.n).collect();
    for i in 0..spec.k {
        let j = i + rng.next_below(spec.n - i);
        idx.swap(i, j);
    }
    let mut support: Vec<usize> = idx[..spec.k].to_vec();
    support.sort_unstable();
    let mut x_true = Vector::zeros(spec.n);
    for &j in &support {
        x_true[j] = rng.next_gaussian();
    }
    let ax = a.mul_vec(x_true.as_slice())?;
    let (y, noise) = if spec.noise_scale > 0.0 {
        let theta = rng.gaussian_vec(spec.m);
        let eta: Vec<f64> = theta.iter().map(|t| spec.noise_scale * t).collect();
        let y: Vec<f64> = ax.iter().zip(&eta).map(|(a, e)| a + e).collect();
        (Vector::new(y)?, Some(Vector::new(eta)?))
    } else {
        (Vector::new(ax)?, None)
    };
    RecoveryProblem::new(a, y, spec.k, Some(x_true), noise)
}

/// A deterministic near-isometry: `m` orthonormal rows spanning the
/// complement of a near-flat unit vector `q`, rescaled so the order-3
/// restricted isometry constant is balanced below 0.2.
///
/// With rows forming `c * Q` where `Q Qᵀ = I` and `Q q = 0`, every
/// `s`-column submatrix has Gram eigenvalues `c^2` and `c^2 (1 - ||q_S||^2)`,
/// so the constant of order `s` is `max(c^2 - 1, 1 - c^2 (1 - t_s))` with
/// `t_s` the largest `s`-term sum of squares of `q`. Choosing
/// `c^2 = 2 / (2 - t_3)` balances both branches at `t_3 / (2 - t_3)`, which
/// stays below 0.2 while `q` is close to flat. Requires `m < n`.
pub fn near_isometry(m: usize, n: usize, seed: u64) -> Matrix {
    assert!(m < n && m > 0, "near_isometry needs 0 < m < n");
    let mut rng = GaussianRng::new(seed);
    // Near-flat unit vector q.
    let mut q: Vec<f64> = (0..n).map(|_| 1.0 + 0.02 * rng.next_gaussian()).collect();
    let qn = norm2(&q);
    for qi in q.iter_mut() {
        *qi /= qn;
    }
    // Largest 3-term sum of squares of q.
    let mut sq: Vec<f64> = q.iter().map(|v| v * v).collect();
    sq.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let t3 = sq.iter().take(3.min(n)).sum::<f64>();
    let c = (2.0 / (2.0 - t3)).sqrt();
    // Householder reflection H with H q = e_1: rows 2..n of H are an
    // orthonormal basis of the complement of q.
    let mut u = q.clone();
    u[0] -= 1.0;
    let un = norm2(&u);
    for ui in u.iter_mut() {
        *ui /= un;
    }
    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        let row_index = i + 1; // skip the row mapping to q itself
        for j in 0..n {
            let h = if row_index == j { 1.0 } else { 0.0 } - 2.0 * u[row_index] * u[j];
            data.push(c * h);
        }
    }
    Matrix::new(m, n, data).expect("construction is finite")
}

/// Outcome of one seeded trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub spec: ProblemSpec,
    pub algorithm: Variant,
    pub iterations_used: usize,
    pub success: bool,
    pub final_residual: f64,
    pub final_relative_error: f64,
}

/// Recovery criterion shared by the iteration and success studies.
pub const SUCCESS_TOL: f64 = 1e-3;

/// Sweep axis for the grid studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    KOverN,
    MOverN,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::KOverN => "k_over_n",
            Axis::MOverN => "m_over_n",
        }
    }

    pub fn parse(s: &str) -> Result<Axis> {
        match s {
            "k_over_n" => Ok(Axis::KOverN),
            "m_over_n" => Ok(Axis::MOverN),
            other => Err(Error::InvalidConfig(format!("unknown axis '{other}'"))),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Grid study description shared by the iteration and success studies.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: Axis,
    /// Axis ratio values, e.g. k/n in [0.01, 0.35].
    pub grid: Vec<f64>,
    pub trials_per_point: usize,
    pub algorithms: Vec<Variant>,
    /// Base dimensions; the axis overrides k (for k/n) or m (for m/n).
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub base_seed: u64,
    pub max_outer_iter: usize,
    /// Fixed step parameters; when `eps` is absent the per-matrix default
    /// rule `eps = max(sigma_1^2 + 1, lambda - sigma_m^2)` applies.
    pub eps: Option<f64>,
    pub lambda: f64,
    pub noise_scale: f64,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("sweep grid must be nonempty".into()));
        }
        if self.trials_per_point == 0 {
            return Err(Error::InvalidConfig("trials_per_point must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("algorithm list must be nonempty".into()));
        }
        if self
            .grid
            .iter()
            .any(|v| !v.is_finite() || *v <= 0.0 || *v > 1.0)
        {
            return Err(Error::InvalidConfig(
                "grid ratios must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Resolves a grid ratio into a concrete problem shape.
    fn point_spec(&self, ratio: f64, seed: u64) -> Result<ProblemSpec> {
        match self.axis {
            Axis::KOverN => {
                let k = ((ratio * self.n as f64).round() as usize).max(1);
                ProblemSpec::new(self.m, self.n, k, self.noise_scale, seed)
            }
            Axis::MOverN => {
                let m = ((ratio * self.n as f64).round() as usize).max(1);
                ProblemSpec::new(m, self.n, self.k, self.noise_scale, seed)
            }
        }
    }
}

/// One row of the residual study: the residual after each iteration of one
/// algorithm at fixed step parameters.
#[derive(Debug, Clone)]
pub struct ResidualRow {
    pub epsilon: f64,
    pub lambda: f64,
    pub algorithm: Variant,
    pub iteration: usize,
    pub residual: f64,
    pub relative_error: Option<f64>,
}

/// One row of the iteration study.
#[derive(Debug, Clone)]
pub struct IterationsRow {
    pub algorithm: Variant,
    pub axis: Axis,
    pub axis_value: f64,
    pub avg_iterations: f64,
}

/// One row of the success study.
#[derive(Debug, Clone)]
pub struct SuccessRow {
    pub algorithm: Variant,
    pub axis: Axis,
    pub axis_value: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
}

/// Maps `f` over `jobs`, in parallel when the crate's parallel feature is
/// enabled and `parallel` is requested. Output order always matches input
/// order.
fn map_jobs<J, R, F>(jobs: Vec<J>, parallel: bool, f: F) -> Vec<R>
where
    J: Send + Sync,
    R: Send,
    F: Fn(&J) -> R + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            use rayon::prelude::*;
            return jobs.par_iter().map(|j| f(j)).collect();
        }
    }
    let _ = parallel;
    jobs.iter().map(|j| f(j)).collect()
}

fn trial_config(
    variant: Variant,
    a: &Matrix,
    eps: Option<f64>,
    lambda: f64,
    max_outer_iter: usize,
) -> Result<SolverConfig> {
    let mut c = match eps {
        Some(e) => SolverConfig::new(variant, e, lambda),
        None => {
            let mut c = SolverConfig::with_default_parameters(variant, a)?;
            c.lambda = lambda;
            // Re-check the default-rule floor against the requested lambda.
            let e = crate::rip::default_parameters(a, lambda)?;
            c.eps = e;
            c
        }
    };
    c.max_outer_iter = max_outer_iter;
    c.stop_rule = StopRule::RelativeError;
    c.stop_tol = SUCCESS_TOL;
    Ok(c)
}

/// Runs one seeded trial of one algorithm and scores it against the
/// recovery criterion.
pub fn run_trial(
    spec: &ProblemSpec,
    variant: Variant,
    eps: Option<f64>,
    lambda: f64,
    max_outer_iter: usize,
) -> Result<TrialRecord> {
    let problem = gen_problem(spec)?;
    let config = trial_config(variant, &problem.a, eps, lambda, max_outer_iter)?;
    let result = solve(&problem, &config)?;
    let final_relative_error = problem
        .relative_error(&result.x_hat)
        .expect("generated problems carry ground truth");
    Ok(TrialRecord {
        spec: *spec,
        algorithm: variant,
        iterations_used: result.iterations_used(),
        success: final_relative_error <= SUCCESS_TOL,
        final_residual: result.final_residual(),
        final_relative_error,
    })
}

/// Residual trajectory of each algorithm on one seeded instance.
///
/// Runs the full iteration budget (no early stopping) so every algorithm
/// contributes the same number of rows; `eps = None` applies the default
/// parameter rule.
pub fn residual_experiment(
    spec: &ProblemSpec,
    algorithms: &[Variant],
    eps: Option<f64>,
    lambda: f64,
    max_outer_iter: usize,
) -> Result<Vec<ResidualRow>> {
    let problem = gen_problem(spec)?;
    let mut rows = Vec::new();
    for &variant in algorithms {
        let mut config = trial_config(variant, &problem.a, eps, lambda, max_outer_iter)?;
        config.stop_rule = StopRule::IterationCapOnly;
        let result = solve(&problem, &config)?;
        for t in &result.trace {
            rows.push(ResidualRow {
                epsilon: config.eps,
                lambda: config.lambda,
                algorithm: variant,
                iteration: t.iteration,
                residual: t.residual,
                relative_error: t.relative_error,
            });
        }
    }
    Ok(rows)
}

/// All trial records of a grid sweep, ordered by (algorithm, grid point,
/// trial index).
pub fn sweep_trials(sweep: &SweepSpec, parallel: bool) -> Result<Vec<TrialRecord>> {
    sweep.validate()?;
    let mut jobs: Vec<(Variant, usize, ProblemSpec)> = Vec::new();
    for &variant in &sweep.algorithms {
        for (g, &ratio) in sweep.grid.iter().enumerate() {
            for t in 0..sweep.trials_per_point {
                let seed = trial_seed(sweep.base_seed, g as u64, t as u64);
                jobs.push((variant, g, sweep.point_spec(ratio, seed)?));
            }
        }
    }
    let results = map_jobs(jobs, parallel, |(variant, _, spec)| {
        run_trial(spec, *variant, sweep.eps, sweep.lambda, sweep.max_outer_iter)
    });
    results.into_iter().collect()
}

fn group_rows<R>(
    sweep: &SweepSpec,
    records: &[TrialRecord],
    make: impl Fn(Variant, f64, &[TrialRecord]) -> R,
) -> Vec<R> {
    let t = sweep.trials_per_point;
    let per_variant = sweep.grid.len() * t;
    let mut rows = Vec::new();
    for (vi, &variant) in sweep.algorithms.iter().enumerate() {
        for (g, &ratio) in sweep.grid.iter().enumerate() {
            let start = vi * per_variant + g * t;
            rows.push(make(variant, ratio, &records[start..start + t]));
        }
    }
    rows
}

/// Average iteration counts over the grid; trials that never meet the
/// recovery criterion contribute the iteration cap.
pub fn iterations_experiment(sweep: &SweepSpec) -> Result<Vec<IterationsRow>> {
    let records = sweep_trials(sweep, true)?;
    Ok(group_rows(sweep, &records, |algorithm, ratio, chunk| {
        let total: usize = chunk
            .iter()
            .map(|r| {
                if r.success {
                    r.iterations_used
                } else {
                    sweep.max_outer_iter
                }
            })
            .sum();
        IterationsRow {
            algorithm,
            axis: sweep.axis,
            axis_value: ratio,
            avg_iterations: total as f64 / chunk.len() as f64,
        }
    }))
}

/// Sequential twin of [`iterations_experiment`] for benchmarking and
/// determinism checks.
pub fn iterations_experiment_sequential(sweep: &SweepSpec) -> Result<Vec<IterationsRow>> {
    let records = sweep_trials(sweep, false)?;
    Ok(group_rows(sweep, &records, |algorithm, ratio, chunk| {
        let total: usize = chunk
            .iter()
            .map(|r| {
                if r.success {
                    r.iterations_used
                } else {
                    sweep.max_outer_iter
                }
            })
            .sum();
        IterationsRow {
            algorithm,
            axis: sweep.axis,
            axis_value: ratio,
            avg_iterations: total as f64 / chunk.len() as f64,
        }
    }))
}

/// Success frequencies over the grid under the stated noise scale.
pub fn success_experiment(sweep: &SweepSpec, noise_scale: f64) -> Result<Vec<SuccessRow>> {
    success_experiment_inner(sweep, noise_scale, true)
}

/// Sequential twin of [`success_experiment`].
pub fn success_experiment_sequential(
    sweep: &SweepSpec,
    noise_scale: f64,
) -> Result<Vec<SuccessRow>> {
    success_experiment_inner(sweep, noise_scale, false)
}

fn success_experiment_inner(
    sweep: &SweepSpec,
    noise_scale: f64,
    parallel: bool,
) -> Result<Vec<SuccessRow>> {
    let mut sweep = sweep.clone();
    sweep.noise_scale = noise_scale;
    let records = sweep_trials(&sweep, parallel)?;
    Ok(group_rows(&sweep, &records, |algorithm, ratio, chunk| {
        let successes = chunk.iter().filter(|r| r.success).count();
        SuccessRow {
            algorithm,
            axis: sweep.axis,
            axis_value: ratio,
            trials: chunk.len(),
            successes,
            success_rate: successes as f64 / chunk.len() as f64,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matvec, sub};

    #[test]
    fn gen_problem_noiseless_residual_is_zero() {
        let spec = ProblemSpec::new(8, 16, 3, 0.0, 11).unwrap();
        let p = gen_problem(&spec).unwrap();
        let x = p.x_true.as_ref().unwrap();
        let ax = p.a.mul_vec(x.as_slice()).unwrap();
        assert_eq!(norm2(&sub(p.y.as_slice(), &ax)), 0.0);
        assert_eq!(x.nnz(), 3);
        assert!(p.noise.is_none());
    }

    #[test]
    fn gen_problem_same_seed_bit_identical() {
        let spec = ProblemSpec::new(6, 12, 2, 0.001, 5).unwrap();
        let p1 = gen_problem(&spec).unwrap();
        let p2 = gen_problem(&spec).unwrap();
        assert_eq!(p1.a.entries(), p2.a.entries());
        for i in 0..6 {
            assert_eq!(p1.y[i].to_bits(), p2.y[i].to_bits());
        }
    }

    #[test]
    fn gen_problem_paper_scale_shape() {
        let spec = ProblemSpec::new(256, 512, 70, 0.0, 1).unwrap();
        let p = gen_problem(&spec).unwrap();
        assert_eq!(p.a.rows(), 256);
        assert_eq!(p.a.cols(), 512);
        assert_eq!(p.x_true.as_ref().unwrap().nnz(), 70);
    }

    #[test]
    fn gen_problem_noise_matches_model() {
        let spec = ProblemSpec::new(8, 16, 3, 0.001, 11).unwrap();
        let p = gen_problem(&spec).unwrap();
        let x = p.x_true.as_ref().unwrap();
        let ax = matvec(&p.a, x).unwrap();
        let eta = p.noise.as_ref().unwrap();
        for i in 0..8 {
            assert!((p.y[i] - ax[i] - eta[i]).abs() < 1e-15);
        }
        // eta = 0.001 * theta with standard-normal theta.
        assert!(eta.norm2() < 0.001 * 20.0);
    }

    #[test]
    fn support_sampling_is_roughly_uniform() {
        let mut counts = vec![0usize; 10];
        for seed in 0..2000 {
            let spec = ProblemSpec::new(4, 10, 2, 0.0, seed).unwrap();
            let p = gen_problem(&spec).unwrap();
            for (j, &v) in p.x_true.as_ref().unwrap().as_slice().iter().enumerate() {
                if v != 0.0 {
                    counts[j] += 1;
                }
            }
        }
        // Expected 400 hits per index over 2000 trials of k = 2 from n = 10.
        for (j, &c) in counts.iter().enumerate() {
            assert!(
                (c as i64 - 400).abs() < 100,
                "index {j} drawn {c} times out of 2000"
            );
        }
    }

    #[test]
    fn near_isometry_rows_orthonormal_up_to_scale() {
        let a = near_isometry(9, 10, 7);
        let g = a.gram_rows();
        let c2 = g[0];
        assert!(c2 > 1.0 && c2 < 1.3, "row scale^2 = {c2}");
        for i in 0..9 {
            for j in 0..9 {
                let expect = if i == j { c2 } else { 0.0 };
                assert!(
                    (g[i * 9 + j] - expect).abs() < 1e-12,
                    "gram({i},{j}) = {}",
                    g[i * 9 + j]
                );
            }
        }
    }

    #[test]
    fn near_isometry_order_three_constant_below_certificate_thresholds() {
        for seed in [1, 2, 3] {
            let a = near_isometry(9, 10, seed);
            let d3 = crate::rip::exact_ric(&a, 3).unwrap().delta;
            assert!(d3 < 0.2, "seed {seed}: delta_3 = {d3}");
        }
    }

    #[test]
    fn single_point_single_trial_reduces_to_one_solve() {
        let sweep = SweepSpec {
            axis: Axis::KOverN,
            grid: vec![0.1],
            trials_per_point: 1,
            algorithms: vec![Variant::Nsiht],
            m: 16,
            n: 32,
            k: 0,
            base_seed: 42,
            max_outer_iter: 20,
            eps: None,
            lambda: 5.0,
            noise_scale: 0.0,
        };
        let records = sweep_trials(&sweep, false).unwrap();
        assert_eq!(records.len(), 1);
        let spec = ProblemSpec::new(16, 32, 3, 0.0, trial_seed(42, 0, 0)).unwrap();
        let direct = run_trial(&spec, Variant::Nsiht, None, 5.0, 20).unwrap();
        assert_eq!(records[0].iterations_used, direct.iterations_used);
        assert_eq!(
            records[0].final_residual.to_bits(),
            direct.final_residual.to_bits()
        );
    }

    #[test]
    fn sweep_parallel_matches_sequential_bitwise() {
        let sweep = SweepSpec {
            axis: Axis::KOverN,
            grid: vec![0.05, 0.15],
            trials_per_point: 4,
            algorithms: vec![Variant::Nsiht, Variant::Omp],
            m: 12,
            n: 24,
            k: 0,
            base_seed: 9,
            max_outer_iter: 15,
            eps: None,
            lambda: 5.0,
            noise_scale: 0.0,
        };
        let par = sweep_trials(&sweep, true).unwrap();
        let seq = sweep_trials(&sweep, false).unwrap();
        assert_eq!(par.len(), seq.len());
        for (a, b) in par.iter().zip(&seq) {
            assert_eq!(a.algorithm, b.algorithm);
            assert_eq!(a.spec.seed, b.spec.seed);
            assert_eq!(a.final_residual.to_bits(), b.final_residual.to_bits());
            assert_eq!(
                a.final_relative_error.to_bits(),
                b.final_relative_error.to_bits()
            );
        }
    }

    #[test]
    fn success_flag_consistent_with_relative_error() {
        let sweep = SweepSpec {
            axis: Axis::KOverN,
            grid: vec![0.1, 0.4],
            trials_per_point: 5,
            algorithms: vec![Variant::Nsiht],
            m: 10,
            n: 20,
            k: 0,
            base_seed: 3,
            max_outer_iter: 10,
            eps: None,
            lambda: 5.0,
            noise_scale: 0.0,
        };
        for r in sweep_trials(&sweep, false).unwrap() {
            assert_eq!(r.success, r.final_relative_error <= SUCCESS_TOL);
        }
    }

    #[test]
    fn residual_rows_cover_every_iteration() {
        let spec = ProblemSpec::new(12, 24, 2, 0.0, 17).unwrap();
        let rows =
            residual_experiment(&spec, &[Variant::Nsiht, Variant::Iht], None, 5.0, 8).unwrap();
        assert_eq!(rows.len(), 2 * 9);
        for (i, row) in rows.iter().take(9).enumerate() {
            assert_eq!(row.iteration, i);
            assert_eq!(row.algorithm, Variant::Nsiht);
            assert!(row.residual.is_finite());
        }
    }

    #[test]
    fn invalid_sweeps_rejected() {
        let base = SweepSpec {
            axis: Axis::KOverN,
            grid: vec![0.1],
            trials_per_point: 1,
            algorithms: vec![Variant::Iht],
            m: 8,
            n: 16,
            k: 2,
            base_seed: 0,
            max_outer_iter: 5,
            eps: None,
            lambda: 5.0,
            noise_scale: 0.0,
        };
        let mut no_grid = base.clone();
        no_grid.grid.clear();
        assert!(sweep_trials(&no_grid, false).is_err());
        let mut no_trials = base.clone();
        no_trials.trials_per_point = 0;
        assert!(sweep_trials(&no_trials, false).is_err());
        let mut bad_ratio = base;
        bad_ratio.grid = vec![1.5];
        assert!(sweep_trials(&bad_ratio, false).is_err());
    }
}
