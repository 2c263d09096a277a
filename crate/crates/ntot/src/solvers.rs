//! The algorithm family: NTOT, NTROT, NTROTP and the baselines IHT,
//! NSIHT, NSHTP, OMP and SP, sharing one iteration-trace and stopping
//! framework.
//!
//! All variants start from `x^0 = 0` unless overridden, and a run is fully
//! deterministic: identical problem and config give a bit-identical result.

use crate::error::{Error, Result};
use crate::linalg::{
    least_squares_on_support, norm2, sub, Matrix, NewtonOperator, Vector,
};
use crate::qp::{solve_relaxed_ot, QpSolution, RelaxedOtProblem};
use crate::thresholding::{hard_threshold, top_k_support, SupportSet};

/// Algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Ntot,
    Ntrot,
    Ntrotp,
    Iht,
    Nsiht,
    Nshtp,
    Omp,
    Sp,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Ntot,
        Variant::Ntrot,
        Variant::Ntrotp,
        Variant::Iht,
        Variant::Nsiht,
        Variant::Nshtp,
        Variant::Omp,
        Variant::Sp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Ntot => "ntot",
            Variant::Ntrot => "ntrot",
            Variant::Ntrotp => "ntrotp",
            Variant::Iht => "iht",
            Variant::Nsiht => "nsiht",
            Variant::Nshtp => "nshtp",
            Variant::Omp => "omp",
            Variant::Sp => "sp",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm '{s}'")))
    }

    /// Whether the variant uses the regularized Newton direction.
    pub fn uses_newton_step(&self) -> bool {
        matches!(
            self,
            Variant::Ntot | Variant::Ntrot | Variant::Ntrotp | Variant::Nsiht | Variant::Nshtp
        )
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stopping rule applied between iterations (the iteration cap is always
/// enforced on top).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// `||x^p - x*|| / ||x*|| <= stop_tol`; requires ground truth.
    RelativeError,
    /// `||y - A x^p|| <= stop_tol * ||y||`.
    Residual,
    IterationCapOnly,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub variant: Variant,
    pub eps: f64,
    pub lambda: f64,
    pub max_outer_iter: usize,
    pub qp_tol: f64,
    pub qp_max_iter: usize,
    pub stop_rule: StopRule,
    pub stop_tol: f64,
    /// Initial point; zero when absent.
    pub x0: Option<Vector>,
}

impl SolverConfig {
    pub fn new(variant: Variant, eps: f64, lambda: f64) -> Self {
        SolverConfig {
            variant,
            eps,
            lambda,
            max_outer_iter: 50,
            qp_tol: 1e-8,
            qp_max_iter: 5000,
            stop_rule: StopRule::Residual,
            stop_tol: 1e-6,
            x0: None,
        }
    }

    /// Default parameter rule applied to a concrete matrix: `lambda = 5`,
    /// `eps = max(sigma_1^2 + 1, lambda - sigma_m^2)`.
    pub fn with_default_parameters(variant: Variant, a: &Matrix) -> Result<Self> {
        let lambda = 5.0;
        let eps = crate::rip::default_parameters(a, lambda)?;
        Ok(SolverConfig::new(variant, eps, lambda))
    }

    fn validate(&self) -> Result<()> {
        if self.eps <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "eps must be > 0, got {}",
                self.eps
            )));
        }
        // lambda = 0 is degenerate but admitted: the iteration simply
        // stalls at x^0 and terminates at the cap.
        if self.lambda < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if self.max_outer_iter == 0 {
            return Err(Error::InvalidConfig("max_outer_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// A recovery instance: measurements plus optional ground truth.
#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    pub a: Matrix,
    pub y: Vector,
    pub k: usize,
    pub x_true: Option<Vector>,
    pub noise: Option<Vector>,
}

impl RecoveryProblem {
    pub fn new(
        a: Matrix,
        y: Vector,
        k: usize,
        x_true: Option<Vector>,
        noise: Option<Vector>,
    ) -> Result<Self> {
        if y.len() != a.rows() {
            return Err(Error::DimensionMismatch(
                "y length must equal matrix rows".into(),
            ));
        }
        if k > a.cols() {
            return Err(Error::InvalidConfig(format!(
                "k = {k} exceeds n = {}",
                a.cols()
            )));
        }
        if let Some(x) = &x_true {
            if x.len() != a.cols() {
                return Err(Error::DimensionMismatch(
                    "x_true length must equal matrix columns".into(),
                ));
            }
        }
        if let Some(e) = &noise {
            if e.len() != a.rows() {
                return Err(Error::DimensionMismatch(
                    "noise length must equal matrix rows".into(),
                ));
            }
        }
        Ok(RecoveryProblem {
            a,
            y,
            k,
            x_true,
            noise,
        })
    }

    pub fn relative_error(&self, x: &Vector) -> Option<f64> {
        self.x_true.as_ref().map(|xt| {
            let denom = xt.norm2();
            if denom == 0.0 {
                norm2(&sub(x.as_slice(), xt.as_slice()))
            } else {
                norm2(&sub(x.as_slice(), xt.as_slice())) / denom
            }
        })
    }
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub iteration: usize,
    pub residual: f64,
    pub relative_error: Option<f64>,
    /// Inner-QP statistics of the step that produced this iterate.
    pub qp_iterations: usize,
    pub qp_converged: bool,
    /// Residual of the thresholded iterate before the pursuit step, for
    /// the pursuit variants.
    pub pre_pursuit_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    IterationCap,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x_hat: Vector,
    pub support: SupportSet,
    pub trace: Vec<TraceRecord>,
    pub status: Status,
    /// The full iterate sequence x^0, x^1, ..., kept for inequality replay.
    pub iterates: Vec<Vector>,
}

impl SolveResult {
    pub fn iterations_used(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.trace.last().map(|t| t.residual).unwrap_or(f64::NAN)
    }
}

/// Outcome of one iteration step.
struct StepOutcome {
    x_next: Vector,
    qp_iterations: usize,
    qp_converged: bool,
    pre_pursuit_residual: Option<f64>,
}

/// Stopping decision for the iterate `x` at iteration `p`.
pub fn stopping_check(
    residual: f64,
    relative_error: Option<f64>,
    iteration: usize,
    y_norm: f64,
    config: &SolverConfig,
) -> Result<bool> {
    match config.stop_rule {
        StopRule::RelativeError => {
            let r = relative_error.ok_or(Error::InvalidConfig(
                "relative-error stopping requires ground truth x*".into(),
            ))?;
            if r <= config.stop_tol {
                return Ok(true);
            }
        }
        StopRule::Residual => {
            if residual <= config.stop_tol * y_norm {
                return Ok(true);
            }
        }
        StopRule::IterationCapOnly => {}
    }
    Ok(iteration >= config.max_outer_iter)
}

pub fn run_ntot(p: &RecoveryProblem, c: &SolverConfig) -> Result<SolveResult> {
    expect_variant(c, Variant::Ntot)?;
    solve(p, c)
}

pub fn run_ntrot(p: &RecoveryProblem, c: &SolverConfig) -> Result<SolveResult> {
    expect_variant(c, Variant::Ntrot)?;
    solve(p, c)
}

pub fn run_ntrotp(p: &RecoveryProblem, c: &SolverConfig) -> Result<SolveResult> {
    expect_variant(c, Variant::Ntrotp)?;
    solve(p, c)
}

pub fn run_iht(p: &RecoveryProblem, c: &SolverConfig) -> Result<SolveResult> {
    expect_variant(c, Variant::Iht)?;
    solve(p, c)
}

pub fn run_nsiht(p: &RecoveryProblem, c: &SolverConfig) -> Result<SolveResult> {
    expect_variant(c, Variant::Nsiht)?;
    solve(p, c)
}

pub fn run_nshtp(p: &RecoveryProblem, c: &SolverConfig) -> Result<SolveResult> {
    expect_variant(c, Variant::Nshtp)?;
    solve(p, c)
}

pub fn run_omp(p: &RecoveryProblem, c: &SolverConfig) -> Result<SolveResult> {
    expect_variant(c, Variant::Omp)?;
    solve(p, c)
}

pub fn run_sp(p: &RecoveryProblem, c: &SolverConfig) -> Result<SolveResult> {
    expect_variant(c, Variant::Sp)?;
    solve(p, c)
}

fn expect_variant(c: &SolverConfig, v: Variant) -> Result<()> {
    if c.variant != v {
        return Err(Error::InvalidConfig(format!(
            "config variant {} does not match entry point {}",
            c.variant, v
        )));
    }
    Ok(())
}

/// Runs the configured variant on the problem.
pub fn solve(problem: &RecoveryProblem, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    if matches!(config.variant, Variant::Ntrotp | Variant::Nshtp) && problem.k > problem.a.rows() {
        return Err(Error::InvalidConfig(format!(
            "pursuit variants need k <= m, got k = {} > m = {}",
            problem.k,
            problem.a.rows()
        )));
    }
    if config.stop_rule == StopRule::RelativeError && problem.x_true.is_none() {
        return Err(Error::InvalidConfig(
            "relative-error stopping requires ground truth x*".into(),
        ));
    }
    match config.variant {
        Variant::Omp => run_omp_inner(problem, config),
        Variant::Sp => run_sp_inner(problem, config),
        _ => run_framework(problem, config),
    }
}

/// The common outer loop for the thresholding-family variants.
fn run_framework(problem: &RecoveryProblem, config: &SolverConfig) -> Result<SolveResult> {
    let a = &problem.a;
    let n = a.cols();
    let y_norm = problem.y.norm2();
    let newton = if config.variant.uses_newton_step() {
        Some(NewtonOperator::new(a, config.eps)?)
    } else {
        None
    };
    let mut x = match &config.x0 {
        Some(x0) => {
            if x0.len() != n {
                return Err(Error::DimensionMismatch("x0 length must equal n".into()));
            }
            x0.clone()
        }
        None => Vector::zeros(n),
    };
    let mut warm: Option<Vector> = None;
    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    let mut status = Status::IterationCap;

    let record =
        |trace: &mut Vec<TraceRecord>, iterates: &mut Vec<Vector>, p: usize, x: &Vector, out: Option<&StepOutcome>| {
            let residual = norm2(&sub(
                problem.y.as_slice(),
                &a.mul_vec(x.as_slice()).unwrap(),
            ));
            trace.push(TraceRecord {
                iteration: p,
                residual,
                relative_error: problem.relative_error(x),
                qp_iterations: out.map(|o| o.qp_iterations).unwrap_or(0),
                qp_converged: out.map(|o| o.qp_converged).unwrap_or(true),
                pre_pursuit_residual: out.and_then(|o| o.pre_pursuit_residual),
            });
            iterates.push(x.clone());
            residual
        };

    let residual0 = record(&mut trace, &mut iterates, 0, &x, None);
    if stopping_check(
        residual0,
        trace[0].relative_error,
        0,
        y_norm,
        config,
    )? && config.stop_rule != StopRule::IterationCapOnly
        && config.max_outer_iter > 0
    {
        // Converged at the initial point only when the rule actually
        // fired, not merely because p = 0 < cap.
        if matches!(config.stop_rule, StopRule::Residual if residual0 <= config.stop_tol * y_norm)
            || matches!(config.stop_rule, StopRule::RelativeError
                if trace[0].relative_error.unwrap() <= config.stop_tol)
        {
            return Ok(finish(x, trace, iterates, Status::Converged));
        }
    }

    for p in 0..config.max_outer_iter {
        let out = step(problem, config, newton.as_ref(), &x, &mut warm)?;
        x = out.x_next.clone();
        let residual = record(&mut trace, &mut iterates, p + 1, &x, Some(&out));
        let rel = trace.last().unwrap().relative_error;
        let rule_fired = match config.stop_rule {
            StopRule::RelativeError => rel.unwrap() <= config.stop_tol,
            StopRule::Residual => residual <= config.stop_tol * y_norm,
            StopRule::IterationCapOnly => false,
        };
        if rule_fired {
            status = Status::Converged;
            break;
        }
    }
    Ok(finish(x, trace, iterates, status))
}

fn finish(x: Vector, trace: Vec<TraceRecord>, iterates: Vec<Vector>, status: Status) -> SolveResult {
    let support = SupportSet::of_nonzeros(&x);
    SolveResult {
        x_hat: x,
        support,
        trace,
        status,
        iterates,
    }
}

/// One iteration of the configured thresholding-family variant.
fn step(
    problem: &RecoveryProblem,
    config: &SolverConfig,
    newton: Option<&NewtonOperator>,
    x: &Vector,
    warm: &mut Option<Vector>,
) -> Result<StepOutcome> {
    let a = &problem.a;
    let y = &problem.y;
    let k = problem.k;
    let r = sub(y.as_slice(), &a.mul_vec(x.as_slice())?);
    let u = match config.variant {
        Variant::Iht => {
            let g = a.mul_vec_transpose(&r)?;
            Vector::new(
                x.as_slice()
                    .iter()
                    .zip(&g)
                    .map(|(xi, gi)| xi + config.lambda * gi)
                    .collect(),
            )?
        }
        _ => {
            let d = newton.expect("newton operator present").apply(&r)?;
            Vector::new(
                x.as_slice()
                    .iter()
                    .zip(&d)
                    .map(|(xi, di)| xi + config.lambda * di)
                    .collect(),
            )?
        }
    };
    match config.variant {
        Variant::Iht | Variant::Nsiht => Ok(StepOutcome {
            x_next: hard_threshold(&u, k),
            qp_iterations: 0,
            qp_converged: true,
            pre_pursuit_residual: None,
        }),
        Variant::Nshtp => {
            let thresholded = hard_threshold(&u, k);
            let support = top_k_support(&u, k);
            let pre = norm2(&sub(y.as_slice(), &a.mul_vec(thresholded.as_slice())?));
            let x_next = least_squares_on_support(a, y, &support)?;
            Ok(StepOutcome {
                x_next,
                qp_iterations: 0,
                qp_converged: true,
                pre_pursuit_residual: Some(pre),
            })
        }
        Variant::Ntot => {
            if k == 0 {
                return Ok(StepOutcome {
                    x_next: Vector::zeros(u.len()),
                    qp_iterations: 0,
                    qp_converged: true,
                    pre_pursuit_residual: None,
                });
            }
            let (w, _) = crate::thresholding::exact_optimal_threshold(a, &u, y, k)?;
            let x_next = Vector::new(crate::linalg::hadamard(u.as_slice(), w.as_slice()))?;
            Ok(StepOutcome {
                x_next,
                qp_iterations: 0,
                qp_converged: true,
                pre_pursuit_residual: None,
            })
        }
        Variant::Ntrot | Variant::Ntrotp => {
            if k == 0 {
                return Ok(StepOutcome {
                    x_next: Vector::zeros(u.len()),
                    qp_iterations: 0,
                    qp_converged: true,
                    pre_pursuit_residual: None,
                });
            }
            let qp_problem = RelaxedOtProblem::new(a, &u, y, k)?;
            let sol: QpSolution =
                solve_relaxed_ot(&qp_problem, config.qp_tol, config.qp_max_iter, warm.as_ref())?;
            *warm = Some(sol.w.clone());
            let masked = Vector::new(crate::linalg::hadamard(u.as_slice(), sol.w.as_slice()))?;
            if config.variant == Variant::Ntrot {
                Ok(StepOutcome {
                    x_next: hard_threshold(&masked, k),
                    qp_iterations: sol.iterations,
                    qp_converged: sol.converged,
                    pre_pursuit_residual: None,
                })
            } else {
                let support = top_k_support(&masked, k);
                let thresholded = support.restrict(&masked);
                let pre = norm2(&sub(y.as_slice(), &a.mul_vec(thresholded.as_slice())?));
                let x_next = least_squares_on_support(a, y, &support)?;
                Ok(StepOutcome {
                    x_next,
                    qp_iterations: sol.iterations,
                    qp_converged: sol.converged,
                    pre_pursuit_residual: Some(pre),
                })
            }
        }
        Variant::Omp | Variant::Sp => unreachable!("handled by dedicated loops"),
    }
}

/// Greedy orthogonal matching pursuit: exactly k outer iterations, each
/// adding the column most correlated with the residual, then re-solving
/// least squares on the grown support.
fn run_omp_inner(problem: &RecoveryProblem, _config: &SolverConfig) -> Result<SolveResult> {
    let a = &problem.a;
    let y = &problem.y;
    let n = a.cols();
    let mut x = Vector::zeros(n);
    let mut picked: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    let push = |trace: &mut Vec<TraceRecord>, iterates: &mut Vec<Vector>, p: usize, x: &Vector| {
        trace.push(TraceRecord {
            iteration: p,
            residual: norm2(&sub(y.as_slice(), &a.mul_vec(x.as_slice()).unwrap())),
            relative_error: problem.relative_error(x),
            qp_iterations: 0,
            qp_converged: true,
            pre_pursuit_residual: None,
        });
        iterates.push(x.clone());
    };
    push(&mut trace, &mut iterates, 0, &x);
    for p in 0..problem.k.min(a.rows()) {
        let r = sub(y.as_slice(), &a.mul_vec(x.as_slice())?);
        let corr = a.mul_vec_transpose(&r)?;
        // argmax |corr| over unpicked columns, ties to the lower index.
        let mut best: Option<(f64, usize)> = None;
        for j in 0..n {
            if picked.contains(&j) {
                continue;
            }
            let c = corr[j].abs();
            if best.map(|(b, _)| c > b).unwrap_or(true) {
                best = Some((c, j));
            }
        }
        let Some((_, j)) = best else { break };
        picked.push(j);
        let support = SupportSet::new(picked.clone(), n)?;
        x = least_squares_on_support(a, y, &support)?;
        push(&mut trace, &mut iterates, p + 1, &x);
    }
    Ok(finish(x, trace, iterates, Status::Converged))
}

/// Subspace pursuit: merge the current support with the top-k residual
/// proxy, solve on the 2k-set, prune to top-k, re-solve; stop when the
/// residual stalls or at the iteration cap.
fn run_sp_inner(problem: &RecoveryProblem, config: &SolverConfig) -> Result<SolveResult> {
    const STALL: f64 = 1e-12;
    let a = &problem.a;
    let y = &problem.y;
    let n = a.cols();
    let k = problem.k;
    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    let push = |trace: &mut Vec<TraceRecord>, iterates: &mut Vec<Vector>, p: usize, x: &Vector| -> f64 {
        let residual = norm2(&sub(y.as_slice(), &a.mul_vec(x.as_slice()).unwrap()));
        trace.push(TraceRecord {
            iteration: p,
            residual,
            relative_error: problem.relative_error(x),
            qp_iterations: 0,
            qp_converged: true,
            pre_pursuit_residual: None,
        });
        iterates.push(x.clone());
        residual
    };
    let mut x = Vector::zeros(n);
    let mut last_residual = push(&mut trace, &mut iterates, 0, &x);
    if k == 0 {
        return Ok(finish(x, trace, iterates, Status::Converged));
    }
    let mut status = Status::IterationCap;
    let mut support = {
        let proxy = Vector::new(a.mul_vec_transpose(y.as_slice())?)?;
        top_k_support(&proxy, k)
    };
    for p in 0..config.max_outer_iter {
        x = least_squares_on_support(a, y, &support)?;
        let r = sub(y.as_slice(), &a.mul_vec(x.as_slice())?);
        let proxy = Vector::new(a.mul_vec_transpose(&r)?)?;
        let merged = support.union(&top_k_support(&proxy, k));
        let merged_fit = least_squares_on_support(a, y, &merged)?;
        support = top_k_support(&merged_fit, k);
        x = least_squares_on_support(a, y, &support)?;
        let residual = push(&mut trace, &mut iterates, p + 1, &x);
        if last_residual - residual < STALL {
            status = Status::Converged;
            break;
        }
        last_residual = residual;
    }
    Ok(finish(x, trace, iterates, status))
}
