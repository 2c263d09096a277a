//! Self-contained cross-check suites: independent brute-force oracles and
//! inequality replays that validate the optimization and analysis code on
//! small instances. The CLI exposes them through `oracle-check`; the
//! acceptance tests run the same functions.

use crate::error::{Error, Result};
use crate::experiments::near_isometry;
use crate::linalg::{matvec, norm2, spectral_extremes, sub, Matrix, Vector};
use crate::qp::{project_capped_simplex, solve_relaxed_ot, RelaxedOtProblem};
use crate::rip::{
    certificate_for_theorem, exact_ric, lemma1_check, replay_contraction, TheoremCertificate,
};
use crate::rng::GaussianRng;
use crate::solvers::{solve, RecoveryProblem, SolverConfig, StopRule, Variant};
use crate::thresholding::{exact_optimal_threshold, top_k_support, SupportSet};

/// Outcome of one suite: how many checks ran and how many failed, with a
/// short note per failure (capped so reports stay readable).
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport {
            name,
            checks: 0,
            failures: 0,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }

    fn check(&mut self, ok: bool, note: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.notes.len() < 20 {
                self.notes.push(note());
            }
        }
    }
}

pub const SUITE_NAMES: [&str; 5] = [
    "projection",
    "relaxation",
    "inequalities",
    "contraction",
    "negative-control",
];

/// Runs one named suite with the given base seed.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    match name {
        "projection" => Ok(projection_suite(seed)),
        "relaxation" => Ok(relaxation_suite(seed)),
        "inequalities" => Ok(inequality_suite(seed)),
        "contraction" => Ok(contraction_suite(seed)),
        "negative-control" => Ok(negative_control_suite()),
        other => Err(Error::InvalidConfig(format!("unknown suite '{other}'"))),
    }
}

/// Runs every suite (or only the named one) and returns the reports.
pub fn run_suites(filter: Option<&str>, seed: u64) -> Result<Vec<SuiteReport>> {
    match filter {
        Some(name) => Ok(vec![run_suite(name, seed)?]),
        None => SUITE_NAMES.iter().map(|n| run_suite(n, seed)).collect(),
    }
}

/// Brute-force minimizer of `||w - v||` over the capped simplex by grid
/// search. For n <= 3 the free coordinates are scanned at the given step;
/// for n = 4 a coarse pass is refined around the incumbent.
fn brute_force_projection(v: &[f64], k: usize, step: f64) -> Vec<f64> {
    let n = v.len();
    assert!((2..=4).contains(&n) && k >= 1 && k < n);
    let objective = |w: &[f64]| -> f64 { w.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum() };
    let complete = |free: &[f64]| -> Option<Vec<f64>> {
        let s: f64 = free.iter().sum();
        let last = k as f64 - s;
        if !(-1e-9..=1.0 + 1e-9).contains(&last) {
            return None;
        }
        let mut w = free.to_vec();
        w.push(last.clamp(0.0, 1.0));
        Some(w)
    };
    let scan = |lo: &[f64], hi: &[f64], step: f64| -> Vec<f64> {
        let dims = lo.len();
        let counts: Vec<usize> = (0..dims)
            .map(|d| (((hi[d] - lo[d]) / step).round() as usize) + 1)
            .collect();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let total: usize = counts.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            let mut free = Vec::with_capacity(dims);
            for d in 0..dims {
                let i = rem % counts[d];
                rem /= counts[d];
                free.push((lo[d] + i as f64 * step).clamp(0.0, 1.0));
            }
            if let Some(w) = complete(&free) {
                let obj = objective(&w);
                if best.as_ref().map(|(b, _)| obj < *b).unwrap_or(true) {
                    best = Some((obj, w));
                }
            }
        }
        best.expect("feasible grid point exists").1
    };
    let dims = n - 1;
    if n <= 3 {
        scan(&vec![0.0; dims], &vec![1.0; dims], step)
    } else {
        // Coarse-to-fine for the 3-dimensional free block.
        let coarse = scan(&vec![0.0; dims], &vec![1.0; dims], 0.05);
        let lo: Vec<f64> = coarse[..dims].iter().map(|c| (c - 0.06).max(0.0)).collect();
        let hi: Vec<f64> = coarse[..dims].iter().map(|c| (c + 0.06).min(1.0)).collect();
        scan(&lo, &hi, step)
    }
}

/// Feasibility, idempotence, nonexpansiveness on random pairs, plus
/// brute-force-grid agreement on n <= 4 instances.
pub fn projection_suite(seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("projection");
    let mut rng = GaussianRng::new(seed);
    for trial in 0..1000 {
        let n = 1 + rng.next_below(15);
        let k = 1 + rng.next_below(n);
        let scale = 1.0 + rng.next_f64() * 4.0;
        let v1 = Vector::new((0..n).map(|_| scale * rng.next_gaussian()).collect()).unwrap();
        let v2 = Vector::new((0..n).map(|_| scale * rng.next_gaussian()).collect()).unwrap();
        let p1 = project_capped_simplex(&v1, k).unwrap();
        let p2 = project_capped_simplex(&v2, k).unwrap();
        let sum: f64 = p1.as_slice().iter().sum();
        let boxed = p1
            .as_slice()
            .iter()
            .all(|&w| (-1e-12..=1.0 + 1e-12).contains(&w));
        report.check(
            (sum - k as f64).abs() <= 1e-9 * (k as f64).max(1.0) && boxed,
            || format!("trial {trial}: infeasible projection (sum {sum}, k {k})"),
        );
        let pp1 = project_capped_simplex(&p1, k).unwrap();
        report.check(
            norm2(&sub(pp1.as_slice(), p1.as_slice())) <= 1e-12,
            || format!("trial {trial}: projection not idempotent"),
        );
        let d_in = norm2(&sub(v1.as_slice(), v2.as_slice()));
        let d_out = norm2(&sub(p1.as_slice(), p2.as_slice()));
        report.check(d_out <= d_in + 1e-12, || {
            format!("trial {trial}: expansion {d_out} > {d_in}")
        });
    }
    for trial in 0..12 {
        let n = 2 + rng.next_below(3);
        let k = 1 + rng.next_below(n - 1);
        let v = Vector::new((0..n).map(|_| 1.5 * rng.next_gaussian()).collect()).unwrap();
        let exact = project_capped_simplex(&v, k).unwrap();
        let step = if n <= 3 { 1e-3 } else { 2e-3 };
        let grid = brute_force_projection(v.as_slice(), k, step);
        let gap = exact
            .as_slice()
            .iter()
            .zip(&grid)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        report.check(gap <= 2e-3, || {
            format!("grid trial {trial} (n {n}, k {k}): max gap {gap}")
        });
    }
    report
}

/// The relaxed QP never exceeds the exhaustive binary optimum, and its
/// rounding frequently recovers the binary-optimal support.
pub fn relaxation_suite(seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("relaxation");
    let mut rng = GaussianRng::new(seed);
    let trials = 220;
    let mut rounded_matches = 0;
    for trial in 0..trials {
        let n = 6 + rng.next_below(7);
        let m = 3 + rng.next_below(n - 2);
        let k = 1 + rng.next_below(3.min(n - 1));
        let a = Matrix::new(m, n, rng.gaussian_vec(m * n)).unwrap();
        let u = Vector::new(rng.gaussian_vec(n)).unwrap();
        let y = Vector::new(rng.gaussian_vec(m)).unwrap();
        let (w_bin, binary_obj) = exact_optimal_threshold(&a, &u, &y, k).unwrap();
        let qp = RelaxedOtProblem::new(&a, &u, &y, k).unwrap();
        let sol = solve_relaxed_ot(&qp, 1e-10, 50_000, None).unwrap();
        report.check(sol.objective <= binary_obj + 1e-8, || {
            format!(
                "trial {trial}: relaxed objective {} exceeds binary optimum {}",
                sol.objective, binary_obj
            )
        });
        let masked = Vector::new(crate::linalg::hadamard(u.as_slice(), sol.w.as_slice())).unwrap();
        let rounded = top_k_support(&masked, k);
        let binary_support = SupportSet::of_nonzeros(&w_bin);
        if rounded == binary_support {
            rounded_matches += 1;
        }
    }
    report.check(rounded_matches * 10 >= trials, || {
        format!("rounding matched the binary support only {rounded_matches}/{trials} times")
    });
    report
}

/// Samples an instance family with exactly computable, sub-unit isometry
/// constants: a rescaled near-isometry plus a small Gaussian perturbation.
fn mild_matrix(rng: &mut GaussianRng, m: usize, n: usize) -> Matrix {
    let base = near_isometry(m, n, rng.next_u64());
    let data: Vec<f64> = base
        .entries()
        .iter()
        .map(|&v| v + 0.03 * rng.next_gaussian())
        .collect();
    Matrix::new(m, n, data).unwrap()
}

/// Operator-norm tail bound, the restricted Newton-step bound, and the
/// optimal-thresholding error bound, replayed on random draws with exact
/// isometry constants.
pub fn inequality_suite(seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("inequalities");
    let mut rng = GaussianRng::new(seed);

    // Tail bound: ||(A^T A + eps I)^{-1} A^T u|| <= sigma_1/(eps + sigma_1^2) ||u||.
    for trial in 0..1000 {
        let m = 2 + rng.next_below(5);
        let n = m + rng.next_below(6);
        let a = Matrix::new(m, n, rng.gaussian_vec(m * n)).unwrap();
        let s = spectral_extremes(&a).unwrap();
        // The bound is applied under eps > sigma_1^2; below that threshold
        // intermediate singular values can dominate the stated constant.
        let eps = s.sigma_max * s.sigma_max * (1.0 + rng.next_f64() * 3.0) + 0.01;
        let u = Vector::new(rng.gaussian_vec(m)).unwrap();
        let d = crate::linalg::newton_direction(&a, eps, &u).unwrap();
        let bound = s.sigma_max / (eps + s.sigma_max * s.sigma_max) * u.norm2();
        report.check(d.norm2() <= bound + 1e-9, || {
            format!("tail trial {trial}: {} > {}", d.norm2(), bound)
        });
    }

    // Restricted Newton-step bound on precondition-satisfying draws.
    for trial in 0..1000 {
        let a = Matrix::new(4, 8, rng.gaussian_vec(32)).unwrap();
        let s = spectral_extremes(&a).unwrap();
        let s1sq = s.sigma_max * s.sigma_max;
        let eps = s1sq * (1.0 + rng.next_f64() * 3.0) + 0.01;
        let lambda = rng.next_f64() * (eps + s.sigma_min * s.sigma_min);
        let mut u = Vector::zeros(8);
        u[rng.next_below(8)] = rng.next_gaussian();
        u[rng.next_below(8)] = rng.next_gaussian();
        let omega = SupportSet::new(vec![rng.next_below(8)], 8).unwrap();
        let r = lemma1_check(&a, eps, lambda, &u, &omega, 4).unwrap();
        report.check(r.applicable && r.satisfied, || {
            format!(
                "restricted-bound trial {trial}: lhs {} rhs {} applicable {}",
                r.lhs, r.rhs, r.applicable
            )
        });
    }

    // Optimal-thresholding error bound with exact constants.
    let mut done = 0;
    let mut attempts = 0;
    while done < 200 && attempts < 2000 {
        attempts += 1;
        let (m, n, k) = (8, 9, 1 + rng.next_below(2));
        let a = mild_matrix(&mut rng, m, n);
        let dk = exact_ric(&a, k).unwrap().delta;
        let d2k = exact_ric(&a, 2 * k).unwrap().delta;
        if d2k >= 0.95 {
            continue;
        }
        let mut x_hat = Vector::zeros(n);
        let mut support = Vec::new();
        while support.len() < k {
            let j = rng.next_below(n);
            if !support.contains(&j) {
                support.push(j);
            }
        }
        for &j in &support {
            x_hat[j] = rng.next_gaussian();
        }
        let eta = Vector::new(rng.gaussian_vec(m).iter().map(|e| 0.05 * e).collect()).unwrap();
        let ax = matvec(&a, &x_hat).unwrap();
        let y = Vector::new(
            ax.as_slice()
                .iter()
                .zip(eta.as_slice())
                .map(|(a, e)| a + e)
                .collect(),
        )
        .unwrap();
        let u = Vector::new(rng.gaussian_vec(n)).unwrap();
        let (w, _) = exact_optimal_threshold(&a, &u, &y, k).unwrap();
        let z = Vector::new(crate::linalg::hadamard(u.as_slice(), w.as_slice())).unwrap();
        // The comparison mask covers the ground-truth support exactly.
        let w_hat: Vec<f64> = {
            let mut v = vec![0.0; n];
            for &j in &support {
                v[j] = 1.0;
            }
            let mut extra = 0;
            for j in 0..n {
                if v[j] == 0.0 && support.len() + extra < k {
                    v[j] = 1.0;
                    extra += 1;
                }
            }
            v
        };
        let lhs = norm2(&sub(z.as_slice(), x_hat.as_slice()));
        let diff_masked: Vec<f64> = x_hat
            .as_slice()
            .iter()
            .zip(u.as_slice())
            .zip(&w_hat)
            .map(|((x, u), w)| (x - u) * w)
            .collect();
        let rhs = ((1.0 + dk) / (1.0 - d2k)).sqrt() * norm2(&diff_masked)
            + 2.0 / (1.0 - d2k).sqrt() * eta.norm2();
        report.check(lhs <= rhs + 1e-9, || {
            format!("thresholding-bound attempt {attempts}: lhs {lhs} rhs {rhs}")
        });
        done += 1;
    }
    report.check(done == 200, || {
        format!("only {done} enumerable instances found in {attempts} attempts")
    });
    report
}

/// Builds a certificate on a near-isometry with the canonical parameter
/// choice `eps = sigma_1^2 + 1`, `lambda = eps + sigma_m^2`.
pub fn certified_instance(theorem: u8, seed: u64) -> Result<(Matrix, TheoremCertificate)> {
    let a = near_isometry(9, 10, seed);
    let s = spectral_extremes(&a)?;
    let eps = s.sigma_max * s.sigma_max + 1.0;
    let lambda = eps + s.sigma_min * s.sigma_min;
    let cert = certificate_for_theorem(theorem, &a, 1, eps, lambda)?;
    Ok((a, cert))
}

/// Certified contraction replays: on instances each theorem declares valid,
/// the matching algorithm's iterates obey the per-iteration bound and the
/// noiseless error decays at least geometrically with factor rho.
pub fn contraction_suite(seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("contraction");
    let mut rng = GaussianRng::new(seed);
    for theorem in 1..=3u8 {
        let variant = match theorem {
            1 => Variant::Ntot,
            2 => Variant::Ntrot,
            _ => Variant::Ntrotp,
        };
        let mut certified = 0;
        let mut attempts = 0;
        while certified < 50 && attempts < 500 {
            attempts += 1;
            let inst_seed = rng.next_u64();
            let (a, cert) = match certified_instance(theorem, inst_seed) {
                Ok(v) => v,
                Err(_) => continue,
            };
            if !cert.valid {
                continue;
            }
            certified += 1;
            let n = a.cols();
            let mut x_true = Vector::zeros(n);
            x_true[rng.next_below(n)] = 1.0 + rng.next_f64();
            let y = matvec(&a, &x_true).unwrap();
            let problem = RecoveryProblem::new(a, y, 1, Some(x_true.clone()), None).unwrap();
            let mut config = SolverConfig::new(variant, cert.eps, cert.lambda);
            config.max_outer_iter = 25;
            config.stop_rule = StopRule::IterationCapOnly;
            config.qp_tol = 1e-10;
            config.qp_max_iter = 20_000;
            let result = solve(&problem, &config).unwrap();
            let replay = replay_contraction(&result, &problem, &cert, 1e-8).unwrap();
            report.check(replay.violations == 0, || {
                format!(
                    "theorem {theorem} seed {inst_seed}: {} violations (max {})",
                    replay.violations, replay.max_violation
                )
            });
            // Noiseless run: error never exceeds rho^p * initial error.
            let e0 = norm2(&sub(result.iterates[0].as_slice(), x_true.as_slice()));
            let mut geometric_ok = true;
            let mut factor = 1.0;
            for it in &result.iterates[1..] {
                factor *= cert.rho;
                let e = norm2(&sub(it.as_slice(), x_true.as_slice()));
                if e > factor * e0 + 1e-8 {
                    geometric_ok = false;
                    break;
                }
            }
            report.check(geometric_ok, || {
                format!("theorem {theorem} seed {inst_seed}: error above rho^p envelope")
            });
        }
        report.check(certified >= 50, || {
            format!("theorem {theorem}: only {certified} certified instances in {attempts} draws")
        });
    }
    report
}

/// A deliberately wrong top-k rule (ties resolved to the higher index),
/// used to prove the comparison harness can see a faulty implementation.
fn faulty_top_k(x: &Vector, k: usize) -> SupportSet {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| {
        x[j].abs()
            .partial_cmp(&x[i].abs())
            .unwrap()
            .then(j.cmp(&i)) // wrong: prefers the higher index on ties
    });
    let mut idx: Vec<usize> = order.into_iter().take(k).collect();
    idx.sort_unstable();
    SupportSet::new(idx, x.len()).unwrap()
}

/// Negative control: the injected faulty tie rule must be flagged as
/// disagreeing with the reference on a tie-heavy instance.
pub fn negative_control_suite() -> SuiteReport {
    let mut report = SuiteReport::new("negative-control");
    let x = Vector::new(vec![2.0, -2.0, 2.0, 1.0]).unwrap();
    let good = top_k_support(&x, 2);
    let bad = faulty_top_k(&x, 2);
    report.check(good.indices() == [0, 1], || {
        format!("reference tie rule picked {:?}", good.indices())
    });
    report.check(good != bad, || {
        "harness failed to flag the faulty tie rule".to_string()
    });
    report
}
