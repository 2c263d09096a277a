//! Exact restricted isometry constants on small matrices, parameter-range
//! certificates for the three convergence theorems, and inequality replay
//! against recorded solver runs.
//!
//! RIC computation enumerates every support of the requested order, so it
//! is guarded to desk-scale instances; it exists as an exact oracle, not a
//! production estimator.

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigh, matvec, norm2, spectral_extremes, sub, Matrix, SpectralBounds, Vector};
use crate::solvers::{RecoveryProblem, SolveResult};
use crate::thresholding::{binomial, top_k_support, SupportSet};

/// Guard for exhaustive support enumeration in [`exact_ric`].
pub const RIC_GUARD: u64 = 200_000;

/// Exact q-th order restricted isometry constant with a witness support.
#[derive(Debug, Clone)]
pub struct RicResult {
    pub order: usize,
    pub delta: f64,
    pub witness_support: SupportSet,
    pub supports_enumerated: u64,
}

/// Exact RIC: `delta_q = max_{|S| = q} max(lmax(A_S^T A_S) - 1, 1 - lmin)`,
/// with eigenvalues from a symmetric eigen-solve on each q x q Gram block.
/// Ties on the extreme go to the lexicographically smallest support.
pub fn exact_ric(a: &Matrix, q: usize) -> Result<RicResult> {
    let n = a.cols();
    if q == 0 || q > n {
        return Err(Error::InvalidConfig(format!(
            "RIC order {q} outside 1..={n}"
        )));
    }
    let count = binomial(n, q);
    if count > RIC_GUARD {
        return Err(Error::GuardExceeded(format!(
            "C({n}, {q}) = {count} exceeds the RIC enumeration cap {RIC_GUARD}"
        )));
    }
    let gram = a.gram_cols();
    let best = enumerate_ric(&gram, n, q);
    let (delta, witness) = best.expect("at least one support");
    Ok(RicResult {
        order: q,
        delta,
        witness_support: SupportSet::new(witness, n)?,
        supports_enumerated: count,
    })
}

fn delta_for_support(gram: &[f64], n: usize, support: &[usize]) -> f64 {
    let q = support.len();
    let mut block = vec![0.0; q * q];
    for (bi, &i) in support.iter().enumerate() {
        for (bj, &j) in support.iter().enumerate() {
            block[bi * q + bj] = gram[i * n + j];
        }
    }
    let (ev, _) = jacobi_eigh(&block, q);
    (ev[q - 1] - 1.0).max(1.0 - ev[0])
}

fn better_witness(
    a: Option<(f64, Vec<usize>)>,
    b: Option<(f64, Vec<usize>)>,
) -> Option<(f64, Vec<usize>)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

fn ric_block(gram: &[f64], n: usize, q: usize, first: usize) -> Option<(f64, Vec<usize>)> {
    let mut support: Vec<usize> = (0..q).map(|i| first + i).collect();
    if *support.last().unwrap() >= n {
        return None;
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let d = delta_for_support(gram, n, &support);
        best = better_witness(best, Some((d, support.clone())));
        let mut i = q;
        loop {
            if i == 1 {
                return best;
            }
            i -= 1;
            if support[i] < n - (q - i) {
                support[i] += 1;
                for t in (i + 1)..q {
                    support[t] = support[t - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(feature = "parallel")]
fn enumerate_ric(gram: &[f64], n: usize, q: usize) -> Option<(f64, Vec<usize>)> {
    use rayon::prelude::*;
    (0..=(n - q))
        .into_par_iter()
        .map(|first| ric_block(gram, n, q, first))
        .reduce(|| None, better_witness)
}

#[cfg(not(feature = "parallel"))]
fn enumerate_ric(gram: &[f64], n: usize, q: usize) -> Option<(f64, Vec<usize>)> {
    (0..=(n - q)).fold(None, |acc, first| {
        better_witness(acc, ric_block(gram, n, q, first))
    })
}

/// Sequential RIC enumeration, public as the fallback path and for
/// benchmarking against the parallel dispatch.
pub fn exact_ric_sequential(a: &Matrix, q: usize) -> Result<RicResult> {
    let n = a.cols();
    if q == 0 || q > n {
        return Err(Error::InvalidConfig(format!(
            "RIC order {q} outside 1..={n}"
        )));
    }
    let count = binomial(n, q);
    if count > RIC_GUARD {
        return Err(Error::GuardExceeded(format!(
            "C({n}, {q}) = {count} exceeds the RIC enumeration cap {RIC_GUARD}"
        )));
    }
    let gram = a.gram_cols();
    let best = (0..=(n - q)).fold(None, |acc, first| {
        better_witness(acc, ric_block(&gram, n, q, first))
    });
    let (delta, witness) = best.expect("at least one support");
    Ok(RicResult {
        order: q,
        delta,
        witness_support: SupportSet::new(witness, n)?,
        supports_enumerated: count,
    })
}

/// Parameter-range certificate for one of the three convergence theorems.
#[derive(Debug, Clone)]
pub struct TheoremCertificate {
    pub theorem_id: u8,
    pub k: usize,
    pub delta_k: f64,
    pub delta_2k: f64,
    /// Present for theorems 2 and 3.
    pub delta_3k: Option<f64>,
    pub sigma: SpectralBounds,
    pub eps: f64,
    pub lambda: f64,
    pub eps_lower_bound: f64,
    /// Half-open interval `(lower, upper]` of admissible stepsizes.
    pub lambda_interval: (f64, f64),
    pub rho: f64,
    pub tau: f64,
    pub valid: bool,
}

impl TheoremCertificate {
    /// Flat key=value rendering for CLI output.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("theorem = {}\n", self.theorem_id));
        out.push_str(&format!("k = {}\n", self.k));
        out.push_str(&format!("delta_k = {:.12}\n", self.delta_k));
        out.push_str(&format!("delta_2k = {:.12}\n", self.delta_2k));
        if let Some(d3) = self.delta_3k {
            out.push_str(&format!("delta_3k = {d3:.12}\n"));
        }
        out.push_str(&format!("sigma_max = {:.12}\n", self.sigma.sigma_max));
        out.push_str(&format!("sigma_min = {:.12}\n", self.sigma.sigma_min));
        out.push_str(&format!("eps = {:.12}\n", self.eps));
        out.push_str(&format!("lambda = {:.12}\n", self.lambda));
        out.push_str(&format!("eps_lower_bound = {:.12}\n", self.eps_lower_bound));
        out.push_str(&format!(
            "lambda_interval = ({:.12}, {:.12}]\n",
            self.lambda_interval.0, self.lambda_interval.1
        ));
        out.push_str(&format!("rho = {:.12}\n", self.rho));
        out.push_str(&format!("tau = {:.12}\n", self.tau));
        out.push_str(&format!("valid = {}\n", self.valid));
        out
    }
}

/// RIC orders above `n` coincide with order n (every vector is n-sparse).
fn ric_order(a: &Matrix, q: usize) -> Result<f64> {
    Ok(exact_ric(a, q.min(a.cols()))?.delta)
}

struct CertificateInputs {
    delta_k: f64,
    delta_2k: f64,
    delta_3k: f64,
    sigma: SpectralBounds,
    s1sq: f64,
    smsq: f64,
}

fn certificate_inputs(a: &Matrix, k: usize, need_3k: bool) -> Result<CertificateInputs> {
    if k == 0 {
        return Err(Error::InvalidConfig("certificate needs k >= 1".into()));
    }
    let sigma = spectral_extremes(a)?;
    let delta_k = ric_order(a, k)?;
    let delta_2k = ric_order(a, 2 * k)?;
    let delta_3k = if need_3k { ric_order(a, 3 * k)? } else { 0.0 };
    Ok(CertificateInputs {
        delta_k,
        delta_2k,
        delta_3k,
        s1sq: sigma.sigma_max * sigma.sigma_max,
        smsq: sigma.sigma_min * sigma.sigma_min,
        sigma,
    })
}

/// Shared range computation: given the margin `gap = (bound - delta)` that
/// must stay positive, produces `(eps_lower, lambda_lower, lambda_upper)`.
fn parameter_ranges(inp: &CertificateInputs, gap: f64, eps: f64) -> (f64, f64, f64) {
    let eps_lower = if gap > 0.0 {
        inp.s1sq.max(((inp.s1sq - inp.smsq) / gap - 1.0) * inp.s1sq)
    } else {
        f64::INFINITY
    };
    let lambda_lower = eps + inp.s1sq - gap * (eps + inp.s1sq) / inp.s1sq;
    let lambda_upper = eps + inp.smsq;
    (eps_lower, lambda_lower, lambda_upper)
}

/// Certificate for the NTOT contraction theorem: requires
/// `delta_2k < 0.5349` plus the (eps, lambda) ranges, and carries the
/// contraction factor rho and noise factor tau of the per-iteration bound.
pub fn theorem1_certificate(a: &Matrix, k: usize, eps: f64, lambda: f64) -> Result<TheoremCertificate> {
    let inp = certificate_inputs(a, k, false)?;
    let (dk, d2k) = (inp.delta_k, inp.delta_2k);
    let delta_ok = d2k < 0.5349;
    let ratio = if d2k < 1.0 {
        ((1.0 - d2k) / (1.0 + dk)).sqrt()
    } else {
        f64::NAN
    };
    let gap = ratio - d2k;
    let (eps_lower, lambda_lower, lambda_upper) = parameter_ranges(&inp, gap, eps);
    let shrink = d2k + inp.s1sq - lambda * inp.s1sq / (eps + inp.s1sq);
    let (rho, tau) = if d2k < 1.0 {
        let amp = ((1.0 + dk) / (1.0 - d2k)).sqrt();
        let rho = amp * shrink;
        let tau = (lambda * inp.sigma.sigma_max * (1.0 + dk).sqrt() / (eps + inp.s1sq) + 2.0)
            / (1.0 - d2k).sqrt();
        (rho, tau)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let valid = delta_ok
        && eps > eps_lower
        && lambda > lambda_lower
        && lambda <= lambda_upper
        && lambda_lower < lambda_upper;
    Ok(TheoremCertificate {
        theorem_id: 1,
        k,
        delta_k: dk,
        delta_2k: d2k,
        delta_3k: None,
        sigma: inp.sigma,
        eps,
        lambda,
        eps_lower_bound: eps_lower,
        lambda_interval: (lambda_lower, lambda_upper),
        rho,
        tau,
        valid,
    })
}

/// Certificate for the NTROT contraction theorem (`delta_3k < 0.2119`).
pub fn theorem2_certificate(a: &Matrix, k: usize, eps: f64, lambda: f64) -> Result<TheoremCertificate> {
    let inp = certificate_inputs(a, k, true)?;
    let (dk, d2k, d3k) = (inp.delta_k, inp.delta_2k, inp.delta_3k);
    let delta_ok = d3k < 0.2119;
    let bound = if d3k < 1.0 {
        1.0 / (3.0 * ((1.0 + d3k) / (1.0 - d3k)).sqrt() + 1.0)
    } else {
        f64::NAN
    };
    let gap = bound - d3k;
    let (eps_lower, lambda_lower, lambda_upper) = parameter_ranges(&inp, gap, eps);
    let damp = lambda * inp.s1sq / (eps + inp.s1sq);
    let (rho, tau) = if d2k < 1.0 {
        let amp = ((1.0 + dk) / (1.0 - d2k)).sqrt();
        let rho = amp * (d2k + 2.0 * d3k + 3.0 * inp.s1sq - 3.0 * damp) + d3k + inp.s1sq - damp;
        let noise_damp = lambda * inp.sigma.sigma_max / (eps + inp.s1sq);
        let tau =
            (3.0 * noise_damp * (1.0 + dk).sqrt() + 2.0) / (1.0 - d2k).sqrt() + noise_damp;
        (rho, tau)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let valid = delta_ok
        && eps > eps_lower
        && lambda > lambda_lower
        && lambda <= lambda_upper
        && lambda_lower < lambda_upper;
    Ok(TheoremCertificate {
        theorem_id: 2,
        k,
        delta_k: dk,
        delta_2k: d2k,
        delta_3k: Some(d3k),
        sigma: inp.sigma,
        eps,
        lambda,
        eps_lower_bound: eps_lower,
        lambda_interval: (lambda_lower, lambda_upper),
        rho,
        tau,
        valid,
    })
}

/// Certificate for the NTROTP contraction theorem (`delta_3k < 0.2`).
pub fn theorem3_certificate(a: &Matrix, k: usize, eps: f64, lambda: f64) -> Result<TheoremCertificate> {
    let inp = certificate_inputs(a, k, true)?;
    let (dk, d2k, d3k) = (inp.delta_k, inp.delta_2k, inp.delta_3k);
    let delta_ok = d3k < 0.2;
    let big = if d3k < 1.0 {
        3.0 / (1.0 - d3k) + 1.0 / (1.0 - d3k * d3k).sqrt()
    } else {
        f64::NAN
    };
    let gap = 1.0 / big - d3k;
    let (eps_lower, lambda_lower, lambda_upper) = parameter_ranges(&inp, gap, eps);
    let damp = lambda * inp.s1sq / (eps + inp.s1sq);
    let (rho, tau) = if d2k < 1.0 {
        let rho = big * (d3k + inp.s1sq - damp);
        let noise_damp = lambda * inp.sigma.sigma_max / (eps + inp.s1sq);
        let tau = (1.0 + dk).sqrt() / (1.0 - d2k)
            + (3.0 * noise_damp * (1.0 + dk).sqrt() + 2.0) / ((1.0 - d2k) * (1.0 + d2k).sqrt())
            + noise_damp / (1.0 - d2k * d2k).sqrt();
        (rho, tau)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let valid = delta_ok
        && eps > eps_lower
        && lambda > lambda_lower
        && lambda <= lambda_upper
        && lambda_lower < lambda_upper;
    Ok(TheoremCertificate {
        theorem_id: 3,
        k,
        delta_k: dk,
        delta_2k: d2k,
        delta_3k: Some(d3k),
        sigma: inp.sigma,
        eps,
        lambda,
        eps_lower_bound: eps_lower,
        lambda_interval: (lambda_lower, lambda_upper),
        rho,
        tau,
        valid,
    })
}

/// Builds the certificate for the theorem matching a solver variant:
/// theorem 1 for NTOT, 2 for NTROT, 3 for NTROTP.
pub fn certificate_for_theorem(
    theorem_id: u8,
    a: &Matrix,
    k: usize,
    eps: f64,
    lambda: f64,
) -> Result<TheoremCertificate> {
    match theorem_id {
        1 => theorem1_certificate(a, k, eps, lambda),
        2 => theorem2_certificate(a, k, eps, lambda),
        3 => theorem3_certificate(a, k, eps, lambda),
        _ => Err(Error::InvalidConfig(format!("no theorem {theorem_id}"))),
    }
}

/// Default parameter rule: `eps = max(sigma_1^2 + 1, lambda - sigma_m^2)`,
/// which guarantees `eps > sigma_1^2` and `lambda <= eps + sigma_m^2`.
pub fn default_parameters(a: &Matrix, lambda: f64) -> Result<f64> {
    let s = spectral_extremes(a)?;
    Ok((s.sigma_max * s.sigma_max + 1.0).max(lambda - s.sigma_min * s.sigma_min))
}

/// Outcome of replaying a contraction certificate against a recorded run.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub pairs_checked: usize,
    pub violations: usize,
    pub max_violation: f64,
    /// Effective noise level `||A x*_{S̄} + eta||` used in the bound.
    pub effective_noise: f64,
}

/// Checks `||x^{p+1} - x_S|| <= rho ||x^p - x_S|| + tau ||A x_{S̄} + eta||`
/// at every consecutive pair of recorded iterates.
pub fn replay_contraction(
    result: &SolveResult,
    problem: &RecoveryProblem,
    cert: &TheoremCertificate,
    slack: f64,
) -> Result<ContractionReport> {
    let x_true = problem.x_true.as_ref().ok_or(Error::MissingGroundTruth)?;
    if !cert.valid {
        return Err(Error::InvalidCertificate(
            "contraction replay needs a valid certificate".into(),
        ));
    }
    let s = top_k_support(x_true, cert.k);
    let x_s = s.restrict(x_true);
    // eta' = A x_{S̄} + eta = y - A x_S.
    let ax_s = matvec(&problem.a, &x_s)?;
    let eta_eff = norm2(&sub(problem.y.as_slice(), ax_s.as_slice()));
    let mut pairs = 0;
    let mut violations = 0;
    let mut max_violation = f64::NEG_INFINITY;
    for pair in result.iterates.windows(2) {
        let err_p = norm2(&sub(pair[0].as_slice(), x_s.as_slice()));
        let err_next = norm2(&sub(pair[1].as_slice(), x_s.as_slice()));
        let bound = cert.rho * err_p + cert.tau * eta_eff;
        let violation = err_next - bound;
        max_violation = max_violation.max(violation);
        if violation > slack {
            violations += 1;
        }
        pairs += 1;
    }
    Ok(ContractionReport {
        pairs_checked: pairs,
        violations,
        max_violation: if pairs == 0 {
            0.0
        } else {
            max_violation
        },
        effective_noise: eta_eff,
    })
}

/// Outcome of a single operator-bound check.
#[derive(Debug, Clone)]
pub struct Lemma1Report {
    /// False when the (eps, lambda) precondition is out of scope.
    pub applicable: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Checks the restricted operator bound
/// `||[(I - lambda (A^T A + eps I)^{-1} A^T A) u]_Omega||
///    <= (delta_t + sigma_1^2 - lambda sigma_1^2/(eps + sigma_1^2)) ||u||`
/// under the preconditions `eps > sigma_1^2`, `lambda <= eps + sigma_m^2`,
/// and `|Omega ∪ supp(u)| <= t`, with `delta_t` computed exactly.
pub fn lemma1_check(
    a: &Matrix,
    eps: f64,
    lambda: f64,
    u: &Vector,
    omega: &SupportSet,
    t: usize,
) -> Result<Lemma1Report> {
    let sigma = spectral_extremes(a)?;
    let s1sq = sigma.sigma_max * sigma.sigma_max;
    let smsq = sigma.sigma_min * sigma.sigma_min;
    let span = omega.union(&SupportSet::of_nonzeros(u));
    if eps <= s1sq || lambda > eps + smsq || span.len() > t {
        return Ok(Lemma1Report {
            applicable: false,
            lhs: 0.0,
            rhs: 0.0,
            satisfied: true,
        });
    }
    let delta_t = ric_order(a, t)?;
    let au = matvec(a, u)?;
    let d = crate::linalg::newton_direction(a, eps, &au)?;
    // v = u - lambda * (A^T A + eps I)^{-1} A^T A u
    let v = Vector::new(
        u.as_slice()
            .iter()
            .zip(d.as_slice())
            .map(|(ui, di)| ui - lambda * di)
            .collect(),
    )?;
    let lhs = omega.restrict(&v).norm2();
    let rhs = (delta_t + s1sq - lambda * s1sq / (eps + s1sq)) * u.norm2();
    Ok(Lemma1Report {
        applicable: true,
        lhs,
        rhs,
        satisfied: lhs <= rhs + 1e-9 * u.norm2().max(1.0),
    })
}
