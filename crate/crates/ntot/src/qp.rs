//! Convex quadratic program for the relaxed optimal k-thresholding step:
//! minimize `||y - A(u ⊗ w)||^2` over the capped simplex
//! `{w : e^T w = k, 0 <= w <= 1}`.
//!
//! The projection onto the capped simplex is computed exactly by a sorted
//! breakpoint scan; the QP itself runs accelerated projected gradient with
//! a function-value monotone safeguard (acceleration restarts whenever the
//! objective would increase).

use crate::error::{Error, Result};
use crate::linalg::{norm2, sub, Matrix, Vector};
use crate::rng::SplitMix64;

/// One relaxed optimal-thresholding subproblem.
#[derive(Debug, Clone)]
pub struct RelaxedOtProblem<'a> {
    pub a: &'a Matrix,
    pub u: &'a Vector,
    pub y: &'a Vector,
    pub k: usize,
}

impl<'a> RelaxedOtProblem<'a> {
    pub fn new(a: &'a Matrix, u: &'a Vector, y: &'a Vector, k: usize) -> Result<Self> {
        if u.len() != a.cols() {
            return Err(Error::DimensionMismatch(
                "relaxed OT: u length must equal A columns".into(),
            ));
        }
        if y.len() != a.rows() {
            return Err(Error::DimensionMismatch(
                "relaxed OT: y length must equal A rows".into(),
            ));
        }
        if k == 0 || k > a.cols() {
            return Err(Error::InvalidConfig(format!(
                "relaxed OT: k = {k} outside 1..={}",
                a.cols()
            )));
        }
        Ok(RelaxedOtProblem { a, u, y, k })
    }
}

/// Result of a relaxed optimal-thresholding solve.
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub w: Vector,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

/// Euclidean projection onto `{w : e^T w = k, 0 <= w <= 1}`.
///
/// The projection is `w_i = clamp(v_i - tau, 0, 1)` for the unique `tau`
/// with `sum_i w_i = k`; `tau` is located by an exact scan over the sorted
/// breakpoints `{v_i, v_i - 1}`, so the result is exact up to rounding in
/// finitely many steps.
pub fn project_capped_simplex(v: &Vector, k: usize) -> Result<Vector> {
    let n = v.len();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "projection: k = {k} outside 1..={n}"
        )));
    }
    if k == n {
        return Ok(Vector::new(vec![1.0; n]).unwrap());
    }
    let mut vs: Vec<f64> = v.as_slice().to_vec();
    vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + vs[i];
    }
    // sum_i clamp(v_i - tau, 0, 1), nonincreasing in tau.
    let g = |tau: f64| -> f64 {
        let hi = vs.partition_point(|&x| x < tau + 1.0);
        let lo = vs.partition_point(|&x| x <= tau);
        let capped = (n - hi) as f64;
        let lo = lo.min(hi);
        let middle = (prefix[hi] - prefix[lo]) - tau * (hi - lo) as f64;
        capped + middle
    };
    let mut breakpoints: Vec<f64> = Vec::with_capacity(2 * n);
    breakpoints.extend(vs.iter().copied());
    breakpoints.extend(vs.iter().map(|x| x - 1.0));
    breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breakpoints.dedup();
    let kf = k as f64;
    // Largest breakpoint with g >= k; g(min bp) = n >= k, g(max bp) = 0 < k.
    let idx = breakpoints.partition_point(|&b| g(b) >= kf);
    let tau = if idx == 0 {
        breakpoints[0]
    } else {
        let b_lo = breakpoints[idx - 1];
        let g_lo = g(b_lo);
        if g_lo == kf || idx == breakpoints.len() {
            b_lo
        } else {
            let b_hi = breakpoints[idx];
            // Slope on the open segment is minus the middle count there.
            let mid = 0.5 * (b_lo + b_hi);
            let hi = vs.partition_point(|&x| x < mid + 1.0);
            let lo = vs.partition_point(|&x| x <= mid);
            let cnt = (hi - lo) as f64;
            if cnt == 0.0 {
                b_lo
            } else {
                b_lo + (g_lo - kf) / cnt
            }
        }
    };
    let w: Vec<f64> = v
        .as_slice()
        .iter()
        .map(|&x| (x - tau).clamp(0.0, 1.0))
        .collect();
    Vector::new(w)
}

/// Number of power-iteration steps used to estimate the gradient Lipschitz
/// constant, and the inflation factor applied on top.
const LIPSCHITZ_POWER_STEPS: usize = 100;
const LIPSCHITZ_INFLATION: f64 = 1.01;

/// Estimates `sigma_max(B)^2` for `B = A diag(u)` by fixed-step power
/// iteration on `B^T B` through matvecs.
fn largest_squared_singular_value(a: &Matrix, u: &[f64]) -> f64 {
    let n = a.cols();
    let mut rng = SplitMix64::new(0x11_F0CA);
    let mut v: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    let nv = norm2(&v);
    for x in &mut v {
        *x /= nv;
    }
    let mut lambda = 0.0;
    for _ in 0..LIPSCHITZ_POWER_STEPS {
        let bw: Vec<f64> = {
            let uw: Vec<f64> = v.iter().zip(u).map(|(x, ui)| x * ui).collect();
            a.mul_vec(&uw).unwrap()
        };
        let mut btbw = a.mul_vec_transpose(&bw).unwrap();
        for (x, ui) in btbw.iter_mut().zip(u) {
            *x *= ui;
        }
        lambda = norm2(&btbw);
        if lambda == 0.0 {
            return 0.0;
        }
        v = btbw.iter().map(|x| x / lambda).collect();
    }
    lambda
}

/// Solves the relaxed optimal-thresholding QP by monotone accelerated
/// projected gradient. Terminates when the fixed-point gap
/// `||w - P(w - grad f(w)/L)||` drops below `tol`, or at `max_iter`.
pub fn solve_relaxed_ot(
    p: &RelaxedOtProblem,
    tol: f64,
    max_iter: usize,
    warm_start: Option<&Vector>,
) -> Result<QpSolution> {
    if tol <= 0.0 {
        return Err(Error::InvalidConfig("qp tol must be > 0".into()));
    }
    let n = p.a.cols();
    if let Some(w0) = warm_start {
        if w0.len() != n {
            return Err(Error::DimensionMismatch(
                "warm start length must equal n".into(),
            ));
        }
    }
    let u = p.u.as_slice();
    let f = |w: &[f64]| -> f64 {
        let uw: Vec<f64> = w.iter().zip(u).map(|(wi, ui)| wi * ui).collect();
        let aw = p.a.mul_vec(&uw).unwrap();
        sub(p.y.as_slice(), &aw).iter().map(|r| r * r).sum()
    };
    let grad = |w: &[f64]| -> Vec<f64> {
        let uw: Vec<f64> = w.iter().zip(u).map(|(wi, ui)| wi * ui).collect();
        let aw = p.a.mul_vec(&uw).unwrap();
        let r = sub(&aw, p.y.as_slice());
        let mut g = p.a.mul_vec_transpose(&r).unwrap();
        for (gi, ui) in g.iter_mut().zip(u) {
            *gi *= 2.0 * ui;
        }
        g
    };

    let start = match warm_start {
        Some(w0) => project_capped_simplex(w0, p.k)?,
        None => {
            let kn = p.k as f64 / n as f64;
            Vector::new(vec![kn; n]).unwrap()
        }
    };

    let lmax = largest_squared_singular_value(p.a, u);
    if lmax == 0.0 {
        // B = 0: every feasible w is optimal.
        let w = project_capped_simplex(&start, p.k)?;
        let objective = f(w.as_slice());
        return Ok(QpSolution {
            w,
            objective,
            iterations: 0,
            converged: true,
            kkt_residual: 0.0,
        });
    }
    let lip = 2.0 * lmax * LIPSCHITZ_INFLATION;

    let mut w = start;
    let mut f_w = f(w.as_slice());
    let mut momentum = w.clone();
    let mut t = 1.0f64;
    let mut converged = false;
    let mut kkt = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        let g = grad(momentum.as_slice());
        let trial = Vector::new(
            momentum
                .as_slice()
                .iter()
                .zip(&g)
                .map(|(wi, gi)| wi - gi / lip)
                .collect(),
        )?;
        let mut w_new = project_capped_simplex(&trial, p.k)?;
        let mut f_new = f(w_new.as_slice());
        if f_new > f_w {
            // Monotone safeguard: restart acceleration at the incumbent.
            t = 1.0;
            let g = grad(w.as_slice());
            let trial = Vector::new(
                w.as_slice()
                    .iter()
                    .zip(&g)
                    .map(|(wi, gi)| wi - gi / lip)
                    .collect(),
            )?;
            w_new = project_capped_simplex(&trial, p.k)?;
            f_new = f(w_new.as_slice());
            if f_new > f_w {
                // 1/L projected-gradient step cannot increase f; keep the
                // incumbent if rounding says otherwise.
                w_new = w.clone();
                f_new = f_w;
            }
        }
        // Fixed-point gap at the new point.
        let g_new = grad(w_new.as_slice());
        let fp_trial = Vector::new(
            w_new
                .as_slice()
                .iter()
                .zip(&g_new)
                .map(|(wi, gi)| wi - gi / lip)
                .collect(),
        )?;
        let fp = project_capped_simplex(&fp_trial, p.k)?;
        kkt = norm2(&sub(w_new.as_slice(), fp.as_slice()));
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_new;
        momentum = Vector::new(
            w_new
                .as_slice()
                .iter()
                .zip(w.as_slice())
                .map(|(wn, wo)| wn + beta * (wn - wo))
                .collect(),
        )?;
        w = w_new;
        f_w = f_new;
        t = t_new;
        if kkt <= tol {
            converged = true;
            break;
        }
    }
    Ok(QpSolution {
        objective: f_w,
        w,
        iterations,
        converged,
        kkt_residual: kkt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianRng;
    use crate::thresholding::exact_optimal_threshold;

    fn vec_of(v: &[f64]) -> Vector {
        Vector::new(v.to_vec()).unwrap()
    }

    fn feasible(w: &Vector, k: usize, tol: f64) {
        let mut s = 0.0;
        for i in 0..w.len() {
            assert!(w[i] >= -tol && w[i] <= 1.0 + tol, "w[{i}] = {}", w[i]);
            s += w[i];
        }
        assert!((s - k as f64).abs() <= 1e-8 * k as f64, "sum {s} != {k}");
    }

    #[test]
    fn projection_already_feasible() {
        let v = vec_of(&[0.5, 0.5]);
        let w = project_capped_simplex(&v, 1).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn projection_k_equals_n() {
        let v = vec_of(&[0.3, 0.3, 0.3]);
        let w = project_capped_simplex(&v, 3).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn projection_clamps_at_cap() {
        let v = vec_of(&[2.0, 0.0]);
        let w = project_capped_simplex(&v, 1).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && w[1].abs() < 1e-12);
    }

    #[test]
    fn projection_rejects_bad_k() {
        let v = vec_of(&[1.0, 2.0]);
        assert!(project_capped_simplex(&v, 0).is_err());
        assert!(project_capped_simplex(&v, 3).is_err());
    }

    #[test]
    fn projection_feasibility_random() {
        let mut rng = GaussianRng::new(21);
        for trial in 0..500 {
            let n = 2 + trial % 30;
            let v = Vector::new(rng.gaussian_vec(n)).unwrap();
            let k = 1 + rng.next_below(n);
            let w = project_capped_simplex(&v, k).unwrap();
            feasible(&w, k, 1e-9);
        }
    }

    #[test]
    fn projection_idempotent() {
        let mut rng = GaussianRng::new(22);
        for _ in 0..200 {
            let n = 2 + rng.next_below(20);
            let v = Vector::new(rng.gaussian_vec(n)).unwrap();
            let k = 1 + rng.next_below(n);
            let w1 = project_capped_simplex(&v, k).unwrap();
            let w2 = project_capped_simplex(&w1, k).unwrap();
            let diff = norm2(&sub(w1.as_slice(), w2.as_slice()));
            assert!(diff <= 1e-12, "idempotence gap {diff}");
        }
    }

    #[test]
    fn projection_nonexpansive() {
        let mut rng = GaussianRng::new(23);
        for _ in 0..1000 {
            let n = 2 + rng.next_below(15);
            let a = Vector::new(rng.gaussian_vec(n)).unwrap();
            let b = Vector::new(rng.gaussian_vec(n)).unwrap();
            let k = 1 + rng.next_below(n);
            let pa = project_capped_simplex(&a, k).unwrap();
            let pb = project_capped_simplex(&b, k).unwrap();
            let lhs = norm2(&sub(pa.as_slice(), pb.as_slice()));
            let rhs = norm2(&sub(a.as_slice(), b.as_slice()));
            assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn qp_exact_fit_identity() {
        let a = Matrix::identity(3).unwrap();
        let u = vec_of(&[4.0, 0.0, 0.0]);
        let y = vec_of(&[4.0, 0.0, 0.0]);
        let p = RelaxedOtProblem::new(&a, &u, &y, 1).unwrap();
        let sol = solve_relaxed_ot(&p, 1e-10, 5000, None).unwrap();
        assert!(sol.converged);
        assert!(sol.objective < 1e-12, "objective {}", sol.objective);
        assert!((sol.w[0] - 1.0).abs() < 1e-5, "{:?}", sol.w);
    }

    #[test]
    fn qp_zero_u_all_feasible_optimal() {
        let a = Matrix::identity(3).unwrap();
        let u = Vector::zeros(3);
        let y = vec_of(&[1.0, 2.0, 2.0]);
        let p = RelaxedOtProblem::new(&a, &u, &y, 2).unwrap();
        let sol = solve_relaxed_ot(&p, 1e-8, 100, None).unwrap();
        assert!(sol.converged);
        assert!((sol.objective - y.norm2().powi(2)).abs() < 1e-12);
        feasible(&sol.w, 2, 1e-9);
    }

    #[test]
    fn qp_objective_below_binary_optimum() {
        // The relaxation lower-bounds the exhaustive binary optimum.
        let mut rng = GaussianRng::new(31);
        for trial in 0..20 {
            let a = Matrix::new(6, 10, rng.gaussian_vec(60)).unwrap();
            let u = Vector::new(rng.gaussian_vec(10)).unwrap();
            let y = Vector::new(rng.gaussian_vec(6)).unwrap();
            let p = RelaxedOtProblem::new(&a, &u, &y, 2).unwrap();
            let sol = solve_relaxed_ot(&p, 1e-10, 20_000, None).unwrap();
            let (_, binary_obj) = exact_optimal_threshold(&a, &u, &y, 2).unwrap();
            assert!(
                sol.objective <= binary_obj + 1e-8,
                "trial {trial}: {} > {}",
                sol.objective,
                binary_obj
            );
            feasible(&sol.w, 2, 1e-9);
        }
    }

    #[test]
    fn qp_k_equals_n_forces_ones() {
        let mut rng = GaussianRng::new(33);
        let a = Matrix::new(3, 4, rng.gaussian_vec(12)).unwrap();
        let u = Vector::new(rng.gaussian_vec(4)).unwrap();
        let y = Vector::new(rng.gaussian_vec(3)).unwrap();
        let p = RelaxedOtProblem::new(&a, &u, &y, 4).unwrap();
        let sol = solve_relaxed_ot(&p, 1e-8, 100, None).unwrap();
        assert_eq!(sol.w.as_slice(), &[1.0, 1.0, 1.0, 1.0]);
    }
}
