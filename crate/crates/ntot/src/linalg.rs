//! Dense linear algebra kernels shared by all solvers.
//!
//! Everything here is plain row-major `f64`. The kernels are sized for the
//! recovery setting `m < n` with `m` at most a few hundred: the regularized
//! Newton direction goes through the m-by-m system `(A A^T + eps I) s = r`
//! (Woodbury form) so cost scales with `m`, not `n`, and singular extremes
//! come from symmetric eigen-iterations on the smaller Gram matrix.

use crate::error::{Error, Result};
use crate::thresholding::SupportSet;

/// Dense row-major matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be nonempty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Matrix::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix::new(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `A x` for a slice of length `cols`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: matrix has {} columns, vector has length {}",
                self.cols,
                x.len()
            )));
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| dot(row, x))
            .collect())
    }

    /// `A^T x` for a slice of length `rows`.
    pub fn mul_vec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "matvec^T: matrix has {} rows, vector has length {}",
                self.rows,
                x.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, row) in self.data.chunks_exact(self.cols).enumerate() {
            let xi = x[i];
            if xi != 0.0 {
                for (o, &a) in out.iter_mut().zip(row) {
                    *o += a * xi;
                }
            }
        }
        Ok(out)
    }

    /// The symmetric Gram matrix `A A^T` (size rows x rows).
    pub fn gram_rows(&self) -> Vec<f64> {
        let m = self.rows;
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = dot(self.row(i), self.row(j));
                g[i * m + j] = v;
                g[j * m + i] = v;
            }
        }
        g
    }

    /// The symmetric Gram matrix `A^T A` (size cols x cols).
    pub fn gram_cols(&self) -> Vec<f64> {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for row in self.data.chunks_exact(n) {
            for i in 0..n {
                let ri = row[i];
                if ri != 0.0 {
                    for j in i..n {
                        g[i * n + j] += ri * row[j];
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[i * n + j] = g[j * n + i];
            }
        }
        g
    }

    /// Column submatrix `A_S`, keeping the column order of `support`.
    pub fn column_submatrix(&self, support: &SupportSet) -> Result<Matrix> {
        if support.capacity() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "support capacity {} does not match {} columns",
                support.capacity(),
                self.cols
            )));
        }
        let p = support.len();
        if p == 0 {
            return Err(Error::DimensionMismatch(
                "empty support has no submatrix".into(),
            ));
        }
        let mut data = Vec::with_capacity(self.rows * p);
        for i in 0..self.rows {
            let row = self.row(i);
            for &j in support.indices() {
                data.push(row[j]);
            }
        }
        Matrix::new(self.rows, p, data)
    }
}

/// Dense vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Vector { data })
    }

    pub fn zeros(len: usize) -> Self {
        Vector {
            data: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|v| **v != 0.0).count()
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `a - b` elementwise.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s * b` elementwise.
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Hadamard product `a ⊗ b`.
pub fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Largest and smallest singular values of a matrix, with the residual
/// tolerance the computation achieved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub tol: f64,
}

/// `A x` as an owned [`Vector`].
pub fn matvec(a: &Matrix, x: &Vector) -> Result<Vector> {
    Vector::new(a.mul_vec(x.as_slice())?)
}

const SPECTRAL_MAX_ITER: usize = 10_000;
const SPECTRAL_TOL: f64 = 1e-12;

/// Largest and smallest singular values of `A`.
///
/// Works on the smaller of the two Gram matrices so the eigen-iterations run
/// at size `min(m, n)`: power iteration for the largest eigenvalue, inverse
/// iteration for the smallest. `sigma_min` is the smallest of the
/// `min(m, n)` singular values.
pub fn spectral_extremes(a: &Matrix) -> Result<SpectralBounds> {
    let d = a.rows().min(a.cols());
    let gram = if a.rows() <= a.cols() {
        a.gram_rows()
    } else {
        a.gram_cols()
    };
    let (lambda_max, res_max) = power_iteration(&gram, d)?;
    if lambda_max <= 0.0 {
        // Zero matrix.
        return Ok(SpectralBounds {
            sigma_max: 0.0,
            sigma_min: 0.0,
            tol: 0.0,
        });
    }
    let (lambda_min, res_min) = inverse_iteration_smallest(&gram, d, lambda_max)?;
    Ok(SpectralBounds {
        sigma_max: lambda_max.sqrt(),
        sigma_min: lambda_min.max(0.0).sqrt(),
        tol: res_max.max(res_min),
    })
}

fn sym_mul(g: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    g.chunks_exact(d).map(|row| dot(row, v)).collect()
}

fn seeded_unit_vector(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = crate::rng::SplitMix64::new(seed);
    let mut v: Vec<f64> = (0..d).map(|_| rng.next_f64() - 0.5).collect();
    let n = norm2(&v);
    for x in &mut v {
        *x /= n;
    }
    v
}

/// Power iteration for the largest eigenvalue of a symmetric PSD matrix.
/// Returns `(lambda_max, residual)` where residual is `||G v - lambda v||`.
fn power_iteration(g: &[f64], d: usize) -> Result<(f64, f64)> {
    let mut v = seeded_unit_vector(d, 0x5EED_0001);
    let scale = g
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let mut residual = f64::INFINITY;
    for _ in 0..SPECTRAL_MAX_ITER {
        let gv = sym_mul(g, d, &v);
        let lambda = dot(&v, &gv);
        let mut r = 0.0;
        for i in 0..d {
            let e = gv[i] - lambda * v[i];
            r += e * e;
        }
        residual = r.sqrt();
        if residual <= SPECTRAL_TOL * scale * (d as f64) {
            return Ok((lambda, residual));
        }
        let n = norm2(&gv);
        if n == 0.0 {
            return Ok((0.0, 0.0));
        }
        v = gv.iter().map(|x| x / n).collect();
    }
    Err(Error::NonConvergence {
        iterations: SPECTRAL_MAX_ITER,
        residual,
    })
}

/// Inverse iteration for the smallest eigenvalue of a symmetric PSD matrix.
/// A tiny diagonal shift is added when the Cholesky factorization fails
/// (semidefinite case); the shift is subtracted from the reported value.
fn inverse_iteration_smallest(g: &[f64], d: usize, lambda_max: f64) -> Result<(f64, f64)> {
    let mut shift = 0.0;
    let mut chol = Cholesky::factor(g, d);
    while chol.is_err() {
        shift = if shift == 0.0 {
            lambda_max * 1e-14
        } else {
            shift * 16.0
        };
        if shift > lambda_max * 1e-6 {
            // Effectively singular: smallest eigenvalue is zero at the
            // accuracy this routine can certify.
            return Ok((0.0, lambda_max * 1e-6));
        }
        let mut shifted = g.to_vec();
        for i in 0..d {
            shifted[i * d + i] += shift;
        }
        chol = Cholesky::factor(&shifted, d);
    }
    let chol = chol.unwrap();
    let mut v = seeded_unit_vector(d, 0x5EED_0002);
    let mut residual = f64::INFINITY;
    for _ in 0..SPECTRAL_MAX_ITER {
        let gv = sym_mul(g, d, &v);
        let lambda = dot(&v, &gv);
        let mut r = 0.0;
        for i in 0..d {
            let e = gv[i] - lambda * v[i];
            r += e * e;
        }
        residual = r.sqrt();
        if residual <= SPECTRAL_TOL * lambda_max * (d as f64) {
            return Ok((lambda, residual));
        }
        let mut w = chol.solve(&v);
        let n = norm2(&w);
        if n == 0.0 {
            break;
        }
        for x in &mut w {
            *x /= n;
        }
        v = w;
    }
    Err(Error::NonConvergence {
        iterations: SPECTRAL_MAX_ITER,
        residual,
    })
}

/// Cholesky factorization of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    /// Lower-triangular factor, row-major, upper part unused.
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors the dense symmetric matrix `g` (row-major, size n x n).
    pub fn factor(g: &[f64], n: usize) -> Result<Self> {
        assert_eq!(g.len(), n * n);
        let mut l = g.to_vec();
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 0.0 {
                return Err(Error::NumericalFailure(format!(
                    "Cholesky pivot {j} is {d:.3e}; matrix not positive definite"
                )));
            }
            let dj = d.sqrt();
            l[j * n + j] = dj;
            for i in (j + 1)..n {
                let mut s = l[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / dj;
            }
        }
        Ok(Cholesky { n, l })
    }

    /// Solves `G x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        // Forward: L z = b
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        // Backward: L^T x = z
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }
}

/// Reusable regularized Newton operator `(A^T A + eps I)^{-1} A^T`.
///
/// Applies through the identity `(A^T A + eps I)^{-1} A^T = A^T (A A^T + eps I)^{-1}`,
/// with the m-by-m system factored once and reused across iterations.
#[derive(Debug)]
pub struct NewtonOperator<'a> {
    a: &'a Matrix,
    chol: Cholesky,
    eps: f64,
}

impl<'a> NewtonOperator<'a> {
    pub fn new(a: &'a Matrix, eps: f64) -> Result<Self> {
        if eps <= 0.0 {
            return Err(Error::InvalidConfig(format!("eps must be > 0, got {eps}")));
        }
        let m = a.rows();
        let mut g = a.gram_rows();
        for i in 0..m {
            g[i * m + i] += eps;
        }
        let chol = Cholesky::factor(&g, m).map_err(|e| {
            Error::NumericalFailure(format!("(A A^T + eps I) factorization failed: {e}"))
        })?;
        Ok(NewtonOperator { a, chol, eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `d = (A^T A + eps I)^{-1} A^T r` for a residual slice of length m.
    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        if r.len() != self.a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "newton direction: residual length {} != {} rows",
                r.len(),
                self.a.rows()
            )));
        }
        let s = self.chol.solve(r);
        self.a.mul_vec_transpose(&s)
    }
}

/// One-shot Newton direction `(A^T A + eps I)^{-1} A^T r`.
pub fn newton_direction(a: &Matrix, eps: f64, r: &Vector) -> Result<Vector> {
    let op = NewtonOperator::new(a, eps)?;
    Vector::new(op.apply(r.as_slice())?)
}

/// Relative cutoff below which a diagonal factor entry is treated as zero.
const RANK_CUTOFF: f64 = 1e-12;

/// Least-squares solution supported on `support`.
///
/// Minimizes `||y - A z||_2` over vectors `z` with `supp(z) ⊆ support`,
/// via Householder QR with column pivoting of the column submatrix. When
/// `A_S` is rank-deficient the minimum-norm solution is returned through a
/// complete orthogonal decomposition.
pub fn least_squares_on_support(a: &Matrix, y: &Vector, support: &SupportSet) -> Result<Vector> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "least squares: y has length {}, matrix has {} rows",
            y.len(),
            a.rows()
        )));
    }
    if support.len() > a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "support size {} exceeds {} rows",
            support.len(),
            a.rows()
        )));
    }
    let mut out = Vector::zeros(a.cols());
    if support.len() == 0 {
        return Ok(out);
    }
    let sub = a.column_submatrix(support)?;
    let coeffs = qr_min_norm_solve(&sub, y.as_slice())?;
    for (&j, &c) in support.indices().iter().zip(&coeffs) {
        out[j] = c;
    }
    Ok(out)
}

/// Minimum-norm least-squares solve of `B x = y` for a dense m x p matrix
/// with p <= m, via column-pivoted QR plus a second QR of the trapezoid.
fn qr_min_norm_solve(b: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let m = b.rows();
    let p = b.cols();
    // Column-major working copy.
    let mut c = vec![0.0; m * p];
    for j in 0..p {
        for i in 0..m {
            c[j * m + i] = b.get(i, j);
        }
    }
    let mut rhs = y.to_vec();
    let mut perm: Vec<usize> = (0..p).collect();
    let mut rank = p;
    let mut first_diag = 0.0f64;
    for j in 0..p {
        // Pivot: remaining column with the largest trailing norm.
        let mut best = j;
        let mut best_norm = 0.0;
        for cand in j..p {
            let nrm = norm2(&c[cand * m + j..cand * m + m]);
            if nrm > best_norm {
                best_norm = nrm;
                best = cand;
            }
        }
        if best != j {
            for i in 0..m {
                c.swap(best * m + i, j * m + i);
            }
            perm.swap(best, j);
        }
        // Householder vector for column j, rows j..m.
        let (tau, beta) = {
            let col = &mut c[j * m..(j + 1) * m];
            householder_in_place(&mut col[j..])
        };
        if j == 0 {
            first_diag = beta.abs();
        }
        if beta.abs() <= RANK_CUTOFF * first_diag {
            rank = j;
            break;
        }
        // Apply reflector to the remaining columns and the rhs.
        let v: Vec<f64> = c[j * m + j..(j + 1) * m].to_vec();
        for t in (j + 1)..p {
            apply_householder(&v, tau, &mut c[t * m + j..t * m + m]);
        }
        apply_householder(&v, tau, &mut rhs[j..]);
        c[j * m + j] = beta;
    }
    // R is rank x p upper trapezoidal in the permuted columns.
    if rank == 0 {
        return Ok(vec![0.0; p]);
    }
    let coeffs_perm = if rank == p {
        // Plain back substitution.
        let mut x = rhs[..p].to_vec();
        for i in (0..p).rev() {
            let mut s = x[i];
            for k in (i + 1)..p {
                s -= c[k * m + i] * x[k];
            }
            x[i] = s / c[i * m + i];
        }
        x
    } else {
        min_norm_from_trapezoid(&c, m, p, rank, &rhs[..rank])
    };
    let mut x = vec![0.0; p];
    for (slot, &val) in perm.iter().zip(&coeffs_perm) {
        x[*slot] = val;
    }
    Ok(x)
}

/// Minimum-norm solution of `T x = c1` where `T` is the rank x p upper
/// trapezoid stored column-major in `work`: a QR of `T^T` turns the system
/// into a triangular solve followed by reflector applications.
fn min_norm_from_trapezoid(work: &[f64], m: usize, p: usize, rank: usize, c1: &[f64]) -> Vec<f64> {
    // tt is T^T, p x rank, column-major.
    let mut tt = vec![0.0; p * rank];
    for i in 0..rank {
        for j in i..p {
            // T[i][j] lives at work[j*m + i] for j >= i.
            tt[i * p + j] = work[j * m + i];
        }
    }
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(rank);
    for j in 0..rank {
        let (tau, beta) = {
            let col = &mut tt[j * p..(j + 1) * p];
            householder_in_place(&mut col[j..])
        };
        let v: Vec<f64> = tt[j * p + j..(j + 1) * p].to_vec();
        for t in (j + 1)..rank {
            apply_householder(&v, tau, &mut tt[t * p + j..t * p + p]);
        }
        tt[j * p + j] = beta;
        reflectors.push((v, tau));
    }
    // T = R2^T Q2^T with R2 upper triangular rank x rank. Forward solve
    // R2^T z = c1, then x = Q2 [z; 0].
    let mut z = c1.to_vec();
    for i in 0..rank {
        let mut s = z[i];
        for k in 0..i {
            s -= tt[i * p + k] * z[k];
        }
        z[i] = s / tt[i * p + i];
    }
    let mut x = vec![0.0; p];
    x[..rank].copy_from_slice(&z);
    for j in (0..rank).rev() {
        let (v, tau) = &reflectors[j];
        apply_householder(v, *tau, &mut x[j..]);
    }
    x
}

/// Builds a Householder reflector in place for the slice `x` so that
/// `(I - tau v v^T) x = beta e_1`; on return `x[0]` holds `v[0] = 1`
/// implicitly (the stored values are v with v[0] = 1). Returns `(tau, beta)`.
fn householder_in_place(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let tail_norm = norm2(&x[1..]);
    if tail_norm == 0.0 {
        return (0.0, alpha);
    }
    let nrm = (alpha * alpha + tail_norm * tail_norm).sqrt();
    let beta = if alpha >= 0.0 { -nrm } else { nrm };
    let v0 = alpha - beta;
    for v in x[1..].iter_mut() {
        *v /= v0;
    }
    let tau = -v0 / beta;
    x[0] = 1.0;
    (tau, beta)
}

/// Applies `(I - tau v v^T)` to `target`, where `v` has `v[0] = 1`.
fn apply_householder(v: &[f64], tau: f64, target: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let s = tau * dot(v, target);
    for (t, &vi) in target.iter_mut().zip(v) {
        *t -= s * vi;
    }
}

/// Eigen-decomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues in ascending order with matching
/// eigenvectors as rows of the second result. Intended for the small
/// blocks used in RIC enumeration and as an oracle for the iterative paths.
pub fn jacobi_eigh(g: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(g.len(), n * n);
    let mut a = g.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };
    let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1e-300);
    for _sweep in 0..100 {
        if off(&a) <= 1e-14 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for j in 0..n {
                    let vpj = v[p * n + j];
                    let vqj = v[q * n + j];
                    v[p * n + j] = c * vpj - s * vqj;
                    v[q * n + j] = s * vpj + c * vqj;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let eigvals: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigvecs = vec![0.0; n * n];
    for (row, &i) in order.iter().enumerate() {
        eigvecs[row * n..(row + 1) * n].copy_from_slice(&v[i * n..(i + 1) * n]);
    }
    (eigvals, eigvecs)
}
