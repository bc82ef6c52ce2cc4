//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex<f64>>`. Bipartite matrices on
//! `C^l ⊗ C^r` use left-factor-major indexing: basis vector `e_a ⊗ e_i`
//! sits at index `a * r + i`, matching [`kron`].

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Relative tolerance used to judge factorization quality.
pub const FACTOR_TOL: f64 = 1e-12;
/// Singular values below `RANK_CUTOFF * s_max` count as zero.
pub const RANK_CUTOFF: f64 = 1e-9;

const SVD_MAX_ITER: usize = 10_000;
/// Convergence threshold for the SVD; a bare machine epsilon can stall the
/// iteration on rank-deficient inputs and return inaccurate factors.
const SVD_EPS: f64 = 5.0 * f64::EPSILON;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Selects one tensor factor of a bipartite matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows × min(rows, cols)`, orthonormal columns.
    pub left: ComplexMatrix,
    /// Non-increasing.
    pub singular_values: Vec<f64>,
    /// `cols × min(rows, cols)`, orthonormal columns.
    pub right: ComplexMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.singular_values.len();
        let mut scaled = self.left.clone();
        for j in 0..k {
            let s = self.singular_values[j];
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * self.right.adjoint()
    }

    /// Number of singular values above `RANK_CUTOFF * s_max`.
    pub fn numerical_rank(&self) -> usize {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .take_while(|&&s| s > RANK_CUTOFF * smax)
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct HahnDecomposition {
    pub positive_part: ComplexMatrix,
    pub negative_part: ComplexMatrix,
}

pub fn check_finite(a: &ComplexMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain("matrix has non-finite entries"))
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    check_finite(a)?;
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::domain("svd of an empty matrix"));
    }
    let res = a
        .clone()
        .try_svd(true, true, SVD_EPS, SVD_MAX_ITER)
        .ok_or_else(|| Error::Factorization(format!("svd of {m}x{n} matrix")))?;
    let left = res.u.expect("u requested");
    let right = res.v_t.expect("v requested").adjoint();
    Ok(SvdResult {
        left,
        singular_values: res.singular_values.iter().copied().collect(),
        right,
    })
}

pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_finite(a)?;
    let (m, n) = a.shape();
    let res = a
        .clone()
        .try_svd(false, false, SVD_EPS, SVD_MAX_ITER)
        .ok_or_else(|| Error::Factorization(format!("singular values of {m}x{n} matrix")))?;
    let mut s: Vec<f64> = res.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// Hilbert-Schmidt inner product `Tr(A* B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hermiticity_residual(a: &ComplexMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(a, &a.adjoint())
}

pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * cr(0.5)
}

/// Eigen-decomposition of the Hermitian part of `a`, eigenvalues ascending.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_finite(a)?;
    if !a.is_square() {
        return Err(Error::domain("eigen-decomposition of a non-square matrix"));
    }
    let h = hermitian_part(a);
    let n = h.nrows();
    let eig = h
        .try_symmetric_eigen(f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Factorization(format!("hermitian eigen of {n}x{n} matrix")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(a)?.0.first().copied().unwrap_or(0.0))
}

/// Splits a Hermitian `h` into `P - Q` with `P, Q ⪰ 0` and `PQ = 0`.
///
/// Eigenvalues in `[-tol, tol]` go to the positive part.
pub fn hahn_decompose(h: &ComplexMatrix, tol: f64) -> Result<HahnDecomposition> {
    let herm = hermiticity_residual(h);
    if herm > tol {
        return Err(Error::domain(format!(
            "hahn decomposition needs a Hermitian matrix (residual {herm:.3e})"
        )));
    }
    let (values, vectors) = hermitian_eigen(h)?;
    let n = h.nrows();
    let mut pos = ComplexMatrix::zeros(n, n);
    let mut neg = ComplexMatrix::zeros(n, n);
    for (i, &lam) in values.iter().enumerate() {
        let v = vectors.column(i);
        let proj = v * v.adjoint();
        if lam >= -tol {
            if lam > 0.0 {
                pos += proj * cr(lam);
            }
        } else {
            neg += proj * cr(-lam);
        }
    }
    Ok(HahnDecomposition {
        positive_part: pos,
        negative_part: neg,
    })
}

/// Kronecker product, left factor major.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

fn check_bipartite(x: &ComplexMatrix, dl: usize, dr: usize) -> Result<()> {
    if dl == 0 || dr == 0 {
        return Err(Error::domain("tensor factor dimensions must be positive"));
    }
    if x.nrows() != dl * dr || x.ncols() != dl * dr {
        return Err(Error::domain(format!(
            "expected a {0}x{0} matrix for factors {dl}x{dr}, got {1}x{2}",
            dl * dr,
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}

pub fn partial_trace(x: &ComplexMatrix, dl: usize, dr: usize, which: Factor) -> Result<ComplexMatrix> {
    check_bipartite(x, dl, dr)?;
    Ok(match which {
        Factor::Left => ComplexMatrix::from_fn(dr, dr, |i, j| {
            (0..dl).map(|a| x[(a * dr + i, a * dr + j)]).sum()
        }),
        Factor::Right => ComplexMatrix::from_fn(dl, dl, |a, b| {
            (0..dr).map(|i| x[(a * dr + i, b * dr + i)]).sum()
        }),
    })
}

pub fn partial_transpose(
    x: &ComplexMatrix,
    dl: usize,
    dr: usize,
    which: Factor,
) -> Result<ComplexMatrix> {
    check_bipartite(x, dl, dr)?;
    let d = dl * dr;
    Ok(ComplexMatrix::from_fn(d, d, |row, col| {
        let (a, i) = (row / dr, row % dr);
        let (b, j) = (col / dr, col % dr);
        match which {
            Factor::Left => x[(b * dr + i, a * dr + j)],
            Factor::Right => x[(a * dr + j, b * dr + i)],
        }
    }))
}

/// Exchanges the two tensor factors: `A ⊗ B ↦ B ⊗ A`.
pub fn swap_factors(x: &ComplexMatrix, dl: usize, dr: usize) -> Result<ComplexMatrix> {
    check_bipartite(x, dl, dr)?;
    let d = dl * dr;
    Ok(ComplexMatrix::from_fn(d, d, |row, col| {
        let (i, a) = (row / dl, row % dl);
        let (j, b) = (col / dl, col % dl);
        x[(a * dr + i, b * dr + j)]
    }))
}

pub fn elementary(rows: usize, cols: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(rows, cols);
    e[(a, b)] = cr(1.0);
    e
}

pub fn basis_vector(n: usize, a: usize) -> ComplexVector {
    let mut e = ComplexVector::zeros(n);
    e[a] = cr(1.0);
    e
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `τ_n = (1/n) Σ_{a,b} E_{a,b} ⊗ E_{a,b}`.
pub fn max_entangled_state(n: usize) -> ComplexMatrix {
    let w = max_entangled_vector(n);
    &w * w.adjoint()
}

/// `(1/√n) Σ_a e_a ⊗ e_a`.
pub fn max_entangled_vector(n: usize) -> ComplexVector {
    let mut w = ComplexVector::zeros(n * n);
    let s = 1.0 / (n as f64).sqrt();
    for a in 0..n {
        w[a * n + a] = cr(s);
    }
    w
}

/// Reshapes `u ∈ C^l ⊗ C^r` into the `l × r` matrix `M` with `u = Σ M[a,i] e_a ⊗ e_i`.
pub fn matricize(u: &ComplexVector, dl: usize, dr: usize) -> ComplexMatrix {
    assert_eq!(u.len(), dl * dr, "vector length does not match factors");
    ComplexMatrix::from_fn(dl, dr, |a, i| u[a * dr + i])
}

pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    let (dl, dr) = m.shape();
    ComplexVector::from_fn(dl * dr, |k, _| m[(k / dr, k % dr)])
}

/// Schmidt coefficients of `u ∈ C^l ⊗ C^r`, non-increasing.
pub fn schmidt_coefficients(u: &ComplexVector, dl: usize, dr: usize) -> Result<Vec<f64>> {
    singular_values(&matricize(u, dl, dr))
}

/// Unitary factor `W` of the polar decomposition, so `Re Tr(W* A) = ‖A‖₁`.
pub fn polar_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::domain("polar unitary of a non-square matrix"));
    }
    let s = svd(a)?;
    Ok(&s.left * s.right.adjoint())
}

/// Orthonormal basis (as columns) of the column space of `a`, using the rank cutoff.
pub fn range_basis(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let s = svd(a)?;
    let r = s.numerical_rank();
    Ok(s.left.columns(0, r).into_owned())
}

pub fn projector_onto(basis: &ComplexMatrix) -> ComplexMatrix {
    basis * basis.adjoint()
}

pub fn is_isometry_residual(v: &ComplexMatrix) -> f64 {
    let g = v.adjoint() * v;
    max_abs_diff(&g, &identity(v.ncols()))
}

// ---------------------------------------------------------------------------
// Random instances

/// Deterministic generator for a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `stream` of the generator for `seed`.
pub fn rng_substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Entries i.i.d. complex Gaussian with unit variance.
pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector {
    let g = random_gaussian(n, 1, rng);
    let norm = g.norm();
    ComplexVector::from_fn(n, |i, _| g[(i, 0)] / norm)
}

/// Haar-distributed unitary: QR of a Gaussian matrix with phase-corrected `R` diagonal.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::domain("random_unitary needs n >= 1"));
    }
    let g = random_gaussian(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { cr(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if cols == 0 || rows < cols {
        return Err(Error::domain(format!(
            "random_isometry needs rows >= cols >= 1, got {rows}x{cols}"
        )));
    }
    let u = random_unitary(rows, rng)?;
    Ok(u.columns(0, cols).into_owned())
}

pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::domain("random_density needs n >= 1"));
    }
    let g = random_gaussian(n, n, rng);
    let rho = &g * g.adjoint();
    let tr = trace(&rho).re;
    Ok(hermitian_part(&(rho / cr(tr))))
}

/// GUE-style random Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    hermitian_part(&random_gaussian(n, n, rng))
}

// ---------------------------------------------------------------------------
// JSON form

/// `{"rows": r, "cols": c, "data": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson { rows, cols, data }
    }
}

impl From<&ComplexVector> for MatrixJson {
    fn from(v: &ComplexVector) -> Self {
        MatrixJson {
            rows: v.len(),
            cols: 1,
            data: v.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        if j.rows == 0 || j.cols == 0 {
            return Err(Error::domain("matrix dimensions must be positive"));
        }
        if j.data.len() != j.rows * j.cols {
            return Err(Error::domain(format!(
                "matrix data has {} entries, expected {}x{}",
                j.data.len(),
                j.rows,
                j.cols
            )));
        }
        let m = ComplexMatrix::from_fn(j.rows, j.cols, |r, col| {
            let [re, im] = j.data[r * j.cols + col];
            c(re, im)
        });
        check_finite(&m)?;
        Ok(m)
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> serde_json::Value {
    serde_json::to_value(MatrixJson::from(m)).expect("matrix serializes")
}

pub fn matrix_from_json(v: &serde_json::Value) -> Result<ComplexMatrix> {
    let j: MatrixJson = serde_json::from_value(v.clone())?;
    ComplexMatrix::try_from(&j)
}
