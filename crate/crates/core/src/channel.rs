//! Linear maps `M_n → M_m` stored by their Choi matrix.
//!
//! Ordering is output-factor-major: `J(Φ) = Σ_{a,b} Φ(E_{a,b}) ⊗ E_{a,b}`, so
//! `J[(i, a), (j, b)] = Φ(E_{a,b})[i, j]` at row `i * n + a`, column `j * n + b`.
//! Partial traces and transposes on the Choi matrix are named by role
//! ([`Role::Output`] / [`Role::Input`]) rather than by position.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, cr, hermiticity_residual, max_abs, max_abs_diff, min_eigenvalue, ComplexMatrix,
    Factor, MatrixJson, C64,
};

const LINEARITY_SAMPLES: usize = 5;
const LINEARITY_TOL: f64 = 1e-10;

/// Tensor factor of a Choi matrix, by role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Output,
    Input,
}

impl Role {
    fn factor(self) -> Factor {
        match self {
            Role::Output => Factor::Left,
            Role::Input => Factor::Right,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearMapRep {
    in_dim: usize,
    out_dim: usize,
    choi: ComplexMatrix,
}

/// `Φ(X) = Σ_k L_k X R_k*`; `right = None` means `R_k = L_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub left_ops: Vec<ComplexMatrix>,
    pub right_ops: Option<Vec<ComplexMatrix>>,
}

/// A boolean property together with the residual it was decided on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Predicate {
    pub holds: bool,
    pub residual: f64,
}

impl KrausSet {
    pub fn new(left_ops: Vec<ComplexMatrix>, right_ops: Option<Vec<ComplexMatrix>>) -> Result<Self> {
        let Some(first) = left_ops.first() else {
            return Err(Error::domain("Kraus set must be nonempty"));
        };
        let shape = first.shape();
        let all = left_ops.iter().chain(right_ops.iter().flatten());
        if all.clone().any(|k| k.shape() != shape) {
            return Err(Error::domain("Kraus operators must share dimensions"));
        }
        if let Some(r) = &right_ops {
            if r.len() != left_ops.len() {
                return Err(Error::domain("left and right Kraus lists differ in length"));
            }
        }
        for k in all {
            linalg::check_finite(k)?;
        }
        Ok(Self { left_ops, right_ops })
    }

    pub fn dims(&self) -> (usize, usize) {
        let (m, n) = self.left_ops[0].shape();
        (n, m)
    }
}

impl LinearMapRep {
    pub fn from_choi(in_dim: usize, out_dim: usize, choi: ComplexMatrix) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::domain("map dimensions must be positive"));
        }
        let d = in_dim * out_dim;
        if choi.shape() != (d, d) {
            return Err(Error::domain(format!(
                "Choi matrix of a map M_{in_dim} -> M_{out_dim} must be {d}x{d}, got {}x{}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        linalg::check_finite(&choi)?;
        Ok(Self {
            in_dim,
            out_dim,
            choi,
        })
    }

    pub fn from_kraus(k: &KrausSet) -> Result<Self> {
        let (n, m) = k.dims();
        let right = k.right_ops.as_ref().unwrap_or(&k.left_ops);
        let choi = ComplexMatrix::from_fn(m * n, m * n, |row, col| {
            let (i, a) = (row / n, row % n);
            let (j, b) = (col / n, col % n);
            k.left_ops
                .iter()
                .zip(right)
                .map(|(l, r)| l[(i, a)] * r[(j, b)].conj())
                .sum()
        });
        Self::from_choi(n, m, choi)
    }

    /// Assembles `J(Φ)` by evaluating `action` on every `E_{a,b}`.
    ///
    /// Linearity is spot-checked on a few random pairs; failures are logged, not
    /// returned.
    pub fn choi_from_apply<F>(in_dim: usize, out_dim: usize, action: F) -> Result<Self>
    where
        F: Fn(&ComplexMatrix) -> ComplexMatrix,
    {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::domain("map dimensions must be positive"));
        }
        let (n, m) = (in_dim, out_dim);
        let mut choi = ComplexMatrix::zeros(m * n, m * n);
        for a in 0..n {
            for b in 0..n {
                let img = action(&linalg::elementary(n, n, a, b));
                if img.shape() != (m, m) {
                    return Err(Error::domain(format!(
                        "action returned {}x{} for an input in M_{n}, expected {m}x{m}",
                        img.nrows(),
                        img.ncols()
                    )));
                }
                for i in 0..m {
                    for j in 0..m {
                        choi[(i * n + a, j * n + b)] = img[(i, j)];
                    }
                }
            }
        }
        let rep = Self::from_choi(n, m, choi)?;
        let worst = rep.linearity_defect(&action);
        if worst > LINEARITY_TOL {
            log::warn!("action does not look linear: defect {worst:.3e} on random samples");
        }
        Ok(rep)
    }

    fn linearity_defect<F>(&self, action: &F) -> f64
    where
        F: Fn(&ComplexMatrix) -> ComplexMatrix,
    {
        let mut rng = linalg::rng_from_seed(0x6c69_6e65_6172);
        let n = self.in_dim;
        let mut worst: f64 = 0.0;
        for _ in 0..LINEARITY_SAMPLES {
            let x = linalg::random_gaussian(n, n, &mut rng);
            let y = linalg::random_gaussian(n, n, &mut rng);
            let al = linalg::random_gaussian(1, 1, &mut rng)[(0, 0)];
            let be = linalg::random_gaussian(1, 1, &mut rng)[(0, 0)];
            let lhs = action(&(&x * al + &y * be));
            let rhs = self.apply_unchecked(&x) * al + self.apply_unchecked(&y) * be;
            if lhs.shape() != rhs.shape() {
                return f64::INFINITY;
            }
            let scale = 1.0 + max_abs(&rhs);
            worst = worst.max(max_abs_diff(&lhs, &rhs) / scale);
        }
        worst
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn into_choi(self) -> ComplexMatrix {
        self.choi
    }

    /// `Φ(E_{a,b})`, read off the Choi matrix.
    pub fn image_of_elementary(&self, a: usize, b: usize) -> ComplexMatrix {
        let (n, m) = (self.in_dim, self.out_dim);
        ComplexMatrix::from_fn(m, m, |i, j| self.choi[(i * n + a, j * n + b)])
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::domain(format!(
                "map acts on M_{}, got a {}x{} input",
                self.in_dim,
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let (n, m) = (self.in_dim, self.out_dim);
        let mut out = ComplexMatrix::zeros(m, m);
        for a in 0..n {
            for b in 0..n {
                let xab = x[(a, b)];
                if xab == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..m {
                    for j in 0..m {
                        out[(i, j)] += self.choi[(i * n + a, j * n + b)] * xab;
                    }
                }
            }
        }
        out
    }

    /// `Φ*(W)` for the Hilbert-Schmidt pairing.
    pub fn apply_adjoint(&self, w: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (n, m) = (self.in_dim, self.out_dim);
        if w.shape() != (m, m) {
            return Err(Error::domain(format!(
                "adjoint acts on M_{m}, got a {}x{} input",
                w.nrows(),
                w.ncols()
            )));
        }
        Ok(ComplexMatrix::from_fn(n, n, |a, b| {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    s += w[(i, j)] * self.choi[(i * n + a, j * n + b)].conj();
                }
            }
            s
        }))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMapRep) -> Result<LinearMapRep> {
        if inner.out_dim != self.in_dim {
            return Err(Error::domain(format!(
                "cannot compose M_{} -> M_{} after M_{} -> M_{}",
                self.in_dim, self.out_dim, inner.in_dim, inner.out_dim
            )));
        }
        let (n, m) = (inner.in_dim, self.out_dim);
        let mut choi = ComplexMatrix::zeros(m * n, m * n);
        for a in 0..n {
            for b in 0..n {
                let img = self.apply_unchecked(&inner.image_of_elementary(a, b));
                for i in 0..m {
                    for j in 0..m {
                        choi[(i * n + a, j * n + b)] = img[(i, j)];
                    }
                }
            }
        }
        Self::from_choi(n, m, choi)
    }

    pub fn scale(&self, factor: f64) -> LinearMapRep {
        self.scale_complex(cr(factor))
    }

    pub fn scale_complex(&self, factor: C64) -> LinearMapRep {
        Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            choi: &self.choi * factor,
        }
    }

    fn check_same_dims(&self, other: &LinearMapRep) -> Result<()> {
        if (self.in_dim, self.out_dim) != (other.in_dim, other.out_dim) {
            return Err(Error::domain(format!(
                "map dimensions differ: M_{} -> M_{} vs M_{} -> M_{}",
                self.in_dim, self.out_dim, other.in_dim, other.out_dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &LinearMapRep) -> Result<LinearMapRep> {
        self.check_same_dims(other)?;
        Self::from_choi(self.in_dim, self.out_dim, &self.choi + &other.choi)
    }

    pub fn subtract(&self, other: &LinearMapRep) -> Result<LinearMapRep> {
        self.check_same_dims(other)?;
        Self::from_choi(self.in_dim, self.out_dim, &self.choi - &other.choi)
    }

    /// `Φ ⊗ id_k : M_n ⊗ M_k → M_m ⊗ M_k`, inputs ordered as `C^n ⊗ C^k`
    /// (index `a * k + c`) and outputs as `C^m ⊗ C^k`.
    pub fn tensor_with_identity(&self, k: usize) -> Result<LinearMapRep> {
        if k == 0 {
            return Err(Error::domain("multiplicity k must be >= 1"));
        }
        let (n, m) = (self.in_dim, self.out_dim);
        let (nk, mk) = (n * k, m * k);
        let mut choi = ComplexMatrix::zeros(mk * nk, mk * nk);
        for i in 0..m {
            for j in 0..m {
                for a in 0..n {
                    for b in 0..n {
                        let v = self.choi[(i * n + a, j * n + b)];
                        if v == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for cc in 0..k {
                            for d in 0..k {
                                let out_row = i * k + cc;
                                let out_col = j * k + d;
                                let in_row = a * k + cc;
                                let in_col = b * k + d;
                                choi[(out_row * nk + in_row, out_col * nk + in_col)] = v;
                            }
                        }
                    }
                }
            }
        }
        Self::from_choi(nk, mk, choi)
    }

    /// The Hilbert-Schmidt adjoint `Φ* : M_m → M_n`.
    pub fn adjoint_map(&self) -> LinearMapRep {
        let (n, m) = (self.in_dim, self.out_dim);
        let choi = ComplexMatrix::from_fn(m * n, m * n, |row, col| {
            let (a, i) = (row / m, row % m);
            let (b, j) = (col / m, col % m);
            self.choi[(i * n + a, j * n + b)].conj()
        });
        Self {
            in_dim: m,
            out_dim: n,
            choi,
        }
    }

    /// `Φ ∘ T_n`; its Choi matrix is `J(Φ)` transposed on the input factor.
    pub fn compose_transpose(&self) -> LinearMapRep {
        let choi = self
            .choi_partial_transpose(Role::Input)
            .expect("Choi matrix has consistent dimensions");
        Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            choi,
        }
    }

    /// `T_m ∘ Φ`.
    pub fn transpose_after(&self) -> LinearMapRep {
        let choi = self
            .choi_partial_transpose(Role::Output)
            .expect("Choi matrix has consistent dimensions");
        Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            choi,
        }
    }

    pub fn choi_partial_trace(&self, role: Role) -> Result<ComplexMatrix> {
        linalg::partial_trace(&self.choi, self.out_dim, self.in_dim, role.factor())
    }

    pub fn choi_partial_transpose(&self, role: Role) -> Result<ComplexMatrix> {
        linalg::partial_transpose(&self.choi, self.out_dim, self.in_dim, role.factor())
    }

    pub fn hermiticity_preserving(&self, tol: f64) -> Predicate {
        let residual = hermiticity_residual(&self.choi);
        Predicate {
            holds: residual <= tol,
            residual,
        }
    }

    /// Choi criterion; the residual is `max(Hermiticity defect, -λ_min(J))`.
    pub fn completely_positive(&self, tol: f64) -> Predicate {
        let herm = hermiticity_residual(&self.choi);
        let lam = min_eigenvalue(&self.choi).unwrap_or(f64::NEG_INFINITY);
        let residual = herm.max(-lam).max(0.0);
        Predicate {
            holds: residual <= tol,
            residual,
        }
    }

    /// `Tr_out J(Φ) = I_n`.
    pub fn trace_preserving(&self, tol: f64) -> Predicate {
        let pt = self
            .choi_partial_trace(Role::Output)
            .expect("Choi matrix has consistent dimensions");
        let residual = max_abs_diff(&pt, &linalg::identity(self.in_dim));
        Predicate {
            holds: residual <= tol,
            residual,
        }
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.completely_positive(tol).holds
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preserving(tol).holds
    }

    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        self.hermiticity_preserving(tol).holds
    }

    pub fn is_channel(&self, tol: f64) -> bool {
        self.is_completely_positive(tol) && self.is_trace_preserving(tol)
    }

    /// Entrywise distance between Choi matrices.
    pub fn distance(&self, other: &LinearMapRep) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(max_abs_diff(&self.choi, &other.choi))
    }

    /// Replaces `J` by its Hermitian part; used once Hermiticity preservation is established.
    pub fn hermitized(&self) -> LinearMapRep {
        Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            choi: linalg::hermitian_part(&self.choi),
        }
    }

    /// Restricts the output to the smallest subspace supporting every `Φ(X)`.
    ///
    /// Returns `(Φ', W_L, W_R)` with `Φ'(X) = W_L* Φ(X) W_R`; both `W` are
    /// `m × m'` isometries whose ranges contain all column (resp. row) spaces of
    /// the outputs, so every trace norm of `Φ ⊗ id_k` is unchanged.
    pub fn compress_output(&self) -> Result<(LinearMapRep, ComplexMatrix, ComplexMatrix)> {
        let (n, m) = (self.in_dim, self.out_dim);
        let mut cols = ComplexMatrix::zeros(m, m * n * n);
        let mut rows = ComplexMatrix::zeros(m, m * n * n);
        for a in 0..n {
            for b in 0..n {
                let img = self.image_of_elementary(a, b);
                let off = (a * n + b) * m;
                cols.columns_mut(off, m).copy_from(&img);
                rows.columns_mut(off, m).copy_from(&img.adjoint());
            }
        }
        let sl = linalg::svd(&cols)?;
        let sr = linalg::svd(&rows)?;
        let hp = self.is_hermiticity_preserving(1e-12 * (1.0 + max_abs(&self.choi)));
        let keep = sl.numerical_rank().max(sr.numerical_rank()).max(1);
        if keep >= m {
            return Ok((self.clone(), linalg::identity(m), linalg::identity(m)));
        }
        let wl = sl.left.columns(0, keep).into_owned();
        let wr = if hp {
            wl.clone()
        } else {
            sr.left.columns(0, keep).into_owned()
        };
        let compressed = Self::choi_from_apply(n, keep, |x| wl.adjoint() * self.apply_unchecked(x) * &wr)?;
        Ok((compressed, wl, wr))
    }
}

// ---------------------------------------------------------------------------
// Named maps

pub fn identity_map(n: usize) -> LinearMapRep {
    let choi = ComplexMatrix::from_fn(n * n, n * n, |row, col| {
        let (i, a) = (row / n, row % n);
        let (j, b) = (col / n, col % n);
        if i == a && j == b {
            cr(1.0)
        } else {
            cr(0.0)
        }
    });
    LinearMapRep {
        in_dim: n,
        out_dim: n,
        choi,
    }
}

/// `T_n`; its Choi matrix is the swap operator.
pub fn transpose_map(n: usize) -> LinearMapRep {
    let choi = ComplexMatrix::from_fn(n * n, n * n, |row, col| {
        let (i, a) = (row / n, row % n);
        let (j, b) = (col / n, col % n);
        if i == b && j == a {
            cr(1.0)
        } else {
            cr(0.0)
        }
    });
    LinearMapRep {
        in_dim: n,
        out_dim: n,
        choi,
    }
}

/// Completely depolarizing channel `X ↦ Tr(X) I_n / n`.
pub fn depolarizing_map(n: usize) -> LinearMapRep {
    let choi = linalg::kron(&linalg::identity(n), &linalg::identity(n)) / cr(n as f64);
    LinearMapRep {
        in_dim: n,
        out_dim: n,
        choi,
    }
}

/// `X ↦ W X W*` for an `m × n` matrix `W`.
pub fn conjugation_map(w: &ComplexMatrix) -> Result<LinearMapRep> {
    LinearMapRep::from_kraus(&KrausSet::new(vec![w.clone()], None)?)
}

/// `X ↦ U (X ⊗ σ) V*` with `U, V : C^n ⊗ C^r → C^m`.
pub fn structure_map(
    n: usize,
    u: &ComplexMatrix,
    sigma: &ComplexMatrix,
    v: &ComplexMatrix,
) -> Result<LinearMapRep> {
    let r = sigma.nrows();
    if !sigma.is_square() || r == 0 {
        return Err(Error::domain("sigma must be a nonempty square matrix"));
    }
    let m = u.nrows();
    if u.shape() != (m, n * r) || v.shape() != (m, n * r) {
        return Err(Error::domain(format!(
            "U and V must be {m}x{} for n={n}, r={r}",
            n * r
        )));
    }
    let vh = v.adjoint();
    LinearMapRep::choi_from_apply(n, m, |x| u * linalg::kron(x, sigma) * &vh)
}

/// Werner-Holevo channels `(Φ⁽⁰⁾, Φ⁽¹⁾)` on `M_n` and `λ_n = (n+1)/(2n)`.
pub fn wh_channels(n: usize) -> Result<(LinearMapRep, LinearMapRep, f64)> {
    if n < 2 {
        return Err(Error::domain(format!("Werner-Holevo channels need n >= 2, got {n}")));
    }
    let nf = n as f64;
    let trace_part = depolarizing_map(n).scale(nf);
    let t = transpose_map(n);
    let phi0 = trace_part.add(&t)?.scale(1.0 / (nf + 1.0));
    let phi1 = trace_part.subtract(&t)?.scale(1.0 / (nf - 1.0));
    Ok((phi0, phi1, (nf + 1.0) / (2.0 * nf)))
}

/// Parses a named constructor: `transpose:n`, `identity:n`, `wh0:n`, `wh1:n`,
/// `depolarizing:n`.
pub fn named_map(spec: &str) -> Result<LinearMapRep> {
    let (name, dim) = spec
        .split_once(':')
        .ok_or_else(|| Error::domain(format!("expected name:n, got {spec:?}")))?;
    let n: usize = dim
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("bad dimension in {spec:?}")))?;
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    match name.trim() {
        "transpose" => Ok(transpose_map(n)),
        "identity" => Ok(identity_map(n)),
        "depolarizing" => Ok(depolarizing_map(n)),
        "wh0" => Ok(wh_channels(n)?.0),
        "wh1" => Ok(wh_channels(n)?.1),
        other => Err(Error::domain(format!("unknown map constructor {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// JSON form

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapJson {
    Choi {
        in_dim: usize,
        out_dim: usize,
        choi: MatrixJson,
    },
    Kraus {
        in_dim: usize,
        out_dim: usize,
        left: Vec<MatrixJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        right: Option<Vec<MatrixJson>>,
    },
}

impl From<&LinearMapRep> for MapJson {
    fn from(m: &LinearMapRep) -> Self {
        MapJson::Choi {
            in_dim: m.in_dim,
            out_dim: m.out_dim,
            choi: MatrixJson::from(&m.choi),
        }
    }
}

impl TryFrom<&MapJson> for LinearMapRep {
    type Error = Error;

    fn try_from(j: &MapJson) -> Result<Self> {
        match j {
            MapJson::Choi {
                in_dim,
                out_dim,
                choi,
            } => LinearMapRep::from_choi(*in_dim, *out_dim, ComplexMatrix::try_from(choi)?),
            MapJson::Kraus {
                in_dim,
                out_dim,
                left,
                right,
            } => {
                let conv = |v: &Vec<MatrixJson>| -> Result<Vec<ComplexMatrix>> {
                    v.iter().map(ComplexMatrix::try_from).collect()
                };
                let ks = KrausSet::new(conv(left)?, right.as_ref().map(conv).transpose()?)?;
                if ks.dims() != (*in_dim, *out_dim) {
                    return Err(Error::domain(format!(
                        "Kraus operators are {}x{}, declared map M_{in_dim} -> M_{out_dim}",
                        ks.dims().1,
                        ks.dims().0
                    )));
                }
                LinearMapRep::from_kraus(&ks)
            }
        }
    }
}

pub fn map_to_json(m: &LinearMapRep) -> serde_json::Value {
    serde_json::to_value(MapJson::from(m)).expect("map serializes")
}

pub fn map_from_json(v: &serde_json::Value) -> Result<LinearMapRep> {
    let j: MapJson = serde_json::from_value(v.clone())?;
    LinearMapRep::try_from(&j)
}

/// Random map with a Gaussian Choi matrix.
pub fn random_map<R: rand::Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> LinearMapRep {
    LinearMapRep {
        in_dim: n,
        out_dim: m,
        choi: linalg::random_gaussian(m * n, m * n, rng),
    }
}

/// Random Hermiticity-preserving map (Hermitian Gaussian Choi matrix).
pub fn random_hermitian_map<R: rand::Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> LinearMapRep {
    LinearMapRep {
        in_dim: n,
        out_dim: m,
        choi: linalg::random_hermitian(m * n, rng),
    }
}

/// Random channel with `kraus_rank` Kraus operators, from a Haar isometry.
pub fn random_channel<R: rand::Rng + ?Sized>(
    n: usize,
    m: usize,
    kraus_rank: usize,
    rng: &mut R,
) -> Result<LinearMapRep> {
    let v = linalg::random_isometry(m * kraus_rank, n, rng)?;
    let ops = (0..kraus_rank)
        .map(|k| ComplexMatrix::from_fn(m, n, |i, a| v[(i * kraus_rank + k, a)]))
        .collect();
    LinearMapRep::from_kraus(&KrausSet::new(ops, None)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{elementary, hs_inner, identity, random_gaussian, rng_from_seed, trace_norm};

    #[test]
    fn identity_choi_pattern_and_norm() {
        for n in 1..5 {
            let id = identity_map(n);
            let via_apply = LinearMapRep::choi_from_apply(n, n, |x| x.clone()).unwrap();
            assert_eq!(id.choi(), via_apply.choi());
            // J(id_n) = n τ_n.
            let tau = linalg::max_entangled_state(n) * cr(n as f64);
            assert!(max_abs_diff(id.choi(), &tau) < 1e-14);
            assert!((trace_norm(id.choi()).unwrap() - n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn transpose_choi_is_swap() {
        // Hand evaluation of Σ E_ab^T ⊗ E_ab: entry ((i,a),(j,b)) = [i=b][j=a].
        let t = LinearMapRep::choi_from_apply(2, 2, |x| x.transpose()).unwrap();
        let mut swap = ComplexMatrix::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(r, col)] = cr(1.0);
        }
        assert_eq!(t.choi(), &swap);
        assert_eq!(transpose_map(2).choi(), &swap);
        for n in 2..6 {
            assert!((trace_norm(transpose_map(n).choi()).unwrap() - (n * n) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn choi_from_apply_rejects_bad_shapes() {
        let r = LinearMapRep::choi_from_apply(2, 3, |x| x.clone());
        assert!(matches!(r, Err(Error::Domain(_))));
        assert!(LinearMapRep::from_choi(2, 2, identity(3)).is_err());
    }

    #[test]
    fn apply_examples() {
        let mut rng = rng_from_seed(1);
        let x = random_gaussian(3, 3, &mut rng);
        assert!(max_abs_diff(&identity_map(3).apply(&x).unwrap(), &x) < 1e-14);
        let e12 = elementary(2, 2, 0, 1);
        assert_eq!(transpose_map(2).apply(&e12).unwrap(), elementary(2, 2, 1, 0));
        assert!(identity_map(2).apply(&identity(3)).is_err());
    }

    #[test]
    fn wh_formula_oracle() {
        // Direct evaluation of (Tr X I ± X^T)/(n ± 1).
        for n in 2..6 {
            let nf = n as f64;
            let (p0, p1, lam) = wh_channels(n).unwrap();
            assert!((lam - (nf + 1.0) / (2.0 * nf)).abs() < 1e-15);
            let mixed = identity(n) / cr(nf);
            assert!(max_abs_diff(&p0.apply(&mixed).unwrap(), &mixed) < 1e-14);
            let e11 = elementary(n, n, 0, 0);
            let want = (identity(n) - &e11) / cr(nf - 1.0);
            assert!(max_abs_diff(&p1.apply(&e11).unwrap(), &want) < 1e-14);
            let mut rng = rng_from_seed(n as u64);
            let x = random_gaussian(n, n, &mut rng);
            let tr = linalg::trace(&x);
            let w0 = (identity(n) * tr + x.transpose()) / cr(nf + 1.0);
            let w1 = (identity(n) * tr - x.transpose()) / cr(nf - 1.0);
            assert!(max_abs_diff(&p0.apply(&x).unwrap(), &w0) < 1e-13);
            assert!(max_abs_diff(&p1.apply(&x).unwrap(), &w1) < 1e-13);
            for p in [&p0, &p1] {
                assert!(p.is_completely_positive(1e-12));
                assert!(p.is_trace_preserving(1e-12));
                assert!(p.is_hermiticity_preserving(1e-12));
            }
        }
        assert!(wh_channels(1).is_err());
    }

    #[test]
    fn transpose_decomposition_identity() {
        for n in 2..7 {
            let (p0, p1, lam) = wh_channels(n).unwrap();
            let lhs = p0.scale(lam).subtract(&p1.scale(1.0 - lam)).unwrap();
            let rhs = transpose_map(n).scale(1.0 / n as f64);
            assert!(lhs.distance(&rhs).unwrap() < 1e-13);
        }
    }

    #[test]
    fn compose_examples_and_consistency() {
        for n in 1..5 {
            let t = transpose_map(n);
            assert!(t.compose(&t).unwrap().distance(&identity_map(n)).unwrap() < 1e-15);
        }
        let mut rng = rng_from_seed(2);
        let phi = random_map(2, 3, &mut rng);
        let psi = random_map(3, 2, &mut rng);
        assert!(identity_map(3).compose(&phi).unwrap().distance(&phi).unwrap() < 1e-14);
        let comp = psi.compose(&phi).unwrap();
        for _ in 0..10 {
            let x = random_gaussian(2, 2, &mut rng);
            let lhs = comp.apply(&x).unwrap();
            let rhs = psi.apply(&phi.apply(&x).unwrap()).unwrap();
            assert!(max_abs_diff(&lhs, &rhs) < 1e-11);
        }
        assert!(phi.compose(&phi).is_err());
        assert!(phi.subtract(&psi).is_err());
    }

    #[test]
    fn tensor_with_identity_matches_oracles() {
        let mut rng = rng_from_seed(3);
        let phi = random_map(2, 3, &mut rng);
        assert!(phi.tensor_with_identity(1).unwrap().distance(&phi).unwrap() < 1e-15);

        let big = phi.tensor_with_identity(2).unwrap();
        for _ in 0..5 {
            let x = random_gaussian(2, 2, &mut rng);
            let y = random_gaussian(2, 2, &mut rng);
            let lhs = big.apply(&linalg::kron(&x, &y)).unwrap();
            let rhs = linalg::kron(&phi.apply(&x).unwrap(), &y);
            assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        }

        // (T_2 ⊗ id_2)(2 τ_2) is the partial transpose on the first factor.
        let t2 = transpose_map(2).tensor_with_identity(2).unwrap();
        let x = linalg::max_entangled_state(2) * cr(2.0);
        let want = linalg::partial_transpose(&x, 2, 2, Factor::Left).unwrap();
        assert!(max_abs_diff(&t2.apply(&x).unwrap(), &want) < 1e-14);
        assert!(phi.tensor_with_identity(0).is_err());
    }

    #[test]
    fn adjoint_pairing() {
        let mut rng = rng_from_seed(4);
        let phi = random_map(2, 3, &mut rng);
        let adj = phi.adjoint_map();
        assert_eq!((adj.in_dim(), adj.out_dim()), (3, 2));
        for _ in 0..20 {
            let a = random_gaussian(3, 3, &mut rng);
            let b = random_gaussian(2, 2, &mut rng);
            let lhs = hs_inner(&a, &phi.apply(&b).unwrap());
            let rhs = hs_inner(&adj.apply(&a).unwrap(), &b);
            assert!((lhs - rhs).norm() < 1e-11);
            let direct = phi.apply_adjoint(&a).unwrap();
            assert!(max_abs_diff(&direct, &adj.apply(&a).unwrap()) < 1e-12);
        }
        assert!(identity_map(3).adjoint_map().distance(&identity_map(3)).unwrap() < 1e-15);
        let t = transpose_map(3);
        let tadj = t.adjoint_map();
        for _ in 0..50 {
            let a = random_gaussian(3, 3, &mut rng);
            let b = random_gaussian(3, 3, &mut rng);
            let lhs = hs_inner(&a, &t.apply(&b).unwrap());
            let rhs = hs_inner(&tadj.apply(&a).unwrap(), &b);
            assert!((lhs - rhs).norm() < 1e-11);
        }
        assert!(tadj.distance(&t).unwrap() < 1e-15);
    }

    #[test]
    fn compose_transpose_examples() {
        for n in 1..5 {
            let t = transpose_map(n);
            assert!(t.compose_transpose().distance(&identity_map(n)).unwrap() < 1e-15);
            let id_t = identity_map(n).compose_transpose();
            assert!((trace_norm(id_t.choi()).unwrap() - (n * n) as f64).abs() < 1e-10);
        }
        let mut rng = rng_from_seed(5);
        let phi = random_map(3, 2, &mut rng);
        let via_compose = phi.compose(&transpose_map(3)).unwrap();
        assert!(phi.compose_transpose().distance(&via_compose).unwrap() < 1e-15);
    }

    #[test]
    fn transpose_norm_chain() {
        let mut rng = rng_from_seed(6);
        for _ in 0..5 {
            let phi = random_map(2, 3, &mut rng);
            let a = trace_norm(phi.compose_transpose().choi()).unwrap();
            let b = trace_norm(phi.transpose_after().choi()).unwrap();
            let c1 = trace_norm(&phi.choi_partial_transpose(Role::Output).unwrap()).unwrap();
            let c2 = trace_norm(&phi.choi_partial_transpose(Role::Input).unwrap()).unwrap();
            for v in [b, c1, c2] {
                assert!((a - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn predicates() {
        for n in 1..4 {
            let id = identity_map(n);
            assert!(id.is_completely_positive(1e-12));
            assert!(id.is_trace_preserving(1e-12));
            assert!(id.is_hermiticity_preserving(1e-12));
        }
        for n in 2..5 {
            // Swap has eigenvalues ±1.
            let t = transpose_map(n);
            let (vals, _) = linalg::hermitian_eigen(t.choi()).unwrap();
            assert!((vals[0] + 1.0).abs() < 1e-12);
            let cp = t.completely_positive(1e-9);
            assert!(!cp.holds);
            assert!((cp.residual - 1.0).abs() < 1e-12);
            assert!(t.is_trace_preserving(1e-12));
            assert!(t.is_hermiticity_preserving(1e-12));
        }
    }

    #[test]
    fn kraus_and_channels() {
        let mut rng = rng_from_seed(7);
        let ch = random_channel(2, 3, 2, &mut rng).unwrap();
        assert!(ch.is_channel(1e-12));
        let w = linalg::random_isometry(4, 2, &mut rng).unwrap();
        let conj = conjugation_map(&w).unwrap();
        let x = random_gaussian(2, 2, &mut rng);
        assert!(max_abs_diff(&conj.apply(&x).unwrap(), &(&w * &x * w.adjoint())) < 1e-13);
        assert!(KrausSet::new(vec![], None).is_err());
        assert!(KrausSet::new(vec![identity(2), identity(3)], None).is_err());
    }

    #[test]
    fn compression_preserves_action() {
        let mut rng = rng_from_seed(8);
        let w = linalg::random_isometry(6, 2, &mut rng).unwrap();
        let phi = conjugation_map(&w).unwrap().compose(&transpose_map(2)).unwrap();
        let (small, wl, wr) = phi.compress_output().unwrap();
        assert_eq!(small.out_dim(), 2);
        for _ in 0..5 {
            let x = random_gaussian(2, 2, &mut rng);
            let big = phi.apply(&x).unwrap();
            let back = &wl * small.apply(&x).unwrap() * wr.adjoint();
            assert!(max_abs_diff(&big, &back) < 1e-12);
            assert!((trace_norm(&big).unwrap() - trace_norm(&small.apply(&x).unwrap()).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn named_constructors() {
        assert_eq!(named_map("identity:4").unwrap(), identity_map(4));
        assert_eq!(named_map("transpose:2").unwrap(), transpose_map(2));
        assert!(named_map("wh0:1").is_err());
        assert!(named_map("bogus:3").is_err());
        assert!(named_map("identity").is_err());
        assert!(named_map("identity:x").is_err());
    }

    #[test]
    fn map_json_forms() {
        let mut rng = rng_from_seed(9);
        let phi = random_map(2, 3, &mut rng);
        let v = map_to_json(&phi);
        assert_eq!(v["kind"], "choi");
        assert_eq!(map_from_json(&v).unwrap(), phi);

        let k = serde_json::json!({
            "kind": "kraus", "in_dim": 2, "out_dim": 2,
            "left": [{"rows": 2, "cols": 2, "data": [[0.0,0.0],[1.0,0.0],[1.0,0.0],[0.0,0.0]]}]
        });
        let x_gate = map_from_json(&k).unwrap();
        assert!(x_gate.is_channel(1e-12));
        let bad = serde_json::json!({"kind": "kraus", "in_dim": 3, "out_dim": 2, "left": k["left"]});
        assert!(map_from_json(&bad).is_err());
    }
}
