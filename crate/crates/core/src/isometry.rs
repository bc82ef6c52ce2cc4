//! Complete trace-norm isometries `Φ(X) = U(X ⊗ σ)V*`.
//!
//! The Choi pair `(‖J(Φ)‖₁, ‖J(Φ∘T_n)‖₁) = (n, n²)` is the certificate; the
//! multiplication-relation suites are falsification checks only, since they
//! quantify over all matrices.

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::channel::{structure_map, LinearMapRep};
use crate::error::{Error, Result};
use crate::linalg::{
    self, cr, frobenius_norm, hahn_decompose, hermitian_eigen, hermiticity_residual,
    is_isometry_residual, kron, max_abs, max_abs_diff, operator_norm, partial_trace,
    partial_transpose, polar_unitary, rng_from_seed, svd, trace, trace_norm, ComplexMatrix,
    ComplexVector, Factor, MatrixJson, RANK_CUTOFF,
};
use crate::norms::choi_isometry_invariants;
use crate::report::CertificationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureVariant {
    /// `σ` a density matrix, `U`, `V` independent.
    General,
    /// `V = U`, `σ` Hermitian with `‖σ‖₁ = 1`.
    Hermitian,
    /// `V = U`, `σ` a density matrix.
    Positive,
}

/// `Φ(X) = U(X ⊗ σ)V*` with `U, V : C^n ⊗ C^r → C^m` (index `a * r + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct StructureDecomposition {
    pub n: usize,
    pub r: usize,
    pub sigma: ComplexMatrix,
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    pub variant: StructureVariant,
}

impl Serialize for StructureDecomposition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct D {
            n: usize,
            r: usize,
            m: usize,
            variant: StructureVariant,
            sigma: MatrixJson,
            u: MatrixJson,
            v: MatrixJson,
        }
        D {
            n: self.n,
            r: self.r,
            m: self.u.nrows(),
            variant: self.variant,
            sigma: MatrixJson::from(&self.sigma),
            u: MatrixJson::from(&self.u),
            v: MatrixJson::from(&self.v),
        }
        .serialize(s)
    }
}

impl StructureDecomposition {
    pub fn m(&self) -> usize {
        self.u.nrows()
    }

    pub fn to_map(&self) -> Result<LinearMapRep> {
        structure_map(self.n, &self.u, &self.sigma, &self.v)
    }

    /// Largest entry of `Φ(E_ab) - U(E_ab ⊗ σ)V*` over all `a, b`.
    pub fn reconstruction_residual(&self, phi: &LinearMapRep) -> Result<f64> {
        let rebuilt = self.to_map()?;
        phi.distance(&rebuilt)
    }
}

/// Random decomposition with Haar isometries (`m ≥ n r`).
pub fn random_structure<R: Rng + ?Sized>(
    n: usize,
    r: usize,
    m: usize,
    variant: StructureVariant,
    rng: &mut R,
) -> Result<StructureDecomposition> {
    if m < n * r {
        return Err(Error::domain(format!("need m >= n r, got m={m}, n={n}, r={r}")));
    }
    let u = linalg::random_isometry(m, n * r, rng)?;
    let (sigma, v) = match variant {
        StructureVariant::General => (linalg::random_density(r, rng)?, linalg::random_isometry(m, n * r, rng)?),
        StructureVariant::Positive => (linalg::random_density(r, rng)?, u.clone()),
        StructureVariant::Hermitian => {
            let h = linalg::random_hermitian(r, rng);
            let norm = trace_norm(&h)?;
            (h / cr(norm), u.clone())
        }
    };
    Ok(StructureDecomposition {
        n,
        r,
        sigma,
        u,
        v,
        variant,
    })
}

// ---------------------------------------------------------------------------
// Certification and extraction

pub fn certify_complete_isometry(phi: &LinearMapRep, tol: f64) -> CertificationReport {
    let n = phi.in_dim() as f64;
    let mut report = CertificationReport::new();
    match choi_isometry_invariants(phi) {
        Ok((j, jt)) => {
            report.check("choi_trace_norm", (j - n).abs(), tol);
            report.check("choi_transpose_trace_norm", (jt - n * n).abs(), tol);
            report.witness("choi_trace_norm", j);
            report.witness("choi_transpose_trace_norm", jt);
        }
        Err(e) => {
            report.push("choi_trace_norm", f64::NAN, tol, false);
            report.witness("error", e.to_string());
        }
    }
    report
}

/// Rotates each column so its largest-magnitude entry is real and positive.
fn fix_phases(vectors: &mut ComplexMatrix, partner: Option<&mut ComplexMatrix>) {
    let mut phases = Vec::with_capacity(vectors.ncols());
    for j in 0..vectors.ncols() {
        let col = vectors.column(j);
        let pivot = col.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(cr(1.0));
        let ph = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { cr(1.0) };
        phases.push(ph);
        for i in 0..vectors.nrows() {
            vectors[(i, j)] *= ph;
        }
    }
    if let Some(p) = partner {
        for (j, ph) in phases.into_iter().enumerate() {
            for i in 0..p.nrows() {
                p[(i, j)] *= ph;
            }
        }
    }
}

/// Builds `U(e_a ⊗ e_i) = Φ(E_{a,1}) x_i / s_i` (index `a * r + i`).
fn isometry_from_columns(phi: &LinearMapRep, x: &ComplexMatrix, s: &[f64], adjoint: bool) -> ComplexMatrix {
    let (n, m, r) = (phi.in_dim(), phi.out_dim(), s.len());
    let mut out = ComplexMatrix::zeros(m, n * r);
    for a in 0..n {
        let img = if adjoint {
            phi.image_of_elementary(0, a).adjoint()
        } else {
            phi.image_of_elementary(a, 0)
        };
        for (i, &si) in s.iter().enumerate().take(r) {
            let col = &img * x.column(i) / cr(si);
            out.column_mut(a * r + i).copy_from(&col);
        }
    }
    out
}

/// Recovers `(r, σ, U, V)` from a certified complete isometry.
///
/// Hermiticity-preserving maps take the spectral route (`V = U`, Hermitian
/// `σ`); positive ones end up with a density matrix `σ`.
pub fn extract_isometry_structure(phi: &LinearMapRep, tol: f64) -> Result<StructureDecomposition> {
    let report = certify_complete_isometry(phi, tol);
    if !report.verdict {
        return Err(Error::Refusal {
            reason: "map is not certified as a complete trace-norm isometry".into(),
            report: Box::new(report),
        });
    }
    let n = phi.in_dim();
    let e11 = phi.image_of_elementary(0, 0);
    let hermitian = hermiticity_residual(phi.choi()) <= tol;

    let (u, v, sigma_diag, variant) = if hermitian {
        let (vals, vecs) = hermitian_eigen(&linalg::hermitian_part(&e11))?;
        let lmax = vals.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
        let keep: Vec<usize> = (0..vals.len())
            .rev()
            .filter(|&i| vals[i].abs() > RANK_CUTOFF * lmax)
            .collect();
        let lam: Vec<f64> = keep.iter().map(|&i| vals[i]).collect();
        let mut x = ComplexMatrix::from_fn(e11.nrows(), keep.len(), |row, j| vecs[(row, keep[j])]);
        fix_phases(&mut x, None);
        let u = isometry_from_columns(phi, &x, &lam, false);
        let variant = if lam.iter().all(|&l| l > 0.0) {
            StructureVariant::Positive
        } else {
            StructureVariant::Hermitian
        };
        (u.clone(), u, lam, variant)
    } else {
        let s = svd(&e11)?;
        let r = s.numerical_rank();
        let sv: Vec<f64> = s.singular_values[..r].to_vec();
        let mut x = s.left.columns(0, r).into_owned();
        let mut y = s.right.columns(0, r).into_owned();
        fix_phases(&mut x, Some(&mut y));
        let u = isometry_from_columns(phi, &y, &sv, false);
        let v = isometry_from_columns(phi, &x, &sv, true);
        (u, v, sv, StructureVariant::General)
    };

    let r = sigma_diag.len();
    let sigma = ComplexMatrix::from_fn(r, r, |i, j| if i == j { cr(sigma_diag[i]) } else { cr(0.0) });
    let decomp = StructureDecomposition {
        n,
        r,
        sigma,
        u,
        v,
        variant,
    };
    for (what, residual) in [
        ("U isometry", is_isometry_residual(&decomp.u)),
        ("V isometry", is_isometry_residual(&decomp.v)),
        ("sigma trace norm", (sigma_diag.iter().map(|s| s.abs()).sum::<f64>() - 1.0).abs()),
        ("reconstruction", decomp.reconstruction_residual(phi)?),
    ] {
        if !(residual <= tol) {
            return Err(Error::Inconsistency {
                what: what.into(),
                residual,
                tol,
            });
        }
    }
    Ok(decomp)
}

// ---------------------------------------------------------------------------
// Multiplication relations

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    /// `Φ(A)*Φ(B)`.
    Left,
    /// `Φ(A)Φ(B)*`.
    Right,
}

fn product(side: Side, a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    match side {
        Side::Left => a.adjoint() * b,
        Side::Right => a * b.adjoint(),
    }
}

fn normalized(a: ComplexMatrix) -> ComplexMatrix {
    let f = frobenius_norm(&a);
    if f > 0.0 {
        a / cr(f)
    } else {
        a
    }
}

/// Quadruple with `A*B = C*D`: `[A; C]` and `[B; -D]` have orthogonal column spaces.
fn quadruple<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<[ComplexMatrix; 4]> {
    let q = linalg::random_unitary(2 * n, rng)?;
    let k = linalg::random_gaussian(n, n, rng);
    let l = linalg::random_gaussian(n, n, rng);
    let s = normalized(q.columns(0, n) * k);
    let t = normalized(q.columns(n, n) * l);
    let a = s.rows(0, n).into_owned();
    let c = s.rows(n, n).into_owned();
    let b = t.rows(0, n).into_owned();
    let d = -t.rows(n, n).into_owned();
    Ok([a, b, c, d])
}

/// Pair with `A*B = 0` from complementary column spaces.
fn orthogonal_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<[ComplexMatrix; 2]> {
    let q = linalg::random_unitary(n, rng)?;
    let p = rng.random_range(1..n.max(2)).min(n.saturating_sub(1)).max(1);
    let a = normalized(q.columns(0, p) * linalg::random_gaussian(p, n, rng));
    let b = if n > p {
        normalized(q.columns(p, n - p) * linalg::random_gaussian(n - p, n, rng))
    } else {
        ComplexMatrix::zeros(n, n)
    };
    Ok([a, b])
}

/// Rank-one pair `A = xy*`, `B = x'y*` with orthonormal `x, x'` (so `A*B = 0`, `A*A = B*B`).
fn rank_one_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<[ComplexMatrix; 2]> {
    let q = linalg::random_unitary(n, rng)?;
    let y = linalg::random_unit_vector(n, rng);
    let a = q.column(0) * y.adjoint();
    let b = q.column(1.min(n - 1)) * y.adjoint();
    Ok([a, b])
}

fn adj<const K: usize>(ms: [ComplexMatrix; K]) -> [ComplexMatrix; K] {
    ms.map(|m| m.adjoint())
}

/// Sampled check of the multiplication relations preserved by complete isometries.
///
/// Classes: `relation.{left,right}` (`A*B = C*D ⟹ Φ(A)*Φ(B) = Φ(C)*Φ(D)` and
/// its mirror), `orthogonal.{left,right}` (`A*B = 0`), `rank_one.{left,right}`
/// (rank-one `A*B = 0, A*A = B*B`), plus the normalization `‖Φ(X)‖₁ = ‖X‖₁` on
/// one random `X`. These are falsification checks, not proofs.
pub fn verify_multiplication_relations(
    phi: &LinearMapRep,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<CertificationReport> {
    let n = phi.in_dim();
    if n < 2 {
        return Err(Error::domain("relation classes need n >= 2"));
    }
    let mut rng = rng_from_seed(seed);
    let ap = |x: &ComplexMatrix| phi.apply(x);
    let mut worst = [0.0f64; 6];
    for _ in 0..samples {
        let q = quadruple(n, &mut rng)?;
        for (slot, side, [a, b, c, d]) in [(0, Side::Left, q.clone()), (1, Side::Right, adj(q))] {
            let lhs = product(side, &ap(&a)?, &ap(&b)?);
            let rhs = product(side, &ap(&c)?, &ap(&d)?);
            worst[slot] = worst[slot].max(max_abs_diff(&lhs, &rhs));
        }
        let o = orthogonal_pair(n, &mut rng)?;
        for (slot, side, [a, b]) in [(2, Side::Left, o.clone()), (3, Side::Right, adj(o))] {
            worst[slot] = worst[slot].max(max_abs(&product(side, &ap(&a)?, &ap(&b)?)));
        }
        let p = rank_one_pair(n, &mut rng)?;
        for (slot, side, [a, b]) in [(4, Side::Left, p.clone()), (5, Side::Right, adj(p))] {
            worst[slot] = worst[slot].max(max_abs(&product(side, &ap(&a)?, &ap(&b)?)));
        }
    }
    let mut report = CertificationReport::new();
    let names = [
        "relation.left",
        "relation.right",
        "orthogonal.left",
        "orthogonal.right",
        "rank_one.left",
        "rank_one.right",
    ];
    for (name, w) in names.iter().zip(worst) {
        report.check(format!("sampled.{name}"), w, tol);
    }
    let x = linalg::random_gaussian(n, n, &mut rng);
    let norm_gap = (trace_norm(&ap(&x)?)? - trace_norm(&x)?).abs() / trace_norm(&x)?;
    report.check("normalization", norm_gap, tol);
    report.witness("samples", samples);
    report.witness("seed", seed);
    Ok(report)
}

/// The rank-one classes with the adjoint on the other side of the product:
/// `A*B = 0, A*A = B*B ⟹ Φ(A)Φ(B)* = 0` and its mirror. Maps of the form
/// `Ψ∘T_n` with `Ψ` a complete isometry satisfy these instead of the ordinary classes.
pub fn verify_transposed_relations(
    phi: &LinearMapRep,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<CertificationReport> {
    let n = phi.in_dim();
    if n < 2 {
        return Err(Error::domain("relation classes need n >= 2"));
    }
    let mut rng = rng_from_seed(seed);
    let mut worst = [0.0f64; 2];
    for _ in 0..samples {
        let p = rank_one_pair(n, &mut rng)?;
        for (slot, side, [a, b]) in [(0, Side::Right, p.clone()), (1, Side::Left, adj(p))] {
            worst[slot] = worst[slot].max(max_abs(&product(side, &phi.apply(&a)?, &phi.apply(&b)?)));
        }
    }
    let mut report = CertificationReport::new();
    report.check("sampled.rank_one_transposed.left", worst[0], tol);
    report.check("sampled.rank_one_transposed.right", worst[1], tol);
    Ok(report)
}

/// Unit vectors `e_a` and, unless `elementary_only`, `(e_a ± e_b)/√2`, `(e_a ± i e_b)/√2`.
fn sweep_dictionary(n: usize, elementary_only: bool) -> Vec<ComplexVector> {
    let mut out: Vec<ComplexVector> = (0..n).map(|a| linalg::basis_vector(n, a)).collect();
    if !elementary_only {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for a in 0..n {
            for b in (a + 1)..n {
                for ph in [cr(1.0), cr(-1.0), linalg::c(0.0, 1.0), linalg::c(0.0, -1.0)] {
                    let mut v = ComplexVector::zeros(n);
                    v[a] = cr(h);
                    v[b] = ph * h;
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Exhaustive search for violations of the rank-one relation classes over all
/// pairs of dictionary matrices `xy*`.
///
/// With `elementary_only` the dictionary is `{E_ab}` (all `n⁴` pairs are
/// tested); otherwise two-level superpositions are added, which is needed to
/// expose maps (like the completely depolarizing channel) that annihilate all
/// off-diagonal matrix units.
pub fn exhaustive_relation_sweep(phi: &LinearMapRep, tol: f64, elementary_only: bool) -> Result<CertificationReport> {
    let n = phi.in_dim();
    let dict = sweep_dictionary(n, elementary_only);
    let mut mats = Vec::with_capacity(dict.len() * dict.len());
    for x in &dict {
        for y in &dict {
            mats.push(x * y.adjoint());
        }
    }
    let images: Vec<ComplexMatrix> = mats.iter().map(|m| phi.apply(m)).collect::<Result<_>>()?;
    let mut report = CertificationReport::new();
    for (label, side) in [("left", Side::Left), ("right", Side::Right)] {
        let mut worst = 0.0f64;
        let mut hypotheses = 0usize;
        let mut first: Option<(usize, usize)> = None;
        for i in 0..mats.len() {
            for j in 0..mats.len() {
                let (a, b) = (&mats[i], &mats[j]);
                let hyp = max_abs(&product(side, a, b)) < 1e-12
                    && max_abs_diff(&product(side, a, a), &product(side, b, b)) < 1e-12;
                if !hyp {
                    continue;
                }
                hypotheses += 1;
                let viol = max_abs(&product(side, &images[i], &images[j]));
                if viol > worst {
                    worst = viol;
                    if viol > tol && first.is_none() {
                        first = Some((i, j));
                    }
                }
            }
        }
        report.check(format!("swept.rank_one.{label}"), worst, tol);
        report.witness(format!("{label}.hypothesis_pairs"), hypotheses);
        if let Some((i, j)) = first {
            report.witness(format!("{label}.violation.a"), MatrixJson::from(&mats[i]));
            report.witness(format!("{label}.violation.b"), MatrixJson::from(&mats[j]));
        }
    }
    report.witness("dictionary_size", dict.len());
    report.witness("elementary_only", elementary_only);
    Ok(report)
}

/// Checks `‖[[A, B], [C, D]]‖₁ = Σ‖·‖₁ ⟺ A*B = AC* = D*C = DB* = 0` on one instance.
///
/// The verdict is whether both sides of the equivalence agree.
pub fn block_2x2_norm_test(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    tol: f64,
) -> Result<CertificationReport> {
    let n = a.nrows();
    if [a, b, c, d].iter().any(|m| m.shape() != (n, n)) {
        return Err(Error::domain("block test needs four n x n matrices"));
    }
    let mut block = ComplexMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(a);
    block.view_mut((0, n), (n, n)).copy_from(b);
    block.view_mut((n, 0), (n, n)).copy_from(c);
    block.view_mut((n, n), (n, n)).copy_from(d);
    let lhs = trace_norm(&block)?;
    let rhs = trace_norm(a)? + trace_norm(b)? + trace_norm(c)? + trace_norm(d)?;
    let products = [
        ("a_star_b", a.adjoint() * b),
        ("a_c_star", a * c.adjoint()),
        ("d_star_c", d.adjoint() * c),
        ("d_b_star", d * b.adjoint()),
    ];
    let mut report = CertificationReport::new();
    let mut worst = 0.0f64;
    for (name, p) in &products {
        let r = max_abs(p);
        worst = worst.max(r);
        report.witness(*name, r);
    }
    let additive = (rhs - lhs).abs() <= tol;
    let vanish = worst <= tol;
    report.witness("block_trace_norm", lhs);
    report.witness("sum_trace_norms", rhs);
    report.witness("additive", additive);
    report.witness("products_vanish", vanish);
    let disagreement = if additive == vanish { 0.0 } else { (rhs - lhs).abs().max(worst) };
    report.push("equivalence", disagreement, tol, additive == vanish);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Left inverses and signed decompositions

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftInverseKind {
    /// `Ψ(Y) = Tr_r((I ⊗ S) U* Y V)` with `S` the unitary polar factor of `σ*`.
    General,
    /// `Ψ(Y) = Tr_r(U* Y U) + Tr((I - UU*)Y) I_n / n`; needs the positive variant.
    Channel,
}

pub fn left_inverse(d: &StructureDecomposition, kind: LeftInverseKind) -> Result<LinearMapRep> {
    let (n, r, m) = (d.n, d.r, d.m());
    match kind {
        LeftInverseKind::General => {
            // Tr(S σ) = ‖σ‖₁ = 1 makes Ψ(Φ(X)) = X for every variant.
            let s = polar_unitary(&d.sigma)?.adjoint();
            let lift = kron(&linalg::identity(n), &s);
            let uh = d.u.adjoint();
            LinearMapRep::choi_from_apply(m, n, |y| {
                let inner = &lift * &uh * y * &d.v;
                partial_trace(&inner, n, r, Factor::Right).expect("consistent dimensions")
            })
        }
        LeftInverseKind::Channel => {
            if d.variant != StructureVariant::Positive {
                return Err(Error::domain("channel left inverse needs the positive variant"));
            }
            let uh = d.u.adjoint();
            let comp = linalg::identity(m) - &d.u * &uh;
            let eta = linalg::identity(n) / cr(n as f64);
            LinearMapRep::choi_from_apply(m, n, |y| {
                let inner = &uh * y * &d.u;
                partial_trace(&inner, n, r, Factor::Right).expect("consistent dimensions")
                    + &eta * trace(&(&comp * y))
            })
        }
    }
}

/// `Φ = r Ψ₀ - (1 - r) Ψ₁` with reversible channels of orthogonal ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedReversibleDecomposition {
    pub r_weight: f64,
    /// Present when `r_weight > tol`.
    pub psi0: Option<LinearMapRep>,
    /// Present when `1 - r_weight > tol`.
    pub psi1: Option<LinearMapRep>,
    /// `‖Π₀Π₁‖` for the output-range projectors (0 when a part is absent).
    pub ranges_orthogonal: f64,
    pub structure: StructureDecomposition,
}

impl SignedReversibleDecomposition {
    pub fn reconstruct(&self, n: usize, m: usize) -> Result<LinearMapRep> {
        let mut acc = LinearMapRep::from_choi(n, m, ComplexMatrix::zeros(n * m, n * m))?;
        if let Some(p) = &self.psi0 {
            acc = acc.add(&p.scale(self.r_weight))?;
        }
        if let Some(p) = &self.psi1 {
            acc = acc.subtract(&p.scale(1.0 - self.r_weight))?;
        }
        Ok(acc)
    }
}

impl Serialize for SignedReversibleDecomposition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct D<'a> {
            r_weight: f64,
            psi0: Option<serde_json::Value>,
            psi1: Option<serde_json::Value>,
            ranges_orthogonal: f64,
            structure: &'a StructureDecomposition,
        }
        D {
            r_weight: self.r_weight,
            psi0: self.psi0.as_ref().map(crate::channel::map_to_json),
            psi1: self.psi1.as_ref().map(crate::channel::map_to_json),
            ranges_orthogonal: self.ranges_orthogonal,
            structure: &self.structure,
        }
        .serialize(s)
    }
}

/// Projector onto the output range of a completely positive map (the range of `Ψ(I)`).
pub fn output_range_projector(psi: &LinearMapRep) -> Result<ComplexMatrix> {
    let img = psi.apply(&linalg::identity(psi.in_dim()))?;
    Ok(linalg::projector_onto(&linalg::range_basis(&img)?))
}

pub fn herm_signed_decompose(phi: &LinearMapRep, tol: f64) -> Result<SignedReversibleDecomposition> {
    let herm = hermiticity_residual(phi.choi());
    if herm > tol {
        return Err(Error::domain(format!(
            "signed decomposition needs a Hermiticity-preserving map (residual {herm:.3e})"
        )));
    }
    let d = extract_isometry_structure(phi, tol)?;
    let n = d.n;
    let hahn = hahn_decompose(&linalg::hermitian_part(&d.sigma), tol)?;
    let tp = trace(&hahn.positive_part).re;
    let tq = trace(&hahn.negative_part).re;
    let part = |h: &ComplexMatrix, t: f64| -> Result<Option<LinearMapRep>> {
        if t > tol {
            Ok(Some(structure_map(n, &d.u, &(h / cr(t)), &d.u)?))
        } else {
            Ok(None)
        }
    };
    let psi0 = part(&hahn.positive_part, tp)?;
    let psi1 = part(&hahn.negative_part, tq)?;
    let ranges_orthogonal = match (&psi0, &psi1) {
        (Some(a), Some(b)) => operator_norm(&(output_range_projector(a)? * output_range_projector(b)?))?,
        _ => 0.0,
    };
    let out = SignedReversibleDecomposition {
        r_weight: tp.clamp(0.0, 1.0),
        psi0,
        psi1,
        ranges_orthogonal,
        structure: d,
    };
    let resid = phi.distance(&out.reconstruct(n, phi.out_dim())?)?;
    if resid > tol {
        return Err(Error::Inconsistency {
            what: "signed reconstruction".into(),
            residual: resid,
            tol,
        });
    }
    for p in out.psi0.iter().chain(out.psi1.iter()) {
        let (cp, tp) = (p.completely_positive(tol), p.trace_preserving(tol));
        if !cp.holds || !tp.holds {
            return Err(Error::Inconsistency {
                what: "signed part is not a channel".into(),
                residual: cp.residual.max(tp.residual),
                tol,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Maximally negative bipartite matrices

/// Decomposes `X ∈ M_n ⊗ M_m` with `‖X‖₁ ≤ 1` and `‖(T_n ⊗ id)(X)‖₁ = n` as
/// `X = (I_n ⊗ U)(τ_n ⊗ σ)(I_n ⊗ V*)`.
///
/// Writing `X = Σ E_ab ⊗ X_ab`, the map `E_ab ↦ n X_ab` is then a complete
/// isometry and its structure is the structure of `X`.
pub fn extract_max_entangled_structure(
    x: &ComplexMatrix,
    n: usize,
    m: usize,
    tol: f64,
) -> Result<StructureDecomposition> {
    if n == 0 || m == 0 || x.shape() != (n * m, n * m) {
        return Err(Error::domain(format!("expected a {0}x{0} matrix", n * m)));
    }
    let mut report = CertificationReport::new();
    let norm = trace_norm(x)?;
    let neg = trace_norm(&partial_transpose(x, n, m, Factor::Left)?)?;
    report.check("trace_norm_at_most_one", (norm - 1.0).max(0.0), tol);
    report.check("partial_transpose_norm", (neg - n as f64).abs(), tol);
    report.witness("trace_norm", norm);
    report.witness("partial_transpose_trace_norm", neg);
    if !report.verdict {
        return Err(Error::Refusal {
            reason: "matrix is not maximally negative".into(),
            report: Box::new(report),
        });
    }
    let nf = cr(n as f64);
    let phi = LinearMapRep::choi_from_apply(n, m, |e| {
        let mut out = ComplexMatrix::zeros(m, m);
        for a in 0..n {
            for b in 0..n {
                if e[(a, b)] != cr(0.0) {
                    out += x.view((a * m, b * m), (m, m)) * (nf * e[(a, b)]);
                }
            }
        }
        out
    })?;
    // Choi norms of this map are n‖X‖₁ and n‖X^{T_A}‖₁.
    let d = extract_isometry_structure(&phi, tol * (n * n) as f64)?;
    let rebuilt = max_entangled_product(&d)?;
    let resid = max_abs_diff(&rebuilt, x);
    if resid > tol {
        return Err(Error::Inconsistency {
            what: "bipartite reconstruction".into(),
            residual: resid,
            tol,
        });
    }
    Ok(d)
}

/// `(I_n ⊗ U)(τ_n ⊗ σ)(I_n ⊗ V*)`.
pub fn max_entangled_product(d: &StructureDecomposition) -> Result<ComplexMatrix> {
    let n = d.n;
    let tau = linalg::max_entangled_state(n);
    let id = linalg::identity(n);
    Ok(kron(&id, &d.u) * kron(&tau, &d.sigma) * kron(&id, &d.v).adjoint())
}
