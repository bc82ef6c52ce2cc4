//! Dense primal-dual interior-point method for small block-diagonal SDPs.
//!
//! Standard form, all blocks real symmetric:
//!
//! ```text
//! primal:  min ⟨C, X⟩  s.t. ⟨A_i, X⟩ = b_i,  X ⪰ 0
//! dual:    max bᵀy     s.t. Σ y_i A_i + S = C,  S ⪰ 0
//! ```
//!
//! Search direction is HKM with a Mehrotra predictor-corrector, started from
//! an infeasible `X = ξI, S = ηI, y = 0`. Constraint matrices are sparse
//! (a handful of entries each), which keeps the Schur complement cheap.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, C64};

type RealMatrix = DMatrix<f64>;

/// One nonzero of a constraint matrix. Off-diagonal entries appear twice,
/// once per triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub val: f64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub c: Vec<RealMatrix>,
    pub a: Vec<Vec<Entry>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 120,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Vec<RealMatrix>,
    pub s: Vec<RealMatrix>,
    pub y: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap `|p - d| / (1 + |p| + |d|)`.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        let nb = self.block_dims.len();
        if self.c.len() != nb {
            return Err(Error::domain("one objective block per block dimension required"));
        }
        for (cb, &d) in self.c.iter().zip(&self.block_dims) {
            if cb.shape() != (d, d) {
                return Err(Error::domain("objective block has the wrong size"));
            }
            if (cb - cb.transpose()).amax() > 1e-12 * (1.0 + cb.amax()) {
                return Err(Error::domain("objective block is not symmetric"));
            }
        }
        if self.a.len() != self.b.len() {
            return Err(Error::domain("constraint count does not match right-hand side"));
        }
        for a in &self.a {
            for e in a {
                if e.block >= nb || e.row >= self.block_dims[e.block] || e.col >= self.block_dims[e.block] {
                    return Err(Error::domain("constraint entry out of range"));
                }
                if e.row != e.col {
                    let twin = a
                        .iter()
                        .any(|f| f.block == e.block && f.row == e.col && f.col == e.row && f.val == e.val);
                    if !twin {
                        return Err(Error::domain("constraint matrix is not symmetric"));
                    }
                }
            }
        }
        Ok(())
    }

    fn apply_a(&self, x: &[RealMatrix]) -> DVector<f64> {
        DVector::from_iterator(
            self.a.len(),
            self.a
                .iter()
                .map(|a| a.iter().map(|e| e.val * x[e.block][(e.row, e.col)]).sum::<f64>()),
        )
    }

    fn apply_a_adjoint(&self, y: &DVector<f64>) -> Vec<RealMatrix> {
        let mut out: Vec<RealMatrix> = self.block_dims.iter().map(|&d| RealMatrix::zeros(d, d)).collect();
        for (a, &yi) in self.a.iter().zip(y.iter()) {
            for e in a {
                out[e.block][(e.row, e.col)] += yi * e.val;
            }
        }
        out
    }

    /// `M_ij = Tr(A_i X A_j Z)`.
    fn schur(&self, x: &[RealMatrix], z: &[RealMatrix]) -> RealMatrix {
        let m = self.a.len();
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let ai = &self.a[i];
                (0..m)
                    .map(|j| {
                        if j < i {
                            return 0.0;
                        }
                        let mut s = 0.0;
                        for p in ai {
                            for q in &self.a[j] {
                                if p.block == q.block {
                                    s += p.val * q.val * x[p.block][(p.col, q.row)] * z[p.block][(q.col, p.row)];
                                }
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        let mut mm = RealMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                mm[(i, j)] = rows[i][j];
                mm[(j, i)] = rows[i][j];
            }
        }
        mm
    }
}

fn inner(a: &[RealMatrix], b: &[RealMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn fro(a: &[RealMatrix]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn sym(a: &RealMatrix) -> RealMatrix {
    (a + a.transpose()) * 0.5
}

/// Largest `α` with `X + α dX ⪰ 0` (infinite when `dX ⪰ 0`).
fn max_step(x: &[RealMatrix], dx: &[RealMatrix]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        let l = Cholesky::new(xb.clone())?.l();
        let t = l.solve_lower_triangular(db)?;
        let w = l.solve_lower_triangular(&t.transpose())?;
        let lam = SymmetricEigen::new(sym(&w)).eigenvalues.min();
        if lam < 0.0 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    Some(alpha)
}

fn failure(iterations: usize, gap: f64, pres: f64, dres: f64) -> Error {
    Error::SolverFailure {
        iterations,
        gap,
        primal_residual: pres,
        dual_residual: dres,
    }
}

pub fn solve(p: &SdpProblem, settings: SdpSettings) -> Result<SdpSolution> {
    p.validate()?;
    let ntot: usize = p.block_dims.iter().sum();
    let nf = ntot as f64;
    let a_norms: Vec<f64> = p
        .a
        .iter()
        .map(|a| a.iter().map(|e| e.val * e.val).sum::<f64>().sqrt())
        .collect();
    let c_norm = fro(&p.c);
    let b_norm = p.b.iter().map(|v| v * v).sum::<f64>().sqrt();

    let xi = a_norms
        .iter()
        .zip(&p.b)
        .map(|(an, bi)| nf * (1.0 + bi.abs()) / (1.0 + an))
        .fold(10.0f64.max(nf.sqrt()), f64::max);
    let eta = a_norms
        .iter()
        .copied()
        .fold((1.0 + c_norm).max(10.0).max(nf.sqrt()), f64::max);

    let mut x: Vec<RealMatrix> = p.block_dims.iter().map(|&d| RealMatrix::identity(d, d) * xi).collect();
    let mut s: Vec<RealMatrix> = p.block_dims.iter().map(|&d| RealMatrix::identity(d, d) * eta).collect();
    let mut y = DVector::<f64>::zeros(p.b.len());
    let b = DVector::from_column_slice(&p.b);

    let (mut gap, mut pres, mut dres) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for iter in 0..=settings.max_iter {
        let ax = p.apply_a(&x);
        let rp = &b - &ax;
        let aty = p.apply_a_adjoint(&y);
        let rd: Vec<RealMatrix> = (0..x.len()).map(|k| &p.c[k] - &s[k] - &aty[k]).collect();
        let pobj = inner(&p.c, &x);
        let dobj = b.dot(&y);
        gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        pres = rp.norm() / (1.0 + b_norm);
        dres = fro(&rd) / (1.0 + c_norm);
        log::trace!("sdp iter {iter}: pobj {pobj:.10e} dobj {dobj:.10e} gap {gap:.2e} pinf {pres:.2e} dinf {dres:.2e}");
        if !(gap.is_finite() && pres.is_finite() && dres.is_finite()) {
            return Err(failure(iter, gap, pres, dres));
        }
        if gap < settings.tol && pres < settings.tol && dres < settings.tol {
            return Ok(SdpSolution {
                x,
                s,
                y: y.iter().copied().collect(),
                primal_objective: pobj,
                dual_objective: dobj,
                gap,
                primal_residual: pres,
                dual_residual: dres,
                iterations: iter,
            });
        }
        if iter == settings.max_iter {
            break;
        }

        let z: Vec<RealMatrix> = s
            .iter()
            .map(|sb| Cholesky::new(sb.clone()).map(|ch| ch.inverse()))
            .collect::<Option<_>>()
            .ok_or_else(|| failure(iter, gap, pres, dres))?;
        let mu = inner(&x, &s) / nf;

        let schur = p.schur(&x, &z);
        let chol = Cholesky::new(schur.clone());
        let lu = if chol.is_none() { Some(schur.lu()) } else { None };
        let solve_m = |rhs: &DVector<f64>| -> Option<DVector<f64>> {
            match (&chol, &lu) {
                (Some(ch), _) => Some(ch.solve(rhs)),
                (None, Some(lu)) => lu.solve(rhs),
                _ => None,
            }
        };
        let x_rd_z: Vec<RealMatrix> = (0..x.len()).map(|k| &x[k] * &rd[k] * &z[k]).collect();
        let a_x_rd_z = p.apply_a(&x_rd_z);

        let direction = |rc: &[RealMatrix]| -> Option<(Vec<RealMatrix>, DVector<f64>, Vec<RealMatrix>)> {
            let rhs = &rp - p.apply_a(rc) + &a_x_rd_z;
            let dy = solve_m(&rhs)?;
            let atdy = p.apply_a_adjoint(&dy);
            let ds: Vec<RealMatrix> = (0..x.len()).map(|k| &rd[k] - &atdy[k]).collect();
            let dx: Vec<RealMatrix> = (0..x.len())
                .map(|k| &rc[k] - sym(&(&x[k] * &ds[k] * &z[k])))
                .collect();
            Some((dx, dy, ds))
        };

        // Predictor.
        let rc_aff: Vec<RealMatrix> = x.iter().map(|xb| -xb).collect();
        let (dx_a, _, ds_a) = direction(&rc_aff).ok_or_else(|| failure(iter, gap, pres, dres))?;
        let ap = max_step(&x, &dx_a).ok_or_else(|| failure(iter, gap, pres, dres))?.min(1.0);
        let ad = max_step(&s, &ds_a).ok_or_else(|| failure(iter, gap, pres, dres))?.min(1.0);
        let xa: Vec<RealMatrix> = (0..x.len()).map(|k| &x[k] + &dx_a[k] * ap).collect();
        let sa: Vec<RealMatrix> = (0..x.len()).map(|k| &s[k] + &ds_a[k] * ad).collect();
        let mu_aff = inner(&xa, &sa) / nf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let rc: Vec<RealMatrix> = (0..x.len())
            .map(|k| &z[k] * (sigma * mu) - &x[k] - sym(&(&dx_a[k] * &ds_a[k] * &z[k])))
            .collect();
        let (dx, dy, ds) = direction(&rc).ok_or_else(|| failure(iter, gap, pres, dres))?;
        let gamma = 0.95;
        let ap = (gamma * max_step(&x, &dx).ok_or_else(|| failure(iter, gap, pres, dres))?).min(1.0);
        let ad = (gamma * max_step(&s, &ds).ok_or_else(|| failure(iter, gap, pres, dres))?).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            return Err(failure(iter, gap, pres, dres));
        }
        for k in 0..x.len() {
            x[k] = sym(&(&x[k] + &dx[k] * ap));
            s[k] = sym(&(&s[k] + &ds[k] * ad));
        }
        y += dy * ad;
    }
    Err(failure(settings.max_iter, gap, pres, dres))
}

// ---------------------------------------------------------------------------
// Complex Hermitian plumbing

/// `[[Re H, -Im H], [Im H, Re H]]`, which is PSD iff `H` is.
pub fn embed(h: &ComplexMatrix) -> RealMatrix {
    let d = h.nrows();
    let mut out = RealMatrix::zeros(2 * d, 2 * d);
    for r in 0..d {
        for col in 0..d {
            let z = h[(r, col)];
            out[(r, col)] = z.re;
            out[(r + d, col + d)] = z.re;
            out[(r, col + d)] = -z.im;
            out[(r + d, col)] = z.im;
        }
    }
    out
}

/// Inverse of [`embed`] (reads the top-left and bottom-left quadrants, averaged
/// with their mirrors).
pub fn unembed(m: &RealMatrix) -> ComplexMatrix {
    let d = m.nrows() / 2;
    ComplexMatrix::from_fn(d, d, |r, col| {
        let re = 0.5 * (m[(r, col)] + m[(r + d, col + d)]);
        let im = 0.5 * (m[(r + d, col)] - m[(r, col + d)]);
        c(re, im)
    })
}

/// Sparse Hermitian matrix: complex entries with both triangles listed.
pub type HermitianEntries = Vec<(usize, usize, C64)>;

/// Real basis of `d × d` Hermitian matrices: `E_kk`, `E_kl + E_lk`,
/// `i(E_kl - E_lk)` for `k < l`. Returned in that order per `(k, l)`.
pub fn hermitian_basis(d: usize) -> Vec<HermitianEntries> {
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        out.push(vec![(k, k, c(1.0, 0.0))]);
        for l in (k + 1)..d {
            out.push(vec![(k, l, c(1.0, 0.0)), (l, k, c(1.0, 0.0))]);
            out.push(vec![(k, l, c(0.0, 1.0)), (l, k, c(0.0, -1.0))]);
        }
    }
    out
}

/// Coordinates of a Hermitian matrix in [`hermitian_basis`] order.
pub fn hermitian_coordinates(h: &ComplexMatrix) -> Vec<f64> {
    let d = h.nrows();
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        out.push(h[(k, k)].re);
        for l in (k + 1)..d {
            out.push(h[(k, l)].re);
            out.push(h[(k, l)].im);
        }
    }
    out
}

pub fn hermitian_from_coordinates(d: usize, y: &[f64]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    for (coef, entries) in y.iter().zip(hermitian_basis(d)) {
        for (r, col, z) in entries {
            h[(r, col)] += z * *coef;
        }
    }
    h
}

/// Entries of `coef · embed(H)` for a sparse Hermitian `H` of size `d`, shifted by `offset`
/// inside a complex block of size `dim` (embedded size `2 dim`).
pub fn embed_entries(
    block: usize,
    dim: usize,
    offset: usize,
    h: &HermitianEntries,
    coef: f64,
) -> Vec<Entry> {
    let mut out = Vec::new();
    for &(r, col, z) in h {
        let (r, col) = (r + offset, col + offset);
        let mut push = |row, col, val: f64| {
            if val != 0.0 {
                out.push(Entry { block, row, col, val: coef * val });
            }
        };
        push(r, col, z.re);
        push(r + dim, col + dim, z.re);
        push(r, col + dim, -z.im);
        push(r + dim, col, z.im);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_hermitian, rng_from_seed, max_abs_diff};

    fn entry(block: usize, row: usize, col: usize, val: f64) -> Entry {
        Entry { block, row, col, val }
    }

    #[test]
    fn lp_as_diagonal_sdp() {
        // min x1 + 2 x2  s.t. x1 + x2 = 1, x ≥ 0  →  1 at x = (1, 0).
        let p = SdpProblem {
            block_dims: vec![1, 1],
            c: vec![RealMatrix::from_element(1, 1, 1.0), RealMatrix::from_element(1, 1, 2.0)],
            a: vec![vec![entry(0, 0, 0, 1.0), entry(1, 0, 0, 1.0)]],
            b: vec![1.0],
        };
        let sol = solve(&p, SdpSettings::default()).unwrap();
        assert!((sol.primal_objective - 1.0).abs() < 1e-6);
        assert!((sol.dual_objective - 1.0).abs() < 1e-6);
    }

    #[test]
    fn min_eigenvalue_program() {
        // max y s.t. C - y I ⪰ 0  has value λ_min(C).
        let mut rng = rng_from_seed(11);
        let h = random_hermitian(4, &mut rng);
        let cm = embed(&h);
        let d = 8;
        let a = (0..d).map(|k| entry(0, k, k, 1.0)).collect();
        let p = SdpProblem {
            block_dims: vec![d],
            c: vec![cm],
            a: vec![a],
            b: vec![1.0],
        };
        let sol = solve(&p, SdpSettings { tol: 1e-9, max_iter: 100 }).unwrap();
        let lam = crate::linalg::min_eigenvalue(&h).unwrap();
        assert!((sol.dual_objective - lam).abs() < 1e-7, "{} vs {lam}", sol.dual_objective);
    }

    #[test]
    fn embedding_round_trip_and_spectrum() {
        let mut rng = rng_from_seed(12);
        let h = random_hermitian(3, &mut rng);
        let e = embed(&h);
        assert!(max_abs_diff(&unembed(&e), &h) < 1e-15);
        let mut ev: Vec<f64> = SymmetricEigen::new(e).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let (hv, _) = crate::linalg::hermitian_eigen(&h).unwrap();
        for (k, lam) in hv.iter().enumerate() {
            assert!((ev[2 * k] - lam).abs() < 1e-12 && (ev[2 * k + 1] - lam).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_coordinates_round_trip() {
        let mut rng = rng_from_seed(13);
        let h = random_hermitian(4, &mut rng);
        let y = hermitian_coordinates(&h);
        assert_eq!(y.len(), 16);
        assert!(max_abs_diff(&hermitian_from_coordinates(4, &y), &h) < 1e-15);
    }

    #[test]
    fn embed_entries_match_dense_embedding() {
        for basis in hermitian_basis(3) {
            let mut dense = ComplexMatrix::zeros(3, 3);
            for &(r, col, z) in &basis {
                dense[(r, col)] += z;
            }
            let want = embed(&dense);
            let mut got = RealMatrix::zeros(6, 6);
            for e in embed_entries(0, 3, 0, &basis, 1.0) {
                got[(e.row, e.col)] += e.val;
            }
            assert_eq!(got, want);
        }
    }

    #[test]
    fn rejects_asymmetric_constraints() {
        let p = SdpProblem {
            block_dims: vec![2],
            c: vec![RealMatrix::identity(2, 2)],
            a: vec![vec![entry(0, 0, 1, 1.0)]],
            b: vec![1.0],
        };
        assert!(matches!(solve(&p, SdpSettings::default()), Err(Error::Domain(_))));
    }
}
