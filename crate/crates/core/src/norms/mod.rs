//! Norm functionals of linear maps.
//!
//! See-saw values are lower bounds; certificates (Choi shortcuts, SDP upper
//! bounds) are attached separately and never substituted for the bound.

pub mod sdp;
pub(crate) mod seesaw;

use serde::{Serialize, Serializer};

use crate::channel::{LinearMapRep, Role};
use crate::error::{Error, Result};
use crate::linalg::{
    self, c, cr, hermitian_eigen, max_abs, operator_norm, trace_norm, ComplexMatrix, ComplexVector,
    MatrixJson,
};
use sdp::{embed, embed_entries, hermitian_basis, Entry, SdpProblem, SdpSettings};
use seesaw::{Lifted, Run, Schedule};

pub use seesaw::Run as SeesawRun;

/// Options shared by all see-saw searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop a run once one step improves the objective by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_iter: 500,
            tol: 1e-10,
            seed: 0,
        }
    }
}

impl SeesawOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    fn schedule(&self) -> Schedule {
        Schedule {
            max_iter: self.max_iter,
            tol: self.tol,
        }
    }

    fn check(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::domain("restarts must be >= 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain("see-saw tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub u: ComplexVector,
    pub v: ComplexVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub upper_bound: Option<f64>,
    pub witness: Option<Witness>,
    pub iterations: usize,
    pub restarts_used: usize,
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct W {
            u: MatrixJson,
            v: MatrixJson,
        }
        W {
            u: MatrixJson::from(&self.u),
            v: MatrixJson::from(&self.v),
        }
        .serialize(s)
    }
}

impl Serialize for NormEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct E<'a> {
            value: f64,
            upper_bound: Option<f64>,
            witness: Option<&'a Witness>,
            restarts_used: usize,
            iterations: usize,
        }
        E {
            value: self.value,
            upper_bound: self.upper_bound,
            witness: self.witness.as_ref(),
            restarts_used: self.restarts_used,
            iterations: self.iterations,
        }
        .serialize(s)
    }
}

impl NormEstimate {
    fn from_run(run: Run, restarts: usize) -> Self {
        Self {
            value: run.value,
            upper_bound: None,
            witness: Some(Witness { u: run.u, v: run.v }),
            iterations: run.iterations,
            restarts_used: restarts,
        }
    }
}

/// Shrinks the output space when that is lossless for trace norms.
fn compressed(phi: &LinearMapRep) -> Result<LinearMapRep> {
    Ok(phi.compress_output()?.0)
}

/// See-saw estimate of `‖Φ ⊗ id_k‖₁` alone (no inflation bound).
pub fn multiplicity_estimate(phi: &LinearMapRep, k: usize, opts: &SeesawOptions) -> Result<NormEstimate> {
    opts.check()?;
    if k == 0 {
        return Err(Error::domain("multiplicity k must be >= 1"));
    }
    let small = compressed(phi)?;
    let l = Lifted::new(&small, k);
    let d = l.in_dim();
    let sched = opts.schedule();
    let run = seesaw::best_of(opts.restarts, opts.seed, |rng| {
        let x = seesaw::random_start(d, rng);
        let y = seesaw::random_start(d, rng);
        seesaw::bilinear(&l, x, y, sched, None)
    })?;
    Ok(NormEstimate::from_run(run, opts.restarts))
}

/// `‖Φ‖₁ = max ‖Φ(X)‖₁` over `‖X‖₁ ≤ 1`, searched over rank-one `xy*`.
pub fn induced_trace_norm(phi: &LinearMapRep, opts: &SeesawOptions) -> Result<NormEstimate> {
    multiplicity_estimate(phi, 1, opts)
}

/// `‖(Φ ⊗ id_k)(uv*)‖₁` for the given vectors in `C^n ⊗ C^k`.
pub fn evaluate_witness(phi: &LinearMapRep, k: usize, u: &ComplexVector, v: &ComplexVector) -> Result<f64> {
    let d = phi.in_dim() * k;
    if u.len() != d || v.len() != d {
        return Err(Error::domain(format!("witness vectors must have length {d}")));
    }
    trace_norm(&Lifted::new(phi, k).image(u, v))
}

/// `(Φ ⊗ id_k)(uv*)` as a matrix.
pub fn lifted_image(phi: &LinearMapRep, k: usize, u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    Lifted::new(phi, k).image(u, v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityNorm {
    pub k: usize,
    pub estimate: NormEstimate,
    /// See-saw value of `‖Φ‖₁`.
    pub base: f64,
    /// `k · base`.
    pub bound: f64,
    /// `bound - value ≤ tol`.
    pub saturated: bool,
}

/// `‖Φ ⊗ id_k‖₁` with the inflation bound `k‖Φ‖₁`.
pub fn multiplicity_norm(phi: &LinearMapRep, k: usize, opts: &SeesawOptions, tol: f64) -> Result<MultiplicityNorm> {
    let estimate = multiplicity_estimate(phi, k, opts)?;
    let base = if k == 1 {
        estimate.value
    } else {
        induced_trace_norm(phi, opts)?.value
    };
    let bound = k as f64 * base;
    Ok(MultiplicityNorm {
        k,
        saturated: bound - estimate.value <= tol,
        estimate,
        base,
        bound,
    })
}

/// `|||Φ|||₁ = ‖Φ ⊗ id_n‖₁` by see-saw; witness vectors live in `C^n ⊗ C^n`.
pub fn diamond_norm_seesaw(phi: &LinearMapRep, opts: &SeesawOptions) -> Result<NormEstimate> {
    multiplicity_estimate(phi, phi.in_dim(), opts)
}

/// `‖Φ‖_{1,H}`: maximum of `‖Φ(H)‖₁` over Hermitian `H` with `‖H‖₁ = 1`.
pub fn hermitian_induced_norm(phi: &LinearMapRep, opts: &SeesawOptions) -> Result<NormEstimate> {
    hermitian_multiplicity_norm(phi, 1, opts)
}

/// `‖Φ ⊗ id_k‖_{1,H}`, searched over `±xx*` with `x ∈ C^n ⊗ C^k`.
pub fn hermitian_multiplicity_norm(phi: &LinearMapRep, k: usize, opts: &SeesawOptions) -> Result<NormEstimate> {
    opts.check()?;
    if k == 0 {
        return Err(Error::domain("multiplicity k must be >= 1"));
    }
    let herm = phi.hermiticity_preserving(1e-10 * (1.0 + max_abs(phi.choi())));
    if !herm.holds {
        log::warn!(
            "Hermitian-restricted norm of a map that is not Hermiticity preserving (residual {:.3e})",
            herm.residual
        );
    }
    let small = compressed(phi)?;
    let l = Lifted::new(&small, k);
    let d = l.in_dim();
    let sched = opts.schedule();
    let run = seesaw::best_of(opts.restarts, opts.seed, |rng| {
        seesaw::hermitian(&l, seesaw::random_start(d, rng), sched, None)
    })?;
    Ok(NormEstimate::from_run(run, opts.restarts))
}

/// `‖Ψ‖ = max ‖Ψ(X)‖` over `‖X‖ ≤ 1` (operator norms), searched over unitaries.
/// The witness holds the top singular pair of `Ψ(W)` at the best unitary.
pub fn induced_operator_norm(psi: &LinearMapRep, opts: &SeesawOptions) -> Result<NormEstimate> {
    opts.check()?;
    let d = psi.in_dim();
    let sched = opts.schedule();
    let run = seesaw::best_of(opts.restarts, opts.seed, |rng| {
        let w0 = linalg::random_unitary(d, rng)?;
        seesaw::operator(psi, w0, sched)
    })?;
    Ok(NormEstimate::from_run(run, opts.restarts))
}

/// Continues the bilinear see-saw from a witness without an early stop, so the
/// returned vectors sit as close to a fixed point as `max_iter` steps allow.
pub fn refine_witness(
    phi: &LinearMapRep,
    k: usize,
    witness: &Witness,
    max_iter: usize,
) -> Result<(f64, Witness)> {
    let l = Lifted::new(phi, k);
    if witness.u.len() != l.in_dim() || witness.v.len() != l.in_dim() {
        return Err(Error::domain("witness vectors have the wrong length"));
    }
    let run = seesaw::bilinear(
        &l,
        witness.u.clone(),
        witness.v.clone(),
        Schedule { max_iter, tol: -1.0 },
        None,
    )?;
    Ok((run.value, Witness { u: run.u, v: run.v }))
}

/// Objective trace of a single bilinear see-saw run from `(x, y)`.
pub fn seesaw_history(
    phi: &LinearMapRep,
    k: usize,
    x: ComplexVector,
    y: ComplexVector,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let l = Lifted::new(phi, k);
    if x.len() != l.in_dim() || y.len() != l.in_dim() {
        return Err(Error::domain("start vectors have the wrong length"));
    }
    let mut h = Vec::new();
    seesaw::bilinear(&l, x, y, Schedule { max_iter, tol: 0.0 }, Some(&mut h))?;
    Ok(h)
}

/// Objective trace of a single Hermitian see-saw run from `x`.
pub fn hermitian_seesaw_history(
    phi: &LinearMapRep,
    k: usize,
    x: ComplexVector,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let l = Lifted::new(phi, k);
    if x.len() != l.in_dim() {
        return Err(Error::domain("start vector has the wrong length"));
    }
    let mut h = Vec::new();
    seesaw::hermitian(&l, x, Schedule { max_iter, tol: 0.0 }, Some(&mut h))?;
    Ok(h)
}

/// `(‖J(Φ)‖₁, ‖J(Φ∘T_n)‖₁)`.
pub fn choi_isometry_invariants(phi: &LinearMapRep) -> Result<(f64, f64)> {
    Ok((
        trace_norm(phi.choi())?,
        trace_norm(phi.compose_transpose().choi())?,
    ))
}

/// Exact `|||Φ|||₁ = ‖Tr_out J(Φ)‖` for completely positive `Φ`.
pub fn cp_diamond_norm(phi: &LinearMapRep, tol: f64) -> Result<f64> {
    let cp = phi.completely_positive(tol);
    if !cp.holds {
        return Err(Error::domain(format!(
            "map is not completely positive (residual {:.3e})",
            cp.residual
        )));
    }
    operator_norm(&phi.choi_partial_trace(Role::Output)?)
}

// ---------------------------------------------------------------------------
// SDP certificate

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpFormulation {
    /// `J = P - Q` with `P, Q ⪰ 0`; valid for Hermiticity-preserving maps.
    HermitianSplit,
    /// Off-diagonal block program, valid for every map.
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiamondCertificate {
    pub formulation: SdpFormulation,
    /// Optimal value of the minimization, as returned by the solver.
    pub value: f64,
    /// Value of the standard-form primal at termination (a lower estimate).
    pub lower_estimate: f64,
    /// Upper bound from an exactly feasible point obtained by repairing the solver iterate.
    pub upper_bound: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// Output dimension after lossless compression.
    pub compressed_out_dim: usize,
}

/// `|||Φ|||₁` by SDP.
pub fn diamond_norm_sdp(phi: &LinearMapRep, tol: f64) -> Result<NormEstimate> {
    let cert = diamond_norm_certificate(phi, tol)?;
    Ok(NormEstimate {
        value: cert.value,
        upper_bound: Some(cert.upper_bound),
        witness: None,
        iterations: cert.iterations,
        restarts_used: 0,
    })
}

pub fn diamond_norm_certificate(phi: &LinearMapRep, tol: f64) -> Result<DiamondCertificate> {
    if !(tol > 0.0) {
        return Err(Error::domain("SDP tolerance must be positive"));
    }
    let small = compressed(phi)?;
    let scale = max_abs(small.choi());
    if scale == 0.0 {
        return Ok(DiamondCertificate {
            formulation: SdpFormulation::HermitianSplit,
            value: 0.0,
            lower_estimate: 0.0,
            upper_bound: 0.0,
            gap: 0.0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            iterations: 0,
            compressed_out_dim: small.out_dim(),
        });
    }
    // Solve for Φ / scale so the solver sees O(1) data.
    let unit = small.scale(1.0 / scale);
    let settings = SdpSettings {
        tol,
        ..SdpSettings::default()
    };
    let mut cert = if unit.is_hermiticity_preserving(1e-10) {
        hermitian_split(&unit.hermitized(), settings)?
    } else {
        general(&unit, settings)?
    };
    cert.value *= scale;
    cert.lower_estimate *= scale;
    cert.upper_bound *= scale;
    cert.compressed_out_dim = small.out_dim();
    Ok(cert)
}

fn lambda_max(h: &ComplexMatrix) -> Result<f64> {
    Ok(*hermitian_eigen(h)?.0.last().expect("nonempty"))
}

fn lambda_min(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(h)?.0[0])
}

/// Output partial trace of a Choi-shaped basis element, as entries of an `n × n` matrix.
fn trace_out_entries(entries: &sdp::HermitianEntries, n: usize) -> sdp::HermitianEntries {
    entries
        .iter()
        .filter(|(r, col, _)| r / n == col / n)
        .map(|&(r, col, z)| (r % n, col % n, z))
        .collect()
}

/// `min t` s.t. `P ⪰ 0`, `P - J ⪰ 0`, `Tr_out(2P - J) ⪯ t I`.
fn hermitian_split(phi: &LinearMapRep, settings: SdpSettings) -> Result<DiamondCertificate> {
    let (n, m) = (phi.in_dim(), phi.out_dim());
    let dn = n * m;
    let j = phi.choi();
    let tr_j = phi.choi_partial_trace(Role::Output)?;
    let basis = hermitian_basis(dn);
    let nvar = basis.len() + 1;

    let mut a: Vec<Vec<Entry>> = Vec::with_capacity(nvar);
    for bi in &basis {
        let mut row = embed_entries(0, dn, 0, bi, -1.0);
        row.extend(embed_entries(1, dn, 0, bi, -1.0));
        row.extend(embed_entries(2, n, 0, &trace_out_entries(bi, n), 2.0));
        a.push(row);
    }
    let ident: sdp::HermitianEntries = (0..n).map(|k| (k, k, c(1.0, 0.0))).collect();
    a.push(embed_entries(2, n, 0, &ident, -1.0));
    let mut b = vec![0.0; nvar];
    b[nvar - 1] = -1.0;

    let problem = SdpProblem {
        block_dims: vec![2 * dn, 2 * dn, 2 * n],
        c: vec![
            nalgebra::DMatrix::zeros(2 * dn, 2 * dn),
            -embed(j),
            embed(&tr_j),
        ],
        a,
        b,
    };
    let sol = sdp::solve(&problem, settings)?;

    // Repair: shift P until both P and P - J are PSD, then take the exact t.
    let p = sdp::hermitian_from_coordinates(dn, &sol.y[..nvar - 1]);
    let p = linalg::hermitian_part(&p);
    let delta = 0.0f64.max(-lambda_min(&p)?).max(-lambda_min(&(&p - j))?);
    let p = p + linalg::identity(dn) * cr(delta);
    let two_p_minus_j = &p * cr(2.0) - j;
    let tr = linalg::partial_trace(&two_p_minus_j, m, n, linalg::Factor::Left)?;
    let upper = lambda_max(&linalg::hermitian_part(&tr))?;

    Ok(DiamondCertificate {
        formulation: SdpFormulation::HermitianSplit,
        value: -sol.dual_objective,
        lower_estimate: -sol.primal_objective,
        upper_bound: upper,
        gap: sol.gap,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        iterations: sol.iterations,
        compressed_out_dim: m,
    })
}

/// `min ½(t₀ + t₁)` s.t. `[[Y₀, -J], [-J*, Y₁]] ⪰ 0`, `Tr_out Y_i ⪯ t_i I`.
fn general(phi: &LinearMapRep, settings: SdpSettings) -> Result<DiamondCertificate> {
    let (n, m) = (phi.in_dim(), phi.out_dim());
    let dn = n * m;
    let j = phi.choi();
    let basis = hermitian_basis(dn);
    let nb = basis.len();
    let nvar = 2 * nb + 2;

    let mut a: Vec<Vec<Entry>> = Vec::with_capacity(nvar);
    for (side, block) in [(0usize, 1usize), (1, 2)] {
        for bi in &basis {
            let mut row = embed_entries(0, 2 * dn, side * dn, bi, -1.0);
            row.extend(embed_entries(block, n, 0, &trace_out_entries(bi, n), 1.0));
            a.push(row);
        }
    }
    let ident: sdp::HermitianEntries = (0..n).map(|k| (k, k, c(1.0, 0.0))).collect();
    a.push(embed_entries(1, n, 0, &ident, -1.0));
    a.push(embed_entries(2, n, 0, &ident, -1.0));
    let mut b = vec![0.0; nvar];
    b[nvar - 2] = -0.5;
    b[nvar - 1] = -0.5;

    let mut off = ComplexMatrix::zeros(2 * dn, 2 * dn);
    off.view_mut((0, dn), (dn, dn)).copy_from(&(-j));
    off.view_mut((dn, 0), (dn, dn)).copy_from(&(-j.adjoint()));

    let problem = SdpProblem {
        block_dims: vec![4 * dn, 2 * n, 2 * n],
        c: vec![
            embed(&off),
            nalgebra::DMatrix::zeros(2 * n, 2 * n),
            nalgebra::DMatrix::zeros(2 * n, 2 * n),
        ],
        a,
        b,
    };
    let sol = sdp::solve(&problem, settings)?;

    let y0 = linalg::hermitian_part(&sdp::hermitian_from_coordinates(dn, &sol.y[..nb]));
    let y1 = linalg::hermitian_part(&sdp::hermitian_from_coordinates(dn, &sol.y[nb..2 * nb]));
    let mut big = ComplexMatrix::zeros(2 * dn, 2 * dn);
    big.view_mut((0, 0), (dn, dn)).copy_from(&y0);
    big.view_mut((dn, dn), (dn, dn)).copy_from(&y1);
    big += &off;
    let delta = 0.0f64.max(-lambda_min(&linalg::hermitian_part(&big))?);
    let shift = linalg::identity(dn) * cr(delta);
    let t0 = lambda_max(&linalg::partial_trace(&(y0 + &shift), m, n, linalg::Factor::Left)?)?;
    let t1 = lambda_max(&linalg::partial_trace(&(y1 + &shift), m, n, linalg::Factor::Left)?)?;

    Ok(DiamondCertificate {
        formulation: SdpFormulation::General,
        value: -sol.dual_objective,
        lower_estimate: -sol.primal_objective,
        upper_bound: 0.5 * (t0 + t1),
        gap: sol.gap,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        iterations: sol.iterations,
        compressed_out_dim: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{depolarizing_map, identity_map, random_channel, random_hermitian_map, random_map, transpose_map, wh_channels};
    use crate::linalg::{random_unit_vector, rng_from_seed};

    fn quick(seed: u64) -> SeesawOptions {
        SeesawOptions::with_seed(seed).restarts(10)
    }

    #[test]
    fn induced_norm_examples() {
        for n in 1..4 {
            let v = induced_trace_norm(&identity_map(n), &quick(0)).unwrap().value;
            assert!((v - 1.0).abs() < 1e-9);
            let t = induced_trace_norm(&transpose_map(n), &quick(0)).unwrap().value;
            assert!((t - 1.0).abs() < 1e-9);
        }
        assert!(induced_trace_norm(&identity_map(2), &quick(0).restarts(0)).is_err());
    }

    #[test]
    fn witness_reproduces_value() {
        let mut rng = rng_from_seed(21);
        let phi = random_map(2, 3, &mut rng);
        let est = multiplicity_norm(&phi, 2, &quick(1), 1e-6).unwrap().estimate;
        let w = est.witness.as_ref().unwrap();
        assert!((w.u.norm() - 1.0).abs() < 1e-12);
        let again = evaluate_witness(&phi, 2, &w.u, &w.v).unwrap();
        assert!((again - est.value).abs() < 1e-9);
    }

    #[test]
    fn transpose_multiplicity() {
        for n in 2..4 {
            for k in 1..=n {
                let r = multiplicity_norm(&transpose_map(n), k, &quick(3), 1e-5).unwrap();
                assert!((r.estimate.value - k as f64).abs() < 1e-6, "n={n} k={k}: {}", r.estimate.value);
                assert!(r.saturated);
            }
        }
        let capped = multiplicity_norm(&transpose_map(2), 3, &quick(3), 1e-5).unwrap();
        assert!((capped.estimate.value - 2.0).abs() < 1e-6);
        assert!(!capped.saturated);
        let id = multiplicity_norm(&identity_map(3), 3, &quick(3), 1e-5).unwrap();
        assert!((id.estimate.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn seesaw_is_monotone() {
        let mut rng = rng_from_seed(22);
        let phi = random_map(3, 3, &mut rng);
        for k in 1..3 {
            let x = random_unit_vector(3 * k, &mut rng);
            let y = random_unit_vector(3 * k, &mut rng);
            let h = seesaw_history(&phi, k, x.clone(), y, 60).unwrap();
            assert!(h.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            let hh = hermitian_seesaw_history(&phi.hermitized(), k, x, 60).unwrap();
            assert!(hh.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
    }

    #[test]
    fn sdp_examples() {
        for n in 2..4 {
            let id = diamond_norm_sdp(&identity_map(n), 1e-8).unwrap();
            assert!((id.value - 1.0).abs() < 1e-6, "{}", id.value);
            let t = diamond_norm_sdp(&transpose_map(n).scale(1.0 / n as f64), 1e-8).unwrap();
            assert!((t.value - 1.0).abs() < 1e-6, "{}", t.value);
            assert!(t.upper_bound.unwrap() >= t.value - 1e-6);
        }
    }

    #[test]
    fn sdp_matches_seesaw_on_hermitian_map() {
        let mut rng = rng_from_seed(23);
        let phi = random_hermitian_map(3, 3, &mut rng);
        let cert = diamond_norm_certificate(&phi, 1e-8).unwrap();
        assert_eq!(cert.formulation, SdpFormulation::HermitianSplit);
        let ss = diamond_norm_seesaw(&phi, &SeesawOptions::with_seed(4).restarts(20)).unwrap();
        assert!((cert.value - ss.value).abs() < 1e-4, "{} vs {}", cert.value, ss.value);
        assert!(cert.upper_bound >= ss.value - 1e-9);
    }

    #[test]
    fn general_sdp_matches_seesaw() {
        let mut rng = rng_from_seed(24);
        let phi = random_map(2, 2, &mut rng);
        let cert = diamond_norm_certificate(&phi, 1e-8).unwrap();
        assert_eq!(cert.formulation, SdpFormulation::General);
        let ss = diamond_norm_seesaw(&phi, &SeesawOptions::with_seed(5).restarts(30)).unwrap();
        assert!((cert.value - ss.value).abs() < 1e-4, "{} vs {}", cert.value, ss.value);
        assert!(cert.upper_bound >= ss.value - 1e-9);
    }

    #[test]
    fn cp_shortcut_and_channels() {
        let mut rng = rng_from_seed(25);
        let ch = random_channel(2, 3, 2, &mut rng).unwrap();
        assert!((cp_diamond_norm(&ch, 1e-10).unwrap() - 1.0).abs() < 1e-12);
        let scaled = ch.scale(0.7);
        let ss = diamond_norm_seesaw(&scaled, &quick(6)).unwrap();
        assert!((ss.value - 0.7).abs() < 1e-6);
        let (w0, _, _) = wh_channels(3).unwrap();
        assert!((diamond_norm_seesaw(&w0, &quick(7)).unwrap().value - 1.0).abs() < 1e-6);
        assert!(cp_diamond_norm(&transpose_map(2), 1e-10).is_err());
        assert!((diamond_norm_sdp(&depolarizing_map(2), 1e-8).unwrap().value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hermitian_norm_examples() {
        for n in 2..4 {
            let t = transpose_map(n).scale(1.0 / n as f64);
            let v = hermitian_induced_norm(&t, &quick(8)).unwrap().value;
            assert!((v - 1.0 / n as f64).abs() < 1e-9);
            assert!((hermitian_induced_norm(&identity_map(n), &quick(8)).unwrap().value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn choi_invariants() {
        for n in 2..5 {
            let (a, b) = choi_isometry_invariants(&identity_map(n)).unwrap();
            assert!((a - n as f64).abs() < 1e-10 && (b - (n * n) as f64).abs() < 1e-10);
            let (a, b) = choi_isometry_invariants(&transpose_map(n)).unwrap();
            assert!((a - (n * n) as f64).abs() < 1e-10 && (b - n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn estimate_json_shape() {
        let est = induced_trace_norm(&identity_map(2), &quick(0)).unwrap();
        let v = serde_json::to_value(&est).unwrap();
        assert!(v["value"].is_number());
        assert!(v["upper_bound"].is_null());
        assert_eq!(v["witness"]["u"]["cols"], 1);
        assert_eq!(v["restarts_used"], 10);
    }
}
