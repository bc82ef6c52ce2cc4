//! Single-shot discrimination between two channels.
//!
//! A game `(λ, Γ₀, Γ₁)` is won with probability `½ + ½‖(Δ ⊗ id_k)(ρ)‖₁` for
//! input `ρ`, where `Δ = λΓ₀ - (1-λ)Γ₁`. With entanglement the optimum is
//! `½ + ½|||Δ|||₁`; without it, `ρ ↦ ‖Δ(ρ)‖₁` is convex, so the optimum over
//! density matrices is attained at a pure state `xx*` and a see-saw over unit
//! vectors suffices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{map_to_json, wh_channels, LinearMapRep, MapJson};
use crate::error::{Error, Result};
use crate::isometry::{certify_complete_isometry, herm_signed_decompose, output_range_projector};
use crate::linalg::{
    self, cr, hahn_decompose, hermiticity_residual, kron, max_abs_diff, max_entangled_vector,
    min_eigenvalue, operator_norm, random_gaussian, rng_from_seed, schmidt_coefficients, trace,
    trace_norm, ComplexMatrix, ComplexVector,
};
use crate::norms::{
    cp_diamond_norm, diamond_norm_sdp, evaluate_witness, hermitian_induced_norm,
    hermitian_multiplicity_norm, induced_trace_norm, lifted_image, SeesawOptions,
};
use crate::report::CertificationReport;

/// Tolerance for the channel predicates of game inputs and for density matrices.
pub const VALIDATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GameTriple {
    pub lambda: f64,
    pub gamma0: LinearMapRep,
    pub gamma1: LinearMapRep,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameJson {
    lambda: f64,
    gamma0: MapJson,
    gamma1: MapJson,
}

impl GameTriple {
    /// Validates that both maps are channels with matching dimensions.
    pub fn new(lambda: f64, gamma0: LinearMapRep, gamma1: LinearMapRep) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::domain(format!("lambda must lie in [0, 1], got {lambda}")));
        }
        if (gamma0.in_dim(), gamma0.out_dim()) != (gamma1.in_dim(), gamma1.out_dim()) {
            return Err(Error::domain("game channels have different dimensions"));
        }
        for (name, g) in [("gamma0", &gamma0), ("gamma1", &gamma1)] {
            let tol = VALIDATION_TOL * (1.0 + linalg::max_abs(g.choi()));
            let (cp, tp) = (g.completely_positive(tol), g.trace_preserving(tol));
            log::debug!("{name}: CP residual {:.3e}, TP residual {:.3e}", cp.residual, tp.residual);
            if !cp.holds || !tp.holds {
                return Err(Error::domain(format!(
                    "{name} is not a channel (CP residual {:.3e}, TP residual {:.3e})",
                    cp.residual, tp.residual
                )));
            }
        }
        Ok(Self { lambda, gamma0, gamma1 })
    }

    pub fn in_dim(&self) -> usize {
        self.gamma0.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.gamma0.out_dim()
    }

    /// `λΓ₀ - (1-λ)Γ₁`.
    pub fn delta(&self) -> LinearMapRep {
        self.gamma0
            .scale(self.lambda)
            .subtract(&self.gamma1.scale(1.0 - self.lambda))
            .expect("validated dimensions")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(GameJson {
            lambda: self.lambda,
            gamma0: MapJson::from(&self.gamma0),
            gamma1: MapJson::from(&self.gamma1),
        })
        .expect("game serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: GameJson = serde_json::from_value(v.clone())?;
        Self::new(
            j.lambda,
            LinearMapRep::try_from(&j.gamma0)?,
            LinearMapRep::try_from(&j.gamma1)?,
        )
    }
}

/// The Werner-Holevo game `(λ_n, Φ⁽⁰⁾, Φ⁽¹⁾)`.
pub fn wh_game(n: usize) -> Result<GameTriple> {
    let (phi0, phi1, lambda) = wh_channels(n)?;
    GameTriple::new(lambda, phi0, phi1)
}

/// Parses `wh:n`.
pub fn named_game(spec: &str) -> Result<GameTriple> {
    match spec.split_once(':') {
        Some(("wh", dim)) => {
            let n = dim
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("bad dimension in {spec:?}")))?;
            wh_game(n)
        }
        _ => Err(Error::domain(format!("unknown game constructor {spec:?}"))),
    }
}

fn density_residual(rho: &ComplexMatrix) -> Result<f64> {
    let herm = hermiticity_residual(rho);
    let neg = (-min_eigenvalue(&linalg::hermitian_part(rho))?).max(0.0);
    let tr = (trace(rho) - cr(1.0)).norm();
    Ok(herm.max(neg).max(tr))
}

/// `½ + ½‖λ(Γ₀ ⊗ id_k)(ρ) - (1-λ)(Γ₁ ⊗ id_k)(ρ)‖₁` for a density matrix `ρ` on `C^n ⊗ C^k`.
pub fn success_given_strategy(g: &GameTriple, rho: &ComplexMatrix, k: usize) -> Result<f64> {
    let d = g.in_dim() * k;
    if k == 0 || rho.shape() != (d, d) {
        return Err(Error::domain(format!("strategy must be a {d}x{d} density matrix")));
    }
    let resid = density_residual(rho)?;
    if resid > VALIDATION_TOL {
        return Err(Error::domain(format!("strategy is not a density matrix (residual {resid:.3e})")));
    }
    let out = g.delta().tensor_with_identity(k)?.apply(rho)?;
    Ok(0.5 + 0.5 * trace_norm(&out)?)
}

/// `½ + ½|||Δ|||₁` from the SDP.
pub fn optimal_entangled(g: &GameTriple, sdp_tol: f64) -> Result<f64> {
    Ok(0.5 + 0.5 * diamond_norm_sdp(&g.delta(), sdp_tol)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnentangledValue {
    /// `½ + ½ max ‖Δ(xx*)‖₁` over unit `x` (see-saw).
    pub value: f64,
    /// `‖Δ‖_{1,H}` from the Hermitian see-saw; equals `2 value - 1` by convexity.
    pub hermitian_norm: f64,
    /// The best pure state's value recomputed through [`success_given_strategy`].
    pub strategy_check: f64,
    /// `‖Δ‖₁` over all inputs, an upper bound on the Hermitian norm.
    pub induced_norm: f64,
}

pub fn optimal_unentangled(g: &GameTriple, opts: &SeesawOptions) -> Result<UnentangledValue> {
    let delta = g.delta();
    let herm = hermitian_induced_norm(&delta, opts)?;
    let x = herm.witness.as_ref().expect("see-saw returns a witness").u.clone();
    let strategy_check = success_given_strategy(g, &(&x * x.adjoint()), 1)?;
    Ok(UnentangledValue {
        value: 0.5 + 0.5 * herm.value,
        hermitian_norm: herm.value,
        strategy_check,
        induced_norm: induced_trace_norm(&delta, opts)?.value,
    })
}

/// `1 = |||Δ|||₁ = n‖Δ‖₁`, plus the Choi certificate that `nΔ∘T_n` is a
/// complete trace-norm isometry.
pub fn check_max_gap(g: &GameTriple, opts: &SeesawOptions, tol: f64, sdp_tol: f64) -> Result<CertificationReport> {
    let delta = g.delta();
    let n = g.in_dim() as f64;
    let mut report = CertificationReport::new();
    report.witness("tol", tol);
    report.witness("sdp_tol", sdp_tol);
    report.witness("seed", opts.seed);
    report.witness("restarts", opts.restarts);
    let diamond = diamond_norm_sdp(&delta, sdp_tol)?;
    let induced = induced_trace_norm(&delta, opts)?.value;
    report.witness("diamond_norm", diamond.value);
    report.witness("diamond_upper_bound", diamond.upper_bound);
    report.witness("induced_norm", induced);
    report.check("diamond_is_one", (diamond.value - 1.0).abs(), tol);
    report.check("induced_gap", (n * induced - 1.0).abs(), tol);
    let psi = delta.scale(n).compose_transpose();
    report.merge("choi", &certify_complete_isometry(&psi, tol));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameAnalysis {
    pub entangled_value: f64,
    pub unentangled_value: f64,
    pub unentangled: UnentangledValue,
    #[serde(serialize_with = "ser_map")]
    pub delta: LinearMapRep,
    pub gap_certificate: CertificationReport,
}

fn ser_map<S: serde::Serializer>(m: &LinearMapRep, s: S) -> std::result::Result<S::Ok, S::Error> {
    map_to_json(m).serialize(s)
}

fn ser_opt_map<S: serde::Serializer>(m: &Option<LinearMapRep>, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.as_ref().map(map_to_json).serialize(s)
}

pub fn analyze_game(g: &GameTriple, opts: &SeesawOptions, tol: f64, sdp_tol: f64) -> Result<GameAnalysis> {
    let unentangled = optimal_unentangled(g, opts)?;
    Ok(GameAnalysis {
        entangled_value: optimal_entangled(g, sdp_tol)?,
        unentangled_value: unentangled.value,
        unentangled,
        delta: g.delta(),
        gap_certificate: check_max_gap(g, opts, tol, sdp_tol)?,
    })
}

fn is_reversible_channel(psi: &LinearMapRep, tol: f64) -> CertificationReport {
    let mut r = certify_complete_isometry(psi, tol);
    let cp = psi.completely_positive(tol);
    let tp = psi.trace_preserving(tol);
    r.check("completely_positive", cp.residual, tol);
    r.check("trace_preserving", tp.residual, tol);
    r
}

fn wh_mixture(
    r: f64,
    psi0: Option<&LinearMapRep>,
    psi1: Option<&LinearMapRep>,
    n: usize,
    m: usize,
) -> Result<(LinearMapRep, LinearMapRep)> {
    let (phi0, phi1, ln) = wh_channels(n)?;
    let zero = LinearMapRep::from_choi(n, m, ComplexMatrix::zeros(n * m, n * m))?;
    let (mut a, mut b) = (zero.clone(), zero);
    if let Some(p0) = psi0 {
        a = a.add(&p0.compose(&phi0)?.scale(r * ln))?;
        b = b.add(&p0.compose(&phi1)?.scale(r * (1.0 - ln)))?;
    }
    if let Some(p1) = psi1 {
        a = a.add(&p1.compose(&phi1)?.scale((1.0 - r) * (1.0 - ln)))?;
        b = b.add(&p1.compose(&phi0)?.scale((1.0 - r) * ln))?;
    }
    Ok((a, b))
}

/// Builds `λ = rλ_n + (1-r)(1-λ_n)` and
/// `λΓ₀ = rλ_nΨ₀Φ⁽⁰⁾ + (1-r)(1-λ_n)Ψ₁Φ⁽¹⁾`,
/// `(1-λ)Γ₁ = r(1-λ_n)Ψ₀Φ⁽¹⁾ + (1-r)λ_nΨ₁Φ⁽⁰⁾`.
///
/// `psi0` is needed when `r > 0`, `psi1` when `r < 1`; both must be reversible
/// channels, with orthogonal ranges when both are used.
pub fn construct_game(
    r: f64,
    psi0: Option<&LinearMapRep>,
    psi1: Option<&LinearMapRep>,
    n: usize,
    tol: f64,
) -> Result<GameTriple> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::domain(format!("r must lie in [0, 1], got {r}")));
    }
    let psi0 = if r > 0.0 {
        Some(psi0.ok_or_else(|| Error::domain("psi0 is required when r > 0"))?)
    } else {
        None
    };
    let psi1 = if r < 1.0 {
        Some(psi1.ok_or_else(|| Error::domain("psi1 is required when r < 1"))?)
    } else {
        None
    };
    let mut m = None;
    for p in psi0.iter().chain(psi1.iter()) {
        if p.in_dim() != n || m.is_some_and(|m| m != p.out_dim()) {
            return Err(Error::domain("reversible channels must share dimensions M_n -> M_m"));
        }
        m = Some(p.out_dim());
        let rep = is_reversible_channel(p, tol);
        if !rep.verdict {
            return Err(Error::Refusal {
                reason: "embedding is not a reversible channel".into(),
                report: Box::new(rep),
            });
        }
    }
    let m = m.expect("at least one channel is used");
    if let (Some(a), Some(b)) = (psi0, psi1) {
        let overlap = operator_norm(&(output_range_projector(a)? * output_range_projector(b)?))?;
        if overlap > tol {
            return Err(Error::domain(format!(
                "reversible channels must have orthogonal ranges (overlap {overlap:.3e})"
            )));
        }
    }
    let ln = wh_channels(n)?.2;
    let lambda = r * ln + (1.0 - r) * (1.0 - ln);
    let (a, b) = wh_mixture(r, psi0, psi1, n, m)?;
    GameTriple::new(lambda, a.scale(1.0 / lambda), b.scale(1.0 / (1.0 - lambda)))
}

/// Two reversible channels `M_n → M_m` with orthogonal ranges, environments of
/// dimension `r0`, `r1` (needs `m ≥ n(r0 + r1)`).
pub fn orthogonal_reversible_pair<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    r0: usize,
    r1: usize,
    rng: &mut R,
) -> Result<(LinearMapRep, LinearMapRep)> {
    let (d0, d1) = (n * r0, n * r1);
    if m < d0 + d1 || r0 == 0 || r1 == 0 {
        return Err(Error::domain(format!("need m >= n(r0 + r1), got m={m}")));
    }
    let w = linalg::random_isometry(m, d0 + d1, rng)?;
    let u0 = w.columns(0, d0).into_owned();
    let u1 = w.columns(d0, d1).into_owned();
    let s0 = linalg::random_density(r0, rng)?;
    let s1 = linalg::random_density(r1, rng)?;
    Ok((
        crate::channel::structure_map(n, &u0, &s0, &u0)?,
        crate::channel::structure_map(n, &u1, &s1, &u1)?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WHDecomposition {
    pub r_weight: f64,
    #[serde(serialize_with = "ser_opt_map")]
    pub psi0: Option<LinearMapRep>,
    #[serde(serialize_with = "ser_opt_map")]
    pub psi1: Option<LinearMapRep>,
    /// `rλ_n + (1-r)(1-λ_n)`.
    pub lambda_check: f64,
    pub lambda_residual: f64,
    pub residual_gamma0: f64,
    pub residual_gamma1: f64,
    /// Only one reversible channel is present (`r ∈ {0, 1}`).
    pub single_channel: bool,
    /// `‖Π₀Π₁‖` for the output-range projectors.
    pub ranges_orthogonal: f64,
    pub report: CertificationReport,
}

/// Writes a max-gap game in terms of the Werner-Holevo game.
///
/// `Ψ = nΔ∘T_n` is a Hermiticity-preserving complete isometry, which splits as
/// `rΨ₀ - (1-r)Ψ₁`. Since `|||Δ|||₁ = ‖(Δ ⊗ id_n)(τ_n)‖₁` and `τ_n` has full
/// Schmidt rank, the CP decomposition of `Δ` is unique, so the recovered
/// channels reproduce `λΓ₀` and `(1-λ)Γ₁`.
pub fn decompose_wh_equivalent(
    g: &GameTriple,
    opts: &SeesawOptions,
    tol: f64,
    sdp_tol: f64,
) -> Result<WHDecomposition> {
    let gap = check_max_gap(g, opts, tol, sdp_tol)?;
    if !gap.verdict {
        return Err(Error::Refusal {
            reason: "game does not have the maximal norm gap".into(),
            report: Box::new(gap),
        });
    }
    let (n, m) = (g.in_dim(), g.out_dim());
    let delta = g.delta();
    let psi = delta.scale(n as f64).compose_transpose();
    let mut report = CertificationReport::new();
    report.merge("gap", &gap);
    report.check("psi_hermiticity_preserving", hermiticity_residual(psi.choi()), tol);

    let tau = max_entangled_vector(n);
    let tau_value = evaluate_witness(&delta, n, &tau, &tau)?;
    report.witness("canonical_value", tau_value);
    report.check("canonical_maximizer", (tau_value - 1.0).abs(), tol);

    let signed = herm_signed_decompose(&psi, tol)?;
    let r = signed.r_weight;
    let ln = wh_channels(n)?.2;
    let lambda_check = r * ln + (1.0 - r) * (1.0 - ln);
    let (a, b) = wh_mixture(r, signed.psi0.as_ref(), signed.psi1.as_ref(), n, m)?;
    let residual_gamma0 = g.gamma0.scale(g.lambda).distance(&a)?;
    let residual_gamma1 = g.gamma1.scale(1.0 - g.lambda).distance(&b)?;
    let lambda_residual = (lambda_check - g.lambda).abs();
    report.check("lambda", lambda_residual, tol);
    report.check("gamma0", residual_gamma0, tol);
    report.check("gamma1", residual_gamma1, tol);
    report.check("ranges_orthogonal", signed.ranges_orthogonal, tol);
    if !report.verdict {
        let worst = report
            .failed_checks()
            .map(|c| c.residual)
            .fold(0.0, f64::max);
        return Err(Error::Inconsistency {
            what: "Werner-Holevo decomposition".into(),
            residual: worst,
            tol,
        });
    }
    if r <= tol || r >= 1.0 - tol {
        report.witness("lambda_endpoint", if r >= 1.0 - tol { "lambda_n" } else { "1 - lambda_n" });
    }
    Ok(WHDecomposition {
        r_weight: r,
        single_channel: signed.psi0.is_none() || signed.psi1.is_none(),
        psi0: signed.psi0,
        psi1: signed.psi1,
        lambda_check,
        lambda_residual,
        residual_gamma0,
        residual_gamma1,
        ranges_orthogonal: signed.ranges_orthogonal,
        report,
    })
}

/// Compares `‖(Δ ⊗ id_k)(X)‖₁` with the Werner-Holevo value on random `X`
/// (Gaussian, normalized to `‖X‖₁ = 1`).
pub fn equal_probability_check(
    g: &GameTriple,
    k: usize,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<CertificationReport> {
    if k == 0 {
        return Err(Error::domain("k must be >= 1"));
    }
    let n = g.in_dim();
    let (p0, p1, ln) = wh_channels(n)?;
    let lhs_map = g.delta().tensor_with_identity(k)?;
    let rhs_map = p0
        .scale(ln)
        .subtract(&p1.scale(1.0 - ln))?
        .tensor_with_identity(k)?;
    let mut rng = rng_from_seed(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = random_gaussian(n * k, n * k, &mut rng);
        let x = &x / cr(trace_norm(&x)?);
        let lhs = trace_norm(&lhs_map.apply(&x)?)?;
        let rhs = trace_norm(&rhs_map.apply(&x)?)?;
        worst = worst.max((lhs - rhs).abs());
    }
    let mut report = CertificationReport::new();
    report.witness("k", k);
    report.witness("samples", samples);
    report.witness("seed", seed);
    report.witness("tol", tol);
    report.check("max_deviation", worst, tol);
    Ok(report)
}

/// Inverts `G = (Γ ⊗ id_n)(uu*)` for a full-Schmidt-rank `u`:
/// `G = (I ⊗ Mᵗ) J(Γ) (I ⊗ M̄)` with `M` the matricization of `u`.
fn choi_from_lifted(g: &ComplexMatrix, u: &ComplexVector, n: usize, m: usize) -> Result<LinearMapRep> {
    let mt = linalg::matricize(u, n, n).transpose();
    let inv = mt
        .try_inverse()
        .ok_or_else(|| Error::domain("maximizer does not have full Schmidt rank"))?;
    let id = linalg::identity(m);
    let left = kron(&id, &inv);
    let right = kron(&id, &inv.transpose().map(|z| z.conj()));
    LinearMapRep::from_choi(n, m, left * g * right)
}

/// Checks that `Φ = Ψ₀ - Ψ₁` with `|||Φ|||₁ = |||Ψ₀|||₁ + |||Ψ₁|||₁` is the
/// unique such CP decomposition, via the Hahn decomposition of
/// `(Φ ⊗ id_n)(uu*)` at a maximizer `u`.
pub fn cp_difference_uniqueness(
    phi: &LinearMapRep,
    psi0: &LinearMapRep,
    psi1: &LinearMapRep,
    opts: &SeesawOptions,
    tol: f64,
    sdp_tol: f64,
) -> Result<CertificationReport> {
    let (n, m) = (phi.in_dim(), phi.out_dim());
    for p in [psi0, psi1] {
        if (p.in_dim(), p.out_dim()) != (n, m) {
            return Err(Error::domain("maps must share dimensions"));
        }
    }
    let mut pre = CertificationReport::new();
    pre.check("hermiticity_preserving", hermiticity_residual(phi.choi()), tol);
    pre.check("psi0_completely_positive", psi0.completely_positive(tol).residual, tol);
    pre.check("psi1_completely_positive", psi1.completely_positive(tol).residual, tol);
    pre.check("difference", phi.distance(&psi0.subtract(psi1)?)?, tol);
    if !pre.verdict {
        return Err(Error::Refusal {
            reason: "decomposition hypotheses fail".into(),
            report: Box::new(pre),
        });
    }
    let d_phi = diamond_norm_sdp(phi, sdp_tol)?.value;
    let d0 = cp_diamond_norm(psi0, tol)?;
    let d1 = cp_diamond_norm(psi1, tol)?;
    pre.witness("diamond_phi", d_phi);
    pre.witness("diamond_psi0", d0);
    pre.witness("diamond_psi1", d1);
    if !pre.check("norm_additivity", (d_phi - d0 - d1).abs(), tol) {
        return Err(Error::Refusal {
            reason: "norm additivity fails".into(),
            report: Box::new(pre),
        });
    }
    let mut report = pre;
    report.witness("tol", tol);
    report.witness("sdp_tol", sdp_tol);
    report.witness("seed", opts.seed);

    // The canonical maximally entangled vector first, then a see-saw maximizer.
    let tau = max_entangled_vector(n);
    let (u, source) = if (evaluate_witness(phi, n, &tau, &tau)? - d_phi).abs() <= tol {
        (tau, "canonical")
    } else {
        let est = hermitian_multiplicity_norm(phi, n, opts)?;
        (est.witness.expect("see-saw returns a witness").u, "seesaw")
    };
    report.witness("maximizer", source);
    let img = lifted_image(phi, n, &u, &u);
    let img0 = lifted_image(psi0, n, &u, &u);
    let img1 = lifted_image(psi1, n, &u, &u);
    report.check("maximizer_attains", (trace_norm(&img)? - d_phi).abs(), tol);
    report.check("psi0_attains", (trace_norm(&img0)? - d0).abs(), tol);
    report.check("psi1_attains", (trace_norm(&img1)? - d1).abs(), tol);

    let hahn = hahn_decompose(&linalg::hermitian_part(&img), tol)?;
    report.check("hahn_positive", max_abs_diff(&hahn.positive_part, &img0), tol);
    report.check("hahn_negative", max_abs_diff(&hahn.negative_part, &img1), tol);

    let schmidt = schmidt_coefficients(&u, n, n)?;
    let full_rank = schmidt.last().copied().unwrap_or(0.0) > linalg::RANK_CUTOFF * schmidt[0];
    report.witness("full_schmidt_rank", full_rank);
    report.witness("min_schmidt_coefficient", schmidt.last().copied());
    if full_rank {
        let r0 = choi_from_lifted(&hahn.positive_part, &u, n, m)?;
        let r1 = choi_from_lifted(&hahn.negative_part, &u, n, m)?;
        report.check("uniqueness.psi0", r0.distance(psi0)?, tol);
        report.check("uniqueness.psi1", r1.distance(psi1)?, tol);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermitianInflation {
    pub k: usize,
    /// See-saw lower bound on `‖Φ‖_{1,H}`.
    pub base: f64,
    /// See-saw lower bound on `‖Φ ⊗ id_k‖_{1,H}`.
    pub lifted: f64,
    pub ratio: f64,
    /// `ratio > k + 1e-4`.
    pub candidate_counterexample: bool,
}

/// Probes whether `‖Φ ⊗ id_k‖_{1,H} ≤ k‖Φ‖_{1,H}`. Both sides are lower
/// bounds, so the ratio is only indicative.
pub fn explore_hermitian_inflation(phi: &LinearMapRep, k: usize, opts: &SeesawOptions) -> Result<HermitianInflation> {
    let base = hermitian_induced_norm(phi, opts)?.value;
    let lifted = hermitian_multiplicity_norm(phi, k, opts)?.value;
    let ratio = if base > 0.0 { lifted / base } else { 0.0 };
    let candidate_counterexample = ratio > k as f64 + 1e-4;
    if candidate_counterexample {
        log::warn!("Hermitian inflation ratio {ratio} exceeds k = {k}");
    }
    Ok(HermitianInflation {
        k,
        base,
        lifted,
        ratio,
        candidate_counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{conjugation_map, depolarizing_map, identity_map, random_channel, transpose_map};
    use crate::linalg::{elementary, random_unitary};

    fn opts() -> SeesawOptions {
        SeesawOptions::with_seed(7).restarts(8)
    }

    #[test]
    fn wh_triple() {
        assert!((wh_game(2).unwrap().lambda - 0.75).abs() < 1e-15);
        assert!((named_game("wh:3").unwrap().lambda - 2.0 / 3.0).abs() < 1e-15);
        assert!(wh_game(1).is_err());
        for n in 2..=4 {
            let d = wh_game(n).unwrap().delta();
            let t = transpose_map(n).scale(1.0 / n as f64);
            assert!(max_abs_diff(d.choi(), t.choi()) < 1e-13);
        }
    }

    #[test]
    fn game_json_round_trip() {
        let g = wh_game(2).unwrap();
        let back = GameTriple::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        let bad = serde_json::json!({"lambda": 0.5, "gamma0": map_to_json(&transpose_map(2)), "gamma1": map_to_json(&identity_map(2))});
        assert!(GameTriple::from_json(&bad).is_err());
    }

    #[test]
    fn strategy_values() {
        let g = wh_game(2).unwrap();
        let tau = linalg::max_entangled_state(2);
        assert!((success_given_strategy(&g, &tau, 2).unwrap() - 1.0).abs() < 1e-12);
        let e11 = elementary(2, 2, 0, 0);
        let direct = 0.5
            + 0.5
                * trace_norm(
                    &(g.gamma0.apply(&e11).unwrap() * cr(0.75) - g.gamma1.apply(&e11).unwrap() * cr(0.25)),
                )
                .unwrap();
        assert!((success_given_strategy(&g, &e11, 1).unwrap() - direct).abs() < 1e-14);
        assert!(success_given_strategy(&g, &(e11 * cr(2.0)), 1).is_err());

        let same = GameTriple::new(0.5, depolarizing_map(2), depolarizing_map(2)).unwrap();
        assert!((success_given_strategy(&same, &tau, 2).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn wh_values_and_gap() {
        for n in 2..=3 {
            let g = wh_game(n).unwrap();
            assert!((optimal_entangled(&g, 1e-8).unwrap() - 1.0).abs() < 1e-5);
            let u = optimal_unentangled(&g, &opts()).unwrap();
            let want = 0.5 + 0.5 / n as f64;
            assert!((u.value - want).abs() < 1e-6 && (u.strategy_check - want).abs() < 1e-6);
            assert!(check_max_gap(&g, &opts(), 1e-6, 1e-8).unwrap().verdict);
        }
        let same = GameTriple::new(0.5, identity_map(2), identity_map(2)).unwrap();
        assert!((optimal_entangled(&same, 1e-8).unwrap() - 0.5).abs() < 1e-6);
        assert!(!check_max_gap(&same, &opts(), 1e-6, 1e-8).unwrap().verdict);
        let certain = GameTriple::new(1.0, depolarizing_map(2), identity_map(2)).unwrap();
        assert!((optimal_unentangled(&certain, &opts()).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_game_ordering() {
        let mut rng = rng_from_seed(4);
        let g = GameTriple::new(
            0.4,
            random_channel(2, 3, 2, &mut rng).unwrap(),
            random_channel(2, 3, 2, &mut rng).unwrap(),
        )
        .unwrap();
        let ent = optimal_entangled(&g, 1e-8).unwrap();
        let un = optimal_unentangled(&g, &opts()).unwrap().value;
        assert!(0.5 - 1e-9 <= un && un <= ent + 1e-6 && ent <= 1.0 + 1e-6);
    }

    #[test]
    fn wh_game_decomposes_trivially() {
        let g = wh_game(2).unwrap();
        let d = decompose_wh_equivalent(&g, &opts(), 1e-6, 1e-8).unwrap();
        assert!((d.r_weight - 1.0).abs() < 1e-9);
        assert!(d.single_channel && d.psi1.is_none());
        assert!(d.residual_gamma0 < 1e-9 && d.residual_gamma1 < 1e-9);
        assert!(max_abs_diff(d.psi0.unwrap().choi(), identity_map(2).choi()) < 1e-9);
    }

    #[test]
    fn construct_single_channel_branches() {
        let mut rng = rng_from_seed(2);
        let w = random_unitary(2, &mut rng).unwrap();
        let psi = conjugation_map(&w).unwrap();
        let g = construct_game(1.0, Some(&psi), None, 2, 1e-9).unwrap();
        let (p0, p1, ln) = wh_channels(2).unwrap();
        assert!((g.lambda - ln).abs() < 1e-15);
        assert!(g.gamma0.distance(&psi.compose(&p0).unwrap()).unwrap() < 1e-12);
        assert!(g.gamma1.distance(&psi.compose(&p1).unwrap()).unwrap() < 1e-12);

        let g = construct_game(0.0, None, Some(&psi), 2, 1e-9).unwrap();
        assert!((g.lambda - (1.0 - ln)).abs() < 1e-15);
        assert!(g.gamma0.distance(&psi.compose(&p1).unwrap()).unwrap() < 1e-12);
        assert!(construct_game(0.5, Some(&psi), Some(&psi), 2, 1e-9).is_err());
    }

    #[test]
    fn constructed_game_round_trip() {
        let mut rng = rng_from_seed(9);
        let (p0, p1) = orthogonal_reversible_pair(2, 8, 2, 2, &mut rng).unwrap();
        let g = construct_game(0.3, Some(&p0), Some(&p1), 2, 1e-9).unwrap();
        let d = decompose_wh_equivalent(&g, &opts(), 1e-6, 1e-8).unwrap();
        assert!((d.r_weight - 0.3).abs() < 1e-8, "{}", d.r_weight);
        assert!(d.residual_gamma0 < 1e-7 && d.residual_gamma1 < 1e-7);
        assert!(d.ranges_orthogonal < 1e-10);
        let eq = equal_probability_check(&g, 2, 30, 1e-8, 1).unwrap();
        assert!(eq.verdict);

    }

    #[test]
    fn perturbed_game_breaks_equal_probability() {
        let g = wh_game(2).unwrap();
        let noisy0 = g.gamma0.scale(1.0 - 1e-3).add(&depolarizing_map(2).scale(1e-3)).unwrap();
        let p = GameTriple::new(g.lambda, noisy0, g.gamma1.clone()).unwrap();
        let rep = equal_probability_check(&p, 2, 20, 1e-8, 3).unwrap();
        assert!(!rep.verdict);
        let dev = rep.get("max_deviation").unwrap().residual;
        assert!(dev > 1e-6 && dev < 1e-2, "{dev}");
    }

    #[test]
    fn lemma_instance() {
        for n in 2..=3 {
            let (p0, p1, ln) = wh_channels(n).unwrap();
            let phi = transpose_map(n).scale(1.0 / n as f64);
            let rep = cp_difference_uniqueness(&phi, &p0.scale(ln), &p1.scale(1.0 - ln), &opts(), 1e-6, 1e-8).unwrap();
            assert!(rep.verdict, "{rep:?}");
            assert!(rep.get("uniqueness.psi0").unwrap().residual < 1e-7);
            assert_eq!(rep.witnesses["maximizer"], "canonical");
        }
        let psi = depolarizing_map(2);
        let zero = psi.scale(0.0);
        let rep = cp_difference_uniqueness(&psi, &psi, &zero, &opts(), 1e-6, 1e-8).unwrap();
        assert!(rep.verdict, "{rep:?}");
        // T/n = Φ⁽⁰⁾λ - Φ⁽¹⁾(1-λ) but with the parts doubled the norms no longer add.
        let (p0, p1, ln) = wh_channels(2).unwrap();
        let phi = p0.scale(2.0 * ln).subtract(&p1.scale(2.0 * (1.0 - ln))).unwrap();
        let extra = identity_map(2);
        let res = cp_difference_uniqueness(
            &phi.add(&extra).unwrap().subtract(&extra).unwrap(),
            &p0.scale(2.0 * ln).add(&extra).unwrap(),
            &p1.scale(2.0 * (1.0 - ln)).add(&extra).unwrap(),
            &opts(),
            1e-6,
            1e-8,
        );
        assert!(matches!(res, Err(Error::Refusal { .. })));
    }

    #[test]
    fn hermitian_inflation_probe() {
        let t = explore_hermitian_inflation(&transpose_map(3), 2, &opts()).unwrap();
        assert!((t.ratio - 2.0).abs() < 1e-6 && !t.candidate_counterexample);
        let id = explore_hermitian_inflation(&identity_map(3), 2, &opts()).unwrap();
        assert!((id.ratio - 1.0).abs() < 1e-6);
    }
}
