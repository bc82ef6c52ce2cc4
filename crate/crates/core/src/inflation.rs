//! Saturation of `‖Φ ⊗ id_k‖₁ ≤ k‖Φ‖₁` and maps with maximal cb-norm gap.
//!
//! A pair `(u, v)` with `‖(Φ ⊗ id_k)(uv*)‖₁ = k` (for `‖Φ‖₁ = 1`) must be
//! maximally entangled. Writing `u = k^{-1/2} Σ_a u_a ⊗ e_a` gives an isometry
//! `U = Σ_a u_a e_a*`, which is `√k` times the `n × k` matricization of `u`;
//! likewise `V`. The map `X ↦ Φ(U Xᵗ V*)` is then a complete trace-norm
//! isometry on `M_k`.

use serde::{Serialize, Serializer};

use crate::channel::LinearMapRep;
use crate::error::{Error, Result};
use crate::isometry::{certify_complete_isometry, extract_isometry_structure, StructureVariant};
use crate::linalg::{
    cr, is_isometry_residual, matricize, svd, trace_norm, ComplexMatrix, ComplexVector, MatrixJson,
};
use crate::norms::{
    choi_isometry_invariants, diamond_norm_sdp, evaluate_witness, induced_trace_norm,
    multiplicity_estimate, refine_witness, SeesawOptions,
};
use crate::report::CertificationReport;

/// Schmidt coefficients of a saturating witness must be within this of `1/√k`.
pub const SCHMIDT_TOL: f64 = 1e-6;

/// Extra see-saw steps spent pulling a saturating witness onto a fixed point.
const REFINE_STEPS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationWitness {
    pub k: usize,
    /// The map was divided by this before the search (its induced trace norm estimate).
    pub scale: f64,
    pub u: ComplexVector,
    pub v: ComplexVector,
    pub schmidt_u: Vec<f64>,
    pub schmidt_v: Vec<f64>,
    /// Nearest isometry to `√k · matricize(u)`.
    pub u_embed: ComplexMatrix,
    pub v_embed: ComplexMatrix,
}

impl Serialize for SaturationWitness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct W<'a> {
            k: usize,
            scale: f64,
            u: MatrixJson,
            v: MatrixJson,
            schmidt_u: &'a [f64],
            schmidt_v: &'a [f64],
            u_embed: MatrixJson,
            v_embed: MatrixJson,
        }
        W {
            k: self.k,
            scale: self.scale,
            u: MatrixJson::from(&self.u),
            v: MatrixJson::from(&self.v),
            schmidt_u: &self.schmidt_u,
            schmidt_v: &self.schmidt_v,
            u_embed: MatrixJson::from(&self.u_embed),
            v_embed: MatrixJson::from(&self.v_embed),
        }
        .serialize(s)
    }
}

/// Nearest matrix with orthonormal columns (`rows ≥ cols`).
fn nearest_isometry(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let s = svd(a)?;
    Ok(&s.left * s.right.adjoint())
}

fn schmidt_deviation(s: &[f64], k: usize) -> f64 {
    let target = 1.0 / (k as f64).sqrt();
    s.iter().map(|x| (x - target).abs()).fold(0.0, f64::max)
}

/// Evaluates `‖(Φ⊗id_k)(uv*)‖₁ ≤ Σ α_aβ_b‖Φ(u_a v_b*)‖₁ ≤ Σ α_aβ_b ≤ r ≤ k`
/// term by term, where `α, u_a` (resp. `β, v_b`) come from the Schmidt
/// decomposition of `u` (resp. `v`) and `r` is the larger Schmidt rank.
/// `phi` is assumed normalized to `‖Φ‖₁ = 1`.
fn audit_chain(
    phi: &LinearMapRep,
    k: usize,
    u: &ComplexVector,
    v: &ComplexVector,
    tol: f64,
    report: &mut CertificationReport,
) -> Result<()> {
    let n = phi.in_dim();
    let su = svd(&matricize(u, n, k))?;
    let sv = svd(&matricize(v, n, k))?;
    let l0 = evaluate_witness(phi, k, u, v)?;
    let mut l1 = 0.0;
    for (a, &alpha) in su.singular_values.iter().enumerate() {
        for (b, &beta) in sv.singular_values.iter().enumerate() {
            let x = su.left.column(a) * sv.left.column(b).adjoint();
            l1 += alpha * beta * trace_norm(&phi.apply(&x)?)?;
        }
    }
    let l2: f64 = su.singular_values.iter().sum::<f64>() * sv.singular_values.iter().sum::<f64>();
    let r = su.numerical_rank().max(sv.numerical_rank()) as f64;
    let k = k as f64;
    report.check("chain.triangle", (l0 - l1).max(0.0), tol);
    report.check("chain.unit_terms", (l1 - l2).max(0.0), tol);
    report.check("chain.cauchy_schwarz", (l2 - r).max(0.0), tol);
    report.check("chain.rank", (r - k).max(0.0), tol);
    report.witness(
        "chain",
        serde_json::json!({
            "lifted_norm": l0,
            "weighted_terms": l1,
            "weight_product": l2,
            "schmidt_rank": r,
            "k": k,
            "slack": [l1 - l0, l2 - l1, r - l2, k - r],
        }),
    );
    Ok(())
}

/// Searches for `(u, v)` with `‖(Φ̂ ⊗ id_k)(uv*)‖₁ = k`, where `Φ̂ = Φ / ‖Φ‖₁`.
///
/// A missing witness only means none was found; the report's `status` says
/// whether saturation is excluded outright (`k > min(n, m)`).
pub fn verify_saturation(
    phi: &LinearMapRep,
    k: usize,
    opts: &SeesawOptions,
    tol: f64,
) -> Result<(CertificationReport, Option<SaturationWitness>)> {
    if k == 0 {
        return Err(Error::domain("multiplicity k must be >= 1"));
    }
    let (n, m) = (phi.in_dim(), phi.out_dim());
    let mut report = CertificationReport::new();
    report.witness("k", k);
    report.witness("tol", tol);
    report.witness("seed", opts.seed);
    report.witness("restarts", opts.restarts);

    let scale = induced_trace_norm(phi, opts)?.value;
    report.witness("scale", scale);
    if scale <= 0.0 {
        report.push("nonzero_map", 0.0, tol, false);
        report.witness("status", "zero_map");
        return Ok((report, None));
    }
    let unit = phi.scale(1.0 / scale);
    let est = multiplicity_estimate(&unit, k, opts)?;
    let mut value = est.value;
    let mut w = est.witness.expect("see-saw returns a witness");
    let gap = k as f64 - value;
    let saturated = gap < tol;
    report.witness("value", value);
    report.push("saturation", gap.max(0.0), tol, saturated);

    if !saturated {
        let status = if k > n.min(m) {
            "not_saturated"
        } else {
            "not_found_saturated"
        };
        report.witness("status", status);
        audit_chain(&unit, k, &w.u, &w.v, tol, &mut report)?;
        return Ok((report, None));
    }
    report.witness("status", "saturated_for_found_maximizer");
    report.check("dimension_bound", if k <= n && k <= m { 0.0 } else { 1.0 }, 0.5);

    let mut su = crate::linalg::schmidt_coefficients(&w.u, n, k)?;
    let mut sv = crate::linalg::schmidt_coefficients(&w.v, n, k)?;
    if schmidt_deviation(&su, k).max(schmidt_deviation(&sv, k)) >= SCHMIDT_TOL {
        let (v2, w2) = refine_witness(&unit, k, &w, REFINE_STEPS)?;
        let (su2, sv2) = (
            crate::linalg::schmidt_coefficients(&w2.u, n, k)?,
            crate::linalg::schmidt_coefficients(&w2.v, n, k)?,
        );
        if v2 >= value {
            (value, w, su, sv) = (v2, w2, su2, sv2);
            report.witness("refined_value", value);
        }
    }
    report.check("schmidt_uniform.u", schmidt_deviation(&su, k), SCHMIDT_TOL);
    report.check("schmidt_uniform.v", schmidt_deviation(&sv, k), SCHMIDT_TOL);

    let sk = cr((k as f64).sqrt());
    let raw_u = matricize(&w.u, n, k) * sk;
    let raw_v = matricize(&w.v, n, k) * sk;
    report.check("embed_isometry.u", is_isometry_residual(&raw_u), SCHMIDT_TOL * 2.0 * (k as f64).sqrt());
    report.check("embed_isometry.v", is_isometry_residual(&raw_v), SCHMIDT_TOL * 2.0 * (k as f64).sqrt());
    audit_chain(&unit, k, &w.u, &w.v, tol, &mut report)?;

    let witness = SaturationWitness {
        k,
        scale,
        schmidt_u: su,
        schmidt_v: sv,
        u_embed: nearest_isometry(&raw_u)?,
        v_embed: nearest_isometry(&raw_v)?,
        u: w.u,
        v: w.v,
    };
    Ok((report, Some(witness)))
}

/// `X ↦ Φ(U Xᵗ V*)` on `M_k`, with `Φ` divided by the witness scale.
pub fn embedded_map(phi: &LinearMapRep, w: &SaturationWitness) -> Result<LinearMapRep> {
    let n = phi.in_dim();
    if w.u_embed.shape() != (n, w.k) || w.v_embed.shape() != (n, w.k) {
        return Err(Error::domain(format!(
            "witness embeddings must be {n}x{}",
            w.k
        )));
    }
    let unit = phi.scale(1.0 / w.scale);
    let vt = w.v_embed.adjoint();
    LinearMapRep::choi_from_apply(w.k, phi.out_dim(), |x| {
        unit.apply_unchecked(&(&w.u_embed * x.transpose() * &vt))
    })
}

/// Certifies the embedded map of a saturating witness as a complete
/// trace-norm isometry on `M_k`.
pub fn transpose_factorization(phi: &LinearMapRep, w: &SaturationWitness, tol: f64) -> Result<CertificationReport> {
    let n = phi.in_dim();
    if w.u.len() != n * w.k || w.v.len() != n * w.k {
        return Err(Error::domain("witness vectors do not match the map and k"));
    }
    if !(w.scale > 0.0) {
        return Err(Error::domain("witness scale must be positive"));
    }
    let mut pre = CertificationReport::new();
    let value = evaluate_witness(&phi.scale(1.0 / w.scale), w.k, &w.u, &w.v)?;
    pre.witness("value", value);
    let saturating = pre.check("witness_saturates", (w.k as f64 - value).max(0.0), tol);
    let isometric = pre.check(
        "embed_isometry",
        is_isometry_residual(&w.u_embed).max(is_isometry_residual(&w.v_embed)),
        tol,
    );
    if !saturating || !isometric {
        return Err(Error::Refusal {
            reason: "witness does not saturate the multiplicity bound".into(),
            report: Box::new(pre),
        });
    }
    let e = embedded_map(phi, w)?;
    let mut report = pre;
    report.merge("embedded", &certify_complete_isometry(&e, tol));
    report.witness("k", w.k);
    report.witness("tol", tol);
    Ok(report)
}

/// Verdicts of the three equivalent characterizations of `|||Φ|||₁ = n‖Φ‖₁ = n`
/// (for `m ≥ n`) and whether they agree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryReport {
    /// `‖Φ‖₁ = 1` and `|||Φ|||₁ = n`.
    pub norms: bool,
    /// `‖J(Φ)‖₁ = n²` and `‖J(Φ∘T_n)‖₁ = n`.
    pub choi: bool,
    /// `Φ∘T_n` is a complete trace-norm isometry.
    pub isometry: bool,
    pub agreement: bool,
    /// Checks of all three statements; its verdict is "all hold".
    pub report: CertificationReport,
}

pub fn corollary_check(
    phi: &LinearMapRep,
    opts: &SeesawOptions,
    tol: f64,
    sdp_tol: f64,
) -> Result<CorollaryReport> {
    let n = phi.in_dim() as f64;
    let mut report = CertificationReport::new();
    report.witness("tol", tol);
    report.witness("sdp_tol", sdp_tol);
    report.witness("seed", opts.seed);
    report.witness("restarts", opts.restarts);
    if phi.out_dim() < phi.in_dim() {
        log::warn!("characterization assumes m >= n; got m={} < n={}", phi.out_dim(), phi.in_dim());
    }

    let induced = induced_trace_norm(phi, opts)?.value;
    let diamond = diamond_norm_sdp(phi, sdp_tol)?;
    report.witness("induced_norm", induced);
    report.witness("diamond_norm", diamond.value);
    report.witness("diamond_upper_bound", diamond.upper_bound);
    let s1a = report.check("norms.induced", (induced - 1.0).abs(), tol);
    let s1b = report.check("norms.diamond", (diamond.value - n).abs(), tol);

    let (j, jt) = choi_isometry_invariants(phi)?;
    report.witness("choi_trace_norm", j);
    report.witness("choi_transpose_trace_norm", jt);
    let s2a = report.check("choi.trace_norm", (j - n * n).abs(), tol);
    let s2b = report.check("choi.transpose_trace_norm", (jt - n).abs(), tol);

    let psi = phi.compose_transpose();
    let cert = certify_complete_isometry(&psi, tol);
    let s3 = cert.verdict;
    report.merge("isometry", &cert);

    let scale_tol = tol * (1.0 + crate::linalg::max_abs(phi.choi()));
    let phi_hp = phi.is_hermiticity_preserving(scale_tol);
    let psi_hp = psi.is_hermiticity_preserving(scale_tol);
    report.witness("phi_hermiticity_preserving", phi_hp);
    report.witness("psi_hermiticity_preserving", psi_hp);
    report.witness("psi_completely_positive", psi.is_completely_positive(scale_tol));
    if s3 {
        match extract_isometry_structure(&psi, tol) {
            Ok(d) => {
                report.witness("psi_variant", d.variant);
                if phi_hp {
                    report.check(
                        "refinement.psi_hermitian_structure",
                        if d.variant == StructureVariant::General { 1.0 } else { 0.0 },
                        0.5,
                    );
                }
            }
            Err(e) => report.witness("psi_extraction_error", e.to_string()),
        }
    }

    let s1 = s1a && s1b;
    let s2 = s2a && s2b;
    let agreement = s1 == s2 && s2 == s3;
    report.witness("agreement", agreement);
    Ok(CorollaryReport {
        norms: s1,
        choi: s2,
        isometry: s3,
        agreement,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{identity_map, transpose_map};
    use crate::isometry::random_structure;
    use crate::linalg::{max_abs_diff, rng_from_seed};

    fn opts() -> SeesawOptions {
        SeesawOptions::with_seed(3).restarts(12)
    }

    #[test]
    fn transpose_saturates_with_uniform_schmidt() {
        for n in 2..=3 {
            let (report, w) = verify_saturation(&transpose_map(n), n, &opts(), 1e-5).unwrap();
            assert!(report.verdict, "{report:?}");
            let w = w.unwrap();
            for s in w.schmidt_u.iter().chain(&w.schmidt_v) {
                assert!((s - 1.0 / (n as f64).sqrt()).abs() < SCHMIDT_TOL);
            }
            let f = transpose_factorization(&transpose_map(n), &w, 1e-7).unwrap();
            assert!(f.verdict, "{f:?}");
        }
    }

    #[test]
    fn identity_does_not_saturate() {
        let (report, w) = verify_saturation(&identity_map(3), 2, &opts(), 1e-5).unwrap();
        assert!(!report.verdict);
        assert!(w.is_none());
        assert!(report.passed("chain.triangle"));
    }

    #[test]
    fn k_above_n_never_saturates() {
        let (report, w) = verify_saturation(&transpose_map(2), 3, &opts(), 1e-5).unwrap();
        assert!(!report.verdict && w.is_none());
        assert_eq!(report.witnesses["status"], "not_saturated");
    }

    #[test]
    fn canonical_witness_embeds_the_identity() {
        let n = 3;
        let u = crate::linalg::max_entangled_vector(n);
        let w = SaturationWitness {
            k: n,
            scale: 1.0,
            schmidt_u: vec![1.0 / 3f64.sqrt(); 3],
            schmidt_v: vec![1.0 / 3f64.sqrt(); 3],
            u_embed: crate::linalg::identity(n),
            v_embed: crate::linalg::identity(n),
            u: u.clone(),
            v: u,
        };
        let e = embedded_map(&transpose_map(n), &w).unwrap();
        assert!(max_abs_diff(e.choi(), identity_map(n).choi()) < 1e-14);
        assert!(transpose_factorization(&transpose_map(n), &w, 1e-10).unwrap().verdict);

        let fake = SaturationWitness { scale: 1.0, ..w };
        assert!(matches!(
            transpose_factorization(&identity_map(n), &fake, 1e-7),
            Err(Error::Refusal { .. })
        ));
    }

    #[test]
    fn constructed_map_round_trips_through_embedding() {
        let mut rng = rng_from_seed(11);
        let d = random_structure(2, 2, 5, StructureVariant::General, &mut rng).unwrap();
        let phi = d.to_map().unwrap().compose_transpose();
        let (report, w) = verify_saturation(&phi, 2, &opts(), 1e-5).unwrap();
        assert!(report.verdict, "{report:?}");
        let w = w.unwrap();
        assert!(transpose_factorization(&phi, &w, 1e-6).unwrap().verdict);
        let e = embedded_map(&phi, &w).unwrap();
        let back = extract_isometry_structure(&e, 1e-6).unwrap();
        assert!(back.reconstruction_residual(&e).unwrap() < 1e-8);
    }

    #[test]
    fn corollary_verdicts_agree() {
        let c = corollary_check(&transpose_map(3).scale(1.0 / 3.0), &opts(), 1e-6, 1e-8);
        // ‖T_n/n‖₁ = 1/n, so the normalized statement fails; the unscaled transpose passes.
        let c = c.unwrap();
        assert!(c.agreement);
        let t = corollary_check(&transpose_map(3), &opts(), 1e-6, 1e-8).unwrap();
        assert!(t.norms && t.choi && t.isometry && t.report.verdict, "{:?}", t.report);
        let id = corollary_check(&identity_map(3), &opts(), 1e-6, 1e-8).unwrap();
        assert!(id.agreement && !id.norms && !id.choi && !id.isometry);

        let mut rng = rng_from_seed(5);
        let d = random_structure(2, 2, 4, StructureVariant::Positive, &mut rng).unwrap();
        let phi = d.to_map().unwrap().compose_transpose();
        let c = corollary_check(&phi, &opts(), 1e-6, 1e-8).unwrap();
        assert!(c.agreement && c.isometry, "{:?}", c.report);
        assert_eq!(c.report.witnesses["psi_variant"], "positive");
    }
}
