//! End-to-end acceptance checks, shared by the test suite and `cbnorm selftest`.
//!
//! Each check returns its worst observed metric next to the threshold it was
//! held to, so a failure reports by how much it missed.

use serde::Serialize;

use crate::channel::{depolarizing_map, identity_map, random_channel, random_hermitian_map, random_map, transpose_map, wh_channels};
use crate::error::Result;
use crate::game::{
    check_max_gap, construct_game, cp_difference_uniqueness, decompose_wh_equivalent,
    equal_probability_check, explore_hermitian_inflation, optimal_entangled, optimal_unentangled,
    orthogonal_reversible_pair, wh_game,
};
use crate::inflation::corollary_check;
use crate::isometry::{
    certify_complete_isometry, exhaustive_relation_sweep, extract_isometry_structure,
    herm_signed_decompose, left_inverse, random_structure, LeftInverseKind, StructureVariant,
};
use crate::linalg::{max_abs_diff, rng_from_seed, trace_norm};
use crate::norms::{
    diamond_norm_sdp, diamond_norm_seesaw, induced_operator_norm, induced_trace_norm,
    multiplicity_norm, SeesawOptions,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    /// Worst value of the quantity compared against `threshold`.
    pub metric: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: metric {:.3e} vs threshold {:.1e}; {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.metric,
            self.threshold,
            self.detail
        )
    }
}

/// Settings shared by the checks.
#[derive(Debug, Clone, Copy)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub restarts: usize,
    pub sdp_tol: f64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 50,
            sdp_tol: 1e-9,
        }
    }
}

impl AcceptanceConfig {
    fn opts(&self) -> SeesawOptions {
        SeesawOptions::with_seed(self.seed).restarts(self.restarts)
    }
}

fn result(id: usize, name: &'static str, metric: f64, threshold: f64, pass: bool, detail: String) -> CriterionResult {
    CriterionResult {
        id,
        name,
        pass,
        metric,
        threshold,
        detail,
    }
}

/// Worst-so-far tracker that treats NaN as infinitely bad.
fn worse(acc: f64, x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        acc.max(x)
    }
}

pub fn choi_norm_anchors() -> Result<CriterionResult> {
    let mut worst = 0.0f64;
    for n in 2..=5 {
        let nf = n as f64;
        worst = worse(worst, (trace_norm(identity_map(n).choi())? - nf).abs());
        worst = worse(worst, (trace_norm(transpose_map(n).choi())? - nf * nf).abs());
    }
    Ok(result(1, "Choi norm anchors", worst, 1e-10, worst < 1e-10, "n = 2..5".into()))
}

pub fn transpose_decomposition() -> Result<CriterionResult> {
    let mut worst = 0.0f64;
    for n in 2..=5 {
        let (p0, p1, ln) = wh_channels(n)?;
        let d = p0.scale(ln).subtract(&p1.scale(1.0 - ln))?;
        worst = worse(worst, max_abs_diff(d.choi(), transpose_map(n).scale(1.0 / n as f64).choi()));
    }
    Ok(result(2, "transpose decomposition", worst, 1e-13, worst < 1e-13, "n = 2..5".into()))
}

pub fn maximal_inflation(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let opts = cfg.opts();
    let mut worst_gap = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    for n in 1..=4 {
        let t = transpose_map(n);
        for k in 1..=n {
            let mn = multiplicity_norm(&t, k, &opts, 1e-5)?;
            worst_gap = worse(worst_gap, (mn.bound - mn.estimate.value).abs());
            worst_gap = worse(worst_gap, (mn.estimate.value - k as f64).abs());
        }
        let above = multiplicity_norm(&t, n + 1, &opts, 1e-5)?;
        worst_excess = worst_excess.max(above.estimate.value - n as f64);
    }
    let pass = worst_gap < 1e-5 && worst_excess <= 1e-5;
    Ok(result(
        3,
        "maximal inflation of the transpose",
        worst_gap,
        1e-5,
        pass,
        format!("k <= n <= 4; worst excess over n at k = n+1: {worst_excess:.3e}"),
    ))
}

pub fn isometry_pipeline(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rng = rng_from_seed(cfg.seed ^ 0x4953_4f4d);
    let variants = [StructureVariant::General, StructureVariant::Hermitian, StructureVariant::Positive];
    let (mut cert, mut recon, mut inv) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..20 {
        let n = 2 + i % 2;
        let r = 1 + (i / 2) % 2;
        let m = n * r + (i / 4) % 3;
        let d = random_structure(n, r, m, variants[i % 3], &mut rng)?;
        let phi = d.to_map()?;
        let rep = certify_complete_isometry(&phi, 1e-8);
        cert = worse(cert, rep.checks.iter().map(|c| c.residual).fold(0.0, f64::max));
        let e = extract_isometry_structure(&phi, 1e-8)?;
        recon = worse(recon, e.reconstruction_residual(&phi)?);
        let mut kinds = vec![LeftInverseKind::General];
        if e.variant == StructureVariant::Positive {
            kinds.push(LeftInverseKind::Channel);
        }
        for kind in kinds {
            let back = left_inverse(&e, kind)?.compose(&phi)?;
            inv = worse(inv, back.distance(&identity_map(n))?);
        }
    }
    let mut signed = 0.0f64;
    for i in 0..10 {
        let n = 2 + i % 2;
        let (r0, r1) = (1 + i % 2, 1 + (i / 2) % 2);
        let (p0, p1) = orthogonal_reversible_pair(n, n * (r0 + r1), r0, r1, &mut rng)?;
        let w = (i as f64 + 0.5) / 10.0;
        let phi = p0.scale(w).subtract(&p1.scale(1.0 - w))?;
        let dec = herm_signed_decompose(&phi, 1e-8)?;
        signed = worse(signed, (dec.r_weight - w).abs());
    }
    let worst = cert.max(recon).max(inv).max(signed);
    Ok(result(
        4,
        "isometry pipeline",
        worst,
        1e-8,
        worst < 1e-8,
        format!(
            "certify {cert:.1e}, reconstruction {recon:.1e}, left inverse {inv:.1e}, signed r {signed:.1e}"
        ),
    ))
}

pub fn corollary_coherence(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let opts = cfg.opts();
    let mut rng = rng_from_seed(cfg.seed ^ 0x434f_524f);
    let mut maps = Vec::new();
    for i in 0..10 {
        let n = 2 + i % 2;
        let r = 1 + (i / 2) % 2;
        let variant = [StructureVariant::General, StructureVariant::Hermitian, StructureVariant::Positive][i % 3];
        let d = random_structure(n, r, n * r + i % 2, variant, &mut rng)?;
        maps.push(d.to_map()?.compose_transpose());
    }
    for i in 0..10 {
        let n = 2 + i % 2;
        maps.push(random_channel(n, n + i % 2, 1 + i % 3, &mut rng)?);
    }
    let mut disagreements = 0usize;
    let mut positives = 0usize;
    let mut worst_diff = 0.0f64;
    for phi in &maps {
        let c = corollary_check(phi, &opts, 1e-6, cfg.sdp_tol)?;
        if !c.agreement {
            disagreements += 1;
        }
        if c.isometry {
            positives += 1;
        }
        let sdp = diamond_norm_sdp(phi, cfg.sdp_tol)?.value;
        let see = diamond_norm_seesaw(phi, &opts)?.value;
        worst_diff = worse(worst_diff, (sdp - see).abs());
    }
    let pass = disagreements == 0 && positives == 10 && worst_diff < 1e-4;
    Ok(result(
        5,
        "corollary coherence",
        worst_diff,
        1e-4,
        pass,
        format!("{disagreements} disagreements over 20 maps; {positives}/10 constructed maps certified"),
    ))
}

pub fn wh_game_values(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let opts = cfg.opts();
    let mut worst = 0.0f64;
    for n in 2..=4 {
        let g = wh_game(n)?;
        worst = worse(worst, (optimal_entangled(&g, cfg.sdp_tol)? - 1.0).abs());
        let want = 0.5 + 0.5 / n as f64;
        worst = worse(worst, (optimal_unentangled(&g, &opts)?.value - want).abs());
    }
    Ok(result(6, "Werner-Holevo game values", worst, 1e-5, worst < 1e-5, "n = 2..4".into()))
}

pub fn wh_round_trip(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let opts = cfg.opts();
    let mut rng = rng_from_seed(cfg.seed ^ 0x5748_5254);
    let (mut r_err, mut l_err, mut eq_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut gap_failures = 0usize;
    for n in 2..=3 {
        let m = 4 * n;
        let (p0, p1) = orthogonal_reversible_pair(n, m, 2, 2, &mut rng)?;
        for r in [0.0, 0.3, 1.0] {
            let g = construct_game(r, Some(&p0), Some(&p1), n, 1e-8)?;
            if !check_max_gap(&g, &opts, 1e-6, cfg.sdp_tol)?.verdict {
                gap_failures += 1;
                continue;
            }
            let d = decompose_wh_equivalent(&g, &opts, 1e-6, cfg.sdp_tol)?;
            r_err = worse(r_err, (d.r_weight - r).abs());
            l_err = worse(l_err, d.lambda_residual);
            let eq = equal_probability_check(&g, 2, 100, 1e-7, cfg.seed)?;
            eq_err = worse(eq_err, eq.get("max_deviation").map_or(f64::INFINITY, |c| c.residual));
        }
    }
    let pass = gap_failures == 0 && r_err < 1e-7 && l_err < 1e-8 && eq_err < 1e-7;
    Ok(result(
        7,
        "Werner-Holevo uniqueness round trip",
        r_err,
        1e-7,
        pass,
        format!("lambda {l_err:.1e}, equal-probability {eq_err:.1e}, gap failures {gap_failures}"),
    ))
}

pub fn cp_difference_instance(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let opts = cfg.opts();
    let mut worst = 0.0f64;
    let mut verdicts = true;
    for n in 2..=3 {
        let (p0, p1, ln) = wh_channels(n)?;
        let phi = transpose_map(n).scale(1.0 / n as f64);
        let rep = cp_difference_uniqueness(&phi, &p0.scale(ln), &p1.scale(1.0 - ln), &opts, 1e-7, cfg.sdp_tol)?;
        verdicts &= rep.verdict;
        for name in ["uniqueness.psi0", "uniqueness.psi1"] {
            worst = worse(worst, rep.get(name).map_or(f64::INFINITY, |c| c.residual));
        }
    }
    Ok(result(
        8,
        "CP-difference uniqueness instance",
        worst,
        1e-7,
        verdicts && worst < 1e-7,
        "n = 2, 3".into(),
    ))
}

pub fn duality_suite(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let opts = cfg.opts();
    let mut rng = rng_from_seed(cfg.seed ^ 0x4455_414c);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let phi = random_map(3, 3, &mut rng);
        let a = induced_trace_norm(&phi, &opts)?.value;
        let b = induced_operator_norm(&phi.adjoint_map(), &opts)?.value;
        worst = worse(worst, (a - b).abs() / a.max(1.0));
    }
    Ok(result(9, "trace/operator norm duality", worst, 1e-5, worst < 1e-5, "20 random maps, n = m = 3".into()))
}

pub fn falsification_suite() -> Result<CriterionResult> {
    let mut all_fail = true;
    for phi in [depolarizing_map(2), depolarizing_map(3), transpose_map(2), transpose_map(3)] {
        all_fail &= !certify_complete_isometry(&phi, 1e-8).verdict;
    }
    let sweep = exhaustive_relation_sweep(&depolarizing_map(3), 1e-8, false)?;
    let elementary = exhaustive_relation_sweep(&depolarizing_map(3), 1e-8, true)?;
    let violation = sweep.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    let elem_violation = elementary.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(result(
        10,
        "falsification suite",
        violation,
        1e-8,
        all_fail && !sweep.verdict,
        format!(
            "certification rejects depolarizing and transpose: {all_fail}; largest violation with superposition dictionary {violation:.3e}, with matrix units alone {elem_violation:.3e}"
        ),
    ))
}

pub fn hermitian_inflation_survey(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let opts = cfg.opts();
    let mut rng = rng_from_seed(cfg.seed ^ 0x5355_5256);
    let mut worst = 0.0f64;
    let mut flagged = 0usize;
    for _ in 0..50 {
        let phi = random_hermitian_map(3, 3, &mut rng);
        let e = explore_hermitian_inflation(&phi, 2, &opts)?;
        worst = worse(worst, e.ratio);
        flagged += e.candidate_counterexample as usize;
    }
    Ok(result(
        11,
        "Hermitian inflation survey",
        worst,
        2.0 + 1e-4,
        worst <= 2.0 + 1e-4,
        format!("largest ratio over 50 maps; {flagged} flagged"),
    ))
}

/// Runs one criterion by number; errors become failing results.
pub fn run_criterion(id: usize, cfg: &AcceptanceConfig) -> CriterionResult {
    let out = match id {
        1 => choi_norm_anchors(),
        2 => transpose_decomposition(),
        3 => maximal_inflation(cfg),
        4 => isometry_pipeline(cfg),
        5 => corollary_coherence(cfg),
        6 => wh_game_values(cfg),
        7 => wh_round_trip(cfg),
        8 => cp_difference_instance(cfg),
        9 => duality_suite(cfg),
        10 => falsification_suite(),
        11 => hermitian_inflation_survey(cfg),
        _ => return result(id, "unknown criterion", f64::NAN, 0.0, false, String::new()),
    };
    out.unwrap_or_else(|e| result(id, "error", f64::NAN, 0.0, false, e.to_string()))
}

pub const CRITERIA: std::ops::RangeInclusive<usize> = 1..=11;

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    CRITERIA.map(|id| run_criterion(id, cfg)).collect()
}
