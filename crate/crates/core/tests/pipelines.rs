//! End-to-end scenarios across modules.

use cbnorm::channel::{identity_map, transpose_map, wh_channels};
use cbnorm::game::{
    analyze_game, construct_game, decompose_wh_equivalent, equal_probability_check, orthogonal_reversible_pair,
    wh_game, GameTriple,
};
use cbnorm::inflation::{corollary_check, embedded_map, transpose_factorization, verify_saturation, SCHMIDT_TOL};
use cbnorm::isometry::{
    certify_complete_isometry, extract_isometry_structure, output_range_projector, random_structure,
    StructureVariant,
};
use cbnorm::linalg::{operator_norm, rng_from_seed};
use cbnorm::norms::SeesawOptions;
use cbnorm::Error;

fn opts() -> SeesawOptions {
    SeesawOptions::with_seed(1).restarts(16)
}

#[test]
fn saturation_of_transposed_isometry_yields_factorization() {
    let mut rng = rng_from_seed(21);
    for n in 2..=3 {
        let d = random_structure(n, 1, n + 1, StructureVariant::Positive, &mut rng).unwrap();
        let phi = d.to_map().unwrap().compose_transpose();
        let (report, w) = verify_saturation(&phi, n, &opts(), 1e-5).unwrap();
        assert!(report.verdict, "{report:?}");
        let w = w.unwrap();
        let target = 1.0 / (n as f64).sqrt();
        assert!(w.schmidt_u.iter().all(|s| (s - target).abs() < SCHMIDT_TOL));
        let f = transpose_factorization(&phi, &w, 1e-7).unwrap();
        assert!(f.verdict, "{f:?}");
        // The embedded map has the structure of a complete isometry.
        let e = embedded_map(&phi, &w).unwrap();
        let s = extract_isometry_structure(&e, 1e-7).unwrap();
        assert!(s.reconstruction_residual(&e).unwrap() < 1e-8);
    }
}

#[test]
fn non_saturating_witness_is_refused() {
    let (report, w) = verify_saturation(&transpose_map(3), 2, &opts(), 1e-5).unwrap();
    assert!(report.verdict);
    let w = w.unwrap();
    // Reuse the witness on a map it does not saturate.
    assert!(matches!(
        transpose_factorization(&identity_map(3), &w, 1e-7),
        Err(Error::Refusal { .. })
    ));
}

#[test]
fn corollary_statements_agree_on_transpose_family() {
    for n in 2..=3 {
        let c = corollary_check(&transpose_map(n), &opts(), 1e-6, 1e-8).unwrap();
        assert!(c.agreement && c.norms && c.choi && c.isometry);
        // T_n ∘ T_n = id is a complete isometry; T_n itself is not.
        assert!(certify_complete_isometry(&transpose_map(n).compose_transpose(), 1e-9).verdict);
        assert!(!certify_complete_isometry(&transpose_map(n), 1e-9).verdict);
    }
}

#[test]
fn wh_analysis_matches_known_values() {
    let a = analyze_game(&wh_game(2).unwrap(), &opts(), 1e-6, 1e-8).unwrap();
    assert!((a.entangled_value - 1.0).abs() < 1e-6);
    assert!((a.unentangled_value - 0.75).abs() < 1e-6);
    assert!(a.gap_certificate.verdict);
    let json = serde_json::to_value(&a).unwrap();
    assert!(json["delta"]["choi"].is_object());
}

#[test]
fn theorem_round_trip_over_weights() {
    let mut rng = rng_from_seed(33);
    for n in 2..=3 {
        let m = 4 * n;
        let (p0, p1) = orthogonal_reversible_pair(n, m, 2, 2, &mut rng).unwrap();
        let overlap = operator_norm(&(output_range_projector(&p0).unwrap() * output_range_projector(&p1).unwrap())).unwrap();
        assert!(overlap < 1e-8);
        for r in [0.0, 0.3, 0.5, 1.0] {
            let g = construct_game(r, Some(&p0), Some(&p1), n, 1e-8).unwrap();
            let d = decompose_wh_equivalent(&g, &opts(), 1e-6, 1e-8).unwrap();
            assert!((d.r_weight - r).abs() < 1e-8);
            assert!(d.residual_gamma0 < 1e-7 && d.residual_gamma1 < 1e-7);
            assert_eq!(d.single_channel, r == 0.0 || r == 1.0);
            let eq = equal_probability_check(&g, 2, 20, 1e-8, 5).unwrap();
            assert!(eq.verdict);
        }
    }
}

#[test]
fn game_without_gap_is_refused() {
    let (p0, p1, _) = wh_channels(2).unwrap();
    let g = GameTriple::new(0.5, p0, p1).unwrap();
    assert!(matches!(
        decompose_wh_equivalent(&g, &opts(), 1e-6, 1e-8),
        Err(Error::Refusal { .. })
    ));
}

#[test]
fn game_json_file_round_trip() {
    let g = wh_game(3).unwrap();
    let text = serde_json::to_string(&g.to_json()).unwrap();
    let back = GameTriple::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), text);
}
