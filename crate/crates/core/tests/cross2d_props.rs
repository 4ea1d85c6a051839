mod common;

use common::*;
use magcross::cross2d::{
    ladder_solve, modulus_field, write_ladder_csv, zoom_window, CrossOperatorSpec, LadderEntry, MAX_FACTOR_BYTES,
};
use magcross::symbol::DEFAULT_MESH;

#[test]
fn scaled_variables_are_isospectral() {
    ensure(isospectrality(6));
}

#[test]
fn tau_extent_is_saturated() {
    ensure(tau_saturation(6));
}

#[test]
fn eigenvalues_positive_and_operator_hermitian() {
    ensure(positivity_and_hermitian(6));
}

#[test]
fn tail_mass_decays() {
    ensure(tail_decay(6));
}

#[test]
fn modulus_reflection_symmetry() {
    ensure(modulus_symmetry(6));
}

#[test]
fn free_operator_constant_mode() {
    ensure(free_constant_mode());
}

#[test]
fn zoomed_mode_sits_on_the_band_minimum() {
    let alpha0 = magcross::band::axis_min(0.01, 3, DEFAULT_MESH).unwrap().alpha0;
    let (sys, res) = ladder_solve(4, 6, 1).unwrap();
    let eps = magcross::cross2d::ladder_epsilon(4);
    let r = modulus_field(&res, &sys, 0, zoom_window(eps, alpha0), 81).unwrap();
    let (s, t) = r.argmax();
    // offset measured in the localization scale ε^{-1/2}
    let off = (s - alpha0 / eps).abs() * eps.sqrt();
    assert!(off < 1.0 && t.abs() < 1.0, "argmax ({s}, {t}) vs ({}, 0)", alpha0 / eps);
}

#[test]
fn ladder_csv_schema() {
    let entries = vec![
        LadderEntry { l: 0, epsilon: 0.5, kappa: Ok(vec![0.7, 1.1]) },
        LadderEntry { l: 1, epsilon: 0.25f64.sqrt() / 2f64.sqrt(), kappa: Err("failed".into()) },
    ];
    let mut buf = Vec::new();
    write_ladder_csv(&entries, 2, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(!text.contains('\r'));
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rd.headers().unwrap(), vec!["l", "epsilon", "kappa1", "kappa2"]);
    let rows: Vec<Vec<String>> = rd.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.7);
    assert!(rows[1][2].parse::<f64>().unwrap().is_nan());
}

#[test]
fn oversized_assembly_is_refused() {
    let spec = CrossOperatorSpec::sigma_tau(0.5, 8.0, 8.0, (4000, 400), 10);
    let stats = magcross::cross2d::AssemblyStats::of(&spec.mesh_s, &spec.mesh_t);
    assert!(stats.factor_bytes > MAX_FACTOR_BYTES);
    let e = magcross::assemble_cross(&spec).unwrap_err();
    assert!(matches!(e, magcross::Error::InvalidParameter(ref m) if m.contains("bytes")), "{e}");
}

#[test]
fn window_outside_domain_is_rejected() {
    let (sys, res) = ladder_solve(0, 4, 1).unwrap();
    let w = magcross::cross2d::Rect::new((-100.0, 0.0), (-1.0, 1.0));
    assert!(modulus_field(&res, &sys, 0, w, 11).is_err());
}
