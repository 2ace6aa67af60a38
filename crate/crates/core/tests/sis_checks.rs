//! SIS dynamics checks: invariance at the scheme level, method agreement,
//! monotone convergence from below, and the implication chain on the
//! amplified fixture family.

mod common;

use common::*;
use ibnet::genlab::{amplified, Rng64};
use ibnet::graph::Directedness;
use ibnet::sis::{
    boundary_dominance, endemic_equilibrium, endemic_equilibrium_ode, integrate,
    monotone_lower_iterates, SisError, SisParams,
};
use ibnet::spectral::WalkSpec;
use ibnet::stratify::classify_roles;

#[test]
fn invariance_violation_detected_for_oversized_step() {
    let g = Graph::build(2, &[(0, 1, 1.0), (1, 0, 1.0)], Directedness::Directed).unwrap();
    let params = SisParams::new(1.0, 200.0).unwrap();
    // delta * dt = 4 sits outside the stability region of the scheme, so the
    // decay toward zero overshoots and leaves the hypercube.
    let result = integrate(&[1.0, 1.0], &params, &g, 1.0, 0.02);
    assert!(matches!(result, Err(SisError::InvarianceViolation { .. })));
}

#[test]
fn method_agreement_on_random_strongly_connected_graphs() {
    for seed in 0..5u64 {
        let mut rng = Rng64::substream(0x515, seed);
        let n = 10 + rng.next_below(20);
        let g = strongly_connected_digraph(&mut rng, n, 0.2, seed % 2 == 0);
        let rho = g.spectral_radius(1e-12).unwrap().value;
        let params = SisParams::new(2.0 / rho, 1.0).unwrap();
        let fp = endemic_equilibrium(&g, &params, 1e-10).unwrap();
        let ode = endemic_equilibrium_ode(&g, &params, 1e-9, 400.0).unwrap();
        let gap = fp
            .x_star
            .iter()
            .zip(&ode.x_star)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(gap < 1e-6, "seed {seed}: methods disagree by {gap}");
        assert!(fp.x_star.iter().all(|&v| v > 0.0 && v < 1.0));
    }
}

#[test]
fn threshold_dichotomy() {
    let mut rng = Rng64::new(0xD1C);
    for _ in 0..6 {
        let n = 8 + rng.next_below(10);
        let g = strongly_connected_digraph(&mut rng, n, 0.25, false);
        let rho = g.spectral_radius(1e-12).unwrap().value;
        let below = SisParams::new(0.5 / rho, 1.0).unwrap();
        let eq = endemic_equilibrium(&g, &below, 1e-10).unwrap();
        assert!(eq.threshold_margin <= 0.0);
        assert!(eq.x_star.iter().all(|&v| v == 0.0));
        let above = SisParams::new(1.5 / rho, 1.0).unwrap();
        let eq = endemic_equilibrium(&g, &above, 1e-10).unwrap();
        assert!(eq.threshold_margin > 0.0);
        assert!(eq.x_star.iter().all(|&v| v > 0.0));
    }
}

#[test]
fn monotone_iterates_converge_to_equilibrium() {
    let mut rng = Rng64::new(0xAA1);
    let g = strongly_connected_digraph(&mut rng, 15, 0.25, false);
    let rho = g.spectral_radius(1e-12).unwrap().value;
    let params = SisParams::new(1.8 / rho, 1.0).unwrap();
    let iterates = monotone_lower_iterates(&g, &params, 1e-11, 200_000).unwrap();
    for pair in iterates.windows(2) {
        for (a, b) in pair[0].iter().zip(&pair[1]) {
            assert!(*b >= *a - 1e-14, "iterate decreased: {a} -> {b}");
        }
    }
    let eq = endemic_equilibrium(&g, &params, 1e-11).unwrap();
    let last = iterates.last().unwrap();
    let gap = last.iter().zip(&eq.x_star).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    assert!(gap < 1e-7);
}

#[test]
fn amplified_fixture_is_boundary_dominant_at_weak_coupling() {
    let (g, p) = amplified(0.4, 0.004, &[30, 30], 42).unwrap();
    let params = SisParams::new(0.4, 1.0).unwrap();
    let eq = endemic_equilibrium(&g, &params, 1e-10).unwrap();
    assert!(eq.threshold_margin > 0.0);
    let roles = classify_roles(&g, &p).unwrap();
    let gaps = boundary_dominance(&g, &p, &roles, &eq.x_star).unwrap();
    for gap in &gaps {
        assert_eq!(gap.skipped, None);
        assert!(gap.gap.unwrap() > 0.0, "group {} not dominant: {gap:?}", gap.group);
    }
}

#[test]
fn chain_holds_at_weak_coupling_and_fails_at_strong_coupling() {
    let params = SisParams::new(0.4, 1.0).unwrap();
    let (g, p) = amplified(0.4, 0.004, &[30, 30], 7).unwrap();
    let weak = ibnet::sis::implication_chain(&g, &p, &params, &WalkSpec::auto(&g)).unwrap();
    assert_eq!(weak.verdict.dominance_all_groups, Some(true));
    assert_eq!(weak.verdict.observed_negative, Some(true));
    assert!(weak.verdict.chain_holds);
    // Consistency: the sign report's observed coefficient is the profile's
    // B->I component.
    let profile_b_to_i = weak.profile.b_to_i().unwrap().coefficient.unwrap();
    let sign_observed = weak.sign.as_ref().unwrap().observed.unwrap();
    assert_eq!(profile_b_to_i, sign_observed);

    let (g, p) = amplified(0.4, 0.4, &[30, 30], 7).unwrap();
    let strong = ibnet::sis::implication_chain(&g, &p, &params, &WalkSpec::auto(&g)).unwrap();
    assert!(!strong.verdict.premises_hold, "premises should fail without a bottleneck");
    if let Some(weak_phi) = weak.phi_max {
        if let Some(strong_phi) = strong.phi_max {
            assert!(strong_phi > weak_phi, "conductance should grow with coupling");
        }
    }
}
