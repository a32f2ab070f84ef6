use num_complex::Complex64;
use polariton::emission::{
    contour_terms, gamma_asymptotic, gamma_contour, gamma_direct, j_integral, j_leading,
    EmissionParams,
};
use polariton::{Cutoff, LorentzCutoffModel};
use proptest::prelude::*;

fn params(omega_c: f64, kappa0: f64, omega_a: f64, conv: f64) -> EmissionParams {
    let m = LorentzCutoffModel::new(omega_c, kappa0, Cutoff::Infinite).unwrap();
    EmissionParams::new(m.into(), omega_a, conv).unwrap()
}

fn equilibrium(p: &EmissionParams) -> f64 {
    p.model.refractive_index(p.omega_a).unwrap().re
}

/// J by composite Simpson in u = √λ on a fine uniform grid.
fn j_simpson(omega_c: f64, kappa0: f64, omega_a: f64, t: f64) -> Complex64 {
    let a1 = (1.0 - kappa0 * kappa0).sqrt();
    let g = |u: f64| {
        let l = u * u;
        let w = Complex64::new(a1, -(l + kappa0));
        let b = Complex64::new(
            2.0 * omega_c * omega_c * a1,
            l * (l * l + 4.0 * a1 * a1 + omega_c * omega_c),
        ) / (4.0 * a1 * a1 + l * l);
        2.0 * (-l * t).exp() * w.powi(3) * b.sqrt() / (w - omega_a)
    };
    let (top, n) = ((60.0 / t).sqrt(), 400_000);
    let h = top / n as f64;
    let mut s = g(0.0) + g(top);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn j_matches_independent_quadrature() {
    let p = params(0.5, 0.01, 1.0, 50.0);
    let j = j_integral(&p, 100.0).unwrap();
    let oracle = j_simpson(0.5, 0.01, 1.0, 100.0);
    assert!(
        (j - oracle).norm() < 1e-9 * oracle.norm(),
        "{j} vs {oracle}"
    );
}

#[test]
fn j_approaches_leading_term() {
    // Off resonance the first correction is O(1/(Δt·|ω₁ − ω_A|)).
    let p = params(0.5, 0.01, 0.9, 50.0);
    let ratio = j_integral(&p, 1000.0).unwrap() / j_leading(&p, 1000.0).unwrap();
    assert!((ratio - 1.0).norm() < 0.02, "{ratio}");
}

#[test]
fn j_decays_as_inverse_sqrt() {
    let p = params(0.5, 0.01, 0.9, 50.0);
    let r = j_integral(&p, 4000.0).unwrap().norm() / j_integral(&p, 2000.0).unwrap().norm();
    assert!((r - 0.5f64.sqrt()).abs() < 0.005, "{r}");
}

#[test]
fn asymptotic_envelope_scaling() {
    let p = params(0.5, 0.01, 0.9, 50.0);
    let eq = equilibrium(&p);
    let a1 = (1.0f64 - 1e-4).sqrt();
    // One detuning period apart the phase repeats, leaving only the envelope.
    let period = 2.0 * std::f64::consts::PI / (a1 - 0.9);
    for t in [300.0, 500.0, 900.0] {
        let r0 = gamma_asymptotic(&p, t).unwrap() - eq;
        let r1 = gamma_asymptotic(&p, t + period).unwrap() - eq;
        let expected = (-0.01 * period).exp() * (t / (t + period)).sqrt();
        assert!((r1 / r0 / expected - 1.0).abs() < 0.01);
    }
}

#[test]
fn on_resonance_transient_keeps_its_sign() {
    let p = params(0.5, 0.01, 1.0, 50.0);
    let eq = equilibrium(&p);
    for i in 1..=40 {
        let t = 15.0 * i as f64;
        assert!(gamma_direct(&p, t).unwrap() < eq, "overshoot at {t}");
    }
}

#[test]
fn equilibrium_across_parameters() {
    for (wc, k0, wa) in [
        (0.5, 0.01, 1.0),
        (0.5, 0.02, 0.9),
        (1.0, 0.05, 1.2),
        (0.3, 0.03, 0.7),
    ] {
        let p = params(wc, k0, wa, 50.0);
        let t = 9.0 / k0;
        let g = gamma_direct(&p, t).unwrap();
        assert!(
            (g - equilibrium(&p)).abs() < 1e-3,
            "({wc}, {k0}, {wa}): {g}"
        );
        let c = gamma_contour(&p, 40.0 / k0).unwrap();
        assert!((c - p.equilibrium().unwrap()).abs() < 1e-9);
    }
}

#[test]
fn convergence_cutoff_only_matters_within_a_cycle() {
    let base = params(0.5, 0.01, 1.0, 50.0);
    let doubled = params(0.5, 0.01, 1.0, 100.0);
    for t in [7.0, 20.0, 100.0, 400.0] {
        let d = (gamma_direct(&base, t).unwrap() - gamma_direct(&doubled, t).unwrap()).abs();
        assert!(d < 1e-4, "{t}: {d:e}");
    }
}

#[test]
fn second_cut_decays_faster_than_first() {
    let p = params(0.5, 0.01, 1.0, 50.0);
    let early = contour_terms(&p, 100.0).unwrap();
    let late = contour_terms(&p, 400.0).unwrap();
    let first = late.cut1.norm() / early.cut1.norm();
    let second = late.cut2.norm() / early.cut2.norm();
    assert!(second < first, "{second} vs {first}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn direct_and_contour_agree(
        wc in 0.2f64..1.0,
        k0 in 0.005f64..0.05,
        wa in 0.7f64..1.3,
        t in 5.0f64..200.0,
    ) {
        let p = params(wc, k0, wa, 50.0);
        let d = gamma_direct(&p, t).unwrap();
        let c = gamma_contour(&p, t).unwrap();
        prop_assert!((d - c).abs() < 1e-6, "{d} vs {c}");
    }
}
