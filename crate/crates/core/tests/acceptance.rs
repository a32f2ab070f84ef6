//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! process exits nonzero if any check fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use polariton::dispersion::{dispersion_roots, trace_branches, BranchLabel, TraceOptions};
use polariton::emission::{
    contour_terms, emission_curve, gamma_asymptotic, gamma_contour, gamma_direct, EmissionMethod,
    EmissionParams,
};
use polariton::sum_rules::{evaluate, SumRuleId};
use polariton::transients::{coefficient_matrix, commutator_integral, commutator_residue_sum};
use polariton::{
    epsilon_from_coupling, Cutoff, DielectricModel, LorentzCutoffModel, LosslessModel,
    PointScatterCutoffModel, TabulatedCoupling,
};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn lorentz_fig1() -> DielectricModel {
    LorentzCutoffModel::new(0.5, 0.01, Cutoff::Finite(10.0))
        .unwrap()
        .into()
}

fn point_scatter_fig1() -> DielectricModel {
    PointScatterCutoffModel::new(0.5, 0.01, 10.0)
        .unwrap()
        .into()
}

fn fig4() -> EmissionParams {
    let m = LorentzCutoffModel::new(0.5, 0.01, Cutoff::Infinite).unwrap();
    EmissionParams::new(m.into(), 1.0, 50.0).unwrap()
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Closed-form lossless branches: Ω±² = [s ± √(s² − 4k²)]/2 with s = 1 + ω_c² + k².
fn lossless_oracle(wc: f64, k: f64) -> [(f64, f64); 2] {
    let s = 1.0 + wc * wc + k * k;
    let d = (s * s - 4.0 * k * k).sqrt();
    [1.0, -1.0].map(|sign| {
        let w = ((s + sign * d) / 2.0).sqrt();
        let dw2 = k + sign * k * (s - 2.0) / d;
        (w / k, dw2 / (2.0 * w))
    })
}

fn lossless_suite() -> Outcome {
    let start = Instant::now();
    let wc = 0.5;
    let model: DielectricModel = LosslessModel::new(wc).unwrap().into();
    let mut worst: f64 = 0.0;
    for k in linspace(0.1, 3.0, 50) {
        let oracle = lossless_oracle(wc, k);
        let gp: f64 = oracle.iter().map(|(vp, vg)| vp * vg).sum();
        let hb: f64 = oracle.iter().map(|(vp, vg)| vg / vp).sum();
        let rc: f64 = oracle.iter().map(|(vp, vg)| vp.powi(3) * vg).sum();
        worst = worst
            .max((gp - 1.0).abs())
            .max((hb - 1.0).abs())
            .max((rc - (1.0 + wc * wc / (k * k))).abs());

        let roots = dispersion_roots(&model, k).map_err(|e| e.to_string())?;
        for rule in [
            SumRuleId::GroupPhase,
            SumRuleId::HuttnerBarnett,
            SumRuleId::HighFrequency,
        ] {
            let r = evaluate(rule, &roots, &model, k).map_err(|e| e.to_string())?;
            worst = worst.max(r.deviation);
        }
        let mut computed: Vec<f64> = roots.iter().map(|p| p.omega.re).collect();
        computed.sort_by(f64::total_cmp);
        let mut expected: Vec<f64> = oracle.iter().map(|(vp, _)| vp * k).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in computed.iter().zip(&expected) {
            worst = worst.max((a - b).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-10 && secs < 1.0,
        format!("max deviation {worst:.2e}, {secs:.3} s"),
    )
}

fn cutoff_sum_rules() -> Outcome {
    let start = Instant::now();
    let rules = [
        SumRuleId::GroupPhase,
        SumRuleId::HuttnerBarnett,
        SumRuleId::Imaginary(-1),
        SumRuleId::Imaginary(0),
        SumRuleId::Imaginary(1),
        SumRuleId::Static,
        SumRuleId::HighFrequency,
    ];
    let mut worst: f64 = 0.0;
    for model in [lorentz_fig1(), point_scatter_fig1()] {
        for k in linspace(0.1, 3.0, 50) {
            let roots = dispersion_roots(&model, k).map_err(|e| e.to_string())?;
            for rule in rules {
                let r = evaluate(rule, &roots, &model, k).map_err(|e| e.to_string())?;
                worst = worst.max(r.deviation);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-6 && secs < 10.0,
        format!("max deviation {worst:.2e}, {secs:.3} s"),
    )
}

fn branch_structure() -> Outcome {
    let set = trace_branches(
        &lorentz_fig1(),
        &linspace(0.1, 3.0, 50),
        &TraceOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let labels: Vec<BranchLabel> = set.branches.iter().map(|b| b.label).collect();
    let expected = [BranchLabel::Lower, BranchLabel::Upper, BranchLabel::Cutoff];
    let labelled = labels.len() == 3 && expected.iter().all(|l| labels.contains(l));
    if !labelled {
        return Err(format!("branches {labels:?}"));
    }
    let damping = |label| -> Vec<f64> {
        set.branch(label)
            .unwrap()
            .points
            .iter()
            .map(|p| p.omega.im.abs())
            .collect()
    };
    let (lower, upper, cutoff) = (
        damping(BranchLabel::Lower),
        damping(BranchLabel::Upper),
        damping(BranchLabel::Cutoff),
    );
    let min_ratio = (0..cutoff.len())
        .map(|i| cutoff[i] / lower[i].max(upper[i]))
        .fold(f64::INFINITY, f64::min);
    verdict(
        min_ratio > 100.0 && set.warnings.is_empty(),
        format!(
            "labels {labels:?}, min cutoff/polariton damping ratio {min_ratio:.1}, {} warnings",
            set.warnings.len()
        ),
    )
}

fn coefficient_identity() -> Outcome {
    let models = [
        LosslessModel::new(0.5).unwrap().into(),
        lorentz_fig1(),
        point_scatter_fig1(),
    ];
    let mut worst: f64 = 0.0;
    for model in &models {
        for k in [0.2, 0.7, 1.0, 1.8, 2.9] {
            let m = coefficient_matrix(model, k, 0.0).map_err(|e| e.to_string())?;
            worst = worst.max(m.identity_deviation());
        }
    }
    verdict(worst < 1e-6, format!("max |M(0) - I| {worst:.2e}"))
}

fn commutator() -> Outcome {
    let mut worst: f64 = 0.0;
    for model in [lorentz_fig1(), point_scatter_fig1()] {
        let integral = commutator_integral(&model, 1.0).map_err(|e| e.to_string())?;
        let residues = commutator_residue_sum(&model, 1.0).map_err(|e| e.to_string())?;
        worst = worst.max((integral - residues).abs());
    }
    let weak: DielectricModel = LorentzCutoffModel::new(0.5, 1e-4, Cutoff::Finite(10.0))
        .unwrap()
        .into();
    let limit = commutator_integral(&weak, 1.0).map_err(|e| e.to_string())?;
    verdict(
        worst < 1e-6 && (limit - 1.0).abs() < 1e-3,
        format!("integral vs residues {worst:.2e}, weak-damping value {limit:.8}"),
    )
}

fn coupling_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=3000).map(|i| i as f64 * 0.01).collect();
    let mut x = 30.0;
    while x < 2e4 {
        x *= 1.01;
        grid.push(x);
    }
    grid
}

fn coupling_oracle() -> Outcome {
    let start = Instant::now();
    let lorentz = lorentz_fig1();
    let w0 = lorentz.renormalized_omega0().map_err(|e| e.to_string())?;
    let kappa = |w: f64| 0.01 * 100.0 / (100.0 + w * w);
    let lorentz_tab = TabulatedCoupling::from_fn(
        coupling_grid(),
        |w| 4.0 * kappa(w) * w / (PI * w0),
        1.0,
        1.0,
        0.5,
    )
    .map_err(|e| e.to_string())?;

    let ps = PointScatterCutoffModel::new(0.5, 0.01, 10.0).unwrap();
    let ps_model: DielectricModel = ps.into();
    let w0_ps = ps_model.renormalized_omega0().map_err(|e| e.to_string())?;
    let ps_tab = TabulatedCoupling::from_fn(
        coupling_grid(),
        |w| 4.0 * ps.gamma(w) * w.powi(3) / (3.0 * PI * w0_ps),
        1.0,
        1.0,
        0.5,
    )
    .map_err(|e| e.to_string())?;

    let mut worst: f64 = 0.0;
    for (tab, model) in [(&lorentz_tab, &lorentz), (&ps_tab, &ps_model)] {
        for w in linspace(0.1, 3.0, 20) {
            let a = epsilon_from_coupling(tab, w).map_err(|e| e.to_string())?;
            let b = model
                .epsilon(Complex64::new(w, 0.0))
                .map_err(|e| e.to_string())?;
            worst = worst.max((a - b).norm() / b.norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-6 && secs < 30.0,
        format!("max relative error {worst:.2e}, {secs:.3} s"),
    )
}

fn emission_equilibrium() -> Outcome {
    let p = fig4();
    // Oracle: principal square root of ε(ω₀) = 1 + 12.5i.
    let oracle = Complex64::new(1.0, 12.5).sqrt().re;
    let g = gamma_direct(&p, 800.0).map_err(|e| e.to_string())?;
    verdict(
        (g - oracle).abs() < 1e-3,
        format!("gamma(800) = {g:.6}, Re n = {oracle:.6}"),
    )
}

fn method_agreement() -> Outcome {
    let start = Instant::now();
    let p = fig4();
    let mut worst: f64 = 0.0;
    for t in [5.0, 20.0, 50.0, 100.0, 200.0, 400.0] {
        let d = gamma_direct(&p, t).map_err(|e| e.to_string())?;
        let c = gamma_contour(&p, t).map_err(|e| e.to_string())?;
        worst = worst.max((d - c).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < 1e-3 && secs < 120.0,
        format!("max |direct - contour| {worst:.2e}, {secs:.3} s"),
    )
}

fn asymptotic_regime() -> Outcome {
    let p = fig4();
    let kappa0 = 0.01;
    let eq = p
        .model
        .refractive_index(p.omega_a)
        .map_err(|e| e.to_string())?
        .re;
    let mut worst: f64 = 0.0;
    for t in linspace(3.0 / kappa0, 8.0 / kappa0, 26) {
        let d = gamma_direct(&p, t).map_err(|e| e.to_string())?;
        let a = gamma_asymptotic(&p, t).map_err(|e| e.to_string())?;
        worst = worst.max((d - a).abs() / eq);
    }
    // Envelope of the dominant transient: |ω₁ cut amplitude|·e^{κ₀Δt}√Δt
    // over Δt ∈ [5, 50]/κ₀.
    let mut envelope = Vec::new();
    for t in linspace(5.0 / kappa0, 50.0 / kappa0, 10) {
        let terms = contour_terms(&p, t).map_err(|e| e.to_string())?;
        envelope.push(terms.cut1.norm() * (kappa0 * t).exp() * t.sqrt());
    }
    let hi = envelope.iter().copied().fold(f64::MIN, f64::max);
    let lo = envelope.iter().copied().fold(f64::MAX, f64::min);
    let spread = hi / lo - 1.0;
    verdict(
        worst < 0.05 && spread < 0.10,
        format!("max relative deviation {worst:.2e}, envelope spread {spread:.3}"),
    )
}

fn figure_shape() -> Outcome {
    let p = fig4();
    let kappa0 = 0.01;
    let grid = linspace(0.0, 800.0, 161);
    let curve = emission_curve(&p, &grid, EmissionMethod::Direct).map_err(|e| e.to_string())?;
    let norm = curve.normalized(&p).map_err(|e| e.to_string())?;
    let starts_at_zero = norm[0].abs() < 1e-12;
    let half_time = grid
        .iter()
        .zip(&norm)
        .find(|(_, &g)| g > 0.5)
        .map(|(&t, _)| t)
        .unwrap_or(f64::INFINITY);
    let late_worst = grid
        .iter()
        .zip(&norm)
        .filter(|(&t, _)| t >= 5.0 / kappa0)
        .map(|(_, g)| (g - 1.0).abs())
        .fold(0.0, f64::max);
    verdict(
        starts_at_zero && half_time < 1.0 / kappa0 && late_worst < 0.05,
        format!(
            "start {:.1e}, first > 0.5 at {half_time}, max |g - 1| after 5/kappa0 {late_worst:.2e}",
            norm[0]
        ),
    )
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("lossless analytic suite", lossless_suite),
        ("cutoff-model sum rules", cutoff_sum_rules),
        ("branch structure", branch_structure),
        ("coefficient identity", coefficient_identity),
        ("commutator equality", commutator),
        ("epsilon from coupling", coupling_oracle),
        ("emission equilibrium", emission_equilibrium),
        ("method cross-validation", method_agreement),
        ("asymptotic regime", asymptotic_regime),
        ("figure shape", figure_shape),
    ];
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance checks passed",
        checks.len() - failures,
        checks.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
