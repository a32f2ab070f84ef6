//! Velocity sum rules over the canonical dispersion roots.
//!
//! Each rule is a weighted branch sum Σⱼ wⱼ f(v_g,j, v_p,j); purely
//! imaginary roots carry weight ½ (see [`BranchPoint::weight`]).

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::{check_grid, dispersion_roots, expected_root_count, BranchPoint};
use crate::error::{Error, Result};
use crate::response::DielectricModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SumRuleId {
    /// Σ Re(v_g v_p) = 1
    GroupPhase,
    /// Σ Re(v_g / v_p) = 1
    HuttnerBarnett,
    /// Σ Im(v_g v_p^{2q}) = 0
    Imaginary(i8),
    /// Σ Re(v_g / v_p³) = ε(0)
    Static,
    /// Σ Re(v_g v_p³) = 1 + (ω_lim/k)²
    HighFrequency,
}

impl SumRuleId {
    pub const ALL: [SumRuleId; 8] = [
        SumRuleId::GroupPhase,
        SumRuleId::HuttnerBarnett,
        SumRuleId::Imaginary(-1),
        SumRuleId::Imaginary(0),
        SumRuleId::Imaginary(1),
        SumRuleId::Imaginary(2),
        SumRuleId::Static,
        SumRuleId::HighFrequency,
    ];

    pub fn name(self) -> String {
        match self {
            SumRuleId::GroupPhase => "S_gp".into(),
            SumRuleId::HuttnerBarnett => "S_HB".into(),
            SumRuleId::Imaginary(q) => format!("I_{q}"),
            SumRuleId::Static => "S_static".into(),
            SumRuleId::HighFrequency => "S_highfreq".into(),
        }
    }

    /// Whether the rule's derivation holds for this model, with the reason
    /// when it does not.
    pub fn applicability(self, model: &DielectricModel) -> std::result::Result<(), String> {
        match self {
            SumRuleId::Imaginary(2) => {
                let r = model
                    .rational_chi()
                    .ok_or_else(|| "tabulated response has no closed-form tail".to_string())?;
                let w2 = crate::poly::Poly::from_real(&[0.0, 0.0, 1.0]);
                let wc2 = Complex64::new(model.omega_lim().powi(2), 0.0);
                let tail = &(&w2 * &r.num) + &r.den.scale(wc2);
                let decay = r.den.degree() as i64 - tail.effective_degree(1e-12) as i64;
                if decay >= 2 {
                    Ok(())
                } else {
                    Err("ω²χ(ω) + ω_lim² does not fall off faster than 1/ω".into())
                }
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SumRuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumRuleReport {
    pub rule: SumRuleId,
    pub k: f64,
    pub lhs: f64,
    pub target: f64,
    pub deviation: f64,
}

fn weighted_sum(roots: &[BranchPoint], f: impl Fn(&BranchPoint) -> Complex64) -> Complex64 {
    roots.iter().map(|p| f(p) * p.weight).sum()
}

/// Branch sum and target for one rule at one k.
pub fn evaluate(
    rule: SumRuleId,
    roots: &[BranchPoint],
    model: &DielectricModel,
    k: f64,
) -> Result<SumRuleReport> {
    let expected = expected_root_count(model)?;
    let found = roots
        .iter()
        .map(|p| (2.0 * p.weight).round() as usize)
        .sum();
    if found != expected {
        return Err(Error::IncompleteBranchSet { k, found, expected });
    }
    let (lhs, target) = match rule {
        SumRuleId::GroupPhase => (weighted_sum(roots, |p| p.v_group * p.v_phase).re, 1.0),
        SumRuleId::HuttnerBarnett => (weighted_sum(roots, |p| p.v_group / p.v_phase).re, 1.0),
        SumRuleId::Imaginary(q) => (
            weighted_sum(roots, |p| p.v_group * p.v_phase.powi(2 * q as i32)).im,
            0.0,
        ),
        SumRuleId::Static => {
            let eps0 = model.epsilon(Complex64::new(0.0, 0.0))?;
            (
                weighted_sum(roots, |p| p.v_group / p.v_phase.powi(3)).re,
                eps0.re,
            )
        }
        SumRuleId::HighFrequency => (
            weighted_sum(roots, |p| p.v_group * p.v_phase.powi(3)).re,
            1.0 + (model.omega_lim() / k).powi(2),
        ),
    };
    Ok(SumRuleReport {
        rule,
        k,
        lhs,
        target,
        deviation: (lhs - target).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub rule: SumRuleId,
    pub max_deviation: f64,
    pub worst_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub reports: Vec<SumRuleReport>,
    pub summary: Vec<RuleSummary>,
    /// Rules not evaluated for this model, with the reason.
    pub skipped: Vec<(SumRuleId, String)>,
}

impl FullReport {
    pub fn max_deviation(&self, rule: SumRuleId) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.rule == rule)
            .map(|s| s.max_deviation)
    }

    /// Collects per-k reports that were computed elsewhere (possibly in
    /// parallel) into a report with per-rule maxima.
    pub fn from_reports(reports: Vec<SumRuleReport>, skipped: Vec<(SumRuleId, String)>) -> Self {
        let mut summary: Vec<RuleSummary> = Vec::new();
        for r in &reports {
            match summary.iter_mut().find(|s| s.rule == r.rule) {
                Some(s) => {
                    if r.deviation > s.max_deviation {
                        s.max_deviation = r.deviation;
                        s.worst_k = r.k;
                    }
                }
                None => summary.push(RuleSummary {
                    rule: r.rule,
                    max_deviation: r.deviation,
                    worst_k: r.k,
                }),
            }
        }
        FullReport {
            reports,
            summary,
            skipped,
        }
    }
}

/// Rules that apply to `model`, and the ones that are skipped with reasons.
pub fn applicable_rules(model: &DielectricModel) -> (Vec<SumRuleId>, Vec<(SumRuleId, String)>) {
    let mut rules = Vec::new();
    let mut skipped = Vec::new();
    for rule in SumRuleId::ALL {
        match rule.applicability(model) {
            Ok(()) => rules.push(rule),
            Err(reason) => skipped.push((rule, reason)),
        }
    }
    (rules, skipped)
}

/// Every applicable rule at one k.
pub fn report_at(
    model: &DielectricModel,
    k: f64,
    rules: &[SumRuleId],
) -> Result<Vec<SumRuleReport>> {
    let roots = dispersion_roots(model, k)?;
    rules
        .iter()
        .map(|&r| evaluate(r, &roots, model, k))
        .collect()
}

/// Every applicable rule at every k of the grid.
pub fn full_report(model: &DielectricModel, k_grid: &[f64]) -> Result<FullReport> {
    check_grid(k_grid)?;
    let (rules, skipped) = applicable_rules(model);
    let mut reports = Vec::with_capacity(k_grid.len() * rules.len());
    for &k in k_grid {
        reports.extend(report_at(model, k, &rules)?);
    }
    Ok(FullReport::from_reports(reports, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::{Cutoff, LorentzCutoffModel, LosslessModel, PointScatterCutoffModel};
    use proptest::prelude::*;

    fn lossless() -> DielectricModel {
        LosslessModel::new(0.5).unwrap().into()
    }

    fn lorentz() -> DielectricModel {
        LorentzCutoffModel::new(0.5, 0.01, Cutoff::Finite(10.0))
            .unwrap()
            .into()
    }

    fn lorentz_infinite() -> DielectricModel {
        LorentzCutoffModel::new(0.5, 0.01, Cutoff::Infinite)
            .unwrap()
            .into()
    }

    fn point_scatter() -> DielectricModel {
        PointScatterCutoffModel::new(0.5, 0.01, 10.0)
            .unwrap()
            .into()
    }

    #[test]
    fn lossless_high_frequency_rule() {
        let r = report_at(&lossless(), 1.0, &[SumRuleId::HighFrequency]).unwrap();
        assert!((r[0].lhs - 1.25).abs() < 1e-12);
        assert_eq!(r[0].target, 1.25);
    }

    #[test]
    fn lossless_imaginary_rules_vanish_exactly() {
        for k in [0.3, 1.0, 2.5] {
            for q in [-1, 0, 1, 2] {
                let r = report_at(&lossless(), k, &[SumRuleId::Imaginary(q)]).unwrap();
                assert_eq!(r[0].lhs, 0.0);
            }
        }
    }

    #[test]
    fn lorentz_fig1_rules() {
        let r = report_at(&lorentz(), 1.0, &SumRuleId::ALL).unwrap();
        for rep in r {
            assert!(rep.deviation < 1e-6, "{rep:?}");
        }
        let s = report_at(&lorentz(), 1.0, &[SumRuleId::Static]).unwrap();
        assert!((s[0].target - 1.25).abs() < 1e-12);
    }

    #[test]
    fn i2_is_skipped_without_fast_decay() {
        let (_, skipped) = applicable_rules(&lorentz_infinite());
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].0, SumRuleId::Imaginary(2));
        for m in [lossless(), lorentz(), point_scatter()] {
            assert!(applicable_rules(&m).1.is_empty());
        }
    }

    #[test]
    fn missing_branch_is_reported() {
        let mut roots = dispersion_roots(&lorentz(), 1.0).unwrap();
        roots.pop();
        assert!(matches!(
            evaluate(SumRuleId::GroupPhase, &roots, &lorentz(), 1.0),
            Err(Error::IncompleteBranchSet { .. })
        ));
    }

    #[test]
    fn grid_reports() {
        let grid: Vec<f64> = (0..50).map(|i| 0.1 + 2.9 * i as f64 / 49.0).collect();
        let rep = full_report(&lossless(), &grid).unwrap();
        assert!(
            rep.summary.iter().all(|s| s.max_deviation < 1e-10),
            "{:?}",
            rep.summary
        );
        let rep = full_report(&lorentz(), &grid).unwrap();
        assert!(
            rep.summary.iter().all(|s| s.max_deviation < 1e-6),
            "{:?}",
            rep.summary
        );
        let rep = full_report(&point_scatter(), &grid).unwrap();
        assert!(rep.max_deviation(SumRuleId::GroupPhase).unwrap() < 1e-6);
        assert!(rep.max_deviation(SumRuleId::HuttnerBarnett).unwrap() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn universal_rules_hold(k in 0.05f64..5.0, kappa in 1e-3f64..0.1, wc in 0.1f64..2.0, cut in 3.0f64..30.0) {
            let models: [DielectricModel; 3] = [
                LorentzCutoffModel::new(wc, kappa, Cutoff::Finite(cut)).unwrap().into(),
                LorentzCutoffModel::new(wc, kappa, Cutoff::Infinite).unwrap().into(),
                PointScatterCutoffModel::new(wc, kappa, cut).unwrap().into(),
            ];
            for m in models {
                let rules = [
                    SumRuleId::GroupPhase, SumRuleId::HuttnerBarnett, SumRuleId::Imaginary(-1),
                    SumRuleId::Imaginary(0), SumRuleId::Imaginary(1), SumRuleId::HighFrequency,
                    SumRuleId::Static,
                ];
                for rep in report_at(&m, k, &rules).unwrap() {
                    prop_assert!(rep.deviation < 1e-6 * rep.target.abs().max(1.0), "{:?} {:?}", m, rep);
                }
            }
        }

        #[test]
        fn dropping_a_polariton_branch_breaks_the_rule(k in 0.2f64..3.0) {
            for m in [lorentz(), point_scatter(), lossless()] {
                let roots = dispersion_roots(&m, k).unwrap();
                for skip in 0..roots.len() {
                    if roots[skip].omega.norm() > 3.0 {
                        continue;
                    }
                    let partial: f64 = roots.iter().enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, p)| p.weight * (p.v_group * p.v_phase).re)
                        .sum();
                    prop_assert!((partial - 1.0).abs() > 1e-3);
                }
            }
        }
    }
}
