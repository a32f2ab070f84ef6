use polariton::dispersion::{dispersion_roots, BranchSet, TraceOptions};
use polariton::emission::{self, EmissionMethod};
use polariton::sum_rules::{applicable_rules, report_at, SumRuleId};
use polariton::transients::{
    coefficient_matrix, coefficient_series, commutator_integral, commutator_residue_sum, FIELDS,
};
use polariton::{Cutoff, DielectricModel};
use rayon::prelude::*;

use crate::config::{Analysis, ConfigError, RunConfig};
use crate::output::{Cell, Table};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(polariton::Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<polariton::Error> for RunError {
    fn from(e: polariton::Error) -> Self {
        RunError::Numerical(e)
    }
}

pub struct Outcome {
    pub table: Table,
    /// Set by `validate` when any check exceeds its tolerance.
    pub failed: bool,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn table(table: Table) -> Self {
        Outcome {
            table,
            failed: false,
            warnings: Vec::new(),
        }
    }
}

pub fn run(
    analysis: Analysis,
    config: &RunConfig,
    tolerance: Option<f64>,
) -> Result<Outcome, RunError> {
    if let Some(selected) = config.analysis {
        if selected != analysis {
            return Err(ConfigError(format!(
                "config is for `{selected}` but `{analysis}` was requested"
            ))
            .into());
        }
    }
    let model = config.model()?;
    match analysis {
        Analysis::Dispersion => dispersion(&model, &config.k_values()?),
        Analysis::Sumrules => sum_rules(&model, &config.k_values()?),
        Analysis::Coeffs => coeffs(&model, &config.k_values()?, &config.t_values()?),
        Analysis::Emission => emission(config),
        Analysis::Validate => {
            let tol = tolerance.or(config.tolerance).unwrap_or(DEFAULT_TOLERANCE);
            validate(config, &model, tol)
        }
    }
}

fn dispersion(model: &DielectricModel, k_grid: &[f64]) -> Result<Outcome, RunError> {
    let roots = k_grid
        .par_iter()
        .map(|&k| dispersion_roots(model, k))
        .collect::<Result<Vec<_>, _>>()?;
    let set = BranchSet::assemble(model, k_grid, roots, &TraceOptions::default());
    let mut table = Table::new(&[
        "k",
        "branch_label",
        "re_omega",
        "im_omega",
        "re_vp",
        "im_vp",
        "re_vg",
        "im_vg",
    ]);
    for &k in k_grid {
        for branch in &set.branches {
            if let Some(p) = branch.points.iter().find(|p| p.k == k) {
                table.push(vec![
                    k.into(),
                    branch.label.to_string().into(),
                    p.omega.re.into(),
                    p.omega.im.into(),
                    p.v_phase.re.into(),
                    p.v_phase.im.into(),
                    p.v_group.re.into(),
                    p.v_group.im.into(),
                ]);
            }
        }
    }
    Ok(Outcome {
        table,
        failed: false,
        warnings: set.warnings,
    })
}

fn sum_rules(model: &DielectricModel, k_grid: &[f64]) -> Result<Outcome, RunError> {
    let (rules, skipped) = applicable_rules(model);
    let reports = k_grid
        .par_iter()
        .map(|&k| report_at(model, k, &rules))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["k", "rule", "lhs", "target", "deviation"]);
    for r in reports.into_iter().flatten() {
        table.push(vec![
            r.k.into(),
            rule_name(r.rule).into(),
            r.lhs.into(),
            r.target.into(),
            r.deviation.into(),
        ]);
    }
    let mut out = Outcome::table(table);
    out.warnings = skipped
        .into_iter()
        .map(|(rule, why)| format!("{} skipped: {why}", rule_name(rule)))
        .collect();
    Ok(out)
}

fn rule_name(rule: SumRuleId) -> String {
    match rule {
        SumRuleId::Imaginary(q) => format!("I_{q}"),
        other => other.name(),
    }
}

fn coeffs(model: &DielectricModel, k_grid: &[f64], t_grid: &[f64]) -> Result<Outcome, RunError> {
    let series = k_grid
        .par_iter()
        .map(|&k| coefficient_series(model, k, t_grid))
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = vec!["k".to_string(), "t".to_string()];
    for row in FIELDS {
        for col in FIELDS {
            header.push(format!("M_{row}{col}"));
        }
    }
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    for m in series.into_iter().flatten() {
        let mut row: Vec<Cell> = vec![m.k.into(), m.t.into()];
        row.extend(m.m.iter().flatten().map(|&x| Cell::Num(x)));
        table.push(row);
    }
    Ok(Outcome::table(table))
}

fn emission(config: &RunConfig) -> Result<Outcome, RunError> {
    let (params, method) = config
        .emission_params()?
        .ok_or_else(|| ConfigError("missing [emission] section".into()))?;
    let t_grid = config.t_values()?;
    if t_grid[0] < 0.0 {
        return Err(ConfigError("t_grid must be non-negative".into()).into());
    }
    let values = t_grid
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(0.0)
            } else {
                emission::gamma(&params, t, method)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["delta_t", "gamma_over_gamma0"]);
    for (t, g) in t_grid.into_iter().zip(values) {
        table.push(vec![t.into(), g.into()]);
    }
    Ok(Outcome::table(table))
}

struct Check {
    name: String,
    parameter: f64,
    deviation: f64,
}

fn validate(config: &RunConfig, model: &DielectricModel, tol: f64) -> Result<Outcome, RunError> {
    let k_grid = config.k_values()?;
    let (rules, skipped) = applicable_rules(model);
    let mut warnings: Vec<String> = skipped
        .into_iter()
        .map(|(rule, why)| format!("{} skipped: {why}", rule_name(rule)))
        .collect();

    // Without a cutoff M_PX(0) = −2κ₀/ω_c² rather than 0.
    let markovian = matches!(model, DielectricModel::Lorentz(m) if m.cutoff() == Cutoff::Infinite);
    if markovian {
        warnings.push(
            "identity_t0 skipped: the infinite-cutoff model has M_PX(0) = -2 kappa0/omega_c^2"
                .into(),
        );
    }

    let per_k = k_grid
        .par_iter()
        .map(|&k| -> Result<Vec<Check>, RunError> {
            let mut checks: Vec<Check> = report_at(model, k, &rules)?
                .into_iter()
                .map(|r| Check {
                    name: rule_name(r.rule),
                    parameter: k,
                    deviation: r.deviation,
                })
                .collect();
            if matches!(model, DielectricModel::Vacuum) {
                return Ok(checks);
            }
            if !markovian {
                checks.push(Check {
                    name: "identity_t0".into(),
                    parameter: k,
                    deviation: coefficient_matrix(model, k, 0.0)?.identity_deviation(),
                });
            }
            let residues = commutator_residue_sum(model, k)?;
            let deviation = if model.is_lossy() {
                (commutator_integral(model, k)? - residues).abs()
            } else {
                (residues - 1.0).abs()
            };
            checks.push(Check {
                name: "commutator".into(),
                parameter: k,
                deviation,
            });
            Ok(checks)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut checks: Vec<Check> = per_k.into_iter().flatten().collect();

    match (config.emission_params()?, &config.t_grid) {
        (Some((params, _)), Some(_)) if markovian => {
            let times: Vec<f64> = config.t_values()?.into_iter().filter(|&t| t > 0.0).collect();
            let agreement = times
                .par_iter()
                .map(|&t| -> Result<Check, RunError> {
                    let d = emission::gamma(&params, t, EmissionMethod::Direct)?;
                    let c = emission::gamma(&params, t, EmissionMethod::Contour)?;
                    Ok(Check {
                        name: "direct_vs_contour".into(),
                        parameter: t,
                        deviation: (d - c).abs(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            checks.extend(agreement);
        }
        (Some(_), _) => warnings.push(
            "emission method agreement skipped: needs a t_grid and the infinite-cutoff Lorentz model"
                .into(),
        ),
        _ => {}
    }

    let mut table = Table::new(&["check", "parameter", "deviation", "tolerance", "pass"]);
    let mut failed = false;
    for c in checks {
        let pass = c.deviation <= tol;
        failed |= !pass;
        table.push(vec![
            c.name.into(),
            c.parameter.into(),
            c.deviation.into(),
            tol.into(),
            pass.into(),
        ]);
    }
    Ok(Outcome {
        table,
        failed,
        warnings,
    })
}
