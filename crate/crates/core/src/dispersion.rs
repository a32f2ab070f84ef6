//! Complex roots of ε(ω)ω² = k² and their continuation into branches.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::response::{Cutoff, DielectricModel, RationalChi};

/// Residual bound |ω²ε − k²| / (k² + |ω|²) for accepted roots.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;

const SPURIOUS_RESIDUAL: f64 = 1e-5;
const NEWTON_ITERATIONS: usize = 60;

/// Cleared form of ω²ε(ω) − k², coefficients in ascending powers of ω.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionPolynomial {
    pub k: f64,
    pub poly: Poly,
    /// Number of roots that are not zeros of the cleared denominator.
    pub genuine_roots: usize,
}

impl DispersionPolynomial {
    pub fn coefficients(&self) -> &[Complex64] {
        self.poly.coeffs()
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }
}

fn rational(model: &DielectricModel) -> Result<RationalChi> {
    model.rational_chi().ok_or_else(|| {
        Error::Unsupported("dispersion needs a closed-form rational dielectric function".into())
    })
}

/// ω²(den + num) − k²·den: vanishes exactly where ω²ε = k².
fn reduced_polynomial(r: &RationalChi, k: f64) -> Poly {
    let w2 = Poly::from_real(&[0.0, 0.0, 1.0]);
    &(&w2 * &(&r.den + &r.num)) - &r.den.scale(Complex64::new(k * k, 0.0))
}

/// Clears every denominator of the model's literal closed form.
pub fn build_polynomial(model: &DielectricModel, k: f64) -> Result<DispersionPolynomial> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("wavenumber must be >= 0, got {k}")));
    }
    let r = rational(model)?;
    let reduced = reduced_polynomial(&r, k);
    let genuine_roots = reduced.degree();
    Ok(DispersionPolynomial {
        k,
        poly: &reduced * &model.cancelled_factor(),
        genuine_roots,
    })
}

/// A canonical dispersion root with its phase and group velocities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub k: f64,
    pub omega: Complex64,
    pub v_phase: Complex64,
    pub v_group: Complex64,
    /// 1 for a root paired with its mirror image −Ω*, ½ for a purely
    /// imaginary root (which is its own mirror image).
    pub weight: f64,
}

/// d/dω[ω²ε(ω)].
fn dispersion_derivative(model: &DielectricModel, omega: Complex64) -> Result<Complex64> {
    let (eps, deps) = model.epsilon_with_derivative(omega)?;
    Ok(2.0 * omega * eps + omega * omega * deps)
}

/// v_g = 2k / (d/dω[ω²ε]) at ω = Ω.
pub fn group_velocity(model: &DielectricModel, omega: Complex64, k: f64) -> Result<Complex64> {
    let d = dispersion_derivative(model, omega)?;
    if !(d.norm() > 1e-10 * omega.norm().max(k)) {
        return Err(Error::DegenerateRoot {
            re: omega.re,
            im: omega.im,
            derivative: d.norm(),
        });
    }
    Ok(2.0 * k / d)
}

/// Scaled residual of the dispersion relation at ω.
pub fn residual(model: &DielectricModel, omega: Complex64, k: f64) -> Result<f64> {
    let eps = model.epsilon(omega)?;
    Ok((eps * omega * omega - k * k).norm() / (k * k + omega.norm_sqr()))
}

fn newton_polish(reduced: &Poly, mut z: Complex64) -> Complex64 {
    for _ in 0..NEWTON_ITERATIONS {
        let (v, dv) = reduced.eval_with_derivative(z);
        let step = v / dv;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 2.0 * f64::EPSILON * z.norm() {
            break;
        }
    }
    z
}

/// True when the remaining Newton correction on ω²ε − k² is below the
/// floating-point resolution of Ω. Very flat branches (tiny v_g) can have a
/// residual above [`ROOT_RESIDUAL_TOL`] although Ω is exact to the last bits.
fn at_precision_floor(model: &DielectricModel, z: Complex64, k: f64) -> Result<bool> {
    let g = model.epsilon(z)? * z * z - k * k;
    let dg = dispersion_derivative(model, z)?;
    Ok((g / dg).norm() <= 64.0 * f64::EPSILON * z.norm())
}

/// All genuine roots of ω²ε(ω) = k², each polished by Newton iteration.
pub fn all_roots(model: &DielectricModel, k: f64) -> Result<Vec<Complex64>> {
    let poly = build_polynomial(model, k)?;
    let reduced = reduced_polynomial(&rational(model)?, k);
    let mut roots = Vec::with_capacity(poly.genuine_roots);
    let mut worst = 0.0_f64;
    for z in poly.poly.roots()? {
        let before = match residual(model, z, k) {
            Ok(r) => r,
            Err(Error::Singularity { .. }) => continue,
            Err(e) => return Err(e),
        };
        if !(before < SPURIOUS_RESIDUAL) {
            continue;
        }
        let z = newton_polish(&reduced, z);
        let after = residual(model, z, k)?;
        if after >= ROOT_RESIDUAL_TOL && !at_precision_floor(model, z, k)? {
            worst = worst.max(after);
        }
        roots.push(z);
    }
    if !(worst < ROOT_RESIDUAL_TOL) {
        return Err(Error::RootFinding {
            iterations: NEWTON_ITERATIONS,
            max_residual: worst,
        });
    }
    if roots.len() != poly.genuine_roots {
        return Err(Error::IncompleteBranchSet {
            k,
            found: roots.len(),
            expected: poly.genuine_roots,
        });
    }
    Ok(roots)
}

/// Canonical representatives (Re ≥ 0, Im ≤ 0) of the dispersion roots at k.
pub fn dispersion_roots(model: &DielectricModel, k: f64) -> Result<Vec<BranchPoint>> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("wavenumber must be > 0, got {k}")));
    }
    let roots = all_roots(model, k)?;
    let mut points = Vec::new();
    let mut doubled = 0usize;
    for mut z in roots {
        let scale = z.norm();
        if z.im.abs() <= 1e-12 * scale {
            z.im = 0.0;
        }
        let imaginary = z.re.abs() <= 1e-10 * scale;
        if imaginary {
            z.re = 0.0;
        }
        if z.im > 0.0 || (!imaginary && z.re < 0.0) {
            continue;
        }
        let weight = if imaginary { 0.5 } else { 1.0 };
        doubled += if imaginary { 1 } else { 2 };
        points.push(BranchPoint {
            k,
            omega: z,
            v_phase: z / k,
            v_group: group_velocity(model, z, k)?,
            weight,
        });
    }
    let expected = build_polynomial(model, k)?.genuine_roots;
    if doubled != expected {
        return Err(Error::IncompleteBranchSet {
            k,
            found: doubled,
            expected,
        });
    }
    points.sort_by(|a, b| a.omega.re.total_cmp(&b.omega.re));
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchLabel {
    Lower,
    Upper,
    Cutoff,
    Other,
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchLabel::Lower => "lower",
            BranchLabel::Upper => "upper",
            BranchLabel::Cutoff => "cutoff",
            BranchLabel::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub label: BranchLabel,
    pub points: Vec<BranchPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSet {
    pub k_grid: Vec<f64>,
    pub branches: Vec<Branch>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Largest accepted step |ΔΩ| between neighbouring k, relative to
    /// max(|Ω|, 1).
    pub jump_threshold: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            jump_threshold: 0.5,
        }
    }
}

impl BranchSet {
    /// Canonical roots at `k_grid[i]`, in no particular order.
    pub fn roots_at(&self, i: usize) -> Vec<BranchPoint> {
        let k = self.k_grid[i];
        self.branches
            .iter()
            .filter_map(|b| b.points.iter().find(|p| p.k == k).copied())
            .collect()
    }

    pub fn branch(&self, label: BranchLabel) -> Option<&Branch> {
        self.branches.iter().find(|b| b.label == label)
    }

    /// Links per-k root sets into continuous tracks.
    pub fn assemble(
        model: &DielectricModel,
        k_grid: &[f64],
        roots: Vec<Vec<BranchPoint>>,
        opts: &TraceOptions,
    ) -> BranchSet {
        let mut warnings = Vec::new();
        let mut branches: Vec<Branch> = Vec::new();
        let mut open: Vec<usize> = Vec::new();
        let cutoff_scale = match model {
            DielectricModel::Lorentz(m) => m.cutoff().finite(),
            DielectricModel::PointScatter(m) => Some(m.cutoff()),
            _ => None,
        };
        let mut roots = roots.into_iter();
        if let Some(first) = roots.next() {
            let (mut cut, mut rest): (Vec<_>, Vec<_>) = first
                .into_iter()
                .partition(|p| cutoff_scale.is_some_and(|s| p.omega.norm() > 0.3 * s));
            rest.sort_by(|a, b| a.omega.re.total_cmp(&b.omega.re));
            cut.sort_by(|a, b| a.omega.norm().total_cmp(&b.omega.norm()));
            for (i, p) in rest.into_iter().enumerate() {
                let label = match i {
                    0 => BranchLabel::Lower,
                    1 => BranchLabel::Upper,
                    _ => BranchLabel::Other,
                };
                branches.push(Branch {
                    label,
                    points: vec![p],
                });
            }
            for (i, p) in cut.into_iter().enumerate() {
                branches.push(Branch {
                    label: if i == 0 {
                        BranchLabel::Cutoff
                    } else {
                        BranchLabel::Other
                    },
                    points: vec![p],
                });
            }
            open = (0..branches.len()).collect();
        }

        for (step, next) in roots.enumerate() {
            let k = k_grid[step + 1];
            let previous: Vec<Complex64> = open
                .iter()
                .map(|&b| {
                    branches[b]
                        .points
                        .last()
                        .map(|p| p.omega)
                        .unwrap_or_default()
                })
                .collect();
            let targets: Vec<Complex64> = next.iter().map(|p| p.omega).collect();
            let (assignment, ambiguous) = best_matching(&previous, &targets);
            if ambiguous {
                warnings.push(format!("ambiguous branch matching near k = {k}"));
            }
            if previous.len() != targets.len() {
                warnings.push(format!(
                    "root count changed from {} to {} at k = {k}",
                    previous.len(),
                    targets.len()
                ));
            }
            let mut still_open = Vec::new();
            let mut used = vec![false; next.len()];
            for (slot, &branch) in open.iter().enumerate() {
                if let Some(j) = assignment[slot] {
                    let jump = (targets[j] - previous[slot]).norm();
                    if jump > opts.jump_threshold * previous[slot].norm().max(1.0) {
                        warnings.push(format!(
                            "branch {} jumps by {jump:.3e} at k = {k}",
                            branches[branch].label
                        ));
                    }
                    branches[branch].points.push(next[j]);
                    used[j] = true;
                    still_open.push(branch);
                }
            }
            for (j, p) in next.iter().enumerate() {
                if !used[j] {
                    branches.push(Branch {
                        label: BranchLabel::Other,
                        points: vec![*p],
                    });
                    still_open.push(branches.len() - 1);
                }
            }
            open = still_open;
        }
        BranchSet {
            k_grid: k_grid.to_vec(),
            branches,
            warnings,
        }
    }
}

/// Minimum-cost assignment of `from` onto `to` by exhaustive search over
/// permutations (root counts are small). Also reports whether the runner-up
/// assignment is nearly as good.
fn best_matching(from: &[Complex64], to: &[Complex64]) -> (Vec<Option<usize>>, bool) {
    let n = from.len();
    let m = to.len();
    let mut best = (f64::INFINITY, vec![None; n]);
    let mut second = f64::INFINITY;
    let mut current = vec![None; n];
    let mut used = vec![false; m];
    fn search(
        i: usize,
        cost: f64,
        from: &[Complex64],
        to: &[Complex64],
        current: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut (f64, Vec<Option<usize>>),
        second: &mut f64,
    ) {
        if i == from.len() {
            if cost < best.0 {
                *second = best.0;
                *best = (cost, current.clone());
            } else if cost < *second {
                *second = cost;
            }
            return;
        }
        let unmatched_allowed = from.len() > to.len();
        for j in 0..to.len() {
            if !used[j] {
                used[j] = true;
                current[i] = Some(j);
                let d = (from[i] - to[j]).norm_sqr();
                search(i + 1, cost + d, from, to, current, used, best, second);
                used[j] = false;
            }
        }
        if unmatched_allowed {
            current[i] = None;
            search(i + 1, cost + 1e300, from, to, current, used, best, second);
        }
        current[i] = None;
    }
    search(
        0,
        0.0,
        from,
        to,
        &mut current,
        &mut used,
        &mut best,
        &mut second,
    );
    let ambiguous = second.is_finite() && second < 1.1 * best.0 + f64::MIN_POSITIVE && n > 1;
    (best.1, ambiguous)
}

/// Canonical roots at each k, then continuity matching.
pub fn trace_branches(
    model: &DielectricModel,
    k_grid: &[f64],
    opts: &TraceOptions,
) -> Result<BranchSet> {
    check_grid(k_grid)?;
    let roots = k_grid
        .iter()
        .map(|&k| dispersion_roots(model, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(BranchSet::assemble(model, k_grid, roots, opts))
}

pub(crate) fn check_grid(k_grid: &[f64]) -> Result<()> {
    if k_grid.is_empty() || k_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "k grid must be non-empty and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Genuine root count of the dispersion relation for a model.
pub fn expected_root_count(model: &DielectricModel) -> Result<usize> {
    Ok(build_polynomial(model, 1.0)?.genuine_roots)
}

/// Whether a cutoff branch exists for this model.
pub fn has_cutoff_branch(model: &DielectricModel) -> bool {
    matches!(
        model,
        DielectricModel::Lorentz(m) if matches!(m.cutoff(), Cutoff::Finite(_))
    ) || matches!(model, DielectricModel::PointScatter(_))
}
