//! Transient coefficient matrix M_mn(t) over the fields (E, A, X, P) and the
//! D̃-commutator identity.
//!
//! Units ε₀ = α = c = 1, so every entry is a plain number.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::{dispersion_roots, BranchPoint};
use crate::error::{Error, Result};
use crate::quad::{integrate_to_infinity, integrate_with_breaks, QuadOptions};
use crate::response::DielectricModel;

pub const FIELDS: [&str; 4] = ["E", "A", "X", "P"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMatrix {
    pub t: f64,
    pub k: f64,
    /// Rows and columns ordered (E, A, X, P).
    pub m: [[f64; 4]; 4],
}

impl CoefficientMatrix {
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest entry-wise deviation from the identity.
    pub fn identity_deviation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, row) in self.m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    pub fn product(&self, other: &CoefficientMatrix) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|l| self.m[i][l] * other.m[l][j]).sum();
            }
        }
        out
    }
}

fn simple_roots(model: &DielectricModel, k: f64) -> Result<Vec<BranchPoint>> {
    if model.omega_c() <= 0.0 {
        return Err(Error::Unsupported(
            "coefficient matrix needs a coupled medium (omega_c > 0)".into(),
        ));
    }
    dispersion_roots(model, k).map_err(|e| match e {
        Error::DegenerateRoot { re, im, .. } => Error::Unsupported(format!(
            "degenerate dispersion root at omega = {re} {im:+}i"
        )),
        other => other,
    })
}

/// M(t) from precomputed canonical roots at k.
pub fn coefficient_matrix_from_roots(
    roots: &[BranchPoint],
    omega_c: f64,
    k: f64,
    t: f64,
) -> CoefficientMatrix {
    let wc2 = omega_c * omega_c;
    let sum = |f: &dyn Fn(Complex64, Complex64) -> Complex64| -> Complex64 {
        roots
            .iter()
            .map(|p| {
                let phase = (Complex64::new(0.0, -1.0) * p.omega * t).exp();
                f(p.v_phase, p.v_group) * phase * p.weight
            })
            .sum()
    };
    let bracket = |vp: Complex64| 1.0 - vp * vp + wc2 / (k * k);
    let asym = |vp: Complex64| vp - 1.0 / vp;

    let ee = sum(&|vp, vg| vp * vg).re;
    let ea = -k * sum(&|vp, vg| vp * vp * vg).im;
    let ex = -(k * k / wc2) * sum(&|vp, vg| vp * vg * bracket(vp)).re;
    let ep = k * sum(&|vp, vg| vg * (1.0 - vp * vp)).im;
    let ae = sum(&|_, vg| vg).im / k;
    let ax = -(k / wc2) * sum(&|vp, vg| vg * bracket(vp)).im;
    let ap = sum(&|vp, vg| vg * asym(vp)).re;
    let xx = -(k * k / wc2) * sum(&|vp, vg| vg * asym(vp) * bracket(vp)).re;
    let xp = -k * sum(&|vp, vg| vg * asym(vp) * asym(vp)).im;
    let px = (k.powi(3) / (wc2 * wc2)) * sum(&|vp, vg| vg * bracket(vp) * bracket(vp)).im;

    CoefficientMatrix {
        t,
        k,
        m: [
            [ee, ea, ex, ep],
            [ae, ee, ax, ap],
            [ap, ep, xx, xp],
            [ax, ex, px, xx],
        ],
    }
}

pub fn coefficient_matrix(model: &DielectricModel, k: f64, t: f64) -> Result<CoefficientMatrix> {
    let roots = simple_roots(model, k)?;
    Ok(coefficient_matrix_from_roots(&roots, model.omega_c(), k, t))
}

/// M(t) at several times, sharing one root solve.
pub fn coefficient_series(
    model: &DielectricModel,
    k: f64,
    times: &[f64],
) -> Result<Vec<CoefficientMatrix>> {
    let roots = simple_roots(model, k)?;
    Ok(times
        .iter()
        .map(|&t| coefficient_matrix_from_roots(&roots, model.omega_c(), k, t))
        .collect())
}

/// Σⱼ Re|vₚ,ⱼ v_g,ⱼ| e^{Im Ωⱼ t}: an upper bound on |M_EE(t)|.
pub fn decay_envelope(roots: &[BranchPoint], t: f64) -> f64 {
    roots
        .iter()
        .map(|p| p.weight * (p.v_phase * p.v_group).norm() * (p.omega.im * t).exp())
        .sum()
}

/// Σⱼ Re[ε(−Ωⱼ) vₚ,ⱼ v_g,ⱼ], with ε continued into the upper half plane.
pub fn commutator_residue_sum(model: &DielectricModel, k: f64) -> Result<f64> {
    let roots = simple_roots(model, k)?;
    roots.iter().try_fold(0.0, |acc, p| {
        let eps = model.epsilon(-p.omega)?;
        Ok(acc + p.weight * (eps * p.v_phase * p.v_group).re)
    })
}

/// (2/π)∫₀^∞ ε_r ε_i ω³ / |εω² − k²|² dω.
pub fn commutator_integral(model: &DielectricModel, k: f64) -> Result<f64> {
    if !model.is_lossy() {
        return Err(Error::Unsupported(
            "the commutator integral needs an absorbing medium".into(),
        ));
    }
    let roots = simple_roots(model, k)?;
    let integrand = |w: f64| -> f64 {
        match model.epsilon(Complex64::new(w, 0.0)) {
            Ok(eps) => {
                let d = eps * w * w - k * k;
                eps.re * eps.im * w.powi(3) / d.norm_sqr()
            }
            Err(_) => 0.0,
        }
    };

    // Resolve the Lorentzian peaks at each branch frequency.
    let mut breaks = vec![0.0];
    let mut top: f64 = 2.0;
    for p in &roots {
        let (centre, width) = (p.omega.re, p.omega.im.abs().max(1e-12));
        top = top.max(centre + p.omega.norm());
        for m in [1.0, 4.0, 20.0, 100.0] {
            for x in [centre - m * width, centre + m * width] {
                if x > 0.0 {
                    breaks.push(x);
                }
            }
        }
    }
    let top = 4.0 * top;
    breaks.retain(|&x| x < top);
    breaks.push(top);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_intervals: 20_000,
    };
    let body = integrate_with_breaks(integrand, &breaks, &opts)?;
    let tail = integrate_to_infinity(integrand, top, &opts)?;
    Ok(2.0 / PI * (body.value + tail.value))
}
