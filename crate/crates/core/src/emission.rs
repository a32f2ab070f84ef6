//! Time-dependent spontaneous emission rate Γ(t)/Γ₀ of an atom embedded in
//! an absorbing dielectric.
//!
//! Γ/Γ₀ = (1/π) Re ∫₀^∞ (ω/ω_A)³ n(ω) C(ω) sin[(ω − ω_A)Δt]/(ω − ω_A) dω with
//! the convergence factor C(ω) = Ω⁴/(Ω⁴ + ω⁴). Three evaluations are offered:
//! direct oscillatory quadrature, contour deformation around the branch cuts
//! of n = √ε, and the leading large-Δt asymptotic form.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::response::{Cutoff, DielectricModel};

/// Extra segments used for the alternating tail of the direct integral.
const TAIL_SEGMENTS: usize = 16;
/// Laplace-type integrals are truncated where e^{−λΔt} < e^{−LAPLACE_CUT}.
const LAPLACE_CUT: f64 = 60.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmissionMethod {
    Direct,
    Contour,
    Asymptotic,
}

impl fmt::Display for EmissionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmissionMethod::Direct => "direct",
            EmissionMethod::Contour => "contour",
            EmissionMethod::Asymptotic => "asymptotic",
        })
    }
}

impl FromStr for EmissionMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(EmissionMethod::Direct),
            "contour" => Ok(EmissionMethod::Contour),
            "asymptotic" => Ok(EmissionMethod::Asymptotic),
            other => Err(Error::Domain(format!("unknown emission method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionParams {
    pub omega_a: f64,
    pub model: DielectricModel,
    pub conv_cutoff: f64,
    /// Excitation time; all public functions take Δt = t − t₀.
    pub t0: f64,
}

impl EmissionParams {
    pub fn new(model: DielectricModel, omega_a: f64, conv_cutoff: f64) -> Result<Self> {
        if !(omega_a > 0.0) || !omega_a.is_finite() {
            return Err(Error::InvalidModel(format!(
                "omega_A must be > 0, got {omega_a}"
            )));
        }
        if !(conv_cutoff > omega_a) || !conv_cutoff.is_finite() {
            return Err(Error::InvalidModel(format!(
                "convergence cutoff {conv_cutoff} must lie well above omega_A = {omega_a}"
            )));
        }
        if matches!(model, DielectricModel::Tabulated(_)) {
            return Err(Error::Unsupported(
                "emission rates need a closed-form dielectric function".into(),
            ));
        }
        Ok(EmissionParams {
            omega_a,
            model,
            conv_cutoff,
            t0: 0.0,
        })
    }

    fn conv_factor(&self, omega: Complex64) -> Complex64 {
        let o4 = self.conv_cutoff.powi(4);
        o4 / (o4 + omega.powi(4))
    }

    /// Γ(∞)/Γ₀ = C(ω_A) Re n(ω_A).
    pub fn equilibrium(&self) -> Result<f64> {
        Ok(self.conv_factor(c(self.omega_a, 0.0)).re
            * self.model.refractive_index(self.omega_a)?.re)
    }
}

fn check_delta_t(delta_t: f64) -> Result<()> {
    if delta_t >= 0.0 && delta_t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "delta_t must be >= 0, got {delta_t}"
        )))
    }
}

/// sin(xT)/x, continuous through x = 0.
fn sin_kernel(x: f64, t: f64) -> f64 {
    let xt = x * t;
    if xt.abs() < 1e-4 {
        t * (1.0 - xt * xt / 6.0)
    } else {
        xt.sin() / x
    }
}

/// Direct quadrature along the real frequency axis.
///
/// The axis is split at the sine nodes ω_A + mπ/Δt; segments up to 4Ω_conv
/// are integrated adaptively and the remaining alternating segment series is
/// summed by repeated averaging of its partial sums.
pub fn gamma_direct(params: &EmissionParams, delta_t: f64) -> Result<f64> {
    check_delta_t(delta_t)?;
    if delta_t == 0.0 {
        return Ok(0.0);
    }
    let wa = params.omega_a;
    let integrand = |w: f64| -> f64 {
        let n = match params.model.refractive_index(w) {
            Ok(n) => n,
            Err(_) => return 0.0,
        };
        let f = (w / wa).powi(3) * n * params.conv_factor(c(w, 0.0));
        f.re * sin_kernel(w - wa, delta_t)
    };

    let spacing = PI / delta_t;
    let first = -(wa / spacing).floor();
    let node = |m: f64| wa + m * spacing;
    let x_body = 4.0 * params.conv_cutoff;
    let m_body = ((x_body - wa) / spacing).ceil().max(first + 1.0);

    let mut breaks = vec![0.0];
    let mut m = first;
    while m <= m_body {
        let x = node(m);
        if x > 0.0 {
            breaks.push(x);
        }
        m += 1.0;
    }
    breaks.extend(
        resonances(&params.model)
            .into_iter()
            .filter(|&r| r > 0.0 && r < node(m_body)),
    );
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let opts = QuadOptions {
        abs_tol: 1e-8,
        rel_tol: 1e-11,
        max_intervals: breaks.len() + 20_000,
    };
    let body = integrate_with_breaks(integrand, &breaks, &opts)?;

    let mut partial = vec![body.value];
    let mut total = body.value;
    for j in 0..TAIL_SEGMENTS {
        let a = node(m_body + j as f64);
        let b = node(m_body + j as f64 + 1.0);
        total += integrate_with_breaks(integrand, &[a, b], &opts)?.value;
        partial.push(total);
    }
    let (estimate, previous) = repeated_average(partial);
    let achieved = (estimate - previous).abs();
    if achieved > 1e-7 * estimate.abs().max(1.0) {
        return Err(Error::Quadrature {
            achieved,
            requested: 1e-7,
        });
    }
    Ok(estimate / PI)
}

/// Collapses partial sums by repeated pairwise averaging; returns the final
/// value and the value one level earlier.
fn repeated_average(mut s: Vec<f64>) -> (f64, f64) {
    let mut previous = s[0];
    while s.len() > 1 {
        previous = s[s.len() - 1];
        s = s.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    (s[0], previous)
}

fn resonances(model: &DielectricModel) -> Vec<f64> {
    let wc = model.omega_c();
    match model {
        DielectricModel::Vacuum => vec![],
        _ => vec![1.0, (1.0 + wc * wc).sqrt()],
    }
}

/// Branch-point geometry of the infinite-cutoff Lorentz model,
/// ε = (ω − ω₂)(ω + ω₂*) / [(ω − ω₁)(ω + ω₁*)] with ωⱼ = aⱼ − iκ₀.
#[derive(Debug, Clone, Copy)]
struct CutGeometry {
    kappa0: f64,
    omega_c: f64,
    a1: f64,
    a2: f64,
}

impl CutGeometry {
    fn of(model: &DielectricModel) -> Result<Self> {
        match model {
            DielectricModel::Lorentz(m) if m.cutoff() == Cutoff::Infinite => {
                let (k0, wc) = (m.kappa0(), m.omega_c());
                if !(k0 > 0.0 && k0 < 1.0) {
                    return Err(Error::Unsupported(
                        "contour evaluation needs 0 < kappa0 < omega_0".into(),
                    ));
                }
                Ok(CutGeometry {
                    kappa0: k0,
                    omega_c: wc,
                    a1: (1.0 - k0 * k0).sqrt(),
                    a2: (1.0 + wc * wc - k0 * k0).sqrt(),
                })
            }
            _ => Err(Error::Unsupported(
                "contour and asymptotic evaluation need the Lorentz model with infinite cutoff"
                    .into(),
            )),
        }
    }

    fn omega1(&self) -> Complex64 {
        c(self.a1, -self.kappa0)
    }

    fn omega2(&self) -> Complex64 {
        c(self.a2, -self.kappa0)
    }

    /// n(ω) continued off the real axis with all four cuts running straight
    /// down from the branch points.
    fn n(&self, omega: Complex64) -> Complex64 {
        let s = |z: Complex64| Complex64::from_polar(1.0, FRAC_PI_4) * (c(0.0, -1.0) * z).sqrt();
        let (w1, w2) = (self.omega1(), self.omega2());
        s(omega - w2) * s(omega + w2.conj()) / (s(omega - w1) * s(omega + w1.conj()))
    }

    /// √B(λ) for the ω₁ cut, B = [2ω_c²a₁ + iλ(λ² + 4a₁² + ω_c²)]/(4a₁² + λ²).
    fn sqrt_b(&self, lambda: f64) -> Complex64 {
        let (a1, wc2) = (self.a1, self.omega_c * self.omega_c);
        let b = c(
            2.0 * wc2 * a1,
            lambda * (lambda * lambda + 4.0 * a1 * a1 + wc2),
        ) / (4.0 * a1 * a1 + lambda * lambda);
        b.sqrt()
    }

    /// √λ · n on the right bank of the ω₁ cut.
    fn n_cut1_scaled(&self, lambda: f64) -> Complex64 {
        -Complex64::from_polar(1.0, -FRAC_PI_4) * self.sqrt_b(lambda)
    }

    /// n/√λ on the right bank of the ω₂ cut.
    fn n_cut2_scaled(&self, lambda: f64) -> Complex64 {
        let (a2, wc2) = (self.a2, self.omega_c * self.omega_c);
        let r = c(2.0 * a2, -lambda) / c(wc2 - lambda * lambda, -2.0 * a2 * lambda);
        Complex64::from_polar(1.0, -FRAC_PI_4) * r.sqrt()
    }
}

fn laplace_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-11,
        max_intervals: 4000,
    }
}

/// ∫₀^∞ e^{−λΔt} g(λ)/√λ dλ evaluated as 2∫ e^{−u²Δt} g(u²) du.
fn laplace_inverse_sqrt(
    g: impl Fn(f64) -> Complex64,
    delta_t: f64,
    scale: f64,
) -> Result<Complex64> {
    let u_max = (LAPLACE_CUT / delta_t).sqrt();
    let mut breaks = vec![0.0];
    // Resolve structure of width ~scale in λ near the origin.
    for f in [1.0, 4.0, 16.0, 64.0] {
        let u = (f * scale).sqrt();
        if u < u_max {
            breaks.push(u);
        }
    }
    breaks.push(u_max);
    Ok(integrate_with_breaks(
        |u: f64| {
            let l = u * u;
            2.0 * (-l * delta_t).exp() * g(l)
        },
        &breaks,
        &laplace_opts(),
    )?
    .value)
}

/// J(Δt) = ∫₀^∞ e^{−λΔt} ω³ √B / [√λ (ω − ω_A)] dλ with ω = ω₁ − iλ.
pub fn j_integral(params: &EmissionParams, delta_t: f64) -> Result<Complex64> {
    check_positive(delta_t)?;
    let g = CutGeometry::of(&params.model)?;
    let wa = params.omega_a;
    laplace_inverse_sqrt(
        |l| {
            let w = g.omega1() - c(0.0, l);
            w.powi(3) * g.sqrt_b(l) / (w - wa)
        },
        delta_t,
        g.kappa0,
    )
}

/// Leading Watson-lemma term √(π/Δt) · g(0) of [`j_integral`].
pub fn j_leading(params: &EmissionParams, delta_t: f64) -> Result<Complex64> {
    check_positive(delta_t)?;
    let g = CutGeometry::of(&params.model)?;
    let w = g.omega1();
    Ok((PI / delta_t).sqrt() * w.powi(3) * g.sqrt_b(0.0) / (w - params.omega_a))
}

fn check_positive(delta_t: f64) -> Result<()> {
    if delta_t > 0.0 && delta_t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta_t must be > 0, got {delta_t}")))
    }
}

/// The pieces of the contour decomposition of Γ/Γ₀ at one Δt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourTerms {
    /// C(ω_A) Re n(ω_A), from the pole at ω_A.
    pub pole: f64,
    /// Complex amplitude whose real part is the ω₁ cut term.
    pub cut1: Complex64,
    /// Complex amplitude whose real part is the ω₂ cut term.
    pub cut2: Complex64,
    /// Integrals along both halves of the imaginary axis, including the
    /// residues of the convergence-factor poles they enclose.
    pub imaginary_axis: f64,
}

impl ContourTerms {
    pub fn total(&self) -> f64 {
        self.pole + self.cut1.re + self.cut2.re + self.imaginary_axis
    }
}

pub fn contour_terms(params: &EmissionParams, delta_t: f64) -> Result<ContourTerms> {
    check_positive(delta_t)?;
    let g = CutGeometry::of(&params.model)?;
    let wa = params.omega_a;
    let t = delta_t;
    let i = c(0.0, 1.0);
    let f = |w: Complex64| (w / wa).powi(3) * g.n(w) * params.conv_factor(w);

    let pole = params.equilibrium()?;

    // Cut j: (1/π) ∫ n_R(ωⱼ − iλ) (ω/ω_A)³ C(ω) e^{−i(ω − ω_A)Δt}/(ω − ω_A) dλ.
    let cut_term = |wj: Complex64, weight: &dyn Fn(f64) -> Complex64, sqrt_power: bool| {
        let phase = (-i * (wj - wa) * t).exp();
        let h = |l: f64| {
            let w = wj - i * l;
            weight(l) * (w / wa).powi(3) * params.conv_factor(w) / (w - wa)
        };
        let v = if sqrt_power {
            // n = √λ · (…): integrate h(λ)·λ/√λ.
            laplace_inverse_sqrt(|l| h(l) * l, t, g.kappa0)?
        } else {
            laplace_inverse_sqrt(h, t, g.kappa0)?
        };
        Ok::<_, Error>(phase * v / PI)
    };
    let cut1 = cut_term(g.omega1(), &|l| g.n_cut1_scaled(l), false)?;
    let cut2 = cut_term(g.omega2(), &|l| g.n_cut2_scaled(l), true)?;

    // Imaginary axis, upper half (A) and lower half (B).
    let y_max = LAPLACE_CUT / t;
    let mut y_breaks = vec![0.0, y_max];
    for y in [wa, params.conv_cutoff] {
        if y < y_max {
            y_breaks.push(y);
        }
    }
    y_breaks.sort_by(f64::total_cmp);
    let phase_a = (-i * wa * t).exp();
    let upper = integrate_with_breaks(
        |y: f64| {
            let w = c(0.0, y);
            f(w) * (-y * t).exp() * phase_a / (w - wa) * i
        },
        &y_breaks,
        &laplace_opts(),
    )?
    .value;
    let lower = integrate_with_breaks(
        |y: f64| {
            let w = c(0.0, -y);
            f(w) * (-y * t).exp() * phase_a.conj() / (w - wa) * (-i)
        },
        &y_breaks,
        &laplace_opts(),
    )?
    .value;

    // Residues of C at Ωe^{±iπ/4}, Res C = Ω⁴/(4p³).
    let o4 = params.conv_cutoff.powi(4);
    let residue = |p: Complex64, sign: f64| {
        (p / wa).powi(3) * g.n(p) * o4 / (4.0 * p.powi(3)) * (sign * i * (p - wa) * t).exp()
            / (p - wa)
    };
    let p_up = Complex64::from_polar(params.conv_cutoff, FRAC_PI_4);
    let p_down = p_up.conj();
    let a = upper + 2.0 * PI * i * residue(p_up, 1.0);
    let b = lower - 2.0 * PI * i * residue(p_down, -1.0);
    let imaginary_axis = ((a - b) / (2.0 * i)).re / PI;

    Ok(ContourTerms {
        pole,
        cut1,
        cut2,
        imaginary_axis,
    })
}

/// Γ/Γ₀ from the contour decomposition.
pub fn gamma_contour(params: &EmissionParams, delta_t: f64) -> Result<f64> {
    Ok(contour_terms(params, delta_t)?.total())
}

/// Leading large-Δt form keeping only the ω₁ cut.
pub fn gamma_asymptotic(params: &EmissionParams, delta_t: f64) -> Result<f64> {
    check_positive(delta_t)?;
    let g = CutGeometry::of(&params.model)?;
    let wa = params.omega_a;
    let n_a = params.model.refractive_index(wa)?;
    let amplitude =
        g.omega_c * g.a1.powf(2.5) / ((2.0 * PI).sqrt() * wa.powi(3) * c(g.a1 - wa, -g.kappa0));
    let phase = c(-g.kappa0 * delta_t, -FRAC_PI_4 - (g.a1 - wa) * delta_t).exp();
    Ok((n_a - amplitude * phase / delta_t.sqrt()).re)
}

pub fn gamma(params: &EmissionParams, delta_t: f64, method: EmissionMethod) -> Result<f64> {
    match method {
        EmissionMethod::Direct => gamma_direct(params, delta_t),
        EmissionMethod::Contour => gamma_contour(params, delta_t),
        EmissionMethod::Asymptotic => gamma_asymptotic(params, delta_t),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionCurve {
    pub delta_t: Vec<f64>,
    pub gamma_over_gamma0: Vec<f64>,
    pub method: EmissionMethod,
}

impl EmissionCurve {
    /// Samples divided by the equilibrium rate Re n(ω_A).
    pub fn normalized(&self, params: &EmissionParams) -> Result<Vec<f64>> {
        let eq = params.model.refractive_index(params.omega_a)?.re;
        Ok(self.gamma_over_gamma0.iter().map(|g| g / eq).collect())
    }
}

/// Γ/Γ₀ on a grid of Δt. The contour and asymptotic forms are singular at
/// Δt = 0, where the exact value 0 is returned.
pub fn emission_curve(
    params: &EmissionParams,
    t_grid: &[f64],
    method: EmissionMethod,
) -> Result<EmissionCurve> {
    if t_grid.iter().any(|&t| !(t >= 0.0)) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "time grid must be non-negative and increasing".into(),
        ));
    }
    let values = t_grid
        .iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(0.0)
            } else {
                gamma(params, t, method)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmissionCurve {
        delta_t: t_grid.to_vec(),
        gamma_over_gamma0: values,
        method,
    })
}
