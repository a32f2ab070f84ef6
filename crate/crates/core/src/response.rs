//! Dielectric response of the damped-polariton models.
//!
//! Frequencies are in units of the bare resonance ω₀ and c = 1. Every
//! closed-form model is stored as a reduced rational susceptibility
//! χ(ω) = num(ω)/den(ω); the same expression is used for real and complex ω.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quad::{integrate, integrate_with_breaks, QuadOptions};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cutoff {
    Finite(f64),
    Infinite,
}

impl Cutoff {
    pub fn finite(self) -> Option<f64> {
        match self {
            Cutoff::Finite(v) => Some(v),
            Cutoff::Infinite => None,
        }
    }
}

/// Lorentz oscillator with coupling rolled off as κ(ω) = κ₀Ω²/(Ω² + ω²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzCutoffModel {
    omega_c: f64,
    kappa0: f64,
    cutoff: Cutoff,
}

impl LorentzCutoffModel {
    pub fn new(omega_c: f64, kappa0: f64, cutoff: Cutoff) -> Result<Self> {
        check_omega_c(omega_c)?;
        if !(kappa0 >= 0.0) || !kappa0.is_finite() {
            return Err(Error::InvalidModel(format!(
                "kappa0 must be >= 0, got {kappa0}"
            )));
        }
        if let Cutoff::Finite(cut) = cutoff {
            check_cutoff(cut)?;
        }
        Ok(LorentzCutoffModel {
            omega_c,
            kappa0,
            cutoff,
        })
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    /// κ(ω); equals κ₀ for an infinite cutoff.
    pub fn kappa(&self, omega: f64) -> f64 {
        match self.cutoff {
            Cutoff::Finite(big) => self.kappa0 * big * big / (big * big + omega * omega),
            Cutoff::Infinite => self.kappa0,
        }
    }
}

/// Radiatively damped point scatterers, Γ(ω) = Γₑ Ω⁴/(Ω⁴ + ω⁴) with Γₑ = 3κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointScatterCutoffModel {
    omega_c: f64,
    kappa: f64,
    cutoff: f64,
}

impl PointScatterCutoffModel {
    pub fn new(omega_c: f64, kappa: f64, cutoff: f64) -> Result<Self> {
        check_omega_c(omega_c)?;
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidModel(format!(
                "kappa must be >= 0, got {kappa}"
            )));
        }
        check_cutoff(cutoff)?;
        Ok(PointScatterCutoffModel {
            omega_c,
            kappa,
            cutoff,
        })
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn gamma_e(&self) -> f64 {
        3.0 * self.kappa
    }

    pub fn gamma(&self, omega: f64) -> f64 {
        let o4 = self.cutoff.powi(4);
        self.gamma_e() * o4 / (o4 + omega.powi(4))
    }
}

/// Undamped single resonance, ε = 1 − ω_c²/(ω² − 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosslessModel {
    omega_c: f64,
}

impl LosslessModel {
    pub fn new(omega_c: f64) -> Result<Self> {
        check_omega_c(omega_c)?;
        Ok(LosslessModel { omega_c })
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
}

fn check_omega_c(omega_c: f64) -> Result<()> {
    if omega_c > 0.0 && omega_c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "omega_c must be > 0, got {omega_c}"
        )))
    }
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff > 1.0 && cutoff.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "cutoff must exceed the resonance frequency, got {cutoff}"
        )))
    }
}

/// Natural cubic spline through `(x_i, y_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn natural(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag[i] = 2.0 * (h0 + h1);
                rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for i in 2..n - 1 {
                let h = x[i] - x[i - 1];
                let w = h / diag[i - 1];
                diag[i] -= w * h;
                rhs[i] -= w * rhs[i - 1];
            }
            for i in (1..n - 1).rev() {
                let h1 = x[i + 1] - x[i];
                m[i] = (rhs[i] - h1 * m[i + 1]) / diag[i];
            }
        }
        Spline { x, y, m }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Bath coupling V²(ω) known only through samples on `(0, ω_max]`, continued
/// beyond `ω_max` as `V²(ω_max)(ω_max/ω)^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCoupling {
    spline: Spline,
    tail_exponent: f64,
    omega0_bare: f64,
    omega_c: f64,
    omega0_tilde: f64,
}

impl TabulatedCoupling {
    /// Builds the coupling and solves ω̃₀² = ω₀² + ω̃₀∫V²/ω for ω̃₀.
    pub fn new(
        omega: Vec<f64>,
        v_squared: Vec<f64>,
        tail_exponent: f64,
        omega0_bare: f64,
        omega_c: f64,
    ) -> Result<Self> {
        check_omega_c(omega_c)?;
        if omega.len() != v_squared.len() || omega.len() < 2 {
            return Err(Error::InvalidModel(
                "coupling grid and samples must have equal length >= 2".into(),
            ));
        }
        if !(omega[0] > 0.0) || omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidModel(
                "coupling grid must be positive and strictly increasing".into(),
            ));
        }
        if v_squared.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidModel(
                "coupling samples must be finite and >= 0".into(),
            ));
        }
        if !(omega0_bare > 0.0) {
            return Err(Error::InvalidModel("bare resonance must be > 0".into()));
        }
        if !(tail_exponent > 0.0) {
            return Err(Error::Divergence(format!(
                "tail exponent {tail_exponent} does not make the coupling integral converge"
            )));
        }
        let mut x = Vec::with_capacity(omega.len() + 1);
        let mut y = Vec::with_capacity(omega.len() + 1);
        x.push(0.0);
        y.push(0.0);
        x.extend_from_slice(&omega);
        y.extend_from_slice(&v_squared);
        let mut coupling = TabulatedCoupling {
            spline: Spline::natural(x, y),
            tail_exponent,
            omega0_bare,
            omega_c,
            omega0_tilde: f64::NAN,
        };
        let i = coupling.weighted_integral()?;
        coupling.omega0_tilde = 0.5 * (i + (i * i + 4.0 * omega0_bare * omega0_bare).sqrt());
        Ok(coupling)
    }

    /// Samples `v_squared` on `omega` and builds the coupling.
    pub fn from_fn(
        omega: Vec<f64>,
        v_squared: impl Fn(f64) -> f64,
        tail_exponent: f64,
        omega0_bare: f64,
        omega_c: f64,
    ) -> Result<Self> {
        let samples = omega.iter().map(|&w| v_squared(w)).collect();
        TabulatedCoupling::new(omega, samples, tail_exponent, omega0_bare, omega_c)
    }

    pub fn omega_max(&self) -> f64 {
        *self.spline.x.last().unwrap_or(&0.0)
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn omega0_bare(&self) -> f64 {
        self.omega0_bare
    }

    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent
    }

    pub fn v_squared(&self, omega: f64) -> f64 {
        let x_max = self.omega_max();
        if omega <= 0.0 {
            0.0
        } else if omega > x_max {
            self.tail_value() * (x_max / omega).powf(self.tail_exponent)
        } else {
            self.spline.eval(omega).max(0.0)
        }
    }

    fn tail_value(&self) -> f64 {
        *self.spline.y.last().unwrap_or(&0.0)
    }

    fn knots(&self) -> &[f64] {
        &self.spline.x
    }

    fn opts(&self) -> QuadOptions {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: self.knots().len() + 4000,
        }
    }

    /// ∫₀^∞ V²(ω)/ω dω.
    fn weighted_integral(&self) -> Result<f64> {
        let body = integrate_with_breaks(
            |x: f64| self.spline.eval(x).max(0.0) / x,
            self.knots(),
            &self.opts(),
        )?;
        Ok(body.value + self.tail_value() / self.tail_exponent)
    }

    /// F(ω) for real 0 < ω < ω_max.
    pub fn f_function(&self, omega: f64) -> Result<Complex64> {
        let x_max = self.omega_max();
        if !(omega > 0.0 && omega < x_max) {
            return Err(Error::Domain(format!(
                "omega = {omega} outside the coupling grid support (0, {x_max})"
            )));
        }
        let opts = self.opts();
        let v2 = |x: f64| self.spline.eval(x).max(0.0);
        let kernel = |x: f64| v2(x) * (1.0 / (x - omega) + 1.0 / (x + omega));

        let w = (0.5 * omega).min(0.5 * (x_max - omega));
        let (lo, hi) = (omega - w, omega + w);
        let breaks = |a: f64, b: f64| {
            let mut pts = vec![a];
            pts.extend(self.knots().iter().copied().filter(|&k| k > a && k < b));
            pts.push(b);
            pts
        };

        let left = integrate_with_breaks(kernel, &breaks(0.0, lo), &opts)?.value;
        let right = integrate_with_breaks(kernel, &breaks(hi, x_max), &opts)?.value;
        let window_regular =
            integrate_with_breaks(|x: f64| v2(x) / (x + omega), &breaks(lo, hi), &opts)?.value;
        let mut sym_breaks: Vec<f64> = self
            .knots()
            .iter()
            .map(|&k| (k - omega).abs())
            .filter(|&s| s > 0.0 && s < w)
            .collect();
        sym_breaks.push(0.0);
        sym_breaks.push(w);
        sym_breaks.sort_by(f64::total_cmp);
        sym_breaks.dedup();
        let window_singular = integrate_with_breaks(
            |s: f64| (v2(omega + s) - v2(omega - s)) / s,
            &sym_breaks,
            &opts,
        )?
        .value;

        let p = self.tail_exponent;
        let ratio = omega / x_max;
        let tail = 2.0
            * self.tail_value()
            * integrate(
                |u: f64| u.powf(p - 1.0) / (1.0 - ratio * ratio * u * u),
                0.0,
                1.0,
                &opts,
            )?
            .value;

        Ok(c(
            left + right + window_regular + window_singular + tail,
            PI * v2(omega),
        ))
    }
}

/// Tagged union of all supported response models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DielectricModel {
    Lossless(LosslessModel),
    Lorentz(LorentzCutoffModel),
    PointScatter(PointScatterCutoffModel),
    Tabulated(TabulatedCoupling),
    /// ε ≡ 1.
    Vacuum,
}

/// χ(ω) = num(ω)/den(ω).
#[derive(Debug, Clone, PartialEq)]
pub struct RationalChi {
    pub num: Poly,
    pub den: Poly,
}

impl RationalChi {
    fn eval(&self, omega: Complex64) -> Result<Complex64> {
        let d = self.den.eval(omega);
        if is_zero_of(&self.den, d, omega) {
            return Err(Error::Singularity {
                re: omega.re,
                im: omega.im,
            });
        }
        Ok(self.num.eval(omega) / d)
    }

    fn eval_with_derivative(&self, omega: Complex64) -> Result<(Complex64, Complex64)> {
        let (n, dn) = self.num.eval_with_derivative(omega);
        let (d, dd) = self.den.eval_with_derivative(omega);
        if is_zero_of(&self.den, d, omega) {
            return Err(Error::Singularity {
                re: omega.re,
                im: omega.im,
            });
        }
        Ok((n / d, (dn * d - n * dd) / (d * d)))
    }
}

fn is_zero_of(p: &Poly, value: Complex64, z: Complex64) -> bool {
    let r = z.norm();
    let bound = p
        .coeffs()
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * r + c.norm());
    !(value.norm() > 16.0 * f64::EPSILON * bound)
}

impl From<LosslessModel> for DielectricModel {
    fn from(m: LosslessModel) -> Self {
        DielectricModel::Lossless(m)
    }
}

impl From<LorentzCutoffModel> for DielectricModel {
    fn from(m: LorentzCutoffModel) -> Self {
        DielectricModel::Lorentz(m)
    }
}

impl From<PointScatterCutoffModel> for DielectricModel {
    fn from(m: PointScatterCutoffModel) -> Self {
        DielectricModel::PointScatter(m)
    }
}

impl From<TabulatedCoupling> for DielectricModel {
    fn from(m: TabulatedCoupling) -> Self {
        DielectricModel::Tabulated(m)
    }
}

impl DielectricModel {
    pub fn omega_c(&self) -> f64 {
        match self {
            DielectricModel::Lossless(m) => m.omega_c,
            DielectricModel::Lorentz(m) => m.omega_c,
            DielectricModel::PointScatter(m) => m.omega_c,
            DielectricModel::Tabulated(m) => m.omega_c,
            DielectricModel::Vacuum => 0.0,
        }
    }

    /// High-frequency constant in ω²χ(ω) → −ω_lim².
    pub fn omega_lim(&self) -> f64 {
        self.omega_c()
    }

    pub fn is_lossy(&self) -> bool {
        match self {
            DielectricModel::Lossless(_) | DielectricModel::Vacuum => false,
            DielectricModel::Lorentz(m) => m.kappa0 > 0.0,
            DielectricModel::PointScatter(m) => m.kappa > 0.0,
            DielectricModel::Tabulated(m) => m.spline.y.iter().any(|&v| v > 0.0),
        }
    }

    /// Reduced rational form of χ, or `None` for tabulated couplings.
    pub fn rational_chi(&self) -> Option<RationalChi> {
        let wc2 = c(-self.omega_c().powi(2), 0.0);
        match self {
            DielectricModel::Vacuum => Some(RationalChi {
                num: Poly::from_real(&[0.0]),
                den: Poly::from_real(&[1.0]),
            }),
            DielectricModel::Lossless(_) => Some(RationalChi {
                num: Poly::constant(wc2),
                den: Poly::from_real(&[-1.0, 0.0, 1.0]),
            }),
            DielectricModel::Lorentz(m) => match m.cutoff {
                Cutoff::Infinite => Some(RationalChi {
                    num: Poly::constant(wc2),
                    den: Poly::new(vec![c(-1.0, 0.0), c(0.0, 2.0 * m.kappa0), c(1.0, 0.0)]),
                }),
                Cutoff::Finite(big) => {
                    let q = Poly::new(vec![c(big, 0.0), c(0.0, -1.0)]);
                    let den = &(&Poly::from_real(&[-1.0, 0.0, 1.0]) * &q)
                        + &Poly::new(vec![c(0.0, 0.0), c(0.0, 2.0 * m.kappa0 * big)]);
                    Some(RationalChi {
                        num: q.scale(wc2),
                        den,
                    })
                }
            },
            DielectricModel::PointScatter(m) => {
                let big = m.cutoff;
                let q = Poly::new(vec![c(-big * big, 0.0), c(0.0, SQRT_2 * big), c(1.0, 0.0)]);
                let den = &(&Poly::from_real(&[-1.0, 0.0, 1.0]) * &q)
                    - &Poly::from_real(&[0.0, 0.0, SQRT_2 * m.gamma_e() / 3.0 * big.powi(3)]);
                Some(RationalChi {
                    num: q.scale(wc2),
                    den,
                })
            }
            DielectricModel::Tabulated(_) => None,
        }
    }

    /// Factor cancelled between the reduced and the literal rational forms.
    /// Its zeros are roots of the cleared dispersion polynomial that do not
    /// solve the dispersion relation.
    pub fn cancelled_factor(&self) -> Poly {
        match self {
            DielectricModel::Lorentz(LorentzCutoffModel {
                cutoff: Cutoff::Finite(big),
                ..
            }) => Poly::new(vec![c(*big, 0.0), c(0.0, 1.0)]),
            DielectricModel::PointScatter(m) => {
                let big = m.cutoff;
                Poly::new(vec![c(-big * big, 0.0), c(0.0, -SQRT_2 * big), c(1.0, 0.0)])
            }
            _ => Poly::from_real(&[1.0]),
        }
    }

    pub fn chi(&self, omega: Complex64) -> Result<Complex64> {
        match self.rational_chi() {
            Some(r) => r.eval(omega),
            None => {
                if omega.im != 0.0 {
                    return Err(Error::Domain(
                        "tabulated couplings are defined on the real axis only".into(),
                    ));
                }
                Ok(self.epsilon_real(omega.re)? - 1.0)
            }
        }
    }

    /// ε(ω), analytically continued to complex ω for the closed-form models.
    pub fn epsilon(&self, omega: Complex64) -> Result<Complex64> {
        Ok(1.0 + self.chi(omega)?)
    }

    /// ε(ω) and dε/dω.
    pub fn epsilon_with_derivative(&self, omega: Complex64) -> Result<(Complex64, Complex64)> {
        match self.rational_chi() {
            Some(r) => {
                let (chi, dchi) = r.eval_with_derivative(omega)?;
                Ok((1.0 + chi, dchi))
            }
            None => Err(Error::Unsupported(
                "derivatives of tabulated responses are not available".into(),
            )),
        }
    }

    fn epsilon_real(&self, omega: f64) -> Result<Complex64> {
        match self {
            DielectricModel::Tabulated(t) => epsilon_from_coupling(t, omega),
            _ => self.epsilon(c(omega, 0.0)),
        }
    }

    /// n = √ε with Im n ≥ 0.
    pub fn refractive_index(&self, omega: f64) -> Result<Complex64> {
        if !(omega >= 0.0) {
            return Err(Error::Domain(format!(
                "refractive index needs omega >= 0, got {omega}"
            )));
        }
        let n = self.epsilon_real(omega)?.sqrt();
        Ok(if n.im < 0.0 { -n } else { n })
    }

    pub fn renormalized_omega0(&self) -> Result<f64> {
        match self {
            DielectricModel::Lossless(_) | DielectricModel::Vacuum => Ok(1.0),
            DielectricModel::Lorentz(m) => match m.cutoff {
                Cutoff::Finite(big) => Ok((1.0 + 2.0 * m.kappa0 * big).sqrt()),
                Cutoff::Infinite if m.kappa0 == 0.0 => Ok(1.0),
                Cutoff::Infinite => Err(Error::Divergence(
                    "renormalized frequency is infinite without a coupling cutoff".into(),
                )),
            },
            DielectricModel::PointScatter(m) => {
                Ok((1.0 + SQRT_2 * m.gamma_e() * m.cutoff.powi(3) / 3.0).sqrt())
            }
            DielectricModel::Tabulated(t) => Ok(t.omega0_tilde),
        }
    }

    /// Frequency shift Δ(ω), the principal-value part of F(ω).
    pub fn delta_shift(&self, omega: f64) -> Result<f64> {
        match self {
            DielectricModel::Lossless(_) | DielectricModel::Vacuum => Ok(0.0),
            DielectricModel::Lorentz(m) => {
                let big = m.cutoff.finite().ok_or_else(|| {
                    Error::Divergence("frequency shift is infinite without a cutoff".into())
                })?;
                Ok(4.0 * m.kappa(omega) * big / self.renormalized_omega0()?)
            }
            DielectricModel::PointScatter(m) => {
                let big = m.cutoff;
                Ok(2.0 * SQRT_2 / (3.0 * self.renormalized_omega0()?)
                    * m.gamma(omega)
                    * big
                    * (big * big + omega * omega))
            }
            DielectricModel::Tabulated(t) => Ok(t.f_function(omega)?.re),
        }
    }

    /// (π ω̃₀ / 2) V²(ω): the imaginary part of the resonance denominator.
    fn coupling_weight(&self, omega: f64) -> Result<f64> {
        match self {
            DielectricModel::Lossless(_) | DielectricModel::Vacuum => Ok(0.0),
            DielectricModel::Lorentz(m) => Ok(2.0 * m.kappa(omega) * omega),
            DielectricModel::PointScatter(m) => Ok(2.0 / 3.0 * m.gamma(omega) * omega.powi(3)),
            DielectricModel::Tabulated(t) => Ok(0.5 * PI * t.omega0_tilde * t.v_squared(omega)),
        }
    }

    /// Bath coupling V²(ω) implied by the model.
    pub fn v_squared(&self, omega: f64) -> Result<f64> {
        match self {
            DielectricModel::Tabulated(t) => Ok(t.v_squared(omega)),
            _ => Ok(2.0 * self.coupling_weight(omega)? / (PI * self.renormalized_omega0()?)),
        }
    }
}

/// ε(ω) for a tabulated bath coupling, via F(ω) and ω̃₀.
pub fn epsilon_from_coupling(coupling: &TabulatedCoupling, omega: f64) -> Result<Complex64> {
    let f = coupling.f_function(omega)?;
    let w0 = coupling.omega0_tilde;
    let den = omega * omega - w0 * w0 + 0.5 * w0 * f;
    if den.norm() == 0.0 {
        return Err(Error::Singularity { re: omega, im: 0.0 });
    }
    Ok(1.0 - coupling.omega_c.powi(2) / den)
}

/// |(πω̃₀/2ω_c²)V²(ω)|χ(ω)|² − Im χ(ω)|.
pub fn imag_eps_identity_check(model: &DielectricModel, omega: f64) -> Result<f64> {
    let chi = model.chi(c(omega, 0.0))?;
    let wc2 = model.omega_c().powi(2);
    let lhs = if wc2 > 0.0 {
        model.coupling_weight(omega)? / wc2 * chi.norm_sqr()
    } else {
        0.0
    };
    Ok((lhs - chi.im).abs())
}
