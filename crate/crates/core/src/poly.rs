//! Dense complex polynomials and a simultaneous (Aberth–Ehrlich) root finder.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ABERTH_ITERATIONS: usize = 500;

/// Polynomial with complex coefficients stored in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    /// Builds a polynomial, dropping exactly-zero leading coefficients.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by a single Horner sweep.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::constant(Complex64::new(0.0, 0.0));
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Multiplies by `z^n`.
    pub fn shift(&self, n: usize) -> Poly {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        coeffs.extend_from_slice(&self.coeffs);
        Poly::new(coeffs)
    }

    /// Index of the highest coefficient whose magnitude exceeds `rel_tol`
    /// times the largest coefficient.
    pub fn effective_degree(&self, rel_tol: f64) -> usize {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > rel_tol * scale)
            .unwrap_or(0)
    }

    /// All complex roots, with multiplicity.
    ///
    /// Exact zero roots are factored out first; the remainder is solved by
    /// Aberth–Ehrlich iteration followed by a Newton polish on the undeflated
    /// polynomial.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let zero = Complex64::new(0.0, 0.0);
        let n_zero = self.coeffs.iter().take_while(|&&c| c == zero).count();
        let mut roots = vec![zero; n_zero.min(self.degree())];
        let reduced = Poly::new(self.coeffs[n_zero.min(self.degree())..].to_vec());
        match reduced.degree() {
            0 => {}
            1 => roots.push(-reduced.coeffs[0] / reduced.coeffs[1]),
            _ => roots.extend(aberth(&reduced)?),
        }
        Ok(roots)
    }
}

fn aberth(p: &Poly) -> Result<Vec<Complex64>> {
    let n = p.degree();
    let lead = p.leading();
    let monic: Vec<Complex64> = p.coeffs.iter().map(|&c| c / lead).collect();
    let monic = Poly::new(monic);

    // Fujiwara-style bound on root magnitudes for the starting circle.
    let radius = (0..n)
        .map(|i| monic.coeffs[i].norm().powf(1.0 / (n - i) as f64))
        .fold(0.0_f64, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, theta)
        })
        .collect();

    let mut converged = vec![false; n];
    for _ in 0..MAX_ABERTH_ITERATIONS {
        for i in 0..n {
            if converged[i] {
                continue;
            }
            let (v, dv) = monic.eval_with_derivative(z[i]);
            if v.norm() == 0.0 {
                converged[i] = true;
                continue;
            }
            let ratio = v / dv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= step;
            if !step.is_finite() {
                return Err(Error::RootFinding {
                    iterations: 0,
                    max_residual: f64::INFINITY,
                });
            }
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                converged[i] = true;
            }
        }
        if converged.iter().all(|&c| c) {
            break;
        }
    }

    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = monic.eval_with_derivative(*zi);
            if dv.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            if !step.is_finite() {
                break;
            }
            *zi -= step;
        }
    }

    let scale: f64 = monic.coeffs.iter().map(|c| c.norm()).sum();
    let max_residual = z
        .iter()
        .map(|&zi| {
            let bound: f64 = monic
                .coeffs
                .iter()
                .rev()
                .fold(0.0, |acc, c| acc * zi.norm() + c.norm());
            monic.eval(zi).norm() / bound.max(scale * f64::EPSILON)
        })
        .fold(0.0, f64::max);
    if !(max_residual < 1e-8) {
        return Err(Error::RootFinding {
            iterations: MAX_ABERTH_ITERATIONS,
            max_residual,
        });
    }
    Ok(z)
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        Poly::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(zero)
                        + rhs.coeffs.get(i).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &rhs.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}
