//! Discrete calculus on a finite window of the integer line.
//!
//! Functions live on sites `i = 0..N-1` and are indexed periodically, so the
//! shift operators `R_+ f (i) = f(i+1)` and `R_- f (i) = f(i-1)` are exact
//! bijections and every telescoping sum closes. Finite differences are
//! `d_pm = R_pm - id`, 1-forms are spanned by the two arrow directions, and a
//! metric assigns one positive square length to each edge `i--(i+1)`.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Shift/difference direction along the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

/// Window topology. `Open` keeps the same periodic storage but marks the
/// data as a sub-window of the line, so diagnostics exclude sites whose
/// stencil would cross the seam between sites `N-1` and `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Periodic,
    Open,
}

/// A complex-valued function on the window, indexed mod N.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction {
    values: Vec<Complex64>,
}

impl LatticeFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::WindowTooSmall(values.len()));
        }
        Ok(Self { values })
    }

    pub fn from_real(values: Vec<f64>) -> Result<Self> {
        Self::new(values.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    }

    pub fn constant(n: usize, value: Complex64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::constant(n, Complex64::ZERO)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Periodic lookup: any signed index is folded into the window.
    pub fn get(&self, i: isize) -> Complex64 {
        let n = self.values.len() as isize;
        self.values[i.rem_euclid(n) as usize]
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn imag_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.im).collect()
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Self {
        assert_eq!(self.len(), other.len(), "lattice window sizes differ");
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `R_pm f (i) = f(i pm 1)`.
    pub fn shift(&self, dir: Direction) -> Self {
        let n = self.values.len();
        let values = match dir {
            Direction::Plus => (0..n).map(|i| self.values[(i + 1) % n]).collect(),
            Direction::Minus => (0..n).map(|i| self.values[(i + n - 1) % n]).collect(),
        };
        Self { values }
    }

    /// `d_pm f = R_pm f - f`.
    pub fn finite_diff(&self, dir: Direction) -> Self {
        &self.shift(dir) - self
    }

    /// `Delta f (i) = f(i+1) + f(i-1) - 2 f(i)`, equal to `d_+ f + d_- f`.
    pub fn laplacian(&self) -> Self {
        let n = self.values.len();
        let values = (0..n)
            .map(|i| {
                self.values[(i + 1) % n] + self.values[(i + n - 1) % n]
                    - self.values[i] * 2.0
            })
            .collect();
        Self { values }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.map(|z| z * c)
    }
}

impl Add for &LatticeFunction {
    type Output = LatticeFunction;
    fn add(self, rhs: Self) -> LatticeFunction {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &LatticeFunction {
    type Output = LatticeFunction;
    fn sub(self, rhs: Self) -> LatticeFunction {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &LatticeFunction {
    type Output = LatticeFunction;
    fn mul(self, rhs: Self) -> LatticeFunction {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Neg for &LatticeFunction {
    type Output = LatticeFunction;
    fn neg(self) -> LatticeFunction {
        self.map(|z| -z)
    }
}

/// Positive weights defining the state `\int f = sum_i f(i) mu(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    mu: Vec<f64>,
}

impl Measure {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.len() < 3 {
            return Err(Error::WindowTooSmall(mu.len()));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::NotPositive {
                    context: "measure",
                    index: i,
                    value: m,
                });
            }
        }
        Ok(Self { mu })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.mu
    }

    pub fn get(&self, i: isize) -> f64 {
        let n = self.mu.len() as isize;
        self.mu[i.rem_euclid(n) as usize]
    }
}

/// `integrate(f, mu) = sum_i f(i) mu(i)`.
pub fn integrate(f: &LatticeFunction, mu: &Measure) -> Result<Complex64> {
    if f.len() != mu.len() {
        return Err(Error::LengthMismatch {
            context: "integrate",
            left: f.len(),
            right: mu.len(),
        });
    }
    Ok(f.values()
        .iter()
        .zip(mu.values())
        .map(|(&z, &m)| z * m)
        .sum())
}

/// Edge-symmetric metric: `g(i)` is the square length of the edge `i--(i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMetric {
    g: Vec<f64>,
    window: Window,
}

impl EdgeMetric {
    pub fn new(g: Vec<f64>) -> Result<Self> {
        Self::with_window(g, Window::Periodic)
    }

    pub fn open(g: Vec<f64>) -> Result<Self> {
        Self::with_window(g, Window::Open)
    }

    fn with_window(g: Vec<f64>, window: Window) -> Result<Self> {
        if g.len() < 3 {
            return Err(Error::WindowTooSmall(g.len()));
        }
        for (i, &x) in g.iter().enumerate() {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::NotPositive {
                    context: "metric",
                    index: i,
                    value: x,
                });
            }
        }
        Ok(Self { g, window })
    }

    pub fn constant(n: usize, g0: f64) -> Result<Self> {
        Self::new(vec![g0; n])
    }

    /// Geometric metric `g(i) = g0 * lambda^i` on an open sub-window.
    pub fn geometric(n: usize, g0: f64, lambda: f64) -> Result<Self> {
        Self::open((0..n).map(|i| g0 * lambda.powi(i as i32)).collect())
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.g
    }

    pub fn get(&self, i: isize) -> f64 {
        let n = self.g.len() as isize;
        self.g[i.rem_euclid(n) as usize]
    }

    /// The measure `mu = g` induced by the metric.
    pub fn measure(&self) -> Measure {
        Measure::new(self.g.clone()).expect("metric values are valid weights")
    }

    /// Ratio derivatives `rho_+(i) = g(i+1)/g(i)` and
    /// `rho_-(i) = g(i-2)/g(i-1)`, both real and strictly positive.
    pub fn rho(&self) -> (LatticeFunction, LatticeFunction) {
        let n = self.g.len() as isize;
        let plus = LatticeFunction::from_real(
            (0..n).map(|i| self.get(i + 1) / self.get(i)).collect(),
        )
        .expect("metric window is large enough");
        let minus = LatticeFunction::from_real(
            (0..n).map(|i| self.get(i - 2) / self.get(i - 1)).collect(),
        )
        .expect("metric window is large enough");
        (plus, minus)
    }

    /// Sites where `rho_+` does not read across the seam. On a periodic
    /// window that is every site; on an open window the last site is excluded.
    pub fn rho_plus_valid_sites(&self) -> std::ops::Range<usize> {
        match self.window {
            Window::Periodic => 0..self.g.len(),
            Window::Open => 0..self.g.len() - 1,
        }
    }

    /// Mean of `rho_+` over the valid sites and its maximum deviation.
    fn rho_spread(&self) -> (f64, f64) {
        let (rho_plus, _) = self.rho();
        let sites = self.rho_plus_valid_sites();
        let m = sites.len() as f64;
        let mean = sites
            .clone()
            .map(|i| rho_plus.values()[i].re)
            .sum::<f64>()
            / m;
        let dev = sites
            .map(|i| (rho_plus.values()[i].re - mean).abs())
            .fold(0.0, f64::max);
        (mean, dev)
    }

    /// True when `rho` is constant to relative tolerance `tol`. This is the
    /// condition for the summed state to be divergence-compatible; on a
    /// periodic window constancy forces `rho = 1`.
    pub fn is_divergence_compatible(&self, tol: f64) -> bool {
        assert!(tol > 0.0, "tolerance must be positive");
        let (mean, dev) = self.rho_spread();
        dev <= tol * mean
    }

    /// The constant value of `rho`, or an error if `rho` is not constant.
    pub fn constant_rho(&self, tol: f64) -> Result<f64> {
        assert!(tol > 0.0, "tolerance must be positive");
        let (mean, dev) = self.rho_spread();
        if dev <= tol * mean {
            Ok(mean)
        } else {
            Err(Error::NotDivergenceCompatible {
                deviation: dev,
                tolerance: tol * mean,
            })
        }
    }

    /// Divergences of the dual basis vector fields:
    /// `div f_+ (i) = 1 - g(i-1)/g(i)` and `div f_- (i) = 1 - g(i)/g(i-1)`.
    pub fn div_basis(&self) -> (LatticeFunction, LatticeFunction) {
        let n = self.g.len() as isize;
        let plus = LatticeFunction::from_real(
            (0..n).map(|i| 1.0 - self.get(i - 1) / self.get(i)).collect(),
        )
        .expect("metric window is large enough");
        let minus = LatticeFunction::from_real(
            (0..n).map(|i| 1.0 - self.get(i) / self.get(i - 1)).collect(),
        )
        .expect("metric window is large enough");
        (plus, minus)
    }
}

/// A 1-form `omega = omega_+ e^+ + omega_- e^-` in components.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    pub plus: LatticeFunction,
    pub minus: LatticeFunction,
}

impl OneForm {
    pub fn new(plus: LatticeFunction, minus: LatticeFunction) -> Result<Self> {
        if plus.len() != minus.len() {
            return Err(Error::LengthMismatch {
                context: "one-form components",
                left: plus.len(),
                right: minus.len(),
            });
        }
        Ok(Self { plus, minus })
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }
}

/// Exterior derivative `d f = (d_+ f) e^+ + (d_- f) e^-`.
pub fn exterior_d(f: &LatticeFunction) -> OneForm {
    OneForm {
        plus: f.finite_diff(Direction::Plus),
        minus: f.finite_diff(Direction::Minus),
    }
}

/// Evaluation of a 1-form against a vector field in components:
/// `X(omega) = omega_+ X^+ + omega_- X^-`.
pub fn eval_field(
    omega: &OneForm,
    x: &crate::velocity::VelocityField,
) -> Result<LatticeFunction> {
    if omega.len() != x.len() {
        return Err(Error::LengthMismatch {
            context: "eval_field",
            left: omega.len(),
            right: x.len(),
        });
    }
    Ok(&(&omega.plus * x.plus()) + &(&omega.minus * x.minus()))
}
