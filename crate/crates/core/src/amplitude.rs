//! Amplitude (wave-function) flow and its diagnostic functionals.
//!
//! The amplitude obeys `psidot = -(d_+ psi) X^+ - (d_- psi) X^- - psi kappa`;
//! with `kappa = div(X)/2` and a velocity field that is real with respect to
//! the summed state, the flow conserves `integrate(|psi|^2, mu)` exactly at
//! the semi-discrete level.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Direction, LatticeFunction, Measure};
use crate::velocity::{PolarVelocity, VelocityField};

/// A complex amplitude on the window; `|psi|^2` plays the role of the
/// particle density.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplitude {
    psi: LatticeFunction,
}

impl Amplitude {
    pub fn new(psi: LatticeFunction) -> Result<Self> {
        if let Some(index) = psi
            .values()
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite {
                context: "amplitude",
                index,
            });
        }
        Ok(Self { psi })
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn values(&self) -> &[Complex64] {
        self.psi.values()
    }

    pub fn function(&self) -> &LatticeFunction {
        &self.psi
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.values().iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Transport + divergence right-hand side,
/// `-(d_+ psi) X^+ - (d_- psi) X^- - psi kappa`.
pub fn amplitude_rhs(
    psi: &Amplitude,
    x: &VelocityField,
    kappa: &LatticeFunction,
) -> Result<LatticeFunction> {
    if psi.len() != x.len() || psi.len() != kappa.len() {
        return Err(Error::LengthMismatch {
            context: "amplitude_rhs",
            left: psi.len(),
            right: x.len().max(kappa.len()),
        });
    }
    let f = psi.function();
    let transport = &(&f.finite_diff(Direction::Plus) * x.plus())
        + &(&f.finite_diff(Direction::Minus) * x.minus());
    Ok(-&(&transport + &(f * kappa)))
}

/// Polar specialisation of the amplitude flow,
/// `psidot = -r (d_+ psi) e^{i theta} + r (d_- psi) R_-(e^{-i theta})
///           - psi kappa`.
pub fn amplitude_rhs_polar(
    psi: &Amplitude,
    p: &PolarVelocity,
    kappa: &LatticeFunction,
) -> Result<LatticeFunction> {
    if psi.len() != p.len() || psi.len() != kappa.len() {
        return Err(Error::LengthMismatch {
            context: "amplitude_rhs_polar",
            left: psi.len(),
            right: p.len().max(kappa.len()),
        });
    }
    let f = psi.function();
    let e_plus = p.theta().map(|t| Complex64::from_polar(1.0, t.re));
    let e_minus = e_plus.conj().shift(Direction::Minus);
    let up = (&f.finite_diff(Direction::Plus) * &e_plus).scale_re(-p.r());
    let down = (&f.finite_diff(Direction::Minus) * &e_minus).scale_re(p.r());
    Ok(&(&up + &down) - &(f * kappa))
}

/// `integrate(|psi|^2, mu)`, a non-negative real.
pub fn norm(psi: &Amplitude, mu: &Measure) -> Result<f64> {
    if psi.len() != mu.len() {
        return Err(Error::LengthMismatch {
            context: "norm",
            left: psi.len(),
            right: mu.len(),
        });
    }
    Ok(psi
        .values()
        .iter()
        .zip(mu.values())
        .map(|(z, &m)| z.norm_sqr() * m)
        .sum())
}

/// `sum_i mu(i) Im(psi(i))^2`; zero exactly for a real amplitude.
pub fn imaginary_mass(psi: &Amplitude, mu: &Measure) -> Result<f64> {
    if psi.len() != mu.len() {
        return Err(Error::LengthMismatch {
            context: "imaginary_mass",
            left: psi.len(),
            right: mu.len(),
        });
    }
    Ok(psi
        .values()
        .iter()
        .zip(mu.values())
        .map(|(z, &m)| z.im * z.im * m)
        .sum())
}

/// Sub-site peak location of `|psi|^2` by quadratic interpolation through
/// the maximum site and its two neighbours.
pub fn peak_position(psi: &Amplitude) -> Result<f64> {
    peak_position_of(&psi.density())
}

/// Same interpolation applied to an arbitrary non-negative site series
/// (used to track the phase-field bump as well).
pub fn peak_position_of(values: &[f64]) -> Result<f64> {
    let n = values.len();
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let top = values[best];
    if values.iter().filter(|&&v| v == top).count() > 1 {
        return Err(Error::NoUniquePeak);
    }
    let before = values[(best + n - 1) % n];
    let after = values[(best + 1) % n];
    let curvature = before - 2.0 * top + after;
    if curvature == 0.0 || !curvature.is_finite() {
        return Err(Error::NoUniquePeak);
    }
    Ok(best as f64 + 0.5 * (before - after) / curvature)
}

/// Unwrap a series of periodic peak positions so that consecutive samples
/// never jump by more than half the window.
pub fn unwrap_periodic(series: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let len = n as f64;
    for &p in series {
        match out.last() {
            None => out.push(p),
            Some(&prev) => {
                let mut step = (p - prev).rem_euclid(len);
                if step > len / 2.0 {
                    step -= len;
                }
                out.push(prev + step);
            }
        }
    }
    out
}

/// Least-squares slope of `y` against `s`; `None` when fewer than two
/// samples or any non-finite entry.
pub fn least_squares_slope(s: &[f64], y: &[f64]) -> Option<f64> {
    if s.len() != y.len() || s.len() < 2 {
        return None;
    }
    if s.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return None;
    }
    let m = s.len() as f64;
    let s_mean = s.iter().sum::<f64>() / m;
    let y_mean = y.iter().sum::<f64>() / m;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&si, &yi) in s.iter().zip(y) {
        num += (si - s_mean) * (yi - y_mean);
        den += (si - s_mean) * (si - s_mean);
    }
    (den > 0.0).then(|| num / den)
}

/// Index range selecting the middle `frac` of a sample series; used to skip
/// initial transients and late seam effects when estimating peak velocity.
pub fn middle_window(len: usize, frac: f64) -> std::ops::Range<usize> {
    let skip = ((1.0 - frac) / 2.0 * len as f64).floor() as usize;
    skip..len.saturating_sub(skip)
}
