//! Geodesic velocity fields on the lattice window.
//!
//! A velocity field is written in components against the dual basis,
//! `X = f_+ X^+ + f_- X^-`. This module provides the divergence/kappa
//! machinery, the geodesic velocity equations for constant-ratio ("flat")
//! and generic metrics, the reality condition that makes the amplitude flow
//! unitary, the auxiliary compatibility residual, and the polar
//! parametrisation `X^+ = r e^{i theta}` used for the constant metric.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Direction, EdgeMetric, LatticeFunction, Measure};

/// Relative tolerance used when a constant metric ratio is required.
pub const RHO_CONSTANT_TOL: f64 = 1e-9;

/// Which form of the velocity equations to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMode {
    /// Constant metric ratio; requires a divergence-compatible metric.
    Flat,
    /// Arbitrary positive metric, with the summed-state divergence.
    Generic,
}

/// Velocity field components `X^+ = X(e^+)` and `X^- = X(e^-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    x_plus: LatticeFunction,
    x_minus: LatticeFunction,
}

impl VelocityField {
    pub fn new(x_plus: LatticeFunction, x_minus: LatticeFunction) -> Result<Self> {
        if x_plus.len() != x_minus.len() {
            return Err(Error::LengthMismatch {
                context: "velocity components",
                left: x_plus.len(),
                right: x_minus.len(),
            });
        }
        for (context, part) in [("X^+", &x_plus), ("X^-", &x_minus)] {
            if let Some(index) = part
                .values()
                .iter()
                .position(|z| !(z.re.is_finite() && z.im.is_finite()))
            {
                return Err(Error::NonFinite { context, index });
            }
        }
        Ok(Self { x_plus, x_minus })
    }

    pub fn len(&self) -> usize {
        self.x_plus.len()
    }

    pub fn plus(&self) -> &LatticeFunction {
        &self.x_plus
    }

    pub fn minus(&self) -> &LatticeFunction {
        &self.x_minus
    }

    pub fn max_abs(&self) -> f64 {
        self.x_plus.max_abs().max(self.x_minus.max_abs())
    }
}

/// Polar data `X^+ = r e^{i theta}`, `X^- = -R_-(r e^{-i theta})`, with a
/// constant radius `r >= 0` and a real phase field `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarVelocity {
    r: f64,
    theta: LatticeFunction,
}

impl PolarVelocity {
    pub fn new(r: f64, theta: LatticeFunction) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidRadius(r));
        }
        if !theta.is_real() {
            return Err(Error::ComplexPhase);
        }
        Ok(Self { r, theta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> &LatticeFunction {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }
}

/// Phase factors `e^{i theta}` for a real phase field.
fn phase(theta: &LatticeFunction) -> LatticeFunction {
    theta.map(|t| Complex64::from_polar(1.0, t.re))
}

/// `X^+(i) = r e^{i theta(i)}`, `X^-(i) = -r e^{-i theta(i-1)}`.
///
/// The minus component is built as `-R_-(r * conj(e^{i theta}))` so the pair
/// satisfies the constant-measure reality condition exactly.
pub fn polar_to_field(p: &PolarVelocity) -> VelocityField {
    let e = phase(&p.theta);
    let x_plus = e.scale_re(p.r);
    let x_minus = x_plus.conj().shift(Direction::Minus).map(|z| -z);
    VelocityField::new(x_plus, x_minus).expect("polar data is finite")
}

/// Polar data extended to an arbitrary measure: the plus component is
/// `r e^{i theta}` and the minus component is fixed by reality with respect
/// to the summed state, `X^- = -R_-(mu conj(X^+)) / mu`.
pub fn polar_to_field_with_measure(p: &PolarVelocity, mu: &Measure) -> Result<VelocityField> {
    if p.len() != mu.len() {
        return Err(Error::LengthMismatch {
            context: "polar/measure",
            left: p.len(),
            right: mu.len(),
        });
    }
    let x_plus = phase(&p.theta).scale_re(p.r);
    let n = p.len() as isize;
    let x_minus = LatticeFunction::new(
        (0..n)
            .map(|i| -mu.get(i - 1) * x_plus.get(i - 1).conj() / mu.get(i))
            .collect(),
    )?;
    VelocityField::new(x_plus, x_minus)
}

/// Weight a function pointwise by measure values.
fn weigh(f: &LatticeFunction, mu: &Measure) -> LatticeFunction {
    let w = LatticeFunction::from_real(mu.values().to_vec()).expect("measure window");
    &w * f
}

/// Divergence with respect to the summed state,
/// `div(X) = -(1/mu) (d_-(mu X^+) + d_+(mu X^-))`,
/// the unique operator adjoint to the action on exact forms:
/// `integrate(f * div(X), mu) + integrate(X(df), mu) = 0` for all `f`.
pub fn div_int(x: &VelocityField, mu: &Measure) -> Result<LatticeFunction> {
    if x.len() != mu.len() {
        return Err(Error::LengthMismatch {
            context: "div_int",
            left: x.len(),
            right: mu.len(),
        });
    }
    let total = &weigh(x.plus(), mu).finite_diff(Direction::Minus)
        + &weigh(x.minus(), mu).finite_diff(Direction::Plus);
    let inv_mu =
        LatticeFunction::from_real(mu.values().iter().map(|m| -1.0 / m).collect())
            .expect("measure window");
    Ok(&inv_mu * &total)
}

/// `kappa = (1/2) div(X)` for an arbitrary measure.
pub fn kappa_general(x: &VelocityField, mu: &Measure) -> Result<LatticeFunction> {
    Ok(div_int(x, mu)?.scale_re(0.5))
}

/// `kappa = (1/2)((id - R_-/rho) X^+ + (id - rho R_+) X^-)` for a constant
/// metric ratio. Fails if the metric is not divergence-compatible.
pub fn kappa_flat(x: &VelocityField, g: &EdgeMetric) -> Result<LatticeFunction> {
    let rho = g.constant_rho(RHO_CONSTANT_TOL)?;
    Ok(kappa_flat_rho(x, rho))
}

fn kappa_flat_rho(x: &VelocityField, rho: f64) -> LatticeFunction {
    let plus = x.plus() - &x.plus().shift(Direction::Minus).scale_re(1.0 / rho);
    let minus = x.minus() - &x.minus().shift(Direction::Plus).scale_re(rho);
    (&plus + &minus).scale_re(0.5)
}

/// `kappa = -r d_-(cos theta)`, the divergence of a polar field on the
/// constant metric.
pub fn kappa_polar(p: &PolarVelocity) -> LatticeFunction {
    let cos = p.theta.map(|t| Complex64::new(t.re.cos(), 0.0));
    cos.finite_diff(Direction::Minus).scale_re(-p.r)
}

/// Residuals of the reality condition `X^pm* = -R_pm(mu X^mp)/mu`;
/// both components vanish exactly when `X` is real with respect to the
/// summed state. With `mu = g` and constant ratio this is
/// `X^pm* + rho^{pm 1} R_pm(X^mp)`.
pub fn reality_residual(
    x: &VelocityField,
    mu: &Measure,
) -> Result<(LatticeFunction, LatticeFunction)> {
    if x.len() != mu.len() {
        return Err(Error::LengthMismatch {
            context: "reality_residual",
            left: x.len(),
            right: mu.len(),
        });
    }
    let n = x.len() as isize;
    let res = |own: &LatticeFunction, other: &LatticeFunction, step: isize| {
        LatticeFunction::new(
            (0..n)
                .map(|i| {
                    own.get(i).conj() + mu.get(i + step) * other.get(i + step) / mu.get(i)
                })
                .collect(),
        )
        .expect("window size preserved")
    };
    Ok((
        res(x.plus(), x.minus(), 1),
        res(x.minus(), x.plus(), -1),
    ))
}

/// Right-hand side of the geodesic velocity equations.
///
/// In `Flat` mode the metric ratio must be constant and `kappa` comes from
/// [`kappa_flat`]; in `Generic` mode the pointwise ratios `rho_pm` are used
/// and `kappa` comes from [`kappa_general`] with the metric measure `mu = g`.
pub fn velocity_rhs(
    x: &VelocityField,
    g: &EdgeMetric,
    mode: MetricMode,
) -> Result<(LatticeFunction, LatticeFunction)> {
    match mode {
        MetricMode::Flat => {
            let rho = g.constant_rho(RHO_CONSTANT_TOL)?;
            let n = x.len();
            let rho_plus = LatticeFunction::from_real(vec![rho; n])?;
            let rho_minus = LatticeFunction::from_real(vec![1.0 / rho; n])?;
            let kappa = kappa_flat_rho(x, rho);
            Ok(rhs_from_parts(x, &rho_plus, &rho_minus, &kappa))
        }
        MetricMode::Generic => velocity_rhs_with_measure(x, g, &g.measure()),
    }
}

/// Generic-metric velocity equations with an explicit measure for `kappa`.
pub fn velocity_rhs_with_measure(
    x: &VelocityField,
    g: &EdgeMetric,
    mu: &Measure,
) -> Result<(LatticeFunction, LatticeFunction)> {
    if x.len() != g.len() {
        return Err(Error::LengthMismatch {
            context: "velocity_rhs",
            left: x.len(),
            right: g.len(),
        });
    }
    let (rho_plus, rho_minus) = g.rho();
    let kappa = kappa_general(x, mu)?;
    Ok(rhs_from_parts(x, &rho_plus, &rho_minus, &kappa))
}

/// `Xdot^+ = (d_+ kappa) X^+ + (1 - rho_+) X^+ X^+ - rho_+ (d_+ X^+) X^+
///           - (d_- X^+) X^-`, and the mirrored minus equation.
fn rhs_from_parts(
    x: &VelocityField,
    rho_plus: &LatticeFunction,
    rho_minus: &LatticeFunction,
    kappa: &LatticeFunction,
) -> (LatticeFunction, LatticeFunction) {
    let one = LatticeFunction::constant(x.len(), Complex64::new(1.0, 0.0))
        .expect("window size preserved");
    let component = |own: &LatticeFunction,
                     other: &LatticeFunction,
                     rho: &LatticeFunction,
                     fwd: Direction,
                     bwd: Direction| {
        let transport = &kappa.finite_diff(fwd) * own;
        let self_term = &(&(&one - rho) * own) * own;
        let advect = &(rho * &own.finite_diff(fwd)) * own;
        let cross = &own.finite_diff(bwd) * other;
        &(&(&transport + &self_term) - &advect) - &cross
    };
    (
        component(
            x.plus(),
            x.minus(),
            rho_plus,
            Direction::Plus,
            Direction::Minus,
        ),
        component(
            x.minus(),
            x.plus(),
            rho_minus,
            Direction::Minus,
            Direction::Plus,
        ),
    )
}

/// Residual of the auxiliary compatibility equation
/// `(d_- + rho d_+)(X^+ R_+ X^-) = (1 - rho)((R_+ - R_-/rho^2) X^+) X^+`
/// for a constant metric ratio; at `rho = 1` this is the lattice Laplacian
/// of `X^+ R_+ X^-`. A vanishing residual is what keeps an initially real
/// velocity field real under the flow.
pub fn aux_residual(x: &VelocityField, g: &EdgeMetric) -> Result<LatticeFunction> {
    let rho = g.constant_rho(RHO_CONSTANT_TOL)?;
    let p = x.plus() * &x.minus().shift(Direction::Plus);
    let lhs = &p.finite_diff(Direction::Minus)
        + &p.finite_diff(Direction::Plus).scale_re(rho);
    let bracket = &x.plus().shift(Direction::Plus)
        - &x.plus().shift(Direction::Minus).scale_re(1.0 / (rho * rho));
    let rhs = (&bracket * x.plus()).scale_re(1.0 - rho);
    Ok(&lhs - &rhs)
}

/// Phase flow of the polar parametrisation on the constant metric:
/// `thetadot = r (R_- - R_+)(sin theta)`, with `rdot = 0` (the radius is a
/// constant of motion).
pub fn theta_rhs(p: &PolarVelocity) -> LatticeFunction {
    let sin = p.theta.map(|t| Complex64::new(t.re.sin(), 0.0));
    (&sin.shift(Direction::Minus) - &sin.shift(Direction::Plus)).scale_re(p.r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lf(values: &[f64]) -> LatticeFunction {
        LatticeFunction::from_real(values.to_vec()).unwrap()
    }

    fn gaussian(n: usize, center: f64, width: f64, height: f64) -> LatticeFunction {
        lf(&(0..n)
            .map(|i| {
                let d = i as f64 - center;
                height * (-d * d / (2.0 * width * width)).exp()
            })
            .collect::<Vec<_>>())
    }

    fn random_field(n: usize, seed: u64) -> VelocityField {
        // small deterministic pseudo-random data, enough to break symmetry
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let plus =
            LatticeFunction::new((0..n).map(|_| c(next(), next())).collect()).unwrap();
        let minus =
            LatticeFunction::new((0..n).map(|_| c(next(), next())).collect()).unwrap();
        VelocityField::new(plus, minus).unwrap()
    }

    #[test]
    fn polar_of_zero_phase() {
        let p = PolarVelocity::new(1.0, LatticeFunction::zeros(5).unwrap()).unwrap();
        let x = polar_to_field(&p);
        for i in 0..5 {
            assert_eq!(x.plus().values()[i], c(1.0, 0.0));
            assert_eq!(x.minus().values()[i], c(-1.0, 0.0));
        }
    }

    #[test]
    fn polar_field_is_exactly_real() {
        let p = PolarVelocity::new(3.0, gaussian(32, 11.0, 4.0, 1.0)).unwrap();
        let x = polar_to_field(&p);
        let mu = Measure::uniform(32).unwrap();
        let (rp, rm) = reality_residual(&x, &mu).unwrap();
        assert_eq!(rp.max_abs(), 0.0);
        assert_eq!(rm.max_abs(), 0.0);
    }

    #[test]
    fn polar_with_measure_is_real() {
        let p = PolarVelocity::new(2.0, gaussian(16, 8.0, 3.0, 0.7)).unwrap();
        let mu = Measure::new((0..16).map(|i| 1.0 + 0.3 * (i as f64).sin().abs()).collect())
            .unwrap();
        let x = polar_to_field_with_measure(&p, &mu).unwrap();
        let (rp, rm) = reality_residual(&x, &mu).unwrap();
        assert!(rp.max_abs() < 1e-15);
        assert!(rm.max_abs() < 1e-15);
    }

    #[test]
    fn polar_rejects_bad_data() {
        assert!(matches!(
            PolarVelocity::new(-1.0, LatticeFunction::zeros(4).unwrap()),
            Err(Error::InvalidRadius(_))
        ));
        let complex_phase =
            LatticeFunction::new(vec![c(0.0, 0.1), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            PolarVelocity::new(1.0, complex_phase),
            Err(Error::ComplexPhase)
        ));
    }

    #[test]
    fn kappa_flat_of_constants_vanishes() {
        let x = VelocityField::new(
            LatticeFunction::constant(6, c(2.0, 1.0)).unwrap(),
            LatticeFunction::constant(6, c(-0.5, 0.3)).unwrap(),
        )
        .unwrap();
        let g = EdgeMetric::constant(6, 1.0).unwrap();
        assert_eq!(kappa_flat(&x, &g).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn kappa_flat_of_delta_bump() {
        // X^+ = delta at site 1, X^- = 0, rho = 1:
        // kappa(i) = -(X^+(i-1) - X^+(i))/2
        let x = VelocityField::new(
            lf(&[0.0, 1.0, 0.0, 0.0, 0.0]),
            LatticeFunction::zeros(5).unwrap(),
        )
        .unwrap();
        let g = EdgeMetric::constant(5, 1.0).unwrap();
        let k = kappa_flat(&x, &g).unwrap();
        assert_eq!(k.real_parts(), vec![0.0, 0.5, -0.5, 0.0, 0.0]);
    }

    #[test]
    fn kappa_flat_rejects_incompatible_metric() {
        let x = random_field(4, 3);
        let g = EdgeMetric::new(vec![1.0, 1.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            kappa_flat(&x, &g),
            Err(Error::NotDivergenceCompatible { .. })
        ));
    }

    #[test]
    fn kappa_polar_matches_flat_kappa() {
        let p = PolarVelocity::new(3.0, gaussian(64, 30.0, 5.0, 1.0)).unwrap();
        let x = polar_to_field(&p);
        let g = EdgeMetric::constant(64, 1.0).unwrap();
        let via_field = kappa_flat(&x, &g).unwrap();
        let via_polar = kappa_polar(&p);
        assert!((&via_field - &via_polar).max_abs() < 1e-14 * p.r());
    }

    #[test]
    fn kappa_general_with_uniform_measure_matches_flat() {
        let x = random_field(12, 7);
        let g = EdgeMetric::constant(12, 1.0).unwrap();
        let mu = Measure::uniform(12).unwrap();
        let a = kappa_flat(&x, &g).unwrap();
        let b = kappa_general(&x, &mu).unwrap();
        assert!((&a - &b).max_abs() < 1e-15);
    }

    #[test]
    fn kappa_general_real_for_real_fields() {
        // X^- determined by the reality condition makes kappa exactly real.
        let n = 24;
        let mu =
            Measure::new((0..n).map(|i| 1.5 + (i as f64 * 0.7).cos().abs()).collect())
                .unwrap();
        let seeded = random_field(n, 11);
        let x_plus = seeded.plus().clone();
        let x_minus = LatticeFunction::new(
            (0..n as isize)
                .map(|i| -mu.get(i - 1) * x_plus.get(i - 1).conj() / mu.get(i))
                .collect(),
        )
        .unwrap();
        let x = VelocityField::new(x_plus, x_minus).unwrap();
        let (rp, rm) = reality_residual(&x, &mu).unwrap();
        assert!(rp.max_abs() < 1e-14 && rm.max_abs() < 1e-14);
        let k = kappa_general(&x, &mu).unwrap();
        let imag = k.imag_parts().iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(imag <= 1e-12 * x.max_abs().max(1.0));
    }

    #[test]
    fn adjointness_of_div_int() {
        use crate::lattice::{eval_field, exterior_d, integrate};
        let n = 16;
        let x = random_field(n, 23);
        let f = random_field(n, 29).plus().clone();
        let mu =
            Measure::new((0..n).map(|i| 0.5 + ((i * i) % 7) as f64 * 0.3).collect())
                .unwrap();
        let div = div_int(&x, &mu).unwrap();
        let lhs = integrate(&(&f * &div), &mu).unwrap();
        let rhs = integrate(&eval_field(&exterior_d(&f), &x).unwrap(), &mu).unwrap();
        assert!((lhs + rhs).norm() < 1e-12 * n as f64);
    }

    #[test]
    fn reality_residual_of_unit_constants() {
        let one = LatticeFunction::constant(5, c(1.0, 0.0)).unwrap();
        let x = VelocityField::new(one.clone(), one).unwrap();
        let mu = Measure::uniform(5).unwrap();
        let (rp, rm) = reality_residual(&x, &mu).unwrap();
        for i in 0..5 {
            assert_eq!(rp.values()[i], c(2.0, 0.0));
            assert_eq!(rm.values()[i], c(2.0, 0.0));
        }
    }

    #[test]
    fn reality_residual_geometric_measure_matches_rho_form() {
        // With mu = g geometric, R_pm(mu X^mp)/mu = rho^{pm1} R_pm(X^mp)
        // at interior sites.
        let lambda = 1.5;
        let n = 12;
        let g = EdgeMetric::geometric(n, 1.0, lambda).unwrap();
        let mu = g.measure();
        let x = random_field(n, 41);
        let (rp, rm) = reality_residual(&x, &mu).unwrap();
        for i in 1..n - 1 {
            let ii = i as isize;
            let expect_p = x.plus().get(ii).conj() + lambda * x.minus().get(ii + 1);
            let expect_m = x.minus().get(ii).conj() + x.plus().get(ii - 1) / lambda;
            assert!((rp.get(ii) - expect_p).norm() < 1e-12);
            assert!((rm.get(ii) - expect_m).norm() < 1e-12);
        }
    }

    #[test]
    fn velocity_rhs_constants_flat_metric() {
        let x = VelocityField::new(
            LatticeFunction::constant(8, c(1.3, -0.2)).unwrap(),
            LatticeFunction::constant(8, c(0.4, 0.9)).unwrap(),
        )
        .unwrap();
        let g = EdgeMetric::constant(8, 2.0).unwrap();
        let (dp, dm) = velocity_rhs(&x, &g, MetricMode::Flat).unwrap();
        assert_eq!(dp.max_abs(), 0.0);
        assert_eq!(dm.max_abs(), 0.0);
    }

    #[test]
    fn velocity_rhs_constants_at_lambda() {
        // Open-window diagnostic: constant components on a geometric metric
        // reduce the equations to Xdot^+ = (1-lambda) c^2,
        // Xdot^- = (1 - 1/lambda) d^2.
        let lambda = 2.0;
        let (cv, dv) = (c(1.5, 0.5), c(-0.3, 1.1));
        let x = VelocityField::new(
            LatticeFunction::constant(10, cv).unwrap(),
            LatticeFunction::constant(10, dv).unwrap(),
        )
        .unwrap();
        let g = EdgeMetric::geometric(10, 1.0, lambda).unwrap();
        let (dp, dm) = velocity_rhs(&x, &g, MetricMode::Flat).unwrap();
        for i in 0..10 {
            assert!((dp.values()[i] - (1.0 - lambda) * cv * cv).norm() < 1e-12);
            assert!((dm.values()[i] - (1.0 - 1.0 / lambda) * dv * dv).norm() < 1e-12);
        }
    }

    #[test]
    fn velocity_rhs_flat_requires_compatible_metric() {
        let x = random_field(4, 5);
        let g = EdgeMetric::new(vec![1.0, 1.0, 2.0, 1.0]).unwrap();
        assert!(velocity_rhs(&x, &g, MetricMode::Flat).is_err());
        assert!(velocity_rhs(&x, &g, MetricMode::Generic).is_ok());
    }

    #[test]
    fn generic_rhs_matches_flat_rhs_on_constant_metric() {
        let x = random_field(16, 13);
        let g = EdgeMetric::constant(16, 1.0).unwrap();
        let (fp, fm) = velocity_rhs(&x, &g, MetricMode::Flat).unwrap();
        let (gp, gm) = velocity_rhs(&x, &g, MetricMode::Generic).unwrap();
        assert!((&fp - &gp).max_abs() < 1e-13);
        assert!((&fm - &gm).max_abs() < 1e-13);
    }

    #[test]
    fn polar_flow_consistency() {
        // velocity_rhs on a polar field equals the push-forward of
        // (rdot = 0, thetadot = theta_rhs) through the parametrisation.
        let n = 48;
        let p = PolarVelocity::new(3.0, gaussian(n, 20.0, 5.0, 1.0)).unwrap();
        let x = polar_to_field(&p);
        let g = EdgeMetric::constant(n, 1.0).unwrap();
        let (dp, dm) = velocity_rhs(&x, &g, MetricMode::Flat).unwrap();
        let tdot = theta_rhs(&p);

        // analytic differential: dX^+ = i thetadot X^+,
        // dX^-(i) = -i thetadot(i-1) X^-(i)
        let i_unit = c(0.0, 1.0);
        let expect_p = &tdot.scale(i_unit) * x.plus();
        let expect_m = &tdot.shift(Direction::Minus).scale(-i_unit) * x.minus();
        assert!((&dp - &expect_p).max_abs() < 1e-12 * p.r().powi(2));
        assert!((&dm - &expect_m).max_abs() < 1e-12 * p.r().powi(2));

        // finite-difference Jacobian through the parametrisation, at unit
        // radius so the central-difference rounding floor sits below 1e-10
        let p = PolarVelocity::new(1.0, gaussian(n, 20.0, 5.0, 0.5)).unwrap();
        let x = polar_to_field(&p);
        let (dp, dm) = velocity_rhs(&x, &g, MetricMode::Flat).unwrap();
        let tdot = theta_rhs(&p);
        let eps = 1e-5;
        let fd = |sign: f64| {
            let bumped = &p.theta().clone() + &tdot.scale_re(sign * eps);
            polar_to_field(&PolarVelocity::new(p.r(), bumped).unwrap())
        };
        let (hi, lo) = (fd(1.0), fd(-1.0));
        let fd_p = (hi.plus() - lo.plus()).scale_re(0.5 / eps);
        let fd_m = (hi.minus() - lo.minus()).scale_re(0.5 / eps);
        assert!((&dp - &fd_p).max_abs() < 1e-10);
        assert!((&dm - &fd_m).max_abs() < 1e-10);
    }

    #[test]
    fn expanded_kappa_differences() {
        // Differencing kappa reproduces the expanded stencils
        // 2 d_+ kappa = Delta X^+ - d_+^2 X^- at rho = 1, and the general
        // constant-rho forms.
        for (seed, rho) in [(3u64, 1.0), (17, 1.5), (19, 0.6)] {
            let n = 32;
            let x = random_field(n, seed);
            let k = kappa_flat_rho(&x, rho);
            let dkp = k.finite_diff(Direction::Plus);
            let dkm = k.finite_diff(Direction::Minus);

            let dp_xm = x.minus().finite_diff(Direction::Plus);
            let expect_p = (&(&dp_xm - &dp_xm.shift(Direction::Plus).scale_re(rho))
                + &(&x.plus().finite_diff(Direction::Plus)
                    + &x.plus().finite_diff(Direction::Minus).scale_re(1.0 / rho)))
                .scale_re(0.5);
            assert!((&dkp - &expect_p).max_abs() < 1e-12 * x.max_abs());

            let dm_xp = x.plus().finite_diff(Direction::Minus);
            let expect_m = (&(&dm_xp - &dm_xp.shift(Direction::Minus).scale_re(1.0 / rho))
                + &(&x.minus().finite_diff(Direction::Minus)
                    + &x.minus().finite_diff(Direction::Plus).scale_re(rho)))
                .scale_re(0.5);
            assert!((&dkm - &expect_m).max_abs() < 1e-12 * x.max_abs());

            if rho == 1.0 {
                let expect =
                    &x.plus().laplacian() - &x
                        .minus()
                        .finite_diff(Direction::Plus)
                        .finite_diff(Direction::Plus);
                assert!((&dkp.scale_re(2.0) - &expect).max_abs() < 1e-12 * x.max_abs());
            }
        }
    }

    #[test]
    fn aux_residual_of_polar_field_vanishes() {
        let p = PolarVelocity::new(3.0, gaussian(40, 15.0, 4.0, 1.0)).unwrap();
        let x = polar_to_field(&p);
        let g = EdgeMetric::constant(40, 1.0).unwrap();
        // X^+ R_+ X^- = -r^2 identically, so the Laplacian vanishes.
        assert!(aux_residual(&x, &g).unwrap().max_abs() < 1e-14 * p.r().powi(2));
    }

    #[test]
    fn aux_residual_of_affine_product_interior() {
        let n = 16;
        let x = VelocityField::new(
            lf(&(0..n).map(|i| 0.25 * i as f64 - 1.0).collect::<Vec<_>>()),
            LatticeFunction::constant(n, c(1.0, 0.0)).unwrap(),
        )
        .unwrap();
        let g = EdgeMetric::constant(n, 1.0).unwrap();
        let res = aux_residual(&x, &g).unwrap();
        for i in 1..n - 2 {
            assert!(res.values()[i].norm() < 1e-13, "site {i}");
        }
    }

    #[test]
    fn aux_residual_hand_computed_instance() {
        // Frozen five-site instance, rho = 1:
        // P(i) = X^+(i) X^-(i+1), residual = Delta P.
        let x = VelocityField::new(
            LatticeFunction::new(vec![
                c(1.0, 0.0),
                c(0.0, 1.0),
                c(-1.0, 0.0),
                c(2.0, 0.0),
                c(0.0, 0.0),
            ])
            .unwrap(),
            LatticeFunction::new(vec![
                c(1.0, 0.0),
                c(1.0, 1.0),
                c(0.0, 0.0),
                c(-2.0, 0.0),
                c(1.0, 0.0),
            ])
            .unwrap(),
        )
        .unwrap();
        let g = EdgeMetric::constant(5, 1.0).unwrap();
        let res = aux_residual(&x, &g).unwrap();
        let expect = [c(-2.0, -2.0), c(3.0, 1.0), c(-2.0, 0.0), c(-2.0, 0.0), c(3.0, 1.0)];
        for (i, (got, want)) in res.values().iter().zip(&expect).enumerate() {
            assert!((got - want).norm() < 1e-14, "site {i}");
        }
    }

    #[test]
    fn theta_rhs_of_constant_phase() {
        let p = PolarVelocity::new(
            2.0,
            LatticeFunction::constant(9, c(0.8, 0.0)).unwrap(),
        )
        .unwrap();
        assert_eq!(theta_rhs(&p).max_abs(), 0.0);
    }

    #[test]
    fn theta_rhs_at_sin_zeros() {
        let pi = std::f64::consts::PI;
        let p = PolarVelocity::new(
            1.0,
            lf(&[0.0, pi, 0.0, pi, 0.0, pi]),
        )
        .unwrap();
        // sin(pi) is zero only to rounding, so the stencil is O(1e-16)
        assert!(theta_rhs(&p).max_abs() < 1e-15);
    }

    #[test]
    fn theta_rhs_delta_stencil() {
        let n = 8;
        let mut vals = vec![0.0; n];
        vals[0] = std::f64::consts::FRAC_PI_2;
        let p = PolarVelocity::new(1.0, lf(&vals)).unwrap();
        let td = theta_rhs(&p);
        for i in 0..n {
            let expect = match i {
                1 => 1.0,
                i if i == n - 1 => -1.0,
                _ => 0.0,
            };
            assert!((td.values()[i].re - expect).abs() < 1e-15, "site {i}");
        }
    }

    proptest! {
        #[test]
        fn theta_rhs_dyadic_homogeneity(
            values in proptest::collection::vec(-3.0f64..3.0, 4..24),
            r in 0.0f64..4.0,
        ) {
            // degree-one homogeneity in r, exact for dyadic rescaling
            let theta = lf(&values);
            let p1 = PolarVelocity::new(r, theta.clone()).unwrap();
            let p2 = PolarVelocity::new(2.0 * r, theta).unwrap();
            let a = theta_rhs(&p1).scale_re(2.0);
            let b = theta_rhs(&p2);
            prop_assert_eq!(a.values(), b.values());
        }

        #[test]
        fn velocity_rhs_dyadic_homogeneity(seed in 0u64..200) {
            // X -> 2X doubles the RHS apart from rounding: every term is
            // quadratic in X except the kappa transport, which is too.
            let x = random_field(12, seed);
            let doubled = VelocityField::new(
                x.plus().scale_re(2.0),
                x.minus().scale_re(2.0),
            ).unwrap();
            let g = EdgeMetric::constant(12, 1.0).unwrap();
            let (dp1, dm1) = velocity_rhs(&x, &g, MetricMode::Flat).unwrap();
            let (dp2, dm2) = velocity_rhs(&doubled, &g, MetricMode::Flat).unwrap();
            prop_assert!((&dp1.scale_re(4.0) - &dp2).max_abs() < 1e-12 * dp2.max_abs().max(1.0));
            prop_assert!((&dm1.scale_re(4.0) - &dm2).max_abs() < 1e-12 * dm2.max_abs().max(1.0));
        }
    }
}
