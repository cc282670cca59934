//! Interactive browser demo of the lattice geodesic flow.
//!
//! Exposes a stepping simulator to JavaScript: construct one of the bundled
//! scenarios, advance it by a number of Runge-Kutta steps per animation
//! frame, and read the fields back as plain float arrays for plotting on a
//! canvas.

use wasm_bindgen::prelude::*;

use geodez::amplitude::{imaginary_mass, norm, peak_position, Amplitude};
use geodez::evolution::{rk4_step, FlowState, VelocityState};
use geodez::lattice::{EdgeMetric, LatticeFunction};
use geodez::velocity::{polar_to_field_with_measure, PolarVelocity};

fn gaussian(n: usize, center: f64, width: f64, height: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let d = i as f64 - center;
            height * (-d * d / (2.0 * width * width)).exp()
        })
        .collect()
}

fn err_to_js(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// A stepping geodesic-flow simulation driven from JavaScript.
#[wasm_bindgen]
pub struct FlowSim {
    state: FlowState,
    ds: f64,
    norm0: f64,
}

#[wasm_bindgen]
impl FlowSim {
    /// Flat-polar flow: Gaussian phase bump (`theta_center/width/height`)
    /// plus a normalized Gaussian amplitude (`psi_center/width`), radius `r`.
    #[wasm_bindgen(constructor)]
    #[allow(clippy::too_many_arguments)] // flat scalar signature for JS
    pub fn new(
        n: usize,
        r: f64,
        theta_center: f64,
        theta_width: f64,
        theta_height: f64,
        psi_center: f64,
        psi_width: f64,
        ds: f64,
    ) -> Result<FlowSim, JsValue> {
        Self::build(
            n,
            r,
            gaussian(n, theta_center, theta_width, theta_height),
            psi_center,
            psi_width,
            ds,
            false,
        )
    }

    /// Same initial data, but evolving the velocity components directly by
    /// the generic-metric equations (a cross-check of the polar flow).
    #[allow(clippy::too_many_arguments)] // flat scalar signature for JS
    pub fn generic(
        n: usize,
        r: f64,
        theta_center: f64,
        theta_width: f64,
        theta_height: f64,
        psi_center: f64,
        psi_width: f64,
        ds: f64,
    ) -> Result<FlowSim, JsValue> {
        Self::build(
            n,
            r,
            gaussian(n, theta_center, theta_width, theta_height),
            psi_center,
            psi_width,
            ds,
            true,
        )
    }

    /// Dispersion control: zero phase, broad packet moving at group
    /// velocity `2r`.
    pub fn transport_control(
        n: usize,
        r: f64,
        psi_center: f64,
        psi_width: f64,
        ds: f64,
    ) -> Result<FlowSim, JsValue> {
        Self::build(n, r, vec![0.0; n], psi_center, psi_width, ds, false)
    }

    fn build(
        n: usize,
        r: f64,
        theta: Vec<f64>,
        psi_center: f64,
        psi_width: f64,
        ds: f64,
        generic: bool,
    ) -> Result<FlowSim, JsValue> {
        if !ds.is_finite() || ds <= 0.0 {
            return Err(JsValue::from_str("ds must be positive"));
        }
        let metric = EdgeMetric::constant(n, 1.0).map_err(err_to_js)?;
        let measure = metric.measure();
        let theta = LatticeFunction::from_real(theta).map_err(err_to_js)?;
        let polar = PolarVelocity::new(r, theta).map_err(err_to_js)?;

        let raw = Amplitude::new(
            LatticeFunction::from_real(gaussian(n, psi_center, psi_width, 1.0))
                .map_err(err_to_js)?,
        )
        .map_err(err_to_js)?;
        let raw_norm = norm(&raw, &measure).map_err(err_to_js)?;
        let psi = Amplitude::new(raw.function().scale_re(1.0 / raw_norm.sqrt()))
            .map_err(err_to_js)?;

        let state = if generic {
            let field = polar_to_field_with_measure(&polar, &measure).map_err(err_to_js)?;
            FlowState::generic(field, psi, metric, measure)
        } else {
            FlowState::flat_polar(polar, psi, metric, measure)
        }
        .map_err(err_to_js)?;
        let norm0 = norm(state.psi(), state.measure()).map_err(err_to_js)?;
        Ok(FlowSim { state, ds, norm0 })
    }

    /// Advance the flow by `steps` Runge-Kutta steps.
    pub fn step(&mut self, steps: usize) -> Result<(), JsValue> {
        for _ in 0..steps {
            self.state = rk4_step(&self.state, self.ds).map_err(err_to_js)?;
        }
        Ok(())
    }

    pub fn s(&self) -> f64 {
        self.state.s()
    }

    pub fn size(&self) -> usize {
        self.state.len()
    }

    /// Phase field: `theta` in flat-polar mode, `arg(X^+)` in generic mode.
    pub fn theta(&self) -> Vec<f64> {
        match self.state.velocity() {
            VelocityState::Polar(p) => p.theta().real_parts(),
            VelocityState::Field(x) => x.plus().values().iter().map(|z| z.arg()).collect(),
        }
    }

    /// Divergence scalar `kappa` (real part).
    pub fn kappa(&self) -> Vec<f64> {
        match self.state.kappa() {
            Ok(k) => k.real_parts(),
            Err(_) => vec![f64::NAN; self.state.len()],
        }
    }

    pub fn psi_re(&self) -> Vec<f64> {
        self.state.psi().values().iter().map(|z| z.re).collect()
    }

    pub fn psi_im(&self) -> Vec<f64> {
        self.state.psi().values().iter().map(|z| z.im).collect()
    }

    /// Density `|psi|^2`.
    pub fn density(&self) -> Vec<f64> {
        self.state.psi().density()
    }

    /// Relative norm drift since construction; stays at rounding level.
    pub fn norm_drift(&self) -> f64 {
        match norm(self.state.psi(), self.state.measure()) {
            Ok(n) => (n - self.norm0) / self.norm0,
            Err(_) => f64::NAN,
        }
    }

    /// Weight of the imaginary part, `sum mu Im(psi)^2`; zero for a real
    /// amplitude and strictly positive once the flow turns it complex.
    pub fn imag_mass(&self) -> f64 {
        imaginary_mass(self.state.psi(), self.state.measure()).unwrap_or(f64::NAN)
    }

    /// Sub-site peak position of the density (NaN when flat).
    pub fn peak(&self) -> f64 {
        peak_position(self.state.psi()).unwrap_or(f64::NAN)
    }
}
