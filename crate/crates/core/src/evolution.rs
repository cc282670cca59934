//! Time integration of the coupled geodesic system.
//!
//! Flat-polar mode evolves the pair `(theta, psi)` with the radius held
//! constant; generic mode evolves `(X^+, X^-, psi)` directly by the velocity
//! equations. Both use fixed-step classical Runge-Kutta with the divergence
//! scalar recomputed at every internal stage, so conservation diagnostics
//! (norm drift, reality and auxiliary residuals) act as the error monitor.

use num_complex::Complex64;

use crate::amplitude::{
    amplitude_rhs, amplitude_rhs_polar, imaginary_mass, norm, peak_position, Amplitude,
};
use crate::error::{Error, Result};
use crate::lattice::{EdgeMetric, LatticeFunction, Measure, Window};
use crate::velocity::{
    aux_residual, kappa_general, kappa_polar, polar_to_field, reality_residual, theta_rhs,
    velocity_rhs_with_measure, PolarVelocity, VelocityField, RHO_CONSTANT_TOL,
};

/// Any evolving component whose magnitude passes this bound aborts the run.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Norm drift beyond this flags the trajectory as suspect.
pub const NORM_DRIFT_WARN: f64 = 1e-6;

/// Sites this close to the seam are excluded from residual norms on
/// open-window metrics.
const SEAM_MARGIN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMode {
    FlatPolar,
    Generic,
}

/// The evolving velocity data.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityState {
    Polar(PolarVelocity),
    Field(VelocityField),
}

/// Full state of the coupled flow at one geodesic time.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    s: f64,
    velocity: VelocityState,
    psi: Amplitude,
    metric: EdgeMetric,
    measure: Measure,
}

impl FlowState {
    /// Flat-polar state: requires a constant metric (`rho = 1`) and the
    /// measure induced by the metric.
    pub fn flat_polar(
        polar: PolarVelocity,
        psi: Amplitude,
        metric: EdgeMetric,
        measure: Measure,
    ) -> Result<Self> {
        let n = polar.len();
        if psi.len() != n || metric.len() != n || measure.len() != n {
            return Err(Error::LengthMismatch {
                context: "flow state",
                left: n,
                right: psi.len().max(metric.len()).max(measure.len()),
            });
        }
        let rho = metric
            .constant_rho(RHO_CONSTANT_TOL)
            .map_err(|_| Error::FlatPolarMetric)?;
        if (rho - 1.0).abs() > RHO_CONSTANT_TOL {
            return Err(Error::FlatPolarMetric);
        }
        if measure.values() != metric.values() {
            return Err(Error::FlatPolarMeasure);
        }
        Ok(Self {
            s: 0.0,
            velocity: VelocityState::Polar(polar),
            psi,
            metric,
            measure,
        })
    }

    /// Generic state: arbitrary positive metric and measure.
    pub fn generic(
        field: VelocityField,
        psi: Amplitude,
        metric: EdgeMetric,
        measure: Measure,
    ) -> Result<Self> {
        let n = field.len();
        if psi.len() != n || metric.len() != n || measure.len() != n {
            return Err(Error::LengthMismatch {
                context: "flow state",
                left: n,
                right: psi.len().max(metric.len()).max(measure.len()),
            });
        }
        Ok(Self {
            s: 0.0,
            velocity: VelocityState::Field(field),
            psi,
            metric,
            measure,
        })
    }

    pub fn mode(&self) -> FlowMode {
        match self.velocity {
            VelocityState::Polar(_) => FlowMode::FlatPolar,
            VelocityState::Field(_) => FlowMode::Generic,
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn velocity(&self) -> &VelocityState {
        &self.velocity
    }

    pub fn psi(&self) -> &Amplitude {
        &self.psi
    }

    pub fn metric(&self) -> &EdgeMetric {
        &self.metric
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// The velocity field, reconstructed from polar data when needed.
    pub fn field(&self) -> VelocityField {
        match &self.velocity {
            VelocityState::Polar(p) => polar_to_field(p),
            VelocityState::Field(x) => x.clone(),
        }
    }

    /// The divergence scalar of the current velocity data.
    pub fn kappa(&self) -> Result<LatticeFunction> {
        match &self.velocity {
            VelocityState::Polar(p) => Ok(kappa_polar(p)),
            VelocityState::Field(x) => kappa_general(x, &self.measure),
        }
    }

    fn pack(&self) -> Vec<Complex64> {
        let mut y = Vec::new();
        match &self.velocity {
            VelocityState::Polar(p) => y.extend_from_slice(p.theta().values()),
            VelocityState::Field(x) => {
                y.extend_from_slice(x.plus().values());
                y.extend_from_slice(x.minus().values());
            }
        }
        y.extend_from_slice(self.psi.values());
        y
    }

    fn unpack(&self, y: Vec<Complex64>, s: f64) -> Result<Self> {
        let n = self.len();
        let velocity = match &self.velocity {
            VelocityState::Polar(p) => VelocityState::Polar(PolarVelocity::new(
                p.r(),
                LatticeFunction::new(y[..n].to_vec())?,
            )?),
            VelocityState::Field(_) => VelocityState::Field(VelocityField::new(
                LatticeFunction::new(y[..n].to_vec())?,
                LatticeFunction::new(y[n..2 * n].to_vec())?,
            )?),
        };
        let psi = Amplitude::new(LatticeFunction::new(y[y.len() - n..].to_vec())?)?;
        Ok(Self {
            s,
            velocity,
            psi,
            metric: self.metric.clone(),
            measure: self.measure.clone(),
        })
    }

    /// Joint right-hand side on the packed vector, with the divergence
    /// scalar recomputed from the stage velocity.
    fn eval_rhs(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.len();
        let mut out = Vec::with_capacity(y.len());
        match &self.velocity {
            VelocityState::Polar(p) => {
                let theta = LatticeFunction::new(y[..n].to_vec())?;
                let psi = Amplitude::new(LatticeFunction::new(y[n..].to_vec())?)?;
                let stage = PolarVelocity::new(p.r(), theta)?;
                let kappa = kappa_polar(&stage);
                out.extend_from_slice(theta_rhs(&stage).values());
                out.extend_from_slice(amplitude_rhs_polar(&psi, &stage, &kappa)?.values());
            }
            VelocityState::Field(_) => {
                let x = VelocityField::new(
                    LatticeFunction::new(y[..n].to_vec())?,
                    LatticeFunction::new(y[n..2 * n].to_vec())?,
                )?;
                let psi = Amplitude::new(LatticeFunction::new(y[2 * n..].to_vec())?)?;
                let (dp, dm) = velocity_rhs_with_measure(&x, &self.metric, &self.measure)?;
                let kappa = kappa_general(&x, &self.measure)?;
                out.extend_from_slice(dp.values());
                out.extend_from_slice(dm.values());
                out.extend_from_slice(amplitude_rhs(&psi, &x, &kappa)?.values());
            }
        }
        Ok(out)
    }
}

fn axpy(y: &[Complex64], a: f64, k: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(k).map(|(&yi, &ki)| yi + a * ki).collect()
}

fn rk4_vec(
    y: &[Complex64],
    ds: f64,
    rhs: &impl Fn(&[Complex64]) -> Result<Vec<Complex64>>,
) -> Result<Vec<Complex64>> {
    let k1 = rhs(y)?;
    let k2 = rhs(&axpy(y, ds / 2.0, &k1))?;
    let k3 = rhs(&axpy(y, ds / 2.0, &k2))?;
    let k4 = rhs(&axpy(y, ds, &k3))?;
    Ok(y.iter()
        .zip(&k1)
        .zip(&k2)
        .zip(&k3)
        .zip(&k4)
        .map(|((((&yi, &a), &b), &c), &d)| yi + ds / 6.0 * (a + 2.0 * b + 2.0 * c + d))
        .collect())
}

fn check_bounded(y: &[Complex64], s: f64) -> Result<()> {
    for z in y {
        let m = z.norm();
        if !m.is_finite() || m > DIVERGENCE_LIMIT {
            return Err(Error::Diverged {
                s,
                reason: format!("component magnitude {m:.3e} exceeded {DIVERGENCE_LIMIT:.0e}"),
            });
        }
    }
    Ok(())
}

/// One classical fourth-order Runge-Kutta step applied jointly to all
/// evolving components. The returned error carries the geodesic time of the
/// last good state.
pub fn rk4_step(state: &FlowState, ds: f64) -> Result<FlowState> {
    assert!(ds > 0.0, "step size must be positive");
    let y = state.pack();
    let rhs = |v: &[Complex64]| state.eval_rhs(v);
    let next = rk4_vec(&y, ds, &rhs).map_err(|e| diverged_at(e, state.s))?;
    check_bounded(&next, state.s)?;
    state.unpack(next, state.s + ds)
}

/// Forward-Euler step; retained as an independent cross-check of the
/// Runge-Kutta path.
pub fn euler_step(state: &FlowState, ds: f64) -> Result<FlowState> {
    assert!(ds > 0.0, "step size must be positive");
    let y = state.pack();
    let k = state.eval_rhs(&y).map_err(|e| diverged_at(e, state.s))?;
    let next = axpy(&y, ds, &k);
    check_bounded(&next, state.s)?;
    state.unpack(next, state.s + ds)
}

fn diverged_at(e: Error, s: f64) -> Error {
    match e {
        Error::NonFinite { context, .. } => Error::Diverged {
            s,
            reason: format!("non-finite value in {context} while evaluating the flow"),
        },
        other => other,
    }
}

/// Per-sample scalar observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observers {
    pub norm: f64,
    pub imag_mass: f64,
    /// Sub-site peak of `|psi|^2`; NaN when the density has no unique peak.
    pub peak_psi: f64,
    /// Max magnitude of the auxiliary residual; NaN when the metric ratio is
    /// not constant (no closed form applies).
    pub max_aux_residual: f64,
    pub max_reality_residual: f64,
}

/// One recorded snapshot of the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub s: f64,
    /// Phase field in flat-polar mode.
    pub theta: Option<LatticeFunction>,
    pub field: VelocityField,
    pub kappa: LatticeFunction,
    pub psi: Amplitude,
    pub observers: Observers,
}

/// Recorded trajectory: strictly increasing sample times with constant
/// snapshot shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: FlowMode,
    pub window: usize,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn initial_norm(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.observers.norm)
    }

    pub fn final_state_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.s)
    }

    /// Maximum of `|norm(s) - norm(0)| / norm(0)` over the samples.
    pub fn max_norm_drift(&self) -> f64 {
        let n0 = self.initial_norm();
        if n0 == 0.0 {
            return 0.0;
        }
        self.samples
            .iter()
            .map(|s| (s.observers.norm - n0).abs() / n0)
            .fold(0.0, f64::max)
    }

    pub fn norm_drift_warning(&self) -> bool {
        self.max_norm_drift() > NORM_DRIFT_WARN
    }

    pub fn max_aux_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.observers.max_aux_residual)
            .fold(0.0, f64::max)
    }

    pub fn max_reality_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.observers.max_reality_residual)
            .fold(0.0, f64::max)
    }

    pub fn sample_times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.s).collect()
    }

    /// Peak positions of `|psi|^2` per sample (NaN where undefined).
    pub fn psi_peak_series(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.observers.peak_psi).collect()
    }

    /// Peak positions of `theta^2` per sample, when the phase is evolved.
    pub fn theta_peak_series(&self) -> Option<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| {
                s.theta.as_ref().map(|t| {
                    crate::amplitude::peak_position_of(
                        &t.values().iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(),
                    )
                    .unwrap_or(f64::NAN)
                })
            })
            .collect()
    }
}

/// Sites whose residual stencils stay clear of the seam.
fn masked_max(f: &LatticeFunction, window: Window) -> f64 {
    let n = f.len();
    let range = match window {
        Window::Periodic => 0..n,
        Window::Open => SEAM_MARGIN..n.saturating_sub(SEAM_MARGIN),
    };
    range
        .map(|i| f.values()[i].norm())
        .fold(0.0, f64::max)
}

fn sample_state(state: &FlowState) -> Result<Sample> {
    let field = state.field();
    let kappa = state.kappa()?;
    let window = state.metric().window();
    let (res_p, res_m) = reality_residual(&field, state.measure())?;
    let max_reality = masked_max(&res_p, window).max(masked_max(&res_m, window));
    let max_aux = match aux_residual(&field, state.metric()) {
        Ok(res) => masked_max(&res, window),
        Err(Error::NotDivergenceCompatible { .. }) => f64::NAN,
        Err(e) => return Err(e),
    };
    let observers = Observers {
        norm: norm(state.psi(), state.measure())?,
        imag_mass: imaginary_mass(state.psi(), state.measure())?,
        peak_psi: peak_position(state.psi()).unwrap_or(f64::NAN),
        max_aux_residual: max_aux,
        max_reality_residual: max_reality,
    };
    let theta = match state.velocity() {
        VelocityState::Polar(p) => Some(p.theta().clone()),
        VelocityState::Field(_) => None,
    };
    Ok(Sample {
        s: state.s(),
        theta,
        field,
        kappa,
        psi: state.psi().clone(),
        observers,
    })
}

fn integrate_with(
    state0: &FlowState,
    ds: f64,
    n_steps: usize,
    record_every: usize,
    step: impl Fn(&FlowState, f64) -> Result<FlowState>,
) -> Result<Trajectory> {
    assert!(ds > 0.0, "step size must be positive");
    assert!(n_steps >= 1, "need at least one step");
    assert!(record_every >= 1, "recording stride must be positive");
    let mut samples = vec![sample_state(state0)?];
    let mut state = state0.clone();
    for k in 1..=n_steps {
        state = step(&state, ds)?;
        if k % record_every == 0 {
            samples.push(sample_state(&state)?);
        }
    }
    Ok(Trajectory {
        mode: state0.mode(),
        window: state0.len(),
        samples,
    })
}

/// Repeated Runge-Kutta steps with observer sampling every `record_every`
/// steps. Identical inputs produce bit-identical trajectories.
pub fn evolve(
    state0: &FlowState,
    ds: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<Trajectory> {
    integrate_with(state0, ds, n_steps, record_every, rk4_step)
}

/// Forward-Euler integration recording every step; used to cross-validate
/// the Runge-Kutta path as `ds -> 0`.
pub fn euler_oracle(state0: &FlowState, ds: f64, n_steps: usize) -> Result<Trajectory> {
    integrate_with(state0, ds, n_steps, 1, euler_step)
}
