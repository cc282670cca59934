//! Quantum geodesic flows on the periodic integer lattice.
//!
//! The crate builds up in layers:
//!
//! - [`lattice`]: shifts, finite differences, the lattice Laplacian,
//!   edge-symmetric metrics and their ratio derivatives, measures, and
//!   1-forms on a periodic window of the integer line.
//! - [`velocity`]: geodesic velocity fields, the divergence scalar `kappa`,
//!   the reality condition that makes the amplitude flow unitary, the
//!   velocity equations for flat and generic metrics, and the polar
//!   parametrisation used on the constant metric.
//! - [`amplitude`]: the amplitude flow `psidot = -X(d psi) - psi kappa` and
//!   its diagnostics (norm, imaginary mass, peak tracking).
//! - [`evolution`]: fixed-step Runge-Kutta integration of the coupled
//!   system with conservation observers, plus a forward-Euler oracle.
//! - [`scenario`] / [`runner`]: plain-text scenario configuration, bundled
//!   presets, and CSV/JSON artifact output for external plotting.

// window types always hold at least 3 sites, so `len` has no empty case
#![allow(clippy::len_without_is_empty)]

pub mod amplitude;
pub mod error;
pub mod evolution;
pub mod lattice;
pub mod runner;
pub mod scenario;
pub mod velocity;

pub use amplitude::Amplitude;
pub use error::{Error, Result};
pub use evolution::{evolve, euler_oracle, rk4_step, FlowMode, FlowState, Trajectory};
pub use lattice::{Direction, EdgeMetric, LatticeFunction, Measure, OneForm, Window};
pub use scenario::{parse_config, ScenarioConfig};
pub use velocity::{MetricMode, PolarVelocity, VelocityField};
