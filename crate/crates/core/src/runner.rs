//! Scenario execution and serialization.
//!
//! A run produces three artifacts in the output directory:
//! `fields.csv` (per-site snapshots), `summary.csv` (per-sample observers),
//! and `run.json` (the fully resolved configuration plus diagnostics, enough
//! to reproduce the run bit for bit).

use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::{
    least_squares_slope, middle_window, norm, unwrap_periodic, Amplitude,
};
use crate::error::Error;
use crate::evolution::{evolve, FlowState, Trajectory};
use crate::lattice::{EdgeMetric, LatticeFunction, Measure};
use crate::scenario::{
    MeasureKind, MetricKind, ModeKind, PeakField, PsiKind, ScenarioConfig, ThetaKind,
};
use crate::velocity::{polar_to_field_with_measure, PolarVelocity};

/// Boundary density above this fraction of the norm triggers the seam
/// warning: bump support is drifting into the periodic seam.
pub const SEAM_GUARD_FRACTION: f64 = 1e-10;

/// Fraction of the sample series used for the peak-velocity fit.
pub const PEAK_FIT_FRACTION: f64 = 0.6;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] crate::scenario::ConfigError),
    #[error(transparent)]
    Flow(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// divergence, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Flow(Error::Diverged { .. }) => 3,
            RunError::Flow(_) => 2,
            RunError::Io { .. } => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub final_s: f64,
    pub samples: usize,
    pub norm_initial: f64,
    pub norm_final: f64,
    pub max_norm_drift: f64,
    pub norm_drift_warning: bool,
    pub imag_mass_initial: f64,
    pub imag_mass_final: f64,
    pub peak_velocity_estimate: Option<f64>,
    /// None when no closed-form auxiliary residual applies (generic metric
    /// with non-constant ratio).
    pub max_aux_residual: Option<f64>,
    pub max_reality_residual: f64,
    pub psi0_raw_norm: f64,
    pub psi0_scale: f64,
    pub max_boundary_density_fraction: f64,
    pub seam_warning: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ScenarioConfig,
    pub wall_clock_seconds: f64,
    pub diagnostics: Option<RunDiagnostics>,
    pub diverged_at_s: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

/// Initial state assembled from a configuration, plus normalization records.
pub struct InitialData {
    pub state: FlowState,
    pub psi0_raw_norm: f64,
    pub psi0_scale: f64,
}

pub fn build_metric(cfg: &ScenarioConfig) -> Result<EdgeMetric, RunError> {
    let n = cfg.lattice.size;
    let metric = match cfg.metric.kind {
        MetricKind::Constant => EdgeMetric::constant(n, cfg.metric.g0),
        MetricKind::Explicit => {
            EdgeMetric::new(cfg.metric.values.clone().expect("validated"))
        }
        MetricKind::GeometricOpen => EdgeMetric::geometric(n, cfg.metric.g0, cfg.metric.lambda),
    };
    metric.map_err(RunError::Flow)
}

pub fn build_measure(cfg: &ScenarioConfig, metric: &EdgeMetric) -> Result<Measure, RunError> {
    match cfg.measure.kind {
        MeasureKind::FromMetric => Ok(metric.measure()),
        MeasureKind::Explicit => Measure::new(cfg.measure.values.clone().expect("validated"))
            .map_err(RunError::Flow),
    }
}

fn build_theta0(cfg: &ScenarioConfig) -> Result<LatticeFunction, RunError> {
    let n = cfg.lattice.size;
    let values = match cfg.theta0.kind {
        ThetaKind::Constant => vec![cfg.theta0.constant; n],
        ThetaKind::Gaussian => (0..n)
            .map(|i| {
                let d = i as f64 - cfg.theta0.center;
                cfg.theta0.height * (-d * d / (2.0 * cfg.theta0.width * cfg.theta0.width)).exp()
            })
            .collect(),
    };
    LatticeFunction::from_real(values).map_err(RunError::Flow)
}

fn build_psi0_raw(cfg: &ScenarioConfig) -> Result<LatticeFunction, RunError> {
    let n = cfg.lattice.size;
    let values: Vec<Complex64> = match cfg.psi0.kind {
        PsiKind::Gaussian => (0..n)
            .map(|i| {
                let d = i as f64 - cfg.psi0.center;
                Complex64::new(
                    (-d * d / (2.0 * cfg.psi0.width * cfg.psi0.width)).exp(),
                    0.0,
                )
            })
            .collect(),
        PsiKind::PlaneWave => {
            let k = 2.0 * std::f64::consts::PI * cfg.psi0.wavenumber as f64 / n as f64;
            (0..n)
                .map(|i| Complex64::from_polar(1.0, k * i as f64))
                .collect()
        }
        PsiKind::Explicit => {
            let re = cfg.psi0.re.as_ref().expect("validated");
            let zeros = vec![0.0; n];
            let im = cfg.psi0.im.as_deref().unwrap_or(&zeros);
            re.iter()
                .zip(im)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect()
        }
    };
    LatticeFunction::new(values).map_err(RunError::Flow)
}

/// Assemble the initial flow state for a validated configuration.
pub fn build_initial_state(cfg: &ScenarioConfig) -> Result<InitialData, RunError> {
    let metric = build_metric(cfg)?;
    let measure = build_measure(cfg, &metric)?;
    let theta0 = build_theta0(cfg)?;
    let polar = PolarVelocity::new(cfg.flow.r, theta0).map_err(RunError::Flow)?;

    let raw = Amplitude::new(build_psi0_raw(cfg)?).map_err(RunError::Flow)?;
    let raw_norm = norm(&raw, &measure).map_err(RunError::Flow)?;
    let scale = if cfg.psi0.normalize {
        if raw_norm <= 0.0 {
            return Err(RunError::Config(crate::scenario::ConfigError::Invalid {
                field: "psi0".to_string(),
                reason: "cannot normalize an identically zero amplitude".to_string(),
            }));
        }
        1.0 / raw_norm.sqrt()
    } else {
        1.0
    };
    let psi = Amplitude::new(raw.function().scale_re(scale)).map_err(RunError::Flow)?;

    let state = match cfg.flow.mode {
        ModeKind::FlatPolar => FlowState::flat_polar(polar, psi, metric, measure),
        ModeKind::Generic => {
            let field = polar_to_field_with_measure(&polar, &measure)?;
            FlowState::generic(field, psi, metric, measure)
        }
    }
    .map_err(RunError::Flow)?;

    Ok(InitialData {
        state,
        psi0_raw_norm: raw_norm,
        psi0_scale: scale,
    })
}

/// 17 significant digits, enough to reproduce any f64 exactly.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn boundary_density_fraction(psi: &Amplitude, measure: &Measure) -> f64 {
    let n = psi.len();
    let total = norm(psi, measure).unwrap_or(0.0);
    if total <= 0.0 {
        return 0.0;
    }
    let edge = measure.values()[0] * psi.values()[0].norm_sqr()
        + measure.values()[n - 1] * psi.values()[n - 1].norm_sqr();
    edge / total
}

/// Peak position series for the configured tracked field.
fn peak_series(traj: &Trajectory, field: PeakField) -> Vec<f64> {
    match field {
        PeakField::Psi => traj.psi_peak_series(),
        PeakField::Theta => traj
            .theta_peak_series()
            .expect("theta tracking is validated to flat_polar mode"),
    }
}

/// Least-squares peak velocity over the middle of the unwrapped series.
pub fn peak_velocity_estimate(times: &[f64], peaks: &[f64], window: usize) -> Option<f64> {
    if times.len() < 4 {
        return None;
    }
    let unwrapped = unwrap_periodic(peaks, window);
    let range = middle_window(times.len(), PEAK_FIT_FRACTION);
    least_squares_slope(&times[range.clone()], &unwrapped[range])
}

fn write_fields_csv(
    path: &Path,
    traj: &Trajectory,
) -> Result<(), RunError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "s,i,theta,kappa,re_psi,im_psi,abs2_psi")?;
        for sample in &traj.samples {
            for i in 0..traj.window {
                // in generic mode the phase column reports arg(X^+)
                let theta = match &sample.theta {
                    Some(t) => t.values()[i].re,
                    None => sample.field.plus().values()[i].arg(),
                };
                let psi = sample.psi.values()[i];
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    fmt17(sample.s),
                    i,
                    fmt17(theta),
                    fmt17(sample.kappa.values()[i].re),
                    fmt17(psi.re),
                    fmt17(psi.im),
                    fmt17(psi.norm_sqr()),
                )?;
            }
        }
        w.flush()
    })()
    .map_err(io_err(path))
}

fn write_summary_csv(
    path: &Path,
    traj: &Trajectory,
    peaks: &[f64],
) -> Result<(), RunError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let times = traj.sample_times();
    let n0 = traj.initial_norm();
    (|| -> std::io::Result<()> {
        writeln!(
            w,
            "s,norm,norm_drift,imag_mass,peak_pos,peak_velocity_estimate,max_aux_residual,max_reality_residual"
        )?;
        for (k, sample) in traj.samples.iter().enumerate() {
            let drift = if n0 == 0.0 {
                0.0
            } else {
                (sample.observers.norm - n0) / n0
            };
            let running = peak_velocity_estimate(&times[..=k], &peaks[..=k], traj.window)
                .unwrap_or(f64::NAN);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                fmt17(sample.s),
                fmt17(sample.observers.norm),
                fmt17(drift),
                fmt17(sample.observers.imag_mass),
                fmt17(peaks[k]),
                fmt17(running),
                fmt17(sample.observers.max_aux_residual),
                fmt17(sample.observers.max_reality_residual),
            )?;
        }
        w.flush()
    })()
    .map_err(io_err(path))
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), RunError> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(path, json + "\n").map_err(io_err(path))
}

/// Read a manifest back; the embedded config reproduces the run.
pub fn load_manifest(path: &Path) -> Result<RunManifest, RunError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| {
        RunError::Config(crate::scenario::ConfigError::Invalid {
            field: "run.json".to_string(),
            reason: e.to_string(),
        })
    })
}

/// Run one scenario and write `fields.csv`, `summary.csv`, and `run.json`
/// into the configured output directory. On numerical divergence, `run.json`
/// is still written with the last good geodesic time.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let out_dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;

    let started = Instant::now();
    let init = build_initial_state(cfg)?;

    let evolved = evolve(
        &init.state,
        cfg.integrator.ds,
        cfg.integrator.steps,
        cfg.output.record_every,
    );
    let traj = match evolved {
        Ok(t) => t,
        Err(Error::Diverged { s, reason }) => {
            let manifest = RunManifest {
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: cfg.clone(),
                wall_clock_seconds: started.elapsed().as_secs_f64(),
                diagnostics: None,
                diverged_at_s: Some(s),
                error: Some(reason.clone()),
            };
            write_manifest(&out_dir.join("run.json"), &manifest)?;
            return Err(RunError::Flow(Error::Diverged { s, reason }));
        }
        Err(e) => return Err(RunError::Flow(e)),
    };

    let peaks = peak_series(&traj, cfg.output.peak_field);
    let times = traj.sample_times();
    let velocity = peak_velocity_estimate(&times, &peaks, traj.window);

    let max_boundary = traj
        .samples
        .iter()
        .map(|s| boundary_density_fraction(&s.psi, init.state.measure()))
        .fold(0.0, f64::max);

    let aux = traj.max_aux_residual();
    let aux_defined = traj
        .samples
        .iter()
        .all(|s| !s.observers.max_aux_residual.is_nan());
    let first = traj.samples.first().expect("at least one sample");
    let last = traj.samples.last().expect("at least one sample");
    let diagnostics = RunDiagnostics {
        final_s: last.s,
        samples: traj.samples.len(),
        norm_initial: first.observers.norm,
        norm_final: last.observers.norm,
        max_norm_drift: traj.max_norm_drift(),
        norm_drift_warning: traj.norm_drift_warning(),
        imag_mass_initial: first.observers.imag_mass,
        imag_mass_final: last.observers.imag_mass,
        peak_velocity_estimate: velocity,
        max_aux_residual: aux_defined.then_some(aux),
        max_reality_residual: traj.max_reality_residual(),
        psi0_raw_norm: init.psi0_raw_norm,
        psi0_scale: init.psi0_scale,
        max_boundary_density_fraction: max_boundary,
        seam_warning: max_boundary > SEAM_GUARD_FRACTION,
    };

    write_fields_csv(&out_dir.join("fields.csv"), &traj)?;
    write_summary_csv(&out_dir.join("summary.csv"), &traj, &peaks)?;
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        diagnostics: Some(diagnostics),
        diverged_at_s: None,
        error: None,
    };
    write_manifest(&out_dir.join("run.json"), &manifest)?;

    Ok(RunOutcome { out_dir, manifest })
}

/// Run independent scenarios concurrently, one thread each. Output ordering
/// cannot affect file contents since every job writes its own directory.
pub fn run_many(
    jobs: Vec<(String, ScenarioConfig)>,
) -> Vec<(String, Result<RunOutcome, RunError>)> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|(label, cfg)| scope.spawn(move || (label, run_scenario(&cfg))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    })
}
