//! Batch experiments: configuration, presets, the size calibration and
//! result files.

mod config;
mod output;
mod presets;

use std::time::{Duration, Instant};

pub use config::{
    CalibrationConfig, ExperimentConfig, GeometryConfig, Observable, SpectrumConfig, SweepConfig,
};
pub use output::{render_csv, render_manifest, write_outputs, WrittenFiles};
pub use presets::{list_presets, preset, preset_names, Scale, PRESETS};

use crate::ensemble::atom_count;
use crate::error::{Error, Result};
use crate::montecarlo::{self, AveragedObservable, SweepPoint, TrappingStats};

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentData {
    Spectrum(AveragedObservable),
    Decay {
        decay: AveragedObservable,
        trapping: TrappingStats,
    },
    Sweep(Vec<SweepPoint>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationOutcome {
    pub reference_density: f64,
    pub scale: f64,
    pub tau_reference: f64,
    pub tau_calibrated: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentRun {
    /// Fully resolved: calibration applied to the geometry and removed.
    pub config: ExperimentConfig,
    pub data: ExperimentData,
    pub calibration: Option<CalibrationOutcome>,
    pub n_atoms: usize,
    pub failed_realizations: usize,
    pub elapsed: Duration,
}

/// `progress(stage, done, total)`.
pub type Progress<'a> = &'a (dyn Fn(&str, usize, usize) + Sync);

pub fn run_experiment(config: &ExperimentConfig, progress: Progress<'_>) -> Result<ExperimentRun> {
    config.validate()?;
    let start = Instant::now();
    let mut config = config.clone();
    let calibration = match config.calibration.take() {
        Some(cal) => {
            let outcome = calibrate(&config, &cal, progress)?;
            config.geometry.radius *= outcome.scale;
            config.geometry.length *= outcome.scale;
            Some(outcome)
        }
        None => None,
    };
    let n_atoms = atom_count(config.density, &config.geometry())?;
    let req = config.request();

    let (data, failed_realizations) = match config.observable.sweep_axis() {
        Some(axis) => {
            let values = config.sweep_values();
            let mut points = Vec::with_capacity(values.len());
            for v in values {
                let label = format!("{} = {v}", axis_label(config.observable));
                let stage = |d: usize, t: usize| progress(&label, d, t);
                points.extend(montecarlo::sweep_trapping(&req, axis, &[v], &stage)?);
            }
            let failed = points.iter().map(|p| p.failures.len()).sum();
            (ExperimentData::Sweep(points), failed)
        }
        None => {
            let label = config.observable.name();
            let outcome = montecarlo::run_average_with_progress(&req, &|d, t| progress(label, d, t))?;
            let failed = outcome.failures.len();
            let data = match config.observable {
                Observable::Spectrum => ExperimentData::Spectrum(outcome.spectrum.expect("spectrum requested")),
                _ => ExperimentData::Decay {
                    decay: outcome.decay.expect("decay requested"),
                    trapping: outcome.trapping.expect("decay requested"),
                },
            };
            (data, failed)
        }
    };

    Ok(ExperimentRun {
        config,
        data,
        calibration,
        n_atoms,
        failed_realizations,
        elapsed: start.elapsed(),
    })
}

fn axis_label(obs: Observable) -> &'static str {
    match obs {
        Observable::TrappingVsStark => "Stark splitting",
        _ => "inhomogeneous width",
    }
}

/// Mean trapping time at δ = 0 for `density` in the configured geometry
/// scaled by `scale`.
fn tau_at(
    config: &ExperimentConfig,
    density: f64,
    scale: f64,
    realizations: usize,
    progress: Progress<'_>,
) -> Result<f64> {
    let mut req = config.request();
    req.spectrum = None;
    req.decay = Some(config.time);
    req.ensemble.density = density;
    req.ensemble.inhomogeneous_width = 0.0;
    req.ensemble.geometry = req.ensemble.geometry.scaled(scale);
    req.n_realizations = realizations;
    let label = format!("calibration n = {density}, scale = {scale:.5}");
    let outcome = montecarlo::run_average_with_progress(&req, &|d, t| progress(&label, d, t))?;
    let stats = outcome.trapping.expect("decay requested");
    stats.mean.ok_or_else(|| {
        Error::Numerical(format!(
            "no realization reached 1/e during calibration at scale {scale}"
        ))
    })
}

/// Finds the scale factor of (R, L), z_exc fixed, at which the configured
/// density reproduces τ(δ = 0) of the reference density in the unscaled
/// cylinder. The trapping time grows with sample size, so a bracket is
/// widened geometrically and then bisected.
fn calibrate(
    config: &ExperimentConfig,
    cal: &CalibrationConfig,
    progress: Progress<'_>,
) -> Result<CalibrationOutcome> {
    let realizations = cal.realizations.unwrap_or(config.n_realizations);
    let tau_ref = tau_at(config, cal.reference_density, 1.0, realizations, progress)?;
    let g = config.geometry();
    let admissible = |s: f64| {
        g.z_exc < g.length * s && atom_count(config.density, &g.scaled(s)).is_ok()
    };
    let mut tried: Vec<(f64, f64)> = Vec::new();
    let mut eval = |s: f64| -> Result<f64> {
        let tau = tau_at(config, config.density, s, realizations, progress)?;
        tried.push((s, tau));
        Ok(tau)
    };

    let (mut lo, mut hi) = (1.0, 1.0);
    let f1 = eval(1.0)?;
    let mut f_lo = f1;
    let mut f_hi = f1;
    let mut widen = 0;
    while !(f_lo <= tau_ref && tau_ref <= f_hi) {
        widen += 1;
        if widen > 12 {
            return Err(Error::Numerical(format!(
                "calibration could not bracket tau_reference = {tau_ref}"
            )));
        }
        if f_lo > tau_ref {
            let next = lo * 0.7;
            if !admissible(next) {
                return Err(Error::Numerical(format!(
                    "calibration needs a sample smaller than scale {lo} allows"
                )));
            }
            hi = lo;
            f_hi = f_lo;
            lo = next;
            f_lo = eval(lo)?;
        } else {
            hi *= 1.0 / 0.7;
            f_hi = eval(hi)?;
        }
    }
    for _ in 0..cal.iterations {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? < tau_ref {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The atom count is an integer, so τ(scale) is a step function; keep
    // the best point seen rather than the final midpoint.
    let (scale, tau_calibrated) = tried
        .into_iter()
        .min_by(|a, b| (a.1 - tau_ref).abs().total_cmp(&(b.1 - tau_ref).abs()))
        .expect("at least one evaluation");
    Ok(CalibrationOutcome {
        reference_density: cal.reference_density,
        scale,
        tau_reference: tau_ref,
        tau_calibrated,
    })
}
