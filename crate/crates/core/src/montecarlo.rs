//! Averages over random configurations and inhomogeneous shifts.
//!
//! Realization k always draws from stream (seed, k) and results are reduced
//! in realization order, so output does not depend on thread scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, Eigensystem, EvolveOptions, OmegaGrid, TimeGrid, TrappingTime};
use crate::ensemble::{sample_configuration, EnsembleSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, StarkModel};
use crate::model::Sublevel;

/// Origin of the δω axis of a spectrum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumReference {
    /// Resonance of the excited atom's own transition, Stark and
    /// inhomogeneous shift included.
    #[default]
    ExcitedTransition,
    /// Stark-shifted σ (m = ±1) resonance of a free atom.
    Sigma,
    /// The bare resonance ω₀.
    Frame,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumRequest {
    pub grid: OmegaGrid,
    pub reference: SpectrumReference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AverageRequest {
    pub ensemble: EnsembleSpec,
    pub m_init: Sublevel,
    pub stark: StarkModel,
    pub spectrum: Option<SpectrumRequest>,
    /// Decay curves and trapping times are computed when set.
    pub decay: Option<TimeGrid>,
    pub n_realizations: usize,
    pub seed: u64,
}

impl AverageRequest {
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        if self.n_realizations == 0 {
            return Err(Error::Config("need at least one realization".into()));
        }
        if let Some(s) = &self.spectrum {
            s.grid.validate()?;
        }
        if let Some(g) = &self.decay {
            g.validate()?;
        }
        if self.spectrum.is_none() && self.decay.is_none() {
            return Err(Error::Config("no observable requested".into()));
        }
        Ok(())
    }
}

/// Mean and standard error of an observable on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragedObservable {
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    /// Absent for a single realization.
    pub stderr: Option<Vec<f64>>,
    pub n_realizations: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrappingStats {
    /// Mean of the per-realization crossing times that were reached.
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    /// Crossing time of the averaged P_sum curve.
    pub tau_of_mean: TrappingTime,
    pub n_reached: usize,
    /// Realizations whose P_sum stayed above 1/e on the grid.
    pub n_failed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealizationFailure {
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AverageOutcome {
    pub spectrum: Option<AveragedObservable>,
    pub decay: Option<AveragedObservable>,
    pub trapping: Option<TrappingStats>,
    pub failures: Vec<RealizationFailure>,
}

/// Observables of one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub spectrum: Option<Vec<f64>>,
    pub p_sum: Option<Vec<f64>>,
    pub tau: Option<TrappingTime>,
}

pub fn realize(req: &AverageRequest, index: usize) -> Result<Realization> {
    let config = sample_configuration(&req.ensemble, req.m_init, req.seed, index as u64)?;
    let mirror = req.ensemble.geometry.mirror_enabled;
    let h = assemble(&config, &req.stark, mirror)?;
    let s = config.excited;

    let eig = Eigensystem::new(&h)?;
    let modes = eig.expand(s)?;
    let reliable = modes.is_reliable();

    let spectrum = match &req.spectrum {
        Some(sr) => {
            let reference = match sr.reference {
                SpectrumReference::ExcitedTransition => req.stark.shift(s.sublevel) + config.detuning(s),
                SpectrumReference::Sigma => req.stark.shift_sigma,
                SpectrumReference::Frame => 0.0,
            };
            let result = if reliable {
                dynamics::spectrum_from_modes(&modes, &sr.grid, reference)
            } else {
                dynamics::spectrum_resolvent(&h, s, &sr.grid, reference)?
            };
            if let Some(&k) = result.failed.first() {
                return Err(Error::Numerical(format!("spectrum solve failed at δω = {}", result.omega[k])));
            }
            Some(result.values)
        }
        None => None,
    };

    let (p_sum, tau) = match &req.decay {
        Some(grid) => {
            let decay = if reliable {
                dynamics::evolve_modes(&modes, s, grid)?
            } else {
                let opts = EvolveOptions {
                    force_fourier: true,
                    ..Default::default()
                };
                dynamics::evolve_with(&h, s, grid, opts)?
            };
            let tau = dynamics::trapping_time(&decay);
            (Some(decay.p_sum), Some(tau))
        }
        None => (None, None),
    };

    Ok(Realization { spectrum, p_sum, tau })
}

pub fn run_average(req: &AverageRequest) -> Result<AverageOutcome> {
    run_average_with_progress(req, &|_, _| {})
}

/// Runs every realization, in parallel when the `parallel` feature is on.
/// `progress(done, total)` is called after each realization.
pub fn run_average_with_progress(
    req: &AverageRequest,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<AverageOutcome> {
    req.validate()?;
    let total = req.n_realizations;
    let done = AtomicUsize::new(0);
    let work = |k: usize| {
        let r = realize(req, k);
        progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
        r
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<Realization>> = (0..total).into_par_iter().map(work).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Realization>> = (0..total).map(work).collect();

    let mut ok = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(r) => ok.push(r),
            Err(e) => failures.push(RealizationFailure {
                index,
                reason: e.to_string(),
            }),
        }
    }
    // more than 1% failed
    if failures.len() * 100 > total || ok.is_empty() {
        let first = &failures[0];
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            total,
            first_index: first.index,
            first_reason: first.reason.clone(),
        });
    }

    let spectrum = req.spectrum.as_ref().map(|sr| {
        let rows: Vec<&[f64]> = ok.iter().filter_map(|r| r.spectrum.as_deref()).collect();
        average(sr.grid.points(), &rows, req.seed)
    });
    let decay = req.decay.as_ref().map(|grid| {
        let rows: Vec<&[f64]> = ok.iter().filter_map(|r| r.p_sum.as_deref()).collect();
        average(grid.points(), &rows, req.seed)
    });
    let trapping = decay.as_ref().map(|d| {
        let taus: Vec<f64> = ok.iter().filter_map(|r| r.tau.and_then(|t| t.value())).collect();
        let n_reached = taus.len();
        let (mean, stderr) = mean_and_stderr(&taus);
        TrappingStats {
            mean,
            stderr,
            tau_of_mean: dynamics::trapping_time_of(&d.grid, &d.mean),
            n_reached,
            n_failed: ok.len() - n_reached,
        }
    });

    Ok(AverageOutcome {
        spectrum,
        decay,
        trapping,
        failures,
    })
}

fn average(grid: Vec<f64>, rows: &[&[f64]], seed: u64) -> AveragedObservable {
    let n = rows.len();
    let columns = grid.len();
    let mut mean = vec![0.0; columns];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let stderr = (n >= 2).then(|| {
        let mut var = vec![0.0; columns];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row.iter()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        var.iter()
            .map(|s| (s / (n - 1) as f64).sqrt() / (n as f64).sqrt())
            .collect()
    });
    AveragedObservable {
        grid,
        mean,
        stderr,
        n_realizations: n,
        seed,
    }
}

/// Sample mean and standard error; the error needs at least two samples.
pub fn mean_and_stderr(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some((var / n as f64).sqrt()))
}

/// Parameter varied by a trapping-time sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Stark splitting Δ in γ₀ (σ resonance kept at zero).
    Stark,
    /// Inhomogeneous width δ in γ₀.
    Inhomogeneous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub trapping: TrappingStats,
    pub failures: Vec<RealizationFailure>,
}

/// Trapping time as a function of one parameter. Every point reuses the same
/// seed, so all points see the same positions.
pub fn sweep_trapping(
    base: &AverageRequest,
    axis: SweepAxis,
    values: &[f64],
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<Vec<SweepPoint>> {
    if base.decay.is_none() {
        return Err(Error::Config("a trapping sweep needs a time grid".into()));
    }
    values
        .iter()
        .map(|&value| {
            let mut req = base.clone();
            req.spectrum = None;
            match axis {
                SweepAxis::Stark => req.stark = StarkModel::from_splitting(value),
                SweepAxis::Inhomogeneous => req.ensemble.inhomogeneous_width = value,
            }
            let outcome = run_average_with_progress(&req, progress)?;
            Ok(SweepPoint {
                value,
                trapping: outcome.trapping.expect("decay grid is set"),
                failures: outcome.failures,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Geometry;

    fn request(density: f64, n_realizations: usize) -> AverageRequest {
        let geometry = Geometry {
            radius: 2.0,
            length: 3.0,
            z_exc: 1.0,
            mirror_enabled: true,
        };
        AverageRequest {
            ensemble: EnsembleSpec::new(density, geometry),
            m_init: Sublevel::Zero,
            stark: StarkModel::default(),
            spectrum: Some(SpectrumRequest {
                grid: OmegaGrid { min: -2.0, max: 2.0, step: 0.5 },
                reference: SpectrumReference::ExcitedTransition,
            }),
            decay: Some(TimeGrid::default()),
            n_realizations,
            seed: 5,
        }
    }

    #[test]
    fn single_realization_has_no_errors() {
        let out = run_average(&request(0.1, 1)).unwrap();
        let spec = out.spectrum.unwrap();
        assert!(spec.stderr.is_none());
        let single = realize(&request(0.1, 1), 0).unwrap();
        assert_eq!(spec.mean, single.spectrum.unwrap());
        let t = out.trapping.unwrap();
        assert_eq!(t.n_reached + t.n_failed, 1);
        assert!(t.stderr.is_none());
    }

    #[test]
    fn lone_pinned_atom_has_no_variance() {
        // density so low that N = 1
        let out = run_average(&request(0.03, 8)).unwrap();
        let decay = out.decay.unwrap();
        let err = decay.stderr.unwrap();
        assert!(err.iter().zip(&decay.mean).all(|(e, m)| *e <= 1e-15 * m.max(1e-300)));
        let t = out.trapping.unwrap();
        assert!(t.stderr.unwrap() <= 1e-15);
    }

    #[test]
    fn stderr_formula() {
        let (m, e) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, Some(2.5));
        // sd = sqrt(5/3), stderr = sd / 2
        assert!((e.unwrap() - (5.0_f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[]), (None, None));
        assert_eq!(mean_and_stderr(&[7.0]), (Some(7.0), None));
    }

    #[test]
    fn zero_realizations_rejected() {
        assert!(run_average(&request(0.1, 0)).is_err());
    }

    #[test]
    fn failures_abort_the_run() {
        let mut req = request(0.5, 4);
        req.ensemble.min_separation = 50.0;
        assert!(matches!(run_average(&req), Err(Error::Generation(_) | Error::TooManyFailures { .. })));
    }
}
