//! Browser bindings: three small computations the demo page plots.

use dipmirror::dynamics::TimeGrid;
use dipmirror::ensemble::{EnsembleSpec, Geometry};
use dipmirror::model::{single_atom_rate, Sublevel};
use dipmirror::montecarlo::{run_average, AverageRequest, SpectrumReference, SpectrumRequest};
use dipmirror::{OmegaGrid, StarkModel};
use wasm_bindgen::prelude::*;

/// Demo cap: the page must stay responsive on one thread.
pub const MAX_ATOMS: usize = 60;
pub const MAX_REALIZATIONS: usize = 200;

/// x, one or two y series and an optional scalar.
#[wasm_bindgen]
#[derive(Clone, Debug, Default)]
pub struct Curve {
    x: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
    scalar: Option<f64>,
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn y(&self) -> Vec<f64> {
        self.y.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn y2(&self) -> Vec<f64> {
        self.y2.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn scalar(&self) -> Option<f64> {
        self.scalar
    }
}

impl Curve {
    pub fn xs(&self) -> &[f64] {
        &self.x
    }
    pub fn ys(&self) -> &[f64] {
        &self.y
    }
    pub fn ys2(&self) -> &[f64] {
        &self.y2
    }
    pub fn value(&self) -> Option<f64> {
        self.scalar
    }
}

/// Ensemble parameters shared by the two Monte Carlo demos.
#[derive(Clone, Copy, Debug)]
pub struct Sample {
    pub density: f64,
    pub radius: f64,
    pub length: f64,
    pub m_init: i8,
    pub splitting: f64,
    pub inhomogeneous_width: f64,
    pub mirror: bool,
    pub realizations: usize,
    pub seed: u64,
}

impl Sample {
    fn request(&self) -> Result<AverageRequest, String> {
        let m_init = Sublevel::try_from(self.m_init).map_err(|e| e.to_string())?;
        let geometry = Geometry {
            radius: self.radius,
            length: self.length,
            z_exc: 1.0,
            mirror_enabled: self.mirror,
        };
        let mut ensemble = EnsembleSpec::new(self.density, geometry);
        ensemble.inhomogeneous_width = self.inhomogeneous_width;
        ensemble.validate().map_err(|e| e.to_string())?;
        let n = dipmirror::ensemble::atom_count(self.density, &geometry).map_err(|e| e.to_string())?;
        if n > MAX_ATOMS {
            return Err(format!("{n} atoms; the demo allows at most {MAX_ATOMS}"));
        }
        if self.realizations == 0 || self.realizations > MAX_REALIZATIONS {
            return Err(format!("realizations must be 1..={MAX_REALIZATIONS}"));
        }
        Ok(AverageRequest {
            ensemble,
            m_init,
            stark: StarkModel::from_splitting(self.splitting),
            spectrum: None,
            decay: None,
            n_realizations: self.realizations,
            seed: self.seed,
        })
    }
}

/// γ_{±1}(z) in y and γ_0(z) in y2, for `points` heights in [z_min, z_max].
pub fn rate_curves(z_min: f64, z_max: f64, points: usize) -> Result<Curve, String> {
    if !(z_min > 0.0 && z_max > z_min && z_max.is_finite()) || points < 2 {
        return Err("need 0 < z_min < z_max and at least two points".into());
    }
    let x: Vec<f64> = (0..points)
        .map(|i| z_min + (z_max - z_min) * i as f64 / (points - 1) as f64)
        .collect();
    let rate = |z: f64, m| single_atom_rate(z, m).map_err(|e| e.to_string());
    Ok(Curve {
        y: x.iter().map(|&z| rate(z, Sublevel::Plus)).collect::<Result<_, _>>()?,
        y2: x.iter().map(|&z| rate(z, Sublevel::Zero)).collect::<Result<_, _>>()?,
        x,
        scalar: None,
    })
}

/// Averaged spectrum on [−span, span] around the excited transition; the
/// standard error goes to y2.
pub fn averaged_spectrum(sample: &Sample, span: f64, step: f64) -> Result<Curve, String> {
    let mut req = sample.request()?;
    req.spectrum = Some(SpectrumRequest {
        grid: OmegaGrid {
            min: -span,
            max: span,
            step,
        },
        reference: SpectrumReference::ExcitedTransition,
    });
    let out = run_average(&req).map_err(|e| e.to_string())?;
    let s = out.spectrum.expect("spectrum requested");
    Ok(Curve {
        y2: s.stderr.unwrap_or_default(),
        x: s.grid,
        y: s.mean,
        scalar: None,
    })
}

/// Averaged P_sum(t) on a log grid up to `t_max`, with the mean trapping
/// time as the scalar.
pub fn decay_curve(sample: &Sample, t_max: f64) -> Result<Curve, String> {
    let mut req = sample.request()?;
    req.decay = Some(TimeGrid {
        t_max,
        n_points: 200,
        ..TimeGrid::default()
    });
    let out = run_average(&req).map_err(|e| e.to_string())?;
    let d = out.decay.expect("decay requested");
    Ok(Curve {
        y2: d.stderr.unwrap_or_default(),
        x: d.grid,
        y: d.mean,
        scalar: out.trapping.and_then(|t| t.mean),
    })
}

#[wasm_bindgen(js_name = rateCurves)]
pub fn rate_curves_js(z_min: f64, z_max: f64, points: usize) -> Result<Curve, JsError> {
    rate_curves(z_min, z_max, points).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
fn sample(
    density: f64,
    radius: f64,
    length: f64,
    m_init: i8,
    splitting: f64,
    inhomogeneous_width: f64,
    mirror: bool,
    realizations: usize,
    seed: u32,
) -> Sample {
    Sample {
        density,
        radius,
        length,
        m_init,
        splitting,
        inhomogeneous_width,
        mirror,
        realizations,
        seed: seed as u64,
    }
}

#[wasm_bindgen(js_name = averagedSpectrum)]
#[allow(clippy::too_many_arguments)]
pub fn averaged_spectrum_js(
    density: f64,
    radius: f64,
    length: f64,
    m_init: i8,
    splitting: f64,
    inhomogeneous_width: f64,
    mirror: bool,
    realizations: usize,
    seed: u32,
    span: f64,
    step: f64,
) -> Result<Curve, JsError> {
    let s = sample(density, radius, length, m_init, splitting, inhomogeneous_width, mirror, realizations, seed);
    averaged_spectrum(&s, span, step).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = decayCurve)]
#[allow(clippy::too_many_arguments)]
pub fn decay_curve_js(
    density: f64,
    radius: f64,
    length: f64,
    m_init: i8,
    splitting: f64,
    inhomogeneous_width: f64,
    mirror: bool,
    realizations: usize,
    seed: u32,
    t_max: f64,
) -> Result<Curve, JsError> {
    let s = sample(density, radius, length, m_init, splitting, inhomogeneous_width, mirror, realizations, seed);
    decay_curve(&s, t_max).map_err(|e| JsError::new(&e))
}
