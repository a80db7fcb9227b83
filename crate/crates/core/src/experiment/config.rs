use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{OmegaGrid, TimeGrid};
use crate::ensemble::{atom_count, DetuningModel, EnsembleSpec, Geometry, DEFAULT_MIN_SEPARATION};
use crate::error::{Error, Result};
use crate::hamiltonian::StarkModel;
use crate::model::Sublevel;
use crate::montecarlo::{AverageRequest, SpectrumReference, SpectrumRequest, SweepAxis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Spectrum,
    Decay,
    TrappingVsStark,
    TrappingVsInhom,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Spectrum => "spectrum",
            Observable::Decay => "decay",
            Observable::TrappingVsStark => "trapping_vs_stark",
            Observable::TrappingVsInhom => "trapping_vs_inhom",
        }
    }

    pub fn sweep_axis(self) -> Option<SweepAxis> {
        match self {
            Observable::TrappingVsStark => Some(SweepAxis::Stark),
            Observable::TrappingVsInhom => Some(SweepAxis::Inhomogeneous),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub radius: f64,
    pub length: f64,
    pub z_exc: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub min: f64,
    pub max: f64,
    pub step: f64,
    #[serde(default)]
    pub reference: SpectrumReference,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        let g = OmegaGrid::default();
        SpectrumConfig {
            min: g.min,
            max: g.max,
            step: g.step,
            reference: SpectrumReference::default(),
        }
    }
}

impl SpectrumConfig {
    pub fn grid(&self) -> OmegaGrid {
        OmegaGrid {
            min: self.min,
            max: self.max,
            step: self.step,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub values: Vec<f64>,
}

/// Shrinks or grows the cylinder (fixed aspect ratio and z_exc) until the
/// trapping time at δ = 0 equals that of `reference_density` in the
/// configured geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    pub reference_density: f64,
    #[serde(default = "default_calibration_iterations")]
    pub iterations: usize,
    /// Realizations per bisection step; defaults to `n_realizations`.
    #[serde(default)]
    pub realizations: Option<usize>,
}

fn default_calibration_iterations() -> usize {
    8
}

fn default_min_separation() -> f64 {
    DEFAULT_MIN_SEPARATION
}

fn default_output_path() -> PathBuf {
    PathBuf::from("out")
}

/// A complete run description, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Stem of the output files; defaults to the observable name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub observable: Observable,
    /// Atoms per (1/k₀)³.
    pub density: f64,
    pub m_init: Sublevel,
    /// Stark splitting Δ = Δω₀ − Δω±₁ in γ₀.
    #[serde(default)]
    pub stark_splitting: f64,
    /// Δω±₁; the π shift is this plus the splitting.
    #[serde(default)]
    pub stark_sigma_shift: f64,
    /// RMS δ of the inhomogeneous shifts in γ₀.
    #[serde(default)]
    pub inhomogeneous_width: f64,
    pub mirror_enabled: bool,
    #[serde(default)]
    pub detuning_model: DetuningModel,
    #[serde(default = "default_min_separation")]
    pub min_separation: f64,
    pub n_realizations: usize,
    pub seed: u64,
    #[serde(default = "default_output_path")]
    pub output_path: PathBuf,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub time: TimeGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationConfig>,
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn check_finite(path: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(schema(path, format!("must be finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| schema("<document>", e.to_string().trim()))?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema(if path == "." { "<root>" } else { &path }, e.into_inner().to_string().trim())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn file_stem(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.observable.name().to_string())
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            radius: self.geometry.radius,
            length: self.geometry.length,
            z_exc: self.geometry.z_exc,
            mirror_enabled: self.mirror_enabled,
        }
    }

    pub fn stark(&self) -> StarkModel {
        StarkModel {
            shift_pi: self.stark_sigma_shift + self.stark_splitting,
            shift_sigma: self.stark_sigma_shift,
        }
    }

    pub fn sweep_values(&self) -> Vec<f64> {
        match (&self.sweep, self.observable) {
            (Some(s), _) => s.values.clone(),
            (None, Observable::TrappingVsStark) => (0..=10).map(|k| 0.5 * k as f64).collect(),
            (None, Observable::TrappingVsInhom) => vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0],
            (None, _) => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(name) = &self.name {
            let ok = !name.starts_with('.')
                && !name.is_empty()
                && name.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c));
            if !ok {
                return Err(schema("name", "must match [A-Za-z0-9_.-]+ and not start with a dot"));
            }
        }
        for (path, v) in [
            ("density", self.density),
            ("stark_splitting", self.stark_splitting),
            ("stark_sigma_shift", self.stark_sigma_shift),
            ("inhomogeneous_width", self.inhomogeneous_width),
            ("min_separation", self.min_separation),
            ("geometry.radius", self.geometry.radius),
            ("geometry.length", self.geometry.length),
            ("geometry.z_exc", self.geometry.z_exc),
        ] {
            check_finite(path, v)?;
        }
        if self.density <= 0.0 {
            return Err(schema("density", "must be positive"));
        }
        if self.inhomogeneous_width < 0.0 {
            return Err(schema("inhomogeneous_width", "must be non-negative"));
        }
        if self.min_separation <= 0.0 {
            return Err(schema("min_separation", "must be positive"));
        }
        if self.n_realizations == 0 {
            return Err(schema("n_realizations", "must be at least 1"));
        }
        if self.geometry.radius <= 0.0 {
            return Err(schema("geometry.radius", "must be positive"));
        }
        if self.geometry.length <= 0.0 {
            return Err(schema("geometry.length", "must be positive"));
        }
        if !(self.geometry.z_exc > 0.0 && self.geometry.z_exc < self.geometry.length) {
            return Err(schema("geometry.z_exc", "must lie strictly between 0 and geometry.length"));
        }
        atom_count(self.density, &self.geometry()).map_err(|e| schema("density", e.to_string()))?;
        self.spectrum
            .grid()
            .validate()
            .map_err(|e| schema("spectrum", e.to_string()))?;
        self.time.validate().map_err(|e| schema("time", e.to_string()))?;
        if let Some(sweep) = &self.sweep {
            if self.observable.sweep_axis().is_none() {
                return Err(schema("sweep", "only trapping sweeps take sweep values"));
            }
            if sweep.values.is_empty() {
                return Err(schema("sweep.values", "must not be empty"));
            }
            for (i, v) in sweep.values.iter().enumerate() {
                check_finite(&format!("sweep.values[{i}]"), *v)?;
                if self.observable == Observable::TrappingVsInhom && *v < 0.0 {
                    return Err(schema(&format!("sweep.values[{i}]"), "inhomogeneous width must be non-negative"));
                }
            }
        }
        if let Some(cal) = &self.calibration {
            if !(cal.reference_density.is_finite() && cal.reference_density > 0.0) {
                return Err(schema("calibration.reference_density", "must be positive"));
            }
            if cal.iterations == 0 {
                return Err(schema("calibration.iterations", "must be at least 1"));
            }
            if cal.realizations == Some(0) {
                return Err(schema("calibration.realizations", "must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn ensemble(&self) -> EnsembleSpec {
        EnsembleSpec {
            density: self.density,
            geometry: self.geometry(),
            inhomogeneous_width: self.inhomogeneous_width,
            detuning_model: self.detuning_model,
            min_separation: self.min_separation,
        }
    }

    /// The Monte Carlo request behind this config. Sweeps override the swept
    /// parameter per point.
    pub fn request(&self) -> AverageRequest {
        let (spectrum, decay) = match self.observable {
            Observable::Spectrum => (
                Some(SpectrumRequest {
                    grid: self.spectrum.grid(),
                    reference: self.spectrum.reference,
                }),
                None,
            ),
            _ => (None, Some(self.time)),
        };
        AverageRequest {
            ensemble: self.ensemble(),
            m_init: self.m_init,
            stark: self.stark(),
            spectrum,
            decay,
            n_realizations: self.n_realizations,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
observable = "decay"
density = 0.05
m_init = 0
mirror_enabled = true
n_realizations = 10
seed = 7

[geometry]
radius = 6.0
length = 7.0
z_exc = 1.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.time, TimeGrid::default());
        assert_eq!(cfg.detuning_model, DetuningModel::PerAtom);
        assert_eq!(cfg.min_separation, 1e-3);
        assert_eq!(cfg.file_stem(), "decay");
        assert_eq!(cfg.ensemble().geometry.radius, 6.0);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        cfg.observable = Observable::TrappingVsInhom;
        cfg.sweep = Some(SweepConfig { values: vec![0.0, 1.5] });
        cfg.m_init = Sublevel::Minus;
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_key_reports_its_path() {
        let text = MINIMAL.replace("z_exc = 1.0", "z_exc = 1.0\nheight = 3");
        match ExperimentConfig::from_toml(&text) {
            Err(Error::Schema { path, message }) => {
                assert_eq!(path, "geometry.height");
                assert!(message.contains("height"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let text = format!("colour = 1\n{MINIMAL}");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Schema { .. })));
    }

    #[test]
    fn bad_values_report_paths() {
        let cases = [
            ("m_init = 0", "m_init = 2", "m_init"),
            ("z_exc = 1.0", "z_exc = 9.0", "geometry.z_exc"),
            ("density = 0.05", "density = -1.0", "density"),
            ("n_realizations = 10", "n_realizations = 0", "n_realizations"),
            ("seed = 7", "seed = \"x\"", "seed"),
        ];
        for (from, to, expected) in cases {
            match ExperimentConfig::from_toml(&MINIMAL.replace(from, to)) {
                Err(Error::Schema { path, .. }) => assert_eq!(path, expected, "{to}"),
                other => panic!("{to}: {other:?}"),
            }
        }
        assert!(ExperimentConfig::from_toml("not toml at all [").is_err());
    }

    #[test]
    fn stark_gauge() {
        let mut cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        cfg.stark_splitting = 2.0;
        cfg.stark_sigma_shift = 0.5;
        let s = cfg.stark();
        assert_eq!(s.shift_pi, 2.5);
        assert_eq!(s.splitting(), 2.0);
    }
}
