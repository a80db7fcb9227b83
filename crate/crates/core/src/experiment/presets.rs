use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dynamics::TimeGrid;
use crate::ensemble::{atom_count, Geometry, DetuningModel, DEFAULT_MIN_SEPARATION};
use crate::error::{Error, Result};
use crate::model::Sublevel;
use crate::montecarlo::SpectrumReference;

use super::config::{
    CalibrationConfig, ExperimentConfig, GeometryConfig, Observable, SpectrumConfig, SweepConfig,
};

const DENSITY: f64 = 0.05;
const HIGH_DENSITY: f64 = 0.1;
const Z_EXC: f64 = 1.0;
const SPLITTING: f64 = 1.0;
const DEFAULT_SEED: u64 = 1;
const CURVE_REALIZATIONS: usize = 200;
const SWEEP_REALIZATIONS: usize = 500;

/// Sample size of a preset. Nothing but the cylinder and the realization
/// counts depends on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scale {
    /// R = 12, L = 13: N = 294 at n = 0.05.
    Full,
    /// R = 6, L = 7: N = 40 at n = 0.05.
    #[default]
    Desk,
}

impl Scale {
    fn cylinder(self) -> (f64, f64) {
        match self {
            Scale::Full => (12.0, 13.0),
            Scale::Desk => (6.0, 7.0),
        }
    }

    fn realizations(self, sweep: bool) -> usize {
        if sweep {
            SWEEP_REALIZATIONS
        } else {
            CURVE_REALIZATIONS
        }
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Scale::Full),
            "desk" => Ok(Scale::Desk),
            _ => Err(Error::Config(format!("unknown scale {s:?}, expected full or desk"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Full => "full",
            Scale::Desk => "desk",
        })
    }
}

pub struct PresetInfo {
    pub name: &'static str,
    pub figure: &'static str,
    pub bindings: &'static str,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "fig1a",
        figure: "Fig. 1(a)",
        bindings: "spectra, m=0, n=0.05, delta=0: free / Delta=1 / mirror z_exc=1 / both",
    },
    PresetInfo {
        name: "fig1b",
        figure: "Fig. 1(b)",
        bindings: "spectra, m=+1 (= m=-1), n=0.05, delta=0: free / Delta=1 / mirror / both",
    },
    PresetInfo {
        name: "fig2a",
        figure: "Fig. 2(a)",
        bindings: "spectra vs sigma line, m=0, mirror on, Delta in {0,0.5,1,2,3}",
    },
    PresetInfo {
        name: "fig2b",
        figure: "Fig. 2(b)",
        bindings: "spectra vs sigma line, m=0, free space, Delta in {0,0.5,1,2,3}",
    },
    PresetInfo {
        name: "fig3a",
        figure: "Fig. 3(a)",
        bindings: "P_sum(t), m=0, n=0.05, delta=0: free / Delta=1 / mirror / both",
    },
    PresetInfo {
        name: "fig3b",
        figure: "Fig. 3(b)",
        bindings: "P_sum(t), m=+1, n=0.05, delta=0: free / Delta=1 / mirror / both",
    },
    PresetInfo {
        name: "fig4",
        figure: "Fig. 4",
        bindings: "tau vs Delta in [0,5] step 0.5, m=+1 and m=0, mirror on (a) and off (b)",
    },
    PresetInfo {
        name: "fig5",
        figure: "Fig. 5",
        bindings: "tau vs delta in {0,1,2,4,8}, m=+1 and m=0, mirror on, n=0.1 (size-calibrated) and n=0.05",
    },
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

/// Text table of the presets and what the scale knob does.
pub fn list_presets() -> String {
    let mut out = String::from("preset  figure     bindings\n");
    for p in PRESETS {
        out.push_str(&format!("{:<7} {:<10} {}\n", p.name, p.figure, p.bindings));
    }
    for scale in [Scale::Desk, Scale::Full] {
        let (r, l) = scale.cylinder();
        let g = Geometry {
            radius: r,
            length: l,
            z_exc: Z_EXC,
            mirror_enabled: false,
        };
        let n = atom_count(DENSITY, &g).unwrap_or(0);
        out.push_str(&format!(
            "--scale {scale}: cylinder R={r}, L={l} (N={n} at n=0.05), {CURVE_REALIZATIONS} realizations per curve, {SWEEP_REALIZATIONS} per sweep point\n"
        ));
    }
    out
}

struct Curve {
    name: String,
    m_init: Sublevel,
    splitting: f64,
    mirror: bool,
}

fn four_cases(prefix: &str, m_init: Sublevel) -> Vec<Curve> {
    [
        ("1_free", 0.0, false),
        ("2_field", SPLITTING, false),
        ("3_surface", 0.0, true),
        ("4_field_surface", SPLITTING, true),
    ]
    .into_iter()
    .map(|(tag, splitting, mirror)| Curve {
        name: format!("{prefix}_{tag}"),
        m_init,
        splitting,
        mirror,
    })
    .collect()
}

fn base(scale: Scale, observable: Observable, curve: Curve) -> ExperimentConfig {
    let (radius, length) = scale.cylinder();
    ExperimentConfig {
        name: Some(curve.name),
        observable,
        density: DENSITY,
        m_init: curve.m_init,
        stark_splitting: curve.splitting,
        stark_sigma_shift: 0.0,
        inhomogeneous_width: 0.0,
        mirror_enabled: curve.mirror,
        detuning_model: DetuningModel::PerAtom,
        min_separation: DEFAULT_MIN_SEPARATION,
        n_realizations: scale.realizations(observable.sweep_axis().is_some()),
        seed: DEFAULT_SEED,
        output_path: PathBuf::from("out"),
        geometry: GeometryConfig {
            radius,
            length,
            z_exc: Z_EXC,
        },
        spectrum: SpectrumConfig::default(),
        time: TimeGrid::default(),
        sweep: None,
        calibration: None,
    }
}

/// The configurations making up a preset, one per output curve.
pub fn preset(name: &str, scale: Scale) -> Result<Vec<ExperimentConfig>> {
    let configs = match name {
        "fig1a" | "fig1b" | "fig3a" | "fig3b" => {
            let m = if name.ends_with('a') { Sublevel::Zero } else { Sublevel::Plus };
            let obs = if name.starts_with("fig1") {
                Observable::Spectrum
            } else {
                Observable::Decay
            };
            four_cases(name, m)
                .into_iter()
                .map(|c| base(scale, obs, c))
                .collect()
        }
        "fig2a" | "fig2b" => {
            let mirror = name == "fig2a";
            [0.0, 0.5, 1.0, 2.0, 3.0]
                .iter()
                .enumerate()
                .map(|(i, &splitting)| {
                    let curve = Curve {
                        name: format!("{name}_{}_stark{splitting}", i + 1),
                        m_init: Sublevel::Zero,
                        splitting,
                        mirror,
                    };
                    let mut cfg = base(scale, Observable::Spectrum, curve);
                    cfg.spectrum.reference = SpectrumReference::Sigma;
                    cfg
                })
                .collect()
        }
        "fig4" => {
            let values: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
            let mut out = Vec::new();
            for (panel, mirror) in [("a", true), ("b", false)] {
                for (tag, m) in [("1_m1", Sublevel::Plus), ("2_m0", Sublevel::Zero)] {
                    let curve = Curve {
                        name: format!("fig4{panel}_{tag}"),
                        m_init: m,
                        splitting: 0.0,
                        mirror,
                    };
                    let mut cfg = base(scale, Observable::TrappingVsStark, curve);
                    cfg.sweep = Some(SweepConfig { values: values.clone() });
                    out.push(cfg);
                }
            }
            out
        }
        "fig5" => {
            let values = vec![0.0, 1.0, 2.0, 4.0, 8.0];
            [
                ("1_n0.1_m1", HIGH_DENSITY, Sublevel::Plus),
                ("2_n0.1_m0", HIGH_DENSITY, Sublevel::Zero),
                ("3_n0.05_m1", DENSITY, Sublevel::Plus),
                ("4_n0.05_m0", DENSITY, Sublevel::Zero),
            ]
            .into_iter()
            .map(|(tag, density, m)| {
                let curve = Curve {
                    name: format!("fig5_{tag}"),
                    m_init: m,
                    splitting: 0.0,
                    mirror: true,
                };
                let mut cfg = base(scale, Observable::TrappingVsInhom, curve);
                cfg.density = density;
                cfg.sweep = Some(SweepConfig { values: values.clone() });
                if density != DENSITY {
                    cfg.calibration = Some(CalibrationConfig {
                        reference_density: DENSITY,
                        iterations: 8,
                        realizations: None,
                    });
                }
                cfg
            })
            .collect()
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown preset {name:?}; available: {}",
                preset_names().join(", ")
            )))
        }
    };
    Ok(configs)
}
