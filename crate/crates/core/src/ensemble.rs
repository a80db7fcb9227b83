//! Disordered impurity ensembles in a cylinder standing on the mirror.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Sublevel, Vec3};

/// Default minimum pair separation in units of 1/k₀.
pub const DEFAULT_MIN_SEPARATION: f64 = 1e-3;

/// Attempts per atom before generation gives up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Cylinder of radius `radius` and length `length` whose base lies on the
/// z = 0 plane. The initially excited atom sits on the axis at `z_exc`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub radius: f64,
    pub length: f64,
    pub z_exc: f64,
    pub mirror_enabled: bool,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.radius, self.length, self.z_exc].iter().all(|v| v.is_finite());
        if !finite || self.radius <= 0.0 || self.length <= 0.0 {
            return Err(Error::Config(format!(
                "cylinder needs positive finite radius and length, got R={} L={}",
                self.radius, self.length
            )));
        }
        if !(self.z_exc > 0.0 && self.z_exc < self.length) {
            return Err(Error::Config(format!(
                "excited atom height must lie in (0, L={}), got {}",
                self.length, self.z_exc
            )));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        PI * self.radius * self.radius * self.length
    }

    /// Same aspect ratio and excited-atom height, lengths scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Geometry {
        Geometry {
            radius: self.radius * factor,
            length: self.length * factor,
            ..*self
        }
    }

    pub fn contains(&self, r: &Vec3) -> bool {
        r.x * r.x + r.y * r.y <= self.radius * self.radius && r.z > 0.0 && r.z <= self.length
    }
}

/// How inhomogeneous detunings are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningModel {
    /// One draw per atom shared by its three sublevels.
    #[default]
    PerAtom,
    /// Independent draws for every (atom, sublevel).
    PerSublevel,
}

/// Identifies one singly excited basis state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExcitationIndex {
    pub atom: usize,
    pub sublevel: Sublevel,
}

impl ExcitationIndex {
    pub fn new(atom: usize, sublevel: Sublevel) -> Self {
        ExcitationIndex { atom, sublevel }
    }

    /// Row of this state in a 3N × 3N matrix.
    pub fn state(&self) -> usize {
        3 * self.atom + self.sublevel.index()
    }

    pub fn from_state(state: usize) -> Self {
        ExcitationIndex {
            atom: state / 3,
            sublevel: Sublevel::from_index(state % 3).expect("state % 3 < 3"),
        }
    }
}

/// Everything needed to draw one random ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    /// Atoms per (1/k₀)³.
    pub density: f64,
    pub geometry: Geometry,
    /// RMS of the Gaussian inhomogeneous shifts, in γ₀.
    pub inhomogeneous_width: f64,
    pub detuning_model: DetuningModel,
    pub min_separation: f64,
}

impl EnsembleSpec {
    pub fn new(density: f64, geometry: Geometry) -> Self {
        EnsembleSpec {
            density,
            geometry,
            inhomogeneous_width: 0.0,
            detuning_model: DetuningModel::PerAtom,
            min_separation: DEFAULT_MIN_SEPARATION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if !(self.inhomogeneous_width.is_finite() && self.inhomogeneous_width >= 0.0) {
            return Err(Error::Config(format!(
                "inhomogeneous width must be non-negative, got {}",
                self.inhomogeneous_width
            )));
        }
        if !(self.min_separation.is_finite() && self.min_separation > 0.0) {
            return Err(Error::Config(format!(
                "minimum separation must be positive, got {}",
                self.min_separation
            )));
        }
        atom_count(self.density, &self.geometry).map(|_| ())
    }
}

/// One random realization: positions, per-state detunings and the initially
/// excited state. Atom 0 is always the excited atom at (0, 0, z_exc).
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfiguration {
    pub positions: Vec<Vec3>,
    /// Inhomogeneous shift Δ_{a,m} indexed by [`ExcitationIndex::state`].
    pub detunings: Vec<f64>,
    pub excited: ExcitationIndex,
}

impl EnsembleConfiguration {
    pub fn n_atoms(&self) -> usize {
        self.positions.len()
    }

    pub fn detuning(&self, e: ExcitationIndex) -> f64 {
        self.detunings[e.state()]
    }

    /// A configuration without disorder, for hand-built test systems.
    pub fn fixed(positions: Vec<Vec3>, excited: ExcitationIndex) -> Self {
        let n = positions.len();
        EnsembleConfiguration {
            positions,
            detunings: vec![0.0; 3 * n],
            excited,
        }
    }
}

/// N = round(n·πR²L).
pub fn atom_count(density: f64, geometry: &Geometry) -> Result<usize> {
    if !(density.is_finite() && density > 0.0) {
        return Err(Error::Config(format!("density must be positive, got {density}")));
    }
    let n = (density * geometry.volume()).round();
    if !(n >= 1.0) {
        return Err(Error::Config(format!(
            "density {density} in volume {:.4} gives an empty ensemble",
            geometry.volume()
        )));
    }
    Ok(n as usize)
}

/// Random stream for realization `realization` of a run seeded with `seed`.
pub fn realization_rng(seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    rng
}

fn uniform_in_cylinder<R: Rng + ?Sized>(rng: &mut R, geometry: &Geometry) -> Vec3 {
    let rho = geometry.radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    // 1 − u ∈ (0, 1] keeps atoms strictly above the mirror
    let z = geometry.length * (1.0 - rng.random::<f64>());
    Vec3::new(rho * phi.cos(), rho * phi.sin(), z)
}

/// Draws positions and detunings for one realization.
///
/// Positions are drawn first and detunings second, from standard normals
/// scaled by δ, so runs that differ only in δ share the same positions and the
/// same normalized shifts.
pub fn sample_configuration(
    spec: &EnsembleSpec,
    m_init: Sublevel,
    seed: u64,
    realization: u64,
) -> Result<EnsembleConfiguration> {
    spec.validate()?;
    let geometry = &spec.geometry;
    let n = atom_count(spec.density, geometry)?;
    let mut rng = realization_rng(seed, realization);

    let min_sq = spec.min_separation * spec.min_separation;
    let mut positions = Vec::with_capacity(n);
    positions.push(Vec3::new(0.0, 0.0, geometry.z_exc));
    while positions.len() < n {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let candidate = uniform_in_cylinder(&mut rng, geometry);
            if positions.iter().all(|p| (p - candidate).norm_squared() >= min_sq) {
                positions.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Generation(format!(
                "could not place atom {} of {n} at separation ≥ {} after {MAX_PLACEMENT_ATTEMPTS} attempts",
                positions.len(),
                spec.min_separation
            )));
        }
    }

    let width = spec.inhomogeneous_width;
    let mut draw = || {
        let z: f64 = rng.sample(StandardNormal);
        if width == 0.0 {
            0.0
        } else {
            width * z
        }
    };
    let detunings = match spec.detuning_model {
        DetuningModel::PerAtom => (0..n)
            .flat_map(|_| {
                let d = draw();
                [d, d, d]
            })
            .collect(),
        DetuningModel::PerSublevel => (0..3 * n).map(|_| draw()).collect(),
    };

    Ok(EnsembleConfiguration {
        positions,
        detunings,
        excited: ExcitationIndex::new(0, m_init),
    })
}
