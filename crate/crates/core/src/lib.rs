//! Coupled-dipole simulation of J=0 ↔ J=1 impurity ensembles near a charged,
//! perfectly conducting plane.
//!
//! Units throughout: lengths in 1/k₀, rates and detunings in γ₀, times in
//! τ₀ = 1/γ₀.

pub mod dynamics;
pub mod ensemble;
pub mod experiment;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod montecarlo;

pub use dynamics::{
    evolve, spectrum, trapping_time, DecayResult, OmegaGrid, SpectralResult, TimeGrid, TrappingTime,
};
pub use ensemble::{EnsembleConfiguration, EnsembleSpec, ExcitationIndex, Geometry};
pub use error::{Error, Result};
pub use hamiltonian::{assemble, EffectiveHamiltonian, StarkModel};
pub use model::{Sublevel, Vec3};
