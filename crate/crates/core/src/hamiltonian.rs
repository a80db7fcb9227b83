//! Dense effective non-Hermitian Hamiltonian of the single-excitation sector.
//!
//! The frequency-domain equations for the amplitudes read
//! Σ_e′ [(ω − ω_e)δ_ee′ − Σ_ee′] b_e′(ω) = i δ_es. Collecting ω_e and Σ into
//! one matrix M turns them into (ω − M) b = i e_s, with ω a detuning from ω₀.

use faer::Mat;
use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::{EnsembleConfiguration, ExcitationIndex};
use crate::error::{Error, Result};
use crate::model::{self, Sublevel, GAMMA0};

/// Stark shifts of the π (m = 0) and σ (m = ±1) transitions, in γ₀.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StarkModel {
    pub shift_pi: f64,
    pub shift_sigma: f64,
}

impl StarkModel {
    /// σ resonance pinned at zero, π resonance at the splitting Δ.
    pub fn from_splitting(splitting: f64) -> Self {
        StarkModel {
            shift_pi: splitting,
            shift_sigma: 0.0,
        }
    }

    /// Δ = Δω_{m=0} − Δω_{m=±1}.
    pub fn splitting(&self) -> f64 {
        self.shift_pi - self.shift_sigma
    }

    pub fn shift(&self, m: Sublevel) -> f64 {
        match m {
            Sublevel::Zero => self.shift_pi,
            _ => self.shift_sigma,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    /// Row/column `e` corresponds to [`ExcitationIndex::from_state`]`(e)`.
    pub matrix: Mat<Complex64>,
    pub n_atoms: usize,
    pub mirror_enabled: bool,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: ExcitationIndex, col: ExcitationIndex) -> Complex64 {
        self.matrix[(row.state(), col.state())]
    }

    /// Adds `shift` to every diagonal element, i.e. moves the frame origin.
    pub fn shifted(&self, shift: f64) -> EffectiveHamiltonian {
        let mut out = self.clone();
        for e in 0..out.dim() {
            out.matrix[(e, e)] += shift;
        }
        out
    }

    /// The same operator in the Cartesian basis (x̂, ŷ, ẑ per atom). There the
    /// reciprocity of the coupling makes it complex symmetric whenever the
    /// detunings within each atom's σ pair are equal.
    pub fn to_cartesian(&self) -> Mat<Complex64> {
        let u = spherical_basis();
        let n = self.n_atoms;
        let mut out = Mat::<Complex64>::zeros(3 * n, 3 * n);
        for a in 0..n {
            for b in 0..n {
                let block = Matrix3::from_fn(|i, j| self.matrix[(3 * a + i, 3 * b + j)]);
                let cart = u * block * u.adjoint();
                for i in 0..3 {
                    for j in 0..3 {
                        out[(3 * a + i, 3 * b + j)] = cart[(i, j)];
                    }
                }
            }
        }
        out
    }
}

/// Columns are the sublevel unit vectors in index order.
fn spherical_basis() -> Matrix3<Complex64> {
    let cols: Vec<_> = Sublevel::ALL.iter().map(|m| m.unit_vector()).collect();
    Matrix3::from_columns(&cols)
}

/// Builds M for one configuration.
///
/// Diagonal: Δ_{a,m} + Δω_m − iγ₀/2, plus the self-image term when the mirror
/// is present. Off-diagonal: direct coupling between distinct atoms plus, with
/// the mirror, image couplings between all pairs including the m ≠ m′ self
/// terms of a single atom.
pub fn assemble(
    config: &EnsembleConfiguration,
    stark: &StarkModel,
    mirror_enabled: bool,
) -> Result<EffectiveHamiltonian> {
    let n = config.n_atoms();
    if config.detunings.len() != 3 * n {
        return Err(Error::Config(format!(
            "expected {} detunings, got {}",
            3 * n,
            config.detunings.len()
        )));
    }
    if [stark.shift_pi, stark.shift_sigma].iter().any(|s| !s.is_finite()) {
        return Err(Error::Config("Stark shifts must be finite".into()));
    }
    if mirror_enabled {
        if let Some(a) = config.positions.iter().position(|p| !(p.z > 0.0)) {
            return Err(Error::Domain(format!(
                "atom {a} at z = {} is not above the mirror",
                config.positions[a].z
            )));
        }
    }

    let u = spherical_basis();
    let u_adj = u.adjoint();
    let mut matrix = Mat::<Complex64>::zeros(3 * n, 3 * n);
    for a in 0..n {
        let r_a = &config.positions[a];
        for b in 0..n {
            let r_b = &config.positions[b];
            let mut tensor = Matrix3::<Complex64>::zeros();
            if a != b {
                let r = r_a - r_b;
                if r.norm() == 0.0 {
                    return Err(Error::CoincidentAtoms(a.min(b), a.max(b)));
                }
                tensor += model::dyadic_coupling(&r)?;
            }
            if mirror_enabled {
                tensor += model::image_dyadic(r_a, r_b)?;
            }
            let block = u_adj * tensor * u;
            for i in 0..3 {
                for j in 0..3 {
                    matrix[(3 * a + i, 3 * b + j)] = block[(i, j)];
                }
            }
        }
        for m in Sublevel::ALL {
            let e = ExcitationIndex::new(a, m).state();
            matrix[(e, e)] += Complex64::new(config.detunings[e] + stark.shift(m), -0.5 * GAMMA0);
        }
    }

    Ok(EffectiveHamiltonian {
        matrix,
        n_atoms: n,
        mirror_enabled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Vec3;

    fn single(z: f64, mirror: bool, stark: StarkModel) -> EffectiveHamiltonian {
        let cfg = EnsembleConfiguration::fixed(vec![Vec3::new(0.0, 0.0, z)], ExcitationIndex::new(0, Sublevel::Zero));
        assemble(&cfg, &stark, mirror).unwrap()
    }

    #[test]
    fn free_single_atom_is_diagonal() {
        let h = single(1.0, false, StarkModel::from_splitting(2.5));
        for i in 0..3 {
            for j in 0..3 {
                let v = h.matrix[(i, j)];
                if i == j {
                    let shift = if i == 1 { 2.5 } else { 0.0 };
                    assert_eq!(v, Complex64::new(shift, -0.5));
                } else {
                    assert_eq!(v, Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn mirror_single_atom_width() {
        let h = single(1.0, true, StarkModel::default());
        let e = ExcitationIndex::new(0, Sublevel::Plus);
        assert!((-2.0 * h.get(e, e).im - 0.644_575_261_115_732_5).abs() < 1e-12);
        let e = ExcitationIndex::new(0, Sublevel::Zero);
        assert!((-2.0 * h.get(e, e).im - 1.653_096_662_469_987).abs() < 1e-12);
    }

    #[test]
    fn coincident_atoms_rejected() {
        let cfg = EnsembleConfiguration::fixed(
            vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 1.0)],
            ExcitationIndex::new(0, Sublevel::Zero),
        );
        assert!(matches!(
            assemble(&cfg, &StarkModel::default(), false),
            Err(Error::CoincidentAtoms(0, 1))
        ));
    }

    #[test]
    fn atom_below_mirror_rejected() {
        let cfg = EnsembleConfiguration::fixed(vec![Vec3::new(0.0, 0.0, -1.0)], ExcitationIndex::new(0, Sublevel::Zero));
        assert!(assemble(&cfg, &StarkModel::default(), true).is_err());
        assert!(assemble(&cfg, &StarkModel::default(), false).is_ok());
    }

    #[test]
    fn splitting_gauge() {
        let s = StarkModel::from_splitting(3.0);
        assert_eq!(s.splitting(), 3.0);
        assert_eq!(s.shift(Sublevel::Minus), 0.0);
        assert_eq!(s.shift(Sublevel::Zero), 3.0);
    }
}
