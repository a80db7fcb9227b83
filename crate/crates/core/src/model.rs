//! Dipole-dipole coupling of J=0 ↔ J=1 emitters in free space and in front of
//! a perfectly conducting plane at z = 0.
//!
//! Everything here is dimensionless. Lengths are measured in the reduced
//! wavelength 1/k₀, rates and frequencies in the free-atom linewidth γ₀, and
//! times in τ₀ = 1/γ₀. Frequencies are detunings from the bare resonance ω₀
//! (rotating frame), so ω₀ never appears.
//!
//! Couplings are evaluated at resonance (pole approximation), which makes the
//! self-energy matrix frequency independent.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural linewidth of a free atom. All rates are expressed in this unit.
pub const GAMMA0: f64 = 1.0;

/// Resonant wavenumber. Positions are expressed in units of 1/k₀.
pub const K0: f64 = 1.0;

pub type Vec3 = Vector3<f64>;
type CVec3 = Vector3<Complex64>;

/// Zeeman sublevel m of the J = 1 excited state, quantized along z (the mirror
/// normal).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sublevel {
    Minus,
    Zero,
    Plus,
}

impl Sublevel {
    /// In state-index order.
    pub const ALL: [Sublevel; 3] = [Sublevel::Minus, Sublevel::Zero, Sublevel::Plus];

    pub fn m(self) -> i8 {
        match self {
            Sublevel::Minus => -1,
            Sublevel::Zero => 0,
            Sublevel::Plus => 1,
        }
    }

    /// Position of the sublevel inside an atom's block of three states.
    pub fn index(self) -> usize {
        (self.m() + 1) as usize
    }

    pub fn from_index(index: usize) -> Option<Sublevel> {
        Sublevel::ALL.get(index).copied()
    }

    pub fn opposite(self) -> Sublevel {
        match self {
            Sublevel::Minus => Sublevel::Plus,
            Sublevel::Zero => Sublevel::Zero,
            Sublevel::Plus => Sublevel::Minus,
        }
    }

    /// True for m = ±1, whose dipoles lie in the mirror plane.
    pub fn is_tangential(self) -> bool {
        self != Sublevel::Zero
    }

    /// Spherical unit vector of the transition dipole:
    /// u₀ = ẑ, u₊₁ = −(x̂ + iŷ)/√2, u₋₁ = (x̂ − iŷ)/√2.
    pub fn unit_vector(self) -> CVec3 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Sublevel::Zero => CVec3::new(zero, zero, Complex64::new(1.0, 0.0)),
            Sublevel::Plus => CVec3::new(Complex64::new(-s, 0.0), Complex64::new(0.0, -s), zero),
            Sublevel::Minus => CVec3::new(Complex64::new(s, 0.0), Complex64::new(0.0, -s), zero),
        }
    }
}

impl TryFrom<i8> for Sublevel {
    type Error = String;

    fn try_from(m: i8) -> std::result::Result<Self, Self::Error> {
        match m {
            -1 => Ok(Sublevel::Minus),
            0 => Ok(Sublevel::Zero),
            1 => Ok(Sublevel::Plus),
            other => Err(format!("sublevel must be -1, 0 or 1, got {other}")),
        }
    }
}

impl From<Sublevel> for i8 {
    fn from(s: Sublevel) -> i8 {
        s.m()
    }
}

impl fmt::Display for Sublevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.m())
    }
}

/// Radial functions of the transverse dyadic Green tensor,
///
/// P(x) = e^{ix}(1/x + i/x² − 1/x³), Q(x) = e^{ix}(−1/x − 3i/x² + 3/x³),
///
/// with x = k₀r.
pub fn scalar_coefficients(x: f64) -> Result<(Complex64, Complex64)> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!(
            "separation must be positive and finite, got {x}"
        )));
    }
    let phase = Complex64::from_polar(1.0, x);
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let inv3 = inv2 * inv;
    let p = phase * Complex64::new(inv - inv3, inv2);
    let q = phase * Complex64::new(3.0 * inv3 - inv, -3.0 * inv2);
    Ok((p, q))
}

/// Cartesian coupling tensor −(3γ₀/4)[P(x) I + Q(x) r̂r̂ᵀ] for separation `r`.
pub fn dyadic_coupling(r: &Vec3) -> Result<Matrix3<Complex64>> {
    let x = K0 * r.norm();
    let (p, q) = scalar_coefficients(x)?;
    let rhat = r / r.norm();
    let pre = -0.75 * GAMMA0;
    Ok(Matrix3::from_fn(|i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (p * delta + q * (rhat[i] * rhat[j])) * pre
    }))
}

/// Reflection of a dipole in a perfect conductor: tangential components flip,
/// the normal one is kept.
pub fn image_reflection() -> Matrix3<Complex64> {
    Matrix3::from_diagonal(&CVec3::new(
        Complex64::new(-1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(1.0, 0.0),
    ))
}

/// Mirror image of a point in the z = 0 plane.
pub fn mirror_point(r: &Vec3) -> Vec3 {
    Vec3::new(r.x, r.y, -r.z)
}

/// Image tensor coupling the dipole at `r_a` to the image of the dipole at
/// `r_b`. Valid for `r_a == r_b` (self-image).
pub fn image_dyadic(r_a: &Vec3, r_b: &Vec3) -> Result<Matrix3<Complex64>> {
    if !(r_a.z > 0.0 && r_b.z > 0.0) {
        return Err(Error::Domain(format!(
            "atoms must lie above the mirror, got z = {} and z = {}",
            r_a.z, r_b.z
        )));
    }
    Ok(dyadic_coupling(&(r_a - mirror_point(r_b)))? * image_reflection())
}

/// Projects a Cartesian tensor onto sublevels: u_m† T u_m′.
pub fn project(tensor: &Matrix3<Complex64>, m: Sublevel, m_prime: Sublevel) -> Complex64 {
    let u = m.unit_vector();
    let v = m_prime.unit_vector();
    u.dotc(&(tensor * v))
}

/// Direct photon-exchange coupling Σ between sublevel m of the atom at `r_a`
/// and sublevel m′ of the atom at `r_b`, in units of γ₀.
pub fn free_space_coupling(r_a: &Vec3, r_b: &Vec3, m: Sublevel, m_prime: Sublevel) -> Result<Complex64> {
    let r = r_a - r_b;
    if r.norm() == 0.0 {
        return Err(Error::Domain("coincident positions".into()));
    }
    Ok(project(&dyadic_coupling(&r)?, m, m_prime))
}

/// Coupling mediated by reflection in the mirror at z = 0.
pub fn image_coupling(r_a: &Vec3, r_b: &Vec3, m: Sublevel, m_prime: Sublevel) -> Result<Complex64> {
    Ok(project(&image_dyadic(r_a, r_b)?, m, m_prime))
}

/// Closed-form decay rate of a single atom at height `z` above the mirror.
pub fn single_atom_rate(z: f64, m: Sublevel) -> Result<f64> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Domain(format!("height must be positive, got {z}")));
    }
    let x = 2.0 * K0 * z;
    let (s, c) = x.sin_cos();
    let rate = match m {
        Sublevel::Zero => 1.0 - 3.0 * (c / (x * x) - s / (x * x * x)),
        _ => 1.0 - 1.5 * (s / x + c / (x * x) - s / (x * x * x)),
    };
    Ok(rate * GAMMA0)
}

/// Decay rate implied by the self-image coupling, γ₀ − 2 Im Σ^img(r, r).
pub fn image_rate(z: f64, m: Sublevel) -> Result<f64> {
    let r = Vec3::new(0.0, 0.0, z);
    Ok(GAMMA0 - 2.0 * image_coupling(&r, &r, m, m)?.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEIGHTS: [f64; 7] = [0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0];

    #[test]
    fn basis_is_orthonormal() {
        for a in Sublevel::ALL {
            for b in Sublevel::ALL {
                let dot = a.unit_vector().dotc(&b.unit_vector());
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - Complex64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn coefficients_reject_bad_separation() {
        assert!(scalar_coefficients(0.0).is_err());
        assert!(scalar_coefficients(-1.0).is_err());
        assert!(scalar_coefficients(f64::NAN).is_err());
        assert!(scalar_coefficients(f64::INFINITY).is_err());
    }

    #[test]
    fn coefficient_values() {
        let (p, _) = scalar_coefficients(2.0).unwrap();
        assert!((p.im - 0.236_949_825_922_845).abs() < 1e-14);
        // small-x limit of Im P
        let (p, _) = scalar_coefficients(1e-3).unwrap();
        assert!((p.im - 2.0 / 3.0).abs() < 1e-6);
        let (p, q) = scalar_coefficients(1e4).unwrap();
        assert!((p.norm() * 1e4 - 1.0).abs() < 1e-3);
        assert!((q.norm() * 1e4 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn closed_form_matches_image_self_term() {
        for z in HEIGHTS {
            for m in Sublevel::ALL {
                let closed = single_atom_rate(z, m).unwrap();
                let image = image_rate(z, m).unwrap();
                assert!((closed - image).abs() < 1e-10, "z={z} m={m}: {closed} vs {image}");
            }
        }
    }

    #[test]
    fn rates_near_the_surface() {
        assert!((single_atom_rate(1.0, Sublevel::Plus).unwrap() - 0.644_575_261_115_732_5).abs() < 1e-12);
        assert!((single_atom_rate(1.0, Sublevel::Zero).unwrap() - 1.653_096_662_469_987).abs() < 1e-12);
        assert!((single_atom_rate(1e-2, Sublevel::Zero).unwrap() - 2.0).abs() < 1e-4);
        assert!(single_atom_rate(1e-2, Sublevel::Minus).unwrap() < 1e-4);
        assert!(single_atom_rate(0.0, Sublevel::Zero).is_err());
        assert!(image_coupling(&Vec3::new(0.0, 0.0, -1.0), &Vec3::z(), Sublevel::Zero, Sublevel::Zero).is_err());
    }

    #[test]
    fn far_from_the_surface_rates_approach_gamma0() {
        // |γ − γ₀| is bounded by the 1/x envelope of the oscillation.
        for z in [10.0, 20.0, 50.0] {
            for m in Sublevel::ALL {
                let g = single_atom_rate(z, m).unwrap();
                let x = 2.0 * z;
                assert!((g - 1.0).abs() <= 1.5 / x + 3.0 / (x * x), "z={z} m={m} γ={g}");
            }
        }
        assert!((single_atom_rate(10.0, Sublevel::Zero).unwrap() - 1.0).abs() < 0.05);
        assert!((single_atom_rate(10.0, Sublevel::Plus).unwrap() - 0.930_169_975_698_139).abs() < 1e-12);
    }

    #[test]
    fn degenerate_pair_is_symmetric() {
        for z in HEIGHTS {
            assert_eq!(
                single_atom_rate(z, Sublevel::Plus).unwrap(),
                single_atom_rate(z, Sublevel::Minus).unwrap()
            );
        }
    }

    #[test]
    fn axial_separation_does_not_mix_sublevels() {
        let a = Vec3::new(0.3, -0.2, 1.0);
        let b = Vec3::new(0.3, -0.2, 2.7);
        for m in Sublevel::ALL {
            for mp in Sublevel::ALL {
                if m == mp {
                    continue;
                }
                assert!(free_space_coupling(&a, &b, m, mp).unwrap().norm() < 1e-15);
                assert!(image_coupling(&a, &b, m, mp).unwrap().norm() < 1e-15);
                assert!(image_coupling(&a, &a, m, mp).unwrap().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn close_pair_limit() {
        // parallel dipoles perpendicular to the separation
        let a = Vec3::new(0.0, 0.0, 1.0);
        let b = Vec3::new(1e-3, 0.0, 1.0);
        let s = free_space_coupling(&a, &b, Sublevel::Zero, Sublevel::Zero).unwrap();
        assert!((s.im + 0.5).abs() < 1e-6);
        assert!(free_space_coupling(&a, &a, Sublevel::Zero, Sublevel::Zero).is_err());
    }
}
