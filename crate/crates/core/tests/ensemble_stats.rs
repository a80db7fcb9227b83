use std::f64::consts::PI;

use dipmirror::ensemble::{sample_configuration, DetuningModel, EnsembleSpec, Geometry};
use dipmirror::model::Sublevel;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SEED: u64 = 2024;

fn spec() -> EnsembleSpec {
    EnsembleSpec::new(
        0.05,
        Geometry {
            radius: 3.0,
            length: 4.0,
            z_exc: 1.0,
            mirror_enabled: true,
        },
    )
}

fn chi_square(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

fn critical(bins: usize) -> f64 {
    ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.999)
}

#[test]
fn neighbours_fill_the_cylinder_uniformly() {
    let spec = spec();
    let g = spec.geometry;
    let bins = 10;
    let (mut radial, mut axial, mut angular) = (vec![0; bins], vec![0; bins], vec![0; bins]);
    for k in 0..3000 {
        let cfg = sample_configuration(&spec, Sublevel::Zero, SEED, k).unwrap();
        assert_eq!(cfg.n_atoms(), 6);
        for p in &cfg.positions[1..] {
            assert!(g.contains(p));
            let bin = |u: f64| ((u * bins as f64) as usize).min(bins - 1);
            // equal-area annuli
            radial[bin((p.x * p.x + p.y * p.y) / (g.radius * g.radius))] += 1;
            axial[bin(p.z / g.length)] += 1;
            angular[bin((p.y.atan2(p.x) + PI) / (2.0 * PI))] += 1;
        }
    }
    for counts in [&radial, &axial, &angular] {
        let chi = chi_square(counts);
        assert!(chi < critical(bins), "chi-square {chi} for {counts:?}");
    }
}

#[test]
fn detuning_moments() {
    let mut spec = spec();
    spec.inhomogeneous_width = 2.0;
    spec.detuning_model = DetuningModel::PerSublevel;
    let mut values = Vec::new();
    for k in 0..2000 {
        values.extend(sample_configuration(&spec, Sublevel::Zero, SEED, k).unwrap().detunings);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let fourth = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    // standard errors of the Gaussian sample moments
    assert!(mean.abs() < 4.0 * 2.0 / n.sqrt(), "mean {mean}");
    assert!((var - 4.0).abs() < 4.0 * 4.0 * (2.0 / n).sqrt(), "variance {var}");
    assert!((fourth / (var * var) - 3.0).abs() < 4.0 * (24.0 / n).sqrt(), "kurtosis");
}

#[test]
fn per_atom_shifts_are_shared_and_scale_with_width() {
    let mut spec = spec();
    spec.inhomogeneous_width = 1.0;
    let unit = sample_configuration(&spec, Sublevel::Plus, SEED, 5).unwrap();
    for chunk in unit.detunings.chunks(3) {
        assert!(chunk[0] == chunk[1] && chunk[1] == chunk[2]);
    }
    spec.inhomogeneous_width = 3.0;
    let wide = sample_configuration(&spec, Sublevel::Plus, SEED, 5).unwrap();
    assert_eq!(unit.positions, wide.positions);
    for (a, b) in unit.detunings.iter().zip(&wide.detunings) {
        assert!((3.0 * a - b).abs() < 1e-14);
    }
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let spec = spec();
    let a = sample_configuration(&spec, Sublevel::Zero, SEED, 7).unwrap();
    let b = sample_configuration(&spec, Sublevel::Zero, SEED, 7).unwrap();
    assert_eq!(a.positions, b.positions);
    let others = [
        sample_configuration(&spec, Sublevel::Zero, SEED, 8).unwrap(),
        sample_configuration(&spec, Sublevel::Zero, SEED + 1, 7).unwrap(),
    ];
    for o in others {
        assert!(a.positions[1..].iter().zip(&o.positions[1..]).all(|(p, q)| p != q));
    }
}
