use dipmirror::dynamics::{
    self, evolve_with, spectrum_from_modes, spectrum_resolvent, Eigensystem, EvolveOptions, OmegaGrid, TimeGrid,
};
use dipmirror::ensemble::{EnsembleConfiguration, ExcitationIndex};
use dipmirror::hamiltonian::{assemble, EffectiveHamiltonian, StarkModel};
use dipmirror::model::{free_space_coupling, image_coupling, Sublevel, Vec3};
use num_complex::Complex64;
use proptest::prelude::*;

fn sublevel() -> impl Strategy<Value = Sublevel> {
    prop_oneof![Just(Sublevel::Minus), Just(Sublevel::Zero), Just(Sublevel::Plus)]
}

fn point() -> impl Strategy<Value = Vec3> {
    (-2.0..2.0f64, -2.0..2.0f64, 0.05..3.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn separated(points: &[Vec3], min: f64) -> bool {
    points
        .iter()
        .enumerate()
        .all(|(i, p)| points[..i].iter().all(|q| (p - q).norm() >= min))
}

/// Random atoms with per-atom shifts, the excited atom first.
fn configuration(max_atoms: usize) -> impl Strategy<Value = EnsembleConfiguration> {
    (1..=max_atoms)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(point(), n),
                prop::collection::vec(-2.0..2.0f64, n),
                sublevel(),
            )
        })
        .prop_filter("atoms too close", |(p, _, _)| separated(p, 0.05))
        .prop_map(|(positions, shifts, m)| {
            let mut cfg = EnsembleConfiguration::fixed(positions, ExcitationIndex::new(0, m));
            cfg.detunings = shifts.iter().flat_map(|&d| [d, d, d]).collect();
            cfg
        })
}

fn stark() -> impl Strategy<Value = StarkModel> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(pi, sigma)| StarkModel {
        shift_pi: pi,
        shift_sigma: sigma,
    })
}

fn sign(m: Sublevel, mp: Sublevel) -> f64 {
    if (m.m() + mp.m()).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_reciprocity(a in point(), b in point(), m in sublevel(), mp in sublevel()) {
        prop_assume!((a - b).norm() > 1e-3);
        let s = sign(m, mp);
        let ab = free_space_coupling(&a, &b, m, mp).unwrap();
        let ba = free_space_coupling(&b, &a, mp.opposite(), m.opposite()).unwrap();
        prop_assert!(close(ab, ba * s, 1e-12), "{ab} vs {ba}");
        let ab = image_coupling(&a, &b, m, mp).unwrap();
        let ba = image_coupling(&b, &a, mp.opposite(), m.opposite()).unwrap();
        prop_assert!(close(ab, ba * s, 1e-12), "{ab} vs {ba}");
    }

    #[test]
    fn cartesian_matrix_is_complex_symmetric(cfg in configuration(10), st in stark(), mirror in any::<bool>()) {
        let h = assemble(&cfg, &st, mirror).unwrap();
        let c = h.to_cartesian();
        for i in 0..c.nrows() {
            for j in 0..i {
                prop_assert!(close(c[(i, j)], c[(j, i)], 1e-12));
            }
        }
    }

    #[test]
    fn every_mode_decays(cfg in configuration(30), st in stark(), mirror in any::<bool>()) {
        let h = assemble(&cfg, &st, mirror).unwrap();
        let eig = Eigensystem::new(&h).unwrap();
        for l in &eig.values {
            prop_assert!(l.im < 0.0, "eigenvalue {l}");
        }
    }

    #[test]
    fn mirror_off_is_pure_free_space(cfg in configuration(8), st in stark()) {
        let h = assemble(&cfg, &st, false).unwrap();
        for e in 0..h.dim() {
            for f in 0..h.dim() {
                let (a, b) = (ExcitationIndex::from_state(e), ExcitationIndex::from_state(f));
                let expected = if a.atom == b.atom {
                    if a.sublevel == b.sublevel {
                        Complex64::new(cfg.detunings[e] + st.shift(a.sublevel), -0.5)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                } else {
                    free_space_coupling(&cfg.positions[a.atom], &cfg.positions[b.atom], a.sublevel, b.sublevel).unwrap()
                };
                prop_assert!(close(h.matrix[(e, f)], expected, 1e-14), "{} vs {expected}", h.matrix[(e, f)]);
            }
        }
    }

    #[test]
    fn common_stark_shift_moves_the_frame(cfg in configuration(8), st in stark(), c in -5.0..5.0f64, mirror in any::<bool>()) {
        let h = assemble(&cfg, &st, mirror).unwrap();
        let moved = StarkModel { shift_pi: st.shift_pi + c, shift_sigma: st.shift_sigma + c };
        let hc = assemble(&cfg, &moved, mirror).unwrap();

        let mut a: Vec<Complex64> = Eigensystem::new(&h).unwrap().values.iter().map(|l| l + c).collect();
        let mut b = Eigensystem::new(&hc).unwrap().values;
        let key = |z: &Complex64| (z.re, z.im);
        a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() < 1e-9, "{x} vs {y}");
        }

        let s = cfg.excited;
        let grid = TimeGrid::uniform(20.0, 41);
        let opts = EvolveOptions { store_populations: true, force_fourier: false };
        let p = evolve_with(&h, s, &grid, opts).unwrap().populations.unwrap();
        let pc = evolve_with(&hc, s, &grid, opts).unwrap().populations.unwrap();
        for (x, y) in p.iter().flatten().zip(pc.iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-9);
        }

        let w = OmegaGrid { min: -4.0, max: 4.0, step: 0.25 };
        let sp = dynamics::spectrum(&h, s, &w, 0.0).unwrap();
        let spc = dynamics::spectrum(&hc, s, &w, c).unwrap();
        for (x, y) in sp.values.iter().zip(&spc.values) {
            prop_assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0));
        }
    }

    #[test]
    fn resolvent_and_eigen_spectra_agree(cfg in configuration(20), st in stark(), mirror in any::<bool>()) {
        let h = assemble(&cfg, &st, mirror).unwrap();
        let s = cfg.excited;
        let grid = OmegaGrid { min: -6.0, max: 6.0, step: 0.1 };
        let eig = Eigensystem::new(&h).unwrap();
        let modes = eig.expand(s).unwrap();
        prop_assume!(modes.is_reliable());
        let a = spectrum_from_modes(&modes, &grid, 0.0);
        let b = spectrum_resolvent(&h, s, &grid, 0.0).unwrap();
        prop_assert!(b.failed.is_empty());
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-8 * y.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn population_is_bounded_and_falls(cfg in configuration(20), st in stark(), mirror in any::<bool>()) {
        let h = assemble(&cfg, &st, mirror).unwrap();
        let grid = TimeGrid::uniform(30.0, 601);
        let d = dynamics::evolve(&h, cfg.excited, &grid).unwrap();
        prop_assert_eq!(d.p_sum[0], 1.0);
        for p in &d.p_sum {
            prop_assert!(*p >= 0.0 && *p <= 1.0 + 1e-9, "P_sum = {p}");
        }
        // window means over 0.1 τ₀ (two grid steps of 0.05)
        let windows: Vec<f64> = d.p_sum.chunks(2).map(|w| w.iter().sum::<f64>() / w.len() as f64).collect();
        for w in windows.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{} then {}", w[0], w[1]);
        }
    }
}

fn pair(x: f64) -> EffectiveHamiltonian {
    let cfg = EnsembleConfiguration::fixed(
        vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(x, 0.0, 1.0)],
        ExcitationIndex::new(0, Sublevel::Plus),
    );
    assemble(&cfg, &StarkModel::default(), false).unwrap()
}

#[test]
fn tail_decreases_monotonically() {
    let h = pair(0.3);
    let eig = Eigensystem::new(&h).unwrap();
    let slowest = eig.values.iter().map(|l| -2.0 * l.im).fold(f64::INFINITY, f64::min);
    let start = 1.0 / slowest;
    let grid = TimeGrid::uniform(start + 50.0, 2001);
    let d = dynamics::evolve(&h, ExcitationIndex::new(0, Sublevel::Plus), &grid).unwrap();
    let tail: Vec<f64> = d.times.iter().zip(&d.p_sum).filter(|(t, _)| **t >= start).map(|(_, p)| *p).collect();
    assert!(tail.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn fourier_route_matches_eigen_route() {
    let cfg = EnsembleConfiguration::fixed(
        vec![
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.4, 0.1, 1.3),
            Vec3::new(-0.3, 0.5, 0.6),
            Vec3::new(0.2, -0.6, 2.0),
        ],
        ExcitationIndex::new(0, Sublevel::Zero),
    );
    let h = assemble(&cfg, &StarkModel::from_splitting(1.0), true).unwrap();
    let report = dynamics::consistency_check(&h, cfg.excited).unwrap();
    assert!(report.passed, "max error {}", report.max_error);
    assert!(report.max_error < 1e-4);
}
