//! Observables of one realization: the transition spectrum of the initially
//! excited state, the time-dependent populations and the trapping time.
//!
//! With M from [`crate::hamiltonian`] the amplitudes obey (ω − M) b(ω) = i e_s
//! in frequency and b(t) = e^{−iMt} e_s in time. The primary route diagonalizes
//! M once, M = V Λ V⁻¹, and serves every ω and t from that factorization. Direct
//! resolvent solves and a numerical inverse Fourier transform of the resolvent
//! provide the cross-check and the fallback.

use std::f64::consts::PI;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::ExcitationIndex;
use crate::error::{Error, Result};
use crate::hamiltonian::EffectiveHamiltonian;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative residual above which an eigendecomposition is not trusted.
pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Bound on Σ|c_k|·‖v_k‖ for the modal expansion of the initial state; larger
/// values mean cancellation between nearly parallel eigenvectors.
pub const EXPANSION_CONDITION_LIMIT: f64 = 1e7;

/// Largest frequency grid the Fourier fallback is allowed to use.
pub const MAX_FOURIER_POINTS: usize = 400_000;

/// Tolerance of [`consistency_check`] relative to |b_s(0)| = 1.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-3;

/// Uniform grid of detunings δω, in γ₀.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for OmegaGrid {
    fn default() -> Self {
        OmegaGrid {
            min: -20.0,
            max: 20.0,
            step: 0.02,
        }
    }
}

impl OmegaGrid {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.min, self.max, self.step].iter().all(|v| v.is_finite());
        if !finite || self.min >= self.max || self.step <= 0.0 {
            return Err(Error::Config(format!(
                "frequency grid needs min < max and step > 0, got [{}, {}] step {}",
                self.min, self.max, self.step
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.min + k as f64 * self.step).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    Log,
}

/// Sampling times in τ₀. Always starts at t = 0. With logarithmic spacing the
/// remaining `n_points − 1` times run geometrically from `t_min` to `t_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_points: usize,
    pub spacing: Spacing,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
}

fn default_t_min() -> f64 {
    1e-2
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            t_max: 1e3,
            n_points: 400,
            spacing: Spacing::Log,
            t_min: default_t_min(),
        }
    }
}

impl TimeGrid {
    pub fn uniform(t_max: f64, n_points: usize) -> Self {
        TimeGrid {
            t_max,
            n_points,
            spacing: Spacing::Uniform,
            t_min: default_t_min(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) || self.n_points < 2 {
            return Err(Error::Config(format!(
                "time grid needs t_max > 0 and at least 2 points, got t_max={} n={}",
                self.t_max, self.n_points
            )));
        }
        if self.spacing == Spacing::Log {
            if self.n_points < 3 || !(self.t_min > 0.0 && self.t_min < self.t_max) {
                return Err(Error::Config(format!(
                    "log time grid needs 0 < t_min < t_max and at least 3 points, got t_min={}",
                    self.t_min
                )));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        match self.spacing {
            Spacing::Uniform => (0..n)
                .map(|k| self.t_max * k as f64 / (n - 1) as f64)
                .collect(),
            Spacing::Log => {
                let ratio = (self.t_max / self.t_min).ln() / (n - 2) as f64;
                std::iter::once(0.0)
                    .chain((0..n - 1).map(|k| {
                        if k == n - 2 {
                            self.t_max
                        } else {
                            self.t_min * (ratio * k as f64).exp()
                        }
                    }))
                    .collect()
            }
        }
    }
}

/// |b_s(δω)|² on a frequency grid, in 1/γ₀².
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralResult {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    /// Grid indices where the solve failed; their values are NaN.
    pub failed: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvolutionPath {
    Eigen,
    ResolventFourier,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayResult {
    pub times: Vec<f64>,
    pub p_sum: Vec<f64>,
    /// b_s(t) of the initially excited state.
    pub source_amplitude: Vec<Complex64>,
    /// P_e(t) as `populations[e][k]`, when requested.
    pub populations: Option<Vec<Vec<f64>>>,
    pub path: EvolutionPath,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrappingTime {
    Reached(f64),
    /// P_sum never fell to 1/e on the grid.
    NotReached { last: f64 },
}

impl TrappingTime {
    pub fn value(&self) -> Option<f64> {
        match *self {
            TrappingTime::Reached(t) => Some(t),
            TrappingTime::NotReached { .. } => None,
        }
    }
}

/// Eigendecomposition M = V Λ V⁻¹ with an LU factorization of V.
pub struct Eigensystem {
    pub values: Vec<Complex64>,
    pub vectors: Mat<Complex64>,
    lu: PartialPivLu<Complex64>,
    /// ‖MV − VΛ‖_F / (‖M‖_F ‖V‖_F)
    pub residual: f64,
}

impl Eigensystem {
    pub fn new(h: &EffectiveHamiltonian) -> Result<Self> {
        let m = &h.matrix;
        let evd = m
            .eigen()
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let vectors = evd.U().to_owned();
        let values: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();

        let mut diff = m * &vectors;
        for (k, &lambda) in values.iter().enumerate() {
            for e in 0..diff.nrows() {
                diff[(e, k)] -= vectors[(e, k)] * lambda;
            }
        }
        let scale = m.norm_l2() * vectors.norm_l2();
        let residual = if scale > 0.0 { diff.norm_l2() / scale } else { 0.0 };
        if !residual.is_finite() {
            return Err(Error::Numerical("non-finite eigendecomposition".into()));
        }
        let lu = vectors.partial_piv_lu();
        Ok(Eigensystem {
            values,
            vectors,
            lu,
            residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Coefficients c = V⁻¹ e_s of the initial state in the eigenbasis.
    pub fn expand(&self, s: ExcitationIndex) -> Result<Modes<'_>> {
        let n = self.dim();
        let state = s.state();
        if state >= n {
            return Err(Error::Config(format!("state {state} outside a {n}-state system")));
        }
        let mut rhs = Mat::<Complex64>::zeros(n, 1);
        rhs[(state, 0)] = Complex64::new(1.0, 0.0);
        let c = self.lu.solve(&rhs);
        let coeffs: Vec<Complex64> = (0..n).map(|k| c[(k, 0)]).collect();

        let back = &self.vectors * &c - &rhs;
        let condition: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, ck)| ck.norm() * self.vectors.col(k).norm_l2())
            .sum();
        Ok(Modes {
            system: self,
            coeffs,
            state,
            back_residual: back.norm_l2(),
            condition,
        })
    }
}

/// The initial state expanded over the eigenvectors of M.
pub struct Modes<'a> {
    system: &'a Eigensystem,
    pub coeffs: Vec<Complex64>,
    state: usize,
    pub back_residual: f64,
    pub condition: f64,
}

impl Modes<'_> {
    /// Whether this expansion can be trusted for time evolution.
    pub fn is_reliable(&self) -> bool {
        self.system.residual <= EIGEN_RESIDUAL_TOLERANCE
            && self.back_residual <= EIGEN_RESIDUAL_TOLERANCE * self.condition.max(1.0)
            && self.condition <= EXPANSION_CONDITION_LIMIT
    }

    /// b_s(ω) = i Σ_k V_sk c_k / (ω − λ_k).
    pub fn source_resolvent(&self, omega: f64) -> Complex64 {
        let v = &self.system.vectors;
        self.system
            .values
            .iter()
            .zip(&self.coeffs)
            .enumerate()
            .map(|(k, (&lambda, &c))| v[(self.state, k)] * c / (omega - lambda))
            .sum::<Complex64>()
            * I
    }

    /// Amplitudes b(t) = V e^{−iΛt} c as a (3N × times) matrix.
    pub fn amplitudes(&self, times: &[f64]) -> Mat<Complex64> {
        let n = self.system.dim();
        let weights = Mat::<Complex64>::from_fn(n, times.len(), |k, j| {
            self.coeffs[k] * (-I * self.system.values[k] * times[j]).exp()
        });
        let mut out = &self.system.vectors * &weights;
        pin_initial(&mut out, times, self.state);
        out
    }
}

/// Transition spectrum |b_s(δω)|² of the state `s`, evaluated at
/// ω = δω + `reference` for each grid detuning δω.
pub fn spectrum(
    h: &EffectiveHamiltonian,
    s: ExcitationIndex,
    grid: &OmegaGrid,
    reference: f64,
) -> Result<SpectralResult> {
    grid.validate()?;
    let eig = Eigensystem::new(h)?;
    let modes = eig.expand(s)?;
    if !modes.is_reliable() {
        return spectrum_resolvent(h, s, grid, reference);
    }
    Ok(spectrum_from_modes(&modes, grid, reference))
}

pub fn spectrum_from_modes(modes: &Modes<'_>, grid: &OmegaGrid, reference: f64) -> SpectralResult {
    let omega = grid.points();
    let values = omega
        .iter()
        .map(|&w| modes.source_resolvent(w + reference).norm_sqr())
        .collect();
    SpectralResult {
        omega,
        values,
        failed: Vec::new(),
    }
}

/// Spectrum by solving (ω − M) b = i e_s at every grid point.
pub fn spectrum_resolvent(
    h: &EffectiveHamiltonian,
    s: ExcitationIndex,
    grid: &OmegaGrid,
    reference: f64,
) -> Result<SpectralResult> {
    grid.validate()?;
    let state = s.state();
    if state >= h.dim() {
        return Err(Error::Config(format!("state {state} outside a {}-state system", h.dim())));
    }
    let omega = grid.points();
    let mut values = Vec::with_capacity(omega.len());
    let mut failed = Vec::new();
    for (k, &w) in omega.iter().enumerate() {
        match resolvent_column(h, Complex64::new(w + reference, 0.0), state) {
            Some(b) => values.push(b[state].norm_sqr()),
            None => {
                values.push(f64::NAN);
                failed.push(k);
            }
        }
    }
    Ok(SpectralResult { omega, values, failed })
}

/// Solves (z − M) b = i e_s; `None` if the result is not finite.
fn resolvent_column(h: &EffectiveHamiltonian, z: Complex64, state: usize) -> Option<Vec<Complex64>> {
    let n = h.dim();
    let mut rhs = Mat::<Complex64>::zeros(n, 1);
    rhs[(state, 0)] = I;
    solve_shifted(h, z, &rhs)
}

fn solve_shifted(h: &EffectiveHamiltonian, z: Complex64, rhs: &Mat<Complex64>) -> Option<Vec<Complex64>> {
    let n = h.dim();
    let a = Mat::<Complex64>::from_fn(n, n, |i, j| {
        let d = if i == j { z } else { Complex64::new(0.0, 0.0) };
        d - h.matrix[(i, j)]
    });
    let x = a.partial_piv_lu().solve(rhs);
    let out: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    out.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(out)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EvolveOptions {
    /// Keep P_e(t) for every state.
    pub store_populations: bool,
    /// Skip the eigendecomposition and use the Fourier route.
    pub force_fourier: bool,
}

pub fn evolve(h: &EffectiveHamiltonian, s: ExcitationIndex, grid: &TimeGrid) -> Result<DecayResult> {
    evolve_with(h, s, grid, EvolveOptions::default())
}

pub fn evolve_with(
    h: &EffectiveHamiltonian,
    s: ExcitationIndex,
    grid: &TimeGrid,
    options: EvolveOptions,
) -> Result<DecayResult> {
    grid.validate()?;
    let times = grid.points();
    if !options.force_fourier {
        let eig = Eigensystem::new(h)?;
        let modes = eig.expand(s)?;
        if modes.is_reliable() {
            let amplitudes = modes.amplitudes(&times);
            return Ok(decay_from_amplitudes(times, &amplitudes, s.state(), options, EvolutionPath::Eigen));
        }
    }
    let amplitudes = fourier_amplitudes(h, s, &times)?;
    Ok(decay_from_amplitudes(
        times,
        &amplitudes,
        s.state(),
        options,
        EvolutionPath::ResolventFourier,
    ))
}

/// Evolution from an already expanded initial state.
pub fn evolve_modes(modes: &Modes<'_>, s: ExcitationIndex, grid: &TimeGrid) -> Result<DecayResult> {
    grid.validate()?;
    let times = grid.points();
    let amplitudes = modes.amplitudes(&times);
    Ok(decay_from_amplitudes(
        times,
        &amplitudes,
        s.state(),
        EvolveOptions::default(),
        EvolutionPath::Eigen,
    ))
}

fn decay_from_amplitudes(
    times: Vec<f64>,
    amplitudes: &Mat<Complex64>,
    state: usize,
    options: EvolveOptions,
    path: EvolutionPath,
) -> DecayResult {
    let n = amplitudes.nrows();
    let p_sum = (0..times.len())
        .map(|j| (0..n).map(|e| amplitudes[(e, j)].norm_sqr()).sum())
        .collect();
    let source_amplitude = (0..times.len()).map(|j| amplitudes[(state, j)]).collect();
    let populations = options.store_populations.then(|| {
        (0..n)
            .map(|e| (0..times.len()).map(|j| amplitudes[(e, j)].norm_sqr()).collect())
            .collect()
    });
    DecayResult {
        times,
        p_sum,
        source_amplitude,
        populations,
        path,
    }
}

/// b(t) for every state from the resolvent by inverse Fourier transform.
///
/// The integral runs along ω + iη, which damps the periodic images produced by
/// the trapezoid rule by e^{−ηT}, T = 2π/Δω. The first two terms of the
/// large-ω expansion, i/(ω−λ) and i(M−λ)/(ω−λ)², are subtracted and added back
/// in closed form, so only an O(ω⁻³) remainder is summed numerically.
pub fn fourier_amplitudes(h: &EffectiveHamiltonian, s: ExcitationIndex, times: &[f64]) -> Result<Mat<Complex64>> {
    let n = h.dim();
    let state = s.state();
    if state >= n {
        return Err(Error::Config(format!("state {state} outside a {n}-state system")));
    }
    let t_max = times.iter().copied().fold(0.0_f64, f64::max).max(1.0);
    let period = 4.0 * t_max;
    let step = 2.0 * PI / period;
    let eta = 12.0 / period;
    let lambda = Complex64::new(0.0, -0.5);

    // ‖M − λ‖ in the max-row-sum norm sets the size of the neglected tail.
    let spread = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
                    (h.matrix[(i, j)] - d).norm()
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let cutoff = 200.0 * spread.max(1.0);
    let half = (cutoff / step).ceil() as usize;
    if 2 * half + 1 > MAX_FOURIER_POINTS {
        return Err(Error::Numerical(format!(
            "Fourier fallback would need {} frequency points",
            2 * half + 1
        )));
    }

    // u = (M − λ)e_s, w = (M − λ)u
    let shifted = |v: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| (0..n).map(|j| h.matrix[(i, j)] * v[j]).sum::<Complex64>() - lambda * v[i])
            .collect()
    };
    let mut e_s = vec![Complex64::new(0.0, 0.0); n];
    e_s[state] = Complex64::new(1.0, 0.0);
    let u = shifted(&e_s);
    let w = shifted(&u);
    let mut rhs = Mat::<Complex64>::zeros(n, 1);
    for i in 0..n {
        rhs[(i, 0)] = w[i];
    }

    let mut acc = Mat::<Complex64>::zeros(n, times.len());
    for j in 0..=2 * half {
        let omega = (j as f64 - half as f64) * step;
        let z = Complex64::new(omega, eta);
        let x = solve_shifted(h, z, &rhs)
            .ok_or_else(|| Error::Numerical(format!("singular resolvent at ω = {omega}")))?;
        let factor = I / ((z - lambda) * (z - lambda));
        for (k, &t) in times.iter().enumerate() {
            let phase = (-I * omega * t).exp() * factor;
            for e in 0..n {
                acc[(e, k)] += x[e] * phase;
            }
        }
    }

    let mut out = Mat::<Complex64>::zeros(n, times.len());
    for (k, &t) in times.iter().enumerate() {
        let damp = (eta * t).exp() * step / (2.0 * PI);
        let pole = (-I * lambda * t).exp();
        for e in 0..n {
            out[(e, k)] = acc[(e, k)] * damp + pole * (e_s[e] - I * t * u[e]);
        }
    }
    pin_initial(&mut out, times, state);
    Ok(out)
}

/// b(0) = e_s holds by definition; avoid round-off there.
fn pin_initial(amplitudes: &mut Mat<Complex64>, times: &[f64], state: usize) {
    for (j, _) in times.iter().enumerate().filter(|(_, &t)| t == 0.0) {
        for e in 0..amplitudes.nrows() {
            amplitudes[(e, j)] = Complex64::new(if e == state { 1.0 } else { 0.0 }, 0.0);
        }
    }
}

/// First time P_sum drops to 1/e, interpolated linearly in (t, ln P_sum).
pub fn trapping_time(decay: &DecayResult) -> TrappingTime {
    trapping_time_of(&decay.times, &decay.p_sum)
}

pub fn trapping_time_of(times: &[f64], p_sum: &[f64]) -> TrappingTime {
    let threshold = (-1.0_f64).exp();
    for k in 1..p_sum.len().min(times.len()) {
        if p_sum[k] <= threshold {
            let (t0, t1) = (times[k - 1], times[k]);
            let (p0, p1) = (p_sum[k - 1], p_sum[k]);
            if p0 <= threshold {
                return TrappingTime::Reached(t0);
            }
            let t = if p1 > 0.0 {
                let (l0, l1) = (p0.ln(), p1.ln());
                t0 + (t1 - t0) * (l0 + 1.0) / (l0 - l1)
            } else {
                t0 + (t1 - t0) * (p0 - threshold) / (p0 - p1)
            };
            return TrappingTime::Reached(t);
        }
    }
    TrappingTime::NotReached {
        last: p_sum.last().copied().unwrap_or(f64::NAN),
    }
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub times: Vec<f64>,
    /// max_t |b_s^eigen(t) − b_s^Fourier(t)|, relative to |b_s(0)| = 1.
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares b_s(t) from the eigendecomposition with the inverse Fourier
/// transform of the resolvent for 0 ≤ t ≤ 5τ₀.
pub fn consistency_check(h: &EffectiveHamiltonian, s: ExcitationIndex) -> Result<ConsistencyReport> {
    let grid = TimeGrid::uniform(5.0, 51);
    let times = grid.points();
    let eig = Eigensystem::new(h)?;
    let modes = eig.expand(s)?;
    let direct = modes.amplitudes(&times);
    let fourier = fourier_amplitudes(h, s, &times)?;
    let state = s.state();
    let max_error = (0..times.len())
        .map(|k| (direct[(state, k)] - fourier[(state, k)]).norm())
        .fold(0.0, f64::max);
    Ok(ConsistencyReport {
        times,
        max_error,
        tolerance: CONSISTENCY_TOLERANCE,
        passed: max_error <= CONSISTENCY_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EnsembleConfiguration;
    use crate::hamiltonian::{assemble, StarkModel};
    use crate::model::{Sublevel, Vec3};

    fn free_atom() -> (EffectiveHamiltonian, ExcitationIndex) {
        let s = ExcitationIndex::new(0, Sublevel::Zero);
        let cfg = EnsembleConfiguration::fixed(vec![Vec3::new(0.0, 0.0, 1.0)], s);
        (assemble(&cfg, &StarkModel::default(), false).unwrap(), s)
    }

    #[test]
    fn grids() {
        let g = OmegaGrid::default();
        assert_eq!(g.len(), 2001);
        let p = g.points();
        assert!((p[2000] - 20.0).abs() < 1e-12);
        let t = TimeGrid::default().points();
        assert_eq!(t.len(), 400);
        assert_eq!(t[0], 0.0);
        assert!((t[1] - 0.01).abs() < 1e-15);
        assert_eq!(t[399], 1000.0);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!(OmegaGrid { min: 1.0, max: 0.0, step: 0.1 }.validate().is_err());
        assert!(TimeGrid::uniform(0.0, 10).validate().is_err());
        assert!(TimeGrid::uniform(1.0, 1).validate().is_err());
    }

    #[test]
    fn free_atom_lorentzian() {
        let (h, s) = free_atom();
        let grid = OmegaGrid { min: -3.0, max: 3.0, step: 0.5 };
        let spec = spectrum(&h, s, &grid, 0.0).unwrap();
        for (w, v) in spec.omega.iter().zip(&spec.values) {
            let exact = 1.0 / (w * w + 0.25);
            assert!((v - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn free_atom_decay() {
        let (h, s) = free_atom();
        let d = evolve(&h, s, &TimeGrid::uniform(10.0, 101)).unwrap();
        assert_eq!(d.path, EvolutionPath::Eigen);
        for (t, p) in d.times.iter().zip(&d.p_sum) {
            assert!((p - (-t).exp()).abs() <= 1e-12 * (-t).exp());
        }
        match trapping_time(&d) {
            TrappingTime::Reached(tau) => assert!((tau - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trapping_time_examples() {
        let times = TimeGrid::default().points();
        let p: Vec<f64> = times.iter().map(|t| (-2.0 * t).exp()).collect();
        assert!((trapping_time_of(&times, &p).value().unwrap() - 0.5).abs() < 1e-12);
        let p: Vec<f64> = times.iter().map(|t| 0.5 * (-2.0 * t).exp() + 0.5 * (-0.5 * t).exp()).collect();
        // root of 0.5e^{-2t} + 0.5e^{-t/2} = 1/e from a bracketing solver
        assert!((trapping_time_of(&times, &p).value().unwrap() - 1.010_709_496_326_374).abs() < 1e-3);
        let flat = vec![1.0; times.len()];
        assert_eq!(trapping_time_of(&times, &flat), TrappingTime::NotReached { last: 1.0 });
    }

    #[test]
    fn first_crossing_wins() {
        let times = [0.0, 1.0, 2.0, 3.0];
        let p = [1.0, 0.3, 0.5, 0.2];
        let tau = trapping_time_of(&times, &p).value().unwrap();
        assert!(tau < 1.0 && tau > 0.0);
    }

    #[test]
    fn forced_fourier_path_matches() {
        let (h, s) = free_atom();
        let grid = TimeGrid::uniform(5.0, 21);
        let opts = EvolveOptions {
            force_fourier: true,
            ..Default::default()
        };
        let d = evolve_with(&h, s, &grid, opts).unwrap();
        assert_eq!(d.path, EvolutionPath::ResolventFourier);
        for (t, p) in d.times.iter().zip(&d.p_sum) {
            assert!((p - (-t).exp()).abs() < 1e-4, "t={t} p={p}");
        }
    }

    #[test]
    fn bad_state_index() {
        let (h, _) = free_atom();
        let s = ExcitationIndex::new(3, Sublevel::Zero);
        assert!(evolve(&h, s, &TimeGrid::default()).is_err());
        assert!(spectrum_resolvent(&h, s, &OmegaGrid::default(), 0.0).is_err());
    }
}
