//! Classical transverse trajectories through the averaged optical potential
//! and binning of the arrival positions.
//!
//! Every trajectory draws from its own ChaCha stream `(seed, index)`, and
//! final positions are collected in index order before binning. Histograms are
//! therefore bit-identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moldata::MoleculeModel;
use crate::potential::{find_extrema, well_period, ExtremumKind, OpticalPotentialSpec, PotentialMode, StandingWaveConfig};
use crate::suscept::{susceptibility_set, SuperpositionSpec, SusceptOptions};

/// Default histogram bin (m).
pub const DEFAULT_BIN_WIDTH: f64 = 1.403e-9;
/// Default number of steps per shortest well period.
pub const STEPS_PER_PERIOD: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    /// Longitudinal speed (m/s).
    pub vz: f64,
    /// Transverse extent of the nozzle (m).
    pub nozzle_width: f64,
    /// Standard deviation of the transverse velocity (m/s).
    pub sigma_v: f64,
    /// Time spent inside the field (s).
    pub t_int: f64,
    /// Free flight between field and surface (s).
    pub t_free: f64,
    /// Molecular mass (kg).
    pub mass: f64,
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.vz) {
            return Err(Error::invalid("vz", "must be positive"));
        }
        if !positive(self.nozzle_width) {
            return Err(Error::invalid("nozzle_width", "must be positive"));
        }
        if !(self.sigma_v >= 0.0 && self.sigma_v.is_finite()) {
            return Err(Error::invalid("sigma_v", "must be finite and >= 0"));
        }
        if !positive(self.t_int) {
            return Err(Error::invalid("t_int", "must be positive"));
        }
        if !(self.t_free >= 0.0 && self.t_free.is_finite()) {
            return Err(Error::invalid("t_free", "must be finite and >= 0"));
        }
        if !positive(self.mass) {
            return Err(Error::invalid("mass", "must be positive"));
        }
        Ok(())
    }

    /// Length of the field region traversed at speed vz (m).
    pub fn interaction_length(&self) -> f64 {
        self.vz * self.t_int
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseState {
    pub x: f64,
    pub vx: f64,
}

/// The random stream owned by trajectory `index`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Initial state of trajectory `index`: x uniform over the nozzle, vx normal.
pub fn sample_state(beam: &BeamConfig, seed: u64, index: u64) -> TransverseState {
    let mut rng = trajectory_rng(seed, index);
    let u: f64 = rng.random();
    let x = (u - 0.5) * beam.nozzle_width;
    let vx = if beam.sigma_v > 0.0 {
        Normal::new(0.0, beam.sigma_v)
            .expect("finite positive sigma")
            .sample(&mut rng)
    } else {
        0.0
    };
    TransverseState { x, vx }
}

pub fn sample_ensemble(beam: &BeamConfig, n: usize, seed: u64) -> Vec<TransverseState> {
    (0..n as u64).map(|i| sample_state(beam, seed, i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Kick-drift-kick, second order.
    Leapfrog,
    /// Position-extended Forest-Ruth-like, fourth order.
    #[default]
    Pefrl,
}

impl Integrator {
    pub fn order(self) -> u32 {
        match self {
            Integrator::Leapfrog => 2,
            Integrator::Pefrl => 4,
        }
    }
}

const PEFRL_XI: f64 = 0.178_617_895_844_809_1;
const PEFRL_LAMBDA: f64 = -0.212_341_831_062_605_4;
const PEFRL_CHI: f64 = -0.066_264_582_669_818_5;

/// Fixed step count that lands exactly on `t_int` with steps no longer than `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepPlan {
    pub dt: f64,
    pub steps: usize,
}

impl StepPlan {
    pub fn new(t_int: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        let steps = (t_int / dt).ceil().max(1.0) as usize;
        Ok(StepPlan {
            dt: t_int / steps as f64,
            steps,
        })
    }
}

fn step(integrator: Integrator, s: &mut TransverseState, h: f64, acc: &impl Fn(f64) -> f64) {
    match integrator {
        Integrator::Leapfrog => {
            s.vx += 0.5 * h * acc(s.x);
            s.x += h * s.vx;
            s.vx += 0.5 * h * acc(s.x);
        }
        Integrator::Pefrl => {
            s.x += PEFRL_XI * h * s.vx;
            s.vx += 0.5 * (1.0 - 2.0 * PEFRL_LAMBDA) * h * acc(s.x);
            s.x += PEFRL_CHI * h * s.vx;
            s.vx += PEFRL_LAMBDA * h * acc(s.x);
            s.x += (1.0 - 2.0 * (PEFRL_CHI + PEFRL_XI)) * h * s.vx;
            s.vx += PEFRL_LAMBDA * h * acc(s.x);
            s.x += PEFRL_CHI * h * s.vx;
            s.vx += 0.5 * (1.0 - 2.0 * PEFRL_LAMBDA) * h * acc(s.x);
            s.x += PEFRL_XI * h * s.vx;
        }
    }
}

fn check_mode(spec: &OpticalPotentialSpec) -> Result<()> {
    if spec.mode != PotentialMode::Averaged {
        return Err(Error::invalid("mode", "trajectories need the averaged potential"));
    }
    Ok(())
}

fn propagate(
    s0: TransverseState,
    spec: &OpticalPotentialSpec,
    beam: &BeamConfig,
    plan: StepPlan,
    integrator: Integrator,
) -> Result<TransverseState> {
    let inv_mass = 1.0 / beam.mass;
    let acc = |x: f64| spec.force_unchecked(x) * inv_mass;
    let mut s = s0;
    for i in 0..plan.steps {
        step(integrator, &mut s, plan.dt, &acc);
        if !(s.x.is_finite() && s.vx.is_finite()) {
            return Err(Error::NonFinite {
                step: i + 1,
                x: s.x,
                vx: s.vx,
            });
        }
    }
    s.x += s.vx * beam.t_free;
    Ok(s)
}

/// Propagate one molecule through the field for `t_int`, then free flight
/// for `t_free`, with the default integrator.
pub fn integrate_trajectory(
    s0: TransverseState,
    spec: &OpticalPotentialSpec,
    beam: &BeamConfig,
    dt: f64,
) -> Result<TransverseState> {
    integrate_with(s0, spec, beam, dt, Integrator::default())
}

pub fn integrate_with(
    s0: TransverseState,
    spec: &OpticalPotentialSpec,
    beam: &BeamConfig,
    dt: f64,
    integrator: Integrator,
) -> Result<TransverseState> {
    check_mode(spec)?;
    propagate(s0, spec, beam, StepPlan::new(beam.t_int, dt)?, integrator)
}

/// Largest |E(t) − E(0)| along the field segment of one trajectory (J).
pub fn energy_deviation(
    s0: TransverseState,
    spec: &OpticalPotentialSpec,
    beam: &BeamConfig,
    dt: f64,
    integrator: Integrator,
) -> Result<f64> {
    check_mode(spec)?;
    let plan = StepPlan::new(beam.t_int, dt)?;
    let energy = |s: &TransverseState| 0.5 * beam.mass * s.vx * s.vx + spec.total(s.x);
    let inv_mass = 1.0 / beam.mass;
    let acc = |x: f64| spec.force_unchecked(x) * inv_mass;
    let e0 = energy(&s0);
    let mut s = s0;
    let mut worst: f64 = 0.0;
    for _ in 0..plan.steps {
        step(integrator, &mut s, plan.dt, &acc);
        worst = worst.max((energy(&s) - e0).abs());
    }
    Ok(worst)
}

/// Domain scanned for wells: the nozzle plus one long wavelength either side.
pub fn well_domain(field: &StandingWaveConfig, beam: &BeamConfig) -> (f64, f64) {
    let pad = field.lambda1.max(field.lambda2);
    (-0.5 * beam.nozzle_width - pad, 0.5 * beam.nozzle_width + pad)
}

/// Shortest harmonic well period over `interval`, or `None` without wells.
pub fn min_well_period(spec: &OpticalPotentialSpec, mass: f64, interval: (f64, f64)) -> Result<Option<f64>> {
    let grid = spec.default_grid(interval.0, interval.1);
    let mut best: Option<f64> = None;
    for e in find_extrema(spec, interval, grid)? {
        if e.kind == ExtremumKind::Minimum {
            let t = well_period(spec, e.x, mass)?;
            best = Some(best.map_or(t, |b| b.min(t)));
        }
    }
    Ok(best)
}

/// T_min/200 over the beam's domain; t_int/200 when the potential has no wells.
pub fn default_dt(spec: &OpticalPotentialSpec, beam: &BeamConfig) -> Result<f64> {
    let t = min_well_period(spec, beam.mass, well_domain(&spec.field, beam))?;
    Ok(t.unwrap_or(beam.t_int) / STEPS_PER_PERIOD)
}

/// Arrival counts on a grid aligned to integer multiples of `bin_width`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepositionHistogram {
    pub bin_width: f64,
    /// Left edge of bin 0 (m).
    pub origin: f64,
    pub counts: Vec<u64>,
    pub n_total: u64,
}

impl DepositionHistogram {
    pub fn empty(bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::invalid("bin_width", "must be positive"));
        }
        Ok(DepositionHistogram {
            bin_width,
            origin: 0.0,
            counts: Vec::new(),
            n_total: 0,
        })
    }

    fn first_index(&self) -> i64 {
        (self.origin / self.bin_width).round() as i64
    }

    pub fn bin_index(x: f64, bin_width: f64) -> i64 {
        (x / bin_width).floor() as i64
    }

    pub fn from_positions(positions: &[f64], bin_width: f64) -> Result<Self> {
        let mut h = Self::empty(bin_width)?;
        if positions.is_empty() {
            return Ok(h);
        }
        let indices: Vec<i64> = positions.iter().map(|&x| Self::bin_index(x, bin_width)).collect();
        let lo = *indices.iter().min().unwrap();
        let hi = *indices.iter().max().unwrap();
        h.origin = lo as f64 * bin_width;
        h.counts = vec![0; (hi - lo + 1) as usize];
        for k in indices {
            h.counts[(k - lo) as usize] += 1;
        }
        h.n_total = positions.len() as u64;
        Ok(h)
    }

    /// Bin centers (m).
    pub fn centers(&self) -> Vec<f64> {
        let k0 = self.first_index();
        (0..self.counts.len())
            .map(|i| ((k0 + i as i64) as f64 + 0.5) * self.bin_width)
            .collect()
    }

    /// Sum of another histogram on the same bin width.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.bin_width != other.bin_width {
            return Err(Error::invalid("bin_width", "histograms use different bins"));
        }
        if self.counts.is_empty() {
            return Ok(other.clone());
        }
        if other.counts.is_empty() {
            return Ok(self.clone());
        }
        let (a0, b0) = (self.first_index(), other.first_index());
        let lo = a0.min(b0);
        let hi = (a0 + self.counts.len() as i64).max(b0 + other.counts.len() as i64);
        let mut counts = vec![0u64; (hi - lo) as usize];
        for (k0, src) in [(a0, &self.counts), (b0, &other.counts)] {
            for (i, c) in src.iter().enumerate() {
                counts[(k0 - lo) as usize + i] += c;
            }
        }
        Ok(DepositionHistogram {
            bin_width: self.bin_width,
            origin: lo as f64 * self.bin_width,
            counts,
            n_total: self.n_total + other.n_total,
        })
    }

    /// Counts re-expressed on the window of global bins [k_lo, k_hi).
    pub fn window(&self, k_lo: i64, k_hi: i64) -> Vec<u64> {
        let k0 = self.first_index();
        (k_lo..k_hi)
            .map(|k| {
                let i = k - k0;
                if i >= 0 && (i as usize) < self.counts.len() {
                    self.counts[i as usize]
                } else {
                    0
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepositionOptions {
    pub bin_width: f64,
    pub integrator: Integrator,
    /// Explicit step; defaults to T_min/200.
    pub dt: Option<f64>,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for DepositionOptions {
    fn default() -> Self {
        DepositionOptions {
            bin_width: DEFAULT_BIN_WIDTH,
            integrator: Integrator::default(),
            dt: None,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepositionRun {
    pub histogram: DepositionHistogram,
    pub plan: StepPlan,
    pub trajectories: usize,
}

impl DepositionRun {
    pub fn total_steps(&self) -> u64 {
        self.plan.steps as u64 * self.trajectories as u64
    }
}

/// Run `n` trajectories through a prepared potential and bin them.
pub fn deposit_ensemble(
    spec: &OpticalPotentialSpec,
    beam: &BeamConfig,
    n: usize,
    seed: u64,
    opts: &DepositionOptions,
) -> Result<DepositionRun> {
    beam.validate()?;
    check_mode(spec)?;
    let dt = match opts.dt {
        Some(dt) => dt,
        None => default_dt(spec, beam)?,
    };
    let plan = StepPlan::new(beam.t_int, dt)?;
    let job = || -> Result<Vec<f64>> {
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                propagate(sample_state(beam, seed, i), spec, beam, plan, opts.integrator).map(|s| s.x)
            })
            .collect()
    };
    let positions = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?
            .install(job)?,
        None => job()?,
    };
    Ok(DepositionRun {
        histogram: DepositionHistogram::from_positions(&positions, opts.bin_width)?,
        plan,
        trajectories: n,
    })
}

/// Susceptibilities, averaged potential, trajectories and binning in one call.
#[allow(clippy::too_many_arguments)]
pub fn simulate_deposition(
    model: &MoleculeModel,
    sup: &SuperpositionSpec,
    field: &StandingWaveConfig,
    beam: &BeamConfig,
    n: usize,
    seed: u64,
    bin_width: f64,
) -> Result<DepositionHistogram> {
    let chi = susceptibility_set(model, sup, field, &SusceptOptions::default())?;
    let spec = OpticalPotentialSpec::averaged(chi, *field);
    let opts = DepositionOptions {
        bin_width,
        ..Default::default()
    };
    Ok(deposit_ensemble(&spec, beam, n, seed, &opts)?.histogram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suscept::SusceptibilitySet;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    const MASS: f64 = 4.651_734_508_829e-26;

    fn beam(t_int: f64) -> BeamConfig {
        BeamConfig {
            vz: 600.0,
            nozzle_width: 4.0 * 0.736e-6,
            sigma_v: 0.0,
            t_int,
            t_free: 0.0,
            mass: MASS,
        }
    }

    fn single_wave(chi_ni: f64) -> OpticalPotentialSpec {
        let field = StandingWaveConfig::new(1.0e8, 0.0, 0.628e-6, 0.736e-6, 0.0).unwrap();
        let chi = SusceptibilitySet {
            chi_ni_w1: chi_ni,
            chi_ni_w2: 0.0,
            chi_in_w1: Complex64::default(),
            chi_in_w2: Complex64::default(),
            chi_in_w21p1: Complex64::default(),
            chi_in_w21m2: Complex64::default(),
        };
        OpticalPotentialSpec::averaged(chi, field)
    }

    fn flat() -> OpticalPotentialSpec {
        single_wave(0.0)
    }

    #[test]
    fn zero_sigma_gives_zero_velocity() {
        for s in sample_ensemble(&beam(1e-7), 5, 9) {
            assert_eq!(s.vx, 0.0);
        }
    }

    #[test]
    fn uniform_mean_within_three_sigma() {
        let b = beam(1e-7);
        let n = 100_000;
        let xs = sample_ensemble(&b, n, 42);
        let mean = xs.iter().map(|s| s.x).sum::<f64>() / n as f64;
        let bound = 3.0 * (b.nozzle_width / 12f64.sqrt()) / (n as f64).sqrt();
        assert!(mean.abs() < bound, "{mean} vs {bound}");
        assert!(xs.iter().all(|s| s.x.abs() <= b.nozzle_width / 2.0));
    }

    #[test]
    fn sampling_is_reproducible_per_index() {
        let b = BeamConfig { sigma_v: 0.3, ..beam(1e-7) };
        let a = sample_ensemble(&b, 50, 7);
        assert_eq!(a, sample_ensemble(&b, 50, 7));
        assert_eq!(a[37], sample_state(&b, 7, 37));
        assert_ne!(a, sample_ensemble(&b, 50, 8));
    }

    #[test]
    fn step_plan_lands_on_t_int() {
        let p = StepPlan::new(1.0, 0.3).unwrap();
        assert_eq!(p.steps, 4);
        assert!((p.dt * p.steps as f64 - 1.0).abs() < 1e-15);
        assert!(StepPlan::new(1.0, 0.0).is_err());
    }

    #[test]
    fn free_particle() {
        let b = BeamConfig { t_free: 2.0e-7, ..beam(5.0e-7) };
        let s0 = TransverseState { x: 1.0e-7, vx: 0.2 };
        for integrator in [Integrator::Leapfrog, Integrator::Pefrl] {
            let s = integrate_with(s0, &flat(), &b, 1.0e-9, integrator).unwrap();
            let expected = 1.0e-7 + 0.2 * 7.0e-7;
            assert!((s.x - expected).abs() < 1e-18, "{}", s.x);
            assert_eq!(s.vx, 0.2);
        }
    }

    #[test]
    fn quarter_period_focusing() {
        let spec = single_wave(1.0e-44);
        let t = well_period(&spec, 0.0, MASS).unwrap();
        let d = 1.0e-3 * spec.field.lambda1;
        let b = beam(t / 4.0);
        let s = integrate_trajectory(TransverseState { x: d, vx: 0.0 }, &spec, &b, t / 200.0).unwrap();
        assert!(s.x.abs() < 1e-3 * d, "{} vs {}", s.x, d);
    }

    #[test]
    fn energy_error_scales_with_order() {
        let spec = single_wave(1.0e-44);
        let t = well_period(&spec, 0.0, MASS).unwrap();
        let b = beam(2.0 * t);
        let s0 = TransverseState { x: 0.1 * spec.field.lambda1, vx: 0.0 };
        for integrator in [Integrator::Leapfrog, Integrator::Pefrl] {
            let coarse = energy_deviation(s0, &spec, &b, t / 100.0, integrator).unwrap();
            let fine = energy_deviation(s0, &spec, &b, t / 200.0, integrator).unwrap();
            let expected = 2f64.powi(integrator.order() as i32);
            assert!(coarse / fine > 0.8 * expected, "{integrator:?}: {}", coarse / fine);
        }
    }

    #[test]
    fn non_finite_state_reported() {
        let spec = single_wave(1.0e300);
        let b = beam(1e-7);
        let err = integrate_trajectory(TransverseState { x: 1e-7, vx: 0.0 }, &spec, &b, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: 1, .. }), "{err}");
    }

    #[test]
    fn time_dependent_mode_rejected() {
        let spec = flat().with_mode(PotentialMode::FullTimeDependent);
        assert!(integrate_trajectory(TransverseState { x: 0.0, vx: 0.0 }, &spec, &beam(1e-7), 1e-9).is_err());
    }

    #[test]
    fn histogram_grid_is_global() {
        let h = DepositionHistogram::from_positions(&[0.5, 1.5, 1.7, -0.2], 1.0).unwrap();
        assert_eq!(h.origin, -1.0);
        assert_eq!(h.counts, vec![1, 1, 2]);
        assert_eq!(h.centers(), vec![-0.5, 0.5, 1.5]);
        let g = DepositionHistogram::from_positions(&[4.2], 1.0).unwrap();
        let m = h.merge(&g).unwrap();
        assert_eq!(m.counts, vec![1, 1, 2, 0, 0, 1]);
        assert_eq!(m.n_total, 5);
        assert_eq!(m.counts.iter().sum::<u64>(), m.n_total);
        assert_eq!(m.window(-2, 1), vec![0, 1, 1]);
    }

    #[test]
    fn unperturbed_beam_is_uniform() {
        let b = beam(1e-7);
        let n = 20_000;
        let run = deposit_ensemble(&flat(), &b, n, 3, &DepositionOptions { bin_width: 20e-9, ..Default::default() }).unwrap();
        let h = &run.histogram;
        assert_eq!(h.n_total, n as u64);
        assert_eq!(h.counts.iter().sum::<u64>(), n as u64);
        // Interior bins only; edge bins are partially covered by the nozzle.
        let inner = &h.counts[1..h.counts.len() - 1];
        let mean = n as f64 * h.bin_width / b.nozzle_width;
        for &c in inner {
            assert!((c as f64 - mean).abs() < 4.0 * mean.sqrt(), "{c} vs {mean}");
        }
    }

    #[test]
    fn worker_count_does_not_change_histogram() {
        let spec = single_wave(1.0e-44);
        let b = BeamConfig { sigma_v: 0.05, ..beam(3.0e-7) };
        let run = |w| {
            deposit_ensemble(&spec, &b, 3000, 11, &DepositionOptions { workers: Some(w), ..Default::default() })
                .unwrap()
                .histogram
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(4));
    }

    #[test]
    fn quarter_period_peaks_sit_on_minima() {
        let spec = single_wave(1.0e-44);
        let t = well_period(&spec, 0.0, MASS).unwrap();
        let b = beam(t / 4.0);
        let run = deposit_ensemble(&spec, &b, 10_000, 5, &DepositionOptions::default()).unwrap();
        let h = &run.histogram;
        let centers = h.centers();
        let half = spec.field.lambda1 / 2.0;
        let minima: Vec<f64> = find_extrema(&spec, (-1.3e-6, 1.3e-6), 10_000)
            .unwrap()
            .into_iter()
            .filter(|e| e.kind == ExtremumKind::Minimum)
            .map(|e| e.x)
            .collect();
        assert_eq!(minima.len(), 9);
        for x_min in minima {
            // Tallest bin within ±λ₁/4 of the minimum.
            let (best, _) = centers
                .iter()
                .zip(&h.counts)
                .filter(|(x, _)| (*x - x_min).abs() < half / 2.0)
                .max_by_key(|(_, c)| **c)
                .unwrap();
            assert!((best - x_min).abs() <= 1.5 * h.bin_width, "{best} vs {x_min}");
        }
        assert!((t - 2.0 * PI * (MASS / spec.curvature_at(0.0)).sqrt()).abs() < 1e-18);
    }
}
