//! Thermal mixtures of pairwise superpositions c|J,M⟩ + d|J+2,M⟩.
//!
//! Ground-vibrational rotational levels are weighted by a rigid-rotor
//! Boltzmann factor, each populated (J, M) is driven to (J+2, M) by an
//! effective two-photon pulse, and the deposition of every component is run
//! with its own susceptibilities and summed.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{deposit_ensemble, BeamConfig, DepositionHistogram, DepositionOptions};
use crate::error::{Error, Result};
use crate::moldata::MoleculeModel;
use crate::potential::{find_extrema, ExtremumKind, OpticalPotentialSpec, PotentialTerms, StandingWaveConfig};
use crate::suscept::{susceptibility_set, SuperpositionSpec, SusceptOptions};
use crate::units::{BOLTZMANN, HBAR};

/// Tolerance on Σw = 1.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Reference pulse and the population it leaves in |0,0,0⟩.
pub const REFERENCE_FIELD: f64 = 3.25e9;
pub const REFERENCE_WIDTH_CM: f64 = 75.4;
pub const REFERENCE_GROUND_POPULATION: f64 = 0.8;

/// Smallest J whose cumulative rigid-rotor population, with (2J+1)
/// degeneracy, reaches `cutoff`.
pub fn rotational_truncation(rotational_constant: f64, temperature: f64, cutoff: f64) -> Result<u32> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::invalid("temperature", "must be positive"));
    }
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(Error::invalid("cutoff", "must lie in (0, 1]"));
    }
    if !(rotational_constant > 0.0) {
        return Err(Error::invalid("rotational_constant", "must be positive"));
    }
    let beta = rotational_constant / (BOLTZMANN * temperature);
    let level = |j: u32| (2 * j + 1) as f64 * (-beta * (j * (j + 1)) as f64).exp();
    let mut z = 0.0;
    let mut j = 0;
    loop {
        let p = level(j);
        z += p;
        if j > 10 && p < 1e-18 * z {
            break;
        }
        j += 1;
    }
    let mut cum = 0.0;
    for j in 0.. {
        cum += level(j);
        if cum / z >= cutoff * (1.0 - 1e-15) {
            return Ok(j);
        }
    }
    unreachable!()
}

/// Normalized weights of the model's ground ν = 0 states with J ≤ J_max,
/// keyed by state index.
pub fn boltzmann_weights(model: &MoleculeModel, temperature: f64, cutoff: f64) -> Result<BTreeMap<usize, f64>> {
    let b = model.rotational_constant();
    let j_max = rotational_truncation(b, temperature, cutoff)?;
    let beta = b / (BOLTZMANN * temperature);
    let mut weights: BTreeMap<usize, f64> = model
        .ground_states()
        .filter(|&i| model.state(i).nu == 0 && model.state(i).j <= j_max)
        .map(|i| {
            let j = model.state(i).j;
            (i, (-beta * (j * (j + 1)) as f64).exp())
        })
        .collect();
    let total: f64 = weights.values().sum();
    if total == 0.0 {
        return Err(Error::Empty("no ground ν = 0 states below the truncation"));
    }
    weights.values_mut().for_each(|w| *w /= total);
    Ok(weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    #[default]
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreparationPulse {
    /// Peak field (V/m).
    pub field_strength: f64,
    /// Spectral width (cm⁻¹).
    pub spectral_width: f64,
    #[serde(default)]
    pub shape: PulseShape,
}

impl PreparationPulse {
    /// 3.25×10⁹ V/m, 75.4 cm⁻¹ square pulse.
    pub fn reference() -> Self {
        PreparationPulse {
            field_strength: REFERENCE_FIELD,
            spectral_width: REFERENCE_WIDTH_CM,
            shape: PulseShape::Square,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.field_strength >= 0.0 && self.field_strength.is_finite()) {
            return Err(Error::invalid("field_strength", "must be finite and >= 0"));
        }
        if !(self.spectral_width > 0.0 && self.spectral_width.is_finite()) {
            return Err(Error::invalid("spectral_width", "must be positive"));
        }
        Ok(())
    }
}

/// Effective two-photon coupling |Σ_j μ_ja μ_jb / ω_ja| (C²m²/(rad/s)).
fn two_photon_coupling(model: &MoleculeModel, a: usize, b: usize) -> f64 {
    let dipoles = model.dipoles();
    let ea = model.state(a).energy;
    dipoles
        .coupled(a)
        .iter()
        .map(|&(j, mu_ja)| {
            let mu_jb = dipoles.get(j, b);
            mu_ja * mu_jb / ((model.state(j).energy - ea) / HBAR)
        })
        .sum::<f64>()
        .abs()
}

/// (c, d) for the pair `a` = (J, M) → `b` = (J+2, M) of the ground ν = 0 ladder.
///
/// Pulse area A = A_ref (F/F_ref)² (w_ref/w) (R_ab/R_ref), with A_ref fixed so
/// the reference pulse leaves |c|² = 0.8 on (0,0,0) → (0,2,0). Then
/// c = cos(A/2), d = sin(A/2).
pub fn preparation_coefficients(
    model: &MoleculeModel,
    pulse: &PreparationPulse,
    a: usize,
    b: usize,
) -> Result<(Complex64, Complex64)> {
    pulse.validate()?;
    let (sa, sb) = (model.state(a), model.state(b));
    if sb.j != sa.j + 2 || sa.m != sb.m || sa.nu != sb.nu {
        return Err(Error::PreparationRule {
            j1: sa.j as i32,
            m1: sa.m,
            j2: sb.j as i32,
            m2: sb.m,
        });
    }
    if pulse.field_strength == 0.0 {
        return Ok((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
    }
    let r_ref = two_photon_coupling(model, model.ground_state(0, 0, 0)?, model.ground_state(0, 2, 0)?);
    if r_ref == 0.0 {
        return Err(Error::invalid("dataset", "reference pair (0,0,0)/(0,2,0) has no two-photon coupling"));
    }
    let a_ref = 2.0 * (1.0 - REFERENCE_GROUND_POPULATION).sqrt().asin();
    let area = a_ref
        * (pulse.field_strength / REFERENCE_FIELD).powi(2)
        * (REFERENCE_WIDTH_CM / pulse.spectral_width)
        * (two_photon_coupling(model, a, b) / r_ref);
    let (s, c) = (0.5 * area).sin_cos();
    Ok((Complex64::new(c, 0.0), Complex64::new(s, 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureComponent {
    pub j: u32,
    pub m: i32,
    pub weight: f64,
    pub superposition: SuperpositionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
    /// K
    pub temperature: f64,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Empty("mixture has no components"));
        }
        if self.components.iter().any(|c| !(c.weight >= 0.0)) {
            return Err(Error::invalid("weight", "weights must be non-negative"));
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::invalid("weight", format!("weights sum to {total}")));
        }
        Ok(())
    }
}

/// Boltzmann-weighted pairs (J, M) → (J+2, M) for every populated (J, M).
pub fn build_thermal_mixture(
    model: &MoleculeModel,
    temperature: f64,
    cutoff: f64,
    pulse: &PreparationPulse,
) -> Result<MixtureSpec> {
    let weights = boltzmann_weights(model, temperature, cutoff)?;
    let mut components = Vec::with_capacity(weights.len());
    for (&a, &weight) in &weights {
        let s = model.state(a);
        let b = model.ground_state(0, s.j + 2, s.m).map_err(|_| {
            Error::invalid("dataset", format!("partner (0,{},{}) of `{}` is missing", s.j + 2, s.m, s.id))
        })?;
        let (c, d) = preparation_coefficients(model, pulse, a, b)?;
        components.push(MixtureComponent {
            j: s.j,
            m: s.m,
            weight,
            superposition: SuperpositionSpec::new(model, a, b, c, d)?,
        });
    }
    let spec = MixtureSpec {
        components,
        temperature,
    };
    spec.validate()?;
    Ok(spec)
}

/// Integer split of `n` proportional to `weights`, largest remainders first
/// (ties to the lower index).
pub fn allocate_trajectories(weights: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Seed of component `index` under master seed `seed`.
pub fn component_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentRun {
    pub j: u32,
    pub m: i32,
    pub weight: f64,
    pub population_c: f64,
    pub population_d: f64,
    pub trajectories: usize,
    pub seed: u64,
    pub steps: usize,
    pub histogram: DepositionHistogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureRun {
    pub combined: DepositionHistogram,
    pub components: Vec<ComponentRun>,
}

fn component_potential(
    model: &MoleculeModel,
    component: &MixtureComponent,
    field: &StandingWaveConfig,
    terms: PotentialTerms,
) -> Result<OpticalPotentialSpec> {
    let chi = susceptibility_set(model, &component.superposition, field, &SusceptOptions::default())?;
    Ok(OpticalPotentialSpec::averaged(chi, *field).with_terms(terms))
}

/// Deposit `n` trajectories split over the mixture components and sum them.
#[allow(clippy::too_many_arguments)]
pub fn simulate_mixture_deposition(
    model: &MoleculeModel,
    mixture: &MixtureSpec,
    field: &StandingWaveConfig,
    beam: &BeamConfig,
    n: usize,
    seed: u64,
    terms: PotentialTerms,
    opts: &DepositionOptions,
) -> Result<MixtureRun> {
    mixture.validate()?;
    let weights: Vec<f64> = mixture.components.iter().map(|c| c.weight).collect();
    let counts = allocate_trajectories(&weights, n);
    let mut combined = DepositionHistogram::empty(opts.bin_width)?;
    let mut components = Vec::with_capacity(counts.len());
    for (index, (component, &count)) in mixture.components.iter().zip(&counts).enumerate() {
        let sub_seed = component_seed(seed, index);
        let (histogram, steps) = if count == 0 {
            (DepositionHistogram::empty(opts.bin_width)?, 0)
        } else {
            let spec = component_potential(model, component, field, terms)?;
            let run = deposit_ensemble(&spec, beam, count, sub_seed, opts)?;
            (run.histogram, run.plan.steps)
        };
        combined = combined.merge(&histogram)?;
        components.push(ComponentRun {
            j: component.j,
            m: component.m,
            weight: component.weight,
            population_c: component.superposition.c1.norm_sqr(),
            population_d: component.superposition.c2.norm_sqr(),
            trajectories: count,
            seed: sub_seed,
            steps,
            histogram,
        });
    }
    Ok(MixtureRun {
        combined,
        components,
    })
}

/// Potential minima of every component on `interval`, in component order.
pub fn minima_by_component(
    model: &MoleculeModel,
    mixture: &MixtureSpec,
    field: &StandingWaveConfig,
    terms: PotentialTerms,
    interval: (f64, f64),
) -> Result<Vec<Vec<f64>>> {
    mixture
        .components
        .iter()
        .map(|c| {
            let spec = component_potential(model, c, field, terms)?;
            let grid = spec.default_grid(interval.0, interval.1);
            Ok(find_extrema(&spec, interval, grid)?
                .into_iter()
                .filter(|e| e.kind == ExtremumKind::Minimum)
                .map(|e| e.x)
                .collect())
        })
        .collect()
}
