//! Sum-over-states susceptibilities of a two-state superposition driven by a
//! two-color field.
//!
//! Transition frequencies are ω_ji = (E_j − E_i)/ħ, positive when level j lies
//! above level i, so below-resonance non-interference terms are positive.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moldata::MoleculeModel;
use crate::potential::StandingWaveConfig;
use crate::units::{angular_to_wavenumber, wavenumber_to_angular, HBAR};

/// Normalization tolerance for |c₁|² + |c₂|².
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Default near-resonance guard (cm⁻¹).
pub const DEFAULT_GUARD_CM: f64 = 1.0;

/// c₁|φ₁⟩ + c₂|φ₂⟩ over two ground-manifold states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperpositionSpec {
    pub state1: usize,
    pub state2: usize,
    pub c1: Complex64,
    pub c2: Complex64,
}

impl SuperpositionSpec {
    pub fn new(
        model: &MoleculeModel,
        state1: usize,
        state2: usize,
        c1: Complex64,
        c2: Complex64,
    ) -> Result<Self> {
        if state1 == state2 {
            return Err(Error::InvalidSuperposition("states must differ".into()));
        }
        for s in [state1, state2] {
            if s >= model.states().len() {
                return Err(Error::UnknownState(format!("index {s}")));
            }
            if !model.is_ground(s) {
                return Err(Error::InvalidSuperposition(format!(
                    "state `{}` is not in the ground manifold",
                    model.state(s).id
                )));
            }
        }
        let norm = c1.norm_sqr() + c2.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidSuperposition(format!(
                "|c1|^2 + |c2|^2 = {norm}, expected 1"
            )));
        }
        Ok(SuperpositionSpec {
            state1,
            state2,
            c1,
            c2,
        })
    }

    /// Same as [`SuperpositionSpec::new`] but rescales the coefficients to unit norm.
    pub fn normalized(
        model: &MoleculeModel,
        state1: usize,
        state2: usize,
        c1: Complex64,
        c2: Complex64,
    ) -> Result<Self> {
        let norm = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidSuperposition("coefficients vanish".into()));
        }
        Self::new(model, state1, state2, c1 / norm, c2 / norm)
    }

    /// Superposition with |c₁|² = `population1`, real c₁ and c₂ = |c₂|e^{-iθ}, so
    /// that arg(c₁c₂*) = θ.
    pub fn with_phase(
        model: &MoleculeModel,
        state1: usize,
        state2: usize,
        population1: f64,
        theta: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&population1) {
            return Err(Error::InvalidSuperposition(format!(
                "population {population1} outside [0, 1]"
            )));
        }
        let a = population1.sqrt();
        let b = (1.0 - population1).sqrt();
        let c2 = Complex64::from_polar(b, -theta);
        Self::new(model, state1, state2, Complex64::new(a, 0.0), c2)
    }

    /// A single prepared state: c₁ = 1, c₂ = 0.
    pub fn pure(model: &MoleculeModel, state1: usize, state2: usize) -> Result<Self> {
        Self::new(
            model,
            state1,
            state2,
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
    }

    /// Relative phase θ = arg(c₁c₂*).
    pub fn theta(&self) -> f64 {
        self.coherence().arg()
    }

    /// c₁c₂*.
    pub fn coherence(&self) -> Complex64 {
        self.c1 * self.c2.conj()
    }

    /// Both states with their coefficients.
    pub fn members(&self) -> [(usize, Complex64); 2] {
        [(self.state1, self.c1), (self.state2, self.c2)]
    }

    pub fn swapped(&self) -> Self {
        SuperpositionSpec {
            state1: self.state2,
            state2: self.state1,
            c1: self.c2,
            c2: self.c1,
        }
    }
}

/// Which interference component of the induced dipole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InterferenceComponent {
    /// χⁱⁿ(ω₁)
    Omega1,
    /// χⁱⁿ(ω₂)
    Omega2,
    /// χⁱⁿ(ω₂₁ + ω₁)
    SumOmega1,
    /// χⁱⁿ(ω₂₁ − ω₂)
    DifferenceOmega2,
}

impl InterferenceComponent {
    pub const ALL: [InterferenceComponent; 4] = [
        InterferenceComponent::Omega1,
        InterferenceComponent::Omega2,
        InterferenceComponent::SumOmega1,
        InterferenceComponent::DifferenceOmega2,
    ];
}

/// The six contributions to the zz polarizability (C m²/V).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SusceptibilitySet {
    pub chi_ni_w1: f64,
    pub chi_ni_w2: f64,
    pub chi_in_w1: Complex64,
    pub chi_in_w2: Complex64,
    pub chi_in_w21p1: Complex64,
    pub chi_in_w21m2: Complex64,
}

impl SusceptibilitySet {
    pub fn interference(&self, which: InterferenceComponent) -> Complex64 {
        match which {
            InterferenceComponent::Omega1 => self.chi_in_w1,
            InterferenceComponent::Omega2 => self.chi_in_w2,
            InterferenceComponent::SumOmega1 => self.chi_in_w21p1,
            InterferenceComponent::DifferenceOmega2 => self.chi_in_w21m2,
        }
    }

    /// Copy with every interference component zeroed.
    pub fn without_interference(&self) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        SusceptibilitySet {
            chi_in_w1: zero,
            chi_in_w2: zero,
            chi_in_w21p1: zero,
            chi_in_w21m2: zero,
            ..*self
        }
    }

    /// Induced z dipole (C m) at position x and time t, assembled as
    /// Σ χ(ω)E(ω) + cc over the six components. `omega21` is (E₂ − E₁)/ħ.
    pub fn induced_dipole(&self, field: &StandingWaveConfig, omega21: f64, x: f64, t: f64) -> f64 {
        let f1 = 2.0 * field.e1 * (field.k1() * x).cos();
        let f2 = 2.0 * field.e2 * (field.k2() * x + field.theta_f).cos();
        let (w1, w2) = (field.omega1(), field.omega2());
        let phase = |w: f64| Complex64::from_polar(1.0, w * t);
        let sum = (self.chi_in_w1 + self.chi_ni_w1) * f1 * phase(w1)
            + (self.chi_in_w2 + self.chi_ni_w2) * f2 * phase(w2)
            + self.chi_in_w21p1 * f1 * phase(omega21 + w1)
            + self.chi_in_w21m2 * f2 * phase(omega21 - w2);
        2.0 * sum.re
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptOptions {
    /// Near-resonance guard (cm⁻¹).
    pub guard_cm: f64,
}

impl Default for SusceptOptions {
    fn default() -> Self {
        SusceptOptions {
            guard_cm: DEFAULT_GUARD_CM,
        }
    }
}

struct Guard<'a> {
    model: &'a MoleculeModel,
    epsilon: f64,
    guard_cm: f64,
}

impl<'a> Guard<'a> {
    fn new(model: &'a MoleculeModel, opts: &SusceptOptions) -> Self {
        Guard {
            model,
            epsilon: wavenumber_to_angular(opts.guard_cm),
            guard_cm: opts.guard_cm,
        }
    }

    /// 1/denominator, refusing denominators inside the guard band.
    fn inv(&self, level: usize, denominator: f64) -> Result<f64> {
        if denominator.abs() <= self.epsilon {
            return Err(Error::NearResonance {
                level: self.model.state(level).id.clone(),
                detuning_cm: angular_to_wavenumber(denominator),
                guard_cm: self.guard_cm,
            });
        }
        Ok(1.0 / denominator)
    }
}

/// ω_ji = (E_j − E_i)/ħ.
fn transition_frequency(model: &MoleculeModel, j: usize, i: usize) -> f64 {
    (model.state(j).energy - model.state(i).energy) / HBAR
}

/// (E₁ − E₂)/ħ + (ω₁ − ω₂); zero when E₁ + ħω₁ = E₂ + ħω₂ holds.
pub fn resonance_detuning(
    model: &MoleculeModel,
    field: &StandingWaveConfig,
    sup: &SuperpositionSpec,
) -> f64 {
    let e1 = model.state(sup.state1).energy;
    let e2 = model.state(sup.state2).energy;
    (e1 - e2) / HBAR + (field.omega1() - field.omega2())
}

/// Polarizability of a single level `state` at angular frequency `omega`:
/// (1/ħ) Σ_j (μᶻ_j,state)² [1/(ω_j,state + ω) + 1/(ω_j,state − ω)].
pub fn state_polarizability(
    model: &MoleculeModel,
    state: usize,
    omega: f64,
    opts: &SusceptOptions,
) -> Result<f64> {
    let guard = Guard::new(model, opts);
    let mut total = 0.0;
    for &(j, mu) in model.dipoles().coupled(state) {
        let w_ji = transition_frequency(model, j, state);
        total += mu * mu * (guard.inv(j, w_ji + omega)? + guard.inv(j, w_ji - omega)?);
    }
    Ok(total / HBAR)
}

/// Non-interference susceptibility at angular frequency `omega`:
/// Σ_i |c_i|² α_i(ω) with α_i the level polarizability.
pub fn chi_ni(
    model: &MoleculeModel,
    sup: &SuperpositionSpec,
    omega: f64,
    opts: &SusceptOptions,
) -> Result<f64> {
    let mut total = 0.0;
    for (i, c) in sup.members() {
        let weight = c.norm_sqr();
        if weight == 0.0 {
            continue;
        }
        total += weight * state_polarizability(model, i, omega, opts)?;
    }
    Ok(total)
}

/// One interference component, evaluated exactly in the printed form
/// (including the field-amplitude ratio for χⁱⁿ(ω₁) and χⁱⁿ(ω₂)).
pub fn chi_in(
    model: &MoleculeModel,
    sup: &SuperpositionSpec,
    field: &StandingWaveConfig,
    which: InterferenceComponent,
    opts: &SusceptOptions,
) -> Result<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let coherence = sup.coherence();
    if coherence == zero {
        return Ok(zero);
    }
    let (s1, s2) = (sup.state1, sup.state2);
    if model.state(s1).parity != model.state(s2).parity {
        return Ok(zero);
    }
    let ratio = match which {
        InterferenceComponent::Omega1 => {
            if field.e1 == 0.0 {
                return Err(Error::ZeroAmplitude("E1"));
            }
            field.e2 / field.e1
        }
        InterferenceComponent::Omega2 => {
            if field.e2 == 0.0 {
                return Err(Error::ZeroAmplitude("E2"));
            }
            field.e1 / field.e2
        }
        _ => 1.0,
    };

    let guard = Guard::new(model, opts);
    let (w1, w2) = (field.omega1(), field.omega2());
    let dipoles = model.dipoles();
    // Σ over levels j coupled to both members: a = Σ μ_j1μ_2j·g(ω_j1), b = Σ μ_j2μ_1j·h(ω_j2).
    let mut first = 0.0;
    let mut second = 0.0;
    for &(j, mu_j1) in dipoles.coupled(s1) {
        let mu_j2 = dipoles.get(j, s2);
        if mu_j2 == 0.0 {
            continue;
        }
        let product = mu_j1 * mu_j2;
        let w_j1 = transition_frequency(model, j, s1);
        let w_j2 = transition_frequency(model, j, s2);
        let (g, h) = match which {
            InterferenceComponent::Omega1 => (guard.inv(j, w_j1 + w2)?, guard.inv(j, w_j2 - w2)?),
            InterferenceComponent::Omega2 => (guard.inv(j, w_j1 - w1)?, guard.inv(j, w_j2 + w1)?),
            InterferenceComponent::SumOmega1 => {
                (guard.inv(j, w_j1 + w1)?, guard.inv(j, w_j2 - w1)?)
            }
            InterferenceComponent::DifferenceOmega2 => {
                (guard.inv(j, w_j1 - w2)?, guard.inv(j, w_j2 + w2)?)
            }
        };
        first += product * g;
        second += product * h;
    }
    let value = match which {
        // c₁c₂*[a + b]·E₂/E₁
        InterferenceComponent::Omega1 => coherence * (first + second) * ratio,
        // c₂c₁*[b + a]·E₁/E₂
        InterferenceComponent::Omega2 => coherence.conj() * (first + second) * ratio,
        // c₁c₂*·a + c₁*c₂·b
        InterferenceComponent::SumOmega1 | InterferenceComponent::DifferenceOmega2 => {
            coherence * first + coherence.conj() * second
        }
    };
    Ok(value / HBAR)
}

/// All six components for one superposition and field configuration.
pub fn susceptibility_set(
    model: &MoleculeModel,
    sup: &SuperpositionSpec,
    field: &StandingWaveConfig,
    opts: &SusceptOptions,
) -> Result<SusceptibilitySet> {
    Ok(SusceptibilitySet {
        chi_ni_w1: chi_ni(model, sup, field.omega1(), opts)?,
        chi_ni_w2: chi_ni(model, sup, field.omega2(), opts)?,
        chi_in_w1: chi_in(model, sup, field, InterferenceComponent::Omega1, opts)?,
        chi_in_w2: chi_in(model, sup, field, InterferenceComponent::Omega2, opts)?,
        chi_in_w21p1: chi_in(model, sup, field, InterferenceComponent::SumOmega1, opts)?,
        chi_in_w21m2: chi_in(model, sup, field, InterferenceComponent::DifferenceOmega2, opts)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::units::{convert_unit, Unit};

    fn fig2_field() -> StandingWaveConfig {
        StandingWaveConfig::new(1.0e4, 1.0e8, 0.628e-6, 0.736e-6, -2.65).unwrap()
    }

    fn lambda_sup(theta: f64) -> SuperpositionSpec {
        let m = datasets::lambda_four_level();
        SuperpositionSpec::with_phase(
            m,
            m.state_index("g0").unwrap(),
            m.state_index("g2").unwrap(),
            0.3,
            theta,
        )
        .unwrap()
    }

    #[test]
    fn field_difference_equivalent() {
        let f = fig2_field();
        let dw = f.omega1() - f.omega2();
        // 1/0.628 um - 1/0.736 um = 2336.61 cm-1; × 2πc·100
        assert!((angular_to_wavenumber(dw) - 2336.61).abs() < 0.01);
        assert!((dw - 4.401e14).abs() / 4.401e14 < 1e-3);
    }

    #[test]
    fn degenerate_detuning_cancels() {
        let model = datasets::lambda_four_level();
        let field = StandingWaveConfig::new(1.0, 1.0, 0.7e-6, 0.7e-6, 0.0).unwrap();
        // Use a model whose two states are degenerate.
        let degenerate = crate::moldata::MoleculeBuilder::new("deg", model.mass(), 2.0, "X")
            .state("a", "X", 0, 0, 0, 0.0)
            .state("b", "X", 1, 0, 0, 0.0)
            .build()
            .unwrap();
        let sup = SuperpositionSpec::pure(&degenerate, 0, 1).unwrap();
        assert_eq!(resonance_detuning(&degenerate, &field, &sup), 0.0);
    }

    #[test]
    fn fig2_pair_is_off_resonance() {
        let model = datasets::n2_synthetic();
        let sup = SuperpositionSpec::new(
            model,
            model.ground_state(0, 0, 0).unwrap(),
            model.ground_state(0, 2, 0).unwrap(),
            Complex64::new(0.2f64.sqrt(), 0.0),
            Complex64::new(0.8f64.sqrt(), 0.0),
        )
        .unwrap();
        let residual = angular_to_wavenumber(resonance_detuning(model, &fig2_field(), &sup));
        // 2336.61 - 6 × 1.9896
        assert!((residual - 2324.67).abs() < 0.05, "{residual}");
    }

    #[test]
    fn single_level_reduction() {
        // Second ground level is uncoupled and carries no weight.
        let model = crate::moldata::MoleculeBuilder::new("reduction", 4.65e-26, 2.0, "X")
            .state("g", "X", 0, 0, 0, 0.0)
            .state("h", "X", 0, 2, 0, 12.0)
            .state("a", "A", 0, 1, 0, 60000.0)
            .dipole("g", "a", 1.0)
            .build()
            .unwrap();
        let sup = SuperpositionSpec::pure(&model, 0, 1).unwrap();
        let w_j1 = wavenumber_to_angular(60000.0);
        let omega = 0.8 * w_j1;
        let mu = convert_unit(1.0, Unit::Debye, Unit::CoulombMeter).unwrap();
        let expected = 2.0 * mu * mu / HBAR * w_j1 / (w_j1 * w_j1 - omega * omega);
        let got = chi_ni(&model, &sup, omega, &SusceptOptions::default()).unwrap();
        assert!((got - expected).abs() / expected < 1e-13);
        assert_eq!(state_polarizability(&model, 0, omega, &SusceptOptions::default()).unwrap(), got);
    }

    #[test]
    fn equal_weights_with_identical_rows_match_pure_state() {
        let model = crate::moldata::MoleculeBuilder::new("twins", 4.65e-26, 2.0, "X")
            .state("g", "X", 0, 0, 0, 0.0)
            .state("h", "X", 1, 0, 0, 0.0)
            .state("a", "A", 0, 1, 0, 60000.0)
            .dipole("g", "a", 0.8)
            .dipole("h", "a", 0.8)
            .build()
            .unwrap();
        let omega = wavenumber_to_angular(15000.0);
        let opts = SusceptOptions::default();
        let pure = chi_ni(&model, &SuperpositionSpec::pure(&model, 0, 1).unwrap(), omega, &opts)
            .unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mixed = SuperpositionSpec::new(
            &model,
            0,
            1,
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
        )
        .unwrap();
        let got = chi_ni(&model, &mixed, omega, &opts).unwrap();
        assert!((got - pure).abs() / pure < 1e-14);
    }

    #[test]
    fn near_resonance_is_rejected() {
        let model = datasets::three_level();
        let builder_model = crate::moldata::MoleculeBuilder::new("r", model.mass(), 2.0, "X")
            .state("g", "X", 0, 0, 0, 0.0)
            .state("h", "X", 0, 2, 0, 12.0)
            .state("a", "A", 0, 1, 0, 60000.0)
            .dipole("g", "a", 1.0)
            .build()
            .unwrap();
        let sup = SuperpositionSpec::pure(&builder_model, 0, 1).unwrap();
        let omega = wavenumber_to_angular(60000.0 - 0.5);
        match chi_ni(&builder_model, &sup, omega, &SusceptOptions::default()) {
            Err(Error::NearResonance {
                level, detuning_cm, ..
            }) => {
                assert_eq!(level, "a");
                assert!((detuning_cm.abs() - 0.5).abs() < 1e-6);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn no_coherence_means_no_interference() {
        let model = datasets::lambda_four_level();
        let sup = SuperpositionSpec::pure(model, 0, 1).unwrap();
        let field = fig2_field();
        for which in InterferenceComponent::ALL {
            let v = chi_in(model, &sup, &field, which, &SusceptOptions::default()).unwrap();
            assert_eq!(v, Complex64::new(0.0, 0.0));
        }
        let set = susceptibility_set(model, &sup, &field, &SusceptOptions::default()).unwrap();
        assert!(set.chi_ni_w1 > 0.0 && set.chi_ni_w2 > 0.0);
    }

    #[test]
    fn real_coefficients_give_real_components() {
        let model = datasets::lambda_four_level();
        let set =
            susceptibility_set(model, &lambda_sup(0.0), &fig2_field(), &Default::default())
                .unwrap();
        for which in InterferenceComponent::ALL {
            let v = set.interference(which);
            assert_eq!(v.im, 0.0, "{which:?}");
            assert_ne!(v.re, 0.0, "{which:?}");
        }
    }

    #[test]
    fn quarter_phase_kills_real_part() {
        let model = datasets::lambda_four_level();
        let sup = SuperpositionSpec::new(
            model,
            0,
            1,
            Complex64::new(0.3f64.sqrt(), 0.0),
            Complex64::new(0.0, -(0.7f64.sqrt())),
        )
        .unwrap();
        assert!((sup.theta() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let v = chi_in(model, &sup, &fig2_field(), InterferenceComponent::Omega1, &Default::default())
            .unwrap();
        assert_eq!(v.re, 0.0);
        assert_ne!(v.im, 0.0);
    }

    #[test]
    fn zero_divisor_amplitude_is_an_error() {
        let model = datasets::lambda_four_level();
        let field = StandingWaveConfig::new(0.0, 1.0e8, 0.628e-6, 0.736e-6, 0.0).unwrap();
        let r = chi_in(model, &lambda_sup(0.3), &field, InterferenceComponent::Omega1, &Default::default());
        assert!(matches!(r, Err(Error::ZeroAmplitude("E1"))));
        let v = chi_in(model, &lambda_sup(0.3), &field, InterferenceComponent::Omega2, &Default::default())
            .unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn opposite_parity_pair_gives_exact_zero() {
        let model = datasets::n2_synthetic();
        let g0 = model.ground_state(0, 0, 0).unwrap();
        let g1 = model.ground_state(0, 1, 0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let sup =
            SuperpositionSpec::new(model, g0, g1, Complex64::new(h, 0.0), Complex64::new(0.0, h))
                .unwrap();
        for which in InterferenceComponent::ALL {
            let v = chi_in(model, &sup, &fig2_field(), which, &Default::default()).unwrap();
            assert_eq!(v, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn swapping_members_keeps_non_interference() {
        let model = datasets::lambda_four_level();
        let sup = lambda_sup(0.4);
        let field = fig2_field();
        let a = susceptibility_set(model, &sup, &field, &Default::default()).unwrap();
        let b = susceptibility_set(model, &sup.swapped(), &field, &Default::default()).unwrap();
        assert!((a.chi_ni_w1 - b.chi_ni_w1).abs() <= 1e-15 * a.chi_ni_w1.abs());
        assert!((a.chi_ni_w2 - b.chi_ni_w2).abs() <= 1e-15 * a.chi_ni_w2.abs());
    }

    #[test]
    fn chi_in_w1_linear_in_amplitude_ratio() {
        let model = datasets::n2_synthetic();
        let sup = SuperpositionSpec::new(
            model,
            model.ground_state(0, 0, 0).unwrap(),
            model.ground_state(0, 2, 0).unwrap(),
            Complex64::new(0.2f64.sqrt(), 0.0),
            Complex64::new(0.8f64.sqrt(), 0.0),
        )
        .unwrap();
        let at = |ratio: f64| {
            let f = StandingWaveConfig::new(1.0e4, 1.0e4 * ratio, 0.628e-6, 0.736e-6, -2.65)
                .unwrap();
            chi_in(model, &sup, &f, InterferenceComponent::Omega1, &Default::default()).unwrap()
        };
        let (one, big) = (at(1.0), at(1.0e4));
        assert!(one.re != 0.0);
        assert!((big / one - 1.0e4).norm() < 1e-8);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn coherence_phase_scaling(alpha in -3.0f64..3.0, theta in -3.0f64..3.0) {
                let model = datasets::lambda_four_level();
                let field = fig2_field();
                let opts = SusceptOptions::default();
                let base = lambda_sup(theta);
                // c₁c₂* → e^{iα}c₁c₂* via c₂ → c₂e^{-iα}
                let rotated = SuperpositionSpec { c2: base.c2 * Complex64::from_polar(1.0, -alpha), ..base };
                let a = susceptibility_set(model, &base, &field, &opts).unwrap();
                let b = susceptibility_set(model, &rotated, &field, &opts).unwrap();
                let phase = Complex64::from_polar(1.0, alpha);
                let tol = 1e-12;
                prop_assert!((b.chi_in_w1 - a.chi_in_w1 * phase).norm() <= tol * a.chi_in_w1.norm());
                prop_assert!((b.chi_in_w2 - a.chi_in_w2 * phase.conj()).norm() <= tol * a.chi_in_w2.norm());
                // |c₂e^{-iα}|² differs from |c₂|² only by rounding.
                prop_assert!((a.chi_ni_w1 - b.chi_ni_w1).abs() <= 1e-14 * a.chi_ni_w1.abs());
                prop_assert!((a.chi_ni_w2 - b.chi_ni_w2).abs() <= 1e-14 * a.chi_ni_w2.abs());
            }

            #[test]
            fn non_interference_ignores_amplitudes(e1 in 1.0f64..1e6, e2 in 1.0f64..1e9) {
                let model = datasets::lambda_four_level();
                let opts = SusceptOptions::default();
                let f = StandingWaveConfig::new(e1, e2, 0.628e-6, 0.736e-6, 0.1).unwrap();
                let g = fig2_field();
                let a = susceptibility_set(model, &lambda_sup(0.2), &f, &opts).unwrap();
                let b = susceptibility_set(model, &lambda_sup(0.2), &g, &opts).unwrap();
                // |c₂e^{-iα}|² differs from |c₂|² only by rounding.
                prop_assert!((a.chi_ni_w1 - b.chi_ni_w1).abs() <= 1e-14 * a.chi_ni_w1.abs());
                prop_assert!((a.chi_ni_w2 - b.chi_ni_w2).abs() <= 1e-14 * a.chi_ni_w2.abs());
            }

            #[test]
            fn opposite_parity_interference_vanishes(p in 0.01f64..0.99, theta in -3.0f64..3.0) {
                let model = datasets::n2_synthetic();
                let g0 = model.ground_state(0, 2, 0).unwrap();
                let g1 = model.ground_state(0, 3, 0).unwrap();
                let sup = SuperpositionSpec::with_phase(model, g0, g1, p, theta).unwrap();
                let set = susceptibility_set(model, &sup, &fig2_field(), &SusceptOptions::default()).unwrap();
                for which in InterferenceComponent::ALL {
                    prop_assert_eq!(set.interference(which), Complex64::new(0.0, 0.0));
                }
            }
        }
    }
}
