//! Two-color standing-wave optical potential, its forces, extrema and well
//! periods.
//!
//! With amplitudes E₁, E₂ and the susceptibilities of a superposition, the
//! time-averaged potential is
//!
//! ```text
//! V_ni(x) = −8[E₁²χⁿⁱ(ω₁)cos²(k₁x) + E₂²χⁿⁱ(ω₂)cos²(k₂x + θ_F)]
//! V_in(x) = −8[E₁²Re χⁱⁿ(ω₁) + E₂²Re χⁱⁿ(ω₂)] cos(k₁x)cos(k₂x + θ_F)
//! ```
//!
//! The full time-dependent form keeps the terms oscillating at ω₁ − ω₂.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::suscept::SusceptibilitySet;
use crate::units::SPEED_OF_LIGHT;

use std::f64::consts::PI;

/// Two standing waves polarized along z: 2E₁cos(k₁x) and 2E₂cos(k₂x + θ_F).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandingWaveConfig {
    /// Maximum amplitude of wave 1 (V/m).
    pub e1: f64,
    /// Maximum amplitude of wave 2 (V/m).
    pub e2: f64,
    /// Wavelength of wave 1 (m).
    pub lambda1: f64,
    /// Wavelength of wave 2 (m).
    pub lambda2: f64,
    /// Relative phase of the two standing waves (rad).
    pub theta_f: f64,
}

impl StandingWaveConfig {
    pub fn new(e1: f64, e2: f64, lambda1: f64, lambda2: f64, theta_f: f64) -> Result<Self> {
        let cfg = StandingWaveConfig {
            e1,
            e2,
            lambda1,
            lambda2,
            theta_f,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e1 >= 0.0 && self.e1.is_finite()) {
            return Err(Error::invalid("e1", "amplitude must be finite and >= 0"));
        }
        if !(self.e2 >= 0.0 && self.e2.is_finite()) {
            return Err(Error::invalid("e2", "amplitude must be finite and >= 0"));
        }
        if !(self.lambda1 > 0.0 && self.lambda1.is_finite()) {
            return Err(Error::invalid("lambda1", "wavelength must be positive"));
        }
        if !(self.lambda2 > 0.0 && self.lambda2.is_finite()) {
            return Err(Error::invalid("lambda2", "wavelength must be positive"));
        }
        if !self.theta_f.is_finite() {
            return Err(Error::invalid("theta_f", "phase must be finite"));
        }
        Ok(())
    }

    pub fn k1(&self) -> f64 {
        2.0 * PI / self.lambda1
    }

    pub fn k2(&self) -> f64 {
        2.0 * PI / self.lambda2
    }

    pub fn omega1(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.lambda1
    }

    pub fn omega2(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.lambda2
    }

    /// Spatial period 2π/|k₁ − k₂| of the two-color interference envelope.
    pub fn beat_length(&self) -> f64 {
        2.0 * PI / (self.k1() - self.k2()).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialMode {
    #[default]
    Averaged,
    FullTimeDependent,
}

/// Which parts of the potential act on the molecules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialTerms {
    /// V = Vⁿⁱ + Vⁱⁿ
    #[default]
    Full,
    /// V = Vⁿⁱ (no molecular coherence)
    NonInterference,
    /// V = Vⁱⁿ
    InterferenceOnly,
}

impl PotentialTerms {
    fn weights(self) -> (f64, f64) {
        match self {
            PotentialTerms::Full => (1.0, 1.0),
            PotentialTerms::NonInterference => (1.0, 0.0),
            PotentialTerms::InterferenceOnly => (0.0, 1.0),
        }
    }
}

/// Non-interference and interference parts of the potential (J).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialValue {
    pub v_ni: f64,
    pub v_in: f64,
}

impl PotentialValue {
    pub fn total(&self) -> f64 {
        self.v_ni + self.v_in
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremumRecord {
    /// Position (m).
    pub x: f64,
    /// Potential (J).
    pub value: f64,
    pub kind: ExtremumKind,
    /// Second derivative (J/m²).
    pub curvature: f64,
}

/// Susceptibilities and field bundled into an evaluable potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpticalPotentialSpec {
    pub chi: SusceptibilitySet,
    pub field: StandingWaveConfig,
    pub mode: PotentialMode,
    pub terms: PotentialTerms,
    // −8E₁²χⁿⁱ(ω₁), −8E₂²χⁿⁱ(ω₂), −8[E₁²Re χⁱⁿ(ω₁) + E₂²Re χⁱⁿ(ω₂)]
    a1: f64,
    a2: f64,
    b: f64,
}

impl OpticalPotentialSpec {
    pub fn new(chi: SusceptibilitySet, field: StandingWaveConfig, mode: PotentialMode) -> Self {
        let (e1, e2) = (field.e1, field.e2);
        OpticalPotentialSpec {
            chi,
            field,
            mode,
            terms: PotentialTerms::Full,
            a1: -2.0 * (4.0 * e1 * e1 * chi.chi_ni_w1),
            a2: -2.0 * (4.0 * e2 * e2 * chi.chi_ni_w2),
            b: -2.0 * (4.0 * e1 * e1 * chi.chi_in_w1.re + 4.0 * e2 * e2 * chi.chi_in_w2.re),
        }
    }

    pub fn averaged(chi: SusceptibilitySet, field: StandingWaveConfig) -> Self {
        Self::new(chi, field, PotentialMode::Averaged)
    }

    pub fn with_terms(mut self, terms: PotentialTerms) -> Self {
        self.terms = terms;
        self
    }

    pub fn with_mode(mut self, mode: PotentialMode) -> Self {
        self.mode = mode;
        self
    }

    fn require(&self, mode: PotentialMode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::invalid(
                "mode",
                format!("operation needs {mode:?} mode, spec is {:?}", self.mode),
            ));
        }
        Ok(())
    }

    /// True when every coefficient of the averaged potential vanishes.
    pub fn is_flat(&self) -> bool {
        let (wn, wi) = self.terms.weights();
        wn * self.a1 == 0.0 && wn * self.a2 == 0.0 && wi * self.b == 0.0
    }

    /// Time-averaged Vⁿⁱ and Vⁱⁿ at x, irrespective of the term selection.
    pub fn potential_averaged(&self, x: f64) -> Result<PotentialValue> {
        self.require(PotentialMode::Averaged)?;
        Ok(self.averaged_parts(x))
    }

    fn averaged_parts(&self, x: f64) -> PotentialValue {
        let c1 = (self.field.k1() * x).cos();
        let c2 = (self.field.k2() * x + self.field.theta_f).cos();
        PotentialValue {
            v_ni: self.a1 * c1 * c1 + self.a2 * c2 * c2,
            v_in: self.b * c1 * c2,
        }
    }

    /// Averaged potential with the term selection applied (J).
    pub fn total(&self, x: f64) -> f64 {
        let (wn, wi) = self.terms.weights();
        let p = self.averaged_parts(x);
        wn * p.v_ni + wi * p.v_in
    }

    /// Every printed term, including those oscillating at ω₁ − ω₂.
    pub fn potential_time_dependent(&self, x: f64, t: f64) -> Result<PotentialValue> {
        self.require(PotentialMode::FullTimeDependent)?;
        let f = &self.field;
        let chi = &self.chi;
        let (e1, e2) = (f.e1, f.e2);
        let c1 = (f.k1() * x).cos();
        let c2 = (f.k2() * x + f.theta_f).cos();
        let dw = f.omega1() - f.omega2();
        let (s12, c12) = (dw * t).sin_cos();
        // (ω₂ − ω₁)t = −(ω₁ − ω₂)t
        let (s21, c21) = (-s12, c12);

        let minus_ni = 2.0
            * (4.0 * e1 * e1 * c1 * c1 * chi.chi_ni_w1
                + 4.0 * e2 * e2 * c2 * c2 * chi.chi_ni_w2
                + 4.0 * e1 * e2 * c1 * c2 * (chi.chi_ni_w1 + chi.chi_ni_w2) * c12);
        let minus_in = 2.0
            * (4.0 * e1 * e1 * c1 * c2 * chi.chi_in_w1.re
                + 4.0 * e2 * e2 * c1 * c2 * chi.chi_in_w2.re
                + 4.0 * e1 * e2 * c2 * c2 * (chi.chi_in_w1.re * c12 - chi.chi_in_w1.im * s12)
                + 4.0 * e1 * e2 * c1 * c1 * (chi.chi_in_w2.re * c21 - chi.chi_in_w2.im * s21));
        Ok(PotentialValue {
            v_ni: -minus_ni,
            v_in: -minus_in,
        })
    }

    /// dV/dx of the averaged potential with the term selection applied.
    fn gradient(&self, x: f64) -> f64 {
        let (wn, wi) = self.terms.weights();
        let (k1, k2) = (self.field.k1(), self.field.k2());
        let p1 = k1 * x;
        let p2 = k2 * x + self.field.theta_f;
        let (s1, c1) = p1.sin_cos();
        let (s2, c2) = p2.sin_cos();
        // d/dx[a cos²(kx+φ)] = −a k sin(2(kx+φ)) = −2a k sin cos
        let d_ni = -2.0 * (self.a1 * k1 * s1 * c1 + self.a2 * k2 * s2 * c2);
        let d_in = -self.b * (k1 * s1 * c2 + k2 * c1 * s2);
        wn * d_ni + wi * d_in
    }

    /// Force −dV/dx (N) on the averaged potential.
    pub fn force_at(&self, x: f64) -> Result<f64> {
        self.require(PotentialMode::Averaged)?;
        Ok(-self.gradient(x))
    }

    /// Force without the mode check, for the integrator inner loop.
    #[inline]
    pub(crate) fn force_unchecked(&self, x: f64) -> f64 {
        -self.gradient(x)
    }

    /// d²V/dx² of the averaged potential (J/m²).
    pub fn curvature_at(&self, x: f64) -> f64 {
        let (wn, wi) = self.terms.weights();
        let (k1, k2) = (self.field.k1(), self.field.k2());
        let p1 = k1 * x;
        let p2 = k2 * x + self.field.theta_f;
        let (s1, c1) = p1.sin_cos();
        let (s2, c2) = p2.sin_cos();
        // d²/dx²[a cos²(kx+φ)] = −2a k² cos(2(kx+φ))
        let dd_ni = -2.0
            * (self.a1 * k1 * k1 * (c1 * c1 - s1 * s1) + self.a2 * k2 * k2 * (c2 * c2 - s2 * s2));
        let dd_in = -self.b * ((k1 * k1 + k2 * k2) * c1 * c2 - 2.0 * k1 * k2 * s1 * s2);
        wn * dd_ni + wi * dd_in
    }

    /// Default scan density for [`find_extrema`]: 1000 points per λ₂.
    pub fn default_grid(&self, lo: f64, hi: f64) -> usize {
        ((hi - lo) / self.field.lambda2 * 1000.0).ceil() as usize + 1
    }
}

/// Locate every extremum of the averaged potential on [lo, hi].
///
/// The derivative is scanned on `grid` uniform points; each sign change is
/// refined by bisection to (hi − lo)·1e-9.
pub fn find_extrema(
    spec: &OpticalPotentialSpec,
    interval: (f64, f64),
    grid: usize,
) -> Result<Vec<ExtremumRecord>> {
    spec.require(PotentialMode::Averaged)?;
    let (lo, hi) = interval;
    if !(hi > lo) {
        return Err(Error::invalid("interval", "upper bound must exceed lower bound"));
    }
    let span = hi - lo;
    let shortest = spec.field.lambda1.min(spec.field.lambda2);
    let required = (10.0 * span / shortest).ceil() as usize;
    if grid < required.max(2) {
        return Err(Error::invalid(
            "grid",
            format!("{grid} points is below 10 per wavelength ({required} needed)"),
        ));
    }
    if spec.is_flat() {
        return Ok(Vec::new());
    }

    let tolerance = span * 1e-9;
    let step = span / (grid - 1) as f64;
    let at = |i: usize| if i + 1 == grid { hi } else { lo + step * i as f64 };

    let mut out = Vec::new();
    let mut prev_x = at(0);
    let mut prev_d = spec.gradient(prev_x);
    for i in 1..grid {
        let x = at(i);
        let d = spec.gradient(x);
        let root = if prev_d == 0.0 {
            None // handled when it was the right end of the previous bracket
        } else if d == 0.0 {
            Some(x)
        } else if (prev_d < 0.0) != (d < 0.0) {
            Some(bisect(|z| spec.gradient(z), prev_x, x, prev_d, tolerance))
        } else {
            None
        };
        if let Some(xr) = root {
            let curvature = spec.curvature_at(xr);
            // Derivative rising through zero marks a minimum.
            let kind = if prev_d < 0.0 {
                ExtremumKind::Minimum
            } else {
                ExtremumKind::Maximum
            };
            let consistent = match kind {
                ExtremumKind::Minimum => curvature > 0.0,
                ExtremumKind::Maximum => curvature < 0.0,
            };
            if consistent {
                out.push(ExtremumRecord {
                    x: xr,
                    value: spec.total(xr),
                    kind,
                    curvature,
                });
            }
        }
        prev_x = x;
        prev_d = d;
    }
    Ok(out)
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64, tolerance: f64) -> f64 {
    let mut fa_neg = fa < 0.0;
    while b - a > tolerance {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == fa_neg {
            a = mid;
            fa_neg = fm < 0.0;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Harmonic oscillation period 2π√(m/V″) of the well at `x_min`.
pub fn well_period(spec: &OpticalPotentialSpec, x_min: f64, mass: f64) -> Result<f64> {
    let curvature = spec.curvature_at(x_min);
    if !(curvature > 0.0) {
        return Err(Error::NotAMinimum {
            x: x_min,
            curvature,
        });
    }
    if !(mass > 0.0) {
        return Err(Error::invalid("mass", "must be positive"));
    }
    Ok(2.0 * PI * (mass / curvature).sqrt())
}

/// Sampled potential on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSamples {
    pub x: Vec<f64>,
    pub v_ni: Vec<f64>,
    pub v_in: Vec<f64>,
}

impl PotentialSamples {
    pub fn total(&self) -> Vec<f64> {
        self.v_ni.iter().zip(&self.v_in).map(|(a, b)| a + b).collect()
    }
}

/// Sample Vⁿⁱ and Vⁱⁿ on `n` uniform points of [lo, hi].
pub fn sample_potential(spec: &OpticalPotentialSpec, lo: f64, hi: f64, n: usize) -> PotentialSamples {
    let n = n.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut out = PotentialSamples {
        x: Vec::with_capacity(n),
        v_ni: Vec::with_capacity(n),
        v_in: Vec::with_capacity(n),
    };
    for i in 0..n {
        let x = lo + step * i as f64;
        let p = spec.averaged_parts(x);
        out.x.push(x);
        out.v_ni.push(p.v_ni);
        out.v_in.push(p.v_in);
    }
    out
}
