//! Physical constants and unit conversion.
//!
//! Everything inside the crate is SI. Spectroscopic units are accepted at the
//! edges (data files, configs) and converted through [`convert_unit`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Unified atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// One debye in C m (1e-21 / c).
pub const DEBYE: f64 = 1.0e-21 / SPEED_OF_LIGHT;

/// Physical dimension of a unit tag. Energy and angular frequency share one
/// dimension since they are related by ħ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    DipoleMoment,
    ElectricField,
    Length,
    Mass,
}

/// Supported unit tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "cm-1")]
    Wavenumber,
    #[serde(rename = "rad/s")]
    AngularFrequency,
    #[serde(rename = "J")]
    Joule,
    #[serde(rename = "eV")]
    ElectronVolt,
    #[serde(rename = "D")]
    Debye,
    #[serde(rename = "C*m")]
    CoulombMeter,
    #[serde(rename = "V/cm")]
    VoltPerCentimeter,
    #[serde(rename = "V/m")]
    VoltPerMeter,
    #[serde(rename = "um")]
    Micrometer,
    #[serde(rename = "nm")]
    Nanometer,
    #[serde(rename = "m")]
    Meter,
    #[serde(rename = "u")]
    AtomicMassUnit,
    #[serde(rename = "kg")]
    Kilogram,
}

impl Unit {
    pub const ALL: [Unit; 13] = [
        Unit::Wavenumber,
        Unit::AngularFrequency,
        Unit::Joule,
        Unit::ElectronVolt,
        Unit::Debye,
        Unit::CoulombMeter,
        Unit::VoltPerCentimeter,
        Unit::VoltPerMeter,
        Unit::Micrometer,
        Unit::Nanometer,
        Unit::Meter,
        Unit::AtomicMassUnit,
        Unit::Kilogram,
    ];

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Wavenumber | Unit::AngularFrequency | Unit::Joule | Unit::ElectronVolt => {
                Dimension::Energy
            }
            Unit::Debye | Unit::CoulombMeter => Dimension::DipoleMoment,
            Unit::VoltPerCentimeter | Unit::VoltPerMeter => Dimension::ElectricField,
            Unit::Micrometer | Unit::Nanometer | Unit::Meter => Dimension::Length,
            Unit::AtomicMassUnit | Unit::Kilogram => Dimension::Mass,
        }
    }

    /// Factor taking a value in this unit to the SI base of its dimension.
    /// The energy dimension is based on joules.
    fn to_base(self) -> f64 {
        match self {
            Unit::Wavenumber => PLANCK * SPEED_OF_LIGHT * 100.0,
            Unit::AngularFrequency => HBAR,
            Unit::Joule => 1.0,
            Unit::ElectronVolt => ELEMENTARY_CHARGE,
            Unit::Debye => DEBYE,
            Unit::CoulombMeter => 1.0,
            Unit::VoltPerCentimeter => 100.0,
            Unit::VoltPerMeter => 1.0,
            Unit::Micrometer => 1.0e-6,
            Unit::Nanometer => 1.0e-9,
            Unit::Meter => 1.0,
            Unit::AtomicMassUnit => ATOMIC_MASS_UNIT,
            Unit::Kilogram => 1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Wavenumber => "cm-1",
            Unit::AngularFrequency => "rad/s",
            Unit::Joule => "J",
            Unit::ElectronVolt => "eV",
            Unit::Debye => "D",
            Unit::CoulombMeter => "C*m",
            Unit::VoltPerCentimeter => "V/cm",
            Unit::VoltPerMeter => "V/m",
            Unit::Micrometer => "um",
            Unit::Nanometer => "nm",
            Unit::Meter => "m",
            Unit::AtomicMassUnit => "u",
            Unit::Kilogram => "kg",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unit = match s.trim() {
            "cm-1" | "cm^-1" | "cm⁻¹" | "1/cm" => Unit::Wavenumber,
            "rad/s" => Unit::AngularFrequency,
            "J" => Unit::Joule,
            "eV" => Unit::ElectronVolt,
            "D" | "debye" => Unit::Debye,
            "C*m" | "C·m" | "C m" => Unit::CoulombMeter,
            "V/cm" => Unit::VoltPerCentimeter,
            "V/m" => Unit::VoltPerMeter,
            "um" | "μm" | "µm" => Unit::Micrometer,
            "nm" => Unit::Nanometer,
            "m" => Unit::Meter,
            "u" | "amu" | "Da" => Unit::AtomicMassUnit,
            "kg" => Unit::Kilogram,
            other => return Err(Error::UnknownUnit(other.to_string())),
        };
        Ok(unit)
    }
}

/// Convert `value` between two unit tags of the same dimension.
pub fn convert_unit(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::IncompatibleUnits { from, to });
    }
    if from == to {
        return Ok(value);
    }
    Ok(value * from.to_base() / to.to_base())
}

/// Wavenumber (cm⁻¹) to angular frequency (rad/s).
pub fn wavenumber_to_angular(wavenumber: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * 100.0 * wavenumber
}

/// Angular frequency (rad/s) to wavenumber (cm⁻¹).
pub fn angular_to_wavenumber(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_to_rad_per_second() {
        // 2πc·100 evaluated by hand: 2 · 3.14159265358979 · 299792458 · 100
        let expected = 1.883_651_567_308_853e11;
        let got = convert_unit(1.0, Unit::Wavenumber, Unit::AngularFrequency).unwrap();
        assert!((got - expected).abs() / expected < 1e-12, "{got}");
        assert!((wavenumber_to_angular(1.0) - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn field_prefix() {
        let got = convert_unit(100.0, Unit::VoltPerCentimeter, Unit::VoltPerMeter).unwrap();
        assert_eq!(got, 1.0e4);
    }

    #[test]
    fn zero_maps_to_zero() {
        for a in Unit::ALL {
            for b in Unit::ALL {
                if a.dimension() == b.dimension() {
                    assert_eq!(convert_unit(0.0, a, b).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn n2_mass() {
        let kg = convert_unit(28.0134, Unit::AtomicMassUnit, Unit::Kilogram).unwrap();
        // 28.0134 × 1.66053906660e-27 by hand
        assert!((kg - 4.651_734_508_829e-26).abs() < 1e-36);
    }

    #[test]
    fn incompatible_dimensions_rejected() {
        assert!(matches!(
            convert_unit(1.0, Unit::Debye, Unit::Meter),
            Err(Error::IncompatibleUnits { .. })
        ));
    }

    #[test]
    fn parse_tags() {
        assert_eq!("cm⁻¹".parse::<Unit>().unwrap(), Unit::Wavenumber);
        assert_eq!("μm".parse::<Unit>().unwrap(), Unit::Micrometer);
        assert_eq!("debye".parse::<Unit>().unwrap(), Unit::Debye);
        assert!("furlong".parse::<Unit>().is_err());
        for u in Unit::ALL {
            assert_eq!(u.symbol().parse::<Unit>().unwrap(), u);
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn unit() -> impl Strategy<Value = Unit> {
            proptest::sample::select(Unit::ALL.to_vec())
        }

        proptest! {
            #[test]
            fn round_trip_is_identity(value in -1e30f64..1e30, a in unit(), b in unit()) {
                prop_assume!(a.dimension() == b.dimension());
                let there = convert_unit(value, a, b).unwrap();
                let back = convert_unit(there, b, a).unwrap();
                let scale = value.abs().max(f64::MIN_POSITIVE);
                prop_assert!((back - value).abs() <= 1e-12 * scale);
            }
        }
    }
}
