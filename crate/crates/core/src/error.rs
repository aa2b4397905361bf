use thiserror::Error;

use crate::units::Unit;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown unit tag `{0}`")]
    UnknownUnit(String),

    #[error("cannot convert {from} to {to}: incompatible dimensions")]
    IncompatibleUnits { from: Unit, to: Unit },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{record}: field `{field}`: {message}")]
    Field {
        record: String,
        field: &'static str,
        message: String,
    },

    #[error("dipole {record} links `{a}` and `{b}`: {rule}")]
    SelectionRule {
        record: String,
        a: String,
        b: String,
        rule: &'static str,
    },

    #[error("no state `{0}` in molecule model")]
    UnknownState(String),

    #[error("invalid superposition: {0}")]
    InvalidSuperposition(String),

    #[error(
        "near-resonant denominator for level `{level}`: detuning {detuning_cm:.4} cm-1 is inside the {guard_cm} cm-1 guard"
    )]
    NearResonance {
        level: String,
        detuning_cm: f64,
        guard_cm: f64,
    },

    #[error("field amplitude {0} is zero, amplitude ratio undefined")]
    ZeroAmplitude(&'static str),

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("position {x:e} m is not a potential minimum (curvature {curvature:e} J/m^2)")]
    NotAMinimum { x: f64, curvature: f64 },

    #[error("non-finite state at step {step} (x = {x}, vx = {vx})")]
    NonFinite { step: usize, x: f64, vx: f64 },

    #[error("preparation pair (J={j1}, M={m1}) -> (J={j2}, M={m2}) violates ΔJ = 2, ΔM = 0")]
    PreparationRule { j1: i32, m1: i32, j2: i32, m2: i32 },

    #[error("signal window spans {span:e} m, at least {required:e} m is required")]
    WindowTooShort { span: f64, required: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
