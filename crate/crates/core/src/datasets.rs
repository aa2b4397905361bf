//! Molecular data files shipped with the crate.

use std::sync::OnceLock;

use crate::moldata::{load_molecule, MoleculeModel};

/// Synthetic N₂-like model: ground X manifold (ν = 0, 1) and six excited
/// singlet-u manifolds, calibrated for the default two-color configuration.
pub const N2_SYNTHETIC: &str = include_str!("../data/n2_synthetic.toml");

/// One ground level and two excited levels.
pub const THREE_LEVEL: &str = include_str!("../data/three_level.toml");

/// Two same-parity ground levels (J = 0, 2) sharing two excited J = 1 levels.
pub const LAMBDA_FOUR_LEVEL: &str = include_str!("../data/lambda_four_level.toml");

pub fn n2_synthetic() -> &'static MoleculeModel {
    static MODEL: OnceLock<MoleculeModel> = OnceLock::new();
    MODEL.get_or_init(|| load_molecule(N2_SYNTHETIC).expect("bundled N2 dataset is valid"))
}

pub fn three_level() -> &'static MoleculeModel {
    static MODEL: OnceLock<MoleculeModel> = OnceLock::new();
    MODEL.get_or_init(|| load_molecule(THREE_LEVEL).expect("bundled three-level dataset is valid"))
}

pub fn lambda_four_level() -> &'static MoleculeModel {
    static MODEL: OnceLock<MoleculeModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        load_molecule(LAMBDA_FOUR_LEVEL).expect("bundled four-level dataset is valid")
    })
}
