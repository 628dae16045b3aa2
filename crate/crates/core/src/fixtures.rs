//! Reference specs used by the tests, the benches and the command line.

use crate::model::{load_spec, AlgebroidSpec};

pub const FX_ACTION_SO2: &str = include_str!("../fixtures/fx_action_so2.json");
pub const FX_BLA: &str = include_str!("../fixtures/fx_bla.json");
pub const FX_BLA_CONST: &str = include_str!("../fixtures/fx_bla_const.json");
pub const FX_FOLIATION_FLAT: &str = include_str!("../fixtures/fx_foliation_flat.json");
pub const FX_FREE_JACOBI_R3: &str = include_str!("../fixtures/fx_free_jacobi_r3.json");
pub const FX_FREE_INVOLUTIVE: &str = include_str!("../fixtures/fx_free_involutive.json");
pub const FX_FREE_NONABELIAN_KILLING: &str = include_str!("../fixtures/fx_free_nonabelian_killing.json");
pub const FX_FREE_TRANSLATION: &str = include_str!("../fixtures/fx_free_translation.json");
pub const FX_GENERALIZED_SO2: &str = include_str!("../fixtures/fx_generalized_so2.json");
pub const FX_NONRIEM_FOL: &str = include_str!("../fixtures/fx_nonriem_fol.json");
pub const FX_OMEGA_XDY: &str = include_str!("../fixtures/fx_omega_xdy.json");
pub const FX_POISSON_2D: &str = include_str!("../fixtures/fx_poisson_2d.json");
pub const FX_RHO0_N1: &str = include_str!("../fixtures/fx_rho0_n1.json");
pub const FX_SO3_SPHERE: &str = include_str!("../fixtures/fx_so3_sphere.json");
pub const FX_SPHERE_ROT: &str = include_str!("../fixtures/fx_sphere_rot.json");
pub const FX_SPHERE_SCALED: &str = include_str!("../fixtures/fx_sphere_scaled.json");
pub const FX_SYMPLECTIC_CONFORMAL: &str = include_str!("../fixtures/fx_symplectic_conformal.json");
pub const FX_TM_FLAT: &str = include_str!("../fixtures/fx_tm_flat.json");

pub const PSI_TM_FLAT_SKEW: &str = include_str!("../fixtures/psi_tm_flat_skew.json");
pub const PSI_SO2_DX: &str = include_str!("../fixtures/psi_so2_dx.json");

/// Every bundled fixture as `(name, document)`.
pub const ALL: &[(&str, &str)] = &[
    ("fx_action_so2", FX_ACTION_SO2),
    ("fx_bla", FX_BLA),
    ("fx_bla_const", FX_BLA_CONST),
    ("fx_foliation_flat", FX_FOLIATION_FLAT),
    ("fx_free_involutive", FX_FREE_INVOLUTIVE),
    ("fx_free_jacobi_r3", FX_FREE_JACOBI_R3),
    ("fx_free_nonabelian_killing", FX_FREE_NONABELIAN_KILLING),
    ("fx_free_translation", FX_FREE_TRANSLATION),
    ("fx_generalized_so2", FX_GENERALIZED_SO2),
    ("fx_nonriem_fol", FX_NONRIEM_FOL),
    ("fx_omega_xdy", FX_OMEGA_XDY),
    ("fx_poisson_2d", FX_POISSON_2D),
    ("fx_rho0_n1", FX_RHO0_N1),
    ("fx_so3_sphere", FX_SO3_SPHERE),
    ("fx_sphere_rot", FX_SPHERE_ROT),
    ("fx_sphere_scaled", FX_SPHERE_SCALED),
    ("fx_symplectic_conformal", FX_SYMPLECTIC_CONFORMAL),
    ("fx_tm_flat", FX_TM_FLAT),
];

/// Loads a bundled fixture; panics on a malformed document.
pub fn load(document: &str) -> AlgebroidSpec {
    load_spec(document).expect("bundled fixture is well formed")
}

/// Looks up a fixture by file stem.
pub fn by_name(name: &str) -> Option<AlgebroidSpec> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, d)| load(d))
}
