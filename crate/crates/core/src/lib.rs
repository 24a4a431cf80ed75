//! Aharonov-Bohm phases on finite covers.
//!
//! From a cover of a multiply connected region and a phase morphism
//! `sigma: pi_1 -> G`, this crate builds transition cocycles, flat
//! potentials, a finite-mode fermionic field net and its charge
//! transporters, and checks the algebraic identities relating them.
//!
//! ```
//! use abphase_core::{builtin_cover, build_nerve, approximate_named, holonomy,
//!     transition_cocycle, Builtin, GroupKind, GroupValue, SigmaMorphism};
//!
//! let cover = builtin_cover(Builtin::Annulus).unwrap();
//! let nerve = build_nerve(&cover).unwrap();
//! let sigma = SigmaMorphism::on_reduced(
//!     nerve.presentation(), vec![GroupValue::phase(0.5)], GroupKind::U1).unwrap();
//! let g = transition_cocycle(&sigma, &nerve).unwrap();
//! let lap = approximate_named(&cover, &["i0", "i1", "i2", "i0"]).unwrap();
//! assert!(holonomy(&g, &lap).unwrap().distance(&GroupValue::phase(0.5)).unwrap() < 1e-12);
//! ```

pub mod cocycle;
pub mod cover;
pub mod error;
pub mod fock;
pub mod group;
pub mod nerve;
pub mod path;
pub mod random;
pub mod scenario;
pub mod sectors;

pub use cocycle::{
    check_cocycle, holonomy, lift_potential, transition_cocycle, trivialize, validate_sigma,
    Charts, CocycleReport, FlatPotentialU1, HolonomySource, SigmaMorphism, TransitionCocycle,
    Trivialization, WitnessLoop,
};
pub use cover::{builtin_cover, Builtin, Cover, Overlap, RegionId, Triple};
pub use error::{Error, Result};
pub use fock::{
    chart_field, gauge_action, glue_psi_a, grading, normal_commutation_check, twisted_local_field,
    twisted_product, FieldOp, FockSpace, Grade, OneParticleSpace, Parity, Section, MAX_MODES,
};
pub use group::{
    path_ordered_exp, CMatrix, FreeWord, GroupKind, GroupValue, LieValue, Phase, UnitaryMatrix,
    EQ_TOL,
};
pub use nerve::{
    build_nerve, loop_class, pi1_presentation, GroupStructure, LoopClass, NerveGraph,
    Pi1Presentation,
};
pub use path::{approximate_curve, approximate_named, path_compose, path_reverse, PosetPath, Step};
pub use sectors::{
    charge_morphism, classify, implementer, rho_holonomy, rho_layer_transporter,
    topological_component, transition_amplitude, twisted_transporter, z1, z_path, Classification,
    Implementer, SectorTransporter, TransporterKind, WindowSubspace,
};
