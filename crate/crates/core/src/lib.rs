//! Semidirect-product ("noncommutative shift") key exchange over matrix
//! platforms, and linear decomposition attacks that recover the shared key
//! from public data.

pub mod attack;
pub mod codec;
pub mod endo;
pub mod error;
pub mod field;
pub mod group;
pub mod kex;
pub mod linalg;
pub mod platform;
pub mod poly;
pub mod scenario;

pub use attack::{
    attack_commutant, attack_conjugation, attack_general, attack_masked, commutant_solution,
    orbit_prefix_basis, run_attack, AttackReport, CommutantBudget, Method, PhaseTimings,
};
pub use endo::{EndoDescriptor, EndoKind};
pub use error::{Error, Result};
pub use field::{Fe, Field, FieldElement};
pub use group::{GroupAlgebraElement, GroupTable};
pub use kex::{orbit_element, run_session, sd_mul, SemidirectElement, SessionSecrets, Transcript};
pub use linalg::{Insertion, SpanBasis};
pub use platform::{sample_instance, Instance, Platform, PlatformElement, Variant};
pub use scenario::{PlatformChoice, Scenario};
