//! Rigidity toolkit for representations of free groups into PSL(2,R).
//!
//! Elements are unimodular 2x2 matrices up to sign ([`psl2`]), acting on the
//! upper half-plane and on the circle at infinity. [`words`] evaluates free-group
//! words under a [`Representation`]; [`detect`] finds elliptic words of
//! irrational angle and tests elementarity; [`rigidity`] decides whether two
//! representations with the same rotation numbers are conjugate; [`rotnum`]
//! estimates rotation numbers of arbitrary circle maps.

pub mod detect;
pub mod exec;
pub mod fuzz;
pub mod psl2;
pub mod rigidity;
pub mod rotnum;
pub mod sampling;
pub mod words;

pub use exec::Execution;
pub use psl2::{Angle, BoundaryPoint, ClassKind, Classification, HalfPlanePoint, ProjectiveElement, UnimodularMatrix};
pub use rigidity::{check_rigidity, RigidityOutcome, RigidityParams, RigidityVerdict};
pub use words::{Representation, Word};
