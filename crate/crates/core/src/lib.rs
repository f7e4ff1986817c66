//! Area-preserving twist maps with forged periodic orbits.
//!
//! The crate builds exactly evaluable symplectic maps, perturbs them near
//! resonant invariant circles to create prescribed hyperbolic and elliptic
//! periodic orbits, certifies KAM circles numerically, counts periodic
//! orbits independently, and chains these steps into a multi-stage growth
//! campaign. A unimodal interval model with plateau perturbations provides
//! the one-dimensional counterpart.

// negated comparisons are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod census;
pub mod decimal;
pub mod error;
pub mod flows;
pub mod forge;
pub mod interval;
pub mod kam;
pub mod phase;

pub use error::{Error, Result};
pub use phase::{Jacobian2, PhasePoint, Space, SymplecticMap, TrigPoly, YFunction};
