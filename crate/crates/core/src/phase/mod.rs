//! Phase-space points, the symplectic map algebra and twist verification.

pub mod distance;
pub mod jacobian;
pub mod map;
pub mod point;
pub mod scalar;
pub mod trig;
pub mod twist;
pub mod yfunc;

pub use distance::{lifted_distance, probe_distance, sup_distance, Region};
pub use jacobian::Jacobian2;
pub use map::{Iterate, Step, SymplecticMap};
pub use point::{circle_delta, split_lift, wrap_unit, CirclePoint, PhasePoint, Space};
pub use scalar::{Jet3, Scalar};
pub use trig::TrigPoly;
pub use twist::{cone_check, twist_entry, uniform_samples, ConeReport, INVARIANCE_TOL};
pub use yfunc::YFunction;
