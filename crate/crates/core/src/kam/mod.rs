//! KAM circles: rotation numbers, Diophantine certificates, the
//! cohomological equation, the invariance-equation solver, adapted
//! coordinates and the Birkhoff twist coefficient.

pub mod adapted;
pub mod birkhoff;
pub mod cohomology;
pub mod diophantine;
pub mod invariance;
pub mod rotation;

pub use adapted::{adapted_coordinates, intersection_check, kam_smallness, AdaptedChart, SmallnessReport};
pub use birkhoff::{mean_rotation_angle, twist_coefficient, TwistCoefficient};
pub use cohomology::{solve_cohomological, Cohomology, DIVISOR_FLOOR};
pub use diophantine::{diophantine_certificate, golden_mean, DiophantineCert};
pub use invariance::{solve_invariance, strip_radius, tail_fraction, KamConfig, KamCurve};
pub use rotation::{rotation_number, RotationEstimate};
