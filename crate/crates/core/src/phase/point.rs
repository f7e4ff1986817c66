use serde::{Deserialize, Serialize};

/// Reduces `x` to `[0, 1)`.
///
/// `rem_euclid` can return exactly `1.0` for tiny negative inputs, so that
/// case is folded back to zero.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Splits a lifted coordinate into its integer winding and a representative in `[0,1)`.
pub fn split_lift(x: f64) -> (i64, f64) {
    let w = x.floor();
    let r = x - w;
    if r >= 1.0 {
        (w as i64 + 1, 0.0)
    } else {
        (w as i64, r)
    }
}

/// Signed difference `b - a` reduced to `[-1/2, 1/2)`.
pub fn circle_delta(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(1.0);
    if d >= 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// A point of the circle R/Z.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(x: f64) -> Self {
        CirclePoint(wrap_unit(x))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Arc distance, always in `[0, 1/2]`.
    pub fn distance(self, other: CirclePoint) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(1.0 - d)
    }

    pub fn shifted(self, by: f64) -> Self {
        CirclePoint::new(self.0 + by)
    }
}

/// Ambient phase space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Torus,
    Cylinder,
}

/// A point of the torus or of the cylinder S^1 x R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: CirclePoint,
    pub y: f64,
    pub space: Space,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64, space: Space) -> Self {
        let y = match space {
            Space::Torus => wrap_unit(y),
            Space::Cylinder => y,
        };
        PhasePoint { x: CirclePoint::new(x), y, space }
    }

    pub fn torus(x: f64, y: f64) -> Self {
        Self::new(x, y, Space::Torus)
    }

    pub fn cylinder(x: f64, y: f64) -> Self {
        Self::new(x, y, Space::Cylinder)
    }

    pub fn xy(&self) -> (f64, f64) {
        (self.x.value(), self.y)
    }

    /// Euclidean distance in the quotient metric of the space.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let dx = self.x.distance(other.x);
        let dy = match self.space {
            Space::Torus => CirclePoint(self.y).distance(CirclePoint(other.y)),
            Space::Cylinder => (self.y - other.y).abs(),
        };
        dx.hypot(dy)
    }
}
