//! Planar poses, velocity commands and angle arithmetic.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Normalize an angle into the half-open interval `(-pi, pi]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A point in the world frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: Point2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Robot pose: position in meters, heading in radians.
///
/// `theta` is kept normalized in `(-pi, pi]` by every constructor and update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// Express a world-frame point in this pose's local (robot) frame.
    pub fn to_local(&self, p: Point2) -> Point2 {
        let dx = p.x - self.x;
        let dy = p.y - self.y;
        let (s, c) = self.theta.sin_cos();
        Point2::new(c * dx + s * dy, -s * dx + c * dy)
    }

    /// Express a local (robot-frame) point in the world frame.
    pub fn to_world(&self, p: Point2) -> Point2 {
        let (s, c) = self.theta.sin_cos();
        Point2::new(self.x + c * p.x - s * p.y, self.y + s * p.x + c * p.y)
    }

    /// Bearing from this pose's position to a world point, world frame.
    pub fn bearing_to(&self, p: Point2) -> f64 {
        (p.y - self.y).atan2(p.x - self.x)
    }
}

/// Velocity command: linear m/s, angular rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Twist2D {
    pub v: f64,
    pub w: f64,
}

impl Twist2D {
    pub const ZERO: Twist2D = Twist2D { v: 0.0, w: 0.0 };

    pub fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }

    /// Clamp both components into the configured limits.
    pub fn clamped(&self, v_max: f64, w_max: f64) -> Twist2D {
        Twist2D {
            v: self.v.clamp(-v_max, v_max),
            w: self.w.clamp(-w_max, w_max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_maps_into_half_open_interval() {
        assert_eq!(normalize_angle(0.0), 0.0);
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-0.5) + 0.5).abs() < 1e-12);
        for k in -20..20 {
            let a = 0.37 + k as f64 * TAU;
            assert!((normalize_angle(a) - 0.37).abs() < 1e-9);
        }
    }

    #[test]
    fn local_world_round_trip() {
        let pose = Pose2D::new(1.0, -2.0, 0.7);
        let p = Point2::new(3.5, 0.25);
        let back = pose.to_world(pose.to_local(p));
        assert!((back.x - p.x).abs() < 1e-12);
        assert!((back.y - p.y).abs() < 1e-12);
    }

    #[test]
    fn twist_clamp() {
        let t = Twist2D::new(2.0, -3.0).clamped(0.7, 1.5);
        assert_eq!(t.v, 0.7);
        assert_eq!(t.w, -1.5);
    }
}
