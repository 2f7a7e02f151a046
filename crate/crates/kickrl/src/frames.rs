//! 2D rigid-body transforms between the world frame and the robot-centered
//! relative frame.
//!
//! Conventions: meters and radians everywhere, angles counterclockwise
//! positive with 0 along +X, headings stored wrapped to `(-PI, PI]`, all
//! arithmetic in `f64`.

use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

/// A planar position plus heading angle.
///
/// The heading is wrapped to `(-PI, PI]` on construction, so two poses that
/// differ by a full turn compare equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2D {
    /// X position (m).
    pub x: f64,
    /// Y position (m).
    pub y: f64,
    /// Heading (rad), wrapped to `(-PI, PI]`.
    theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    /// Heading in radians, always in `(-PI, PI]`.
    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Position part of the pose.
    #[inline]
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Unit vector along the heading.
    #[inline]
    pub fn heading_dir(&self) -> Vec2 {
        Vec2::new(self.theta.cos(), self.theta.sin())
    }
}

/// A 2D point or direction vector; the unit is meters, or meters/second when
/// used as a velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Direction angle `atan2(y, x)` in `(-PI, PI]`.
    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// A 3x3 homogeneous rigid transform, row-major.
///
/// The upper-left 2x2 block is a rotation and the bottom row is `[0, 0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformMatrix(pub [[f64; 3]; 3]);

impl TransformMatrix {
    pub const IDENTITY: TransformMatrix =
        TransformMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Applies the transform to a point (homogeneous coordinate 1).
    pub fn apply_point(&self, p: Vec2) -> Vec2 {
        let m = &self.0;
        Vec2::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2],
        )
    }

    /// Applies only the rotation block to a direction vector.
    pub fn apply_vector(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        Vec2::new(m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y)
    }
}

/// Builds the homogeneous transform that maps robot-frame coordinates into
/// world-frame coordinates:
///
/// ```text
/// [ cos t  -sin t  x ]
/// [ sin t   cos t  y ]
/// [   0       0    1 ]
/// ```
pub fn ctm_from_pose(pose: Pose2D) -> TransformMatrix {
    let (s, c) = pose.theta().sin_cos();
    TransformMatrix([[c, -s, pose.x], [s, c, pose.y], [0.0, 0.0, 1.0]])
}

/// Analytic inverse of a rigid transform: `[[R^T, -R^T t], [0 0 1]]`.
pub fn invert(m: &TransformMatrix) -> TransformMatrix {
    let a = &m.0;
    let (r00, r01, tx) = (a[0][0], a[0][1], a[0][2]);
    let (r10, r11, ty) = (a[1][0], a[1][1], a[1][2]);
    TransformMatrix([
        [r00, r10, -(r00 * tx + r10 * ty)],
        [r01, r11, -(r01 * tx + r11 * ty)],
        [0.0, 0.0, 1.0],
    ])
}

/// Expresses a world-frame point in the robot frame: the 2D part of
/// `M^-1 * [p; 1]` where `M = ctm_from_pose(robot)`.
pub fn to_robot_frame_point(robot: Pose2D, p: Vec2) -> Vec2 {
    invert(&ctm_from_pose(robot)).apply_point(p)
}

/// Expresses a world-frame direction vector in the robot frame.
///
/// Only the rotation block applies; the pose translation is ignored, so the
/// Euclidean norm is preserved.
pub fn to_robot_frame_vector(robot: Pose2D, v: Vec2) -> Vec2 {
    invert(&ctm_from_pose(robot)).apply_vector(v)
}

/// Wraps an angle to the half-open interval `(-PI, PI]`.
///
/// `PI` maps to `PI`, `-PI` maps to `PI`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Heading of the ball's motion relative to the robot's heading, wrapped to
/// `(-PI, PI]`.
pub fn relative_heading(theta_ball: f64, theta_robot: f64) -> f64 {
    wrap_angle(theta_ball - theta_robot)
}

/// Signed forward speed: the projection of a world-frame velocity onto the
/// robot's heading direction. Positive when moving along the heading,
/// negative against it.
pub fn signed_speed_along_heading(robot: Pose2D, v_robot: Vec2) -> f64 {
    v_robot.dot(robot.heading_dir())
}
