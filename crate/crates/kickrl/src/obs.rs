//! Observation encodings: the full 10-dimensional world-frame vector, the
//! reduced 6-dimensional robot-frame vector, and dummy-augmented variants.

use crate::frames::{
    relative_heading, signed_speed_along_heading, to_robot_frame_point, to_robot_frame_vector,
};
use crate::kicksim::SceneState;
use rand::Rng;
use std::fmt;
use std::str::FromStr;

/// Which observation layout a vector carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// World-frame state, 10 values.
    Acs,
    /// Robot-frame state, 6 values.
    Rcs,
    /// Robot-frame state plus `n` uniform noise values.
    RcsPlus(u32),
}

impl Encoding {
    /// Observation vector length for this encoding.
    pub fn dim(self) -> usize {
        match self {
            Encoding::Acs => 10,
            Encoding::Rcs => 6,
            Encoding::RcsPlus(n) => 6 + n as usize,
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Encoding::Acs => write!(f, "acs"),
            Encoding::Rcs => write!(f, "rcs"),
            Encoding::RcsPlus(n) => write!(f, "rcs+{n}"),
        }
    }
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "acs" => Ok(Encoding::Acs),
            "rcs" => Ok(Encoding::Rcs),
            _ => match s.strip_prefix("rcs+") {
                Some(n) => n
                    .parse::<u32>()
                    .map(Encoding::RcsPlus)
                    .map_err(|_| format!("bad dummy count in encoding {s:?}")),
                None => Err(format!(
                    "unknown encoding {s:?}; expected acs, rcs, or rcs+N"
                )),
            },
        }
    }
}

/// A flat numeric state vector handed to the agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
    pub encoding: Encoding,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Direction angle of the ball's motion; zero for a motionless ball so the
/// encoding stays total and deterministic.
fn ball_motion_angle(s: &SceneState) -> f64 {
    if s.ball_vel.x == 0.0 && s.ball_vel.y == 0.0 {
        0.0
    } else {
        s.ball_vel.angle()
    }
}

/// World-frame observation: robot position and heading, ball position,
/// robot velocity, ball velocity, ball motion angle.
pub fn observe_acs(s: &SceneState) -> Observation {
    let robot_vel = s.robot_vel();
    Observation {
        values: vec![
            s.robot.x,
            s.robot.y,
            s.robot.theta(),
            s.ball_pos.x,
            s.ball_pos.y,
            robot_vel.x,
            robot_vel.y,
            s.ball_vel.x,
            s.ball_vel.y,
            ball_motion_angle(s),
        ],
        encoding: Encoding::Acs,
    }
}

/// Robot-frame observation: ball position, signed robot forward speed, ball
/// velocity, and ball motion angle, all relative to the robot pose.
///
/// The robot's own position, heading, and lateral velocity are identically
/// zero in this frame and are dropped, reducing 10 values to 6.
pub fn observe_rcs(s: &SceneState) -> Observation {
    let ball = to_robot_frame_point(s.robot, s.ball_pos);
    let ball_vel = to_robot_frame_vector(s.robot, s.ball_vel);
    Observation {
        values: vec![
            ball.x,
            ball.y,
            signed_speed_along_heading(s.robot, s.robot_vel()),
            ball_vel.x,
            ball_vel.y,
            relative_heading(ball_motion_angle(s), s.robot.theta()),
        ],
        encoding: Encoding::Rcs,
    }
}

/// Appends `n` fresh uniform samples from `[-1, 1]` to a robot-frame
/// observation. Resampled at every call, so consecutive observations carry
/// independent noise.
pub fn augment_dummies<R: Rng>(o: Observation, n: u32, rng: &mut R) -> Observation {
    assert_eq!(
        o.encoding,
        Encoding::Rcs,
        "dummies extend robot-frame observations only"
    );
    if n == 0 {
        return o;
    }
    let mut values = o.values;
    values.extend((0..n).map(|_| rng.gen_range(-1.0..=1.0)));
    Observation {
        values,
        encoding: Encoding::RcsPlus(n),
    }
}

/// Builds the observation a given encoding prescribes for a scene.
///
/// The rng is consumed only by dummy-augmented encodings.
pub fn observe<R: Rng>(s: &SceneState, encoding: Encoding, rng: &mut R) -> Observation {
    match encoding {
        Encoding::Acs => observe_acs(s),
        Encoding::Rcs => observe_rcs(s),
        Encoding::RcsPlus(n) => augment_dummies(observe_rcs(s), n, rng),
    }
}
