//! Randomized self-check suites for the frame math and the observation
//! encodings, runnable from the CLI and from the test suite.
//!
//! The geometry checks compare the analytic rigid inverse against a general
//! cofactor-based 3x3 inversion that shares no code with it.

use crate::frames::{
    ctm_from_pose, invert, relative_heading, to_robot_frame_point, to_robot_frame_vector,
    wrap_angle, Pose2D, Vec2,
};
use crate::kicksim::{SceneState, TARGET_DISTANCE};
use crate::obs::{observe_acs, observe_rcs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Result of one check suite.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({})",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

/// General-purpose 3x3 inverse via the adjugate, used as an oracle. It never
/// exploits rigidity.
pub fn general_inverse_3x3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-12 {
        return None;
    }
    let mut cof = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let mut minor = [0.0; 4];
            let mut k = 0;
            for rr in 0..3 {
                for cc in 0..3 {
                    if rr != r && cc != c {
                        minor[k] = m[rr][cc];
                        k += 1;
                    }
                }
            }
            let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
            // Transposed assignment: the adjugate is the cofactor transpose.
            cof[c][r] = sign * (minor[0] * minor[3] - minor[1] * minor[2]) / det;
        }
    }
    Some(cof)
}

fn random_pose<R: Rng>(rng: &mut R) -> Pose2D {
    Pose2D::new(
        rng.gen_range(-10.0..10.0),
        rng.gen_range(-10.0..10.0),
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    )
}

/// Compares `invert` against the cofactor oracle and verifies point
/// round-trips on random poses.
pub fn geometry_oracle_check(cases: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_inverse_dev = 0.0f64;
    let mut max_round_trip = 0.0f64;

    for _ in 0..cases {
        let pose = random_pose(&mut rng);
        let m = ctm_from_pose(pose);
        let fast = invert(&m);
        let oracle = general_inverse_3x3(&m.0).expect("rigid transforms are invertible");
        for r in 0..3 {
            for c in 0..3 {
                max_inverse_dev = max_inverse_dev.max((fast.0[r][c] - oracle[r][c]).abs());
            }
        }

        let p = Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let back = m.apply_point(to_robot_frame_point(pose, p));
        max_round_trip = max_round_trip.max((back.x - p.x).abs().max((back.y - p.y).abs()));
    }

    CheckOutcome {
        name: "geometry-oracle",
        passed: max_inverse_dev < 1e-10 && max_round_trip < 1e-9,
        detail: format!(
            "{cases} poses, max |analytic - cofactor inverse| = {max_inverse_dev:.3e} \
             (limit 1e-10), max point round-trip error = {max_round_trip:.3e} (limit 1e-9)"
        ),
    }
}

/// A random scene with the robot anywhere in the plane, speed in the
/// command set, and a moving ball.
pub fn random_scene<R: Rng>(rng: &mut R) -> SceneState {
    let robot = random_pose(rng);
    SceneState {
        robot,
        robot_speed: [2.55, 0.0, -2.55][rng.gen_range(0..3)],
        ball_pos: Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)),
        ball_vel: Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        target: Vec2::new(TARGET_DISTANCE, 0.0),
        contact_made: false,
        step_index: 0,
    }
}

/// Re-expresses every world-frame quantity of a scene under a global rigid
/// transform.
pub fn transform_scene(s: &SceneState, g: Pose2D) -> SceneState {
    let m = ctm_from_pose(g);
    let pos = m.apply_point(s.robot.position());
    SceneState {
        robot: Pose2D::new(pos.x, pos.y, g.theta() + s.robot.theta()),
        robot_speed: s.robot_speed,
        ball_pos: m.apply_point(s.ball_pos),
        ball_vel: m.apply_vector(s.ball_vel),
        target: m.apply_point(s.target),
        contact_made: s.contact_made,
        step_index: s.step_index,
    }
}

/// Absolute difference between two observation components, on the circle for
/// the trailing angle component.
fn component_dev(i: usize, angle_index: usize, a: f64, b: f64) -> f64 {
    if i == angle_index {
        wrap_angle(a - b).abs()
    } else {
        (a - b).abs()
    }
}

/// Verifies the dimension-reduction claims on random scenes under random
/// global rigid transforms:
///
/// 1. the robot-frame observation does not change (within 1e-6 per
///    component, angles compared on the circle),
/// 2. the world-frame observation does change,
/// 3. the dropped components (robot position, heading, lateral velocity)
///    are zero in the robot frame (within 1e-9).
pub fn frame_invariance_check(cases: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rcs_dev = 0.0f64;
    let mut min_acs_dev = f64::INFINITY;
    let mut max_zero_dev = 0.0f64;

    for _ in 0..cases {
        let scene = random_scene(&mut rng);
        // Keep the transform away from the identity so the world-frame
        // observation is guaranteed to move.
        let g = loop {
            let g = random_pose(&mut rng);
            if g.position().norm() > 0.1 || g.theta().abs() > 0.1 {
                break g;
            }
        };
        let moved = transform_scene(&scene, g);

        let rcs_a = observe_rcs(&scene);
        let rcs_b = observe_rcs(&moved);
        for (i, (&a, &b)) in rcs_a.values.iter().zip(&rcs_b.values).enumerate() {
            max_rcs_dev = max_rcs_dev.max(component_dev(i, 5, a, b));
        }

        let acs_a = observe_acs(&scene);
        let acs_b = observe_acs(&moved);
        let acs_dev = acs_a
            .values
            .iter()
            .zip(&acs_b.values)
            .enumerate()
            .map(|(i, (&a, &b))| component_dev(i, 9, a, b))
            .fold(0.0f64, f64::max);
        min_acs_dev = min_acs_dev.min(acs_dev);

        // The components the reduced encoding drops, reconstructed
        // explicitly in the robot frame.
        for s in [&scene, &moved] {
            let own = to_robot_frame_point(s.robot, s.robot.position());
            let heading = relative_heading(s.robot.theta(), s.robot.theta());
            let lateral = to_robot_frame_vector(s.robot, s.robot_vel()).y;
            for v in [own.x, own.y, heading, lateral] {
                max_zero_dev = max_zero_dev.max(v.abs());
            }
        }
    }

    CheckOutcome {
        name: "frame-invariance",
        passed: max_rcs_dev < 1e-6 && min_acs_dev > 1e-6 && max_zero_dev < 1e-9,
        detail: format!(
            "{cases} scenes, max robot-frame deviation = {max_rcs_dev:.3e} (limit 1e-6), \
             min world-frame deviation = {min_acs_dev:.3e} (must exceed 1e-6), \
             max dropped-component magnitude = {max_zero_dev:.3e} (limit 1e-9)"
        ),
    }
}

/// Every suite, in the order the CLI reports them.
pub fn all_checks() -> Vec<CheckOutcome> {
    vec![
        geometry_oracle_check(1000, 0xF1A7),
        frame_invariance_check(1000, 0xC0DE),
    ]
}
