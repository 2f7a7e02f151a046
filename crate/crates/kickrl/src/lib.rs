//! A desk-scale reinforcement-learning workbench for the soccer kick-motion
//! task: a deterministic 2D kinematic simulator, world-frame and robot-frame
//! observation encodings, a from-scratch DQN, and an experiment harness that
//! compares how observation dimensionality affects training speed.

pub mod checks;
pub mod dqn;
pub mod frames;
pub mod harness;
pub mod kicksim;
pub mod obs;
