//! Optimal on-off (switch-state) control of discrete LTI systems with a
//! binary actuator and a switching penalty, validated end-to-end on a
//! discretized buck (step-down) DC-DC converter.
//!
//! The crate synthesizes a closed-form quadratic value function for a
//! discounted infinite-horizon cost that charges both regulation error and
//! actuator transitions, derives the resulting affine hysteresis policy, and
//! ships the machinery to exercise it: plant construction and zero-order-hold
//! discretization, a deterministic closed-loop simulator with load-step and
//! input-noise scenarios, and independent ground-truth oracles (exhaustive
//! horizon enumeration and gridded value iteration) that bound how far the
//! closed-form policy is from optimal.
//!
//! Start with the runnable examples (`cargo run --example startup`) or the
//! `switchctl` binary (`synth`, `sim`, `sweep-beta`, `oracle-compare`).

pub mod cli;
pub mod controller;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod plant;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
