//! Residual policy learning toolkit: a dense-network engine, a planar
//! goal-conditioned manipulation suite, scripted initial controllers, a
//! goal-relabeling actor-critic learner, and a config-driven experiment
//! harness.
//!
//! The central object is a residual policy `pi_theta(s) = pi(s) + f_theta(s)`:
//! a fixed base controller `pi` plus a learned correction `f_theta` whose
//! final network layer starts at zero, so training begins exactly at the
//! base controller's behavior and can only move away from it as the critic
//! learns where the controller falls short.

pub mod agent;
pub mod controllers;
pub mod envs;
pub mod harness;
pub mod net;
pub mod seeding;

mod error;

pub use error::{Error, Result};
