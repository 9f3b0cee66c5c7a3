//! Neural induction machine modelling.
//!
//! This crate bundles everything needed to learn a phase-domain induction
//! machine model from its dq0 physics:
//!
//! - [`machine`]: the machine's electrical and mechanical equations plus the
//!   Park transformation, as pure functions.
//! - [`simulator`]: a fixed-step RK4 integrator that turns a [`simulator::Scenario`]
//!   (free acceleration, torque change, fault) into a ground-truth
//!   [`simulator::Trajectory`].
//! - [`nnet`]: a small from-scratch MLP engine with reverse-mode gradients,
//!   an Adam optimizer and a finite-difference gradient checker.
//! - [`pinn`]: the two-network model (G predicts dq0 currents, P predicts
//!   phase-current derivatives), the trapezoidal flux-consistency losses and
//!   the two-stage training loop, with optional supervised data terms.
//! - [`dataio`]: dataset presets, CSV trajectory persistence, JSON model
//!   persistence and the MSE evaluation harness.
//!
//! All numerics are `f64`. Training is deterministic for a fixed seed: random
//! initialization uses a counter-based generator and every parallel reduction
//! sums partial results in a fixed order.

pub mod dataio;
pub mod error;
pub mod machine;
pub mod nnet;
pub mod pinn;
pub mod simulator;

pub use error::{Error, Result};
