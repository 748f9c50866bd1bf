// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Entanglement generation between two microwave cavities linked by
//! optomechanical transducers and an optical fiber.
//!
//! The seven coupled modes evolve under a linear quantum Langevin equation.
//! This crate builds its dynamics matrix, checks stability, propagates the
//! second moments of the two microwave modes in time or frequency, turns them
//! into logarithmic negativity and runs random searches over drive settings.

pub mod config;
pub mod covariance;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod params;
pub mod propagator;
pub mod search;
pub mod spectral;

pub use error::{Error, Result};
