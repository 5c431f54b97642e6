// SPDX-License-Identifier: Apache-2.0

//! Spectral toolkit for the two-dimensional Kuramoto-Sivashinsky equation
//! on a periodic rectangle with one linearly growing mode per direction.
//!
//! The crate provides:
//! - truncated cosine-symmetric spectral fields with Wiener-algebra norms
//!   and exact convolution products ([`field`]),
//! - the derived-constant ledger and the feasibility threshold `eps*`
//!   ([`constants`]),
//! - the forced two-mode Lyapunov system and its trapping checks ([`toy`]),
//! - the nonlinear-term decompositions and mode forcing scalars ([`forcing`]),
//! - the Duhamel mild-iteration scheme for the remainder `w` ([`mild`]),
//! - an independent exponential-integrator solver used for cross-validation
//!   ([`direct`]).

pub mod constants;
pub mod direct;
pub mod domain;
pub mod error;
pub mod expphi;
pub mod field;
pub mod forcing;
pub mod mild;
pub mod toy;

pub use constants::ConstantLedger;
pub use domain::{Domain, LinearModel, WienerParams, SPECIAL_SET};
pub use error::KsError;
pub use field::{Axis, ModeSplit, OddField, Product, SpectralField};
pub use forcing::{ForcingSet, PhiBundle, PsiBundle};
pub use mild::{IterationReport, SchemeConfig, SchemeResult};
pub use toy::{ToyState, ToySystem};
