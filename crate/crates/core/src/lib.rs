// SPDX-License-Identifier: Apache-2.0

//! Modelling and fitting toolkit for a gatemon qubit coupled to a 3D microwave
//! cavity.
//!
//! [`spectra`] holds the transmon and gatemon Hamiltonians and cavity mode
//! frequencies, [`coupling`] the dispersive and resonant qubit-cavity relations,
//! [`estimators`] the resonator, Lorentzian and Rabi fits, and [`synth`] the
//! seeded dataset generator. [`io`] and [`pipeline`] back the `gatecqed` binary.

// Guards are written as `!(x > 0.0)` so that NaN is rejected along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod coupling;
pub mod data;
pub mod error;
pub mod estimators;
pub mod io;
pub mod pipeline;
pub mod rng;
pub mod spectra;
pub mod svg;
pub mod synth;

pub use error::{Error, Result};
