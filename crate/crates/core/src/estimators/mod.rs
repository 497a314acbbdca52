// SPDX-License-Identifier: Apache-2.0

//! Curve fitting for resonator traces, qubit spectroscopy and Rabi records.

pub mod background;
pub mod lm;
pub mod lorentzian;
pub mod rabi;
pub mod reflection;

pub use background::{subtract_background, Axis};
pub use lm::{lm_minimize, FitResult, LeastSquares};
pub use lorentzian::{fit_lorentzian, LorentzianFit, LorentzianParams};
pub use rabi::{fit_rabi, RabiFit, RabiParams};
pub use reflection::{fit_reflection, ReflectionOptions, ReflectionParams, ResonatorFit};
