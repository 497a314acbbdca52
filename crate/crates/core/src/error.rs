// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The basis (charge cutoff or phase grid) is too small: doubling it moved f01 by more
    /// than the convergence tolerance.
    #[error(
        "truncation error in {solver}: f01 moved by {shift_mhz:.3e} MHz when the basis was refined"
    )]
    Truncation {
        solver: &'static str,
        shift_mhz: f64,
    },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("no transmission reproduces alpha = {target_mhz} MHz; attainable band is [{lo_mhz:.3}, {hi_mhz:.3}] MHz")]
    NoSolution {
        target_mhz: f64,
        lo_mhz: f64,
        hi_mhz: f64,
    },

    #[error("qubit and cavity are resonant (delta = 0); use the anti-crossing model")]
    Resonance,

    #[error("straddle-regime pole at delta = -alpha ({delta_mhz} MHz)")]
    Pole { delta_mhz: f64 },

    #[error("chi and delta have inconsistent signs (chi*delta = {product} <= 0)")]
    InconsistentSign { product: f64 },

    #[error("no resonance found: dip depth {depth:.3e} is below 3x the noise floor {noise:.3e}")]
    NoResonance { depth: f64, noise: f64 },

    #[error("no dip detected: depth {depth:.3e} is below 3x the noise floor {noise:.3e}")]
    NoDip { depth: f64, noise: f64 },

    #[error("cannot initialise oscillation fit: {0}")]
    CannotInit(String),

    #[error("nonphysical quality factors: {0}")]
    Nonphysical(String),

    #[error("normal equations stayed singular after damping escalation")]
    Singular,

    #[error("residual function returned a non-finite value")]
    NonFinite,

    #[error("fit did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("at V_G = {v_g} V: {source}")]
    GatePoint {
        v_g: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}: {msg}")]
    Csv {
        path: String,
        line: u64,
        msg: String,
    },

    #[error("stage '{stage}': {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 1 for input problems, 2 for fit or solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Csv { .. }
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_) => 1,
            Error::GatePoint { source, .. } | Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
