// SPDX-License-Identifier: Apache-2.0

//! Damped Rabi oscillation `y = A exp(-t/T_R) cos(omega t + B) + a t + b`.
//!
//! Time in ns, `omega` in rad/ns. The initial frequency comes from the peak of the discrete
//! Fourier transform of the linearly detrended record; the envelope and phase are then seeded
//! by a variable-projection scan over `T_R`, in which the model is linear in the remaining
//! coefficients.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{lm_minimize, FitResult, LeastSquares};
use super::reflection::median_in_place;
use crate::data::Series;
use crate::error::{Error, Result};

/// Zero-padding factor of the frequency scan.
pub const DFT_PADDING: usize = 4;
/// Peak-to-median periodogram ratio required to accept an oscillation.
pub const PEAK_THRESHOLD: f64 = 20.0;
/// Minimum number of oscillation periods in the record.
pub const MIN_PERIODS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiParams {
    pub amplitude: f64,
    pub t_r_ns: f64,
    pub omega: f64,
    pub phase: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl RabiParams {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (-t / self.t_r_ns).exp() * (self.omega * t + self.phase).cos()
            + self.slope * t
            + self.intercept
    }

    fn to_vec(self) -> Vec<f64> {
        vec![
            self.amplitude,
            self.t_r_ns,
            self.omega,
            self.phase,
            self.slope,
            self.intercept,
        ]
    }

    fn from_slice(p: &[f64]) -> Self {
        Self {
            amplitude: p[0],
            t_r_ns: p[1],
            omega: p[2],
            phase: p[3],
            slope: p[4],
            intercept: p[5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiFit {
    pub params: RabiParams,
    pub errors: RabiParams,
    /// Frequency resolution `2 pi / span` of the unpadded transform (rad/ns).
    pub dft_bin: f64,
    pub fit: FitResult,
}

pub struct RabiProblem<'a> {
    pub data: &'a Series,
}

impl LeastSquares for RabiProblem<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let m = RabiParams::from_slice(p.as_slice());
        DVector::from_iterator(
            self.data.len(),
            self.data
                .x
                .iter()
                .zip(&self.data.y)
                .map(|(&t, &y)| m.eval(t) - y),
        )
    }

    fn jacobian(&self, p: &DVector<f64>) -> Option<DMatrix<f64>> {
        let m = RabiParams::from_slice(p.as_slice());
        let mut j = DMatrix::zeros(self.data.len(), 6);
        for (i, &t) in self.data.x.iter().enumerate() {
            let env = (-t / m.t_r_ns).exp();
            let arg = m.omega * t + m.phase;
            let (s, c) = arg.sin_cos();
            j[(i, 0)] = env * c;
            j[(i, 1)] = m.amplitude * env * c * t / (m.t_r_ns * m.t_r_ns);
            j[(i, 2)] = -m.amplitude * env * s * t;
            j[(i, 3)] = -m.amplitude * env * s;
            j[(i, 4)] = t;
            j[(i, 5)] = 1.0;
        }
        Some(j)
    }
}

fn linear_detrend(x: &[f64], y: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let resid = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - slope * a - intercept)
        .collect();
    (slope, intercept, resid)
}

/// Periodogram peak `(omega, peak_power / median_power)`.
fn dft_peak(t: &[f64], y: &[f64]) -> (f64, f64) {
    let span = t[t.len() - 1] - t[0];
    let mut dt: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let nyquist = PI / median_in_place(&mut dt);
    let step = TAU / (span * DFT_PADDING as f64);
    let n_freq = (nyquist / step).floor() as usize;
    let mut powers = Vec::with_capacity(n_freq);
    for k in DFT_PADDING..=n_freq {
        let w = k as f64 * step;
        let (mut re, mut im) = (0.0, 0.0);
        for (&tk, &yk) in t.iter().zip(y) {
            let (s, c) = (w * (tk - t[0])).sin_cos();
            re += yk * c;
            im -= yk * s;
        }
        powers.push((w, re * re + im * im));
    }
    let Some(&(w_peak, p_peak)) = powers.iter().max_by(|a, b| a.1.total_cmp(&b.1)) else {
        return (0.0, 0.0);
    };
    let mut ps: Vec<f64> = powers.iter().map(|p| p.1).collect();
    let med = median_in_place(&mut ps);
    (w_peak, p_peak / med.max(f64::MIN_POSITIVE))
}

/// Initial parameters for [`fit_rabi`].
pub fn initial_guess_rabi(data: &Series) -> Result<RabiParams> {
    data.validate()?;
    if data.len() < 8 {
        return Err(Error::invalid("need at least 8 samples"));
    }
    let t = &data.x;
    let (_, _, detrended) = linear_detrend(t, &data.y);
    let (omega, ratio) = dft_peak(t, &detrended);
    if !(ratio >= PEAK_THRESHOLD) {
        return Err(Error::CannotInit(format!(
            "no spectral peak above noise (peak/median = {ratio:.1})"
        )));
    }
    let span = t[t.len() - 1] - t[0];
    let periods = omega * span / TAU;
    if periods < MIN_PERIODS {
        return Err(Error::CannotInit(format!(
            "only {periods:.1} oscillation periods in the record"
        )));
    }

    // Variable projection over T_R: y ~ e^{-t/T}(c1 cos wt + c2 sin wt) + a t + b.
    let mut best: Option<(f64, RabiParams)> = None;
    for i in 0..40 {
        let tau = span / 20.0 * (100f64).powf(i as f64 / 39.0);
        let mut m = DMatrix::zeros(t.len(), 4);
        for (r, &tk) in t.iter().enumerate() {
            let env = (-tk / tau).exp();
            m[(r, 0)] = env * (omega * tk).cos();
            m[(r, 1)] = env * (omega * tk).sin();
            m[(r, 2)] = tk;
            m[(r, 3)] = 1.0;
        }
        let y = DVector::from_column_slice(&data.y);
        let Some(coef) = (m.transpose() * &m).lu().solve(&(m.transpose() * &y)) else {
            continue;
        };
        let cost = (&m * &coef - &y).norm_squared();
        // c1 cos + c2 sin = A cos(wt + B) with A cos B = c1, -A sin B = c2.
        let p = RabiParams {
            amplitude: coef[0].hypot(coef[1]),
            t_r_ns: tau,
            omega,
            phase: (-coef[1]).atan2(coef[0]),
            slope: coef[2],
            intercept: coef[3],
        };
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, p));
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::CannotInit("envelope scan failed".into()))
}

/// Fits the damped-cosine-plus-line model.
pub fn fit_rabi(data: &Series) -> Result<RabiFit> {
    let init = initial_guess_rabi(data)?;
    let fit = lm_minimize(&RabiProblem { data }, &init.to_vec())?.with_names(&[
        "amplitude",
        "t_r_ns",
        "omega",
        "phase",
        "slope",
        "intercept",
    ]);
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
        });
    }
    let mut p = RabiParams::from_slice(&fit.params);
    if p.amplitude < 0.0 {
        p.amplitude = -p.amplitude;
        p.phase += PI;
    }
    p.phase = (p.phase + PI).rem_euclid(TAU) - PI;
    if !(p.t_r_ns > 0.0) {
        return Err(Error::CannotInit(format!(
            "fit converged to a non-positive decay time {}",
            p.t_r_ns
        )));
    }
    let span = data.x[data.len() - 1] - data.x[0];
    Ok(RabiFit {
        params: p,
        errors: RabiParams::from_slice(&fit.std_errors),
        dft_bin: TAU / span,
        fit,
    })
}
