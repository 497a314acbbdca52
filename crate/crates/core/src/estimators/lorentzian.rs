// SPDX-License-Identifier: Apache-2.0

//! Lorentzian dip `y = offset - depth / (1 + (2 (f - f0) / fwhm)^2)`.
//!
//! The width reported is the FWHM of the fitted curve, in the units of the abscissa.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{lm_minimize, FitResult, LeastSquares};
use super::reflection::median_in_place;
use crate::data::Series;
use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianParams {
    pub f0: f64,
    pub fwhm: f64,
    pub depth: f64,
    pub offset: f64,
}

impl LorentzianParams {
    pub fn eval(&self, f: f64) -> f64 {
        let u = 2.0 * (f - self.f0) / self.fwhm;
        self.offset - self.depth / (1.0 + u * u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFit {
    pub params: LorentzianParams,
    pub errors: LorentzianParams,
    pub fit: FitResult,
}

pub struct LorentzianProblem<'a> {
    pub data: &'a Series,
}

impl LeastSquares for LorentzianProblem<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let m = LorentzianParams {
            f0: p[0],
            fwhm: p[1],
            depth: p[2],
            offset: p[3],
        };
        DVector::from_iterator(
            self.data.len(),
            self.data
                .x
                .iter()
                .zip(&self.data.y)
                .map(|(&f, &y)| m.eval(f) - y),
        )
    }

    fn jacobian(&self, p: &DVector<f64>) -> Option<DMatrix<f64>> {
        let (f0, w, depth) = (p[0], p[1], p[2]);
        let mut j = DMatrix::zeros(self.data.len(), 4);
        for (i, &f) in self.data.x.iter().enumerate() {
            let u = 2.0 * (f - f0) / w;
            let l = 1.0 / (1.0 + u * u);
            // d(-depth * l)/du = 2 depth u l^2
            let dl_du = 2.0 * depth * u * l * l;
            j[(i, 0)] = dl_du * (-2.0 / w);
            j[(i, 1)] = dl_du * (-u / w);
            j[(i, 2)] = -l;
            j[(i, 3)] = 1.0;
        }
        Some(j)
    }
}

/// Noise estimate from successive differences (robust to a smooth underlying curve).
pub(crate) fn noise_from_differences(y: &[f64]) -> f64 {
    let mut d: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if d.is_empty() {
        return 0.0;
    }
    // |N(0, 2 s^2)| has median 0.6745 * sqrt(2) s.
    median_in_place(&mut d) / (0.674_489_75 * std::f64::consts::SQRT_2)
}

fn smooth3(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            y[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Initial guess: offset from the upper decile, centre at the deepest smoothed sample, width
/// from the half-depth crossings.
pub fn initial_guess_lorentzian(data: &Series) -> Result<LorentzianParams> {
    data.validate()?;
    if data.len() < 3 {
        return Err(Error::invalid("need at least 3 samples"));
    }
    let s = smooth3(&data.y);
    let mut sorted = s.clone();
    sorted.sort_by(f64::total_cmp);
    let offset = sorted[(sorted.len() * 9) / 10];
    let (imin, &ymin) = s
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let depth = offset - ymin;
    let noise = noise_from_differences(&data.y);
    let scale = sorted[sorted.len() - 1].abs().max(sorted[0].abs());
    if depth <= 3.0 * noise || depth <= 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NoDip { depth, noise });
    }
    let half = offset - 0.5 * depth;
    let mut lo = imin;
    while lo > 0 && s[lo] < half {
        lo -= 1;
    }
    let mut hi = imin;
    while hi + 1 < s.len() && s[hi] < half {
        hi += 1;
    }
    let span = data.x[data.len() - 1] - data.x[0];
    let fwhm = (data.x[hi] - data.x[lo]).max(2.0 * span / data.len() as f64);
    Ok(LorentzianParams {
        f0: data.x[imin],
        fwhm,
        depth,
        offset,
    })
}

/// Fits a single Lorentzian dip.
///
/// With two comparable dips in the window the fit follows the one holding the deepest
/// smoothed sample, because that is where the initial guess is seeded.
pub fn fit_lorentzian(data: &Series) -> Result<LorentzianFit> {
    data.validate()?;
    if data.len() < MIN_POINTS {
        return Err(Error::invalid(format!(
            "need at least {MIN_POINTS} samples, got {}",
            data.len()
        )));
    }
    let g = initial_guess_lorentzian(data)?;
    let fit = lm_minimize(
        &LorentzianProblem { data },
        &[g.f0, g.fwhm, g.depth, g.offset],
    )?
    .with_names(&["f0", "fwhm", "depth", "offset"]);
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
        });
    }
    let p = &fit.params;
    let e = &fit.std_errors;
    Ok(LorentzianFit {
        params: LorentzianParams {
            f0: p[0],
            fwhm: p[1].abs(),
            depth: p[2],
            offset: p[3],
        },
        errors: LorentzianParams {
            f0: e[0],
            fwhm: e[1],
            depth: e[2],
            offset: e[3],
        },
        fit,
    })
}
