// SPDX-License-Identifier: Apache-2.0

//! Measured or synthesised datasets.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex reflection samples on an ascending frequency axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexTrace {
    pub freqs_ghz: Vec<f64>,
    pub values: Vec<Complex64>,
    pub power_dbm: Option<f64>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl ComplexTrace {
    pub fn new(freqs_ghz: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        let t = Self {
            freqs_ghz,
            values,
            power_dbm: None,
            metadata: BTreeMap::new(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        check_axis(&self.freqs_ghz, self.values.len(), "frequency")?;
        if self
            .values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::invalid("trace contains non-finite samples"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

/// Real-valued samples `y(x)` on an ascending axis: a lineshape `(f, |S|)` or a Rabi record
/// `(t_d, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let s = Self { x, y };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_axis(&self.x, self.y.len(), "abscissa")?;
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("series contains non-finite samples"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

fn check_axis(axis: &[f64], n_values: usize, what: &str) -> Result<()> {
    if axis.len() != n_values {
        return Err(Error::invalid(format!(
            "{what} axis has {} samples but there are {n_values} values",
            axis.len()
        )));
    }
    if axis.iter().any(|f| !f.is_finite()) {
        return Err(Error::invalid(format!(
            "{what} axis has non-finite entries"
        )));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(format!(
            "{what} axis must be strictly increasing"
        )));
    }
    Ok(())
}

/// Rectangular map sampled on a slow axis (rows) and a fast axis (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Map2D {
    pub slow_label: String,
    pub fast_label: String,
    pub slow: Vec<f64>,
    pub fast: Vec<f64>,
    /// Row-major values, `values[row][col]` with `row` on the slow axis.
    pub values: Vec<Vec<f64>>,
}

impl Map2D {
    pub fn new(
        slow_label: impl Into<String>,
        fast_label: impl Into<String>,
        slow: Vec<f64>,
        fast: Vec<f64>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if values.len() != slow.len() || values.iter().any(|r| r.len() != fast.len()) {
            return Err(Error::invalid(format!(
                "map is not {}x{}",
                slow.len(),
                fast.len()
            )));
        }
        Ok(Self {
            slow_label: slow_label.into(),
            fast_label: fast_label.into(),
            slow,
            fast,
            values,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.slow.len(), self.fast.len())
    }

    pub fn row(&self, i: usize) -> Series {
        Series {
            x: self.fast.clone(),
            y: self.values[i].clone(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }
}

/// Evenly spaced axis `start..=stop` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl LinGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        let g = Self {
            start,
            stop,
            points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2
            || !(self.stop > self.start)
            || !self.start.is_finite()
            || !self.stop.is_finite()
        {
            return Err(Error::invalid(format!(
                "grid needs start < stop and >= 2 points, got {}..{} with {}",
                self.start, self.stop, self.points
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}
