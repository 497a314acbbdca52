// SPDX-License-Identifier: Apache-2.0

//! Background removal for two-tone maps.

use serde::{Deserialize, Serialize};

use super::reflection::median_in_place;
use crate::data::Map2D;

/// Direction along which the median background is taken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// For every fast-axis column (fixed drive frequency), subtract the median over the slow
    /// axis (gate voltage).
    #[default]
    Slow,
    /// For every slow-axis row, subtract the median over the fast axis.
    Fast,
}

pub fn subtract_background(map: &Map2D, axis: Axis) -> Map2D {
    let (rows, cols) = map.shape();
    let mut out = map.clone();
    match axis {
        Axis::Slow => {
            for j in 0..cols {
                let med = median_in_place(&mut map.column(j));
                for i in 0..rows {
                    out.values[i][j] -= med;
                }
            }
        }
        Axis::Fast => {
            for row in out.values.iter_mut() {
                let med = median_in_place(&mut row.clone());
                row.iter_mut().for_each(|v| *v -= med);
            }
        }
    }
    out
}
