// SPDX-License-Identifier: Apache-2.0

//! Qubit spectra and cavity eigenmodes.
//!
//! Energies are carried as frequencies in MHz (E/h). Two junction models are supported:
//!
//! * tunnel junction (transmon): `H = 4 EC (n - ng)^2 - EJ/2 sum(|n><n+1| + h.c.)` in the
//!   charge basis `n in [-n_cut, n_cut]`;
//! * few-channel Andreev junction (gatemon): `H = 4 EC (n - ng)^2 + U(phi)` with
//!   `U(phi) = -gap * sum_i sqrt(1 - T_i sin^2(phi/2))`, discretised by Fourier collocation on
//!   an odd periodic phase grid. The potential enters the charge basis through its discrete
//!   Fourier coefficients, which makes the representation spectrally accurate.
//!
//! Both solvers run a refinement check (basis doubled) and fail with
//! [`Error::Truncation`] when f01 moves by more than [`CONVERGENCE_MHZ`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default charge cutoff for the transmon solver (matrix dimension 61).
pub const DEFAULT_N_CUT: usize = 30;
/// Default number of phase-grid points for the gatemon solver.
pub const DEFAULT_GRID_N: usize = 201;
/// Largest f01 change tolerated under basis refinement.
pub const CONVERGENCE_MHZ: f64 = 0.01;
/// Number of lowest levels kept in a [`QubitSpectrum`].
pub const LEVELS_KEPT: usize = 10;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Josephson element of a qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Junction {
    /// Insulating tunnel barrier with Josephson energy `EJ`.
    Tunnel { ej_mhz: f64 },
    /// Semiconductor weak link described by its superconducting gap and channel transmissions.
    Andreev {
        gap_mhz: f64,
        transmissions: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    pub ec_mhz: f64,
    #[serde(default)]
    pub ng: f64,
    pub junction: Junction,
}

impl QubitParams {
    pub fn transmon(ec_mhz: f64, ej_mhz: f64, ng: f64) -> Self {
        Self {
            ec_mhz,
            ng,
            junction: Junction::Tunnel { ej_mhz },
        }
    }

    pub fn gatemon(ec_mhz: f64, gap_mhz: f64, transmissions: Vec<f64>) -> Self {
        Self {
            ec_mhz,
            ng: 0.0,
            junction: Junction::Andreev {
                gap_mhz,
                transmissions,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ec_mhz > 0.0 && self.ec_mhz.is_finite()) {
            return Err(Error::invalid(format!(
                "EC must be > 0, got {}",
                self.ec_mhz
            )));
        }
        if !self.ng.is_finite() {
            return Err(Error::invalid("ng must be finite"));
        }
        match &self.junction {
            Junction::Tunnel { ej_mhz } => {
                if !(*ej_mhz >= 0.0 && ej_mhz.is_finite()) {
                    return Err(Error::invalid(format!("EJ must be >= 0, got {ej_mhz}")));
                }
            }
            Junction::Andreev {
                gap_mhz,
                transmissions,
            } => {
                if !(*gap_mhz >= 0.0 && gap_mhz.is_finite()) {
                    return Err(Error::invalid(format!("gap must be >= 0, got {gap_mhz}")));
                }
                if transmissions.is_empty() {
                    return Err(Error::invalid(
                        "at least one transmission channel is required",
                    ));
                }
                if let Some(t) = transmissions.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                    return Err(Error::invalid(format!("transmission {t} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }

    /// `true` when the junction carries no supercurrent (EJ = 0 or every T_i = 0).
    pub fn is_pinched_off(&self) -> bool {
        match &self.junction {
            Junction::Tunnel { ej_mhz } => *ej_mhz == 0.0,
            Junction::Andreev {
                gap_mhz,
                transmissions,
            } => *gap_mhz == 0.0 || transmissions.iter().all(|t| *t == 0.0),
        }
    }
}

/// Lowest eigenenergies of a qubit and the derived transition frequencies (MHz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitSpectrum {
    pub levels: Vec<f64>,
    pub f01: f64,
    pub f12: f64,
    pub f02: f64,
    pub alpha: f64,
}

impl QubitSpectrum {
    fn from_levels(mut levels: Vec<f64>) -> Self {
        levels.sort_by(f64::total_cmp);
        levels.truncate(LEVELS_KEPT);
        let f01 = levels[1] - levels[0];
        let f12 = levels[2] - levels[1];
        Self {
            f01,
            f12,
            f02: f01 + f12,
            alpha: f12 - f01,
            levels,
        }
    }

    /// JSON document `{units, levels, f01, f12, alpha}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "units": "MHz",
            "levels": self.levels,
            "f01": self.f01,
            "f12": self.f12,
            "f02": self.f02,
            "alpha": self.alpha,
        })
    }
}

fn eigenvalues(h: DMatrix<f64>) -> Result<Vec<f64>> {
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver(
            "Hamiltonian has non-finite entries".into(),
        ));
    }
    let vals = h.symmetric_eigenvalues();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("eigenvalues did not converge".into()));
    }
    Ok(vals.iter().copied().collect())
}

fn transmon_hamiltonian(ec: f64, ej: f64, ng: f64, n_cut: usize) -> DMatrix<f64> {
    let dim = 2 * n_cut + 1;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let n = i as f64 - n_cut as f64;
        h[(i, i)] = 4.0 * ec * (n - ng).powi(2);
        if i + 1 < dim {
            h[(i, i + 1)] = -0.5 * ej;
            h[(i + 1, i)] = -0.5 * ej;
        }
    }
    h
}

fn transmon_spectrum_unchecked(ec: f64, ej: f64, ng: f64, n_cut: usize) -> Result<QubitSpectrum> {
    eigenvalues(transmon_hamiltonian(ec, ej, ng, n_cut)).map(QubitSpectrum::from_levels)
}

/// Exact transmon spectrum from the truncated charge-basis Hamiltonian.
pub fn transmon_levels(p: &QubitParams, n_cut: usize) -> Result<QubitSpectrum> {
    p.validate()?;
    let Junction::Tunnel { ej_mhz } = p.junction else {
        return Err(Error::invalid(
            "transmon_levels needs a tunnel junction (EJ)",
        ));
    };
    if n_cut < 10 {
        return Err(Error::invalid(format!("n_cut must be >= 10, got {n_cut}")));
    }
    let spec = transmon_spectrum_unchecked(p.ec_mhz, ej_mhz, p.ng, n_cut)?;
    let refined = transmon_spectrum_unchecked(p.ec_mhz, ej_mhz, p.ng, 2 * n_cut)?;
    let shift = (spec.f01 - refined.f01).abs();
    if shift >= CONVERGENCE_MHZ {
        return Err(Error::Truncation {
            solver: "transmon",
            shift_mhz: shift,
        });
    }
    Ok(spec)
}

/// Junction potential `-gap * sum_i sqrt(1 - T_i sin^2(phi/2))` (MHz).
pub fn andreev_potential(phi: f64, gap_mhz: f64, transmissions: &[f64]) -> f64 {
    let s2 = (0.5 * phi).sin().powi(2);
    -gap_mhz
        * transmissions
            .iter()
            .map(|t| (1.0 - t * s2).max(0.0).sqrt())
            .sum::<f64>()
}

fn gatemon_hamiltonian(
    ec: f64,
    ng: f64,
    gap: f64,
    transmissions: &[f64],
    grid_n: usize,
) -> DMatrix<f64> {
    let half = (grid_n - 1) / 2;
    let step = std::f64::consts::TAU / grid_n as f64;
    let potential: Vec<f64> = (0..grid_n)
        .map(|j| andreev_potential(j as f64 * step, gap, transmissions))
        .collect();
    // U is even in phi, so its discrete Fourier coefficients are real cosine sums.
    let coeff: Vec<f64> = (0..grid_n)
        .map(|d| {
            potential
                .iter()
                .enumerate()
                .map(|(j, u)| u * (d as f64 * j as f64 * step).cos())
                .sum::<f64>()
                / grid_n as f64
        })
        .collect();
    let mut h = DMatrix::zeros(grid_n, grid_n);
    for i in 0..grid_n {
        let n = i as f64 - half as f64;
        for k in 0..grid_n {
            h[(i, k)] = coeff[i.abs_diff(k)];
        }
        h[(i, i)] += 4.0 * ec * (n - ng).powi(2);
    }
    h
}

fn gatemon_spectrum_unchecked(
    ec: f64,
    ng: f64,
    gap: f64,
    transmissions: &[f64],
    grid_n: usize,
) -> Result<QubitSpectrum> {
    eigenvalues(gatemon_hamiltonian(ec, ng, gap, transmissions, grid_n))
        .map(QubitSpectrum::from_levels)
}

fn check_grid(grid_n: usize) -> Result<()> {
    if grid_n < 101 || grid_n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "grid_n must be odd and >= 101, got {grid_n}"
        )));
    }
    Ok(())
}

/// Gatemon spectrum on an odd periodic phase grid of `grid_n` points.
///
/// A junction with every transmission at zero has a flat potential; the free-rotor spectrum
/// is returned in that case.
pub fn gatemon_levels(p: &QubitParams, grid_n: usize) -> Result<QubitSpectrum> {
    p.validate()?;
    let Junction::Andreev {
        gap_mhz,
        ref transmissions,
    } = p.junction
    else {
        return Err(Error::invalid(
            "gatemon_levels needs an Andreev junction (gap, T_i)",
        ));
    };
    check_grid(grid_n)?;
    if p.is_pinched_off() {
        log::warn!("flat junction potential: returning the free-rotor spectrum");
    }
    let spec = gatemon_spectrum_unchecked(p.ec_mhz, p.ng, gap_mhz, transmissions, grid_n)?;
    let refined =
        gatemon_spectrum_unchecked(p.ec_mhz, p.ng, gap_mhz, transmissions, 2 * grid_n + 1)?;
    let shift = (spec.f01 - refined.f01).abs();
    if shift >= CONVERGENCE_MHZ {
        return Err(Error::Truncation {
            solver: "gatemon",
            shift_mhz: shift,
        });
    }
    Ok(spec)
}

/// Dispatches on the junction kind using the default basis sizes.
pub fn qubit_levels(p: &QubitParams) -> Result<QubitSpectrum> {
    match p.junction {
        Junction::Tunnel { .. } => transmon_levels(p, DEFAULT_N_CUT),
        Junction::Andreev { .. } => gatemon_levels(p, DEFAULT_GRID_N),
    }
}

/// Anharmonicity of a single-channel gatemon at `ng = 0`.
pub fn single_channel_alpha(ec_mhz: f64, gap_mhz: f64, transmission: f64) -> Result<f64> {
    gatemon_spectrum_unchecked(ec_mhz, 0.0, gap_mhz, &[transmission], DEFAULT_GRID_N)
        .map(|s| s.alpha)
}

/// Single-channel transmission that reproduces a measured anharmonicity.
///
/// Bisects `alpha(T) - alpha_target` on `T in [0, 1]`, where `alpha(T)` comes from the gatemon
/// solver at `ng = 0`. Fails with [`Error::NoSolution`] when the target lies outside the band
/// `[alpha(T=0), alpha(T=1)]` spanned by the solver.
pub fn infer_transmission(alpha_mhz: f64, ec_mhz: f64, gap_mhz: f64) -> Result<f64> {
    if !(ec_mhz > 0.0 && gap_mhz > 0.0) || !alpha_mhz.is_finite() {
        return Err(Error::invalid("need EC > 0, gap > 0 and a finite alpha"));
    }
    let alpha_at = |t: f64| single_channel_alpha(ec_mhz, gap_mhz, t);
    let mut lo = 0.0;
    let mut hi = 1.0;
    let f_lo = alpha_at(lo)? - alpha_mhz;
    let f_hi = alpha_at(hi)? - alpha_mhz;
    // Targets within 0.5 MHz of a band edge resolve to that edge.
    const EDGE_TOL: f64 = 0.5;
    if f_lo.abs() <= EDGE_TOL {
        return Ok(lo);
    }
    if f_hi.abs() <= EDGE_TOL {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        let (a, b) = (f_lo + alpha_mhz, f_hi + alpha_mhz);
        return Err(Error::NoSolution {
            target_mhz: alpha_mhz,
            lo_mhz: a.min(b),
            hi_mhz: a.max(b),
        });
    }
    let rising = f_hi > f_lo;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let f_mid = alpha_at(mid)? - alpha_mhz;
        if (f_mid > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rectangular cavity with side lengths in metres and a mode triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityGeometry {
    pub length_a: f64,
    pub width_b: f64,
    pub height_d: f64,
    pub mode: (u32, u32, u32),
}

impl CavityGeometry {
    /// Geometry of the copper cavity: 70 mm x 5 mm x 30 mm, TE101.
    pub fn copper_te101() -> Self {
        Self {
            length_a: 0.070,
            width_b: 0.005,
            height_d: 0.030,
            mode: (1, 0, 1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length_a", self.length_a),
            ("width_b", self.width_b),
            ("height_d", self.height_d),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        let (m, n, p) = self.mode;
        let zeros = [m, n, p].iter().filter(|i| **i == 0).count();
        if zeros > 1 {
            return Err(Error::invalid(format!(
                "mode ({m},{n},{p}) has more than one zero index"
            )));
        }
        Ok(())
    }
}

/// Eigenfrequency `(c/2) sqrt((m/a)^2 + (n/b)^2 + (p/d)^2)` in GHz.
pub fn te_mode_frequency(geom: &CavityGeometry) -> Result<f64> {
    geom.validate()?;
    let (m, n, p) = geom.mode;
    let k2 = (m as f64 / geom.length_a).powi(2)
        + (n as f64 / geom.width_b).powi(2)
        + (p as f64 / geom.height_d).powi(2);
    Ok(0.5 * SPEED_OF_LIGHT * k2.sqrt() * 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const EC: f64 = 190.0;

    #[test]
    fn zero_ej_is_diagonal() {
        let s = transmon_levels(&QubitParams::transmon(EC, 0.0, 0.0), DEFAULT_N_CUT).unwrap();
        assert_relative_eq!(s.f01, 4.0 * EC, max_relative = 1e-12);
        assert_relative_eq!(s.levels[0], 0.0, epsilon = 1e-9);
        assert_eq!(s.f02, s.f01 + s.f12);
    }

    #[test]
    fn small_cutoff_rejected() {
        let err = transmon_levels(&QubitParams::transmon(EC, 10.0 * EC, 0.0), 5).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn truncation_detected_for_huge_ej() {
        // EJ/EC = 1e5 puts the ground state far outside |n| <= 10.
        let err = transmon_levels(&QubitParams::transmon(EC, 1e5 * EC, 0.0), 10).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }), "{err}");
    }

    #[test]
    fn wrong_junction_kind() {
        let p = QubitParams::gatemon(EC, 50.0 * EC, vec![0.5]);
        assert!(transmon_levels(&p, 30).is_err());
        let q = QubitParams::transmon(EC, 50.0 * EC, 0.0);
        assert!(gatemon_levels(&q, 201).is_err());
    }

    #[test]
    fn gatemon_grid_must_be_odd() {
        let p = QubitParams::gatemon(EC, 50.0 * EC, vec![0.5]);
        assert!(gatemon_levels(&p, 200).is_err());
        assert!(gatemon_levels(&p, 99).is_err());
    }

    #[test]
    fn transmissions_validated() {
        let p = QubitParams::gatemon(EC, 50.0 * EC, vec![1.2]);
        assert!(p.validate().is_err());
        let p = QubitParams::gatemon(EC, 50.0 * EC, vec![]);
        assert!(p.validate().is_err());
    }

    #[test]
    fn flat_potential_gives_free_rotor() {
        let p = QubitParams::gatemon(EC, 50.0 * EC, vec![0.0]);
        let s = gatemon_levels(&p, DEFAULT_GRID_N).unwrap();
        assert_relative_eq!(s.f01, 4.0 * EC, max_relative = 1e-9);
        assert!(s.f12.abs() < 1e-6);
    }

    #[test]
    fn levels_ascending() {
        let s = qubit_levels(&QubitParams::transmon(EC, 40.0 * EC, 0.2)).unwrap();
        assert!(s.levels.windows(2).all(|w| w[0] < w[1]));
        let g = qubit_levels(&QubitParams::gatemon(EC, 200.0 * EC, vec![0.6])).unwrap();
        assert!(g.levels.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn spectrum_json_fields() {
        let s = qubit_levels(&QubitParams::transmon(EC, 40.0 * EC, 0.0)).unwrap();
        let v = s.to_json();
        assert_eq!(v["units"], "MHz");
        assert!(v["levels"].as_array().unwrap().len() == LEVELS_KEPT);
        assert_eq!(v["alpha"].as_f64().unwrap(), s.alpha);
    }

    #[test]
    fn te101_copper_cavity() {
        let f = te_mode_frequency(&CavityGeometry::copper_te101()).unwrap();
        assert!((f - 5.443).abs() / 5.443 < 0.005, "f = {f}");
    }

    #[test]
    fn cubic_cavity_closed_form() {
        let a = 0.04;
        let g = CavityGeometry {
            length_a: a,
            width_b: 0.01,
            height_d: a,
            mode: (1, 0, 1),
        };
        let f = te_mode_frequency(&g).unwrap();
        assert_relative_eq!(
            f,
            SPEED_OF_LIGHT / (2f64.sqrt() * a) * 1e-9,
            max_relative = 1e-15
        );
    }

    #[test]
    fn invalid_mode_rejected() {
        let mut g = CavityGeometry::copper_te101();
        g.mode = (1, 0, 0);
        assert!(te_mode_frequency(&g).is_err());
        g.mode = (1, 0, 1);
        g.width_b = 0.0;
        assert!(te_mode_frequency(&g).is_err());
    }
}
