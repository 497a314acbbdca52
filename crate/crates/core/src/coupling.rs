// SPDX-License-Identifier: Apache-2.0

//! Qubit-cavity coupling: dispersive shifts, the single-excitation Jaynes-Cummings doublet,
//! gate sweeps, probe-power dependence and qubit-induced cavity loss.
//!
//! Conventions: cavity frequencies in GHz, qubit frequencies, couplings and shifts in MHz.
//! Detuning is cavity minus qubit, `delta = f_bare - f_q`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LinGrid;
use crate::error::{Error, Result};
use crate::rng::NoiseStream;
use crate::spectra::{self, QubitParams, QubitSpectrum};

/// `|delta| / g` above which the dispersive formulas are used.
pub const DISPERSIVE_RATIO: f64 = 10.0;

/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Two-level dispersive shift `g^2 / delta` (MHz).
pub fn dispersive_shift_two_level(g_mhz: f64, delta_mhz: f64) -> Result<f64> {
    if delta_mhz == 0.0 {
        return Err(Error::Resonance);
    }
    if delta_mhz.abs() < DISPERSIVE_RATIO * g_mhz.abs() {
        log::warn!(
            "|delta| = {} MHz is within {DISPERSIVE_RATIO} g of resonance; g^2/delta is approximate",
            delta_mhz.abs()
        );
    }
    Ok(g_mhz * g_mhz / delta_mhz)
}

/// Multi-level transmon shift `g^2 alpha / (delta (delta + alpha))` (MHz).
pub fn dispersive_shift_transmon(g_mhz: f64, delta_mhz: f64, alpha_mhz: f64) -> Result<f64> {
    if delta_mhz == 0.0 {
        return Err(Error::Resonance);
    }
    if delta_mhz + alpha_mhz == 0.0 {
        return Err(Error::Pole { delta_mhz });
    }
    Ok(g_mhz * g_mhz * alpha_mhz / (delta_mhz * (delta_mhz + alpha_mhz)))
}

/// Coupling `sqrt(chi * delta)` recovered from a measured shift and detuning (MHz).
pub fn coupling_from_shift(chi_mhz: f64, delta_mhz: f64) -> Result<f64> {
    let product = chi_mhz * delta_mhz;
    if !(product > 0.0) {
        return Err(Error::InconsistentSign { product });
    }
    Ok(product.sqrt())
}

/// Eigenfrequencies `(f_plus, f_minus)` in GHz of the 2x2 single-excitation Hamiltonian
/// `[[f_bare, g], [g, f_q]]`.
pub fn anti_crossing(f_bare_ghz: f64, f_q_ghz: f64, g_mhz: f64) -> Result<(f64, f64)> {
    if !(g_mhz > 0.0) || !f_bare_ghz.is_finite() || !f_q_ghz.is_finite() {
        return Err(Error::invalid(
            "anti_crossing needs g > 0 and finite frequencies",
        ));
    }
    let g = g_mhz * 1e-3;
    let mean = 0.5 * (f_bare_ghz + f_q_ghz);
    let half = 0.5 * (f_bare_ghz - f_q_ghz);
    let split = half.hypot(g);
    Ok((mean + split, mean - split))
}

/// Cavity fraction of the `(plus, minus)` branches.
pub fn branch_cavity_weights(f_bare_ghz: f64, f_q_ghz: f64, g_mhz: f64) -> (f64, f64) {
    let d = f_bare_ghz - f_q_ghz;
    let c = d / d.hypot(2.0 * g_mhz * 1e-3);
    let w_plus = 0.5 * (1.0 + c);
    (w_plus, 1.0 - w_plus)
}

/// `true` when `|delta| > 10 g`.
pub fn is_dispersive(g_mhz: f64, delta_mhz: f64) -> bool {
    delta_mhz.abs() > DISPERSIVE_RATIO * g_mhz
}

/// Cavity mode coupled to a qubit with a known spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveSystem {
    pub f_bare_ghz: f64,
    pub g_mhz: f64,
    pub qubit: QubitSpectrum,
    pub kappa_mhz: f64,
    pub gamma_q_mhz: f64,
}

impl DispersiveSystem {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_mhz > 0.0 && self.f_bare_ghz > 0.0) {
            return Err(Error::invalid("need g > 0 and f_bare > 0"));
        }
        if !(self.kappa_mhz > 0.0) || self.gamma_q_mhz < 0.0 {
            return Err(Error::invalid("need kappa > 0 and gamma_q >= 0"));
        }
        Ok(())
    }

    /// `f_bare - f01` in MHz.
    pub fn delta_mhz(&self) -> f64 {
        self.f_bare_ghz * 1e3 - self.qubit.f01
    }

    pub fn is_dispersive(&self) -> bool {
        is_dispersive(self.g_mhz, self.delta_mhz())
    }

    pub fn chi_mhz(&self) -> Result<f64> {
        dispersive_shift_two_level(self.g_mhz, self.delta_mhz())
    }

    /// Critical photon number `(delta / 2g)^2`.
    pub fn critical_photon_number(&self) -> f64 {
        (self.delta_mhz() / (2.0 * self.g_mhz)).powi(2)
    }
}

/// Conversion from generator power to intracavity photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonModel {
    /// Attenuation between the quoted power and the cavity port (dB, positive).
    pub attenuation_db: f64,
    /// Width of the logistic crossover in decades of photon number.
    pub crossover_decades: f64,
}

impl Default for PhotonModel {
    fn default() -> Self {
        Self {
            attenuation_db: 0.0,
            crossover_decades: 0.25,
        }
    }
}

impl PhotonModel {
    /// Steady-state photon number `P / (h f_C kappa)` with `kappa = 2 pi kappa_mhz`.
    pub fn mean_photons(&self, power_dbm: f64, f_c_ghz: f64, kappa_mhz: f64) -> f64 {
        let watts = 1e-3 * 10f64.powf((power_dbm - self.attenuation_db) / 10.0);
        let kappa = std::f64::consts::TAU * kappa_mhz * 1e6;
        watts / (PLANCK * f_c_ghz * 1e9 * kappa)
    }
}

/// Phenomenological two-regime cavity frequency vs probe power (GHz).
///
/// Below the critical photon number the cavity sits at `f_bare + chi`; far above it the qubit
/// saturates and the bare frequency is recovered. The crossover is logistic in
/// `log10(n / n_crit)`, with midpoint at `n = n_crit`.
pub fn power_dependence(
    system: &DispersiveSystem,
    powers_dbm: &[f64],
    photons: &PhotonModel,
) -> Result<Vec<f64>> {
    system.validate()?;
    let chi_ghz = system.chi_mhz()? * 1e-3;
    let n_crit = system.critical_photon_number();
    Ok(powers_dbm
        .iter()
        .map(|&p| {
            let w = saturation_weight(system, p, photons, n_crit);
            system.f_bare_ghz + chi_ghz * (1.0 - w)
        })
        .collect())
}

/// Fraction of the way from the dispersive plateau to the bare plateau at power `p`.
pub fn saturation_weight(
    system: &DispersiveSystem,
    power_dbm: f64,
    photons: &PhotonModel,
    n_crit: f64,
) -> f64 {
    let n = photons.mean_photons(power_dbm, system.f_bare_ghz, system.kappa_mhz);
    let x = (n / n_crit).log10() / photons.crossover_decades;
    1.0 / (1.0 + (-x).exp())
}

/// Internal Q of the cavity once the qubit's loss `(g/delta)^2 gamma_q` is added.
pub fn purcell_induced_cavity_loss(
    g_mhz: f64,
    delta_mhz: f64,
    gamma_q_mhz: f64,
    f_c_ghz: f64,
    q_intrinsic: f64,
) -> Result<f64> {
    if delta_mhz == 0.0 {
        return Err(Error::Resonance);
    }
    if !(q_intrinsic > 0.0 && f_c_ghz > 0.0) || gamma_q_mhz < 0.0 {
        return Err(Error::invalid("need Q > 0, f_C > 0 and gamma_q >= 0"));
    }
    let f_c_mhz = f_c_ghz * 1e3;
    let kappa_ind = (g_mhz / delta_mhz).powi(2) * gamma_q_mhz;
    Ok(f_c_mhz / (f_c_mhz / q_intrinsic + kappa_ind))
}

/// Qubit linewidth that lowers the internal Q from `q_intrinsic` to `q_effective`.
pub fn purcell_required_linewidth(
    g_mhz: f64,
    delta_mhz: f64,
    f_c_ghz: f64,
    q_intrinsic: f64,
    q_effective: f64,
) -> Result<f64> {
    if delta_mhz == 0.0 || g_mhz == 0.0 {
        return Err(Error::invalid("need nonzero g and delta"));
    }
    let f_c_mhz = f_c_ghz * 1e3;
    let extra = f_c_mhz / q_effective - f_c_mhz / q_intrinsic;
    if extra < 0.0 {
        return Err(Error::invalid("effective Q cannot exceed the intrinsic Q"));
    }
    Ok(extra / (g_mhz / delta_mhz).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    MonotoneCubic,
}

/// Tabulated map from gate voltage to the junction parameter (EJ in MHz for a transmon,
/// single-channel transmission for a gatemon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSweepModel {
    pub v_g: Vec<f64>,
    pub values: Vec<f64>,
    pub interpolation: Interpolation,
}

impl GateSweepModel {
    pub fn new(v_g: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if v_g.len() != values.len() || v_g.len() < 2 {
            return Err(Error::invalid(
                "sweep table needs >= 2 rows of equal length",
            ));
        }
        if v_g.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("V_G samples must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("sweep values must be finite and >= 0"));
        }
        Ok(Self {
            v_g,
            values,
            interpolation,
        })
    }

    /// Smooth pinch-off ramp with bounded random-walk wiggles, as seen in nanowire junctions.
    ///
    /// `max_value` is the open-channel plateau; the ramp is a logistic centred at `v_pinch`
    /// with width `v_width`. Values below 0.1% of the plateau are clamped to exact zero so the
    /// low-voltage end is a true pinch-off.
    pub fn nanowire_like(
        seed: u64,
        v_range: (f64, f64),
        n: usize,
        max_value: f64,
        v_pinch: f64,
        v_width: f64,
        wiggle: f64,
    ) -> Result<Self> {
        if n < 2 || !(v_range.1 > v_range.0) || !(v_width > 0.0) {
            return Err(Error::invalid("bad nanowire profile parameters"));
        }
        let mut rng = NoiseStream::new(seed);
        let mut walk = 0.0f64;
        let step = wiggle / (n as f64).sqrt() * 2.0;
        let v_g: Vec<f64> = (0..n)
            .map(|i| v_range.0 + (v_range.1 - v_range.0) * i as f64 / (n - 1) as f64)
            .collect();
        let values = v_g
            .iter()
            .map(|&v| {
                walk = (walk + step * rng.normal()).clamp(-wiggle, wiggle);
                let ramp = 1.0 / (1.0 + (-(v - v_pinch) / v_width).exp());
                if ramp < 1e-3 {
                    0.0
                } else {
                    (max_value * ramp * (1.0 + walk)).clamp(0.0, max_value)
                }
            })
            .collect();
        Self::new(v_g, values, Interpolation::MonotoneCubic)
    }

    pub fn eval(&self, v: f64) -> f64 {
        let xs = &self.v_g;
        let ys = &self.values;
        let n = xs.len();
        if v <= xs[0] {
            return ys[0];
        }
        if v >= xs[n - 1] {
            return ys[n - 1];
        }
        let k = xs.partition_point(|x| *x <= v) - 1;
        let h = xs[k + 1] - xs[k];
        let t = (v - xs[k]) / h;
        match self.interpolation {
            Interpolation::Linear => ys[k] + t * (ys[k + 1] - ys[k]),
            Interpolation::MonotoneCubic => {
                let d = pchip_slopes(xs, ys);
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                (h00 * ys[k] + h10 * h * d[k] + h01 * ys[k + 1] + h11 * h * d[k + 1]).max(0.0)
            }
        }
    }
}

/// Fritsch-Carlson slopes for shape-preserving Hermite interpolation.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let delta: Vec<f64> = (0..n - 1)
        .map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]))
        .collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] <= 0.0 {
            d[k] = 0.0;
        } else {
            let h0 = xs[k] - xs[k - 1];
            let h1 = xs[k + 1] - xs[k];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(xs[1] - xs[0], xs[2] - xs[1], delta[0], delta[1]);
    d[n - 1] = end(
        xs[n - 1] - xs[n - 2],
        xs[n - 2] - xs[n - 3],
        delta[n - 2],
        delta[n - 3],
    );
    d
}

/// Which qubit model turns a sweep-table value into a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSolver {
    /// Table values are EJ in MHz.
    Transmon {
        ec_mhz: f64,
        #[serde(default)]
        ng: f64,
        #[serde(default = "default_n_cut")]
        n_cut: usize,
    },
    /// Table values are the transmission of a single channel.
    Gatemon {
        ec_mhz: f64,
        gap_mhz: f64,
        #[serde(default = "default_grid_n")]
        grid_n: usize,
    },
}

fn default_n_cut() -> usize {
    spectra::DEFAULT_N_CUT
}

fn default_grid_n() -> usize {
    spectra::DEFAULT_GRID_N
}

impl SweepSolver {
    pub fn params_at(&self, value: f64) -> QubitParams {
        match *self {
            SweepSolver::Transmon { ec_mhz, ng, .. } => QubitParams::transmon(ec_mhz, value, ng),
            SweepSolver::Gatemon {
                ec_mhz, gap_mhz, ..
            } => QubitParams::gatemon(ec_mhz, gap_mhz, vec![value]),
        }
    }

    pub fn solve(&self, value: f64) -> Result<QubitSpectrum> {
        let p = self.params_at(value);
        match *self {
            SweepSolver::Transmon { n_cut, .. } => spectra::transmon_levels(&p, n_cut),
            SweepSolver::Gatemon { grid_n, .. } => spectra::gatemon_levels(&p, grid_n),
        }
    }
}

/// Bare cavity and its coupling to the qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityCoupling {
    pub f_bare_ghz: f64,
    pub g_mhz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    PinchOff,
    Dispersive,
    Resonant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub v_g: f64,
    /// Junction parameter at this gate voltage (EJ in MHz or transmission).
    pub junction_value: f64,
    pub f_q_mhz: f64,
    pub alpha_mhz: f64,
    pub chi_mhz: f64,
    pub f_c_ghz: f64,
    pub f_plus_ghz: f64,
    pub f_minus_ghz: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub f_bare_ghz: f64,
    pub g_mhz: f64,
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub const CSV_HEADER: [&'static str; 6] = [
        "V_G",
        "f_Q_MHz",
        "chi_MHz",
        "f_C_GHz",
        "f_plus_GHz",
        "f_minus_GHz",
    ];

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(Self::CSV_HEADER).map_err(io)?;
        for r in &self.records {
            out.write_record(
                [
                    r.v_g,
                    r.f_q_mhz,
                    r.chi_mhz,
                    r.f_c_ghz,
                    r.f_plus_ghz,
                    r.f_minus_ghz,
                ]
                .iter()
                .map(|v| format!("{v}")),
            )
            .map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn sweep_point(
    v_g: f64,
    value: f64,
    solver: &SweepSolver,
    cavity: &CavityCoupling,
) -> Result<SweepRecord> {
    let params = solver.params_at(value);
    params.validate()?;
    if params.is_pinched_off() {
        return Ok(SweepRecord {
            v_g,
            junction_value: value,
            f_q_mhz: 0.0,
            alpha_mhz: 0.0,
            chi_mhz: 0.0,
            f_c_ghz: cavity.f_bare_ghz,
            f_plus_ghz: cavity.f_bare_ghz,
            f_minus_ghz: 0.0,
            regime: Regime::PinchOff,
        });
    }
    let spec = solver.solve(value)?;
    let f_q_ghz = spec.f01 * 1e-3;
    let delta = cavity.f_bare_ghz * 1e3 - spec.f01;
    let (f_plus, f_minus) = anti_crossing(cavity.f_bare_ghz, f_q_ghz, cavity.g_mhz)?;
    let (regime, f_c) = if is_dispersive(cavity.g_mhz, delta) {
        let chi = dispersive_shift_two_level(cavity.g_mhz, delta)?;
        (Regime::Dispersive, cavity.f_bare_ghz + chi * 1e-3)
    } else {
        let (w_plus, _) = branch_cavity_weights(cavity.f_bare_ghz, f_q_ghz, cavity.g_mhz);
        let f_c = if w_plus >= 0.5 { f_plus } else { f_minus };
        (Regime::Resonant, f_c)
    };
    Ok(SweepRecord {
        v_g,
        junction_value: value,
        f_q_mhz: spec.f01,
        alpha_mhz: spec.alpha,
        chi_mhz: (f_c - cavity.f_bare_ghz) * 1e3,
        f_c_ghz: f_c,
        f_plus_ghz: f_plus,
        f_minus_ghz: f_minus,
        regime,
    })
}

/// Cavity response along a gate sweep.
///
/// Points are independent and evaluated in parallel; the output is ordered as `v_points`.
pub fn gate_sweep(
    model: &GateSweepModel,
    v_points: &[f64],
    solver: &SweepSolver,
    cavity: &CavityCoupling,
) -> Result<SweepResult> {
    if !(cavity.g_mhz > 0.0 && cavity.f_bare_ghz > 0.0) {
        return Err(Error::invalid("need g > 0 and f_bare > 0"));
    }
    let records = v_points
        .par_iter()
        .map(|&v| {
            sweep_point(v, model.eval(v), solver, cavity).map_err(|e| Error::GatePoint {
                v_g: v,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        f_bare_ghz: cavity.f_bare_ghz,
        g_mhz: cavity.g_mhz,
        records,
    })
}

/// Source of the gate-voltage to junction-parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateProfile {
    Table {
        v_g: Vec<f64>,
        values: Vec<f64>,
        #[serde(default = "default_interpolation")]
        interpolation: Interpolation,
    },
    Nanowire {
        seed: u64,
        v_min: f64,
        v_max: f64,
        points: usize,
        max_value: f64,
        v_pinch: f64,
        v_width: f64,
        #[serde(default)]
        wiggle: f64,
    },
    /// Two-column CSV `V_G,<value>`; must be loaded into [`GateProfile::Table`] before use.
    File {
        path: std::path::PathBuf,
        #[serde(default = "default_interpolation")]
        interpolation: Interpolation,
    },
}

fn default_interpolation() -> Interpolation {
    Interpolation::MonotoneCubic
}

impl GateProfile {
    pub fn model(&self) -> Result<GateSweepModel> {
        match self {
            GateProfile::Table {
                v_g,
                values,
                interpolation,
            } => GateSweepModel::new(v_g.clone(), values.clone(), *interpolation),
            GateProfile::Nanowire {
                seed,
                v_min,
                v_max,
                points,
                max_value,
                v_pinch,
                v_width,
                wiggle,
            } => GateSweepModel::nanowire_like(
                *seed,
                (*v_min, *v_max),
                *points,
                *max_value,
                *v_pinch,
                *v_width,
                *wiggle,
            ),
            GateProfile::File { path, .. } => Err(Error::invalid(format!(
                "sweep table {} has not been loaded",
                path.display()
            ))),
        }
    }
}

/// Everything needed to run [`gate_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSweepSpec {
    pub profile: GateProfile,
    pub solver: SweepSolver,
    pub cavity: CavityCoupling,
    /// Gate voltages to evaluate (V).
    pub v_g: LinGrid,
}

impl GateSweepSpec {
    pub fn run(&self) -> Result<SweepResult> {
        self.v_g.validate()?;
        gate_sweep(
            &self.profile.model()?,
            &self.v_g.values(),
            &self.solver,
            &self.cavity,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Matrix2;

    #[test]
    fn two_level_shift_values() {
        assert_relative_eq!(dispersive_shift_two_level(100.0, 1000.0).unwrap(), 10.0);
        assert!(dispersive_shift_two_level(100.0, -1000.0).unwrap() < 0.0);
        assert!(dispersive_shift_two_level(100.0, 1e12).unwrap() < 1e-7);
        assert!(matches!(
            dispersive_shift_two_level(100.0, 0.0),
            Err(Error::Resonance)
        ));
    }

    #[test]
    fn transmon_shift_values() {
        let chi = dispersive_shift_transmon(100.0, 1000.0, -172.0).unwrap();
        assert_relative_eq!(chi, 100.0f64.powi(2) * -172.0 / (1000.0 * 828.0));
        // Two-level limit.
        let far = dispersive_shift_transmon(100.0, 1000.0, -1e6).unwrap();
        assert!((far - 10.0).abs() / 10.0 < 0.01);
        // Pole at delta = -alpha and sign flip across it.
        assert!(matches!(
            dispersive_shift_transmon(100.0, 172.0, -172.0),
            Err(Error::Pole { .. })
        ));
        let below = dispersive_shift_transmon(100.0, 171.0, -172.0).unwrap();
        let above = dispersive_shift_transmon(100.0, 173.0, -172.0).unwrap();
        assert!(below.signum() != above.signum());
    }

    #[test]
    fn coupling_recovery() {
        assert_relative_eq!(coupling_from_shift(10.0, 1000.0).unwrap(), 100.0);
        assert_relative_eq!(coupling_from_shift(-5.0, -500.0).unwrap(), 50.0);
        assert!(matches!(
            coupling_from_shift(5.0, -500.0),
            Err(Error::InconsistentSign { .. })
        ));
        assert!(coupling_from_shift(0.0, 500.0).is_err());
    }

    #[test]
    fn anti_crossing_matches_matrix_eigenvalues() {
        for &(fb, fq, g) in &[(5.3, 5.1, 100.0), (5.3, 5.3, 80.0), (5.0, 6.2, 15.0)] {
            let m = Matrix2::new(fb, g * 1e-3, g * 1e-3, fq);
            let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            let (p, n) = anti_crossing(fb, fq, g).unwrap();
            assert_relative_eq!(p, ev[1], max_relative = 1e-14);
            assert_relative_eq!(n, ev[0], max_relative = 1e-14);
        }
    }

    #[test]
    fn splitting_at_resonance() {
        let (p, m) = anti_crossing(5.2816, 5.2816, 100.0).unwrap();
        assert!(((p - m) - 0.2).abs() < 1e-10);
        assert!(anti_crossing(5.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn asymptote_far_from_resonance() {
        let (p, m) = anti_crossing(5.3, 4.0, 50.0).unwrap();
        let chi = 0.05f64.powi(2) / 1.3;
        assert!((p - 5.3).abs() <= chi * 1.0001);
        assert!((m - 4.0).abs() <= chi * 1.0001);
    }

    #[test]
    fn purcell_loss() {
        let q = purcell_induced_cavity_loss(100.0, 1000.0, 0.0, 5.28, 27_000.0).unwrap();
        assert_relative_eq!(q, 27_000.0, max_relative = 1e-12);
        let q1 = purcell_induced_cavity_loss(100.0, 1000.0, 10.0, 5.28, 27_000.0).unwrap();
        let q2 = purcell_induced_cavity_loss(100.0, 1000.0, 20.0, 5.28, 27_000.0).unwrap();
        assert!(q2 < q1 && q1 < 27_000.0);
        assert!(purcell_induced_cavity_loss(100.0, 0.0, 10.0, 5.28, 27_000.0).is_err());
    }

    #[test]
    fn purcell_budget_to_8300() {
        let gamma = purcell_required_linewidth(100.0, 1000.0, 5.2816, 27_000.0, 8_300.0).unwrap();
        // (f/8300 - f/27000) / 0.01 with f = 5281.6 MHz
        let expected = (5281.6 / 8300.0 - 5281.6 / 27_000.0) / 0.01;
        assert_relative_eq!(gamma, expected, max_relative = 1e-12);
        let q = purcell_induced_cavity_loss(100.0, 1000.0, gamma, 5.2816, 27_000.0).unwrap();
        assert_relative_eq!(q, 8_300.0, max_relative = 1e-12);
    }

    #[test]
    fn sweep_table_validation() {
        assert!(
            GateSweepModel::new(vec![0.0, 0.0], vec![1.0, 2.0], Interpolation::Linear).is_err()
        );
        assert!(GateSweepModel::new(vec![0.0, 1.0], vec![1.0], Interpolation::Linear).is_err());
        assert!(
            GateSweepModel::new(vec![0.0, 1.0], vec![1.0, -2.0], Interpolation::Linear).is_err()
        );
    }

    #[test]
    fn pchip_preserves_monotonicity() {
        let m = GateSweepModel::new(
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            vec![0.0, 0.0, 1.0, 5.0, 5.1],
            Interpolation::MonotoneCubic,
        )
        .unwrap();
        let mut prev = -1.0;
        for i in 0..=400 {
            let y = m.eval(i as f64 * 0.01);
            assert!(y >= prev - 1e-12);
            prev = y;
        }
        assert_eq!(m.eval(2.0), 1.0);
        assert_eq!(m.eval(-3.0), 0.0);
    }

    #[test]
    fn nanowire_profile_is_seeded_and_bounded() {
        let a = GateSweepModel::nanowire_like(9, (0.0, 10.0), 101, 9000.0, 4.0, 0.5, 0.1).unwrap();
        let b = GateSweepModel::nanowire_like(9, (0.0, 10.0), 101, 9000.0, 4.0, 0.5, 0.1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values[0], 0.0);
        assert!(a.values.iter().all(|v| (0.0..=9000.0).contains(v)));
    }
}
