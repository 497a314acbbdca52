// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic datasets: reflection traces, power and gate maps, two-tone maps, Rabi and
//! Lorentzian records.
//!
//! Noise is additive white Gaussian. `snr_db` is referenced to the signal scale of each
//! dataset: `|A|` for reflection data (complex noise power `|A|^2 10^(-snr/10)`, split evenly
//! between quadratures), the dip depth for Lorentzian and two-tone data, and the oscillation
//! amplitude for Rabi records. Row `i` of a map draws from stream `split(seed, i)`; 1D
//! datasets use stream `split(seed, 0)`. Complex samples draw the real part first.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::coupling::{
    self, branch_cavity_weights, purcell_induced_cavity_loss, DispersiveSystem, GateSweepSpec,
    PhotonModel, Regime, SweepResult,
};
use crate::data::{ComplexTrace, LinGrid, Map2D, Series};
use crate::error::{Error, Result};
use crate::estimators::{LorentzianParams, RabiParams, ReflectionParams};
use crate::rng::NoiseStream;
use crate::spectra::{qubit_levels, QubitParams};

/// Default number of samples of a reflection trace.
pub const DEFAULT_TRACE_POINTS: usize = 501;
/// Default reflection window, in loaded linewidths.
pub const DEFAULT_SPAN_LINEWIDTHS: f64 = 12.0;
/// Two-photon dip depth relative to the single-photon dip.
pub const DEFAULT_TWO_PHOTON_RATIO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    /// `None` produces a noiseless dataset.
    #[serde(default)]
    pub snr_db: Option<f64>,
    pub dataset: DatasetSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    ReflectionTrace(ReflectionSynth),
    PowerMap(PowerMapSynth),
    GateMap(GateMapSynth),
    TwoToneMap(TwoToneSynth),
    RabiTrace(RabiSynth),
    LorentzianTrace(LorentzianSynth),
}

impl DatasetSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            DatasetSpec::ReflectionTrace(_) => "reflection_trace",
            DatasetSpec::PowerMap(_) => "power_map",
            DatasetSpec::GateMap(_) => "gate_map",
            DatasetSpec::TwoToneMap(_) => "two_tone_map",
            DatasetSpec::RabiTrace(_) => "rabi_trace",
            DatasetSpec::LorentzianTrace(_) => "lorentzian_trace",
        }
    }
}

/// Noise settings shared by all generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl Noise {
    pub fn noiseless() -> Self {
        Self {
            snr_db: None,
            seed: 0,
        }
    }

    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self {
            snr_db: Some(snr_db),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.snr_db {
            Some(s) if !s.is_finite() => {
                Err(Error::invalid(format!("SNR must be finite, got {s}")))
            }
            _ => Ok(()),
        }
    }

    /// Noise standard deviation for a signal of amplitude `scale`.
    fn sigma(&self, scale: f64) -> f64 {
        match self.snr_db {
            Some(snr) => scale.abs() * 10f64.powf(-snr / 20.0),
            None => 0.0,
        }
    }

    fn stream(&self, index: u64) -> NoiseStream {
        NoiseStream::split(self.seed, index)
    }
}

fn one() -> f64 {
    1.0
}

fn complex_noise(rng: &mut NoiseStream, sigma_c: f64) -> Complex64 {
    if sigma_c == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let s = sigma_c / std::f64::consts::SQRT_2;
    let re = s * rng.normal();
    let im = s * rng.normal();
    Complex64::new(re, im)
}

/// One Lorentzian branch of a cavity response: centre, total and external linewidths (GHz).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Branch {
    f_ghz: f64,
    kappa: f64,
    kappa_c: f64,
}

/// `A e^{-2 pi i f tau} [1 - sum_b 2 (kappa_c,b / kappa_b) e^{i theta} / |cos theta|
/// / (1 + 2i (f - f_b) / kappa_b)]`; with one branch this is the reflection fit model.
fn cavity_response(
    f: f64,
    a: Complex64,
    theta: f64,
    delay_ns: f64,
    branches: &[Branch],
) -> Complex64 {
    let rot = Complex64::from_polar(1.0, theta) / theta.cos().abs();
    let sum: Complex64 = branches
        .iter()
        .map(|b| {
            2.0 * b.kappa_c / b.kappa * rot / Complex64::new(1.0, 2.0 * (f - b.f_ghz) / b.kappa)
        })
        .sum();
    a * Complex64::from_polar(1.0, -std::f64::consts::TAU * f * delay_ns) * (1.0 - sum)
}

/// Truth of a single reflection trace. Give exactly one of `ql` and `qi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectionSynth {
    pub f_r_ghz: f64,
    pub qc: f64,
    #[serde(default)]
    pub ql: Option<f64>,
    #[serde(default)]
    pub qi: Option<f64>,
    #[serde(default)]
    pub theta: f64,
    /// `|A|`.
    #[serde(default = "one")]
    pub amplitude: f64,
    /// `arg(A)` in radians.
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub delay_ns: f64,
    /// Defaults to [`DEFAULT_TRACE_POINTS`] samples over [`DEFAULT_SPAN_LINEWIDTHS`]
    /// linewidths centred on `f_r`.
    #[serde(default)]
    pub freq_ghz: Option<LinGrid>,
    #[serde(default)]
    pub power_dbm: Option<f64>,
}

impl ReflectionSynth {
    pub fn from_params(p: &ReflectionParams) -> Self {
        Self {
            f_r_ghz: p.f_r_ghz,
            qc: p.qc,
            ql: Some(p.ql),
            qi: None,
            theta: p.theta,
            amplitude: p.a.norm(),
            phase: p.a.arg(),
            delay_ns: p.delay_ns,
            freq_ghz: None,
            power_dbm: None,
        }
    }

    pub fn params(&self) -> Result<ReflectionParams> {
        let ql = match (self.ql, self.qi) {
            (Some(ql), None) => ql,
            (None, Some(qi)) if qi > 0.0 => 1.0 / (1.0 / qi + 1.0 / self.qc),
            (None, Some(qi)) => return Err(Error::invalid(format!("Qi must be > 0, got {qi}"))),
            _ => return Err(Error::invalid("give exactly one of ql and qi")),
        };
        if !(self.f_r_ghz > 0.0 && ql > 0.0 && self.qc > 0.0) {
            return Err(Error::invalid("need f_r, Ql and Qc > 0"));
        }
        if self.theta.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::invalid("theta must lie in (-pi/2, pi/2)"));
        }
        if !(self.amplitude > 0.0) {
            return Err(Error::invalid("amplitude must be > 0"));
        }
        Ok(ReflectionParams {
            a: Complex64::from_polar(self.amplitude, self.phase),
            ql,
            qc: self.qc,
            theta: self.theta,
            f_r_ghz: self.f_r_ghz,
            delay_ns: self.delay_ns,
        })
    }

    pub fn grid(&self) -> Result<LinGrid> {
        match self.freq_ghz {
            Some(g) => {
                g.validate()?;
                Ok(g)
            }
            None => {
                let p = self.params()?;
                let half = 0.5 * DEFAULT_SPAN_LINEWIDTHS * p.linewidth_ghz();
                LinGrid::new(p.f_r_ghz - half, p.f_r_ghz + half, DEFAULT_TRACE_POINTS)
            }
        }
    }
}

pub fn synth_reflection(spec: &ReflectionSynth, noise: Noise) -> Result<ComplexTrace> {
    noise.validate()?;
    let p = spec.params()?;
    let freqs = spec.grid()?.values();
    let sigma = noise.sigma(p.a.norm());
    let mut rng = noise.stream(0);
    let values = freqs
        .iter()
        .map(|&f| p.eval(f) + complex_noise(&mut rng, sigma))
        .collect();
    let mut trace = ComplexTrace::new(freqs, values)?;
    trace.power_dbm = spec.power_dbm;
    Ok(trace)
}

/// Reflection magnitude versus probe power around a dispersively coupled qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerMapSynth {
    pub f_bare_ghz: f64,
    pub g_mhz: f64,
    pub qubit: QubitParams,
    pub qc: f64,
    pub qi_intrinsic: f64,
    /// Qubit linewidth feeding the low-power Purcell loss (MHz).
    pub gamma_q_mhz: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub photons: PhotonModel,
    pub power_dbm: LinGrid,
    pub freq_ghz: LinGrid,
}

/// Per-row truth of a power map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub power_dbm: f64,
    pub f_c_ghz: f64,
    pub qi: f64,
    pub saturation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMapTruth {
    pub f01_mhz: f64,
    pub chi_mhz: f64,
    pub n_crit: f64,
    pub qi_low_power: f64,
    pub rows: Vec<PowerRow>,
}

/// Power map plus its truth. Rows follow `power_dbm`, columns `freq_ghz`; values are `|S|`.
///
/// The cavity moves from `f_bare + chi` to `f_bare` along [`coupling::power_dependence`], and
/// the internal loss interpolates with the same weight between the Purcell-lowered value and
/// `qi_intrinsic`.
pub fn synth_power_map(spec: &PowerMapSynth, noise: Noise) -> Result<(Map2D, PowerMapTruth)> {
    noise.validate()?;
    spec.power_dbm.validate()?;
    spec.freq_ghz.validate()?;
    if !(spec.qc > 0.0 && spec.qi_intrinsic > 0.0) {
        return Err(Error::invalid("need Qc > 0 and Qi > 0"));
    }
    let qubit = qubit_levels(&spec.qubit)?;
    let ql = 1.0 / (1.0 / spec.qi_intrinsic + 1.0 / spec.qc);
    let system = DispersiveSystem {
        f_bare_ghz: spec.f_bare_ghz,
        g_mhz: spec.g_mhz,
        qubit,
        kappa_mhz: spec.f_bare_ghz * 1e3 / ql,
        gamma_q_mhz: spec.gamma_q_mhz,
    };
    system.validate()?;
    let powers = spec.power_dbm.values();
    let f_c = coupling::power_dependence(&system, &powers, &spec.photons)?;
    let n_crit = system.critical_photon_number();
    let qi_low = purcell_induced_cavity_loss(
        spec.g_mhz,
        system.delta_mhz(),
        spec.gamma_q_mhz,
        spec.f_bare_ghz,
        spec.qi_intrinsic,
    )?;
    let rows: Vec<PowerRow> = powers
        .iter()
        .zip(&f_c)
        .map(|(&p, &f)| {
            let w = coupling::saturation_weight(&system, p, &spec.photons, n_crit);
            PowerRow {
                power_dbm: p,
                f_c_ghz: f,
                qi: 1.0 / ((1.0 - w) / qi_low + w / spec.qi_intrinsic),
                saturation: w,
            }
        })
        .collect();
    let freqs = spec.freq_ghz.values();
    let a = Complex64::new(1.0, 0.0);
    let sigma = noise.sigma(1.0);
    let values = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let mut rng = noise.stream(i as u64);
            let b = Branch {
                f_ghz: row.f_c_ghz,
                kappa: row.f_c_ghz * (1.0 / row.qi + 1.0 / spec.qc),
                kappa_c: row.f_c_ghz / spec.qc,
            };
            freqs
                .iter()
                .map(|&f| {
                    (cavity_response(f, a, spec.theta, 0.0, &[b]) + complex_noise(&mut rng, sigma))
                        .norm()
                })
                .collect()
        })
        .collect();
    let map = Map2D::new("power_dbm", "freq_ghz", powers, freqs, values)?;
    let truth = PowerMapTruth {
        f01_mhz: system.qubit.f01,
        chi_mhz: system.chi_mhz()?,
        n_crit,
        qi_low_power: qi_low,
        rows,
    };
    Ok((map, truth))
}

/// Reflection magnitude versus gate voltage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateMapSynth {
    pub sweep: GateSweepSpec,
    pub qc: f64,
    pub qi_intrinsic: f64,
    #[serde(default)]
    pub gamma_q_mhz: f64,
    #[serde(default)]
    pub theta: f64,
    pub freq_ghz: LinGrid,
}

/// Dips of one gate-map row: `(centre GHz, total linewidth GHz)`.
pub fn gate_row_branches(
    record: &coupling::SweepRecord,
    f_bare_ghz: f64,
    g_mhz: f64,
    qc: f64,
    qi_intrinsic: f64,
    gamma_q_mhz: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    let kappa_c = f_bare_ghz / qc;
    let kappa_i = f_bare_ghz / qi_intrinsic;
    Ok(match record.regime {
        Regime::PinchOff => vec![(f_bare_ghz, kappa_c + kappa_i, kappa_c)],
        Regime::Dispersive => {
            let delta = f_bare_ghz * 1e3 - record.f_q_mhz;
            let qi =
                purcell_induced_cavity_loss(g_mhz, delta, gamma_q_mhz, f_bare_ghz, qi_intrinsic)?;
            let f = record.f_c_ghz;
            vec![(f, f / qc + f / qi, f / qc)]
        }
        Regime::Resonant => {
            let (w_plus, w_minus) = branch_cavity_weights(f_bare_ghz, record.f_q_mhz * 1e-3, g_mhz);
            let gamma_q = gamma_q_mhz * 1e-3;
            [(record.f_plus_ghz, w_plus), (record.f_minus_ghz, w_minus)]
                .into_iter()
                .filter(|&(_, w)| w > 0.0)
                .map(|(f, w)| {
                    (
                        f,
                        w * (kappa_c + kappa_i) + (1.0 - w) * gamma_q,
                        w * kappa_c,
                    )
                })
                .collect()
        }
    })
}

/// Gate map: rows follow the sweep's gate voltages, columns `freq_ghz`, values `|S|`.
///
/// Dispersive and pinch-off rows hold one dip at `f_C`, broadened by the Purcell loss
/// `(g/delta)^2 gamma_q`. Rows inside the resonant window hold two dips at `f_plus` and
/// `f_minus`, each coupled in proportion to its cavity fraction `w` and with linewidth
/// `w kappa + (1 - w) gamma_q`.
pub fn synth_gate_map(spec: &GateMapSynth, sweep: &SweepResult, noise: Noise) -> Result<Map2D> {
    noise.validate()?;
    spec.freq_ghz.validate()?;
    if !(spec.qc > 0.0 && spec.qi_intrinsic > 0.0) || spec.gamma_q_mhz < 0.0 {
        return Err(Error::invalid("need Qc > 0, Qi > 0 and gamma_q >= 0"));
    }
    let freqs = spec.freq_ghz.values();
    let a = Complex64::new(1.0, 0.0);
    let sigma = noise.sigma(1.0);
    let values = sweep
        .records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let branches: Vec<Branch> = gate_row_branches(
                r,
                sweep.f_bare_ghz,
                sweep.g_mhz,
                spec.qc,
                spec.qi_intrinsic,
                spec.gamma_q_mhz,
            )?
            .into_iter()
            .map(|(f_ghz, kappa, kappa_c)| Branch {
                f_ghz,
                kappa,
                kappa_c,
            })
            .collect();
            let mut rng = noise.stream(i as u64);
            Ok(freqs
                .iter()
                .map(|&f| {
                    (cavity_response(f, a, spec.theta, 0.0, &branches)
                        + complex_noise(&mut rng, sigma))
                    .norm()
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let v: Vec<f64> = sweep.records.iter().map(|r| r.v_g).collect();
    Map2D::new("v_g", "freq_ghz", v, freqs, values)
}

/// Smooth drive-frequency background added to every row of a two-tone map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Background {
    pub level: f64,
    pub ripple: f64,
    pub ripple_period_mhz: f64,
}

impl Background {
    pub fn eval(&self, f_ghz: f64) -> f64 {
        self.level
            + self.ripple * (std::f64::consts::TAU * f_ghz * 1e3 / self.ripple_period_mhz).sin()
    }
}

fn default_fwhm() -> f64 {
    21.0
}

fn default_two_photon_ratio() -> f64 {
    DEFAULT_TWO_PHOTON_RATIO
}

/// Two-tone spectroscopy map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoToneSynth {
    pub sweep: GateSweepSpec,
    pub drive_ghz: LinGrid,
    #[serde(default = "default_fwhm")]
    pub fwhm_mhz: f64,
    #[serde(default = "one")]
    pub depth: f64,
    /// Adds the dip at `f02 / 2 = f01 + alpha / 2`.
    #[serde(default)]
    pub two_photon: bool,
    #[serde(default = "default_two_photon_ratio")]
    pub two_photon_ratio: f64,
    #[serde(default)]
    pub background: Option<Background>,
}

/// Lorentzian dips of one two-tone row (GHz).
pub fn two_tone_row_dips(
    spec: &TwoToneSynth,
    record: &coupling::SweepRecord,
) -> Vec<LorentzianParams> {
    if record.regime == Regime::PinchOff {
        return Vec::new();
    }
    let single = LorentzianParams {
        f0: record.f_q_mhz * 1e-3,
        fwhm: spec.fwhm_mhz * 1e-3,
        depth: spec.depth,
        offset: 0.0,
    };
    let mut dips = vec![single];
    if spec.two_photon {
        dips.push(LorentzianParams {
            f0: (record.f_q_mhz + 0.5 * record.alpha_mhz) * 1e-3,
            depth: spec.depth * spec.two_photon_ratio,
            ..single
        });
    }
    dips
}

/// Two-tone map: rows follow the gate voltages, columns the drive frequency (GHz).
pub fn synth_two_tone(spec: &TwoToneSynth, sweep: &SweepResult, noise: Noise) -> Result<Map2D> {
    noise.validate()?;
    spec.drive_ghz.validate()?;
    if !(spec.fwhm_mhz > 0.0 && spec.depth > 0.0) || spec.two_photon_ratio < 0.0 {
        return Err(Error::invalid(
            "need fwhm > 0, depth > 0 and two_photon_ratio >= 0",
        ));
    }
    let drive = spec.drive_ghz.values();
    let sigma = noise.sigma(spec.depth);
    let values = sweep
        .records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let dips = two_tone_row_dips(spec, r);
            let mut rng = noise.stream(i as u64);
            drive
                .iter()
                .map(|&f| {
                    let bg = spec.background.map_or(0.0, |b| b.eval(f));
                    let signal: f64 = dips.iter().map(|d| d.eval(f)).sum();
                    let n = if sigma > 0.0 {
                        sigma * rng.normal()
                    } else {
                        0.0
                    };
                    bg + signal + n
                })
                .collect()
        })
        .collect();
    let v: Vec<f64> = sweep.records.iter().map(|r| r.v_g).collect();
    Map2D::new("v_g", "drive_ghz", v, drive, values)
}

/// Damped Rabi record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiSynth {
    pub amplitude: f64,
    pub t_r_ns: f64,
    pub rabi_mhz: f64,
    #[serde(default)]
    pub phase: f64,
    /// Linear background per ns.
    #[serde(default)]
    pub slope: f64,
    #[serde(default)]
    pub offset: f64,
    pub t_ns: LinGrid,
}

impl RabiSynth {
    pub fn params(&self) -> RabiParams {
        RabiParams {
            amplitude: self.amplitude,
            t_r_ns: self.t_r_ns,
            omega: std::f64::consts::TAU * self.rabi_mhz * 1e-3,
            phase: self.phase,
            slope: self.slope,
            intercept: self.offset,
        }
    }
}

pub fn synth_rabi(spec: &RabiSynth, noise: Noise) -> Result<Series> {
    noise.validate()?;
    spec.t_ns.validate()?;
    if !(spec.t_r_ns > 0.0 && spec.rabi_mhz > 0.0) {
        return Err(Error::invalid("need T_R > 0 and a positive Rabi frequency"));
    }
    let p = spec.params();
    let t = spec.t_ns.values();
    let sigma = noise.sigma(spec.amplitude);
    let mut rng = noise.stream(0);
    let y = t
        .iter()
        .map(|&x| {
            let n = if sigma > 0.0 {
                sigma * rng.normal()
            } else {
                0.0
            };
            p.eval(x) + n
        })
        .collect();
    Series::new(t, y)
}

/// Single Lorentzian dip on a frequency axis in GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzianSynth {
    pub f0_ghz: f64,
    pub fwhm_mhz: f64,
    pub depth: f64,
    #[serde(default)]
    pub offset: f64,
    pub freq_ghz: LinGrid,
}

impl LorentzianSynth {
    pub fn params(&self) -> LorentzianParams {
        LorentzianParams {
            f0: self.f0_ghz,
            fwhm: self.fwhm_mhz * 1e-3,
            depth: self.depth,
            offset: self.offset,
        }
    }
}

pub fn synth_lorentzian(spec: &LorentzianSynth, noise: Noise) -> Result<Series> {
    noise.validate()?;
    spec.freq_ghz.validate()?;
    if !(spec.fwhm_mhz > 0.0) {
        return Err(Error::invalid("need fwhm > 0"));
    }
    let p = spec.params();
    let f = spec.freq_ghz.values();
    let sigma = noise.sigma(spec.depth);
    let mut rng = noise.stream(0);
    let y = f
        .iter()
        .map(|&x| {
            let n = if sigma > 0.0 {
                sigma * rng.normal()
            } else {
                0.0
            };
            p.eval(x) + n
        })
        .collect();
    Series::new(f, y)
}

/// A generated dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Trace(ComplexTrace),
    Series {
        series: Series,
        x_label: &'static str,
        y_label: &'static str,
    },
    Map(Map2D),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub dataset: Dataset,
    /// Truth sidecar: the input `SynthSpec` plus derived quantities.
    pub truth: serde_json::Value,
}

/// Runs the generator selected by `spec.dataset`.
pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    let noise = Noise {
        snr_db: spec.snr_db,
        seed: spec.seed,
    };
    noise.validate()?;
    let (dataset, derived) = match &spec.dataset {
        DatasetSpec::ReflectionTrace(s) => {
            let p = s.params()?;
            let qi = crate::estimators::reflection::derive_qi(p.ql, p.qc).ok();
            (
                Dataset::Trace(synth_reflection(s, noise)?),
                json!({ "ql": p.ql, "qc": p.qc, "qi": qi, "f_r_ghz": p.f_r_ghz, "theta": p.theta }),
            )
        }
        DatasetSpec::PowerMap(s) => {
            let (map, truth) = synth_power_map(s, noise)?;
            (Dataset::Map(map), serde_json::to_value(truth)?)
        }
        DatasetSpec::GateMap(s) => {
            let sweep = s.sweep.run()?;
            let map = synth_gate_map(s, &sweep, noise)?;
            (Dataset::Map(map), serde_json::to_value(&sweep)?)
        }
        DatasetSpec::TwoToneMap(s) => {
            let sweep = s.sweep.run()?;
            let map = synth_two_tone(s, &sweep, noise)?;
            let rows: Vec<_> = sweep
                .records
                .iter()
                .map(|r| json!({ "v_g": r.v_g, "dips": two_tone_row_dips(s, r) }))
                .collect();
            (Dataset::Map(map), json!({ "sweep": sweep, "rows": rows }))
        }
        DatasetSpec::RabiTrace(s) => (
            Dataset::Series {
                series: synth_rabi(s, noise)?,
                x_label: "t_ns",
                y_label: "y",
            },
            serde_json::to_value(s.params())?,
        ),
        DatasetSpec::LorentzianTrace(s) => (
            Dataset::Series {
                series: synth_lorentzian(s, noise)?,
                x_label: "freq_ghz",
                y_label: "mag_db",
            },
            serde_json::to_value(s.params())?,
        ),
    };
    let truth = json!({
        "kind": spec.dataset.kind(),
        "seed": spec.seed,
        "snr_db": spec.snr_db,
        "spec": spec.dataset,
        "truth": derived,
    });
    Ok(SynthOutput { dataset, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{CavityCoupling, GateProfile, Interpolation, SweepSolver};

    fn reflection() -> ReflectionSynth {
        ReflectionSynth::from_params(&ReflectionParams::new(5.443, 6740.0, 7360.0, 0.0))
    }

    #[test]
    fn noiseless_trace_equals_model() {
        let s = reflection();
        let p = s.params().unwrap();
        let t = synth_reflection(&s, Noise::noiseless()).unwrap();
        assert_eq!(t.len(), DEFAULT_TRACE_POINTS);
        for (f, v) in t.freqs_ghz.iter().zip(&t.values) {
            assert_eq!(*v, p.eval(*f));
        }
    }

    #[test]
    fn branch_sum_with_one_branch_is_fit_model() {
        let mut p = ReflectionParams::new(5.2816, 5727.0, 7270.0, 0.2);
        p.a = Complex64::from_polar(0.7, 0.4);
        p.delay_ns = 1.5;
        let b = Branch {
            f_ghz: p.f_r_ghz,
            kappa: p.f_r_ghz / p.ql,
            kappa_c: p.f_r_ghz / p.qc,
        };
        for k in 0..50 {
            let f = 5.28 + k as f64 * 1e-4;
            let d = cavity_response(f, p.a, p.theta, p.delay_ns, &[b]) - p.eval(f);
            assert!(d.norm() < 1e-12, "{d}");
        }
    }

    #[test]
    fn seeds_give_distinct_noise() {
        let s = reflection();
        let a = synth_reflection(&s, Noise::new(30.0, 1)).unwrap();
        let b = synth_reflection(&s, Noise::new(30.0, 1)).unwrap();
        let c = synth_reflection(&s, Noise::new(30.0, 2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn infinite_snr_rejected() {
        assert!(synth_reflection(&reflection(), Noise::new(f64::INFINITY, 1)).is_err());
    }

    #[test]
    fn exactly_one_q_required() {
        let mut s = reflection();
        s.qi = Some(1e4);
        assert!(s.params().is_err());
        s.ql = None;
        s.qi = None;
        assert!(s.params().is_err());
    }

    fn sweep_spec() -> GateSweepSpec {
        GateSweepSpec {
            profile: GateProfile::Table {
                v_g: vec![0.0, 1.0, 2.0],
                values: vec![0.0, 0.5, 1.0],
                interpolation: Interpolation::Linear,
            },
            solver: SweepSolver::Gatemon {
                ec_mhz: 190.0,
                gap_mhz: 190_000.0,
                grid_n: 101,
            },
            cavity: CavityCoupling {
                f_bare_ghz: 5.2816,
                g_mhz: 100.0,
            },
            v_g: LinGrid::new(0.0, 2.0, 5).unwrap(),
        }
    }

    #[test]
    fn two_tone_dips_spaced_by_half_alpha() {
        let spec = TwoToneSynth {
            sweep: sweep_spec(),
            drive_ghz: LinGrid::new(3.0, 9.0, 11).unwrap(),
            fwhm_mhz: 21.0,
            depth: 1.0,
            two_photon: true,
            two_photon_ratio: 0.5,
            background: None,
        };
        let sweep = spec.sweep.run().unwrap();
        for r in &sweep.records {
            let dips = two_tone_row_dips(&spec, r);
            if r.regime == Regime::PinchOff {
                assert!(dips.is_empty());
            } else {
                assert_eq!(dips.len(), 2);
                assert_eq!(
                    dips[1].f0 - dips[0].f0,
                    (r.f_q_mhz + 0.5 * r.alpha_mhz) * 1e-3 - r.f_q_mhz * 1e-3
                );
                assert_eq!(dips[1].depth, 0.5 * dips[0].depth);
            }
        }
        let map = synth_two_tone(&spec, &sweep, Noise::new(20.0, 4)).unwrap();
        assert_eq!(map.shape(), (5, 11));
    }

    #[test]
    fn pinch_off_row_sits_at_bare_cavity() {
        let spec = GateMapSynth {
            sweep: sweep_spec(),
            qc: 7270.0,
            qi_intrinsic: 27_000.0,
            gamma_q_mhz: 5.0,
            theta: 0.0,
            freq_ghz: LinGrid::new(5.27, 5.29, 401).unwrap(),
        };
        let sweep = spec.sweep.run().unwrap();
        let map = synth_gate_map(&spec, &sweep, Noise::noiseless()).unwrap();
        let row = &map.values[0];
        let (imin, _) = row
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((map.fast[imin] - 5.2816).abs() <= 0.5 * (map.fast[1] - map.fast[0]));
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = SynthSpec {
            seed: 11,
            snr_db: Some(30.0),
            dataset: DatasetSpec::RabiTrace(RabiSynth {
                amplitude: 0.5,
                t_r_ns: 260.0,
                rabi_mhz: 10.0,
                phase: 0.0,
                slope: 0.0,
                offset: 0.0,
                t_ns: LinGrid::new(0.0, 1000.0, 201).unwrap(),
            }),
        };
        let text = toml::to_string(&spec).unwrap();
        let back: SynthSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn unknown_field_rejected() {
        let text = r#"
seed = 1
[dataset]
kind = "rabi_trace"
amplitude = 1.0
t_r_ns = 100.0
rabi_mhz = 10.0
bogus = 3
t_ns = { start = 0.0, stop = 10.0, points = 11 }
"#;
        assert!(toml::from_str::<SynthSpec>(text).is_err());
    }
}
