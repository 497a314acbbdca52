// SPDX-License-Identifier: Apache-2.0

//! C ABI over `gatecqed`.
//!
//! Every function returns a [`GcqStatus`]. On failure the message is kept per thread and
//! can be read with [`gcq_last_error_message`]. Traces, series and gate sweeps are opaque
//! handles created by `*_new`/`*_synth`/`*_run` functions and released with the matching
//! `*_free`. Frequencies are in GHz and energies in MHz unless a name says otherwise.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use gatecqed::coupling::{self, GateSweepSpec};
use gatecqed::data::{ComplexTrace, LinGrid, Series};
use gatecqed::estimators::{self, ReflectionOptions};
use gatecqed::spectra::{self, CavityGeometry, QubitParams, QubitSpectrum};
use gatecqed::synth::{self, Noise, ReflectionSynth};
use gatecqed::Error;

/// Result of every call. Zero means success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Truncation = 3,
    Eigensolver = 4,
    NoSolution = 5,
    Resonance = 6,
    Pole = 7,
    InconsistentSign = 8,
    NoResonance = 9,
    NoDip = 10,
    CannotInit = 11,
    Nonphysical = 12,
    Singular = 13,
    NonFinite = 14,
    NotConverged = 15,
    Io = 16,
    Panic = 17,
}

fn status_of(e: &Error) -> GcqStatus {
    match e {
        Error::InvalidInput(_) | Error::Config(_) | Error::Csv { .. } | Error::Json(_) => {
            GcqStatus::InvalidInput
        }
        Error::Truncation { .. } => GcqStatus::Truncation,
        Error::Eigensolver(_) => GcqStatus::Eigensolver,
        Error::NoSolution { .. } => GcqStatus::NoSolution,
        Error::Resonance => GcqStatus::Resonance,
        Error::Pole { .. } => GcqStatus::Pole,
        Error::InconsistentSign { .. } => GcqStatus::InconsistentSign,
        Error::NoResonance { .. } => GcqStatus::NoResonance,
        Error::NoDip { .. } => GcqStatus::NoDip,
        Error::CannotInit(_) => GcqStatus::CannotInit,
        Error::Nonphysical(_) => GcqStatus::Nonphysical,
        Error::Singular => GcqStatus::Singular,
        Error::NonFinite => GcqStatus::NonFinite,
        Error::NotConverged { .. } => GcqStatus::NotConverged,
        Error::Io(_) => GcqStatus::Io,
        Error::GatePoint { source, .. } | Error::Stage { source, .. } => status_of(source),
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs `f`, records any error or panic, and converts the outcome to a status code.
fn guard(f: impl FnOnce() -> Outcome) -> GcqStatus {
    set_error(String::new());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GcqStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            GcqStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            let mut msg = e.to_string();
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                msg.push_str(": ");
                msg.push_str(&s.to_string());
                src = s.source();
            }
            set_error(msg);
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GcqStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn in_slice<'a, T>(p: *const T, n: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn out_slice<'a, T>(
    p: *mut T,
    n: usize,
    name: &'static str,
) -> Result<&'a mut [T], Failure> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

fn check_len(have: usize, need: usize) -> Outcome {
    if have < need {
        return Err(Error::InvalidInput(format!("buffer holds {have} values, need {need}")).into());
    }
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated, truncated to
/// `len`). Returns the full message length plus one, so a call with `len = 0` sizes the
/// buffer. The message is empty after a successful call.
#[no_mangle]
pub unsafe extern "C" fn gcq_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gcq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Maximum number of levels reported in [`GcqSpectrum`].
pub const GCQ_MAX_LEVELS: usize = 10;

/// Qubit spectrum in MHz. `levels[0..n_levels]` are ascending eigenenergies.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GcqSpectrum {
    pub f01: f64,
    pub f12: f64,
    pub f02: f64,
    pub alpha: f64,
    pub n_levels: usize,
    pub levels: [f64; GCQ_MAX_LEVELS],
}

impl From<&QubitSpectrum> for GcqSpectrum {
    fn from(s: &QubitSpectrum) -> Self {
        let mut levels = [0.0; GCQ_MAX_LEVELS];
        let n = s.levels.len().min(GCQ_MAX_LEVELS);
        levels[..n].copy_from_slice(&s.levels[..n]);
        Self {
            f01: s.f01,
            f12: s.f12,
            f02: s.f02,
            alpha: s.alpha,
            n_levels: n,
            levels,
        }
    }
}

/// Charge-basis transmon spectrum with cutoff `n_cut`.
#[no_mangle]
pub unsafe extern "C" fn gcq_transmon_levels(
    ec_mhz: f64,
    ej_mhz: f64,
    ng: f64,
    n_cut: usize,
    out: *mut GcqSpectrum,
) -> GcqStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let s = spectra::transmon_levels(&QubitParams::transmon(ec_mhz, ej_mhz, ng), n_cut)?;
        *out = (&s).into();
        Ok(())
    })
}

/// Gatemon spectrum for `n_channels` Andreev channels on a phase grid of `grid_n` points.
#[no_mangle]
pub unsafe extern "C" fn gcq_gatemon_levels(
    ec_mhz: f64,
    gap_mhz: f64,
    ng: f64,
    transmissions: *const f64,
    n_channels: usize,
    grid_n: usize,
    out: *mut GcqSpectrum,
) -> GcqStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let ts = in_slice(transmissions, n_channels, "transmissions")?;
        let p = QubitParams {
            ng,
            ..QubitParams::gatemon(ec_mhz, gap_mhz, ts.to_vec())
        };
        *out = (&spectra::gatemon_levels(&p, grid_n)?).into();
        Ok(())
    })
}

/// Single-channel transmission that reproduces `alpha_mhz`.
#[no_mangle]
pub unsafe extern "C" fn gcq_infer_transmission(
    alpha_mhz: f64,
    ec_mhz: f64,
    gap_mhz: f64,
    out: *mut f64,
) -> GcqStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = spectra::infer_transmission(alpha_mhz, ec_mhz, gap_mhz)?;
        Ok(())
    })
}

/// TE(m,n,p) frequency in GHz of a rectangular cavity with sides in metres.
#[no_mangle]
pub unsafe extern "C" fn gcq_te_mode_frequency(
    a_m: f64,
    b_m: f64,
    d_m: f64,
    m: u32,
    n: u32,
    p: u32,
    out: *mut f64,
) -> GcqStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = spectra::te_mode_frequency(&CavityGeometry {
            length_a: a_m,
            width_b: b_m,
            height_d: d_m,
            mode: (m, n, p),
        })?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gcq_derive_qi(ql: f64, qc: f64, out: *mut f64) -> GcqStatus {
    guard(|| {
        *out_ref(out, "out")? = estimators::reflection::derive_qi(ql, qc)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gcq_dispersive_shift_two_level(
    g_mhz: f64,
    delta_mhz: f64,
    out: *mut f64,
) -> GcqStatus {
    guard(|| {
        *out_ref(out, "out")? = coupling::dispersive_shift_two_level(g_mhz, delta_mhz)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gcq_dispersive_shift_transmon(
    g_mhz: f64,
    delta_mhz: f64,
    alpha_mhz: f64,
    out: *mut f64,
) -> GcqStatus {
    guard(|| {
        *out_ref(out, "out")? = coupling::dispersive_shift_transmon(g_mhz, delta_mhz, alpha_mhz)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gcq_coupling_from_shift(
    chi_mhz: f64,
    delta_mhz: f64,
    out: *mut f64,
) -> GcqStatus {
    guard(|| {
        *out_ref(out, "out")? = coupling::coupling_from_shift(chi_mhz, delta_mhz)?;
        Ok(())
    })
}

/// Upper and lower branch frequencies (GHz) of the cavity-qubit anti-crossing.
#[no_mangle]
pub unsafe extern "C" fn gcq_anti_crossing(
    f_bare_ghz: f64,
    f_q_ghz: f64,
    g_mhz: f64,
    out_plus: *mut f64,
    out_minus: *mut f64,
) -> GcqStatus {
    guard(|| {
        let plus = out_ref(out_plus, "out_plus")?;
        let minus = out_ref(out_minus, "out_minus")?;
        (*plus, *minus) = coupling::anti_crossing(f_bare_ghz, f_q_ghz, g_mhz)?;
        Ok(())
    })
}

/// Complex reflection trace.
pub struct GcqTrace(ComplexTrace);

/// Real-valued series, e.g. a lineshape or a Rabi record.
pub struct GcqSeries(Series);

fn boxed<T>(value: T, out: *mut *mut T) -> Outcome {
    let out = unsafe { out_ref(out, "out") }?;
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Builds a trace from `n` frequencies and the real and imaginary parts of `S`.
#[no_mangle]
pub unsafe extern "C" fn gcq_trace_new(
    freqs_ghz: *const f64,
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut GcqTrace,
) -> GcqStatus {
    guard(|| {
        let f = in_slice(freqs_ghz, n, "freqs_ghz")?;
        let re = in_slice(re, n, "re")?;
        let im = in_slice(im, n, "im")?;
        let values = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        boxed(GcqTrace(ComplexTrace::new(f.to_vec(), values)?), out)
    })
}

/// Truth of a synthetic reflection trace. `points = 0` selects the default window around
/// `f_r`; otherwise the trace spans `[f_start_ghz, f_stop_ghz]`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GcqReflectionSynth {
    pub f_r_ghz: f64,
    pub ql: f64,
    pub qc: f64,
    pub theta: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub delay_ns: f64,
    pub f_start_ghz: f64,
    pub f_stop_ghz: f64,
    pub points: usize,
}

/// Synthesises a reflection trace. A non-finite `snr_db` (e.g. NaN) gives a noiseless trace.
#[no_mangle]
pub unsafe extern "C" fn gcq_trace_synth(
    spec: *const GcqReflectionSynth,
    snr_db: f64,
    seed: u64,
    out: *mut *mut GcqTrace,
) -> GcqStatus {
    guard(|| {
        let s = spec.as_ref().ok_or(Failure::Null("spec"))?;
        let freq_ghz = if s.points == 0 {
            None
        } else {
            Some(LinGrid::new(s.f_start_ghz, s.f_stop_ghz, s.points)?)
        };
        let synth_spec = ReflectionSynth {
            f_r_ghz: s.f_r_ghz,
            qc: s.qc,
            ql: Some(s.ql),
            qi: None,
            theta: s.theta,
            amplitude: s.amplitude,
            phase: s.phase,
            delay_ns: s.delay_ns,
            freq_ghz,
            power_dbm: None,
        };
        let noise = if snr_db.is_finite() {
            Noise::new(snr_db, seed)
        } else {
            Noise::noiseless()
        };
        boxed(GcqTrace(synth::synth_reflection(&synth_spec, noise)?), out)
    })
}

/// Number of samples, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn gcq_trace_len(trace: *const GcqTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.len())
}

/// Copies the trace into caller buffers of at least `gcq_trace_len` values each.
#[no_mangle]
pub unsafe extern "C" fn gcq_trace_copy(
    trace: *const GcqTrace,
    freqs_ghz: *mut f64,
    re: *mut f64,
    im: *mut f64,
    n: usize,
) -> GcqStatus {
    guard(|| {
        let t = &trace.as_ref().ok_or(Failure::Null("trace"))?.0;
        check_len(n, t.len())?;
        let f = out_slice(freqs_ghz, n, "freqs_ghz")?;
        let r = out_slice(re, n, "re")?;
        let i = out_slice(im, n, "im")?;
        for (k, (&x, v)) in t.freqs_ghz.iter().zip(&t.values).enumerate() {
            f[k] = x;
            r[k] = v.re;
            i[k] = v.im;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gcq_trace_free(trace: *mut GcqTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

#[no_mangle]
pub unsafe extern "C" fn gcq_series_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut *mut GcqSeries,
) -> GcqStatus {
    guard(|| {
        let x = in_slice(x, n, "x")?;
        let y = in_slice(y, n, "y")?;
        boxed(GcqSeries(Series::new(x.to_vec(), y.to_vec())?), out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn gcq_series_len(series: *const GcqSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn gcq_series_copy(
    series: *const GcqSeries,
    x: *mut f64,
    y: *mut f64,
    n: usize,
) -> GcqStatus {
    guard(|| {
        let s = &series.as_ref().ok_or(Failure::Null("series"))?.0;
        check_len(n, s.len())?;
        out_slice(x, n, "x")?[..s.len()].copy_from_slice(&s.x);
        out_slice(y, n, "y")?[..s.len()].copy_from_slice(&s.y);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gcq_series_free(series: *mut GcqSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Damped Rabi record `A e^{-t/T_R} cos(2 pi f t + phase) + slope t + offset` on
/// `points` times in `[t_start_ns, t_stop_ns]`. Non-finite `snr_db` is noiseless.
#[no_mangle]
pub unsafe extern "C" fn gcq_series_synth_rabi(
    amplitude: f64,
    t_r_ns: f64,
    rabi_mhz: f64,
    phase: f64,
    slope: f64,
    offset: f64,
    t_start_ns: f64,
    t_stop_ns: f64,
    points: usize,
    snr_db: f64,
    seed: u64,
    out: *mut *mut GcqSeries,
) -> GcqStatus {
    guard(|| {
        let spec = synth::RabiSynth {
            amplitude,
            t_r_ns,
            rabi_mhz,
            phase,
            slope,
            offset,
            t_ns: LinGrid::new(t_start_ns, t_stop_ns, points)?,
        };
        let noise = if snr_db.is_finite() {
            Noise::new(snr_db, seed)
        } else {
            Noise::noiseless()
        };
        boxed(GcqSeries(synth::synth_rabi(&spec, noise)?), out)
    })
}

/// Lorentzian dip `offset - depth / (1 + (2 (f - f0) / fwhm)^2)` on `points` frequencies.
#[no_mangle]
pub unsafe extern "C" fn gcq_series_synth_lorentzian(
    f0_ghz: f64,
    fwhm_mhz: f64,
    depth: f64,
    offset: f64,
    f_start_ghz: f64,
    f_stop_ghz: f64,
    points: usize,
    snr_db: f64,
    seed: u64,
    out: *mut *mut GcqSeries,
) -> GcqStatus {
    guard(|| {
        let spec = synth::LorentzianSynth {
            f0_ghz,
            fwhm_mhz,
            depth,
            offset,
            freq_ghz: LinGrid::new(f_start_ghz, f_stop_ghz, points)?,
        };
        let noise = if snr_db.is_finite() {
            Noise::new(snr_db, seed)
        } else {
            Noise::noiseless()
        };
        boxed(GcqSeries(synth::synth_lorentzian(&spec, noise)?), out)
    })
}

/// Reflection fit. `qi` and `qi_err` are NaN when the fit lands at `Qc <= Ql`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GcqResonatorFit {
    pub f_r_ghz: f64,
    pub ql: f64,
    pub qc: f64,
    pub qi: f64,
    pub theta: f64,
    pub a_re: f64,
    pub a_im: f64,
    pub delay_ns: f64,
    pub f_r_err_ghz: f64,
    pub ql_err: f64,
    pub qc_err: f64,
    pub qi_err: f64,
    pub theta_err: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[no_mangle]
pub unsafe extern "C" fn gcq_fit_reflection(
    trace: *const GcqTrace,
    with_delay: bool,
    out: *mut GcqResonatorFit,
) -> GcqStatus {
    guard(|| {
        let t = &trace.as_ref().ok_or(Failure::Null("trace"))?.0;
        let out = out_ref(out, "out")?;
        let f = estimators::fit_reflection(
            t,
            &ReflectionOptions {
                with_delay,
                init: None,
            },
        )?;
        *out = GcqResonatorFit {
            f_r_ghz: f.params.f_r_ghz,
            ql: f.params.ql,
            qc: f.params.qc,
            qi: f.qi.unwrap_or(f64::NAN),
            theta: f.params.theta,
            a_re: f.params.a.re,
            a_im: f.params.a.im,
            delay_ns: f.params.delay_ns,
            f_r_err_ghz: f.f_r_err_ghz,
            ql_err: f.ql_err,
            qc_err: f.qc_err,
            qi_err: f.qi_err.unwrap_or(f64::NAN),
            theta_err: f.theta_err,
            residual_rms: f.residual_rms,
            iterations: f.fit.iterations,
            converged: f.fit.converged,
        };
        Ok(())
    })
}

/// Lorentzian parameters; the frequency axis unit is that of the input series.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GcqLorentzian {
    pub f0: f64,
    pub fwhm: f64,
    pub depth: f64,
    pub offset: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GcqLorentzianFit {
    pub params: GcqLorentzian,
    pub errors: GcqLorentzian,
    pub iterations: usize,
    pub converged: bool,
}

impl From<estimators::LorentzianParams> for GcqLorentzian {
    fn from(p: estimators::LorentzianParams) -> Self {
        Self {
            f0: p.f0,
            fwhm: p.fwhm,
            depth: p.depth,
            offset: p.offset,
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn gcq_fit_lorentzian(
    series: *const GcqSeries,
    out: *mut GcqLorentzianFit,
) -> GcqStatus {
    guard(|| {
        let s = &series.as_ref().ok_or(Failure::Null("series"))?.0;
        let out = out_ref(out, "out")?;
        let f = estimators::fit_lorentzian(s)?;
        *out = GcqLorentzianFit {
            params: f.params.into(),
            errors: f.errors.into(),
            iterations: f.fit.iterations,
            converged: f.fit.converged,
        };
        Ok(())
    })
}

/// Rabi parameters with `omega` in rad/ns.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GcqRabi {
    pub amplitude: f64,
    pub t_r_ns: f64,
    pub omega: f64,
    pub phase: f64,
    pub slope: f64,
    pub intercept: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GcqRabiFit {
    pub params: GcqRabi,
    pub errors: GcqRabi,
    /// Frequency resolution of the record (rad/ns).
    pub dft_bin: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl From<estimators::RabiParams> for GcqRabi {
    fn from(p: estimators::RabiParams) -> Self {
        Self {
            amplitude: p.amplitude,
            t_r_ns: p.t_r_ns,
            omega: p.omega,
            phase: p.phase,
            slope: p.slope,
            intercept: p.intercept,
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn gcq_fit_rabi(series: *const GcqSeries, out: *mut GcqRabiFit) -> GcqStatus {
    guard(|| {
        let s = &series.as_ref().ok_or(Failure::Null("series"))?.0;
        let out = out_ref(out, "out")?;
        let f = estimators::fit_rabi(s)?;
        *out = GcqRabiFit {
            params: f.params.into(),
            errors: f.errors.into(),
            dft_bin: f.dft_bin,
            iterations: f.fit.iterations,
            converged: f.fit.converged,
        };
        Ok(())
    })
}

/// Result of a gate-voltage sweep.
pub struct GcqSweep(coupling::SweepResult);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcqRegime {
    PinchOff = 0,
    Dispersive = 1,
    Resonant = 2,
}

/// One sweep point. `chi_mhz` is zero outside the dispersive regime.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GcqSweepRecord {
    pub v_g: f64,
    pub junction_value: f64,
    pub f_q_mhz: f64,
    pub alpha_mhz: f64,
    pub chi_mhz: f64,
    pub f_c_ghz: f64,
    pub f_plus_ghz: f64,
    pub f_minus_ghz: f64,
    pub regime: GcqRegime,
}

/// Runs a gate sweep described by a TOML document with the `profile`, `solver`, `cavity`
/// and `v_g` keys of a `[sweep]` table (inline tables, no file-backed profiles).
#[no_mangle]
pub unsafe extern "C" fn gcq_sweep_run_toml(
    toml_text: *const c_char,
    out: *mut *mut GcqSweep,
) -> GcqStatus {
    guard(|| {
        if toml_text.is_null() {
            return Err(Failure::Null("toml_text"));
        }
        let text = CStr::from_ptr(toml_text)
            .to_str()
            .map_err(|e| Error::InvalidInput(format!("TOML is not UTF-8: {e}")))?;
        let spec: GateSweepSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        boxed(GcqSweep(spec.run()?), out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn gcq_sweep_len(sweep: *const GcqSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.0.records.len())
}

#[no_mangle]
pub unsafe extern "C" fn gcq_sweep_record(
    sweep: *const GcqSweep,
    index: usize,
    out: *mut GcqSweepRecord,
) -> GcqStatus {
    guard(|| {
        let s = &sweep.as_ref().ok_or(Failure::Null("sweep"))?.0;
        let out = out_ref(out, "out")?;
        let r = s.records.get(index).ok_or_else(|| {
            Error::InvalidInput(format!(
                "index {index} out of range for {} records",
                s.records.len()
            ))
        })?;
        *out = GcqSweepRecord {
            v_g: r.v_g,
            junction_value: r.junction_value,
            f_q_mhz: r.f_q_mhz,
            alpha_mhz: r.alpha_mhz,
            chi_mhz: r.chi_mhz,
            f_c_ghz: r.f_c_ghz,
            f_plus_ghz: r.f_plus_ghz,
            f_minus_ghz: r.f_minus_ghz,
            regime: match r.regime {
                coupling::Regime::PinchOff => GcqRegime::PinchOff,
                coupling::Regime::Dispersive => GcqRegime::Dispersive,
                coupling::Regime::Resonant => GcqRegime::Resonant,
            },
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gcq_sweep_free(sweep: *mut GcqSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}
