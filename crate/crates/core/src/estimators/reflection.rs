// SPDX-License-Identifier: Apache-2.0

//! One-port resonator reflection.
//!
//! Model, with probe frequency `f` and resonance `f_r`:
//!
//! ```text
//! S(f) = A e^{-2 pi i f tau} [1 - 2 Ql / |Qc cos(theta)| e^{i theta} / (1 + 2 i Ql (f - f_r) / f_r)]
//! ```
//!
//! `A` is a complex scale, `theta` the impedance-mismatch rotation (kept in `(-pi/2, pi/2)`)
//! and `tau` an optional cable delay in ns (frequencies in GHz). The internal quality factor
//! follows from `1/Qi = 1/Ql - 1/Qc`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lm::{lm_minimize, FitResult, LeastSquares};
use crate::data::ComplexTrace;
use crate::error::{Error, Result};

/// Minimum number of samples accepted by [`fit_reflection`].
pub const MIN_POINTS: usize = 50;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Parameters of the reflection model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionParams {
    pub a: Complex64,
    pub ql: f64,
    pub qc: f64,
    pub theta: f64,
    pub f_r_ghz: f64,
    #[serde(default)]
    pub delay_ns: f64,
}

impl ReflectionParams {
    /// Unit-scale, delay-free parameters from `(f_r, Ql, Qc, theta)`.
    pub fn new(f_r_ghz: f64, ql: f64, qc: f64, theta: f64) -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            ql,
            qc,
            theta,
            f_r_ghz,
            delay_ns: 0.0,
        }
    }

    /// Parameters from `(f_r, Qi, Qc)` via `1/Ql = 1/Qi + 1/Qc`.
    pub fn from_qi(f_r_ghz: f64, qi: f64, qc: f64, theta: f64) -> Self {
        Self::new(f_r_ghz, 1.0 / (1.0 / qi + 1.0 / qc), qc, theta)
    }

    pub fn linewidth_ghz(&self) -> f64 {
        self.f_r_ghz / self.ql
    }

    pub fn eval(&self, f_ghz: f64) -> Complex64 {
        self.eval_referenced(f_ghz, 0.0)
    }

    /// Model with the delay phase referenced to `f_ref`: `a e^{-2 pi i (f - f_ref) tau} (...)`.
    pub fn eval_referenced(&self, f_ghz: f64, f_ref_ghz: f64) -> Complex64 {
        let k = 2.0 * self.ql / (self.qc * self.theta.cos()).abs();
        let x = (f_ghz - self.f_r_ghz) / self.f_r_ghz;
        let d = Complex64::new(1.0, 2.0 * self.ql * x);
        let inner = 1.0 - k * Complex64::from_polar(1.0, self.theta) / d;
        let delay = Complex64::from_polar(
            1.0,
            -std::f64::consts::TAU * (f_ghz - f_ref_ghz) * self.delay_ns,
        );
        self.a * delay * inner
    }

    fn to_vec(self, with_delay: bool) -> Vec<f64> {
        let mut v = vec![
            self.a.re,
            self.a.im,
            self.ql,
            self.qc,
            self.theta,
            self.f_r_ghz,
        ];
        if with_delay {
            v.push(self.delay_ns);
        }
        v
    }

    fn from_slice(p: &[f64]) -> Self {
        Self {
            a: Complex64::new(p[0], p[1]),
            ql: p[2],
            qc: p[3],
            theta: p[4],
            f_r_ghz: p[5],
            delay_ns: p.get(6).copied().unwrap_or(0.0),
        }
    }
}

/// `Qi = 1 / (1/Ql - 1/Qc)`; requires `0 < Ql < Qc`.
pub fn derive_qi(ql: f64, qc: f64) -> Result<f64> {
    if !(ql > 0.0) {
        return Err(Error::Nonphysical(format!("Ql must be > 0, got {ql}")));
    }
    if !(ql < qc) {
        return Err(Error::Nonphysical(format!(
            "Ql = {ql} >= Qc = {qc} gives a negative or infinite Qi"
        )));
    }
    Ok(1.0 / (1.0 / ql - 1.0 / qc))
}

/// Residuals `[Re(model - data); Im(model - data)]` with an analytic Jacobian.
///
/// The delay phase is referenced to `f_ref_ghz`, so the fitted scale is
/// `a e^{-2 pi i f_ref tau}`. A reference inside the trace decouples `tau` from `arg(a)`.
pub struct ReflectionProblem<'a> {
    pub trace: &'a ComplexTrace,
    pub with_delay: bool,
    pub f_ref_ghz: f64,
}

impl ReflectionProblem<'_> {
    pub fn n_params(&self) -> usize {
        if self.with_delay {
            7
        } else {
            6
        }
    }
}

impl LeastSquares for ReflectionProblem<'_> {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let model = ReflectionParams::from_slice(p.as_slice());
        let n = self.trace.len();
        let mut r = DVector::zeros(2 * n);
        for (k, (&f, &s)) in self
            .trace
            .freqs_ghz
            .iter()
            .zip(&self.trace.values)
            .enumerate()
        {
            let d = model.eval_referenced(f, self.f_ref_ghz) - s;
            r[k] = d.re;
            r[n + k] = d.im;
        }
        r
    }

    fn jacobian(&self, p: &DVector<f64>) -> Option<DMatrix<f64>> {
        let m = ReflectionParams::from_slice(p.as_slice());
        let n = self.trace.len();
        let np = self.n_params();
        let mut jac = DMatrix::zeros(2 * n, np);
        let cos = m.theta.cos();
        let k = 2.0 * m.ql / (m.qc * cos).abs();
        let e = Complex64::from_polar(1.0, m.theta);
        for (row, &f) in self.trace.freqs_ghz.iter().enumerate() {
            let x = (f - m.f_r_ghz) / m.f_r_ghz;
            let d = Complex64::new(1.0, 2.0 * m.ql * x);
            let ke_d = k * e / d;
            let inner = 1.0 - ke_d;
            let df = f - self.f_ref_ghz;
            let phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * df * m.delay_ns);
            let pre = m.a * phase;
            let d_ql = -(ke_d / m.ql - ke_d * 2.0 * I * x / d);
            let d_qc = ke_d / m.qc;
            let d_theta = -ke_d * (I + m.theta.tan());
            let d_fr = ke_d * 2.0 * I * m.ql * (-f / (m.f_r_ghz * m.f_r_ghz)) / d;
            let mut cols = [
                phase * inner,
                I * phase * inner,
                pre * d_ql,
                pre * d_qc,
                pre * d_theta,
                pre * d_fr,
                Complex64::new(0.0, 0.0),
            ];
            if self.with_delay {
                cols[6] = pre * inner * (-I * std::f64::consts::TAU * df);
            }
            for (c, v) in cols.iter().take(np).enumerate() {
                jac[(row, c)] = v.re;
                jac[(n + row, c)] = v.im;
            }
        }
        Some(jac)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessMethod {
    CircleFit,
    DipHeuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialGuess {
    pub params: ReflectionParams,
    pub method: GuessMethod,
    /// RMS noise per quadrature estimated from successive differences.
    pub noise: f64,
}

/// Robust per-quadrature noise estimate from the median of successive complex differences.
///
/// For white complex Gaussian noise with quadrature deviation `s`, the difference magnitude
/// is Rayleigh with scale `s sqrt(2)`, whose median is `2 s sqrt(ln 2)`.
pub fn noise_per_quadrature(values: &[Complex64]) -> f64 {
    let mut d: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    if d.is_empty() {
        return 0.0;
    }
    median_in_place(&mut d) / (2.0 * std::f64::consts::LN_2.sqrt())
}

pub(crate) fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Algebraic (Kasa) circle fit: centre and radius.
fn kasa_circle(points: &[Complex64]) -> Option<(Complex64, f64)> {
    let n = points.len();
    let mean = points.iter().sum::<Complex64>() / n as f64;
    let mut a = DMatrix::zeros(n, 3);
    let mut b = DVector::zeros(n);
    for (i, p) in points.iter().enumerate() {
        let q = p - mean;
        a[(i, 0)] = q.re;
        a[(i, 1)] = q.im;
        a[(i, 2)] = 1.0;
        b[i] = -(q.re * q.re + q.im * q.im);
    }
    let sol = (a.transpose() * &a).lu().solve(&(a.transpose() * b))?;
    let c = Complex64::new(-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = c.norm_sqr() - sol[2];
    (r2 > 0.0 && r2.is_finite()).then(|| (c + mean, r2.sqrt()))
}

fn edge_mean(values: &[Complex64]) -> Complex64 {
    let k = (values.len() / 20).max(1);
    let head = values[..k].iter().sum::<Complex64>();
    let tail = values[values.len() - k..].iter().sum::<Complex64>();
    (head + tail) / (2 * k) as f64
}

/// Slope of the unwrapped phase over the outer 15% of samples on each side (delay estimate).
fn delay_guess(trace: &ComplexTrace) -> f64 {
    let n = trace.len();
    let k = (n * 3 / 20).max(2);
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut count = 0.0;
    for range in [0..k, n - k..n] {
        let mut prev: Option<f64> = None;
        let mut offset = 0.0;
        let mut pts = Vec::new();
        for i in range {
            let mut ph = trace.values[i].arg() + offset;
            if let Some(p) = prev {
                while ph - p > std::f64::consts::PI {
                    ph -= std::f64::consts::TAU;
                    offset -= std::f64::consts::TAU;
                }
                while ph - p < -std::f64::consts::PI {
                    ph += std::f64::consts::TAU;
                    offset += std::f64::consts::TAU;
                }
            }
            prev = Some(ph);
            pts.push((trace.freqs_ghz[i], ph));
        }
        // Remove each segment's own mean so the two segments share only the slope.
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        for (x, y) in pts {
            let (x, y) = (x - mx, y - my);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            count += 1.0;
        }
    }
    let denom = sxx - sx * sx / count;
    if denom <= 0.0 {
        return 0.0;
    }
    let slope = (sxy - sx * sy / count) / denom;
    -slope / std::f64::consts::TAU
}

fn circle_guess(freqs: &[f64], values: &[Complex64], noise: f64) -> Option<ReflectionParams> {
    let (c, radius) = kasa_circle(values)?;
    let edge = edge_mean(values);
    if radius < 3.0 * noise || radius > 50.0 * edge.norm().max(f64::MIN_POSITIVE) {
        return None;
    }
    let dir = edge - c;
    if dir.norm() == 0.0 {
        return None;
    }
    let a = c + dir / dir.norm() * radius;
    let p_res = 2.0 * c - a;
    let ke = 1.0 - p_res / a;
    let mut theta = ke.arg();
    if theta.abs() >= 0.45 * std::f64::consts::PI {
        theta = theta.signum() * 0.45 * std::f64::consts::PI;
    }
    let diameter = ke.norm();

    // tan(-psi/2) = 2 Ql (f - f_r) / f_r, with psi the angle from the resonance point.
    let f_mid = 0.5 * (freqs[0] + freqs[freqs.len() - 1]);
    let reference = p_res - c;
    let pts: Vec<(f64, f64)> = freqs
        .iter()
        .zip(values)
        .filter_map(|(&f, &s)| {
            let psi = ((s - c) / reference).arg();
            let y = (-0.5 * psi).tan();
            (y.abs() < 3.0).then_some((f - f_mid, y))
        })
        .collect();
    if pts.len() < 5 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    if !(slope > 0.0) {
        return None;
    }
    let f_r = f_mid + mx - my / slope;
    let ql = 0.5 * slope * f_r;
    let qc = 2.0 * ql / (diameter * theta.cos());
    let guess = ReflectionParams {
        a,
        ql,
        qc,
        theta,
        f_r_ghz: f_r,
        delay_ns: 0.0,
    };
    let ok = [ql, qc, f_r].iter().all(|v| v.is_finite() && *v > 0.0)
        && f_r >= freqs[0]
        && f_r <= freqs[freqs.len() - 1];
    ok.then_some(guess)
}

fn dip_guess(freqs: &[f64], values: &[Complex64]) -> ReflectionParams {
    let a = edge_mean(values);
    let base = a.norm();
    let mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let (imin, &mmin) = mags
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty trace");
    let half = 0.5 * (base * base + mmin * mmin);
    let mut lo = imin;
    while lo > 0 && mags[lo] * mags[lo] < half {
        lo -= 1;
    }
    let mut hi = imin;
    while hi + 1 < mags.len() && mags[hi] * mags[hi] < half {
        hi += 1;
    }
    let f_r = freqs[imin];
    let span = freqs[freqs.len() - 1] - freqs[0];
    let fwhm = (freqs[hi] - freqs[lo]).max(span / freqs.len() as f64);
    let ql = f_r / fwhm;
    // Undercoupled branch of |1 - 2Ql/Qc| = |S_min| / |A|.
    let depth = (1.0 - mmin / base.max(f64::MIN_POSITIVE)).clamp(0.01, 1.99);
    ReflectionParams {
        a,
        ql,
        qc: 2.0 * ql / depth,
        theta: 0.0,
        f_r_ghz: f_r,
        delay_ns: 0.0,
    }
}

/// Initial parameters for [`fit_reflection`] from the trace geometry.
///
/// The circle-fit path is used when the samples trace a well-resolved circle; otherwise the
/// `|S|` dip heuristics take over and [`InitialGuess::method`] records the fallback.
pub fn initial_guess_reflection(trace: &ComplexTrace, with_delay: bool) -> Result<InitialGuess> {
    trace.validate()?;
    if trace.len() < 5 {
        return Err(Error::invalid(
            "need at least 5 samples for an initial guess",
        ));
    }
    let tau = if with_delay { delay_guess(trace) } else { 0.0 };
    let values: Vec<Complex64> = trace
        .freqs_ghz
        .iter()
        .zip(&trace.values)
        .map(|(&f, &s)| s * Complex64::from_polar(1.0, std::f64::consts::TAU * f * tau))
        .collect();
    let noise = noise_per_quadrature(&values);
    let (mut params, method) = match circle_guess(&trace.freqs_ghz, &values, noise) {
        Some(p) => (p, GuessMethod::CircleFit),
        None => (
            dip_guess(&trace.freqs_ghz, &values),
            GuessMethod::DipHeuristic,
        ),
    };
    params.delay_ns = tau;
    Ok(InitialGuess {
        params,
        method,
        noise,
    })
}

/// Result of a reflection fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonatorFit {
    pub params: ReflectionParams,
    /// `None` when the fit lands at `Qc <= Ql`.
    pub qi: Option<f64>,
    pub f_r_err_ghz: f64,
    pub ql_err: f64,
    pub qc_err: f64,
    pub qi_err: Option<f64>,
    pub theta_err: f64,
    pub residual_rms: f64,
    pub guess_method: GuessMethod,
    pub warnings: Vec<String>,
    /// Raw optimiser output. With a delay term, `a_re`/`a_im` here are referenced to the trace
    /// centre frequency; `params.a` is the unreferenced scale.
    pub fit: FitResult,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReflectionOptions {
    /// Fit a cable-delay term `e^{-2 pi i f tau}`.
    pub with_delay: bool,
    /// Start from these parameters instead of the automatic guess.
    pub init: Option<ReflectionParams>,
}

/// Fits the reflection model to a complex trace.
pub fn fit_reflection(trace: &ComplexTrace, opts: &ReflectionOptions) -> Result<ResonatorFit> {
    trace.validate()?;
    if trace.len() < MIN_POINTS {
        return Err(Error::invalid(format!(
            "need at least {MIN_POINTS} samples, got {}",
            trace.len()
        )));
    }
    let guess = initial_guess_reflection(trace, opts.with_delay)?;

    let de_delayed: Vec<Complex64> = trace
        .freqs_ghz
        .iter()
        .zip(&trace.values)
        .map(|(&f, &s)| {
            s * Complex64::from_polar(1.0, std::f64::consts::TAU * f * guess.params.delay_ns)
        })
        .collect();
    let edge = edge_mean(&de_delayed);
    let depth = de_delayed
        .iter()
        .map(|s| (s - edge).norm())
        .fold(0.0, f64::max);
    let noise_floor = guess.noise * std::f64::consts::SQRT_2;
    if depth <= 3.0 * noise_floor || depth <= 1e-6 * edge.norm() {
        return Err(Error::NoResonance {
            depth,
            noise: noise_floor,
        });
    }

    let mut init = opts.init.unwrap_or(guess.params);
    if !opts.with_delay {
        init.delay_ns = 0.0;
    }
    let f_ref = if opts.with_delay {
        0.5 * (trace.freqs_ghz[0] + trace.freqs_ghz[trace.len() - 1])
    } else {
        0.0
    };
    let rotate = |tau: f64, sign: f64| {
        Complex64::from_polar(1.0, sign * std::f64::consts::TAU * f_ref * tau)
    };
    init.a *= rotate(init.delay_ns, -1.0);
    let problem = ReflectionProblem {
        trace,
        with_delay: opts.with_delay,
        f_ref_ghz: f_ref,
    };
    let mut names = vec!["a_re", "a_im", "ql", "qc", "theta", "f_r_ghz"];
    if opts.with_delay {
        names.push("delay_ns");
    }
    let fit = lm_minimize(&problem, &init.to_vec(opts.with_delay))?.with_names(&names);
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
        });
    }
    let mut params = ReflectionParams::from_slice(&fit.params);
    params.a *= rotate(params.delay_ns, 1.0);
    let mut warnings = Vec::new();
    if params.theta.abs() >= std::f64::consts::FRAC_PI_2 {
        warnings.push(format!("theta = {} left (-pi/2, pi/2)", params.theta));
    }
    let span = trace.freqs_ghz[trace.len() - 1] - trace.freqs_ghz[0];
    if span < 3.0 * params.linewidth_ghz() {
        warnings.push("trace spans fewer than 3 linewidths".to_string());
    }
    let (qi, qi_err) = match derive_qi(params.ql, params.qc) {
        Ok(qi) => {
            let gl = (qi / params.ql).powi(2);
            let gc = -(qi / params.qc).powi(2);
            let c = &fit.covariance;
            let var = gl * gl * c[2][2] + gc * gc * c[3][3] + 2.0 * gl * gc * c[2][3];
            (Some(qi), Some(var.max(0.0).sqrt()))
        }
        Err(e) => {
            warnings.push(format!("nonphysical Qi: {e}"));
            (None, None)
        }
    };
    Ok(ResonatorFit {
        params,
        qi,
        f_r_err_ghz: fit.std_errors[5],
        ql_err: fit.std_errors[2],
        qc_err: fit.std_errors[3],
        qi_err,
        theta_err: fit.std_errors[4],
        residual_rms: fit.rms(),
        guess_method: guess.method,
        warnings,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn trace_for(p: &ReflectionParams, n: usize, span_lw: f64) -> ComplexTrace {
        let lw = p.linewidth_ghz();
        let freqs: Vec<f64> = (0..n)
            .map(|i| p.f_r_ghz + lw * span_lw * (i as f64 / (n - 1) as f64 - 0.5))
            .collect();
        let values = freqs.iter().map(|&f| p.eval(f)).collect();
        ComplexTrace::new(freqs, values).unwrap()
    }

    #[test]
    fn derive_qi_values() {
        let qi = derive_qi(6740.0, 7360.0).unwrap();
        assert_relative_eq!(qi, 6740.0 * 7360.0 / 620.0, max_relative = 1e-12);
        assert!((75_000.0..=85_000.0).contains(&qi));
        assert_relative_eq!(derive_qi(500.0, f64::INFINITY).unwrap(), 500.0);
        let ql: f64 = 1.0 / (1.0 / 27_000.0 + 1.0 / 7270.0);
        assert_relative_eq!(ql, 27_000.0 * 7270.0 / 34_270.0, max_relative = 1e-12);
        assert_relative_eq!(
            derive_qi(ql, 7270.0).unwrap(),
            27_000.0,
            max_relative = 1e-12
        );
        assert!(matches!(
            derive_qi(7360.0, 6740.0),
            Err(Error::Nonphysical(_))
        ));
        assert!(derive_qi(7000.0, 7000.0).is_err());
    }

    #[test]
    fn resonance_point_on_circle() {
        let p = ReflectionParams::new(5.443, 6740.0, 7360.0, 0.0);
        let s = p.eval(p.f_r_ghz);
        assert_relative_eq!(s.re, 1.0 - 2.0 * 6740.0 / 7360.0, epsilon = 1e-14);
        assert!(s.im.abs() < 1e-14);
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let mut p = ReflectionParams::new(5.2816, 5729.0, 7270.0, 0.21);
        p.a = Complex64::new(0.7, -0.4);
        p.delay_ns = 3.0;
        let trace = trace_for(&p, 60, 8.0);
        for with_delay in [false, true] {
            let problem = ReflectionProblem {
                trace: &trace,
                with_delay,
                f_ref_ghz: if with_delay { 5.28 } else { 0.0 },
            };
            let mut v = p.to_vec(with_delay);
            v[2] *= 1.01;
            v[4] += 0.05;
            let x = DVector::from_vec(v);
            let ja = problem.jacobian(&x).unwrap();
            // Steps small against the linewidth so truncation error stays below 1e-6.
            let lw = p.linewidth_ghz();
            let jn = DMatrix::from_fn(ja.nrows(), ja.ncols(), |r, c| {
                let h = if c == 5 {
                    1e-5 * lw
                } else {
                    1e-6 * x[c].abs().max(1.0)
                };
                let mut up = x.clone();
                let mut down = x.clone();
                up[c] += h;
                down[c] -= h;
                (problem.residuals(&up)[r] - problem.residuals(&down)[r]) / (2.0 * h)
            });
            for c in 0..ja.ncols() {
                let col_norm = jn.column(c).norm();
                let diff = (ja.column(c) - jn.column(c)).norm();
                assert!(diff <= 1e-6 * col_norm, "column {c}: {diff} vs {col_norm}");
            }
        }
    }

    #[test]
    fn noiseless_guess_close() {
        let p = ReflectionParams::new(5.443, 6740.0, 7360.0, 0.0);
        let trace = trace_for(&p, 201, 10.0);
        let g = initial_guess_reflection(&trace, false).unwrap();
        assert_eq!(g.method, GuessMethod::CircleFit);
        assert!((g.params.f_r_ghz - p.f_r_ghz).abs() < 0.5 * p.linewidth_ghz());
        assert!(g.params.theta.abs() < 0.1);
    }

    #[test]
    fn off_resonant_trace_uses_fallback() {
        let p = ReflectionParams::new(5.443, 6740.0, 7360.0, 0.0);
        let lw = p.linewidth_ghz();
        let freqs: Vec<f64> = (0..100)
            .map(|i| 5.443 + 40.0 * lw + i as f64 * lw * 0.2)
            .collect();
        let values = freqs.iter().map(|&f| p.eval(f)).collect();
        let trace = ComplexTrace::new(freqs, values).unwrap();
        let g = initial_guess_reflection(&trace, false).unwrap();
        assert_eq!(g.method, GuessMethod::DipHeuristic);
    }

    #[test]
    fn noiseless_round_trip() {
        let mut p = ReflectionParams::new(5.2816, 5727.6, 7270.0, 0.12);
        p.a = Complex64::from_polar(0.8, 1.1);
        let trace = trace_for(&p, 201, 10.0);
        let fit = fit_reflection(&trace, &ReflectionOptions::default()).unwrap();
        assert_relative_eq!(fit.params.ql, p.ql, max_relative = 1e-8);
        assert_relative_eq!(fit.params.qc, p.qc, max_relative = 1e-8);
        assert_relative_eq!(fit.params.f_r_ghz, p.f_r_ghz, max_relative = 1e-12);
        assert_eq!(
            fit.qi.unwrap(),
            derive_qi(fit.params.ql, fit.params.qc).unwrap()
        );
    }

    #[test]
    fn delay_round_trip() {
        let mut p = ReflectionParams::new(5.443, 6740.0, 7360.0, -0.1);
        p.delay_ns = 0.8;
        let trace = trace_for(&p, 301, 12.0);
        let fit = fit_reflection(
            &trace,
            &ReflectionOptions {
                with_delay: true,
                init: None,
            },
        )
        .unwrap();
        assert_relative_eq!(fit.params.delay_ns, 0.8, max_relative = 1e-6);
        assert_relative_eq!(fit.params.ql, p.ql, max_relative = 1e-6);
        assert_eq!(fit.fit.params.len(), 7);
    }

    #[test]
    fn flat_trace_has_no_resonance() {
        let p = ReflectionParams::new(5.443, 6740.0, 1e13, 0.0);
        let trace = trace_for(&p, 101, 10.0);
        assert!(matches!(
            fit_reflection(&trace, &ReflectionOptions::default()),
            Err(Error::NoResonance { .. })
        ));
    }

    #[test]
    fn too_few_points() {
        let p = ReflectionParams::new(5.443, 6740.0, 7360.0, 0.0);
        let trace = trace_for(&p, 20, 10.0);
        assert!(matches!(
            fit_reflection(&trace, &ReflectionOptions::default()),
            Err(Error::InvalidInput(_))
        ));
    }
}
