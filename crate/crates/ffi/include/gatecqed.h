/* SPDX-License-Identifier: Apache-2.0 */

#ifndef GATECQED_H
#define GATECQED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Maximum number of levels reported in [`GcqSpectrum`].
#define GCQ_MAX_LEVELS 10

// Result of every call. Zero means success.
typedef enum GcqStatus {
  GCQ_STATUS_OK = 0,
  GCQ_STATUS_NULL_POINTER = 1,
  GCQ_STATUS_INVALID_INPUT = 2,
  GCQ_STATUS_TRUNCATION = 3,
  GCQ_STATUS_EIGENSOLVER = 4,
  GCQ_STATUS_NO_SOLUTION = 5,
  GCQ_STATUS_RESONANCE = 6,
  GCQ_STATUS_POLE = 7,
  GCQ_STATUS_INCONSISTENT_SIGN = 8,
  GCQ_STATUS_NO_RESONANCE = 9,
  GCQ_STATUS_NO_DIP = 10,
  GCQ_STATUS_CANNOT_INIT = 11,
  GCQ_STATUS_NONPHYSICAL = 12,
  GCQ_STATUS_SINGULAR = 13,
  GCQ_STATUS_NON_FINITE = 14,
  GCQ_STATUS_NOT_CONVERGED = 15,
  GCQ_STATUS_IO = 16,
  GCQ_STATUS_PANIC = 17,
} GcqStatus;

typedef enum GcqRegime {
  GCQ_REGIME_PINCH_OFF = 0,
  GCQ_REGIME_DISPERSIVE = 1,
  GCQ_REGIME_RESONANT = 2,
} GcqRegime;

// Real-valued series, e.g. a lineshape or a Rabi record.
typedef struct GcqSeries GcqSeries;

// Result of a gate-voltage sweep.
typedef struct GcqSweep GcqSweep;

// Complex reflection trace.
typedef struct GcqTrace GcqTrace;

// Qubit spectrum in MHz. `levels[0..n_levels]` are ascending eigenenergies.
typedef struct GcqSpectrum {
  double f01;
  double f12;
  double f02;
  double alpha;
  size_t n_levels;
  double levels[GCQ_MAX_LEVELS];
} GcqSpectrum;

// Truth of a synthetic reflection trace. `points = 0` selects the default window around
// `f_r`; otherwise the trace spans `[f_start_ghz, f_stop_ghz]`.
typedef struct GcqReflectionSynth {
  double f_r_ghz;
  double ql;
  double qc;
  double theta;
  double amplitude;
  double phase;
  double delay_ns;
  double f_start_ghz;
  double f_stop_ghz;
  size_t points;
} GcqReflectionSynth;

// Reflection fit. `qi` and `qi_err` are NaN when the fit lands at `Qc <= Ql`.
typedef struct GcqResonatorFit {
  double f_r_ghz;
  double ql;
  double qc;
  double qi;
  double theta;
  double a_re;
  double a_im;
  double delay_ns;
  double f_r_err_ghz;
  double ql_err;
  double qc_err;
  double qi_err;
  double theta_err;
  double residual_rms;
  size_t iterations;
  bool converged;
} GcqResonatorFit;

// Lorentzian parameters; the frequency axis unit is that of the input series.
typedef struct GcqLorentzian {
  double f0;
  double fwhm;
  double depth;
  double offset;
} GcqLorentzian;

typedef struct GcqLorentzianFit {
  struct GcqLorentzian params;
  struct GcqLorentzian errors;
  size_t iterations;
  bool converged;
} GcqLorentzianFit;

// Rabi parameters with `omega` in rad/ns.
typedef struct GcqRabi {
  double amplitude;
  double t_r_ns;
  double omega;
  double phase;
  double slope;
  double intercept;
} GcqRabi;

typedef struct GcqRabiFit {
  struct GcqRabi params;
  struct GcqRabi errors;
  // Frequency resolution of the record (rad/ns).
  double dft_bin;
  size_t iterations;
  bool converged;
} GcqRabiFit;

// One sweep point. `chi_mhz` is zero outside the dispersive regime.
typedef struct GcqSweepRecord {
  double v_g;
  double junction_value;
  double f_q_mhz;
  double alpha_mhz;
  double chi_mhz;
  double f_c_ghz;
  double f_plus_ghz;
  double f_minus_ghz;
  enum GcqRegime regime;
} GcqSweepRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated, truncated to
// `len`). Returns the full message length plus one, so a call with `len = 0` sizes the
// buffer. The message is empty after a successful call.
size_t gcq_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *gcq_version(void);

// Charge-basis transmon spectrum with cutoff `n_cut`.
enum GcqStatus gcq_transmon_levels(double ec_mhz,
                                   double ej_mhz,
                                   double ng,
                                   size_t n_cut,
                                   struct GcqSpectrum *out);

// Gatemon spectrum for `n_channels` Andreev channels on a phase grid of `grid_n` points.
enum GcqStatus gcq_gatemon_levels(double ec_mhz,
                                  double gap_mhz,
                                  double ng,
                                  const double *transmissions,
                                  size_t n_channels,
                                  size_t grid_n,
                                  struct GcqSpectrum *out);

// Single-channel transmission that reproduces `alpha_mhz`.
enum GcqStatus gcq_infer_transmission(double alpha_mhz, double ec_mhz, double gap_mhz, double *out);

// TE(m,n,p) frequency in GHz of a rectangular cavity with sides in metres.
enum GcqStatus gcq_te_mode_frequency(double a_m,
                                     double b_m,
                                     double d_m,
                                     uint32_t m,
                                     uint32_t n,
                                     uint32_t p,
                                     double *out);

enum GcqStatus gcq_derive_qi(double ql, double qc, double *out);

enum GcqStatus gcq_dispersive_shift_two_level(double g_mhz, double delta_mhz, double *out);

enum GcqStatus gcq_dispersive_shift_transmon(double g_mhz,
                                             double delta_mhz,
                                             double alpha_mhz,
                                             double *out);

enum GcqStatus gcq_coupling_from_shift(double chi_mhz, double delta_mhz, double *out);

// Upper and lower branch frequencies (GHz) of the cavity-qubit anti-crossing.
enum GcqStatus gcq_anti_crossing(double f_bare_ghz,
                                 double f_q_ghz,
                                 double g_mhz,
                                 double *out_plus,
                                 double *out_minus);

// Builds a trace from `n` frequencies and the real and imaginary parts of `S`.
enum GcqStatus gcq_trace_new(const double *freqs_ghz,
                             const double *re,
                             const double *im,
                             size_t n,
                             struct GcqTrace **out);

// Synthesises a reflection trace. A non-finite `snr_db` (e.g. NaN) gives a noiseless trace.
enum GcqStatus gcq_trace_synth(const struct GcqReflectionSynth *spec,
                               double snr_db,
                               uint64_t seed,
                               struct GcqTrace **out);

// Number of samples, or 0 for a null handle.
size_t gcq_trace_len(const struct GcqTrace *trace);

// Copies the trace into caller buffers of at least `gcq_trace_len` values each.
enum GcqStatus gcq_trace_copy(const struct GcqTrace *trace,
                              double *freqs_ghz,
                              double *re,
                              double *im,
                              size_t n);

void gcq_trace_free(struct GcqTrace *trace);

enum GcqStatus gcq_series_new(const double *x, const double *y, size_t n, struct GcqSeries **out);

size_t gcq_series_len(const struct GcqSeries *series);

enum GcqStatus gcq_series_copy(const struct GcqSeries *series, double *x, double *y, size_t n);

void gcq_series_free(struct GcqSeries *series);

// Damped Rabi record `A e^{-t/T_R} cos(2 pi f t + phase) + slope t + offset` on
// `points` times in `[t_start_ns, t_stop_ns]`. Non-finite `snr_db` is noiseless.
enum GcqStatus gcq_series_synth_rabi(double amplitude,
                                     double t_r_ns,
                                     double rabi_mhz,
                                     double phase,
                                     double slope,
                                     double offset,
                                     double t_start_ns,
                                     double t_stop_ns,
                                     size_t points,
                                     double snr_db,
                                     uint64_t seed,
                                     struct GcqSeries **out);

// Lorentzian dip `offset - depth / (1 + (2 (f - f0) / fwhm)^2)` on `points` frequencies.
enum GcqStatus gcq_series_synth_lorentzian(double f0_ghz,
                                           double fwhm_mhz,
                                           double depth,
                                           double offset,
                                           double f_start_ghz,
                                           double f_stop_ghz,
                                           size_t points,
                                           double snr_db,
                                           uint64_t seed,
                                           struct GcqSeries **out);

enum GcqStatus gcq_fit_reflection(const struct GcqTrace *trace,
                                  bool with_delay,
                                  struct GcqResonatorFit *out);

enum GcqStatus gcq_fit_lorentzian(const struct GcqSeries *series, struct GcqLorentzianFit *out);

enum GcqStatus gcq_fit_rabi(const struct GcqSeries *series, struct GcqRabiFit *out);

// Runs a gate sweep described by a TOML document with the `profile`, `solver`, `cavity`
// and `v_g` keys of a `[sweep]` table (inline tables, no file-backed profiles).
enum GcqStatus gcq_sweep_run_toml(const char *toml_text, struct GcqSweep **out);

size_t gcq_sweep_len(const struct GcqSweep *sweep);

enum GcqStatus gcq_sweep_record(const struct GcqSweep *sweep,
                                size_t index,
                                struct GcqSweepRecord *out);

void gcq_sweep_free(struct GcqSweep *sweep);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GATECQED_H */
