// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use gatecqed::config::{CavityConfig, QubitConfig, RunConfig};
use gatecqed::data::Series;
use gatecqed::estimators::{self, ReflectionOptions};
use gatecqed::pipeline::{run_pipeline, PipelineSpec};
use gatecqed::spectra::{self, Junction};
use gatecqed::svg::{self, Line};
use gatecqed::synth::{self, Dataset};
use gatecqed::{io, Error, Result};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "GATECQED_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "gatecqed",
    version,
    about = "Qubit spectra, cavity coupling and resonator fitting"
)]
struct Cli {
    /// Output directory; overrides the config file and $GATECQED_OUT_DIR.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG rendering of the data.
    #[arg(long, global = true)]
    plot: bool,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the complex reflection model to a `freq_ghz,re,im` trace.
    FitResonator {
        /// Input CSV.
        input: PathBuf,
        /// Fit a cable-delay phase term.
        #[arg(long)]
        delay: bool,
        /// TOML run configuration.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit a Lorentzian dip to a `freq_ghz,mag_db` (or `freq_ghz,mag`) spectrum.
    FitLorentzian { input: PathBuf },
    /// Fit a damped Rabi oscillation to a `t_ns,y` record.
    FitRabi { input: PathBuf },
    /// Diagonalise a transmon or gatemon Hamiltonian.
    SimulateQubit(QubitArgs),
    /// Eigenfrequency of a rectangular cavity mode.
    SimulateCavity(CavityArgs),
    /// Cavity response along a gate-voltage sweep.
    SweepGate {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate a seeded synthetic dataset plus its truth sidecar.
    Synth {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config SNR (dB).
        #[arg(long)]
        snr_db: Option<f64>,
    },
    /// Synthesise, fit and compare against tolerances; defaults to the bundled suite.
    Pipeline {
        /// TOML run configuration.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct QubitArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Charging energy (MHz).
    #[arg(long)]
    ec_mhz: Option<f64>,
    /// Josephson energy (MHz); selects the transmon solver.
    #[arg(long)]
    ej_mhz: Option<f64>,
    /// Superconducting gap (MHz); selects the gatemon solver.
    #[arg(long)]
    gap_mhz: Option<f64>,
    /// Channel transmission; repeat for several channels.
    #[arg(long = "transmission")]
    transmissions: Vec<f64>,
    /// Gate-charge offset.
    #[arg(long)]
    ng: Option<f64>,
    /// Charge-basis cutoff (default 30).
    #[arg(long)]
    n_cut: Option<usize>,
    /// Odd phase-grid size (default 201).
    #[arg(long)]
    grid_n: Option<usize>,
    /// Report the single-channel transmission that reproduces this anharmonicity.
    #[arg(long, allow_hyphen_values = true)]
    infer_alpha_mhz: Option<f64>,
}

#[derive(Args)]
struct CavityArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cavity length (mm).
    #[arg(long)]
    a_mm: Option<f64>,
    /// Cavity width (mm).
    #[arg(long)]
    b_mm: Option<f64>,
    /// Cavity height (mm).
    #[arg(long)]
    d_mm: Option<f64>,
    /// Mode indices `m,n,p`.
    #[arg(long, value_delimiter = ',')]
    mode: Option<Vec<u32>>,
}

struct Ctx {
    out: Option<PathBuf>,
    plot: bool,
}

impl Ctx {
    fn new(cli_out: Option<PathBuf>, cfg: Option<&RunConfig>, plot: bool) -> Self {
        let out = cli_out
            .or_else(|| cfg.and_then(|c| c.out_dir.clone()))
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
        Self { out, plot }
    }

    /// Output directory, falling back to the working directory.
    fn dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir().join(name);
        io::write_file(&path, bytes)?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    fn write_json(&self, name: &str, value: &Value) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

fn load_config(path: Option<&Path>) -> Result<Option<RunConfig>> {
    path.map(RunConfig::load).transpose()
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into())
}

fn fit_json(command: &str, input: &Path, fit: &estimators::FitResult, extra: Value) -> Value {
    let mut v = json!({
        "command": command,
        "input": input.display().to_string(),
        "converged": fit.converged,
        "iterations": fit.iterations,
        "chi2": fit.chi2,
        "residual_rms": fit.rms(),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn fit_resonator(ctx: &Ctx, input: &Path, delay: bool, cfg: Option<&RunConfig>) -> Result<Value> {
    let trace = io::read_trace(input)?;
    let with_delay = delay || cfg.and_then(|c| c.fit).is_some_and(|f| f.with_delay);
    let fit = estimators::fit_reflection(
        &trace,
        &ReflectionOptions {
            with_delay,
            init: None,
        },
    )?;
    let p = &fit.params;
    let mut params = json!({
        "f_r_ghz": p.f_r_ghz, "ql": p.ql, "qc": p.qc, "theta": p.theta,
        "a_re": p.a.re, "a_im": p.a.im,
    });
    let mut errors = json!({
        "f_r_ghz": fit.f_r_err_ghz, "ql": fit.ql_err, "qc": fit.qc_err, "theta": fit.theta_err,
    });
    if with_delay {
        params["delay_ns"] = json!(p.delay_ns);
        errors["delay_ns"] = json!(fit.fit.error("delay_ns"));
    }
    let out = fit_json(
        "fit-resonator",
        input,
        &fit.fit,
        json!({
            "with_delay": with_delay,
            "params": params,
            "errors": errors,
            "qi": fit.qi,
            "qi_err": fit.qi_err,
            "guess_method": fit.guess_method,
            "warnings": fit.warnings,
        }),
    );
    if ctx.out.is_some() || ctx.plot {
        let name = stem(input);
        let mut buf = Vec::new();
        io::write_reflection_residuals(&mut buf, &trace, p)?;
        ctx.write(&format!("{name}_residuals.csv"), &buf)?;
        ctx.write_json(&format!("{name}_fit.json"), &out)?;
        if ctx.plot {
            let model: Vec<f64> = trace.freqs_ghz.iter().map(|&f| p.eval(f).norm()).collect();
            let svg = svg::line_plot(
                &format!("{name}: reflection fit"),
                "freq_ghz",
                "|S|",
                &[
                    Line {
                        label: "data",
                        x: &trace.freqs_ghz,
                        y: &trace.magnitudes(),
                    },
                    Line {
                        label: "fit",
                        x: &trace.freqs_ghz,
                        y: &model,
                    },
                ],
            );
            ctx.write(&format!("{name}_fit.svg"), svg.as_bytes())?;
        }
    }
    Ok(out)
}

fn write_series_fit(
    ctx: &Ctx,
    input: &Path,
    series: &Series,
    x_label: &str,
    out: &Value,
    model: impl Fn(f64) -> f64,
) -> Result<()> {
    if ctx.out.is_none() && !ctx.plot {
        return Ok(());
    }
    let name = stem(input);
    let mut buf = Vec::new();
    io::write_series_residuals(&mut buf, series, x_label, &model)?;
    ctx.write(&format!("{name}_residuals.csv"), &buf)?;
    ctx.write_json(&format!("{name}_fit.json"), out)?;
    if ctx.plot {
        let m: Vec<f64> = series.x.iter().map(|&x| model(x)).collect();
        let svg = svg::line_plot(
            &format!("{name}: fit"),
            x_label,
            "y",
            &[
                Line {
                    label: "data",
                    x: &series.x,
                    y: &series.y,
                },
                Line {
                    label: "fit",
                    x: &series.x,
                    y: &m,
                },
            ],
        );
        ctx.write(&format!("{name}_fit.svg"), svg.as_bytes())?;
    }
    Ok(())
}

fn fit_lorentzian(ctx: &Ctx, input: &Path) -> Result<Value> {
    let (series, [x_label, _]) = io::read_series(input)?;
    let fit = estimators::fit_lorentzian(&series)?;
    let (p, e) = (&fit.params, &fit.errors);
    let out = fit_json(
        "fit-lorentzian",
        input,
        &fit.fit,
        json!({
            "params": { "f0": p.f0, "fwhm": p.fwhm, "depth": p.depth, "offset": p.offset },
            "errors": { "f0": e.f0, "fwhm": e.fwhm, "depth": e.depth, "offset": e.offset },
            "x_units": x_label,
        }),
    );
    let params = *p;
    write_series_fit(ctx, input, &series, x_label, &out, move |x| params.eval(x))?;
    Ok(out)
}

fn fit_rabi(ctx: &Ctx, input: &Path) -> Result<Value> {
    let (series, [x_label, _]) = io::read_series(input)?;
    if x_label != "t_ns" {
        return Err(Error::Csv {
            path: input.display().to_string(),
            line: 1,
            msg: "a Rabi record needs the header `t_ns,y`".into(),
        });
    }
    let fit = estimators::fit_rabi(&series)?;
    let (p, e) = (&fit.params, &fit.errors);
    let out = fit_json(
        "fit-rabi",
        input,
        &fit.fit,
        json!({
            "params": {
                "amplitude": p.amplitude, "t_r_ns": p.t_r_ns, "omega_rad_per_ns": p.omega,
                "phase": p.phase, "slope": p.slope, "intercept": p.intercept,
            },
            "errors": {
                "amplitude": e.amplitude, "t_r_ns": e.t_r_ns, "omega_rad_per_ns": e.omega,
                "phase": e.phase, "slope": e.slope, "intercept": e.intercept,
            },
            "rabi_mhz": p.omega / std::f64::consts::TAU * 1e3,
            "dft_bin_rad_per_ns": fit.dft_bin,
        }),
    );
    let params = *p;
    write_series_fit(ctx, input, &series, x_label, &out, move |x| params.eval(x))?;
    Ok(out)
}

fn simulate_qubit(ctx: &Ctx, args: &QubitArgs, cfg: Option<&RunConfig>) -> Result<Value> {
    let mut q = match cfg.and_then(|c| c.qubit.clone()) {
        Some(q) => q,
        None => QubitConfig {
            ec_mhz: args.ec_mhz.ok_or_else(|| {
                Error::Config("simulate-qubit needs --ec-mhz or a [qubit] section".into())
            })?,
            ng: 0.0,
            ej_mhz: None,
            gap_mhz: None,
            transmissions: None,
            n_cut: spectra::DEFAULT_N_CUT,
            grid_n: spectra::DEFAULT_GRID_N,
            infer_alpha_mhz: None,
        },
    };
    if let Some(v) = args.ec_mhz {
        q.ec_mhz = v;
    }
    if let Some(v) = args.ng {
        q.ng = v;
    }
    if let Some(v) = args.ej_mhz {
        q.ej_mhz = Some(v);
        q.gap_mhz = None;
        q.transmissions = None;
    }
    if let Some(v) = args.gap_mhz {
        q.gap_mhz = Some(v);
        q.ej_mhz = None;
    }
    if !args.transmissions.is_empty() {
        q.transmissions = Some(args.transmissions.clone());
    }
    if let Some(v) = args.n_cut {
        q.n_cut = v;
    }
    if let Some(v) = args.grid_n {
        q.grid_n = v;
    }
    if let Some(v) = args.infer_alpha_mhz {
        q.infer_alpha_mhz = Some(v);
    }
    let params = q.params()?;
    let spectrum = match params.junction {
        Junction::Tunnel { .. } => spectra::transmon_levels(&params, q.n_cut)?,
        Junction::Andreev { .. } => spectra::gatemon_levels(&params, q.grid_n)?,
    };
    let mut out = spectrum.to_json();
    out["params"] = serde_json::to_value(&params)?;
    if let Some(alpha) = q.infer_alpha_mhz {
        let gap = q
            .gap_mhz
            .ok_or_else(|| Error::Config("transmission inference needs gap_mhz".into()))?;
        let t = spectra::infer_transmission(alpha, q.ec_mhz, gap)?;
        out["inferred_transmission"] = json!({
            "target_alpha_mhz": alpha,
            "transmission": t,
            "alpha_mhz": spectra::single_channel_alpha(q.ec_mhz, gap, t)?,
        });
    }
    if ctx.out.is_some() || ctx.plot {
        ctx.write_json("qubit.json", &out)?;
        let idx: Vec<f64> = (0..spectrum.levels.len()).map(|i| i as f64).collect();
        let rel: Vec<f64> = spectrum
            .levels
            .iter()
            .map(|e| e - spectrum.levels[0])
            .collect();
        let mut buf = Vec::new();
        io::write_series(
            &mut buf,
            &Series {
                x: idx.clone(),
                y: rel.clone(),
            },
            ["level", "energy_mhz"],
        )?;
        ctx.write("qubit_levels.csv", &buf)?;
        if ctx.plot {
            let svg = svg::line_plot(
                "qubit levels",
                "level",
                "energy_mhz",
                &[Line {
                    label: "E_k - E_0",
                    x: &idx,
                    y: &rel,
                }],
            );
            ctx.write("qubit_levels.svg", svg.as_bytes())?;
        }
    }
    Ok(out)
}

fn simulate_cavity(ctx: &Ctx, args: &CavityArgs, cfg: Option<&RunConfig>) -> Result<Value> {
    let mut c = cfg.and_then(|c| c.cavity).unwrap_or(CavityConfig {
        a_mm: 70.0,
        b_mm: 5.0,
        d_mm: 30.0,
        mode: [1, 0, 1],
    });
    if let Some(v) = args.a_mm {
        c.a_mm = v;
    }
    if let Some(v) = args.b_mm {
        c.b_mm = v;
    }
    if let Some(v) = args.d_mm {
        c.d_mm = v;
    }
    if let Some(m) = &args.mode {
        c.mode = <[u32; 3]>::try_from(m.as_slice()).map_err(|_| {
            Error::InvalidInput(format!("--mode takes three indices, got {}", m.len()))
        })?;
    }
    let f = spectra::te_mode_frequency(&c.geometry())?;
    let out = json!({
        "a_mm": c.a_mm, "b_mm": c.b_mm, "d_mm": c.d_mm,
        "mode": c.mode,
        "f_ghz": f,
    });
    if ctx.out.is_some() {
        ctx.write_json("cavity.json", &out)?;
    }
    Ok(out)
}

fn sweep_gate(ctx: &Ctx, cfg: &RunConfig) -> Result<Value> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep-gate needs a [sweep] section".into()))?;
    let result = spec.run()?;
    let out = serde_json::to_value(&result)?;
    if ctx.out.is_some() || ctx.plot {
        let mut buf = Vec::new();
        result.write_csv(&mut buf)?;
        ctx.write("sweep.csv", &buf)?;
        ctx.write_json("sweep.json", &out)?;
        if ctx.plot {
            let v: Vec<f64> = result.records.iter().map(|r| r.v_g).collect();
            let fc: Vec<f64> = result.records.iter().map(|r| r.f_c_ghz).collect();
            let fq: Vec<f64> = result.records.iter().map(|r| r.f_q_mhz * 1e-3).collect();
            let svg = svg::line_plot(
                "gate sweep",
                "V_G",
                "frequency (GHz)",
                &[
                    Line {
                        label: "f_C",
                        x: &v,
                        y: &fc,
                    },
                    Line {
                        label: "f_Q",
                        x: &v,
                        y: &fq,
                    },
                ],
            );
            ctx.write("sweep.svg", svg.as_bytes())?;
        }
    }
    Ok(out)
}

fn synth_cmd(ctx: &Ctx, cfg: &RunConfig, seed: Option<u64>, snr_db: Option<f64>) -> Result<Value> {
    let mut spec = cfg
        .synth
        .clone()
        .ok_or_else(|| Error::Config("synth needs a [synth] section".into()))?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if snr_db.is_some() {
        spec.snr_db = snr_db;
    }
    let generated = synth::generate(&spec)?;
    let kind = spec.dataset.kind();
    let mut buf = Vec::new();
    let mut svg_text = None;
    match &generated.dataset {
        Dataset::Trace(t) => {
            io::write_trace(&mut buf, t)?;
            if ctx.plot {
                svg_text = Some(svg::line_plot(
                    kind,
                    "freq_ghz",
                    "|S|",
                    &[Line {
                        label: "|S|",
                        x: &t.freqs_ghz,
                        y: &t.magnitudes(),
                    }],
                ));
            }
        }
        Dataset::Series {
            series,
            x_label,
            y_label,
        } => {
            io::write_series(&mut buf, series, [x_label, y_label])?;
            if ctx.plot {
                svg_text = Some(svg::line_plot(
                    kind,
                    x_label,
                    y_label,
                    &[Line {
                        label: y_label,
                        x: &series.x,
                        y: &series.y,
                    }],
                ));
            }
        }
        Dataset::Map(m) => {
            io::write_map(&mut buf, m)?;
            if ctx.plot {
                svg_text = Some(svg::heatmap(kind, m));
            }
        }
    }
    let mut files = vec![ctx.write(&format!("{kind}.csv"), &buf)?];
    files.push(ctx.write_json(&format!("{kind}_truth.json"), &generated.truth)?);
    if let Some(s) = svg_text {
        files.push(ctx.write(&format!("{kind}.svg"), s.as_bytes())?);
    }
    Ok(json!({
        "command": "synth",
        "kind": kind,
        "seed": spec.seed,
        "files": files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>(),
    }))
}

fn pipeline_cmd(ctx: &Ctx, cfg: Option<&RunConfig>) -> Result<(Value, bool)> {
    let spec = match cfg {
        Some(c) => c
            .pipeline
            .clone()
            .ok_or_else(|| Error::Config("pipeline needs a [pipeline] section".into()))?,
        None => PipelineSpec::default_suite(),
    };
    let report = run_pipeline(&spec)?;
    for case in &report.cases {
        for q in &case.checks {
            eprintln!(
                "{} {}/{}: truth {} fitted {} |err| {:.3e} <= {:.3e}",
                if q.pass { "PASS" } else { "FAIL" },
                case.name,
                q.name,
                q.truth,
                q.fitted,
                q.abs_error,
                q.allowed
            );
        }
    }
    let out = serde_json::to_value(&report)?;
    if ctx.out.is_some() {
        ctx.write_json("pipeline_report.json", &out)?;
    }
    Ok((out, report.pass))
}

fn run(cli: Cli) -> Result<bool> {
    let (value, ok) = match &cli.command {
        Command::FitResonator {
            input,
            delay,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let ctx = Ctx::new(cli.out.clone(), cfg.as_ref(), cli.plot);
            (fit_resonator(&ctx, input, *delay, cfg.as_ref())?, true)
        }
        Command::FitLorentzian { input } => {
            let ctx = Ctx::new(cli.out.clone(), None, cli.plot);
            (fit_lorentzian(&ctx, input)?, true)
        }
        Command::FitRabi { input } => {
            let ctx = Ctx::new(cli.out.clone(), None, cli.plot);
            (fit_rabi(&ctx, input)?, true)
        }
        Command::SimulateQubit(args) => {
            let cfg = load_config(args.config.as_deref())?;
            let ctx = Ctx::new(cli.out.clone(), cfg.as_ref(), cli.plot);
            (simulate_qubit(&ctx, args, cfg.as_ref())?, true)
        }
        Command::SimulateCavity(args) => {
            let cfg = load_config(args.config.as_deref())?;
            let ctx = Ctx::new(cli.out.clone(), cfg.as_ref(), cli.plot);
            (simulate_cavity(&ctx, args, cfg.as_ref())?, true)
        }
        Command::SweepGate { config } => {
            let cfg = RunConfig::load(config)?;
            let ctx = Ctx::new(cli.out.clone(), Some(&cfg), cli.plot);
            (sweep_gate(&ctx, &cfg)?, true)
        }
        Command::Synth {
            config,
            seed,
            snr_db,
        } => {
            let cfg = RunConfig::load(config)?;
            let ctx = Ctx::new(cli.out.clone(), Some(&cfg), cli.plot);
            (synth_cmd(&ctx, &cfg, *seed, *snr_db)?, true)
        }
        Command::Pipeline { config } => {
            let cfg = load_config(config.as_deref())?;
            let ctx = Ctx::new(cli.out.clone(), cfg.as_ref(), cli.plot);
            pipeline_cmd(&ctx, cfg.as_ref())?
        }
    };
    let mut stdout = std::io::stdout().lock();
    // A closed pipe (e.g. `| head`) is not an error for the run itself.
    if let Err(e) = writeln!(stdout, "{}", serde_json::to_string_pretty(&value)?) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more pipeline checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            let mut msg = e.to_string();
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                // Stage and gate-point messages already embed their source.
                if !msg.contains(&s.to_string()) {
                    msg.push_str(&format!(": {s}"));
                }
                src = s.source();
            }
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
