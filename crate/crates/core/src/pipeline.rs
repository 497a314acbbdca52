// SPDX-License-Identifier: Apache-2.0

//! End-to-end runner: synthesise (or read) a dataset, fit it, and compare the fitted
//! quantities with the truth under per-quantity tolerances.
//!
//! A quantity passes when `|fitted - truth| <= abs + rel * |truth|`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{self, ReflectionOptions};
use crate::io;
use crate::synth::{self, Dataset, DatasetSpec, SynthSpec};

/// Default suite shipped with the crate.
pub const DEFAULT_PIPELINE: &str = include_str!("../configs/pipeline.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    pub cases: Vec<PipelineCase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Reflection,
    Lorentzian,
    Rabi,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    #[serde(default)]
    pub rel: f64,
    #[serde(default)]
    pub abs: f64,
}

/// One synth -> fit -> compare run. Give `synth`, or `input` together with `estimator` and
/// `truth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineCase {
    pub name: String,
    #[serde(default)]
    pub synth: Option<SynthSpec>,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub estimator: Option<EstimatorKind>,
    /// Truth values; for synthesised data these override the generated ones.
    #[serde(default)]
    pub truth: BTreeMap<String, f64>,
    #[serde(default)]
    pub with_delay: bool,
    pub tolerances: BTreeMap<String, Tolerance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityCheck {
    pub name: String,
    pub truth: f64,
    pub fitted: f64,
    pub abs_error: f64,
    pub allowed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub name: String,
    pub estimator: EstimatorKind,
    pub pass: bool,
    pub checks: Vec<QuantityCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub pass: bool,
    pub cases: Vec<CaseReport>,
}

impl PipelineSpec {
    pub fn default_suite() -> Self {
        #[derive(Deserialize)]
        struct Wrapper {
            pipeline: PipelineSpec,
        }
        toml::from_str::<Wrapper>(DEFAULT_PIPELINE)
            .expect("bundled pipeline parses")
            .pipeline
    }
}

fn synth_truth(spec: &DatasetSpec) -> Result<(EstimatorKind, BTreeMap<String, f64>)> {
    let mut t = BTreeMap::new();
    let kind = match spec {
        DatasetSpec::ReflectionTrace(s) => {
            let p = s.params()?;
            t.insert("f_r_ghz".into(), p.f_r_ghz);
            t.insert("ql".into(), p.ql);
            t.insert("qc".into(), p.qc);
            t.insert("theta".into(), p.theta);
            if let Ok(qi) = estimators::reflection::derive_qi(p.ql, p.qc) {
                t.insert("qi".into(), qi);
            }
            EstimatorKind::Reflection
        }
        DatasetSpec::LorentzianTrace(s) => {
            t.insert("f0_ghz".into(), s.f0_ghz);
            t.insert("fwhm_mhz".into(), s.fwhm_mhz);
            t.insert("depth".into(), s.depth);
            t.insert("offset".into(), s.offset);
            EstimatorKind::Lorentzian
        }
        DatasetSpec::RabiTrace(s) => {
            t.insert("amplitude".into(), s.amplitude);
            t.insert("t_r_ns".into(), s.t_r_ns);
            t.insert("rabi_mhz".into(), s.rabi_mhz);
            t.insert("phase".into(), s.phase);
            t.insert("slope".into(), s.slope);
            t.insert("offset".into(), s.offset);
            EstimatorKind::Rabi
        }
        other => {
            return Err(Error::Config(format!(
                "no estimator for dataset kind `{}`",
                other.kind()
            )))
        }
    };
    Ok((kind, t))
}

fn fit(kind: EstimatorKind, dataset: &Dataset, with_delay: bool) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    match (kind, dataset) {
        (EstimatorKind::Reflection, Dataset::Trace(trace)) => {
            let f = estimators::fit_reflection(
                trace,
                &ReflectionOptions {
                    with_delay,
                    init: None,
                },
            )?;
            out.insert("f_r_ghz".into(), f.params.f_r_ghz);
            out.insert("ql".into(), f.params.ql);
            out.insert("qc".into(), f.params.qc);
            out.insert("theta".into(), f.params.theta);
            if let Some(qi) = f.qi {
                out.insert("qi".into(), qi);
            }
        }
        (EstimatorKind::Lorentzian, Dataset::Series { series, .. }) => {
            let f = estimators::fit_lorentzian(series)?;
            out.insert("f0_ghz".into(), f.params.f0);
            out.insert("fwhm_mhz".into(), f.params.fwhm * 1e3);
            out.insert("depth".into(), f.params.depth);
            out.insert("offset".into(), f.params.offset);
        }
        (EstimatorKind::Rabi, Dataset::Series { series, .. }) => {
            let f = estimators::fit_rabi(series)?;
            out.insert("amplitude".into(), f.params.amplitude);
            out.insert("t_r_ns".into(), f.params.t_r_ns);
            out.insert(
                "rabi_mhz".into(),
                f.params.omega / std::f64::consts::TAU * 1e3,
            );
            out.insert("phase".into(), f.params.phase);
            out.insert("slope".into(), f.params.slope);
            out.insert("offset".into(), f.params.intercept);
        }
        _ => {
            return Err(Error::Config(format!(
                "estimator {kind:?} does not accept this dataset"
            )))
        }
    }
    Ok(out)
}

fn load_input(kind: EstimatorKind, path: &std::path::Path) -> Result<Dataset> {
    Ok(match kind {
        EstimatorKind::Reflection => Dataset::Trace(io::read_trace(path)?),
        EstimatorKind::Lorentzian | EstimatorKind::Rabi => {
            let (series, [x, y]) = io::read_series(path)?;
            Dataset::Series {
                series,
                x_label: x,
                y_label: y,
            }
        }
    })
}

fn run_case(case: &PipelineCase) -> Result<CaseReport> {
    let label = |stage: &str| format!("{}/{stage}", case.name);
    let (kind, mut truth, dataset) = match (&case.synth, &case.input) {
        (Some(spec), None) => {
            let (kind, truth) =
                synth_truth(&spec.dataset).map_err(|e| e.in_stage(label("synth")))?;
            let out = synth::generate(spec).map_err(|e| e.in_stage(label("synth")))?;
            (kind, truth, out.dataset)
        }
        (None, Some(path)) => {
            let kind = case.estimator.ok_or_else(|| {
                Error::Config("an `input` case needs `estimator`".into()).in_stage(label("load"))
            })?;
            let data = load_input(kind, path).map_err(|e| e.in_stage(label("load")))?;
            (kind, BTreeMap::new(), data)
        }
        _ => {
            return Err(
                Error::Config("give exactly one of `synth` and `input`".into())
                    .in_stage(label("load")),
            )
        }
    };
    truth.extend(case.truth.iter().map(|(k, v)| (k.clone(), *v)));
    let fitted = fit(kind, &dataset, case.with_delay).map_err(|e| e.in_stage(label("fit")))?;
    let checks = case
        .tolerances
        .iter()
        .map(|(name, tol)| {
            let missing = |what: &str| {
                Error::Config(format!("quantity `{name}` has no {what} value"))
                    .in_stage(label("compare"))
            };
            let t = *truth.get(name).ok_or_else(|| missing("truth"))?;
            let f = *fitted.get(name).ok_or_else(|| missing("fitted"))?;
            let abs_error = (f - t).abs();
            let allowed = tol.abs + tol.rel * t.abs();
            Ok(QuantityCheck {
                name: name.clone(),
                truth: t,
                fitted: f,
                abs_error,
                allowed,
                pass: abs_error <= allowed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CaseReport {
        name: case.name.clone(),
        estimator: kind,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Runs every case (in parallel, reported in input order).
pub fn run_pipeline(spec: &PipelineSpec) -> Result<PipelineReport> {
    if spec.cases.is_empty() {
        return Err(Error::Config("pipeline has no cases".into()));
    }
    let cases = spec
        .cases
        .par_iter()
        .map(run_case)
        .collect::<Result<Vec<_>>>()?;
    Ok(PipelineReport {
        pass: cases.iter().all(|c| c.pass),
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = run_pipeline(&PipelineSpec::default_suite()).unwrap();
        for c in &report.cases {
            for q in &c.checks {
                assert!(q.pass, "{}: {q:?}", c.name);
            }
        }
        assert!(report.pass);
    }

    #[test]
    fn tight_tolerance_fails() {
        let mut spec = PipelineSpec::default_suite();
        for case in &mut spec.cases {
            for tol in case.tolerances.values_mut() {
                *tol = Tolerance {
                    rel: 1e-4,
                    abs: 0.0,
                };
            }
        }
        let report = run_pipeline(&spec).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn missing_input_is_stage_labelled() {
        let spec = PipelineSpec {
            cases: vec![PipelineCase {
                name: "ext".into(),
                synth: None,
                input: Some("/nonexistent/trace.csv".into()),
                estimator: Some(EstimatorKind::Reflection),
                truth: BTreeMap::new(),
                with_delay: false,
                tolerances: BTreeMap::new(),
            }],
        };
        match run_pipeline(&spec) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "ext/load"),
            other => panic!("{other:?}"),
        }
    }
}
