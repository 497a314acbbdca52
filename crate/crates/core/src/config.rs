// SPDX-License-Identifier: Apache-2.0

//! TOML run configuration.
//!
//! Every section is optional; each command reads the sections it needs. Unknown keys are
//! rejected. Relative paths are resolved against the directory of the configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupling::{GateProfile, GateSweepSpec, Interpolation};
use crate::error::{Error, Result};
use crate::io;
use crate::pipeline::PipelineSpec;
use crate::spectra::{CavityGeometry, QubitParams, DEFAULT_GRID_N, DEFAULT_N_CUT};
use crate::synth::{DatasetSpec, SynthSpec};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub qubit: Option<QubitConfig>,
    #[serde(default)]
    pub cavity: Option<CavityConfig>,
    #[serde(default)]
    pub sweep: Option<GateSweepSpec>,
    #[serde(default)]
    pub fit: Option<FitConfig>,
    #[serde(default)]
    pub synth: Option<SynthSpec>,
    #[serde(default)]
    pub pipeline: Option<PipelineSpec>,
}

fn default_n_cut() -> usize {
    DEFAULT_N_CUT
}

fn default_grid_n() -> usize {
    DEFAULT_GRID_N
}

/// Qubit parameters. Give `ej_mhz` for a tunnel junction, or `gap_mhz` and `transmissions`
/// for a semiconductor junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    pub ec_mhz: f64,
    #[serde(default)]
    pub ng: f64,
    #[serde(default)]
    pub ej_mhz: Option<f64>,
    #[serde(default)]
    pub gap_mhz: Option<f64>,
    #[serde(default)]
    pub transmissions: Option<Vec<f64>>,
    #[serde(default = "default_n_cut")]
    pub n_cut: usize,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Also report the single-channel transmission reproducing this anharmonicity.
    #[serde(default)]
    pub infer_alpha_mhz: Option<f64>,
}

impl QubitConfig {
    pub fn params(&self) -> Result<QubitParams> {
        let p = match (self.ej_mhz, self.gap_mhz, &self.transmissions) {
            (Some(ej), None, None) => QubitParams::transmon(self.ec_mhz, ej, self.ng),
            (None, Some(gap), Some(ts)) => QubitParams {
                ng: self.ng,
                ..QubitParams::gatemon(self.ec_mhz, gap, ts.clone())
            },
            _ => {
                return Err(Error::Config(
                    "qubit: give either ej_mhz, or gap_mhz together with transmissions".into(),
                ))
            }
        };
        p.validate()?;
        Ok(p)
    }
}

/// Rectangular cavity with side lengths in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub a_mm: f64,
    pub b_mm: f64,
    pub d_mm: f64,
    #[serde(default = "default_mode")]
    pub mode: [u32; 3],
}

fn default_mode() -> [u32; 3] {
    [1, 0, 1]
}

impl CavityConfig {
    pub fn geometry(&self) -> CavityGeometry {
        CavityGeometry {
            length_a: self.a_mm * 1e-3,
            width_b: self.b_mm * 1e-3,
            height_d: self.d_mm * 1e-3,
            mode: (self.mode[0], self.mode[1], self.mode[2]),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default)]
    pub with_delay: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `path`, then resolves relative paths and loads sweep tables.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base)?;
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) -> Result<()> {
        if let Some(s) = self.sweep.as_mut() {
            resolve_sweep(s, base)?;
        }
        if let Some(s) = self.synth.as_mut() {
            resolve_synth(s, base)?;
        }
        if let Some(p) = self.pipeline.as_mut() {
            for case in &mut p.cases {
                if let Some(s) = case.synth.as_mut() {
                    resolve_synth(s, base)?;
                }
                if let Some(input) = case.input.as_mut() {
                    if input.is_relative() {
                        *input = base.join(&*input);
                    }
                }
            }
        }
        Ok(())
    }
}

fn resolve_synth(spec: &mut SynthSpec, base: &Path) -> Result<()> {
    match &mut spec.dataset {
        DatasetSpec::GateMap(g) => resolve_sweep(&mut g.sweep, base),
        DatasetSpec::TwoToneMap(t) => resolve_sweep(&mut t.sweep, base),
        _ => Ok(()),
    }
}

/// Replaces a file-backed gate profile by the table it points to.
pub fn resolve_sweep(spec: &mut GateSweepSpec, base: &Path) -> Result<()> {
    if let GateProfile::File {
        path,
        interpolation,
    } = &spec.profile
    {
        let full = if path.is_relative() {
            base.join(path)
        } else {
            path.clone()
        };
        let (_, v_g, values) = io::read_sweep_table(&full)?;
        let interpolation: Interpolation = *interpolation;
        spec.profile = GateProfile::Table {
            v_g,
            values,
            interpolation,
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            RunConfig::parse("bogus = 1"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse("[qubit]\nec_mhz = 190\nej_ghz = 3\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn qubit_needs_one_junction() {
        let cfg = RunConfig::parse("[qubit]\nec_mhz = 190\n").unwrap();
        assert!(cfg.qubit.unwrap().params().is_err());
        let cfg = RunConfig::parse("[qubit]\nec_mhz = 190\ngap_mhz = 1e5\ntransmissions = [0.3]\n")
            .unwrap();
        assert!(cfg.qubit.unwrap().params().unwrap().validate().is_ok());
    }

    #[test]
    fn cavity_in_millimetres() {
        let cfg = RunConfig::parse("[cavity]\na_mm = 70\nb_mm = 5\nd_mm = 30\n").unwrap();
        assert_eq!(
            cfg.cavity.unwrap().geometry(),
            CavityGeometry::copper_te101()
        );
    }

    #[test]
    fn sweep_table_resolved_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("ej.csv"),
            "V_G,EJ_MHz\n0,0\n1,5000\n2,9000\n",
        )
        .unwrap();
        let text = r#"
[sweep]
profile = { kind = "file", path = "ej.csv" }
solver = { kind = "transmon", ec_mhz = 190.0 }
cavity = { f_bare_ghz = 5.2816, g_mhz = 100.0 }
v_g = { start = 0.0, stop = 2.0, points = 3 }
"#;
        let path = dir.path().join("run.toml");
        std::fs::write(&path, text).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        let sweep = cfg.sweep.unwrap();
        assert!(matches!(sweep.profile, GateProfile::Table { .. }));
        assert_eq!(sweep.run().unwrap().records.len(), 3);
    }
}
