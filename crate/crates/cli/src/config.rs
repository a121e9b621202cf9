//! Experiment configuration: a TOML file with `key = value` sections,
//! optionally overridden by `--set section.key=value` flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pftycho::ptycho::{circular_scan, gaussian_probe, grid_scan, identity_probe, load_truth, phantom_object, ScanPattern};
use pftycho::field::ComplexField;
use pftycho::solvers::{PftSettings, ProbeOrder, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::Invalid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Nonblind,
    Blind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    Grid,
    Circular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Ones,
    Gaussian,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    /// Reconstructions run with seeds `seed .. seed + seeds`.
    #[serde(default = "one")]
    pub seeds: u64,
    pub output: PathBuf,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Object {
    pub magnitude: Option<PathBuf>,
    pub phase: Option<PathBuf>,
    /// Side of the synthetic test object used when no images are given.
    pub size: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scan {
    pub kind: ScanKind,
    pub window: Option<usize>,
    pub radius: Option<usize>,
    pub shift: usize,
    /// Pads the frame to a multiple of this; defaults to the PFT block size.
    pub pad_multiple: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub kind: ProbeKind,
    pub sigma: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pft {
    pub half_width: usize,
    pub p: usize,
    pub eps: f64,
}

/// Unset fields fall back to the mode's tuned preset.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solver {
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub beta_pft: Option<f64>,
    pub gamma_pft: Option<f64>,
    pub eps_pft: Option<f64>,
    pub eps_stop: Option<f64>,
    pub max_pft_iters: Option<usize>,
    pub max_fft_iters: Option<usize>,
    pub lambda_fft: Option<f64>,
    pub lambda_pft: Option<f64>,
    pub order: Option<String>,
    pub sweep_budget: Option<usize>,
    pub trace_objective: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    pub scale: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub object: Object,
    pub scan: Scan,
    pub probe: Probe,
    pub pft: Pft,
    #[serde(default)]
    pub solver: Solver,
    pub noise: Option<Noise>,
}

/// Parses an override value as a TOML value, or as a bare string.
fn override_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item.split_once('=').ok_or_else(|| Invalid(format!("override `{item}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, sections) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for s in sections {
        cur = cur
            .entry(s.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Invalid(format!("override `{key}`: `{s}` is not a section")))?;
    }
    cur.insert(last.to_string(), override_value(raw.trim()));
    Ok(())
}

impl ExperimentConfig {
    /// Reads `path`, applies overrides and resolves relative paths against
    /// the directory of the file.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut table: toml::Table = toml::from_str(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: ExperimentConfig =
            table.try_into().map_err(|e: toml::de::Error| Invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.experiment.output);
        cfg.object.magnitude.as_mut().map(resolve);
        cfg.object.phase.as_mut().map(resolve);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Domain checks that need no heavy computation.
    pub fn validate(&self) -> Result<()> {
        match (&self.object.magnitude, &self.object.phase, self.object.size) {
            (Some(m), Some(p), _) => {
                for f in [m, p] {
                    if !f.is_file() {
                        bail!(Invalid(format!("object image {} does not exist", f.display())));
                    }
                }
            }
            (None, None, Some(n)) if n > 0 => {}
            _ => bail!(Invalid("object needs both `magnitude` and `phase` images, or a `size` for the synthetic object".into())),
        }
        match self.scan.kind {
            ScanKind::Grid if self.scan.window.is_none() => bail!(Invalid("grid scan needs `window`".into())),
            ScanKind::Circular if self.scan.radius.is_none() => bail!(Invalid("circular scan needs `radius`".into())),
            _ => {}
        }
        if self.probe.kind == ProbeKind::Gaussian && !self.probe.sigma.is_some_and(|s| s > 0.0) {
            bail!(Invalid("gaussian probe needs a positive `sigma`".into()));
        }
        if self.experiment.seeds == 0 {
            bail!(Invalid("`seeds` must be at least 1".into()));
        }
        if let Some(n) = &self.noise {
            if !(n.scale > 0.0) {
                bail!(Invalid(format!("noise scale must be positive, got {}", n.scale)));
            }
        }
        if let Some(o) = &self.solver.order {
            parse_order(o)?;
        }
        Ok(())
    }

    pub fn truth(&self) -> Result<ComplexField> {
        Ok(match (&self.object.magnitude, &self.object.phase) {
            (Some(m), Some(p)) => load_truth(m, p)?,
            _ => phantom_object(self.object.size.unwrap_or(0), self.experiment.seed),
        })
    }

    pub fn object_size(&self, truth: &ComplexField) -> Result<usize> {
        let (r, c) = truth.shape();
        if r != c {
            bail!(Invalid(format!("object must be square, got {r}x{c}")));
        }
        Ok(r)
    }

    pub fn pattern(&self, n: usize) -> Result<ScanPattern> {
        let s = &self.scan;
        let pattern = match s.kind {
            ScanKind::Grid => grid_scan(n, s.window.unwrap_or(0), s.shift)?,
            ScanKind::Circular => circular_scan(n, s.radius.unwrap_or(0), s.shift)?,
        };
        Ok(pattern.pad_to_multiple(s.pad_multiple.unwrap_or(self.pft.p))?)
    }

    /// The probe used to simulate data; also the known probe in non-blind mode.
    pub fn true_probe(&self, pattern: &ScanPattern) -> Result<ComplexField> {
        Ok(match self.probe.kind {
            ProbeKind::Ones => identity_probe(pattern.window_shape()),
            ProbeKind::Gaussian => gaussian_probe(pattern.window_shape(), self.probe.sigma.unwrap_or(0.0))?,
        })
    }

    pub fn solver(&self, frame_pixels: usize, seed: u64) -> Result<SolverConfig> {
        let mut c = match self.experiment.mode {
            Mode::Nonblind => SolverConfig::desk_nonblind(frame_pixels),
            Mode::Blind => SolverConfig::desk_blind(frame_pixels),
        };
        let s = &self.solver;
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = s.$f { c.$f = v; } )* };
        }
        take!(beta, gamma, beta_pft, gamma_pft, eps_pft, eps_stop, max_pft_iters, max_fft_iters, lambda_fft, lambda_pft, trace_objective);
        if let Some(o) = &s.order {
            c.order = parse_order(o)?;
        }
        c.sweep_budget = s.sweep_budget;
        c.seed = seed;
        c.pft = PftSettings { half_width: self.pft.half_width, p: self.pft.p, eps: self.pft.eps };
        c.validate()?;
        Ok(c)
    }
}

fn parse_order(s: &str) -> Result<ProbeOrder> {
    match s {
        "sequential" => Ok(ProbeOrder::Sequential),
        "random" => Ok(ProbeOrder::Random),
        other => bail!(Invalid(format!("probe order must be `sequential` or `random`, got `{other}`"))),
    }
}
