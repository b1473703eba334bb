//! Experiment config files.
//!
//! A config is a single TOML document: a few top-level keys plus typed blocks
//! that depend on the experiment.
//!
//! ```toml
//! experiment = "bell-scan"
//! seed = 7
//! trials = 100000
//!
//! [phases]
//! phi_a = ["deg:0", "deg:60", 1.5707963267948966]
//! phi_b = { start = "deg:0", step = "deg:10", count = 3 }
//! pairing = "zip"            # or "grid"
//!
//! [output]
//! path = "out"
//! format = "csv"             # or "json"
//! ```
//!
//! Angles are radians unless written as a string with a `deg:` prefix.

use std::fmt;
use std::path::PathBuf;

use fockline_core::optics::BeamSplitterParams;
use fockline_core::protocols::QubitAmplitudes;
use fockline_core::Complex64;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Entangle,
    Teleport,
    TeleportEntangled,
    BellScan,
    MzSingle,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Entangle,
        ExperimentKind::Teleport,
        ExperimentKind::TeleportEntangled,
        ExperimentKind::BellScan,
        ExperimentKind::MzSingle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Entangle => "entangle",
            ExperimentKind::Teleport => "teleport",
            ExperimentKind::TeleportEntangled => "teleport-entangled",
            ExperimentKind::BellScan => "bell-scan",
            ExperimentKind::MzSingle => "mz-single",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    Zip,
    Grid,
}

/// An angle as written in the file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Radians(f64),
    Text(String),
}

impl AngleSpec {
    pub fn to_radians(&self) -> Result<f64, String> {
        let value = match self {
            AngleSpec::Radians(x) => *x,
            AngleSpec::Text(s) => {
                let s = s.trim();
                if let Some(deg) = s.strip_prefix("deg:") {
                    let d: f64 = deg
                        .trim()
                        .parse()
                        .map_err(|_| format!("`{s}` is not a number of degrees"))?;
                    d.to_radians()
                } else {
                    s.parse()
                        .map_err(|_| format!("`{s}` is neither radians nor `deg:<x>`"))?
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(format!("angle {value} is not finite"))
        }
    }
}

/// Either an explicit list of angles or an arithmetic progression.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ScanSpec {
    List(Vec<AngleSpec>),
    Range {
        start: AngleSpec,
        step: AngleSpec,
        count: i64,
    },
}

impl ScanSpec {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            ScanSpec::List(items) => items.iter().map(AngleSpec::to_radians).collect(),
            ScanSpec::Range { start, step, count } => {
                if *count < 1 {
                    return Err(format!("range count must be at least 1, got {count}"));
                }
                let (start, step) = (start.to_radians()?, step.to_radians()?);
                Ok((0..*count).map(|k| start + k as f64 * step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitBlock {
    pub a_re: f64,
    #[serde(default)]
    pub a_im: f64,
    pub b_re: f64,
    #[serde(default)]
    pub b_im: f64,
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSplitterBlock {
    pub t_re: f64,
    #[serde(default)]
    pub t_im: f64,
    pub r_re: f64,
    #[serde(default)]
    pub r_im: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasesBlock {
    pub phi_a: ScanSpec,
    pub phi_b: ScanSpec,
    pub pairing: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

/// The config file as written. Every block is optional at parse time;
/// [`validate`] decides what the chosen experiment needs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub seed: Option<i64>,
    pub trials: Option<i64>,
    pub qubit: Option<QubitBlock>,
    pub bs: Option<BeamSplitterBlock>,
    pub phases: Option<PhasesBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// A validated config, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub trials: u64,
    pub qubit: Option<QubitAmplitudes>,
    pub bs: Option<BeamSplitterParams>,
    /// `(φ_A, φ_B)` settings in scan order.
    pub settings: Vec<(f64, f64)>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

pub const DEFAULT_OUTPUT_DIR: &str = "output";

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Turns the file into a [`RunPlan`], or reports everything wrong with it.
    pub fn resolve(&self) -> Result<RunPlan, Vec<Violation>> {
        let mut violations = Vec::new();

        let kind = match self.experiment.as_deref() {
            None => {
                violations.push(Violation::new("experiment", "missing"));
                None
            }
            Some(name) => {
                let kind = ExperimentKind::parse(name);
                if kind.is_none() {
                    let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                    violations.push(Violation::new(
                        "experiment",
                        format!(
                            "unknown experiment `{name}`, expected one of {}",
                            names.join(", ")
                        ),
                    ));
                }
                kind
            }
        };

        let seed = match self.seed {
            None => {
                violations.push(Violation::new(
                    "seed",
                    "missing; runs need an explicit seed",
                ));
                None
            }
            Some(s) if s < 0 => {
                violations.push(Violation::new(
                    "seed",
                    format!("must be non-negative, got {s}"),
                ));
                None
            }
            Some(s) => Some(s as u64),
        };

        let trials = match self.trials {
            None => {
                violations.push(Violation::new("trials", "missing"));
                None
            }
            Some(n) if n < 1 => {
                violations.push(Violation::new(
                    "trials",
                    format!("must be at least 1, got {n}"),
                ));
                None
            }
            Some(n) => Some(n as u64),
        };

        let needs = |k: ExperimentKind| kind == Some(k);

        let qubit = match (&self.qubit, needs(ExperimentKind::Teleport)) {
            (None, true) => {
                violations.push(Violation::new("qubit", "block required for teleport"));
                None
            }
            (Some(q), _) => {
                let a = Complex64::new(q.a_re, q.a_im);
                let b = Complex64::new(q.b_re, q.b_im);
                let parsed = if q.normalize {
                    QubitAmplitudes::normalized(a, b)
                } else {
                    QubitAmplitudes::new(a, b)
                };
                parsed
                    .map_err(|e| violations.push(Violation::new("qubit", e.to_string())))
                    .ok()
            }
            (None, false) => None,
        };

        let bs = match (&self.bs, needs(ExperimentKind::TeleportEntangled)) {
            (None, true) => {
                violations.push(Violation::new(
                    "bs",
                    "block required for teleport-entangled",
                ));
                None
            }
            (Some(b), _) => BeamSplitterParams::new(
                Complex64::new(b.t_re, b.t_im),
                Complex64::new(b.r_re, b.r_im),
            )
            .map_err(|e| violations.push(Violation::new("bs", e.to_string())))
            .ok(),
            (None, false) => None,
        };

        let wants_phases = needs(ExperimentKind::BellScan) || needs(ExperimentKind::MzSingle);
        let settings = match (&self.phases, wants_phases) {
            (None, true) => {
                violations.push(Violation::new(
                    "phases",
                    "block required for bell-scan and mz-single",
                ));
                Vec::new()
            }
            (Some(p), _) => resolve_settings(p, &mut violations),
            (None, false) => Vec::new(),
        };
        if needs(ExperimentKind::MzSingle) && self.phases.is_some() && settings.len() > 1 {
            violations.push(Violation::new(
                "phases",
                format!(
                    "mz-single takes one (phi_a, phi_b) setting, got {}",
                    settings.len()
                ),
            ));
        }

        let format = match self.output.format.as_deref() {
            None | Some("json") => OutputFormat::Json,
            Some("csv") => OutputFormat::Csv,
            Some(other) => {
                violations.push(Violation::new(
                    "output.format",
                    format!("unknown format `{other}`, expected csv or json"),
                ));
                OutputFormat::Json
            }
        };

        if !violations.is_empty() {
            return Err(violations);
        }
        Ok(RunPlan {
            kind: kind.expect("checked"),
            seed: seed.expect("checked"),
            trials: trials.expect("checked"),
            qubit,
            bs,
            settings,
            output_dir: self
                .output
                .path
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            format,
        })
    }
}

fn resolve_settings(p: &PhasesBlock, violations: &mut Vec<Violation>) -> Vec<(f64, f64)> {
    let a = p
        .phi_a
        .values()
        .map_err(|e| violations.push(Violation::new("phases.phi_a", e)))
        .ok();
    let b = p
        .phi_b
        .values()
        .map_err(|e| violations.push(Violation::new("phases.phi_b", e)))
        .ok();
    let pairing = match p.pairing.as_deref() {
        None | Some("zip") => Some(Pairing::Zip),
        Some("grid") => Some(Pairing::Grid),
        Some(other) => {
            violations.push(Violation::new(
                "phases.pairing",
                format!("unknown pairing `{other}`, expected zip or grid"),
            ));
            None
        }
    };
    let (Some(a), Some(b), Some(pairing)) = (a, b, pairing) else {
        return Vec::new();
    };
    if a.is_empty() || b.is_empty() {
        violations.push(Violation::new(
            "phases",
            "phi_a and phi_b need at least one angle",
        ));
        return Vec::new();
    }
    match pairing {
        Pairing::Zip if a.len() != b.len() => {
            violations.push(Violation::new(
                "phases",
                format!(
                    "zip pairing needs equal lengths, got {} and {}",
                    a.len(),
                    b.len()
                ),
            ));
            Vec::new()
        }
        Pairing::Zip => a.into_iter().zip(b).collect(),
        Pairing::Grid => a
            .iter()
            .flat_map(|&x| b.iter().map(move |&y| (x, y)))
            .collect(),
    }
}

/// Every reason [`ExperimentConfig::resolve`] would reject the config.
pub fn validate(config: &ExperimentConfig) -> Vec<Violation> {
    config.resolve().err().unwrap_or_default()
}
