//! Executes a [`RunPlan`] and writes its artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fockline_core::measurement::{sample, DetectionEvent, RandomStream};
use fockline_core::protocols::{
    self, analytic_margin, bell_correlation_form, bell_inequality_holds, bell_sector_weights,
    mz_output_state, mz_probability, run_bell_experiment, run_teleport_batch,
    simulated_dd_probability, verify_teleportation, BellCounts, BellSector, DetectorCounts,
    OutcomeKind, ShifterConfig, TeleportRecord, TeleportSummary,
};
use fockline_core::{fidelity, generate_entangled, PureState};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ExperimentKind, OutputFormat, RunPlan};
use crate::output::{
    csv_table, format_f64, records_json, state_entries, to_pretty_json, AmplitudeEntry, Float,
};

/// Success-branch fidelities and verification probabilities below
/// `1 − SUCCESS_TOLERANCE` abort the run as an invariant breach.
pub const SUCCESS_TOLERANCE: f64 = 1e-9;
/// Allowed gap between the simulated and closed-form D_D probability.
pub const ANALYTIC_TOLERANCE: f64 = 1e-12;

/// Column order of the Bell scan table.
pub const SCAN_HEADER: [&str; 12] = [
    "phi_a",
    "phi_b",
    "p_analytic",
    "n_a",
    "n_b",
    "n_ab",
    "margin",
    "violated",
    "p_ac",
    "p_bc",
    "p_ab",
    "corr_satisfied",
];

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces `output.path` from the config.
    pub output_dir: Option<PathBuf>,
    /// Also writes the prepared state as `<experiment>.state.json`.
    pub dump_state: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] fockline_core::Error),
    #[error("invariant breach: {0}")]
    Invariant(String),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Core(_) | RunError::Invariant(_) => 3,
            RunError::Io { .. } => 1,
        }
    }
}

type RunResult<T> = Result<T, RunError>;

struct Sink<'a> {
    dir: &'a Path,
    stem: &'static str,
    format: OutputFormat,
    files: Vec<PathBuf>,
}

impl Sink<'_> {
    fn write(&mut self, name: String, contents: &str) -> RunResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }

    fn io<T>(&self, r: std::io::Result<T>) -> RunResult<T> {
        r.map_err(|source| RunError::Io {
            path: self.dir.to_path_buf(),
            source,
        })
    }

    /// Records plus summary, as one JSON document or as CSV + summary JSON.
    fn emit<R, S, F>(
        &mut self,
        header: &[&str],
        csv_rows: F,
        records: &[R],
        summary: &S,
    ) -> RunResult<()>
    where
        R: Serialize,
        S: Serialize,
        F: FnOnce() -> Vec<Vec<String>>,
    {
        match self.format {
            OutputFormat::Json => {
                let text = self.io(records_json(records, summary))?;
                self.write(format!("{}.json", self.stem), &text)
            }
            OutputFormat::Csv => {
                let table = self.io(csv_table(header, &csv_rows()))?;
                self.write(format!("{}.csv", self.stem), &table)?;
                let text = self.io(to_pretty_json(summary))?;
                self.write(format!("{}.summary.json", self.stem), &text)
            }
        }
    }

    fn dump_state(&mut self, state: &PureState) -> RunResult<()> {
        let text = self.io(to_pretty_json(&state_entries(state)))?;
        self.write(format!("{}.state.json", self.stem), &text)
    }
}

pub fn run(plan: &RunPlan, options: &RunOptions) -> RunResult<RunReport> {
    let dir = options.output_dir.as_deref().unwrap_or(&plan.output_dir);
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut sink = Sink {
        dir,
        stem: plan.kind.name(),
        format: plan.format,
        files: Vec::new(),
    };
    let prepared = match plan.kind {
        ExperimentKind::Entangle => run_entangle(plan, &mut sink)?,
        ExperimentKind::Teleport | ExperimentKind::TeleportEntangled => {
            run_teleport(plan, &mut sink)?
        }
        ExperimentKind::BellScan => run_bell_scan(plan, &mut sink)?,
        ExperimentKind::MzSingle => run_mz_single(plan, &mut sink)?,
    };
    if options.dump_state {
        sink.dump_state(&prepared)?;
    }
    Ok(RunReport { files: sink.files })
}

fn bool_str(b: bool) -> String {
    b.to_string()
}

// ---- entangle -------------------------------------------------------------

#[derive(Serialize)]
struct EntangleRecord {
    trial: u64,
    trial_seed: u64,
    n_a: u32,
    n_b: u32,
}

#[derive(Serialize)]
struct EntangleSummary {
    experiment: &'static str,
    seed: u64,
    trials: u64,
    fidelity_to_reference: Float,
    state: Vec<AmplitudeEntry>,
    p_a_analytic: Float,
    p_b_analytic: Float,
    n_a_clicks: u64,
    n_b_clicks: u64,
    freq_a: Float,
    freq_b: Float,
}

fn run_entangle(plan: &RunPlan, sink: &mut Sink<'_>) -> RunResult<PureState> {
    let state = generate_entangled();
    let f = fidelity(&state, &protocols::entangled_reference()?)?;
    if (f - 1.0).abs() > 1e-12 {
        return Err(RunError::Invariant(format!(
            "entangled state fidelity {f} differs from 1"
        )));
    }
    let root = RandomStream::new(plan.seed);
    let mut records = Vec::with_capacity(plan.trials as usize);
    for trial in 0..plan.trials {
        let mut stream = root.substream(trial);
        let (event, _) = sample(&state, &["A", "B"], &mut stream)?;
        records.push(EntangleRecord {
            trial,
            trial_seed: stream.seed(),
            n_a: event.count("A").unwrap_or(0),
            n_b: event.count("B").unwrap_or(0),
        });
    }
    let n_a_clicks = records.iter().filter(|r| r.n_a == 1).count() as u64;
    let n_b_clicks = records.iter().filter(|r| r.n_b == 1).count() as u64;
    if n_a_clicks + n_b_clicks != plan.trials {
        return Err(RunError::Invariant("photon lost or duplicated".into()));
    }
    let n = plan.trials as f64;
    let summary = EntangleSummary {
        experiment: plan.kind.name(),
        seed: plan.seed,
        trials: plan.trials,
        fidelity_to_reference: Float(f),
        state: state_entries(&state),
        p_a_analytic: Float(0.5),
        p_b_analytic: Float(0.5),
        n_a_clicks,
        n_b_clicks,
        freq_a: Float(n_a_clicks as f64 / n),
        freq_b: Float(n_b_clicks as f64 / n),
    };
    sink.emit(
        &["trial", "trial_seed", "n_a", "n_b"],
        || {
            records
                .iter()
                .map(|r| {
                    vec![
                        r.trial.to_string(),
                        r.trial_seed.to_string(),
                        r.n_a.to_string(),
                        r.n_b.to_string(),
                    ]
                })
                .collect()
        },
        &records,
        &summary,
    )?;
    Ok(state)
}

// ---- teleport ---------------------------------------------------------------

#[derive(Serialize)]
struct OutcomeOut<'a> {
    kind: OutcomeKind,
    event: &'a DetectionEvent,
}

#[derive(Serialize)]
struct TeleportOut<'a> {
    trial: u64,
    outcome: OutcomeOut<'a>,
    correction_applied: bool,
    bob_state: Option<Vec<AmplitudeEntry>>,
    fidelity_to_target: Option<Float>,
    trial_seed: u64,
}

#[derive(Serialize)]
struct VerificationSummary {
    checked: u64,
    mean_probability: Option<Float>,
    min_probability: Option<Float>,
}

#[derive(Serialize)]
struct TeleportSummaryOut {
    experiment: &'static str,
    seed: u64,
    trials: u64,
    successes: u64,
    success_fraction: Float,
    success_std_error: Float,
    corrections: u64,
    sector_counts: BTreeMap<&'static str, u64>,
    sector_fractions: BTreeMap<&'static str, Float>,
    analytic_sector_weights: BTreeMap<&'static str, Float>,
    mean_success_fidelity: Option<Float>,
    min_success_fidelity: Option<Float>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<VerificationSummary>,
}

fn run_teleport(plan: &RunPlan, sink: &mut Sink<'_>) -> RunResult<PureState> {
    let (input, records) = match plan.kind {
        ExperimentKind::Teleport => {
            let target = plan.qubit.expect("validated");
            let records =
                run_teleport_batch(plan.seed, plan.trials, |s| protocols::teleport(&target, s))?;
            (protocols::bell_input_state(&target)?, records)
        }
        _ => {
            let params = plan.bs.expect("validated");
            let records = run_teleport_batch(plan.seed, plan.trials, |s| {
                protocols::teleport_entangled(params, s)
            })?;
            (protocols::entangled_input_state(params)?, records)
        }
    };

    let verification = match plan.kind {
        ExperimentKind::TeleportEntangled => Some(verify_all(&records, plan)?),
        _ => None,
    };

    let stats = TeleportSummary::from_records(&records);
    if let Some(min) = stats.min_success_fidelity {
        if min < 1.0 - SUCCESS_TOLERANCE {
            return Err(RunError::Invariant(format!(
                "success-branch fidelity {min} below 1"
            )));
        }
    }
    let weights = bell_sector_weights(&input)?;
    let n = stats.trials as f64;
    let summary = TeleportSummaryOut {
        experiment: plan.kind.name(),
        seed: plan.seed,
        trials: stats.trials,
        successes: stats.successes,
        success_fraction: Float(stats.success_fraction),
        success_std_error: Float(
            (stats.success_fraction * (1.0 - stats.success_fraction) / n).sqrt(),
        ),
        corrections: stats.corrections,
        sector_fractions: stats
            .sector_fractions
            .iter()
            .map(|(&k, &v)| (k, Float(v)))
            .collect(),
        sector_counts: stats.sector_counts,
        analytic_sector_weights: BellSector::ALL
            .iter()
            .map(|s| (s.name(), Float(weights[s])))
            .collect(),
        mean_success_fidelity: stats.mean_success_fidelity.map(Float),
        min_success_fidelity: stats.min_success_fidelity.map(Float),
        verification,
    };

    let rows: Vec<TeleportOut<'_>> = records
        .iter()
        .enumerate()
        .map(|(i, r)| TeleportOut {
            trial: i as u64,
            outcome: OutcomeOut {
                kind: r.outcome.kind,
                event: &r.outcome.event,
            },
            correction_applied: r.correction_applied,
            bob_state: r.bob_state.as_ref().map(state_entries),
            fidelity_to_target: r.fidelity_to_target.map(Float),
            trial_seed: r.trial_seed,
        })
        .collect();
    sink.emit(
        &[
            "trial",
            "trial_seed",
            "kind",
            "sector",
            "n_e",
            "n_f",
            "correction_applied",
            "fidelity_to_target",
        ],
        || {
            records
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    vec![
                        i.to_string(),
                        r.trial_seed.to_string(),
                        format!("{:?}", r.outcome.kind),
                        r.outcome.sector().name().to_string(),
                        r.outcome.event.count("E").unwrap_or(0).to_string(),
                        r.outcome.event.count("F").unwrap_or(0).to_string(),
                        bool_str(r.correction_applied),
                        r.fidelity_to_target.map(format_f64).unwrap_or_default(),
                    ]
                })
                .collect()
        },
        &rows,
        &summary,
    )?;
    Ok(input)
}

fn verify_all(records: &[TeleportRecord], plan: &RunPlan) -> RunResult<VerificationSummary> {
    let params = plan.bs.expect("validated");
    let mut checked = 0u64;
    let mut sum = 0.0;
    let mut min: Option<f64> = None;
    for bob in records.iter().filter_map(|r| r.bob_state.as_ref()) {
        let p = verify_teleportation(bob, params)?;
        if p < 1.0 - SUCCESS_TOLERANCE {
            return Err(RunError::Invariant(format!(
                "verification probability {p} below 1 on a success branch"
            )));
        }
        checked += 1;
        sum += p;
        min = Some(min.map_or(p, |m| m.min(p)));
    }
    Ok(VerificationSummary {
        checked,
        mean_probability: (checked > 0).then(|| Float(sum / checked as f64)),
        min_probability: min.map(Float),
    })
}

// ---- Bell scan ------------------------------------------------------------

#[derive(Serialize)]
struct CountsOut {
    n_dc: u64,
    n_dd: u64,
}

impl From<DetectorCounts> for CountsOut {
    fn from(c: DetectorCounts) -> Self {
        Self {
            n_dc: c.n_dc,
            n_dd: c.n_dd,
        }
    }
}

#[derive(Serialize)]
struct ScanRecord {
    phi_a: Float,
    phi_b: Float,
    n_trials: u64,
    alice_only: CountsOut,
    bob_only: CountsOut,
    both: CountsOut,
    n_a: u64,
    n_b: u64,
    n_ab: u64,
    margin: Float,
    margin_std_error: Float,
    p_analytic: Float,
    analytic_margin: Float,
    violated: bool,
    p_ac: Float,
    p_bc: Float,
    p_ab: Float,
    corr_satisfied: bool,
}

impl ScanRecord {
    fn csv_row(&self) -> Vec<String> {
        vec![
            format_f64(self.phi_a.0),
            format_f64(self.phi_b.0),
            format_f64(self.p_analytic.0),
            self.n_a.to_string(),
            self.n_b.to_string(),
            self.n_ab.to_string(),
            format_f64(self.margin.0),
            bool_str(self.violated),
            format_f64(self.p_ac.0),
            format_f64(self.p_bc.0),
            format_f64(self.p_ab.0),
            bool_str(self.corr_satisfied),
        ]
    }
}

#[derive(Serialize)]
struct ScanSummary {
    experiment: &'static str,
    seed: u64,
    trials_per_configuration: u64,
    settings: usize,
    violations: usize,
    violated_settings: Vec<[Float; 2]>,
    /// Rows where the count verdict and the correlation-form verdict differ
    /// although the analytic margin is outside the 5σ band.
    form_disagreements: usize,
}

fn check_analytic(phi_a: f64, phi_b: f64) -> RunResult<()> {
    for config in ShifterConfig::ALL {
        let (a, b) = config.phases(phi_a, phi_b);
        let simulated = simulated_dd_probability(a, b)?;
        let analytic = mz_probability(a, b);
        if (simulated - analytic).abs() > ANALYTIC_TOLERANCE {
            return Err(RunError::Invariant(format!(
                "simulated P(D_D) {simulated} vs analytic {analytic} at ({a}, {b})"
            )));
        }
    }
    Ok(())
}

fn check_counts(c: &BellCounts) -> RunResult<()> {
    for k in [c.alice_only, c.bob_only, c.both] {
        if k.n_dc + k.n_dd != c.n_trials {
            return Err(RunError::Invariant("detector counts do not add up".into()));
        }
    }
    Ok(())
}

fn run_bell_scan(plan: &RunPlan, sink: &mut Sink<'_>) -> RunResult<PureState> {
    let mut records = Vec::with_capacity(plan.settings.len());
    for (k, &(phi_a, phi_b)) in plan.settings.iter().enumerate() {
        check_analytic(phi_a, phi_b)?;
        // each setting consumes 3·trials substreams
        let offset = (k as u64).wrapping_mul(3).wrapping_mul(plan.trials);
        let root = RandomStream::new(plan.seed.wrapping_add(offset));
        let counts = run_bell_experiment(phi_a, phi_b, plan.trials, &root)?;
        check_counts(&counts)?;
        let corr = bell_correlation_form(phi_a, phi_b);
        records.push(ScanRecord {
            phi_a: Float(phi_a),
            phi_b: Float(phi_b),
            n_trials: counts.n_trials,
            alice_only: counts.alice_only.into(),
            bob_only: counts.bob_only.into(),
            both: counts.both.into(),
            n_a: counts.n_a,
            n_b: counts.n_b,
            n_ab: counts.n_ab,
            margin: Float(counts.margin),
            margin_std_error: Float(counts.margin_std_error()),
            p_analytic: Float(mz_probability(phi_a, phi_b)),
            analytic_margin: Float(analytic_margin(phi_a, phi_b)),
            violated: !bell_inequality_holds(&counts),
            p_ac: Float(corr.p_ac),
            p_bc: Float(corr.p_bc),
            p_ab: Float(corr.p_ab),
            corr_satisfied: corr.satisfied,
        });
    }
    let band = |r: &ScanRecord| {
        // analytic variance of the margin, three independent binomials
        let (a, b) = (r.phi_a.0, r.phi_b.0);
        let var: f64 = [
            mz_probability(a, 0.0),
            mz_probability(0.0, b),
            mz_probability(a, b),
        ]
        .iter()
        .map(|p| p * (1.0 - p))
        .sum();
        5.0 * (var / r.n_trials as f64).sqrt()
    };
    let summary = ScanSummary {
        experiment: plan.kind.name(),
        seed: plan.seed,
        trials_per_configuration: plan.trials,
        settings: records.len(),
        violations: records.iter().filter(|r| r.violated).count(),
        violated_settings: records
            .iter()
            .filter(|r| r.violated)
            .map(|r| [r.phi_a, r.phi_b])
            .collect(),
        form_disagreements: records
            .iter()
            .filter(|r| r.analytic_margin.0.abs() > band(r) && r.violated == r.corr_satisfied)
            .count(),
    };
    sink.emit(
        &SCAN_HEADER,
        || records.iter().map(ScanRecord::csv_row).collect(),
        &records,
        &summary,
    )?;
    let (phi_a, phi_b) = plan.settings[0];
    Ok(mz_output_state(phi_a, phi_b)?)
}

// ---- single Mach-Zehnder setting -------------------------------------------

#[derive(Serialize)]
struct MzRecord {
    trial: u64,
    trial_seed: u64,
    n_dc: u32,
    n_dd: u32,
}

#[derive(Serialize)]
struct MzSummary {
    experiment: &'static str,
    seed: u64,
    phi_a: Float,
    phi_b: Float,
    trials: u64,
    n_dc: u64,
    n_dd: u64,
    p_dd_observed: Float,
    p_dd_analytic: Float,
    p_dd_simulated: Float,
}

fn run_mz_single(plan: &RunPlan, sink: &mut Sink<'_>) -> RunResult<PureState> {
    let (phi_a, phi_b) = plan.settings[0];
    check_analytic(phi_a, phi_b)?;
    let state = mz_output_state(phi_a, phi_b)?;
    let root = RandomStream::new(plan.seed);
    let mut records = Vec::with_capacity(plan.trials as usize);
    for trial in 0..plan.trials {
        let mut stream = root.substream(trial);
        let (event, _) = sample(&state, &["C", "D"], &mut stream)?;
        records.push(MzRecord {
            trial,
            trial_seed: stream.seed(),
            n_dc: event.count("C").unwrap_or(0),
            n_dd: event.count("D").unwrap_or(0),
        });
    }
    let n_dd = records.iter().filter(|r| r.n_dd == 1).count() as u64;
    let n_dc = records.iter().filter(|r| r.n_dc == 1).count() as u64;
    if n_dc + n_dd != plan.trials {
        return Err(RunError::Invariant("detector counts do not add up".into()));
    }
    let summary = MzSummary {
        experiment: plan.kind.name(),
        seed: plan.seed,
        phi_a: Float(phi_a),
        phi_b: Float(phi_b),
        trials: plan.trials,
        n_dc,
        n_dd,
        p_dd_observed: Float(n_dd as f64 / plan.trials as f64),
        p_dd_analytic: Float(mz_probability(phi_a, phi_b)),
        p_dd_simulated: Float(simulated_dd_probability(phi_a, phi_b)?),
    };
    sink.emit(
        &["trial", "trial_seed", "n_dc", "n_dd"],
        || {
            records
                .iter()
                .map(|r| {
                    vec![
                        r.trial.to_string(),
                        r.trial_seed.to_string(),
                        r.n_dc.to_string(),
                        r.n_dd.to_string(),
                    ]
                })
                .collect()
        },
        &records,
        &summary,
    )?;
    Ok(state)
}
