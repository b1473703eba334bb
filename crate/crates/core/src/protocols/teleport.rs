use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{generate_entangled, modes};
use crate::error::{Error, Result};
use crate::fock::{basis_state, fidelity, superpose, tensor, ModeRegister, PureState};
use crate::measurement::{outcome_distribution, sample, DetectionEvent, RandomStream};
use crate::optics::{
    apply_composite_element, apply_paper_element, apply_phase_shifter, BeamSplitterParams,
    PhaseShift,
};

const QUBIT_NORM_TOLERANCE: f64 = 1e-9;

/// Single-rail qubit `a|1⟩ + b|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitAmplitudes {
    a: Complex64,
    b: Complex64,
}

impl QubitAmplitudes {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > QUBIT_NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { a, b })
    }

    /// Rescales `(a, b)` to unit norm.
    pub fn normalized(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            a: a / norm,
            b: b / norm,
        })
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// `a|1⟩ + b|0⟩` on a one-mode register named `mode`.
    pub fn state_on(&self, mode: &str) -> Result<PureState> {
        let reg = ModeRegister::with_default_cutoff([mode])?;
        superpose(&[
            (self.a, &basis_state(&reg, &[1])?),
            (self.b, &basis_state(&reg, &[0])?),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OutcomeKind {
    PsiPlus,
    PsiMinus,
    Failure,
}

/// Finer split of the (E, F) events by which input component produced them:
/// the two single-photon Bell states, the doubly occupied `|1⟩_A|1⟩_C`
/// (two photons in one detector) and the empty `|0⟩_A|0⟩_C` (no clicks).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BellSector {
    PsiPlus,
    PsiMinus,
    TwoPhoton,
    Vacuum,
}

impl BellSector {
    pub const ALL: [BellSector; 4] = [
        BellSector::PsiPlus,
        BellSector::PsiMinus,
        BellSector::TwoPhoton,
        BellSector::Vacuum,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BellSector::PsiPlus => "psi_plus",
            BellSector::PsiMinus => "psi_minus",
            BellSector::TwoPhoton => "two_photon",
            BellSector::Vacuum => "vacuum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellOutcome {
    pub kind: OutcomeKind,
    pub event: DetectionEvent,
}

impl BellOutcome {
    pub fn is_success(&self) -> bool {
        self.kind != OutcomeKind::Failure
    }

    pub fn sector(&self) -> BellSector {
        match self.kind {
            OutcomeKind::PsiPlus => BellSector::PsiPlus,
            OutcomeKind::PsiMinus => BellSector::PsiMinus,
            OutcomeKind::Failure if self.event.total() == 0 => BellSector::Vacuum,
            OutcomeKind::Failure => BellSector::TwoPhoton,
        }
    }
}

/// `(E:0, F:1)` is Ψ⁺, `(E:1, F:0)` is Ψ⁻, anything else fails.
pub fn classify_bell_outcome(event: &DetectionEvent) -> Result<BellOutcome> {
    let (Some(e), Some(f)) = (event.count(modes::E), event.count(modes::F)) else {
        return Err(Error::MalformedEvent(format!(
            "expected counts for E and F, got {event}"
        )));
    };
    if event.len() != 2 {
        return Err(Error::MalformedEvent(format!(
            "expected exactly modes E and F, got {event}"
        )));
    }
    if e + f > 2 {
        return Err(Error::MalformedEvent(format!(
            "{} photons at Alice's detectors, at most 2 possible",
            e + f
        )));
    }
    let kind = match (e, f) {
        (0, 1) => OutcomeKind::PsiPlus,
        (1, 0) => OutcomeKind::PsiMinus,
        _ => OutcomeKind::Failure,
    };
    Ok(BellOutcome {
        kind,
        event: event.clone(),
    })
}

/// Audit trail of one teleportation trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportRecord {
    pub outcome: BellOutcome,
    pub correction_applied: bool,
    pub bob_state: Option<PureState>,
    pub fidelity_to_target: Option<f64>,
    pub trial_seed: u64,
    failure_state: Option<PureState>,
}

impl TeleportRecord {
    /// Post-measurement state of the remote modes on a failed trial.
    pub fn failure_state(&self) -> Option<&PureState> {
        self.failure_state.as_ref()
    }

    /// Bob's state before the π correction, for successful trials.
    pub fn uncorrected_state(&self) -> Option<PureState> {
        let bob = self.bob_state.as_ref()?;
        if self.correction_applied {
            apply_phase_shifter(bob, modes::B, PhaseShift::new(PI)).ok()
        } else {
            Some(bob.clone())
        }
    }
}

/// `|Ψ⟩_in` on (A, B, C): the entangled pair times `a|1⟩_C + b|0⟩_C`.
pub fn bell_input_state(target: &QubitAmplitudes) -> Result<PureState> {
    tensor(&generate_entangled(), &target.state_on(modes::C)?)
}

/// `t|1⟩_C|0⟩_D + r|0⟩_C|1⟩_D`: one photon into port D of the composite
/// element with coefficients `(t, r)`.
pub fn prepare_entangled_target(params: BeamSplitterParams) -> Result<PureState> {
    let cd = ModeRegister::with_default_cutoff([modes::C, modes::D])?;
    let photon = basis_state(&cd, &[0, 1])?;
    apply_composite_element(&photon, modes::D, modes::C, params)
}

/// `|Ψ⟩_in` on (A, B, C, D) for teleporting the entangled (C, D) pair.
pub fn entangled_input_state(params: BeamSplitterParams) -> Result<PureState> {
    tensor(&generate_entangled(), &prepare_entangled_target(params)?)
}

/// Alice's element on (A, C); outputs renamed (E, F).
fn alice_output(input: &PureState) -> Result<PureState> {
    apply_paper_element(input, modes::A, modes::C)?
        .relabel(&[(modes::A, modes::E), (modes::C, modes::F)])
}

/// Exact probabilities of the four sectors for a given input on (A, C, …).
pub fn bell_sector_weights(input: &PureState) -> Result<BTreeMap<BellSector, f64>> {
    let dist = outcome_distribution(&alice_output(input)?, &[modes::E, modes::F])?;
    let mut weights: BTreeMap<BellSector, f64> =
        BellSector::ALL.iter().map(|&s| (s, 0.0)).collect();
    for (event, p) in dist.iter() {
        *weights
            .get_mut(&classify_bell_outcome(event)?.sector())
            .expect("all sectors present") += p;
    }
    Ok(weights)
}

fn run_trial(
    input: &PureState,
    target: &PureState,
    stream: &mut RandomStream,
) -> Result<TeleportRecord> {
    let trial_seed = stream.seed();
    let (event, conditional) = sample(&alice_output(input)?, &[modes::E, modes::F], stream)?;
    let outcome = classify_bell_outcome(&event)?;
    let (bob_state, correction_applied, failure_state) = match outcome.kind {
        OutcomeKind::PsiPlus => (Some(conditional), false, None),
        OutcomeKind::PsiMinus => (
            Some(apply_phase_shifter(
                &conditional,
                modes::B,
                PhaseShift::new(PI),
            )?),
            true,
            None,
        ),
        OutcomeKind::Failure => (None, false, Some(conditional)),
    };
    let fidelity_to_target = bob_state
        .as_ref()
        .map(|bob| fidelity(bob, target))
        .transpose()?;
    Ok(TeleportRecord {
        outcome,
        correction_applied,
        bob_state,
        fidelity_to_target,
        trial_seed,
        failure_state,
    })
}

/// One teleportation trial of `a|1⟩_C + b|0⟩_C` to Bob's mode B.
pub fn teleport(target: &QubitAmplitudes, stream: &mut RandomStream) -> Result<TeleportRecord> {
    let input = bell_input_state(target)?;
    run_trial(&input, &target.state_on(modes::B)?, stream)
}

/// One trial teleporting the C half of `t|1⟩_C|0⟩_D + r|0⟩_C|1⟩_D`. On
/// success Bob's B and the untouched D carry `t|1,0⟩ + r|0,1⟩`.
pub fn teleport_entangled(
    params: BeamSplitterParams,
    stream: &mut RandomStream,
) -> Result<TeleportRecord> {
    let input = entangled_input_state(params)?;
    let target = prepare_entangled_target(params)?.relabel(&[(modes::C, modes::B)])?;
    run_trial(&input, &target, stream)
}

/// Sends (B, D) through the composite element with the preparation
/// coefficients (B into the first port) and returns the probability that
/// only detector G (the D-side output) fires. A faithfully teleported pair is
/// routed entirely to G.
pub fn verify_teleportation(joint_state: &PureState, params: BeamSplitterParams) -> Result<f64> {
    let register = joint_state.register();
    if register.len() != 2 || !register.contains(modes::B) || !register.contains(modes::D) {
        return Err(Error::RegisterMismatch {
            left: register.to_string(),
            right: format!("{},{}", modes::B, modes::D),
        });
    }
    let out = apply_composite_element(joint_state, modes::B, modes::D, params)?
        .relabel(&[(modes::B, modes::H), (modes::D, modes::G)])?;
    let dist = outcome_distribution(&out, &[modes::G, modes::H])?;
    Ok(dist.probability(&DetectionEvent::new([(modes::G, 1), (modes::H, 0)])))
}

/// Runs `n_trials` independent trials, trial `i` on substream `seed + i`.
/// Results come back in trial order whatever the thread count.
pub fn run_teleport_batch<F>(seed: u64, n_trials: u64, trial: F) -> Result<Vec<TeleportRecord>>
where
    F: Fn(&mut RandomStream) -> Result<TeleportRecord> + Sync,
{
    let root = RandomStream::new(seed);
    (0..n_trials)
        .into_par_iter()
        .map(|i| trial(&mut root.substream(i)))
        .collect()
}

/// Aggregate statistics over a batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportSummary {
    pub trials: u64,
    pub successes: u64,
    pub success_fraction: f64,
    pub corrections: u64,
    pub sector_counts: BTreeMap<&'static str, u64>,
    pub sector_fractions: BTreeMap<&'static str, f64>,
    pub mean_success_fidelity: Option<f64>,
    pub min_success_fidelity: Option<f64>,
}

impl TeleportSummary {
    pub fn from_records(records: &[TeleportRecord]) -> Self {
        let trials = records.len() as u64;
        let mut sector_counts: BTreeMap<&'static str, u64> =
            BellSector::ALL.iter().map(|s| (s.name(), 0)).collect();
        let mut successes = 0;
        let mut corrections = 0;
        let mut fid_sum = 0.0;
        let mut fid_min: Option<f64> = None;
        for r in records {
            *sector_counts
                .get_mut(r.outcome.sector().name())
                .expect("known sector") += 1;
            corrections += u64::from(r.correction_applied);
            if let Some(f) = r.fidelity_to_target {
                successes += 1;
                fid_sum += f;
                fid_min = Some(fid_min.map_or(f, |m| m.min(f)));
            }
        }
        let frac = |n: u64| {
            if trials == 0 {
                0.0
            } else {
                n as f64 / trials as f64
            }
        };
        Self {
            trials,
            successes,
            success_fraction: frac(successes),
            corrections,
            sector_fractions: sector_counts.iter().map(|(&k, &n)| (k, frac(n))).collect(),
            sector_counts,
            mean_success_fidelity: (successes > 0).then(|| fid_sum / successes as f64),
            min_success_fidelity: fid_min,
        }
    }
}
