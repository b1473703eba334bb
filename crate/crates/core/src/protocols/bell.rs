use rayon::prelude::*;
use serde::Serialize;

use super::{generate_entangled, modes};
use crate::error::{Error, Result};
use crate::fock::PureState;
use crate::measurement::{outcome_distribution, DetectionEvent, RandomStream};
use crate::optics::{apply_paper_element, apply_phase_shifter, PhaseShift};

/// Slack used when comparing the two sides of the correlation inequality.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Which of the two phase shifters are in the beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShifterConfig {
    AliceOnly,
    BobOnly,
    Both,
}

impl ShifterConfig {
    pub const ALL: [ShifterConfig; 3] = [
        ShifterConfig::AliceOnly,
        ShifterConfig::BobOnly,
        ShifterConfig::Both,
    ];

    /// Phases actually inserted, `(φ_A, φ_B)` with unused shifters at zero.
    pub fn phases(self, phi_a: f64, phi_b: f64) -> (f64, f64) {
        match self {
            ShifterConfig::AliceOnly => (phi_a, 0.0),
            ShifterConfig::BobOnly => (0.0, phi_b),
            ShifterConfig::Both => (phi_a, phi_b),
        }
    }
}

/// Output of the Mach-Zehnder interferometer on (C, D). Alice shifts beam A
/// by `+φ_A`, Bob shifts beam B by `−φ_B`, and the second element is oriented
/// so that with no shifters the photon always leaves towards D_C.
pub fn mz_output_state(phi_a: f64, phi_b: f64) -> Result<PureState> {
    let s = generate_entangled();
    let s = apply_phase_shifter(&s, modes::A, PhaseShift::new(phi_a))?;
    let s = apply_phase_shifter(&s, modes::B, PhaseShift::new(-phi_b))?;
    apply_paper_element(&s, modes::A, modes::B)?
        .relabel(&[(modes::A, modes::D), (modes::B, modes::C)])?
        .permute_modes(&[modes::C, modes::D])
}

/// `sin²((φ_A + φ_B)/2)`: probability that the photon reaches D_D.
pub fn mz_probability(phi_a: f64, phi_b: f64) -> f64 {
    ((phi_a + phi_b) / 2.0).sin().powi(2)
}

/// D_D click probability read off the simulated interferometer.
pub fn simulated_dd_probability(phi_a: f64, phi_b: f64) -> Result<f64> {
    let dist = outcome_distribution(&mz_output_state(phi_a, phi_b)?, &[modes::C, modes::D])?;
    Ok(dist.probability(&DetectionEvent::new([(modes::C, 0), (modes::D, 1)])))
}

/// `sin²(φ_A/2) + sin²(φ_B/2) − sin²((φ_A+φ_B)/2)`; negative where the
/// locality bound fails.
pub fn analytic_margin(phi_a: f64, phi_b: f64) -> f64 {
    mz_probability(phi_a, 0.0) + mz_probability(0.0, phi_b) - mz_probability(phi_a, phi_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DetectorCounts {
    pub n_dc: u64,
    pub n_dd: u64,
}

/// D_C / D_D tallies for one phase setting under all three shifter
/// configurations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellCounts {
    pub phi_a: f64,
    pub phi_b: f64,
    pub n_trials: u64,
    pub alice_only: DetectorCounts,
    pub bob_only: DetectorCounts,
    pub both: DetectorCounts,
    pub n_a: u64,
    pub n_b: u64,
    pub n_ab: u64,
    /// `(N_A + N_B − N_AB) / N`.
    pub margin: f64,
}

impl BellCounts {
    pub fn from_counts(
        phi_a: f64,
        phi_b: f64,
        n_trials: u64,
        alice_only: DetectorCounts,
        bob_only: DetectorCounts,
        both: DetectorCounts,
    ) -> Self {
        let (n_a, n_b, n_ab) = (alice_only.n_dd, bob_only.n_dd, both.n_dd);
        let margin = if n_trials == 0 {
            0.0
        } else {
            (n_a as f64 + n_b as f64 - n_ab as f64) / n_trials as f64
        };
        Self {
            phi_a,
            phi_b,
            n_trials,
            alice_only,
            bob_only,
            both,
            n_a,
            n_b,
            n_ab,
            margin,
        }
    }

    /// Binomial standard error of `margin`, taking the three configurations
    /// as independent and using the observed frequencies.
    pub fn margin_std_error(&self) -> f64 {
        let n = self.n_trials as f64;
        let var = |k: u64| {
            let p = k as f64 / n;
            p * (1.0 - p)
        };
        ((var(self.n_a) + var(self.n_b) + var(self.n_ab)) / n).sqrt()
    }
}

fn count_configuration(
    state: &PureState,
    root: &RandomStream,
    offset: u64,
    n_trials: u64,
) -> Result<DetectorCounts> {
    let dist = outcome_distribution(state, &[modes::C, modes::D])?;
    let n_dd = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let u = root.substream(offset + i).next_uniform();
            Ok(u64::from(dist.select(u)?.count(modes::D) == Some(1)))
        })
        .sum::<Result<u64>>()?;
    Ok(DetectorCounts {
        n_dc: n_trials - n_dd,
        n_dd,
    })
}

/// Sends `n_trials` single photons through the interferometer for each of
/// the three shifter configurations. Configuration `k` (Alice only, Bob only,
/// both) uses substreams `seed + k·n_trials + i`.
pub fn run_bell_experiment(
    phi_a: f64,
    phi_b: f64,
    n_trials: u64,
    stream: &RandomStream,
) -> Result<BellCounts> {
    if n_trials == 0 {
        return Err(Error::InvalidTrialCount);
    }
    let mut counts = [DetectorCounts::default(); 3];
    for (k, config) in ShifterConfig::ALL.iter().enumerate() {
        let (a, b) = config.phases(phi_a, phi_b);
        let state = mz_output_state(a, b)?;
        counts[k] = count_configuration(&state, stream, k as u64 * n_trials, n_trials)?;
    }
    Ok(BellCounts::from_counts(
        phi_a, phi_b, n_trials, counts[0], counts[1], counts[2],
    ))
}

/// `N_AB ≤ N_A + N_B`.
pub fn bell_inequality_holds(counts: &BellCounts) -> bool {
    counts.n_ab <= counts.n_a + counts.n_b
}

/// Bell's spin-correlation inequality under `P = −cos` of the phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationForm {
    pub p_ac: f64,
    pub p_bc: f64,
    pub p_ab: f64,
    /// `1 + P(b,c) ≥ |P(a,b) − P(a,c)|`.
    pub satisfied: bool,
    /// `1 + P(b,c) ≥ P(a,b) − P(a,c)`, the single branch that maps onto the
    /// photon-count inequality at this same setting.
    pub signed_satisfied: bool,
}

pub fn bell_correlation_form(phi_a: f64, phi_b: f64) -> CorrelationForm {
    let p_ac = -phi_a.cos();
    let p_bc = -phi_b.cos();
    let p_ab = -(phi_a + phi_b).cos();
    let lhs = 1.0 + p_bc;
    CorrelationForm {
        p_ac,
        p_bc,
        p_ab,
        satisfied: lhs >= (p_ab - p_ac).abs() - BOUNDARY_TOLERANCE,
        signed_satisfied: lhs >= (p_ab - p_ac) - BOUNDARY_TOLERANCE,
    }
}
