//! The three single-photon experiments: entanglement generation,
//! teleportation (of a qubit and of an entangled pair) with Bell analysis and
//! verification, and the Mach-Zehnder Bell-inequality test.

mod bell;
mod teleport;

pub use bell::{
    analytic_margin, bell_correlation_form, bell_inequality_holds, mz_output_state, mz_probability,
    run_bell_experiment, simulated_dd_probability, BellCounts, CorrelationForm, DetectorCounts,
    ShifterConfig, BOUNDARY_TOLERANCE,
};
pub use teleport::{
    bell_input_state, bell_sector_weights, classify_bell_outcome, entangled_input_state,
    prepare_entangled_target, run_teleport_batch, teleport, teleport_entangled,
    verify_teleportation, BellOutcome, BellSector, OutcomeKind, QubitAmplitudes, TeleportRecord,
    TeleportSummary,
};

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::Result;
use crate::fock::{basis_state, ModeRegister, PureState};
use crate::optics::apply_paper_element;

/// Mode labels used by the experiments.
pub mod modes {
    pub const I: &str = "I";
    pub const J: &str = "J";
    pub const A: &str = "A";
    pub const B: &str = "B";
    pub const C: &str = "C";
    pub const D: &str = "D";
    pub const E: &str = "E";
    pub const F: &str = "F";
    pub const G: &str = "G";
    pub const H: &str = "H";
}

/// `(|1⟩_A|0⟩_B + |0⟩_A|1⟩_B)/√2`, produced by one photon entering port I of
/// the 50/50 composite element.
pub fn generate_entangled() -> PureState {
    let ij = ModeRegister::with_default_cutoff([modes::I, modes::J]).expect("distinct labels");
    let photon = basis_state(&ij, &[1, 0]).expect("one photon fits");
    let out = apply_paper_element(&photon, modes::I, modes::J).expect("ports exist");
    out.relabel(&[(modes::I, modes::A), (modes::J, modes::B)])
        .expect("fresh labels")
}

/// The same state assembled directly from its amplitudes.
pub fn entangled_reference() -> Result<PureState> {
    let ab = ModeRegister::with_default_cutoff([modes::A, modes::B])?;
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    crate::fock::superpose(&[
        (h, &basis_state(&ab, &[1, 0])?),
        (h, &basis_state(&ab, &[0, 1])?),
    ])
}
