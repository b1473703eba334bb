//! Exact simulation of linear-optical experiments with single photons.
//!
//! States are sparse superpositions of multi-mode Fock basis vectors
//! ([`fock`]); beam splitters and phase shifters act on them exactly
//! ([`optics`]); ideal number-resolving detectors give Born-rule
//! distributions, post-selection and seeded sampling ([`measurement`]). The
//! [`protocols`] module assembles these into single-photon entanglement,
//! teleportation with a two-detector Bell analysis, and a Mach-Zehnder test of
//! the single-particle locality inequality.

pub mod error;
pub mod fock;
pub mod measurement;
pub mod optics;
pub mod protocols;

pub use error::{Error, Result};
pub use fock::{
    basis_state, fidelity, inner_product, superpose, tensor, AmplitudeRecord, FockBasisState,
    ModeRegister, PureState, DEFAULT_CUTOFF,
};
pub use measurement::{
    outcome_distribution, post_select, sample, DetectionEvent, Detector, OutcomeDistribution,
    PostSelection, RandomStream,
};
pub use optics::{
    apply_beam_splitter, apply_composite_element, apply_paper_element, apply_phase_shifter,
    BeamSplitterParams, PhaseShift,
};
pub use protocols::generate_entangled;

pub use num_complex::Complex64;
