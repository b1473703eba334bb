//! Phase shifters and two-mode beam splitters acting on Fock states.
//!
//! Beam splitter convention: the reflected component picks up a factor `i`
//! relative to the transmitted one, and transmitted light crosses over to the
//! other port label. In terms of creation operators
//!
//! ```text
//! a1† -> i·r·a1† + t·a2†
//! a2† -> t·a1† + i·r·a2†
//! ```
//!
//! where the output modes reuse the input labels.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockBasisState, PureState};

const NORM_TOLERANCE: f64 = 1e-12;

/// A phase in radians. Applied verbatim; [`PhaseShift::canonical`] is for
/// display only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShift {
    phi: f64,
}

impl PhaseShift {
    pub const fn new(phi: f64) -> Self {
        Self { phi }
    }

    pub fn radians(&self) -> f64 {
        self.phi
    }

    /// The equivalent angle in (−π, π].
    pub fn canonical(&self) -> f64 {
        use std::f64::consts::{PI, TAU};
        let mut x = self.phi.rem_euclid(TAU);
        if x > PI {
            x -= TAU;
        }
        x
    }
}

/// Transmission and reflection amplitudes of a lossless symmetric beam
/// splitter.
///
/// Besides `|t|² + |r|² = 1`, the two amplitudes must share a common phase up
/// to sign (`conj(t)·r` real). Together with the `i` on reflection this is what
/// makes the element unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterParams {
    t: Complex64,
    r: Complex64,
}

impl BeamSplitterParams {
    pub fn new(t: Complex64, r: Complex64) -> Result<Self> {
        let norm = t.norm_sqr() + r.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidBeamSplitter(format!(
                "|t|^2 + |r|^2 = {norm}, expected 1"
            )));
        }
        let cross = (t.conj() * r).im;
        if cross.abs() > NORM_TOLERANCE {
            return Err(Error::InvalidBeamSplitter(format!(
                "t and r must share a phase up to sign, Im(conj(t) r) = {cross}"
            )));
        }
        Ok(Self { t, r })
    }

    /// `t = e^{iφ} cos θ`, `r = e^{iφ} sin θ`. Covers every valid parameter pair.
    pub fn from_angles(theta: f64, common_phase: f64) -> Self {
        let phase = Complex64::from_polar(1.0, common_phase);
        Self {
            t: phase * theta.cos(),
            r: phase * theta.sin(),
        }
    }

    /// The 50/50 splitter, `t = r = 1/√2`.
    pub fn balanced() -> Self {
        Self {
            t: Complex64::new(FRAC_1_SQRT_2, 0.0),
            r: Complex64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn t(&self) -> Complex64 {
        self.t
    }

    pub fn r(&self) -> Complex64 {
        self.r
    }
}

/// Multiplies each amplitude by `e^{i·φ·n}`, `n` the photon count in `mode`.
pub fn apply_phase_shifter(state: &PureState, mode: &str, shift: PhaseShift) -> Result<PureState> {
    if !shift.phi.is_finite() {
        return Err(Error::NonFinitePhase(shift.phi));
    }
    let idx = state.register().index_of(mode)?;
    Ok(state.map_amplitudes(|k, a| {
        let n = k.occupations()[idx];
        if n == 0 {
            a
        } else {
            a * Complex64::from_polar(1.0, shift.phi * f64::from(n))
        }
    }))
}

/// General beam splitter between `mode_in1` and `mode_in2`.
pub fn apply_beam_splitter(
    state: &PureState,
    mode_in1: &str,
    mode_in2: &str,
    params: BeamSplitterParams,
) -> Result<PureState> {
    let (i1, i2) = port_indices(state, mode_in1, mode_in2)?;
    let mut expansions: HashMap<(u32, u32), Vec<(u32, Complex64)>> = HashMap::new();
    let mut out: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
    for (key, &amp) in state.iter() {
        let occ = key.occupations();
        let (m, n) = (occ[i1], occ[i2]);
        let terms = expansions
            .entry((m, n))
            .or_insert_with(|| two_mode_expansion(m, n, params));
        for &(p, coeff) in terms.iter() {
            let mut next = occ.to_vec();
            next[i1] = p;
            next[i2] = m + n - p;
            *out.entry(FockBasisState::from_vec(next)).or_default() += amp * coeff;
        }
    }
    Ok(PureState::from_map(state.register().clone(), out))
}

/// Beam splitter with the −π/2 phase shifters used throughout the
/// experiments: one on the `mode_in2` input before the splitter, one on the
/// `mode_in1` output after it. The single-photon transfer is
/// `in1 -> r·out1 + t·out2`, `in2 -> −t·out1 + r·out2`.
pub fn apply_composite_element(
    state: &PureState,
    mode_in1: &str,
    mode_in2: &str,
    params: BeamSplitterParams,
) -> Result<PureState> {
    port_indices(state, mode_in1, mode_in2)?;
    let quarter = PhaseShift::new(-FRAC_PI_2);
    let s = apply_phase_shifter(state, mode_in2, quarter)?;
    let s = apply_beam_splitter(&s, mode_in1, mode_in2, params)?;
    apply_phase_shifter(&s, mode_in1, quarter)
}

/// The 50/50 composite element. `mode_in1` takes the I/A role (reflected
/// side), `mode_in2` the J/B role. One photon in `mode_in1` leaves as
/// `(|1,0⟩ + |0,1⟩)/√2`.
pub fn apply_paper_element(state: &PureState, mode_in1: &str, mode_in2: &str) -> Result<PureState> {
    apply_composite_element(state, mode_in1, mode_in2, BeamSplitterParams::balanced())
}

fn port_indices(state: &PureState, mode_in1: &str, mode_in2: &str) -> Result<(usize, usize)> {
    if mode_in1 == mode_in2 {
        return Err(Error::SamePort(mode_in1.to_string()));
    }
    let register = state.register();
    Ok((register.index_of(mode_in1)?, register.index_of(mode_in2)?))
}

/// Output amplitudes of `|m, n⟩` as `(p, coeff)` pairs, where `p` is the
/// count left in port 1 and `m + n − p` the count in port 2.
///
/// Expands `(i r x + t y)^m (t x + i r y)^n / √(m! n!)` with the binomial
/// theorem; the coefficient of `x^p y^q` picks up `√(p! q!)`.
fn two_mode_expansion(m: u32, n: u32, params: BeamSplitterParams) -> Vec<(u32, Complex64)> {
    let ir = Complex64::new(0.0, 1.0) * params.r;
    let t = params.t;
    let total = m + n;
    let mut coeffs = vec![Complex64::default(); total as usize + 1];
    for j in 0..=m {
        let first = binomial(m, j) * ir.powu(j) * t.powu(m - j);
        for k in 0..=n {
            let second = binomial(n, k) * t.powu(k) * ir.powu(n - k);
            coeffs[(j + k) as usize] += first * second;
        }
    }
    coeffs
        .into_iter()
        .enumerate()
        .map(|(p, c)| {
            let p = p as u32;
            (p, c * factorial_ratio_sqrt(p, total - p, m, n))
        })
        .filter(|(_, c)| c.norm() > 0.0)
        .collect()
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as f64
}

/// `√(p! q! / (m! n!))`.
fn factorial_ratio_sqrt(p: u32, q: u32, m: u32, n: u32) -> f64 {
    const EXACT_LIMIT: u32 = 30;
    if p.max(q).max(m).max(n) <= EXACT_LIMIT {
        let num = factorial(p)
            .zip(factorial(q))
            .and_then(|(a, b)| a.checked_mul(b));
        let den = factorial(m)
            .zip(factorial(n))
            .and_then(|(a, b)| a.checked_mul(b));
        if let (Some(num), Some(den)) = (num, den) {
            return (num as f64 / den as f64).sqrt();
        }
    }
    let ln = ln_factorial(p) + ln_factorial(q) - ln_factorial(m) - ln_factorial(n);
    (0.5 * ln).exp()
}

fn factorial(n: u32) -> Option<u128> {
    (1..=u128::from(n)).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}
