//! Sparse multi-mode Fock states.
//!
//! A [`PureState`] is a map from occupation vectors to complex amplitudes over
//! an ordered [`ModeRegister`]. States are values: every operation returns a
//! new state and leaves its inputs untouched.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photon-number cutoff used when a register is built without an explicit one.
pub const DEFAULT_CUTOFF: u32 = 2;

/// Amplitudes with magnitude below this are dropped after every element.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Ordered set of optical mode labels plus the maximum total photon number.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeRegister {
    labels: Vec<String>,
    cutoff: u32,
}

impl ModeRegister {
    pub fn new<I, S>(labels: I, cutoff: u32) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels, cutoff })
    }

    pub fn with_default_cutoff<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(labels, DEFAULT_CUTOFF)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    /// Registers are interchangeable when they carry the same labels in the
    /// same order; the cutoff is only a capacity bound.
    pub fn same_modes(&self, other: &ModeRegister) -> bool {
        self.labels == other.labels
    }

    /// Concatenation `self ++ other`. The cutoff is the sum of both cutoffs.
    pub fn concat(&self, other: &ModeRegister) -> Result<Self> {
        if let Some(label) = other.labels.iter().find(|l| self.contains(l)) {
            return Err(Error::LabelCollision(label.clone()));
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Ok(Self {
            labels,
            cutoff: self.cutoff + other.cutoff,
        })
    }

    /// Renames modes. Labels not mentioned in `mapping` keep their name.
    pub fn relabel(&self, mapping: &[(&str, &str)]) -> Result<Self> {
        for (from, _) in mapping {
            self.index_of(from)?;
        }
        let labels = self.labels.iter().map(|l| {
            mapping
                .iter()
                .find(|(from, _)| *from == l)
                .map_or_else(|| l.clone(), |(_, to)| (*to).to_string())
        });
        Self::new(labels, self.cutoff)
    }

    fn keep(&self, keep: &[usize]) -> Self {
        Self {
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            cutoff: self.cutoff,
        }
    }
}

impl fmt::Display for ModeRegister {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.labels.join(","))
    }
}

/// Photon counts, one per register mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisState(Vec<u32>);

impl FockBasisState {
    pub fn new(occupations: Vec<u32>, register: &ModeRegister) -> Result<Self> {
        if occupations.len() != register.len() {
            return Err(Error::LengthMismatch {
                expected: register.len(),
                found: occupations.len(),
            });
        }
        let total: u32 = occupations.iter().sum();
        if total > register.cutoff() {
            return Err(Error::CutoffExceeded {
                total,
                cutoff: register.cutoff(),
            });
        }
        Ok(Self(occupations))
    }

    pub(crate) fn from_vec(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// One serialized amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRecord {
    pub occupations: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// A normalized pure state over a [`ModeRegister`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    register: ModeRegister,
    amplitudes: BTreeMap<FockBasisState, Complex64>,
}

impl PureState {
    /// Unit-amplitude basis vector.
    pub fn basis(register: &ModeRegister, occupations: &[u32]) -> Result<Self> {
        let key = FockBasisState::new(occupations.to_vec(), register)?;
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(key, Complex64::new(1.0, 0.0));
        Ok(Self {
            register: register.clone(),
            amplitudes,
        })
    }

    pub fn vacuum(register: &ModeRegister) -> Self {
        let zeros = vec![0; register.len()];
        Self::basis(register, &zeros).expect("vacuum always fits the register")
    }

    /// Builds and normalizes a state from explicit amplitudes. Repeated
    /// occupation vectors are summed.
    pub fn from_amplitudes<I>(register: &ModeRegister, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut amplitudes: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
        for (occupations, amp) in entries {
            let key = FockBasisState::new(occupations, register)?;
            *amplitudes.entry(key).or_default() += amp;
        }
        Self::from_map(register.clone(), amplitudes).normalize()
    }

    pub fn from_records(register: &ModeRegister, records: &[AmplitudeRecord]) -> Result<Self> {
        Self::from_amplitudes(
            register,
            records
                .iter()
                .map(|r| (r.occupations.clone(), Complex64::new(r.re, r.im))),
        )
    }

    /// Unnormalized constructor used by the element implementations. Prunes.
    pub(crate) fn from_map(
        register: ModeRegister,
        mut amplitudes: BTreeMap<FockBasisState, Complex64>,
    ) -> Self {
        amplitudes.retain(|_, amp| amp.norm() >= PRUNE_THRESHOLD);
        Self {
            register,
            amplitudes,
        }
    }

    pub fn register(&self) -> &ModeRegister {
        &self.register
    }

    pub fn amplitude(&self, occupations: &[u32]) -> Complex64 {
        self.amplitudes
            .get(&FockBasisState::from_vec(occupations.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    /// Nonzero entries in lexicographic occupation order.
    pub fn iter(&self) -> impl Iterator<Item = (&FockBasisState, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if self.amplitudes.is_empty() || norm < PRUNE_THRESHOLD {
            return Err(Error::ZeroVector);
        }
        let amplitudes = self
            .amplitudes
            .into_iter()
            .map(|(k, a)| (k, a / norm))
            .collect();
        Ok(Self::from_map(self.register, amplitudes))
    }

    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        self.map_amplitudes(|_, a| a * phase)
    }

    pub(crate) fn map_amplitudes<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&FockBasisState, Complex64) -> Complex64,
    {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(k, &a)| (k.clone(), f(k, a)))
            .collect();
        Self::from_map(self.register.clone(), amplitudes)
    }

    pub fn relabel(&self, mapping: &[(&str, &str)]) -> Result<Self> {
        Ok(Self {
            register: self.register.relabel(mapping)?,
            amplitudes: self.amplitudes.clone(),
        })
    }

    /// Reorders the register so its labels follow `order`, which must be a
    /// permutation of the current labels.
    pub fn permute_modes(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.register.len() {
            return Err(Error::LengthMismatch {
                expected: self.register.len(),
                found: order.len(),
            });
        }
        let indices = order
            .iter()
            .map(|l| self.register.index_of(l))
            .collect::<Result<Vec<_>>>()?;
        let register = ModeRegister::new(order.iter().copied(), self.register.cutoff())?;
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(k, &a)| {
                let occ = indices.iter().map(|&i| k.0[i]).collect();
                (FockBasisState(occ), a)
            })
            .collect();
        Ok(Self {
            register,
            amplitudes,
        })
    }

    /// Keeps only the listed mode positions; callers guarantee that the
    /// dropped modes are constant across every entry.
    pub(crate) fn restrict(&self, keep: &[usize]) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(k, &a)| (FockBasisState(keep.iter().map(|&i| k.0[i]).collect()), a))
            .collect();
        Self {
            register: self.register.keep(keep),
            amplitudes,
        }
    }

    /// Weight of each total-photon-number sector.
    pub fn photon_number_distribution(&self) -> BTreeMap<u32, f64> {
        let mut out = BTreeMap::new();
        for (k, a) in &self.amplitudes {
            *out.entry(k.total()).or_insert(0.0) += a.norm_sqr();
        }
        out
    }

    pub fn to_records(&self) -> Vec<AmplitudeRecord> {
        self.amplitudes
            .iter()
            .map(|(k, a)| AmplitudeRecord {
                occupations: k.0.clone(),
                re: a.re,
                im: a.im,
            })
            .collect()
    }

    fn check_same_modes(&self, other: &PureState) -> Result<()> {
        if self.register.same_modes(&other.register) {
            Ok(())
        } else {
            Err(Error::RegisterMismatch {
                left: self.register.to_string(),
                right: other.register.to_string(),
            })
        }
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, a) in &self.amplitudes {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let kets: Vec<String> =
                k.0.iter()
                    .zip(self.register.labels())
                    .map(|(n, l)| format!("|{n}>_{l}"))
                    .collect();
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, kets.concat())?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

pub fn basis_state(register: &ModeRegister, occupations: &[u32]) -> Result<PureState> {
    PureState::basis(register, occupations)
}

/// Normalized linear combination `Σ c_k |s_k⟩`.
pub fn superpose(terms: &[(Complex64, &PureState)]) -> Result<PureState> {
    let (_, first) = terms.first().ok_or(Error::EmptySuperposition)?;
    let mut amplitudes: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
    let mut cutoff = first.register.cutoff();
    for (coeff, state) in terms {
        first.check_same_modes(state)?;
        cutoff = cutoff.max(state.register.cutoff());
        for (k, a) in &state.amplitudes {
            *amplitudes.entry(k.clone()).or_default() += coeff * a;
        }
    }
    let register = ModeRegister {
        labels: first.register.labels.clone(),
        cutoff,
    };
    PureState::from_map(register, amplitudes).normalize()
}

/// Product state on the concatenated register `s1 ++ s2`.
pub fn tensor(s1: &PureState, s2: &PureState) -> Result<PureState> {
    let register = s1.register.concat(&s2.register)?;
    let mut amplitudes = BTreeMap::new();
    for (k1, a1) in &s1.amplitudes {
        for (k2, a2) in &s2.amplitudes {
            let mut occ = k1.0.clone();
            occ.extend_from_slice(&k2.0);
            amplitudes.insert(FockBasisState(occ), a1 * a2);
        }
    }
    Ok(PureState::from_map(register, amplitudes))
}

/// `⟨s1|s2⟩`, conjugating the left argument.
pub fn inner_product(s1: &PureState, s2: &PureState) -> Result<Complex64> {
    s1.check_same_modes(s2)?;
    let (small, large, conj_small) = if s1.len() <= s2.len() {
        (s1, s2, true)
    } else {
        (s2, s1, false)
    };
    let mut acc = Complex64::default();
    for (k, a) in &small.amplitudes {
        if let Some(b) = large.amplitudes.get(k) {
            acc += if conj_small {
                a.conj() * b
            } else {
                b.conj() * a
            };
        }
    }
    Ok(acc)
}

pub fn fidelity(s1: &PureState, s2: &PureState) -> Result<f64> {
    Ok(inner_product(s1, s2)?.norm_sqr().clamp(0.0, 1.0))
}
