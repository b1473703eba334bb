//! Ideal photon-number-resolving detection.
//!
//! Exact Born-rule distributions, post-selection onto a detector event, and
//! seeded sampling with collapse. Events are ordered lexicographically by
//! their count vectors (modes sorted by label), and sampling walks that order
//! with an inverse CDF so that a given seed reproduces the same draws on every
//! platform.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockBasisState, PureState};

/// Seeded pseudo-random source: ChaCha8 keyed by a 64-bit seed.
///
/// Per-trial substreams are independent generators seeded with
/// `seed + trial_index` (wrapping).
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self, index: u64) -> Self {
        Self::new(self.seed.wrapping_add(index))
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Photon counts recorded by a set of detectors, keyed by mode label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct DetectionEvent {
    counts: BTreeMap<String, u32>,
}

impl DetectionEvent {
    pub fn new<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        Self {
            counts: counts.into_iter().map(|(l, n)| (l.into(), n)).collect(),
        }
    }

    pub fn count(&self, mode: &str) -> Option<u32> {
        self.counts.get(mode).copied()
    }

    pub fn modes(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(l, &n)| (l.as_str(), n))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }
}

impl fmt::Display for DetectionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(l, n)| format!("{l}:{n}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Joint count distribution over a fixed set of detectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeDistribution {
    entries: BTreeMap<DetectionEvent, f64>,
}

impl OutcomeDistribution {
    pub fn probability(&self, event: &DetectionEvent) -> f64 {
        self.entries.get(event).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DetectionEvent, f64)> {
        self.entries.iter().map(|(e, &p)| (e, p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Inverse-CDF lookup in event order.
    pub fn select(&self, u: f64) -> Result<&DetectionEvent> {
        let mut acc = 0.0;
        let mut last = None;
        for (event, &p) in &self.entries {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = Some(event);
            if u < acc {
                return Ok(event);
            }
        }
        last.ok_or(Error::EmptyDistribution)
    }
}

/// Result of conditioning on a detector event. `conditional` is absent when
/// the event cannot occur.
#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection {
    pub probability: f64,
    pub conditional: Option<PureState>,
}

impl PostSelection {
    pub fn is_impossible(&self) -> bool {
        self.conditional.is_none()
    }
}

/// One detection: the event the detectors report and the collapsed state on
/// the unmeasured modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub event: DetectionEvent,
    pub conditional: PureState,
}

/// Number-resolving detector bank. Efficiency below one thins each photon
/// independently in the reported event; the collapse still follows the
/// photons that actually arrived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detector {
    efficiency: f64,
}

impl Default for Detector {
    fn default() -> Self {
        Self::ideal()
    }
}

impl Detector {
    pub fn new(efficiency: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::InvalidEfficiency(efficiency));
        }
        Ok(Self { efficiency })
    }

    pub const fn ideal() -> Self {
        Self { efficiency: 1.0 }
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn sample(
        &self,
        state: &PureState,
        modes: &[&str],
        stream: &mut RandomStream,
    ) -> Result<Detection> {
        let dist = outcome_distribution(state, modes)?;
        let event = dist.select(stream.next_uniform())?.clone();
        let conditional = post_select(state, &event)?
            .conditional
            .expect("sampled events have nonzero probability");
        let event = if self.efficiency < 1.0 {
            self.thin(&event, stream)
        } else {
            event
        };
        Ok(Detection { event, conditional })
    }

    fn thin(&self, event: &DetectionEvent, stream: &mut RandomStream) -> DetectionEvent {
        DetectionEvent::new(event.iter().map(|(label, n)| {
            let seen = (0..n)
                .filter(|_| stream.next_uniform() < self.efficiency)
                .count();
            (label, seen as u32)
        }))
    }
}

fn mode_indices(state: &PureState, modes: &[&str]) -> Result<Vec<(String, usize)>> {
    let mut out: Vec<(String, usize)> = Vec::with_capacity(modes.len());
    for &m in modes {
        if out.iter().any(|(l, _)| l == m) {
            return Err(Error::DuplicateLabel(m.to_string()));
        }
        out.push((m.to_string(), state.register().index_of(m)?));
    }
    out.sort();
    Ok(out)
}

fn event_of(key: &FockBasisState, indices: &[(String, usize)]) -> DetectionEvent {
    DetectionEvent {
        counts: indices
            .iter()
            .map(|(l, i)| (l.clone(), key.occupations()[*i]))
            .collect(),
    }
}

/// Marginal Born-rule distribution of joint counts on `modes`.
pub fn outcome_distribution(state: &PureState, modes: &[&str]) -> Result<OutcomeDistribution> {
    let indices = mode_indices(state, modes)?;
    let mut entries: BTreeMap<DetectionEvent, f64> = BTreeMap::new();
    for (key, amp) in state.iter() {
        *entries.entry(event_of(key, &indices)).or_insert(0.0) += amp.norm_sqr();
    }
    let total: f64 = entries.values().sum();
    if total > 0.0 {
        for p in entries.values_mut() {
            *p = (*p / total).max(0.0);
        }
    }
    Ok(OutcomeDistribution { entries })
}

/// Projects onto `event` and renormalizes on the unmeasured modes, which keep
/// their original order.
pub fn post_select(state: &PureState, event: &DetectionEvent) -> Result<PostSelection> {
    let register = state.register();
    let mut measured = Vec::with_capacity(event.len());
    for (label, n) in event.iter() {
        measured.push((register.index_of(label)?, n));
    }
    let keep: Vec<usize> = (0..register.len())
        .filter(|i| !measured.iter().any(|(m, _)| m == i))
        .collect();

    let norm = state.norm_sqr();
    let branch = state.map_amplitudes(|key, a| {
        let occ = key.occupations();
        if measured.iter().all(|&(i, n)| occ[i] == n) {
            a
        } else {
            Default::default()
        }
    });
    let probability = if norm > 0.0 {
        branch.norm_sqr() / norm
    } else {
        0.0
    };
    if branch.is_empty() || probability <= 0.0 {
        return Ok(PostSelection {
            probability: 0.0,
            conditional: None,
        });
    }
    Ok(PostSelection {
        probability,
        conditional: Some(branch.restrict(&keep).normalize()?),
    })
}

/// Samples with an ideal detector.
pub fn sample(
    state: &PureState,
    modes: &[&str],
    stream: &mut RandomStream,
) -> Result<(DetectionEvent, PureState)> {
    let d = Detector::ideal().sample(state, modes, stream)?;
    Ok((d.event, d.conditional))
}
