//! Fixtures shared by the criterion benches.

use fockline_core::{Complex64, ModeRegister, PureState, RandomStream};

/// Seeded random state with every basis vector up to `cutoff` total photons
/// over `n_modes` modes labelled `M0`, `M1`, ...
pub fn dense_random_state(n_modes: usize, cutoff: u32, seed: u64) -> PureState {
    let labels: Vec<String> = (0..n_modes).map(|i| format!("M{i}")).collect();
    let register = ModeRegister::new(labels, cutoff).expect("distinct labels");
    let mut stream = RandomStream::new(seed);
    let entries = occupations(n_modes, cutoff)
        .into_iter()
        .map(|occ| {
            let amp = Complex64::new(stream.next_uniform() - 0.5, stream.next_uniform() - 0.5);
            (occ, amp)
        })
        .collect::<Vec<_>>();
    PureState::from_amplitudes(&register, entries).expect("nonzero state")
}

fn occupations(n_modes: usize, cutoff: u32) -> Vec<Vec<u32>> {
    if n_modes == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=cutoff {
        for mut rest in occupations(n_modes - 1, cutoff - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
