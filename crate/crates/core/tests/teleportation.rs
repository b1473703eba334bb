use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use fockline_core::protocols::{
    bell_input_state, bell_sector_weights, entangled_input_state, prepare_entangled_target,
    run_teleport_batch, teleport, teleport_entangled, verify_teleportation, BellSector,
    OutcomeKind, QubitAmplitudes, TeleportSummary,
};
use fockline_core::{
    apply_paper_element, basis_state, fidelity, inner_product, post_select, superpose,
    BeamSplitterParams, Complex64, DetectionEvent, ModeRegister, PureState, RandomStream,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ac() -> ModeRegister {
    ModeRegister::with_default_cutoff(["A", "C"]).unwrap()
}

fn ket(reg: &ModeRegister, occ: &[u32]) -> PureState {
    basis_state(reg, occ).unwrap()
}

fn combo(terms: &[(f64, &[u32])]) -> PureState {
    let reg = ac();
    let kets: Vec<PureState> = terms.iter().map(|(_, occ)| ket(&reg, occ)).collect();
    let pairs: Vec<(Complex64, &PureState)> = terms
        .iter()
        .zip(&kets)
        .map(|((w, _), k)| (c(*w, 0.0), k))
        .collect();
    superpose(&pairs).unwrap()
}

fn assert_equal_up_to_phase(got: &PureState, want: &PureState) {
    let overlap = inner_product(want, got).unwrap();
    assert!((overlap.norm() - 1.0).abs() < 1e-12, "overlap {overlap}");
    let phase = overlap / overlap.norm();
    for (k, amp) in got.iter() {
        assert!((amp - phase * want.amplitude(k.occupations())).norm() < 1e-12);
    }
    for (k, amp) in want.iter() {
        assert!((got.amplitude(k.occupations()) - phase * amp).norm() < 1e-12);
    }
}

fn random_qubit(stream: &mut RandomStream) -> QubitAmplitudes {
    let theta = stream.next_uniform() * PI / 2.0;
    let pa = stream.next_uniform() * 2.0 * PI;
    let pb = stream.next_uniform() * 2.0 * PI;
    QubitAmplitudes::new(
        Complex64::from_polar(theta.cos(), pa),
        Complex64::from_polar(theta.sin(), pb),
    )
    .unwrap()
}

fn random_params(stream: &mut RandomStream) -> BeamSplitterParams {
    BeamSplitterParams::from_angles(
        stream.next_uniform() * 2.0 * PI,
        stream.next_uniform() * 2.0 * PI,
    )
}

#[test]
fn bell_states_through_alice_element() {
    let h = FRAC_1_SQRT_2;
    let cases: [(PureState, PureState); 4] = [
        (
            combo(&[(h, &[1, 0]), (h, &[0, 1])]),
            combo(&[(1.0, &[0, 1])]),
        ),
        (
            combo(&[(h, &[1, 0]), (-h, &[0, 1])]),
            combo(&[(1.0, &[1, 0])]),
        ),
        (
            combo(&[(h, &[1, 1]), (h, &[0, 0])]),
            combo(&[(0.5, &[0, 2]), (-0.5, &[2, 0]), (h, &[0, 0])]),
        ),
        (
            combo(&[(h, &[1, 1]), (-h, &[0, 0])]),
            combo(&[(0.5, &[0, 2]), (-0.5, &[2, 0]), (-h, &[0, 0])]),
        ),
    ];
    for (input, expected) in cases {
        let out = apply_paper_element(&input, "A", "C").unwrap();
        assert_equal_up_to_phase(&out, &expected);
    }
}

/// Bob's state after each success event, rebuilt by post-selection on the
/// full Alice output.
#[test]
fn success_branches_carry_the_qubit() {
    let mut stream = RandomStream::new(17);
    for _ in 0..50 {
        let q = random_qubit(&mut stream);
        let out = apply_paper_element(&bell_input_state(&q).unwrap(), "A", "C")
            .unwrap()
            .relabel(&[("A", "E"), ("C", "F")])
            .unwrap();
        let event = |e, f| DetectionEvent::new([("E", e), ("F", f)]);

        let plus = post_select(&out, &event(0, 1)).unwrap();
        assert!((plus.probability - 0.25).abs() < 1e-12);
        let want = q.state_on("B").unwrap();
        assert!((fidelity(&plus.conditional.unwrap(), &want).unwrap() - 1.0).abs() < 1e-12);

        let minus = post_select(&out, &event(1, 0)).unwrap();
        assert!((minus.probability - 0.25).abs() < 1e-12);
        let flipped = QubitAmplitudes::new(q.a(), -q.b())
            .unwrap()
            .state_on("B")
            .unwrap();
        assert!((fidelity(&minus.conditional.unwrap(), &flipped).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sector_weights_match_closed_form() {
    let mut stream = RandomStream::new(3);
    for _ in 0..100 {
        let q = random_qubit(&mut stream);
        let w = bell_sector_weights(&bell_input_state(&q).unwrap()).unwrap();
        let want = BTreeMap::from([
            (BellSector::PsiPlus, 0.25),
            (BellSector::PsiMinus, 0.25),
            (BellSector::TwoPhoton, q.a().norm_sqr() / 2.0),
            (BellSector::Vacuum, q.b().norm_sqr() / 2.0),
        ]);
        for (sector, p) in want {
            assert!((w[&sector] - p).abs() < 1e-12, "{sector:?}");
        }

        let params = random_params(&mut stream);
        let w = bell_sector_weights(&entangled_input_state(params).unwrap()).unwrap();
        assert!((w[&BellSector::PsiPlus] - 0.25).abs() < 1e-12);
        assert!((w[&BellSector::PsiMinus] - 0.25).abs() < 1e-12);
        assert!((w[&BellSector::TwoPhoton] - params.t().norm_sqr() / 2.0).abs() < 1e-12);
        assert!((w[&BellSector::Vacuum] - params.r().norm_sqr() / 2.0).abs() < 1e-12);
    }
}

#[test]
fn every_success_has_unit_fidelity() {
    let mut stream = RandomStream::new(101);
    let (mut plus, mut minus) = (0, 0);
    for k in 0..200 {
        let q = random_qubit(&mut stream);
        let records = run_teleport_batch(k, 16, |s| teleport(&q, s)).unwrap();
        for rec in records.iter().filter(|r| r.outcome.is_success()) {
            assert!((rec.fidelity_to_target.unwrap() - 1.0).abs() < 1e-12);
            match rec.outcome.kind {
                OutcomeKind::PsiPlus => plus += 1,
                OutcomeKind::PsiMinus => {
                    assert!(rec.correction_applied);
                    minus += 1
                }
                OutcomeKind::Failure => unreachable!(),
            }
        }
    }
    assert!(plus > 0 && minus > 0);
}

#[test]
fn entangled_targets_verify() {
    let mut stream = RandomStream::new(202);
    let mut checked = 0;
    for k in 0..50 {
        let params = random_params(&mut stream);
        let records = run_teleport_batch(k, 12, |s| teleport_entangled(params, s)).unwrap();
        for rec in records.iter().filter(|r| r.outcome.is_success()) {
            let joint = rec.bob_state.as_ref().unwrap();
            assert!((verify_teleportation(joint, params).unwrap() - 1.0).abs() < 1e-12);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn orthogonal_partner_never_reaches_g() {
    let bd = ModeRegister::with_default_cutoff(["B", "D"]).unwrap();
    let mut stream = RandomStream::new(303);
    for _ in 0..50 {
        let params = random_params(&mut stream);
        let (t, r) = (params.t(), params.r());
        let partner = superpose(&[
            (r.conj(), &ket(&bd, &[1, 0])),
            (-t.conj(), &ket(&bd, &[0, 1])),
        ])
        .unwrap();
        assert!(verify_teleportation(&partner, params).unwrap() < 1e-24);

        let flipped = superpose(&[(t, &ket(&bd, &[1, 0])), (-r, &ket(&bd, &[0, 1]))]).unwrap();
        let leak = (t * t - r * r).norm_sqr();
        assert!((verify_teleportation(&flipped, params).unwrap() - leak).abs() < 1e-12);
    }
}

#[test]
fn skipping_the_correction_fails_verification_when_balanced() {
    let params = BeamSplitterParams::balanced();
    let records = run_teleport_batch(9, 200, |s| teleport_entangled(params, s)).unwrap();
    let mut seen = false;
    for rec in records
        .iter()
        .filter(|r| r.outcome.kind == OutcomeKind::PsiMinus)
    {
        let raw = rec.uncorrected_state().unwrap();
        assert!(verify_teleportation(&raw, params).unwrap() < 1e-24);
        seen = true;
    }
    assert!(seen);
}

#[test]
fn prepared_pair_has_preparation_coefficients() {
    let mut stream = RandomStream::new(404);
    for _ in 0..50 {
        let params = random_params(&mut stream);
        let s = prepare_entangled_target(params).unwrap();
        let pos = |l: &str| s.register().index_of(l).unwrap();
        let mut occ = [0u32; 2];
        occ[pos("C")] = 1;
        assert!((s.amplitude(&occ) - params.t()).norm() < 1e-12);
        occ = [0; 2];
        occ[pos("D")] = 1;
        assert!((s.amplitude(&occ) - params.r()).norm() < 1e-12);
    }
}

fn five_sigma(p: f64, n: f64) -> f64 {
    5.0 * (p * (1.0 - p) / n).sqrt()
}

#[test]
fn success_rate_is_one_half() {
    let n = 20_000;
    let q = QubitAmplitudes::new(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)).unwrap();
    let summary =
        TeleportSummary::from_records(&run_teleport_batch(1, n, |s| teleport(&q, s)).unwrap());
    let n = n as f64;
    assert!((summary.success_fraction - 0.5).abs() < five_sigma(0.5, n));
    for sector in BellSector::ALL {
        let f = summary.sector_fractions[sector.name()];
        assert!((f - 0.25).abs() < five_sigma(0.25, n), "{sector:?} {f}");
    }

    let params = BeamSplitterParams::from_angles(0.3, 1.1);
    let summary = TeleportSummary::from_records(
        &run_teleport_batch(2, n as u64, |s| teleport_entangled(params, s)).unwrap(),
    );
    assert!((summary.success_fraction - 0.5).abs() < five_sigma(0.5, n));
    assert!((summary.min_success_fidelity.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn batches_are_reproducible() {
    let q = QubitAmplitudes::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
    let a = run_teleport_batch(77, 300, |s| teleport(&q, s)).unwrap();
    let b = run_teleport_batch(77, 300, |s| teleport(&q, s)).unwrap();
    assert_eq!(a, b);
}
