//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fs;
use std::panic;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fockline_cli::{run, ExperimentConfig, RunOptions};
use fockline_core::protocols::{
    analytic_margin, bell_correlation_form, bell_inequality_holds, generate_entangled,
    run_bell_experiment, run_teleport_batch, simulated_dd_probability, teleport,
    teleport_entangled, verify_teleportation, BellSector, OutcomeKind, QubitAmplitudes,
    TeleportSummary, BOUNDARY_TOLERANCE,
};
use fockline_core::{
    apply_beam_splitter, apply_composite_element, apply_paper_element, basis_state, fidelity,
    inner_product, outcome_distribution, superpose, BeamSplitterParams, Complex64, DetectionEvent,
    ModeRegister, PureState, RandomStream,
};

type Verdict = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Verdict);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ket(reg: &ModeRegister, occ: &[u32]) -> PureState {
    basis_state(reg, occ).unwrap()
}

fn combo(reg: &ModeRegister, terms: &[(Complex64, &[u32])]) -> PureState {
    let kets: Vec<PureState> = terms.iter().map(|(_, occ)| ket(reg, occ)).collect();
    let pairs: Vec<(Complex64, &PureState)> =
        terms.iter().zip(&kets).map(|((w, _), k)| (*w, k)).collect();
    superpose(&pairs).unwrap()
}

fn random_qubit(stream: &mut RandomStream) -> QubitAmplitudes {
    let theta = stream.next_uniform() * PI / 2.0;
    let (pa, pb) = (
        stream.next_uniform() * 2.0 * PI,
        stream.next_uniform() * 2.0 * PI,
    );
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

fn five_sigma(p: f64, n: f64) -> f64 {
    5.0 * (p * (1.0 - p) / n).sqrt()
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac1() -> Verdict {
    let reg = ModeRegister::with_default_cutoff(["A", "B"]).unwrap();
    let h = c(FRAC_1_SQRT_2, 0.0);
    let reference = combo(&reg, &[(h, &[1, 0]), (h, &[0, 1])]);
    let _ = generate_entangled();
    let start = Instant::now();
    let state = generate_entangled();
    let elapsed = start.elapsed();
    let f = fidelity(&state, &reference).unwrap();
    check(
        (f - 1.0).abs() <= 1e-12 && elapsed < Duration::from_millis(1),
        format!("fidelity {f:.15}, runtime {elapsed:?}"),
    )
}

fn ac2() -> Verdict {
    let reg = ModeRegister::with_default_cutoff(["A", "C"]).unwrap();
    let h = FRAC_1_SQRT_2;
    let w = |x: f64| c(x, 0.0);
    let table = [
        (
            combo(&reg, &[(w(h), &[1, 0]), (w(h), &[0, 1])]),
            combo(&reg, &[(w(1.0), &[0, 1])]),
        ),
        (
            combo(&reg, &[(w(h), &[1, 0]), (w(-h), &[0, 1])]),
            combo(&reg, &[(w(1.0), &[1, 0])]),
        ),
        (
            combo(&reg, &[(w(h), &[1, 1]), (w(h), &[0, 0])]),
            combo(
                &reg,
                &[(w(0.5), &[0, 2]), (w(-0.5), &[2, 0]), (w(h), &[0, 0])],
            ),
        ),
        (
            combo(&reg, &[(w(h), &[1, 1]), (w(-h), &[0, 0])]),
            combo(
                &reg,
                &[(w(0.5), &[0, 2]), (w(-0.5), &[2, 0]), (w(-h), &[0, 0])],
            ),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (input, expected) in &table {
        let out = apply_paper_element(input, "A", "C").unwrap();
        let overlap = inner_product(expected, &out).unwrap();
        let phase = overlap / overlap.norm();
        for (k, _) in out.iter().chain(expected.iter()) {
            let occ = k.occupations();
            worst = worst.max((out.amplitude(occ) - phase * expected.amplitude(occ)).norm());
        }
    }
    check(
        worst <= 1e-12,
        format!("max amplitude deviation {worst:.2e} over 4 Bell inputs"),
    )
}

fn ac3() -> Verdict {
    let n = 100_000u64;
    let q = QubitAmplitudes::new(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)).unwrap();
    let start = Instant::now();
    let records = run_teleport_batch(2024, n, |s| teleport(&q, s)).unwrap();
    let elapsed = start.elapsed();
    let s = TeleportSummary::from_records(&records);
    let nf = n as f64;
    let band = five_sigma(0.5, nf);
    let mut ok = (s.success_fraction - 0.5).abs() <= band && elapsed < Duration::from_secs(30);
    let mut sectors = Vec::new();
    for sector in BellSector::ALL {
        let f = s.sector_fractions[sector.name()];
        ok &= (f - 0.25).abs() <= five_sigma(0.25, nf);
        sectors.push(format!("{} {f:.4}", sector.name()));
    }
    check(
        ok,
        format!(
            "success {:.4} (band ±{band:.4}), {}, runtime {elapsed:.2?}",
            s.success_fraction,
            sectors.join(", ")
        ),
    )
}

fn ac4() -> Verdict {
    let mut stream = RandomStream::new(404);
    let (mut plus, mut minus, mut worst) = (0u64, 0u64, 0.0f64);
    for k in 0..200 {
        let q = random_qubit(&mut stream);
        for rec in run_teleport_batch(k, 32, |s| teleport(&q, s)).unwrap() {
            match rec.outcome.kind {
                OutcomeKind::PsiPlus => plus += 1,
                OutcomeKind::PsiMinus => minus += 1,
                OutcomeKind::Failure => continue,
            }
            worst = worst.max((rec.fidelity_to_target.unwrap() - 1.0).abs());
        }
    }
    check(
        worst <= 1e-12 && plus > 0 && minus > 0,
        format!("{plus} psi+ and {minus} corrected psi- branches, max |F-1| {worst:.2e}"),
    )
}

fn ac5() -> Verdict {
    let bd = ModeRegister::with_default_cutoff(["B", "D"]).unwrap();
    let mut stream = RandomStream::new(505);
    let (mut checked, mut worst_good, mut worst_bad) = (0u64, 0.0f64, 0.0f64);
    for k in 0..50 {
        let params = random_params(&mut stream);
        for rec in run_teleport_batch(k, 16, |s| teleport_entangled(params, s)).unwrap() {
            if let Some(joint) = &rec.bob_state {
                let p = verify_teleportation(joint, params).unwrap();
                worst_good = worst_good.max((p - 1.0).abs());
                checked += 1;
            }
        }
        let (t, r) = (params.t(), params.r());
        let flipped = combo(&bd, &[(r.conj(), &[1, 0]), (-t.conj(), &[0, 1])]);
        worst_bad = worst_bad.max(verify_teleportation(&flipped, params).unwrap());
    }
    let balanced = BeamSplitterParams::balanced();
    for rec in run_teleport_batch(99, 64, |s| teleport_entangled(balanced, s)).unwrap() {
        if rec.outcome.kind == OutcomeKind::PsiMinus {
            let raw = rec.uncorrected_state().unwrap();
            worst_bad = worst_bad.max(verify_teleportation(&raw, balanced).unwrap());
        }
    }
    check(
        checked > 0 && worst_good <= 1e-12 && worst_bad <= 1e-12,
        format!(
            "{checked} success branches, max |P-1| {worst_good:.2e}; sign-flipped max P {worst_bad:.2e}"
        ),
    )
}

fn grid() -> Vec<f64> {
    (0..37)
        .map(|k| f64::from(k) * 10.0_f64.to_radians())
        .collect()
}

fn ac6() -> Verdict {
    let mut worst: f64 = 0.0;
    for &a in &grid() {
        for &b in &grid() {
            let p = simulated_dd_probability(a, b).unwrap();
            worst = worst.max((p - ((a + b) / 2.0).sin().powi(2)).abs());
        }
    }
    let origin = simulated_dd_probability(0.0, 0.0).unwrap();
    check(
        worst <= 1e-12 && origin == 0.0,
        format!("37x37 grid max deviation {worst:.2e}, P(0,0) = {origin}"),
    )
}

fn ac7() -> Verdict {
    let n = 100_000u64;
    let nf = n as f64;
    let counts = run_bell_experiment(PI / 3.0, PI / 3.0, n, &RandomStream::new(77)).unwrap();
    let sigma = counts.margin_std_error();
    let mut ok = counts.margin + 5.0 * sigma < 0.0;
    for (k, p) in [(counts.n_a, 0.25), (counts.n_b, 0.25), (counts.n_ab, 0.75)] {
        ok &= (k as f64 / nf - p).abs() <= five_sigma(p, nf);
    }
    let at_pi = run_bell_experiment(PI, PI, n, &RandomStream::new(78)).unwrap();
    ok &= bell_inequality_holds(&at_pi);
    check(
        ok,
        format!(
            "fractions {:.4}/{:.4}/{:.4}, margin {:.4} ({:.1} sigma), at pi margin {:.4}",
            counts.n_a as f64 / nf,
            counts.n_b as f64 / nf,
            counts.n_ab as f64 / nf,
            counts.margin,
            counts.margin / sigma,
            at_pi.margin
        ),
    )
}

fn ac8() -> (Verdict, String) {
    let (mut points, mut mismatches, mut signed_mismatches) = (0, 0, 0);
    let mut first = None;
    for &a in &grid() {
        for &b in &grid() {
            let margin = analytic_margin(a, b);
            if margin.abs() <= BOUNDARY_TOLERANCE {
                continue;
            }
            points += 1;
            let holds = margin > 0.0;
            let form = bell_correlation_form(a, b);
            if form.satisfied != holds {
                mismatches += 1;
                first.get_or_insert((a.to_degrees().round(), b.to_degrees().round(), margin));
            }
            if form.signed_satisfied != holds {
                signed_mismatches += 1;
            }
        }
    }
    let detail = match first {
        None => format!("{points} non-boundary points agree"),
        Some((a, b, m)) => format!(
            "{mismatches}/{points} non-boundary points disagree; first at ({a}°, {b}°), margin {m:.4}"
        ),
    };
    let info = format!(
        "signed correlation form (no absolute value): {signed_mismatches}/{points} disagreements"
    );
    (check(mismatches == 0, detail), info)
}

fn fact(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn oracle_column(m: u32, n: u32, t: Complex64, r: Complex64) -> HashMap<(u32, u32), Complex64> {
    let ir = c(0.0, 1.0) * r;
    let mut poly = HashMap::from([((0u32, 0u32), c(1.0, 0.0))]);
    for k in 0..m + n {
        let (x, y) = if k < m { (ir, t) } else { (t, ir) };
        let mut next: HashMap<(u32, u32), Complex64> = HashMap::new();
        for (&(p, q), &coef) in &poly {
            *next.entry((p + 1, q)).or_default() += coef * x;
            *next.entry((p, q + 1)).or_default() += coef * y;
        }
        poly = next;
    }
    let norm = (fact(m) * fact(n)).sqrt();
    poly.into_iter()
        .map(|((p, q), coef)| ((p, q), coef * (fact(p) * fact(q)).sqrt() / norm))
        .collect()
}

fn random_state(stream: &mut RandomStream, reg: &ModeRegister) -> PureState {
    let cutoff = reg.cutoff();
    let entries: Vec<(Vec<u32>, Complex64)> = (0..6)
        .map(|_| {
            let mut left = cutoff;
            let occ = (0..reg.len())
                .map(|_| {
                    let n = (stream.next_uniform() * f64::from(left + 1)) as u32;
                    left -= n.min(left);
                    n.min(cutoff)
                })
                .collect();
            (
                occ,
                c(stream.next_uniform() - 0.5, stream.next_uniform() - 0.5),
            )
        })
        .collect();
    PureState::from_amplitudes(reg, entries).unwrap()
}

fn ac9() -> Verdict {
    let two = ModeRegister::new(["X", "Y"], 4).unwrap();
    let mut stream = RandomStream::new(909);
    let mut all_params = vec![
        BeamSplitterParams::balanced(),
        BeamSplitterParams::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap(),
    ];
    all_params.extend((0..20).map(|_| random_params(&mut stream)));
    let mut worst_entry: f64 = 0.0;
    for &params in &all_params {
        for total in 0..=4u32 {
            for m in 0..=total {
                let out =
                    apply_beam_splitter(&ket(&two, &[m, total - m]), "X", "Y", params).unwrap();
                let oracle = oracle_column(m, total - m, params.t(), params.r());
                for p in 0..=total {
                    let want = oracle.get(&(p, total - p)).copied().unwrap_or_default();
                    worst_entry = worst_entry.max((out.amplitude(&[p, total - p]) - want).norm());
                }
            }
        }
    }
    let many = ModeRegister::new(["M0", "M1", "M2"], 4).unwrap();
    let mut worst_norm: f64 = 0.0;
    for _ in 0..1000 {
        let s = random_state(&mut stream, &many);
        let params = random_params(&mut stream);
        let out = apply_beam_splitter(&s, "M0", "M2", params).unwrap();
        worst_norm = worst_norm.max((out.norm_sqr() - 1.0).abs());
        let out = apply_composite_element(&s, "M1", "M0", params).unwrap();
        worst_norm = worst_norm.max((out.norm_sqr() - 1.0).abs());
    }
    check(
        worst_entry <= 1e-10 && worst_norm < 1e-12,
        format!(
            "max entry deviation {worst_entry:.2e} over {} parameter sets, max norm deviation {worst_norm:.2e} over 1000 states",
            all_params.len()
        ),
    )
}

fn ac10() -> Verdict {
    let reg = ModeRegister::with_default_cutoff(["A", "B"]).unwrap();
    let out = apply_paper_element(&ket(&reg, &[1, 1]), "A", "B").unwrap();
    let dist = outcome_distribution(&out, &["A", "B"]).unwrap();
    let p = dist.probability(&DetectionEvent::new([("A", 1), ("B", 1)]));
    check(p < 1e-24, format!("P(1,1) = {p:e}"))
}

const AC11_CONFIGS: [&str; 5] = [
    "experiment = \"entangle\"\nseed = 1\ntrials = 500\n[output]\nformat = \"csv\"\n",
    "experiment = \"teleport\"\nseed = 2\ntrials = 2000\n[qubit]\na_re = 0.6\nb_re = 0.0\nb_im = 0.8\n",
    "experiment = \"teleport-entangled\"\nseed = 3\ntrials = 2000\n[bs]\nt_re = 0.8\nr_re = 0.6\n[output]\nformat = \"csv\"\n",
    "experiment = \"bell-scan\"\nseed = 4\ntrials = 2000\n[phases]\nphi_a = { start = \"deg:0\", step = \"deg:30\", count = 7 }\nphi_b = [\"deg:0\", \"deg:60\"]\npairing = \"grid\"\n",
    "experiment = \"mz-single\"\nseed = 5\ntrials = 2000\n[phases]\nphi_a = [1.0471975511965976]\nphi_b = [1.0471975511965976]\n",
];

fn run_config(path: &Path, out: &Path) -> Vec<(String, Vec<u8>)> {
    let cfg = ExperimentConfig::from_toml(&fs::read_to_string(path).unwrap()).unwrap();
    let plan = cfg.resolve().unwrap();
    let options = RunOptions {
        output_dir: Some(out.to_path_buf()),
        dump_state: true,
    };
    let report = run(&plan, &options).unwrap();
    report
        .files
        .iter()
        .map(|f| {
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read(f).unwrap())
        })
        .collect()
}

fn ac11() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut files = 0;
    for (k, text) in AC11_CONFIGS.iter().enumerate() {
        let first = dir.path().join(format!("first-{k}.toml"));
        let second = dir.path().join(format!("second-{k}.toml"));
        fs::write(&first, text).unwrap();
        fs::write(&second, text).unwrap();
        let a = run_config(&first, &dir.path().join(format!("a-{k}")));
        let b = run_config(&second, &dir.path().join(format!("b-{k}")));
        if a != b {
            let names: Vec<_> = a.iter().map(|(n, _)| n.as_str()).collect();
            return Err(format!("artifacts differ for {}", names.join(", ")));
        }
        files += a.len();
    }
    Ok(format!(
        "{files} artifacts byte-identical across {} experiment kinds",
        AC11_CONFIGS.len()
    ))
}

fn guarded(f: impl FnOnce() -> Verdict + panic::UnwindSafe) -> Verdict {
    panic::catch_unwind(f).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1", "entangled state generation", ac1),
        ("AC2", "Bell states through Alice's element", ac2),
        ("AC3", "teleportation success probability", ac3),
        ("AC4", "conditional fidelity", ac4),
        ("AC5", "entangled-pair teleportation and verification", ac5),
        ("AC6", "interferometer analytic agreement", ac6),
        ("AC7", "Bell violation at 60 degrees", ac7),
        ("AC9", "beam-splitter oracle equivalence", ac9),
        ("AC10", "two-photon coincidence cancellation", ac10),
        ("AC11", "byte-identical reproducibility", ac11),
    ];
    let mut results: Vec<(&str, &str, Verdict)> = criteria
        .iter()
        .map(|&(id, name, f)| (id, name, guarded(f)))
        .collect();
    let (ac8_verdict, ac8_info) = match panic::catch_unwind(ac8) {
        Ok(pair) => pair,
        Err(_) => (Err("panicked".into()), String::new()),
    };
    results.insert(7, ("AC8", "inequality form equivalence", ac8_verdict));

    let mut failed = 0;
    for (id, name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {detail}");
            }
        }
        if *id == "AC8" && !ac8_info.is_empty() {
            println!("       {ac8_info}");
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
