//! Release acceptance gate.
//!
//! Each test checks one acceptance criterion at its stated tolerance and
//! prints a single `ACCEPTANCE <k> ...: PASS|FAIL` line. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines; the
//! assertions fire either way.

use std::fmt::Write as _;
use std::process::Command;
use std::time::{Duration, Instant};

use ddmetrics::{
    chi_quantum, filter, fit_power_law, generator_moments, bound_decohered,
    probability_decohered, scaling_scan, y_n, DecayModel, EnsembleConfig, NoiseSpectrum,
    ProbeState, Protocol, PulseSequence,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(number: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {number} ({name}): {verdict}  [{detail}]");
    assert!(pass, "acceptance criterion {number} ({name}) failed: {detail}");
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ddmetrics"))
}

/// Runs `scaling --preset <name>` and returns (fitted k, elapsed).
fn run_scaling_preset(dir: &std::path::Path, preset: &str) -> (f64, Duration) {
    let out_csv = dir.join(format!("{preset}.csv"));
    let started = Instant::now();
    let out = binary()
        .args(["scaling", "--preset", preset, "--out"])
        .arg(&out_csv)
        .output()
        .expect("failed to spawn the ddmetrics binary");
    let elapsed = started.elapsed();
    assert!(
        out.status.success(),
        "scaling --preset {preset} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("scaling summary is not valid JSON");
    let k = summary["k"].as_f64().expect("summary JSON lacks a numeric k");
    (k, elapsed)
}

#[test]
fn acceptance_1_dephasing_exponent_table() {
    let targets: &[(&str, f64)] = &[
        ("table1-lorentzian-ramsey", 3.0 / 4.0),
        ("table1-lorentzian-echo", 5.0 / 6.0),
        ("table1-lorentzian-cpmg2", 5.0 / 6.0),
        ("table1-gaussian-ramsey", 3.0 / 4.0),
        ("table1-gaussian-echo", 7.0 / 8.0),
        ("table1-gaussian-cpmg2", 11.0 / 12.0),
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for (preset, expected) in targets {
        let (k, elapsed) = run_scaling_preset(dir.path(), preset);
        let ok = (k - expected).abs() <= 0.02 && elapsed < Duration::from_secs(120);
        pass &= ok;
        let _ = write!(detail, "{preset}: k={k:.5} (target {expected:.5}, {elapsed:.2?}); ");
    }
    report(1, "exponent table, six noise/sequence presets", pass, detail.trim_end());
}

#[test]
fn acceptance_2_ohmic_small_tau_closed_form() {
    // chi_quantum(Ohmic hard cutoff, T = 0) against the leading small-tau
    // term alpha*N*(omega_d*tau)^6/(768 n^4) for even pulse counts.
    let alpha = 0.1;
    let omega_d = 1.0;
    let spectrum = NoiseSpectrum::OhmicCutoff { alpha, omega_d };
    let started = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for (tau, tol) in [(1e-2, 1e-2), (1e-3, 1e-4)] {
        let mut worst = 0.0f64;
        for n in [2u32, 4] {
            for n_qubits in [1u32, 5] {
                let seq = PulseSequence::new(n, tau).unwrap();
                let chi = chi_quantum(&spectrum, 0.0, &seq, n_qubits).unwrap().chi;
                let expected = alpha * f64::from(n_qubits) * (omega_d * tau).powi(6)
                    / (768.0 * f64::from(n).powi(4));
                worst = worst.max((chi / expected - 1.0).abs());
            }
        }
        pass &= worst <= tol;
        let _ = write!(detail, "omega_d*tau={tau:.0e}: worst rel err {worst:.2e} (tol {tol:.0e}); ");
    }
    pass &= started.elapsed() < Duration::from_secs(60);
    report(2, "quantum Ohmic T=0 small-tau closed form", pass, detail.trim_end());
}

#[test]
fn acceptance_3_protected_scaling_regimes() {
    let targets: &[(&str, f64)] = &[
        ("ohmic-T0-n1", 7.0 / 8.0),
        ("ohmic-T0-n2", 11.0 / 12.0),
        ("sql-baseline", 1.0 / 2.0),
    ];
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for (preset, expected) in targets {
        let (k, _) = run_scaling_preset(dir.path(), preset);
        pass &= (k - expected).abs() <= 0.02;
        let _ = write!(detail, "{preset}: k={k:.5} (target {expected:.5}); ");
    }
    let elapsed = started.elapsed();
    pass &= elapsed < Duration::from_secs(120);
    let _ = write!(detail, "total {elapsed:.2?}");
    report(3, "echo, CPMG-2 and SQL scaling regimes", pass, &detail);
}

#[test]
fn acceptance_4_synthetic_power_law_exponents() {
    let template =
        EnsembleConfig { n_qubits: 1, delta: 1.0, total_time: 1e3, gamma: None };
    let n_list: Vec<u32> = (1..=10).map(|e| 1u32 << e).collect();
    let started = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for v in [2.0f64, 3.0, 4.0, 6.0] {
        let model = DecayModel::SyntheticPowerLaw { a: 1.0, v };
        let fit = scaling_scan(&template, Protocol::Ghz, &model, 1, &n_list, None).unwrap();
        let expected = (2.0 * v - 1.0) / (2.0 * v);
        pass &= (fit.k - expected).abs() <= 0.01;
        let _ = write!(detail, "v={v}: k={:.6} (target {expected:.6}); ", fit.k);
    }
    pass &= started.elapsed() < Duration::from_secs(60);
    report(4, "synthetic chi = a N tau^v exponent identity", pass, detail.trim_end());
}

#[test]
fn acceptance_5_mc_matches_quadrature() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("mc.csv");

    // The shipped preset must carry the full trial budget.
    let cfg = binary()
        .args(["mc-validate", "--preset", "mc-default", "--print-config"])
        .output()
        .unwrap();
    assert!(cfg.status.success());
    let cfg_text = String::from_utf8_lossy(&cfg.stdout).into_owned();
    assert!(cfg_text.contains("trials = 100000"), "mc-default must request 1e5 trials");

    let started = Instant::now();
    let out = binary()
        .args(["mc-validate", "--preset", "mc-default", "--out"])
        .arg(&out_csv)
        .output()
        .unwrap();
    let elapsed = started.elapsed();
    let csv = std::fs::read_to_string(&out_csv).expect("mc-validate wrote no CSV");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    let passed = rows.iter().filter(|r| r.ends_with(",true")).count();
    let pass = out.status.success()
        && rows.len() == 32
        && passed == rows.len()
        && elapsed < Duration::from_secs(300);
    report(
        5,
        "Monte Carlo chi vs quadrature, 2 spectra x 4 sequences x 4 taus",
        pass,
        &format!("{passed}/{} cells within max(3 stderr, 5%), {elapsed:.2?}", rows.len()),
    );
}

/// Normalized random amplitude vector rendered as `index, re, im` CSV rows.
fn random_state_csv(n_qubits: u32, rng: &mut ChaCha8Rng) -> String {
    let size = 1usize << n_qubits;
    let raw: Vec<(f64, f64)> =
        (0..size).map(|_| (rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let norm = raw.iter().map(|(re, im)| re * re + im * im).sum::<f64>().sqrt();
    let mut text = String::from("index,re,im\n");
    for (i, (re, im)) in raw.iter().enumerate() {
        let _ = writeln!(text, "{i},{:.17e},{:.17e}", re / norm, im / norm);
    }
    text
}

#[test]
fn acceptance_6_state_identities_and_entangled_bound_slope() {
    let started = Instant::now();
    let mut pass = true;
    let mut detail = String::new();

    // Decohered GHZ outcome probability against the closed form
    // (1 + cos(N phi) exp(-2 N alpha tau^6))/2 on a 50x50 grid, for both
    // the closed-form GHZ representation and the generic dense one.
    let n_qubits = 6u32;
    let ghz = ProbeState::ghz(n_qubits).unwrap();
    let dense_csv = {
        let top = (1u64 << n_qubits) - 1;
        let w = 0.5f64.sqrt();
        format!("index,re,im\n0,{w:.17e},0\n{top},{w:.17e},0\n")
    };
    let dense = ProbeState::from_csv_str(n_qubits, &dense_csv).unwrap();
    let tau = 0.9f64;
    let nf = f64::from(n_qubits);
    let mut worst_p = 0.0f64;
    for i in 0..50 {
        let phi = -std::f64::consts::PI + f64::from(i) * (2.0 * std::f64::consts::PI / 49.0);
        for j in 0..50 {
            let alpha = f64::from(j) * (2.5 / 49.0) / tau.powi(6); // alpha*tau^6 spans [0, 2.5]
            let expected =
                0.5 + 0.5 * (nf * phi).cos() * (-2.0 * nf * alpha * tau.powi(6)).exp();
            for state in [&ghz, &dense] {
                let p = probability_decohered(state, phi, alpha, tau);
                worst_p = worst_p.max((p - expected).abs());
            }
        }
    }
    pass &= worst_p <= 1e-12;
    let _ = write!(detail, "GHZ probability worst |dev| {worst_p:.1e}; ");

    // Variance / pair-sum identity <dh^2> = 2 kappa on random states.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_m = 0.0f64;
    for n in 1..=10u32 {
        for _ in 0..100 {
            let state = ProbeState::from_csv_str(n, &random_state_csv(n, &mut rng)).unwrap();
            let m = generator_moments(&state);
            let var = m.second - m.mean * m.mean;
            worst_m = worst_m.max((var - 2.0 * m.kappa).abs());
        }
    }
    pass &= worst_m <= 1e-10;
    let _ = write!(detail, "moment identity worst |dev| {worst_m:.1e}; ");

    // Entangled-bound scaling: tau = 0.1 (alpha N)^(-1/6) keeps the damping
    // term a fixed fraction of the numerator, so the bound falls as N^(-11/12).
    let alpha = 0.1;
    let total_time = 1e3;
    let ns: Vec<f64> = (1..=10).map(|e| f64::from(1u32 << e)).collect();
    let bounds: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let state = ProbeState::ghz(n as u32).unwrap();
            let tau = 0.1 * (alpha * n).powf(-1.0 / 6.0);
            bound_decohered(&state, tau, total_time / tau, alpha, 0.1).unwrap()
        })
        .collect();
    let slope = fit_power_law(&ns, &bounds).unwrap().exponent;
    pass &= (slope + 11.0 / 12.0).abs() <= 0.02;
    let _ = write!(detail, "bound slope {slope:.5} (target -11/12)");

    pass &= started.elapsed() < Duration::from_secs(60);
    report(6, "probe-state identities and entangled bound slope", pass, &detail);
}

#[test]
fn acceptance_7_filter_identities() {
    let started = Instant::now();
    let mut pass = true;

    // F_n(z) = |y_n(z)|^2 across the grid, F_n(0) = 0 exactly.
    let mut worst_id = 0.0f64;
    for n in 1..=16u32 {
        assert_eq!(filter(0.0, n).value, 0.0, "F_{n}(0) must vanish exactly");
        for j in 1..=1000 {
            let z = f64::from(j) * (4.0 * std::f64::consts::PI / 1000.0);
            let f = filter(z, n).value;
            let y2 = y_n(z, n).norm_sqr();
            worst_id = worst_id.max((f - y2).abs() / y2.max(1.0));
        }
    }
    pass &= worst_id <= 1e-9;

    // Leading small-z behavior: z^2 for the free decay, z^4/(16 n^4) for odd
    // pulse counts, z^6/(64 n^4) for even ones, all to 0.1%.
    let mut worst_sz = 0.0f64;
    for z in [1e-2f64, 1e-3] {
        let ramsey = filter(z, 0).value / (z * z);
        worst_sz = worst_sz.max((ramsey - 1.0).abs());
        for n in 1..=16u32 {
            let n4 = f64::from(n).powi(4);
            let law = if n % 2 == 1 { z.powi(4) / (16.0 * n4) } else { z.powi(6) / (64.0 * n4) };
            worst_sz = worst_sz.max((filter(z, n).value / law - 1.0).abs());
        }
    }
    pass &= worst_sz <= 1e-3;
    pass &= started.elapsed() < Duration::from_secs(60);
    report(
        7,
        "filter identity F_n = |y_n|^2 and small-z laws",
        pass,
        &format!("identity worst rel dev {worst_id:.1e}, small-z worst rel dev {worst_sz:.1e}"),
    );
}
