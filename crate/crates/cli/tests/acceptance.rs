//! Acceptance suite. Runs every criterion at its tolerance and prints one
//! PASS/FAIL line each; exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use volkov_fp::{evaluate, exit_code, LoadedConfig, Scenario, Summary};
use volkov_fp_core::clifford::{dirac_gamma, light_cone, lightcone_operators, SpinMatrix, METRIC};

const WORKERS: usize = 4;

struct Verdict {
    passed: bool,
    detail: String,
}

fn config(scenario: &str, potential: &str, params: &str) -> LoadedConfig {
    let text = format!(
        r#"{{"schema_version": 1, "scenario": "{scenario}", "seed": 20261019, "potential": {potential}, "params": {params}}}"#
    );
    LoadedConfig::from_bytes(text.as_bytes(), Path::new(".")).expect("acceptance configs are valid")
}

fn run(scenario: Scenario, potential: &str, params: &str) -> Result<Summary, String> {
    let cfg = config(scenario.name(), potential, params);
    evaluate(scenario, &cfg, WORKERS).map(|o| o.summary).map_err(|e| e.to_string())
}

fn describe(s: &Summary) -> String {
    s.assertions
        .iter()
        .map(|a| format!("{}={:.3e}{}", a.name, a.measured, if a.passed { "" } else { "(!)" }))
        .collect::<Vec<_>>()
        .join(" ")
}

fn from_summaries(results: Vec<Result<Summary, String>>) -> Verdict {
    let mut passed = true;
    let mut parts = Vec::new();
    for r in results {
        match r {
            Ok(s) => {
                passed &= s.passed;
                parts.push(describe(&s));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("error: {e}"));
            }
        }
    }
    Verdict { passed, detail: parts.join(" | ") }
}

const HARMONIC: &str = r#"{"kind": "harmonic", "lambda": 0.2, "omega": 1.0}"#;

fn algebra() -> Verdict {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let (gi, gj) = (dirac_gamma(i).unwrap(), dirac_gamma(j).unwrap());
            let expect = if i == j { SpinMatrix::identity().scale_real(2.0 * METRIC[i]) } else { SpinMatrix::zero() };
            worst = worst.max((gi * gj + gj * gi - expect).max_abs());
        }
    }
    let (np, nm, pp, pm) = lightcone_operators();
    let id = SpinMatrix::identity();
    let zero = SpinMatrix::zero();
    for (lhs, rhs) in [
        (np * np, zero),
        (nm * nm, zero),
        (nm * np, pm),
        (np * nm, pp),
        (pp + pm, id),
        (pm * pm, pm),
        (pp * pp, pp),
        (light_cone().gamma[0] * pm, np * pm),
    ] {
        worst = worst.max((lhs - rhs).max_abs());
    }
    Verdict { passed: worst <= 1e-14, detail: format!("max deviation {worst:e}") }
}

fn exact_solutions() -> Verdict {
    from_summaries(vec![
        run(Scenario::DiracResidual, r#"{"kind": "zero"}"#, r#"{"n_modes": 1000, "tolerance": 1e-10}"#),
        run(Scenario::DiracResidual, HARMONIC, r#"{"n_modes": 1000, "tolerance": 1e-10}"#),
        run(
            Scenario::DiracResidual,
            r#"{"kind": "pulse", "lambda": 0.5, "omega": 1.5, "sigma": 2.0}"#,
            r#"{"n_modes": 1000, "tolerance": 1e-8}"#,
        ),
    ])
}

fn null_invariance() -> Verdict {
    from_summaries(vec![run(
        Scenario::NullProductInvariance,
        HARMONIC,
        r#"{"n_packets": 50, "s_range": [-10, 10], "tolerance": 1e-10}"#,
    )])
}

fn mass_pairing() -> Verdict {
    from_summaries(vec![
        run(Scenario::MassPairing, r#"{"kind": "harmonic", "lambda": 0.5, "omega": 1.0}"#, r#"{"n_draws": 200}"#),
        run(Scenario::MassPairing, HARMONIC, r#"{"n_draws": 200}"#),
    ])
}

fn mass_oscillation() -> Verdict {
    from_summaries(vec![run(
        Scenario::MassOscillation,
        HARMONIC,
        r#"{"interval": [0.8, 1.2], "n_masses": 21, "n_u": 9, "n_k": 5, "tolerance": 1e-2, "null_ratio": 1e-3}"#,
    )])
}

fn projector_consistency() -> Verdict {
    from_summaries(vec![
        run(Scenario::FpKernelExport, HARMONIC, r#"{"n_random": 16, "tolerance": 1e-12}"#),
        run(Scenario::FpKernelExport, r#"{"kind": "pulse", "lambda": 0.5, "omega": 1.5, "sigma": 2.0}"#, r#"{"n_random": 8}"#),
    ])
}

fn sidebands() -> Verdict {
    let params = r#"{"k2": 0.3, "k3": 0.0, "u": -0.5, "m": 1.0, "n_max": 3, "amplitude_tolerance": 1e-4, "power_tolerance": 1e-10}"#;
    let mut v = from_summaries(vec![run(Scenario::Sidebands, HARMONIC, params)]);
    match run(Scenario::Sidebands, HARMONIC, params) {
        Ok(s) => {
            let v0 = s.metrics["v0"];
            let ok = (v0 + 0.555).abs() < 1e-12;
            v.passed &= ok;
            v.detail = format!("v0={v0} {}", v.detail);
        }
        Err(e) => {
            v.passed = false;
            v.detail = e;
        }
    }
    v
}

fn frequency_asymmetry() -> Verdict {
    from_summaries(vec![run(
        Scenario::WavefrontProbe,
        HARMONIC,
        r#"{"u": -0.5, "m": 1.0, "v_range": [5, 50], "min_order": 6, "plancherel_tolerance": 1e-6}"#,
    )])
}

fn decay_scan() -> Verdict {
    from_summaries(vec![
        run(Scenario::DecayScan, r#"{"kind": "zero"}"#, r#"{"s_values": [-5, 0, 5], "l_range": [20, 200]}"#),
        run(Scenario::DecayScan, HARMONIC, r#"{"s_values": [-5, 0, 5], "l_range": [20, 200]}"#),
    ])
}

fn binary_run(dir: &Path, scenario: &str, cfg: &Path, workers: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_volkov-fp"))
        .args([scenario, "--config"])
        .arg(cfg)
        .arg("--out")
        .arg(dir)
        .args(["--workers", workers])
        .output()
        .expect("binary runs")
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    out
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut bad = Vec::new();
    let mut files = 0;
    for scenario in Scenario::ALL {
        let name = scenario.name();
        let cfg = tmp.path().join(format!("{name}.json"));
        std::fs::write(
            &cfg,
            format!(r#"{{"schema_version": 1, "scenario": "{name}", "seed": 99, "potential": {HARMONIC}}}"#),
        )
        .unwrap();
        let mut runs = Vec::new();
        for (tag, workers) in [("a", "1"), ("b", "8"), ("c", "8")] {
            let dir = tmp.path().join(format!("{name}-{tag}"));
            let out = binary_run(&dir, name, &cfg, workers);
            if out.status.code() != Some(exit_code::PASS) {
                bad.push(format!("{name}: exit {:?}", out.status.code()));
            }
            runs.push(csv_files(&dir));
        }
        files += runs[0].len();
        if runs[0].is_empty() || runs[0] != runs[1] || runs[1] != runs[2] {
            bad.push(format!("{name}: CSV bytes differ"));
        }
    }
    Verdict {
        passed: bad.is_empty(),
        detail: if bad.is_empty() { format!("{files} CSV files identical at 1 and 8 workers") } else { bad.join("; ") },
    }
}

fn malformed_config() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"schema_version": 1, "potential": {"kind": "harmonic", "lambda": 0.2}}"#).unwrap();
    let dir = tmp.path().join("out");
    let out = binary_run(&dir, "sidebands", &cfg, "1");
    let code = out.status.code();
    let clean = !dir.exists();
    Verdict { passed: code == Some(exit_code::CONFIG) && clean, detail: format!("exit {code:?}, no outputs: {clean}") }
}

fn main() {
    type Check = fn() -> Verdict;
    let criteria: [(&str, &str, Check, u64); 11] = [
        ("1", "algebra suite", algebra, 1),
        ("2", "exact-solution residuals", exact_solutions, 30),
        ("3", "null scalar product s-invariance", null_invariance, 30),
        ("4", "two-mass pairing identity", mass_pairing, 10),
        ("5", "mass-oscillation identity", mass_oscillation, 600),
        ("6", "projector vs causal kernel", projector_consistency, 5),
        ("7", "harmonic sidebands", sidebands, 30),
        ("8", "positive-frequency decay and Plancherel", frequency_asymmetry, 60),
        ("9", "null-direction decay scan", decay_scan, 120),
        ("10", "determinism across worker counts", determinism, 600),
        ("-", "malformed config rejected", malformed_config, 30),
    ];
    let mut failures = 0;
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let ok = v.passed && in_time;
        if !ok {
            failures += 1;
        }
        println!(
            "{} [{id:>2}] {name:<42} {:>8.2}s (limit {limit}s)  {}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
