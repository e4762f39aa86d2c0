use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use twoproc::bitlinalg::{BitVector, MatrixFamily};
use twoproc::extractor::ip_extract;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoproc"))
        .args(args)
        .env_remove("TWOPROC_GAP")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_family_field_writes_n_matrices() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f.json");
    let res = run(&["gen-family", "--n", "8", "--m", "8", "--r", "0", "--out", path_str(&out)]);
    assert_eq!(code(&res), 0);
    let family = MatrixFamily::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(family.matrices().len(), 8);
    assert_eq!((family.n(), family.r()), (8, 0));
    assert_eq!(json(&res)["matrices"], 8);
}

#[test]
fn gen_family_circulant() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.json");
    let res = run(&["gen-family", "--n", "5", "--m", "3", "--r", "1", "--out", path_str(&out)]);
    assert_eq!(code(&res), 0);
    let family = MatrixFamily::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((family.n(), family.m(), family.r()), (5, 3, 1));
    assert_eq!(family.min_rank_exhaustive().unwrap(), 4);
}

#[test]
fn gen_family_rejects_invalid_combinations() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bad.json");
    for args in [["4", "2", "1"], ["7", "3", "1"], ["8", "2", "2"], ["4", "5", "0"]] {
        let res = run(&["gen-family", "--n", args[0], "--m", args[1], "--r", args[2], "--out", path_str(&out)]);
        assert_eq!(code(&res), 2, "{args:?}");
        assert!(!res.stderr.is_empty());
        assert!(!out.exists());
    }
}

#[test]
fn extract_empty_inputs_zero_blocks() {
    let dir = TempDir::new().unwrap();
    let (x, y, out) = (dir.path().join("x"), dir.path().join("y"), dir.path().join("z"));
    fs::write(&x, []).unwrap();
    fs::write(&y, []).unwrap();
    let res = run(&["extract", "--ip", "16", "--x", path_str(&x), "--y", path_str(&y), "--blocks", "0", "--out", path_str(&out)]);
    assert_eq!(code(&res), 0);
    assert_eq!(fs::read(&out).unwrap(), Vec::<u8>::new());
}

#[test]
fn extract_matches_golden_ip_stream() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("z.bin");
    let res = run(&[
        "extract", "--ip", "8", "--x", &fixture("ip_x.bin"), "--y", &fixture("ip_y.bin"),
        "--blocks", "3", "--out", path_str(&out),
    ]);
    assert_eq!(code(&res), 0);
    let golden = fs::read(fixtures().join("ip_z.bin")).unwrap();
    assert_eq!(fs::read(&out).unwrap(), golden);
    // the golden file itself agrees with the scalar oracle
    let x = fs::read(fixtures().join("ip_x.bin")).unwrap();
    let y = fs::read(fixtures().join("ip_y.bin")).unwrap();
    for i in 0..3 {
        let bit = ip_extract(&BitVector::from_u64(x[i].into(), 8), &BitVector::from_u64(y[i].into(), 8)).unwrap();
        assert_eq!((golden[0] >> i) & 1 == 1, bit);
    }
}

#[test]
fn truncated_input_exits_3_without_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("z.bin");
    let res = run(&[
        "extract", "--ip", "8", "--x", &fixture("ip_x.bin"), "--y", &fixture("ip_y.bin"),
        "--blocks", "4", "--out", path_str(&out),
    ]);
    assert_eq!(code(&res), 3);
    assert!(String::from_utf8_lossy(&res.stderr).contains("block 3"));
    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0, "temp file left behind");
}

#[test]
fn failed_extract_keeps_previous_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("z.bin");
    fs::write(&out, b"previous").unwrap();
    let res = run(&[
        "extract", "--ip", "8", "--x", &fixture("ip_x.bin"), "--y", &fixture("ip_y.bin"),
        "--blocks", "9", "--out", path_str(&out),
    ]);
    assert_eq!(code(&res), 3);
    assert_eq!(fs::read(&out).unwrap(), b"previous");
}

#[test]
fn missing_input_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("z.bin");
    let res = run(&["extract", "--ip", "8", "--x", "/nonexistent/x", "--y", &fixture("ip_y.bin"), "--blocks", "1", "--out", path_str(&out)]);
    assert_eq!(code(&res), 3);
    assert!(!out.exists());
}

#[test]
fn strong_deor_blocks_are_m_plus_n_bits_and_mode_independent() {
    let dir = TempDir::new().unwrap();
    let fam = dir.path().join("f.json");
    assert_eq!(code(&run(&["gen-family", "--n", "11", "--m", "4", "--r", "1", "--out", path_str(&fam)])), 0);
    let blocks = 200usize;
    let bytes = (blocks * 11).div_ceil(8);
    let x: Vec<u8> = (0..bytes).map(|i| (i * 37 + 11) as u8).collect();
    let y: Vec<u8> = (0..bytes).map(|i| (i * 91 + 5) as u8).collect();
    let (xp, yp) = (dir.path().join("x"), dir.path().join("y"));
    fs::write(&xp, &x).unwrap();
    fs::write(&yp, &y).unwrap();
    let mut outputs = Vec::new();
    for extra in [None, Some("--sequential")] {
        let out = dir.path().join(format!("z{}", outputs.len()));
        let mut args = vec![
            "extract", "--family", path_str(&fam), "--x", path_str(&xp), "--y", path_str(&yp),
            "--blocks", "200", "--strong", "--out", path_str(&out),
        ];
        args.extend(extra);
        let res = run(&args);
        assert_eq!(code(&res), 0);
        assert_eq!(json(&res)["output_bits_per_block"], 15);
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0].len(), (blocks * 15).div_ceil(8));
    assert_eq!(outputs[0], outputs[1]);
}

fn hmin_of(file: &str, a: &str, b: &str) -> Value {
    let res = run(&["entropy", "--kind", "hmin", "--state", &fixture(file), "--a", a, "--b", b]);
    assert_eq!(code(&res), 0);
    json(&res)
}

#[test]
fn counterexample_fixtures_reproduce_reference() {
    for (file, a, b) in [("counterexample_eta.json", "X", "B"), ("counterexample_nu.json", "Y", "A")] {
        let v = hmin_of(file, a, b);
        let value = v["value_bits"].as_f64().unwrap();
        assert!((value - 0.45689).abs() <= 1e-3, "{file}: {value}");
        assert!(v["upper"].as_f64().unwrap() - v["lower"].as_f64().unwrap() <= 1e-8);
        assert!(v["lower"].as_f64().unwrap() > -(0.75f64).log2());
    }
}

#[test]
fn purified_counterexample_state_is_below_reference() {
    // hmin(A|B) of the purified state itself is not the classical quantity
    let v = hmin_of("counterexample_state.json", "A", "B");
    assert!(v["value_bits"].as_f64().unwrap() < 0.45689);
}

#[test]
fn trivial_fixtures() {
    let v = hmin_of("maximally_entangled.json", "A", "B");
    assert!((v["value_bits"].as_f64().unwrap() + 1.0).abs() <= 1e-8);
    let v = hmin_of("product_uniform.json", "X", "B");
    assert!((v["value_bits"].as_f64().unwrap() - 2.0).abs() <= 1e-8);
    for kind in ["h2", "hinf"] {
        let res = run(&["entropy", "--kind", kind, "--state", &fixture("product_uniform.json"), "--a", "X", "--b", "B"]);
        assert_eq!(code(&res), 0);
        assert!((json(&res)["value_bits"].as_f64().unwrap() - 2.0).abs() <= 1e-12);
    }
}

#[test]
fn entropy_output_fields() {
    let v = hmin_of("product_uniform.json", "X", "B");
    for key in ["command", "seed", "quantity", "value_bits", "lower", "upper", "gap", "iterations"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["quantity"], "hmin");
}

#[test]
fn pguess_and_k2() {
    let res = run(&["entropy", "--kind", "pguess", "--state", &fixture("product_uniform.json"), "--a", "X", "--b", "B"]);
    assert_eq!(code(&res), 0);
    assert!((json(&res)["value"].as_f64().unwrap() - 0.25).abs() <= 1e-9);
    let res = run(&[
        "entropy", "--kind", "k2", "--state", &fixture("maximally_entangled.json"),
        "--instrument", &fixture("qubit_measurement.json"),
    ]);
    assert_eq!(code(&res), 0);
    assert!(json(&res)["value_bits"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn solver_failure_exits_4_and_prints_bracket() {
    let res = Command::new(env!("CARGO_BIN_EXE_twoproc"))
        .args(["entropy", "--kind", "hmin", "--state", &fixture("counterexample_eta.json"), "--a", "X", "--b", "B"])
        .env("TWOPROC_GAP", "1e-300")
        .output()
        .unwrap();
    assert_eq!(code(&res), 4);
    let v = json(&res);
    assert_eq!(v["converged"], false);
    assert!(v["lower"].as_f64().unwrap() <= v["upper"].as_f64().unwrap());
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(code(&run(&["entropy", "--kind", "k2", "--state", &fixture("maximally_entangled.json")])), 2);
    assert_eq!(code(&run(&["verify", "--suite", "nonsense"])), 2);
    assert_eq!(code(&run(&["--gap", "0", "verify", "--suite", "tightness"])), 2);
    assert_eq!(code(&run(&["dira-rate", "--n", "100", "--h", "1", "--mu", "0.6", "--eps", "1e-6", "--eps-s", "1e-9", "--c", "1"])), 2);
}

#[test]
fn malformed_state_exits_3() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"systems\": []").unwrap();
    let res = run(&["entropy", "--kind", "hmin", "--state", path_str(&bad), "--a", "A", "--b", "B"]);
    assert_eq!(code(&res), 3);
}

#[test]
fn verify_suites_pass() {
    for (suite, count) in [
        ("tightness", "1"),
        ("counterexample", "1"),
        ("ip-bound", "12"),
        ("deor-bound", "6"),
        ("xor", "6"),
        ("chaining", "6"),
        ("alt-model", "6"),
    ] {
        let res = run(&["verify", "--suite", suite, "--seed", "3", "--count", count]);
        let v = json(&res);
        assert_eq!(code(&res), 0, "{suite}: {v}");
        assert_eq!(v["failed"], 0);
        assert_eq!(v["seed"], 3);
        assert!(!v["reports"].as_array().unwrap().is_empty());
    }
}

#[test]
fn tightness_reports_equality() {
    let v = json(&run(&["verify", "--suite", "tightness"]));
    for r in v["reports"].as_array().unwrap() {
        let (measured, bound) = (r["measured"].as_f64().unwrap(), r["bound"].as_f64().unwrap());
        assert!((measured - bound).abs() <= 1e-12);
    }
}

#[test]
fn verify_is_deterministic_per_seed() {
    let a = run(&["verify", "--suite", "ip-bound", "--seed", "9", "--count", "5"]);
    let b = run(&["--sequential", "verify", "--suite", "ip-bound", "--seed", "9", "--count", "5"]);
    assert_eq!(a.stdout, b.stdout);
    let seeds: Vec<u64> = json(&a)["reports"].as_array().unwrap().iter().map(|r| r["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, (9..14).collect::<Vec<_>>());
}

#[test]
fn dira_rate_reference_point() {
    let res = run(&["dira-rate", "--n", "1000000", "--h", "1.2", "--mu", "0.1", "--eps", "1e-6", "--eps-s", "1e-9", "--c", "10"]);
    assert_eq!(code(&res), 0);
    let v = json(&res);
    assert_eq!(v["m"], 326_946);
    assert_eq!(v["flag"], false);
    assert!(v["epsilon_check"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn dira_rate_flags_infeasible_parameters() {
    let res = run(&["dira-rate", "--n", "1000", "--h", "0.2", "--mu", "0.3", "--eps", "1e-6", "--eps-s", "1e-9", "--c", "1", "--privatization"]);
    assert_eq!(code(&res), 0);
    let v = json(&res);
    assert_eq!(v["m"], 0);
    assert_eq!(v["flag"], true);
    assert_eq!(v["privatization"], true);
}

#[test]
fn json_output_round_trips() {
    let res = run(&["--seed", "42", "verify", "--suite", "xor", "--count", "3"]);
    let v = json(&res);
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, again);
    assert_eq!(v["seed"], 42);
    assert_eq!(v["command"], "verify");
}

#[test]
fn plain_output_is_not_json() {
    let res = run(&["--plain", "verify", "--suite", "tightness"]);
    assert_eq!(code(&res), 0);
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(serde_json::from_str::<Value>(&text).is_err());
    assert!(text.contains("suite: tightness"));
    assert!(text.contains("measured"));
}

#[test]
fn fixtures_command_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let res = run(&["fixtures", "--out", path_str(dir.path())]);
    assert_eq!(code(&res), 0);
    for entry in fs::read_dir(dir.path()).unwrap() {
        let entry = entry.unwrap();
        let shipped = fs::read(fixtures().join(entry.file_name())).unwrap();
        assert_eq!(fs::read(entry.path()).unwrap(), shipped, "{:?}", entry.file_name());
    }
}
