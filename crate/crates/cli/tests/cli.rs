use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TWO_CYCLE_PARAMS: [&str; 10] = ["--K", "20", "--A", "2", "--a", "0.004905", "--b", "-0.10891", "--d", "24.28"];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hollingiv")).args(args).output().expect("binary runs")
}

fn with_two_cycle_params(rest: &[&str]) -> Output {
    let mut v: Vec<&str> = TWO_CYCLE_PARAMS.to_vec();
    v.extend_from_slice(rest);
    run(&v)
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn two_cycle_params_count_two() {
    let v = json(&with_two_cycle_params(&["cycles"]));
    assert_eq!(v["result"]["count"], 2);
    assert_eq!(v["manifest"]["params"]["K"], 20.0);
}

#[test]
fn bad_b_exits_3_naming_b() {
    let out = run(&["--K", "20", "--A", "2", "--a", "0.2", "--b", "-1", "--d", "24.28", "equilibria"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("parameter b"), "{}", stderr(&out));
}

#[test]
fn unknown_keys_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"params": {"K": 20, "A": 2, "a": 0.004905, "b": -0.10891, "d": 24.28, "e": 1}, "command": "region"}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`e`"), "{}", stderr(&out));

    std::fs::write(&cfg, r#"{"params": {"K": 20, "A": 2, "a": 0.004905, "b": -0.10891, "d": 24.28}, "command": "cycles", "options": {"n_seeds": 5}}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n_seeds"), "{}", stderr(&out));
}

#[test]
fn flags_override_file_and_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"params": {"K": 20, "A": 2, "a": 0.004905, "b": -0.10891, "d": 30}, "command": "simulate", "options": {"x0": 11, "y0": 40, "t_end": 1}}"#,
    )
    .unwrap();
    let v = json(&run(&["--config", cfg.to_str().unwrap(), "--d", "24.28", "simulate", "--t-end", "0.5"]));
    let m = &v["manifest"];
    assert_eq!(m["params"]["d"], 24.28);
    assert_eq!(m["options"]["t_end"], 0.5);
    assert_eq!(m["options"]["x0"], 11.0);
    let ov: Vec<&str> = m["run"]["overrides"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert!(ov.contains(&"params.d") && ov.contains(&"options.t_end"), "{ov:?}");
}

#[test]
fn unwritable_output_exits_4() {
    let out = with_two_cycle_params(&["region", "-o", "/nonexistent/dir/out.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn missing_command_or_param_exits_2() {
    assert_eq!(run(&["--K", "1"]).status.code(), Some(2));
    assert_eq!(run(&["--K", "1", "--a", "1", "cycles"]).status.code(), Some(2));
}

#[test]
fn json_round_trip_is_bit_identical() {
    let out = with_two_cycle_params(&["hopf"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let v = json(&out);
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    serde::Serialize::serialize(&v, &mut ser).unwrap();
    let re: Value = serde_json::from_slice(&buf).unwrap();
    assert_eq!(re, v);
    for (a, b) in numbers(&text).iter().zip(numbers(&String::from_utf8(buf).unwrap())) {
        assert_eq!(a.parse::<f64>().unwrap().to_bits(), b.parse::<f64>().unwrap().to_bits());
    }
    assert!(text.contains("\"codim\": 0"));
}

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

fn numbers(s: &str) -> Vec<String> {
    s.split(|c: char| !(c.is_ascii_digit() || "+-.e".contains(c)))
        .filter(|t| t.contains('e') && t.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-'))
        .map(str::to_string)
        .collect()
}

#[test]
fn floats_have_17_significant_digits() {
    let v = with_two_cycle_params(&["region"]);
    let text = String::from_utf8(v.stdout).unwrap();
    let nums = numbers(&text);
    assert!(!nums.is_empty());
    for n in nums {
        let mant = n.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
        assert_eq!(mant.len(), 17, "{n}");
    }
}

#[test]
fn manifest_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.csv");
    let r = with_two_cycle_params(&["simulate", "--x0", "11", "--y0", "36", "--t-end", "2", "--format", "csv", "-o", out1.to_str().unwrap()]);
    assert!(r.status.success(), "{}", stderr(&r));
    let man = dir.path().join("a.csv.manifest.json");
    let out2 = dir.path().join("b.csv");
    let r = run(&["--config", man.to_str().unwrap(), "-o", out2.to_str().unwrap()]);
    assert!(r.status.success(), "{}", stderr(&r));
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn trajectory_csv_columns() {
    let out = with_two_cycle_params(&["simulate", "--x0", "11", "--y0", "40", "--t-end", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y"));
    assert_eq!(lines.next().unwrap().split(',').count(), 3);
}

fn sweep_labels(path: &Path) -> Vec<(f64, f64, String)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,A,region"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].to_string())
        })
        .collect()
}

#[test]
fn sweep_boundaries_follow_response_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let r = with_two_cycle_params(&["sweep", "--format", "csv", "--n-d", "41", "--n-allee", "21", "-o", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", stderr(&r));
    let cells = sweep_labels(&out);
    assert_eq!(cells.len(), 41 * 21);
    let (k, a, b) = (20.0f64, 0.004905f64, -0.10891f64);
    let p = |x: f64| x / (a * x * x + b * x + 1.0);
    let dm = 1.0 / (b + 2.0 * a.sqrt());
    for (d, allee, label) in &cells {
        if label.starts_with("Boundary") {
            continue;
        }
        if *d > dm * 1.001 {
            assert!(label == "V0_4" || label == "V0_3", "{d} {allee} {label}");
        }
        if *allee > 0.0 && *d < p(*allee) * 0.999 && *d < p(k) * 0.999 && *allee < 1.0 / a.sqrt() {
            assert!(label == "V0_1" || label == "Vbeta", "{d} {allee} {label}");
        }
        if *allee < 0.0 && *d < p(k) * 0.999 {
            assert_eq!(label, "Valpha");
        }
    }
}

#[test]
fn portrait_is_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.svg");
    let r = with_two_cycle_params(&["portrait", "--point", "11,40", "--t-end", "2", "-o", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", stderr(&r));
    let s = std::fs::read_to_string(&out).unwrap();
    assert!(s.starts_with("<?xml") && s.contains("version=\"1.1\"") && s.trim_end().ends_with("</svg>"));
    assert!(s.matches("stroke-dasharray=\"6,4\"").count() >= 1);
    assert!(dir.path().join("p.svg.manifest.json").exists());
}

#[test]
fn local_bifurcation_commands() {
    let v = json(&run(&["--a", "1", "--K", "1.2", "bt"]));
    assert!((v["result"]["bt"]["bt_point"][1].as_f64().unwrap() - 0.75).abs() < 1e-14);
    let v = json(&run(&["--a", "1", "--K", "1.2", "unfold"]));
    assert!(v["result"]["xi31_chain"].as_f64().unwrap() < 0.0);
    let v = json(&run(&["--a", "1", "--K", "0.5", "ns", "--at-b-ns"]));
    assert_eq!(v["result"]["outcome"]["Saddle"]["codim"], 3);
    let v = json(&run(&["--a", "0.00025573", "hopf3"]));
    assert!((v["result"]["hopf3"]["k_star"].as_f64().unwrap() - 71.755833116709).abs() < 1e-9);
}

#[test]
fn csv_rejected_for_json_only_commands() {
    assert_eq!(with_two_cycle_params(&["cycles", "--format", "csv"]).status.code(), Some(2));
}
