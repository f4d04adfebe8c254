use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ehcr_core::rates::s1_secondary_rate;
use ehcr_core::{sf1_secondary_rate, AccessPolicy, Preset, Traffic};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_ehcr");

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(BIN)
        .arg(command)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn num(row: &[String], header: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

fn policy_of(row: &[String], header: &[String]) -> AccessPolicy {
    AccessPolicy {
        p_s: num(row, header, "p_s"),
        p_t: num(row, header, "p_t"),
        p_f: num(row, header, "p_f"),
        p_b: num(row, header, "p_b"),
        p_r: num(row, header, "p_r"),
    }
}

const REGION: &str =
    "probs.preset = \"fig3\"\nregion.curves = [\"S\", \"Sf\"]\nsweep.step = 0.05\n";

#[test]
fn region_feedback_dominates_and_is_monotone() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), REGION);
    let o = run("region", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, plain) = read_rows(&dir.path().join("region_S.csv"));
    let (_, fb) = read_rows(&dir.path().join("region_Sf.csv"));
    assert_eq!(h.len(), 13);
    assert_eq!(plain.len(), fb.len());
    let mut prev = f64::INFINITY;
    for (a, b) in plain.iter().zip(&fb) {
        let (sa, sb) = (num(a, &h, "lambda_s_max"), num(b, &h, "lambda_s_max"));
        assert!(sb >= sa - 1e-9, "{a:?} vs {b:?}");
        assert!(sb <= prev + 1e-9);
        prev = sb;
    }
}

#[test]
fn emitted_policies_reproduce_their_rates() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), REGION);
    assert_eq!(code(&run("region", &cfg, dir.path(), &[])), 0);
    let probs = Preset::Fig3.probs();
    let base = Preset::Fig3.traffic();
    let mut checked = 0;
    for file in ["region_S.csv", "region_Sf.csv"] {
        let (h, rows) = read_rows(&dir.path().join(file));
        for row in &rows {
            let traffic = Traffic {
                lambda_p: num(row, &h, "lambda_p"),
                ..base
            };
            let policy = policy_of(row, &h);
            let mu_s = match row[2].as_str() {
                "S1" => s1_secondary_rate(&policy, &probs, &traffic).unwrap(),
                "S1f" => sf1_secondary_rate(&policy, &probs, &traffic).unwrap(),
                _ => continue,
            };
            assert!(
                (mu_s - num(row, &h, "mu_s")).abs() < 1e-9,
                "{file}: {row:?} gives {mu_s}"
            );
            checked += 1;
        }
    }
    assert!(checked > 10);
}

#[test]
fn csv_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), REGION);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&run("region", &cfg, &a, &[])), 0);
    let o = Command::new(BIN)
        .args(["region", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&b)
        .env("EHCR_WORKERS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    for f in ["region_S.csv", "region_Sf.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn simulation_is_reproducible_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "probs.preset = \"fig4\"\ntraffic.lambda_p = 0.2\ntraffic.lambda_s = 0.1\n\
         policy.p_s = 0.5\npolicy.p_t = 0.5\npolicy.p_f = 0.5\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["--seed", "7", "--slots", "40000"];
    assert_eq!(code(&run("simulate", &cfg, &a, &args)), 0);
    assert_eq!(code(&run("simulate", &cfg, &b, &args)), 0);
    let csv = fs::read_to_string(a.join("simulate.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(b.join("simulate.csv")).unwrap());
    let (h, rows) = read_rows(&a.join("simulate.csv"));
    assert_eq!(rows.len(), 1);
    let mu_p = num(&rows[0], &h, "mu_p");
    assert!(mu_p > 0.2 && mu_p <= 1.0, "{mu_p}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("simulate.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["seed"], 7);
    assert_eq!(json["config"]["num_slots"], 40000);
}

#[test]
fn tighter_delay_bound_gives_smaller_region() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "probs.preset = \"fig8\"\ndelay.d = [2.0, 4.0]\nsweep.step = 0.1\n",
    );
    let o = run("delay", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for sys in ["S", "Sf"] {
        let (h, tight) = read_rows(&dir.path().join(format!("delay_{sys}_D2.csv")));
        let (_, loose) = read_rows(&dir.path().join(format!("delay_{sys}_D4.csv")));
        for t in &tight {
            let lp = num(t, &h, "lambda_p");
            let l = loose
                .iter()
                .find(|r| (num(r, &h, "lambda_p") - lp).abs() < 1e-12)
                .expect("looser bound covers every tight point");
            assert!(num(t, &h, "lambda_s_max") <= num(l, &h, "lambda_s_max") + 1e-9);
            assert!(num(t, &h, "delay") <= 2.0 + 1e-6);
        }
    }
}

#[test]
fn bad_config_exits_with_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "probs.preset = \"fig4\"\npolicy.p_t = 1.3\n");
    let o = run("rates", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 2);
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["key"], "policy.p_t");
    assert_eq!(err["line"], 2);

    let cfg = write_config(
        dir.path(),
        "probs.preset = \"fig4\"\n[traffic]\nlambda_x = 0.1\n",
    );
    assert_eq!(code(&run("rates", &cfg, dir.path(), &[])), 2);

    let missing = dir.path().join("nope.toml");
    assert_eq!(code(&run("rates", &missing, dir.path(), &[])), 2);
}

#[test]
fn unstable_primary_exits_with_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "probs.preset = \"fig4\"\ntraffic.lambda_p = 0.75\n",
    );
    let o = run("optimize", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "probs.preset = \"fig3\"\nvalidate.criteria = [1, 3]\n",
    );
    let o = run("validate", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = String::from_utf8_lossy(&o.stdout);
    assert!(report.lines().filter(|l| l.starts_with("[PASS]")).count() == 2);

    let cfg = write_config(
        dir.path(),
        "probs.preset = \"fig3\"\nvalidate.criteria = [10]\n",
    );
    let o = run("validate", &cfg, dir.path(), &[]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("validate.json").exists());
}

#[test]
fn shipped_scenarios_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let out = TempDir::new().unwrap();
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let o = run("rates", &path, out.path(), &[]);
            assert_eq!(code(&o), 0, "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
