use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use assurance_cli::report::Table;
use assurance_cli::{run, Command as Cmd, McFlags, RunConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_assurance"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    Table::from_csv("out", csv)
        .unwrap()
        .column(name)
        .unwrap()
        .into_iter()
        .map(Option::unwrap)
        .collect()
}

#[test]
fn minimal_power_config_defaults_to_greater() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.toml",
        "[power]\nn = 20\ntheta_0 = 0.15\ntheta_1 = 0.35\nsigsq = 0.30\nalpha = 0.05\n",
    );
    let out = bin().args(["power", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let power = column(&stdout(&out), "power");
    assert_eq!(power.len(), 1);
    assert!((power[0] - 0.495).abs() < 5e-4);

    let less = bin()
        .args(["power", "--config"])
        .arg(&cfg)
        .args(["-p", "alt=less"])
        .output()
        .unwrap();
    assert!(column(&stdout(&less), "power")[0] < 0.05);
}

#[test]
fn missing_sigsq_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.toml",
        "[power]\nn = 20\ntheta_0 = 0.15\ntheta_1 = 0.35\n",
    );
    let out = bin().args(["power", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty());
    assert!(stderr(&out).contains("`sigsq`"), "{}", stderr(&out));
}

#[test]
fn unknown_key_is_rejected() {
    let out = bin()
        .args([
            "power",
            "-p",
            "n=20",
            "-p",
            "theta_0=0.1",
            "-p",
            "theta_1=0.2",
            "-p",
            "sigsq=1",
            "-p",
            "sigma=1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`sigma`"));
}

#[test]
fn malformed_config_is_a_parse_error_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", "[power]\nn = 20\nsigsq = 0.3.1\n");
    let out = bin().args(["power", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("parse error") && err.contains("line 3"), "{err}");
}

#[test]
fn numerical_errors_exit_with_3() {
    let out = bin()
        .args([
            "power",
            "-p",
            "n=20",
            "-p",
            "theta_0=0.1",
            "-p",
            "theta_1=0.2",
            "-p",
            "sigsq=-1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("power"));
}

#[test]
fn betabin_defaults_to_5000_iterations() {
    let table: toml::Table = "n = [50, 60]\np1 = 0.3\np2 = 0.2\nalpha_1 = 1\nbeta_1 = 1\nalpha_2 = 1\nbeta_2 = 1"
        .parse()
        .unwrap();
    let bundle = run(&RunConfig::from_table(Cmd::Betabin, table, McFlags::default())).unwrap();
    assert_eq!(bundle.metadata.mc_iter, Some(5000));
    let se = bundle.tables[0].column("mc_se").unwrap();
    let a = bundle.tables[0].column("assurance").unwrap();
    for (s, a) in se.iter().zip(&a) {
        let (s, a) = (s.unwrap(), a.unwrap());
        assert!((s - (a * (1.0 - a) / 5000.0).sqrt()).abs() < 1e-9);
    }
}

#[test]
fn frequentist_limit_table() {
    let out = bin()
        .args(["assurance-closed", "--config"])
        .arg(configs().join("frequentist_limit.toml"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let a = column(&stdout(&out), "assurance");
    let expected = [0.2532578, 0.3285602, 0.3981637, 0.4623880, 0.5213579, 0.5752063];
    for (v, e) in a.iter().zip(expected) {
        assert!((v - e).abs() <= 1e-6, "{v} vs {e}");
    }
}

#[test]
fn curve_has_three_series() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let svg = dir.path().join("curve.svg");
    let out = bin()
        .args(["curve", "--config"])
        .arg(configs().join("curve.toml"))
        .arg("--out-csv")
        .arg(&csv)
        .arg("--out-svg")
        .arg(&svg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,power,assurance_exact,assurance_sim\n"));
    let power = column(&text, "power");
    let exact = column(&text, "assurance_exact");
    let sim = column(&text, "assurance_sim");
    for ((p, e), s) in power.iter().zip(&exact).zip(&sim) {
        assert!((p - e).abs() < 1e-6);
        assert!((s - e).abs() <= 0.03);
    }
    let plot = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(plot.matches("<polyline").count(), 3);
}

#[test]
fn gen_design_matrix() {
    let out = bin()
        .args(["gen-design", "-p", "group_sizes=[1,3,5,8]"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 17);
    let mut expected = Vec::new();
    for (g, size) in [1, 3, 5, 8].iter().enumerate() {
        for _ in 0..*size {
            let row: Vec<&str> = (0..4).map(|j| if j == g { "1" } else { "0" }).collect();
            expected.push(row.join(","));
        }
    }
    assert_eq!(rows, expected);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, workers) in ["1", "4"].iter().enumerate() {
        let csv = dir.path().join(format!("u{k}.csv"));
        let svg = dir.path().join(format!("u{k}.svg"));
        let out = bin()
            .args(["assurance-unbalanced", "--config"])
            .arg(configs().join("unbalanced.toml"))
            .args(["--iter", "500", "--workers", workers, "-p", "surface=true", "--out-csv"])
            .arg(&csv)
            .arg("--out-svg")
            .arg(&svg)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        let read = |p: PathBuf| std::fs::read(p).unwrap();
        outputs.push([
            read(csv.clone()),
            read(svg.clone()),
            read(dir.path().join(format!("u{k}_contour.csv"))),
            read(dir.path().join(format!("u{k}_contour.svg"))),
        ]);
    }
    assert_eq!(outputs[0], outputs[1]);
    let contour = String::from_utf8(outputs[0][3].clone()).unwrap();
    assert_eq!(contour.matches("class=\"cell\"").count(), 25);
}

#[test]
fn scalar_n_gives_no_plot() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let out = bin()
        .args(["power", "--config"])
        .arg(configs().join("power.toml"))
        .arg("--out-svg")
        .arg(&svg)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(!svg.exists());
    assert!(stderr(&out).contains("no plot"));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn json_report_carries_settings() {
    let out = bin()
        .args(["adcock", "--config"])
        .arg(configs().join("adcock.toml"))
        .args(["--iter", "200", "--seed", "7", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["mc_iter"], 200);
    assert_eq!(doc["command"], "adcock");
    let header = doc["tables"]["assurance"]["header"].as_array().unwrap();
    assert_eq!(header.last().unwrap(), "mc_se");
    assert!(doc["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn matrix_from_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("vd.csv"), "0\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "k.toml",
        "[assurance-sim]\nn = [50, 100]\nu = [1]\nc = 0.15\nmu_beta_d = [0.25]\nvbeta_d = \"vd.csv\"\nsigsq = 0.265\nmc_iter = 2000\n",
    );
    let out = bin().args(["assurance-sim", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let a = column(&stdout(&out), "assurance");
    assert_eq!(a.len(), 2);
    assert!(a[0] < a[1]);
}

#[test]
fn goal_pairs_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("goal.csv");
    let out = bin()
        .args(["goal", "--config"])
        .arg(configs().join("goal.toml"))
        .arg("--out-csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let pairs = std::fs::read_to_string(dir.path().join("goal_pairs.csv")).unwrap();
    assert!(pairs.starts_with("n,r_star,beta\n"));
    let r = column(&pairs, "r_star");
    assert!((r[0] - 0.9764596).abs() < 1e-6);
    let rates = column(&std::fs::read_to_string(&csv).unwrap(), "rate_correct_classification");
    assert!((rates[0] - 0.6914625).abs() < 1e-6);
}
