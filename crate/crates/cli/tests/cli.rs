use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn homoglab(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_homoglab"));
    cmd.args(args);
    match out {
        Some(dir) => cmd.env("HOMOGLAB_OUT", dir),
        None => cmd.env_remove("HOMOGLAB_OUT"),
    };
    cmd.output().expect("binary runs")
}

fn run_config(text: &str, out: &Path) -> Output {
    let cfg = out.with_extension("toml");
    std::fs::write(&cfg, text).unwrap();
    homoglab(&["run", cfg.to_str().unwrap()], Some(out))
}

fn summary(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("summary.json")).unwrap()).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().expect("error line")).unwrap()
}

#[test]
fn harmonic_1d_reports_square_root_of_three() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("h");
    let out = run_config("scenario = \"harmonic-1d\"\n", &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&dir);
    let a = s["results"]["a_star"].as_f64().unwrap();
    assert!((a - 3f64.sqrt()).abs() < 1e-4, "a* = {a}");
    assert_eq!(s["config"]["cells_per_unit"], 512);
    assert!(dir.join("plot_corrector.dat").exists());
}

#[test]
fn counterexample_1d_branches_are_separated() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("c");
    let cfg = "scenario = \"counterexample-1d\"\nn_list = [1, 2]\nphases = [0.0]\n\n[source]\ntype = \"constant\"\nvalue = 1.0\n";
    let out = run_config(cfg, &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let d = summary(&dir)["results"]["cross_branch_distance"].as_f64().unwrap();
    assert!(d > 0.0, "cross-branch distance {d}");
}

#[test]
fn unknown_scenario_names_the_registry() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_config("scenario = \"harmonic-3d\"\n", &tmp.path().join("u"));
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["kind"], "ScenarioUnknown");
    let reg: Vec<&str> = err["registry"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(reg.contains(&"harmonic-1d") && reg.len() == 8);
    let out = homoglab(&["describe", "nope"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, cfg) in [
        // typo in an exponent
        "scenario = \"rate-sweep-1d\"\npp = 1.5\n",
        // field the scenario does not read
        "scenario = \"harmonic-1d\"\nphases = [0.0]\n",
        // out of range
        "scenario = \"harmonic-1d\"\ncells_per_unit = 0\n",
        "scenario = \"harmonic-1d\"\ncells_per_unit = \n",
    ]
    .iter()
    .enumerate()
    {
        let out = run_config(cfg, &tmp.path().join(format!("e{i}")));
        assert_eq!(out.status.code(), Some(2), "config {cfg:?}");
        let err = stderr_json(&out);
        assert!(err["kind"].is_string() && err["message"].is_string());
    }
}

#[test]
fn numerical_failures_exit_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    // a box too small for the R/2 re-solve to agree on the inner window
    let cfg = "scenario = \"defect-corrector\"\nhalf_width = 8.0\nr_inner = 2.0\n";
    let out = run_config(cfg, &tmp.path().join("n"));
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert_eq!(err["kind"], "TruncationUnstable");
    assert_eq!(err["module"], "corrector");
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "scenario = \"rate-sweep-1d\"\neps = [0.25, 0.125, 0.0625, 0.03125]\n";
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run_config(cfg, &a).status.success());
    let cfg_path = b.with_extension("toml");
    std::fs::write(&cfg_path, cfg).unwrap();
    let out = homoglab(&["--jobs", "1", "run", cfg_path.to_str().unwrap()], Some(&b));
    assert!(out.status.success());
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 3);
    for n in names {
        assert_eq!(std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn list_is_alphabetical_and_filters() {
    let rows = |args: &[&str]| -> Vec<String> {
        let out = homoglab(args, None);
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap().lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect()
    };
    let all = rows(&["list"]);
    let mut sorted = all.clone();
    sorted.sort();
    assert_eq!(all, sorted);
    for name in [
        "harmonic-1d",
        "laminate-2d",
        "gns-suite",
        "cesaro-extract",
        "defect-corrector",
        "rate-sweep-1d",
        "counterexample-1d",
        "counterexample-2d",
    ] {
        assert!(all.iter().any(|n| n == name), "{name}");
    }
    assert_eq!(rows(&["list", ""]), all);
    assert_eq!(rows(&["list", "counter"]), ["counterexample-1d", "counterexample-2d"]);
}

#[test]
fn describe_prints_a_runnable_default_config() {
    let out = homoglab(&["describe", "laminate-2d"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let toml_part = text.split("# default config\n").nth(1).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("l");
    let out = run_config(toml_part, &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = &summary(&dir)["results"]["a_star"];
    assert!((a["xx"].as_f64().unwrap() - 1.5).abs() < 1e-3);
    assert!((a["yy"].as_f64().unwrap() - 2.0).abs() < 1e-3);
}
