use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qscissor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qscissor")).args(args).output().expect("spawn qscissor")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "sobol.toml",
        "schema_version = 1\nexperiment = \"sobol\"\nseed = 11\nn_base = 64\nbootstrap = 20\ng = [2]\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = qscissor(&["sobol", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for file in ["sobol.csv", "sobol.meta.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let csv = fs::read_to_string(a.join("sobol.csv")).unwrap();
    assert!(csv.starts_with("g,variable,location,region,S,ci\n"));
    assert_eq!(csv.lines().count(), 1 + 14);
}

#[test]
fn seed_changes_stochastic_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.toml", "schema_version = 1\nn_base = 64\nbootstrap = 20\ng = 2\n");
    let run = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = qscissor(&["sobol", "--config", &cfg, "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out.join("sobol.csv")).unwrap()
    };
    assert_ne!(run("1", "x"), run("2", "y"));
}

#[test]
fn sobol_without_seed_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.toml", "schema_version = 1\n");
    let o = qscissor(&["sobol", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn out_of_range_tau_names_field_and_range() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "g.toml", "schema_version = 1\n\ntau = 1.2\n");
    let o = qscissor(&["gain-sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("g.toml:3:"), "{err}");
    assert!(err.contains("`tau` = 1.2") && err.contains("(0, 1]"), "{err}");
}

#[test]
fn unknown_experiment_lists_valid_names() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "h.toml", "schema_version = 1\n");
    let o = qscissor(&["teleport", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for name in ["scissor", "gain-sweep", "fringes", "negativity", "hom", "sobol"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn unknown_keys_are_rejected_with_all_violations() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "h.toml", "schema_version = 1\nexperiment = \"hom\"\nthetta = 1\nsigma = 0.1\n");
    let o = qscissor(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("h.toml:3: unknown key `thetta`"), "{err}");
    assert!(err.contains("h.toml:4: unknown key `sigma`"), "{err}");
}

#[test]
fn validate_accepts_a_good_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "f.toml", "schema_version = 1\nexperiment = \"fringes\"\nsigma = 0.2\nphi = \"0:6.2:0.1\"\n");
    let o = qscissor(&["validate", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ok"));
    assert!(!dir.path().join("fringes.csv").exists());
}

#[test]
fn deterministic_experiment_warns_about_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "h.toml", "schema_version = 1\noutput = \"dip\"\ntheta = [0, 0.5, 0.39269908169872414]\n");
    let o = qscissor(&["hom", "--config", &cfg, "--seed", "9", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("--seed is ignored"));
    let csv = fs::read_to_string(dir.path().join("dip.csv")).unwrap();
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(last[1].abs() < 1e-15 && last[2].abs() < 1e-12);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("dip.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"], 3);
    assert_eq!(meta["experiment"], "hom");
}

#[test]
fn scissor_run_reports_unit_fidelity() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.toml", "schema_version = 1\ninput = [0.6, 0.0, 0.8]\ng = 2\npatterns = [\"101\"]\n");
    let o = qscissor(&["scissor", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("scissor.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "101");
    assert!((row[7].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn io_failures_exit_with_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "h.toml", "schema_version = 1\n");
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = qscissor(&["hom", "--config", &cfg, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let missing = dir.path().join("missing.toml");
    let o = qscissor(&["hom", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let o = qscissor(&["validate", "--config", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
        seen += 1;
    }
    assert_eq!(seen, 6);
}
