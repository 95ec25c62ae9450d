use std::path::Path;
use std::process::{Command, Output};

fn varexp(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varexp")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(table: &str, key: &str) -> f64 {
    let mut rdr = csv::Reader::from_reader(table.as_bytes());
    for rec in rdr.records() {
        let rec = rec.unwrap();
        if &rec[0] == key {
            return rec[1].parse().unwrap();
        }
    }
    panic!("{key} not in {table}")
}

const STUDY: &str = r#"
[experiment]
name = "maximal-power"

[space]
type = "uniform"
bounds = [[0.0, 1.0]]
resolutions = [[33], [65], [129]]

[exponent]
type = "constant"
p = 2.0

[[weight.nodes]]
at = [0.0]
factor = { type = "power_law", a = 0.3 }

[operator]
type = "maximal"

[corpus]
seed = 7
budget = 24
"#;

#[test]
fn verdict_statuses_set_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let pass = varexp(
        &["check", "--criterion", "theoremB", "--kind", "interval", "--n", "257", "--node", "0", "--power", "0.3"],
        dir.path(),
    );
    assert_eq!(code(&pass), 0, "{}", stdout(&pass));
    let verdicts = std::fs::read_to_string(dir.path().join("verdicts.csv")).unwrap();
    assert!(verdicts.lines().nth(1).unwrap().starts_with("theoremB,pass"), "{verdicts}");
    assert!(dir.path().join("verdicts.json").exists());

    let fail = varexp(&["check", "-c", "hardy_condition", "--kind", "graded", "--alpha", "0.6"], dir.path());
    assert_eq!(code(&fail), 1, "{}", stdout(&fail));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = varexp(&["check", "--criterion", "nope", "--kind", "interval"], dir.path());
    assert_eq!(code(&unknown), 64);
    let msg = String::from_utf8_lossy(&unknown.stderr);
    assert!(msg.contains("theorem_b") && msg.contains("hardy_condition"), "{msg}");

    assert_eq!(code(&varexp(&["space"], dir.path())), 64, "no space flags");
    assert_eq!(code(&varexp(&["space", "--kind"], dir.path())), 64, "flag without value");
    assert_eq!(code(&varexp(&["experiment"], dir.path())), 64, "experiment without config");
    assert_eq!(code(&varexp(&["space", "--kind", "interval", "--workers", "0"], dir.path())), 64);
    assert_eq!(code(&varexp(&["--help"], dir.path())), 0);
}

#[test]
fn describe_reports_unit_dimension_on_an_interval() {
    let dir = tempfile::tempdir().unwrap();
    let o = varexp(&["space", "--kind", "interval", "--n", "64", "--describe"], dir.path());
    assert_eq!(code(&o), 0);
    let table = std::fs::read_to_string(dir.path().join("describe.csv")).unwrap();
    for key in ["m_local", "M_local", "m_uniform"] {
        let v = value(&table, key);
        assert!((0.85..=1.15).contains(&v), "{key} = {v}");
    }
    assert!(value(&table, "doubling_constant") >= 1.0);
    for f in ["space.csv", "space.meta.json", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn circle_space_reports_a_carleson_witness() {
    let dir = tempfile::tempdir().unwrap();
    let o = varexp(&["space", "--kind", "curve", "--circle", "256"], dir.path());
    assert_eq!(code(&o), 0);
    let table = std::fs::read_to_string(dir.path().join("describe.csv")).unwrap();
    let c = value(&table, "carleson_C");
    assert!(c > 1.0 && c <= 4.0, "{c}");
    assert!(dir.path().join("curve.csv").exists());
}

#[test]
fn norms_of_constant_and_zero_functions() {
    let dir = tempfile::tempdir().unwrap();
    let o = varexp(&["norm", "--kind", "interval", "--n", "128", "--p", "3", "--constant", "1"], dir.path());
    assert_eq!(code(&o), 0);
    let v = value(&std::fs::read_to_string(dir.path().join("norm.csv")).unwrap(), "norm");
    assert!((v - 1.0).abs() < 1e-12, "{v}");

    let f = dir.path().join("f.csv");
    let body: String = (0..128).map(|i| format!("{i},{}\n", if i % 2 == 0 { 2.0 } else { 0.0 })).collect();
    std::fs::write(&f, format!("id,value\n{body}")).unwrap();
    let o = varexp(
        &["norm", "--kind", "interval", "--n", "128", "--p", "2", "--function", f.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let v = value(&std::fs::read_to_string(dir.path().join("norm.csv")).unwrap(), "norm");
    // even ids carry 2 and their trapezoid masses sum to exactly 1/2
    assert!((v - 2.0 * 0.5f64.sqrt()).abs() < 1e-9, "{v}");

    std::fs::write(&f, "value\n0\n0\n").unwrap();
    let o = varexp(&["norm", "--kind", "interval", "--n", "128", "--function", f.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 65, "misaligned function column");
    std::fs::write(&f, format!("value\n{}", "0\n".repeat(128))).unwrap();
    let o = varexp(&["norm", "--kind", "interval", "--n", "128", "--function", f.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(value(&std::fs::read_to_string(dir.path().join("norm.csv")).unwrap(), "norm"), 0.0);
}

#[test]
fn indices_of_power_laws_and_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = varexp(&["indices", "--weight-model", r#"{ type = "power_law", a = 0.5 }"#], dir.path());
    assert_eq!(code(&o), 0);
    let t = std::fs::read_to_string(dir.path().join("indices.csv")).unwrap();
    assert!(t.lines().nth(1).unwrap().starts_with("zero,0.5,0.5,true"), "{t}");

    let o = varexp(
        &["indices", "--weight-model", r#"{ type = "power_log", a = 0.2, b = 1 }"#, "--alpha", "0", "--beta", "1"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let t = std::fs::read_to_string(dir.path().join("indices.csv")).unwrap();
    let zero: Vec<f64> = t.lines().nth(1).unwrap().split(',').skip(1).take(2).map(|x| x.parse().unwrap()).collect();
    assert!(zero.iter().all(|m| (m - 0.2).abs() < 0.02), "{zero:?}");

    let bad_tag = varexp(&["indices", "--weight-model", r#"{ type = "nope" }"#], dir.path());
    assert_eq!(code(&bad_tag), 65);
    let bad_ell =
        varexp(&["indices", "--weight-model", r#"{ type = "power_law", a = 0.5 }"#, "--ell", "-1"], dir.path());
    assert_eq!(code(&bad_ell), 65);
}

#[test]
fn apply_writes_a_readable_function_table() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        varexp(&["apply", "--operator", "maximal", "--kind", "interval", "--n", "16", "--constant", "3"], dir.path());
    assert_eq!(code(&o), 0);
    let g = dir.path().join("function.csv");
    let o =
        varexp(&["norm", "--kind", "interval", "--n", "16", "--p", "2", "--function", g.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0);
    let v = value(&std::fs::read_to_string(dir.path().join("norm.csv")).unwrap(), "norm");
    assert!((v - 3.0).abs() < 1e-9, "{v}");

    let o = varexp(&["apply", "--operator", "cauchy_singular", "--kind", "interval", "--n", "16"], dir.path());
    assert_eq!(code(&o), 65, "singular integral needs a curve");
}

#[test]
fn experiments_are_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.toml");
    std::fs::write(&cfg, STUDY).unwrap();
    let run = |name: &str, format: &str| {
        let out = dir.path().join(name);
        let o = varexp(&["experiment", "--config", cfg.to_str().unwrap(), "--workers", "1", "--format", format], &out);
        assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
        out
    };
    for format in ["csv", "txt"] {
        let (a, b) = (run(&format!("a-{format}"), format), run(&format!("b-{format}"), format));
        let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 3, "{names:?}");
        for name in names.iter().filter(|n| *n != "manifest.json") {
            assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name:?}");
        }
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["seed"], 7);
        assert_eq!(manifest["config_text"], STUDY);
    }
    let study = std::fs::read_to_string(dir.path().join("a-csv/study.csv")).unwrap();
    assert!(study.contains("outcome,stable"), "{study}");
}

#[test]
fn config_digest_ignores_formatting() {
    let dir = tempfile::tempdir().unwrap();
    let digest = |text: &str, name: &str| {
        let cfg = dir.path().join(format!("{name}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let out = dir.path().join(name);
        let o = varexp(&["experiment", "--config", cfg.to_str().unwrap(), "--workers", "1"], &out);
        assert_eq!(code(&o), 0);
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        m["config_digest"].as_str().unwrap().to_string()
    };
    let reformatted = format!("# same study\n{}", STUDY.replace("budget = 24", "budget    =   24"));
    assert_eq!(digest(STUDY, "a"), digest(&reformatted, "b"));
}

#[test]
fn experiment_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    for (edit, what) in [
        (STUDY.replace("resolutions = [[33], [65], [129]]", "resolutions = [[33]]"), "single level"),
        (STUDY.replace("budget = 24", "budget = 0"), "empty corpus"),
    ] {
        std::fs::write(&cfg, edit).unwrap();
        let o = varexp(&["experiment", "--config", cfg.to_str().unwrap()], dir.path());
        assert_eq!(code(&o), 65, "{what}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let missing = dir.path().join("absent.toml");
    assert_eq!(code(&varexp(&["experiment", "--config", missing.to_str().unwrap()], dir.path())), 74);
}
