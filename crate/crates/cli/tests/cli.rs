use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn fpcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpcalc"))
        .args(args)
        .env_remove("FPCALC_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const RHO: &str = r#"{"type":"atomic","atoms":[[-1,0.5],[1,0.5]]}"#;

#[test]
fn free_poisson_density_from_a_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "mp.json", r#"{"type":"named","name":"free_poisson"}"#);
    let out = dir.path().join("d.csv");
    let o = fpcalc(&["density", "--spec", &spec, "--xmin", "0.01", "--xmax", "3.99", "--n", "512", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x,density\n"));
    let rows = csv(&text);
    assert_eq!(rows.len(), 512);
    for &(x, d) in &rows {
        let want = ((4.0 - x) / x).sqrt() / (2.0 * PI);
        assert!((d - want).abs() <= 1e-12 * (1.0 + want), "x={x}: {d} vs {want}");
    }
    let (x, d) = rows.iter().min_by(|a, b| (a.0 - 1.0).abs().total_cmp(&(b.0 - 1.0).abs())).unwrap();
    assert!((x - 1.0).abs() < 0.004);
    assert!((d - 0.2757).abs() < 2e-3);
}

#[test]
fn cauchy_subordinated_bernoulli_density() {
    let spec = format!(
        r#"{{"type":"expr","op":"add-subordinate","args":[{{"type":"named","name":"cauchy","params":{{"a":0,"b":2}}}},{RHO}]}}"#
    );
    let o = fpcalc(&["density", "--spec", &spec, "--xmin", "-5", "--xmax", "5", "--n", "101"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for (x, d) in csv(&stdout(&o)) {
        let want = 2.0 / (PI * (1.0 + x * x).powi(2));
        assert!((d - want).abs() <= 1e-6 * want, "x={x}: {d} vs {want}");
    }
}

#[test]
fn numbers_carry_17_significant_digits() {
    let o = fpcalc(&["density", "--spec", "free_poisson", "--xmin", "1", "--xmax", "2", "--n", "2"]);
    for line in stdout(&o).lines().skip(1) {
        for field in line.split(',') {
            let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.len(), 18, "{field}");
        }
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["conv", "--op", "add-free", "--mu", RHO, "--nu", "semicircle", "--emit", "density", "--xmin", "-3", "--xmax", "3", "--n", "64"];
    let a = fpcalc(&args);
    let b = fpcalc(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn invalid_specs_are_input_errors() {
    let neg = r#"{"type":"atomic","atoms":[[0,-0.5],[1,1.5]]}"#;
    assert_eq!(code(&fpcalc(&["density", "--spec", neg, "--xmin", "0", "--xmax", "1"])), 2);
    assert_eq!(code(&fpcalc(&["density", "--spec", "{not json", "--xmin", "0", "--xmax", "1"])), 2);
    assert_eq!(code(&fpcalc(&["density", "--spec", "no_such_law", "--xmin", "0", "--xmax", "1"])), 2);
    assert_eq!(code(&fpcalc(&["density", "--spec", "semicircle", "--xmin", "1", "--xmax", "0"])), 2);
    assert_eq!(code(&fpcalc(&["density", "--spec", "semicircle", "--xmin", "0", "--xmax", "1", "--n", "1"])), 2);
    assert_eq!(code(&fpcalc(&["conv", "--op", "add-classical", "--mu", RHO, "--nu", RHO])), 2);
    assert_eq!(code(&fpcalc(&["conv", "--op", "add-free", "--mu", RHO])), 2);
    assert_eq!(code(&fpcalc(&["frobnicate"])), 2);
}

#[test]
fn atoms_on_the_grid_are_numeric_errors() {
    let o = fpcalc(&["density", "--spec", RHO, "--xmin", "-2", "--xmax", "2", "--n", "5", "--method", "stieltjes"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("atom"));
}

#[test]
fn monotone_sum_of_cauchy_laws_is_cauchy() {
    let o = fpcalc(&["conv", "--op", "add-monotone", "--mu", "cauchy:a=1,b=2", "--nu", "cauchy:a=-0.5,b=1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["name"], "cauchy");
    assert_eq!(v["params"]["a"], 0.5);
    assert_eq!(v["params"]["b"], 3.0);
}

#[test]
fn free_sum_of_bernoullis_moments() {
    let o = fpcalc(&["conv", "--op", "add-free", "--mu", RHO, "--nu", RHO, "--emit", "moments"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ms: Vec<f64> = stdout(&o).trim().split(',').map(|s| s.parse().unwrap()).collect();
    for (m, want) in ms.iter().zip([0.0, 2.0, 0.0, 6.0]) {
        assert!((m - want).abs() < 1e-10, "{ms:?}");
    }
}

#[test]
fn subordination_by_delta_one_echoes_the_measure() {
    let mu = r#"{"type":"named","name":"beta_alpha","params":{"alpha":0.5}}"#;
    let o = fpcalc(&["subordinate", "--kind", "mult", "--sigma", "delta_1", "--mu", mu]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let got: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let want: serde_json::Value = serde_json::from_str(mu).unwrap();
    assert_eq!(got, want);
    assert_eq!(code(&fpcalc(&["subordinate", "--kind", "mult", "--mu", mu])), 2);
}

#[test]
fn check_suites_pass_and_fail() {
    assert_eq!(code(&fpcalc(&["check", "--suite", "belinschi-nica", "--tol", "1e-8"])), 0);
    let o = fpcalc(&["check", "--suite", "pde"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("suite pde: pass"));
    assert_eq!(code(&fpcalc(&["check", "--suite", "no-such-suite"])), 2);
    assert_eq!(code(&fpcalc(&["check", "--suite", "cauchy", "--tol", "1e-30"])), 1);
    assert_eq!(code(&fpcalc(&["check", "--suite", "cauchy", "--tol", "-1"])), 2);
}

#[test]
fn check_writes_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let o = fpcalc(&["check", "--suite", "cauchy", "--json", "--report", rep.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let printed: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(printed["suite"], "cauchy");
    assert_eq!(printed["results"], saved["results"]);
    let ids: Vec<&str> = printed["results"].as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn config_file_overrides_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let strict = write(dir.path(), "strict.toml", "identity_tol = 1e-30\n");
    assert_eq!(code(&fpcalc(&["--config", &strict, "check", "--suite", "homomorphism"])), 1);
    let loose = write(dir.path(), "loose.toml", "identity_tol = 1e-6\nmass_tol = 1e-2\n");
    assert_eq!(code(&fpcalc(&["--config", &loose, "check", "--suite", "homomorphism"])), 0);
    let bad = write(dir.path(), "bad.toml", "no_such_field = 1\n");
    assert_eq!(code(&fpcalc(&["--config", &bad, "check", "--suite", "cauchy"])), 2);
    let invalid = write(dir.path(), "inv.toml", "inversion_y_levels = [1e-3, 1e-2]\n");
    assert_eq!(code(&fpcalc(&["--config", &invalid, "check", "--suite", "cauchy"])), 2);
    assert_eq!(code(&fpcalc(&["--config", "/nonexistent.toml", "check", "--suite", "cauchy"])), 2);
}

#[test]
fn thread_cap_is_honoured() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_fpcalc"))
            .args(["conv", "--op", "add-free", "--mu", RHO, "--nu", "semicircle", "--emit", "moments"])
            .env("FPCALC_THREADS", v)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, run("4").stdout);
    assert_eq!(code(&run("zero")), 2);
    assert_eq!(code(&run("0")), 2);
}

#[test]
fn pde_residual_converges_at_second_order() {
    let o = fpcalc(&["pde-residual", "--family", "arcsine-additive", "--mu", RHO, "--t", "1", "--z", "0,3", "--h", "1e-3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("residual_h,residual_h2,ratio,order"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((row[2] - 4.0).abs() < 0.4, "{row:?}");
    assert!((1.7..=2.3).contains(&row[3]));
}

#[test]
fn cauchy_pde_residual_vanishes() {
    let o = fpcalc(&["pde-residual", "--family", "cauchy-additive", "--a", "0.5", "--b", "2", "--mu", RHO, "--t", "0.7", "--z", "0.3,1.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let row: Vec<f64> = stdout(&o).lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!(row[0] < 1e-9, "{row:?}");
}

#[test]
fn pde_residual_input_errors() {
    assert_eq!(code(&fpcalc(&["pde-residual", "--family", "heat", "--mu", RHO, "--t", "1", "--z", "0,3"])), 2);
    assert_eq!(code(&fpcalc(&["pde-residual", "--family", "beta", "--mu", RHO, "--t", "1", "--z", "3"])), 2);
    assert_eq!(code(&fpcalc(&["pde-residual", "--family", "beta", "--mu", "free_poisson", "--t", "1", "--z", "-1,0", "--a", "1"])), 2);
}
