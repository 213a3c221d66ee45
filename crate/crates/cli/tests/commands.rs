use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
output_dir = "from_config"

[solver]
alpha = 2
nu = "1/2"
reaction = true
grid = "uniform"
n = 512
x_min = 0.01
x_max = 100.0
t_end = 10.0
snapshot_times = [5.0, 10.0]

[solver.ic]
kind = "plateau_tanh"
x_c = 5.0
width = 2.0
"#;

fn ardsym(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ardsym"))
        .args(args)
        .current_dir(dir)
        .env_remove("ARDSYM_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn flow_reports_exponents_and_limit() {
    let d = tempfile::tempdir().unwrap();
    let o = ardsym(&["flow", "--eq", "fkpp", "--gen", "-1/2,-1,-1"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("limit: u_t = u_xx"), "{s}");
    let o = ardsym(&["flow", "--eq", "fkpp", "--gen", "1,1,1"], d.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn parse_errors_exit_with_input_code() {
    let d = tempfile::tempdir().unwrap();
    let o = ardsym(&["flow", "--eq", "u_t = u_xx + + u", "--gen", "1,2,0"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("1:14"), "{}", stderr(&o));
    let o = ardsym(&["predict"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let o = ardsym(&["--help"], d.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn predict_prints_exact_values() {
    let d = tempfile::tempdir().unwrap();
    let o = ardsym(&["predict", "--alpha", "2/3", "--nu", "3/2"], d.path());
    let s = stdout(&o);
    assert!(s.contains("delta = 2") && s.contains("c0_min = 8/27") && s.contains("omega0 = 9/4"), "{s}");
    let o = ardsym(&["predict", "--alpha", "2", "--delta", "0", "--c0", "1.5"], d.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn transform_and_reduce() {
    let d = tempfile::tempdir().unwrap();
    let o = ardsym(&["transform", "--eq", "ad:a=2/3,nu=3/2", "--map", "heat-scaled:a=2/3,nu=3/2"], d.path());
    assert_eq!(stdout(&o).trim(), "w_s = w_yy");
    let o = ardsym(&["reduce", "--eq", "heat", "--map", "gamma=1; p=2; q=-1; r=0; s=1"], d.path());
    let s = stdout(&o);
    let body = s.strip_prefix("0 = ").unwrap();
    assert!(!body.contains('s') && body.contains("w_yy"), "{s}");
}

#[test]
fn check_symmetry_report() {
    let d = tempfile::tempdir().unwrap();
    let o = ardsym(&["check-symmetry", "--eq", "ard:a=1,nu=1", "--field", "xi=d*x; tau=t; phi=-K*t*u", "--K", "1"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("verdict: asymptotic partial symmetry"), "{s}");
    assert!(s.contains("D2 [algebraic]"), "{s}");
    let o = ardsym(&["check-symmetry", "--eq", "fkpp", "--field", "xi=1; tau=0; phi=0"], d.path());
    assert!(stdout(&o).contains("verdict: exact symmetry"));
}

#[test]
fn unknown_config_keys_are_rejected_by_name() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), &SMALL.replace("n = 512", "n = 512\nresolution = 3"));
    let o = ardsym(&["simulate", "--config", &cfg], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("resolution"), "{}", stderr(&o));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn simulate_is_deterministic_and_honours_output_precedence() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), SMALL);
    let o = ardsym(&["simulate", "--config", &cfg, "--out", "a"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = ardsym(&["simulate", "--config", &cfg, "--out", "b"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let a = read_all(&d.path().join("a"));
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["diagnostics.csv", "front.csv", "snap_t10.csv", "snap_t5.csv"]);
    assert_eq!(a, read_all(&d.path().join("b")));
    assert!(a[3].1.starts_with(b"x,u\n"));
    assert!(a[0].1.starts_with(b"t,dt,mass,tail\n"));
    assert!(a[1].1.starts_with(b"t,Xh,lambda\n"));

    // environment beats the config file, --out beats the environment
    let env_out = d.path().join("env");
    let run = |extra: &[&str]| {
        let mut args = vec!["simulate", "--config", cfg.as_str()];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_ardsym"))
            .args(&args)
            .current_dir(d.path())
            .env("ARDSYM_OUTPUT_DIR", &env_out)
            .output()
            .unwrap()
    };
    assert_eq!(run(&[]).status.code(), Some(0));
    assert!(env_out.join("front.csv").exists());
    assert!(!d.path().join("from_config").exists());
    assert_eq!(run(&["--out", "flag"]).status.code(), Some(0));
    assert!(d.path().join("flag").join("front.csv").exists());
    let o = ardsym(&["simulate", "--config", &cfg], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("from_config").join("front.csv").exists());
}

#[test]
fn analyze_fits_an_existing_series() {
    let d = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,Xh,lambda\n");
    for i in 0..=100 {
        let t = 10f64.powf(1.0 + i as f64 / 50.0);
        csv.push_str(&format!("{},{},{}\n", t, 3.0 * t.powf(1.5), 0.2 * t.sqrt()));
    }
    std::fs::write(d.path().join("front.csv"), csv).unwrap();
    let o = ardsym(&["analyze", "--series", "front.csv", "--window", "10,1000", "--out", "fit"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("delta_hat = 0.5"), "{s}");
    assert!(d.path().join("fit").join("fit.txt").exists());
    let o = ardsym(&["analyze", "--series", "front.csv", "--window", "10,20"], d.path());
    assert_eq!(o.status.code(), Some(1));
}
