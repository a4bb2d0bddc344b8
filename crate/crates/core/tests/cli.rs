use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn momentopt(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentopt"))
        .env_remove("MOMENTOPT_OUT")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn final_theta(out: &Path) -> f64 {
    json(&out.join("summary.json"))["runs"][0]["final_theta"][0].as_f64().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const TABLE1: [&str; 11] = [
    "estimate", "--model", "ma1-calibrated", "--method", "gn", "--gamma", "0.1", "--theta0", "-0.6", "--iters", "99",
];

#[test]
fn gn_estimate_reaches_the_calibrated_root() {
    let dir = TempDir::new().unwrap();
    let o = momentopt(dir.path(), &TABLE1);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!((final_theta(dir.path()) + 0.339).abs() <= 1e-3);
    let trace = fs::read_to_string(dir.path().join("trace_gn_000.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "k,theta_1,Q,step_norm,grad_norm,status,global_accepted");
    assert_eq!(trace.lines().count(), 101);
}

#[test]
fn nr_estimate_runs_to_the_boundary() {
    let dir = TempDir::new().unwrap();
    let mut args = TABLE1;
    args[4] = "nr";
    let o = momentopt(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(final_theta(dir.path()) <= -0.99);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = [
        "compare", "--model", "ma1", "--sample-size", "200", "--ar-order", "4", "--sobol-starts", "6", "--start-seed", "3",
        "--global-step", "20", "--iters", "20",
    ];
    for d in [&a, &b] {
        let o = momentopt(d.path(), &args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 5);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn empty_start_list_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[starts]\npoints = []\n").unwrap();
    let o = momentopt(dir.path(), &["--config", cfg.to_str().unwrap(), "estimate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_typos_report_the_line() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[optimizer]\ngamma = 0.1\ngama = 0.2\n").unwrap();
    let o = momentopt(dir.path(), &["--config", cfg.to_str().unwrap(), "estimate", "--theta0", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("gama"), "{err}");
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[model]\nkind = \"ma1-calibrated\"\n\n[optimizer]\nmethod = \"nr\"\ngamma = 0.1\nmax_iter = 99\n\n[starts]\npoints = [[-0.6]]\n",
    )
    .unwrap();
    let o = momentopt(dir.path(), &["--config", cfg.to_str().unwrap(), "estimate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(final_theta(dir.path()) <= -0.99);
    let o = momentopt(dir.path(), &["--config", cfg.to_str().unwrap(), "estimate", "--method", "gn", "--iters", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = json(&dir.path().join("summary.json"));
    assert_eq!(s["optimizer"]["method"], "gn");
    assert_eq!(s["optimizer"]["max_iter"], 50);
    assert_eq!(s["optimizer"]["gamma"], 0.1);
    assert_eq!(s["runs"][0]["iterations"], 50);
}

#[test]
fn rank_grid_verdicts_follow_the_weighting() {
    let dir = TempDir::new().unwrap();
    let o = momentopt(dir.path(), &["rank-grid", "--model", "gaussian"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&dir.path().join("rank_grid.json"));
    assert_eq!(r["verdict"], "holds");
    assert!((r["report"]["min_value"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    let csv = fs::read_to_string(dir.path().join("rank_grid.csv")).unwrap();
    assert!(csv.starts_with("node1,node2,sigma_min\n"));
    assert_eq!(csv.lines().count(), 121 * 121 + 1);

    for (weighting, verdict) in [("identity", "holds"), ("optimal", "fails")] {
        let o = momentopt(dir.path(), &["rank-grid", "--model", "ma1", "--weighting", weighting]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(json(&dir.path().join("rank_grid.json"))["verdict"], verdict, "{weighting}");
        let csv = fs::read_to_string(dir.path().join("rank_grid.csv")).unwrap();
        assert!(csv.starts_with("theta1,theta2,sigma_min\n"));
    }
}

#[test]
fn single_node_rank_grid_is_the_point_value() {
    let dir = TempDir::new().unwrap();
    let o = momentopt(dir.path(), &["rank-grid", "--model", "ma1-calibrated", "--node", "0.25"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&dir.path().join("rank_grid.json"));
    let g = (1.0 - 0.25f64 * 0.25) / (1.0 + 0.25f64 * 0.25).powi(2);
    assert!((r["report"]["min_value"].as_f64().unwrap() - g).abs() <= 1e-12);
}

#[test]
fn convexity_map_writes_its_schema() {
    let dir = TempDir::new().unwrap();
    let o = momentopt(dir.path(), &["convexity-map", "--model", "gaussian", "--per-axis", "5", "--convention", "half"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("convexity_map.csv")).unwrap();
    assert!(csv.starts_with("theta_1,theta_2,lambda_min\n"));
    assert_eq!(csv.lines().count(), 26);
}

#[test]
fn replicate_reports_and_exits_zero_when_checks_pass() {
    let dir = TempDir::new().unwrap();
    for recipe in ["table1", "gaussian-hessian"] {
        let o = momentopt(dir.path(), &["replicate", recipe]);
        assert_eq!(o.status.code(), Some(0), "{recipe}: {}", stderr(&o));
        let csv = fs::read_to_string(dir.path().join(format!("replicate_{recipe}.csv"))).unwrap();
        assert!(csv.starts_with("check,relation,expected,actual,tol,pass\n"));
        assert!(!csv.contains(",false\n"));
    }
}

#[test]
fn unknown_recipe_lists_the_known_ones() {
    let dir = TempDir::new().unwrap();
    let o = momentopt(dir.path(), &["replicate", "table9"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for name in ["table1", "gaussian-hessian", "rank-grids", "gamma-sweep"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn sobol_dump_is_mapped_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = ["sobol-dump", "--dim", "2", "--n", "64", "--seed", "4", "--lower", "-1,0", "--upper", "1,10"];
    assert_eq!(momentopt(dir.path(), &args).status.code(), Some(0));
    let first = fs::read_to_string(dir.path().join("sobol.csv")).unwrap();
    assert_eq!(momentopt(dir.path(), &args).status.code(), Some(0));
    assert_eq!(first, fs::read_to_string(dir.path().join("sobol.csv")).unwrap());
    let mut lines = first.lines();
    assert_eq!(lines.next(), Some("index,theta_1,theta_2"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| (-1.0..1.0).contains(&r[0]) && (0.0..10.0).contains(&r[1])));
    let o = momentopt(dir.path(), &["sobol-dump", "--dim", "2", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("sobol.csv")).unwrap(), "index,u_1,u_2\n0,0.5,0.5\n1,0.75,0.25\n");
}

#[test]
fn output_dir_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_momentopt"))
        .env("MOMENTOPT_OUT", &target)
        .args(["sobol-dump", "--dim", "1", "--n", "4"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(target.join("sobol.csv").exists());
}
