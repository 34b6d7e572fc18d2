use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn reparam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reparam")).args(args).output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn figure_eight_csv(dir: &Path, name: &str, n: usize) -> PathBuf {
    let mut s = String::from("t,v1,v2\n");
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        s.push_str(&format!("{t},{},{}\n", (2.0 * PI * t).cos(), (4.0 * PI * t).sin()));
    }
    let path = dir.join(name);
    fs::write(&path, s).unwrap();
    path
}

/// Rows of a CSV with a header, parsed as floats.
fn numeric_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn entries(dir: &Path) -> Vec<String> {
    match fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().file_name().into_string().unwrap()).collect(),
        Err(_) => Vec::new(),
    }
}

#[test]
fn builtin_curve_run_writes_all_artifacts() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = reparam(&[
        "reparam-curve", "--builtin", "--grid", "128", "--layers", "2", "--basis", "3", "--max-iter", "10", "--out",
        &out_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["net.json", "diffeo.csv", "reparam.csv", "log.csv", "run.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    assert!(!entries(&out).iter().any(|f| f.ends_with(".tmp")));
    let run: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["config"]["command"], "reparam-curve");
    assert_eq!(run["config"]["layers"], 2);
    let log = fs::read_to_string(out.join("log.csv")).unwrap();
    assert!(log.starts_with("iter,loss,grad_norm,step,projected\n"));
    let losses: Vec<f64> = log.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(losses.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn identical_curves_give_the_identity() {
    let tmp = TempDir::new().unwrap();
    let c = figure_eight_csv(tmp.path(), "c.csv", 200);
    let out = tmp.path().join("run");
    let c = c.to_str().unwrap();
    let o = reparam(&["reparam-curve", "--target", c, "--source", c, "--layers", "3", "--basis", "4", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for row in numeric_rows(&out.join("diffeo.csv")) {
        assert_eq!(row[0], row[1]);
    }
}

#[test]
fn compare_gd_on_identical_shapes_keeps_both_identities() {
    let tmp = TempDir::new().unwrap();
    let c = figure_eight_csv(tmp.path(), "c.csv", 200);
    let c = c.to_str().unwrap();
    let out = tmp.path().join("run");
    let o = reparam(&["compare-gd", "--target", c, "--source", c, "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["gd_diffeo.csv", "deep_diffeo.csv"] {
        for row in numeric_rows(&out.join(f)) {
            assert_eq!(row[0], row[1], "{f}");
        }
    }
    assert!(out.join("gd_log.csv").is_file() && out.join("deep_log.csv").is_file());
}

#[test]
fn malformed_csv_exits_2_without_artifacts() {
    let tmp = TempDir::new().unwrap();
    let good = figure_eight_csv(tmp.path(), "good.csv", 64);
    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "t,v1,v2\n0,1,0\n0.5,oops,1\n1,1,0\n").unwrap();
    let out = tmp.path().join("run");
    let o = reparam(&[
        "reparam-curve", "--target", good.to_str().unwrap(), "--source", bad.to_str().unwrap(), "--out",
        &out_arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));
    assert!(entries(&out).is_empty());
}

#[test]
fn tiny_pgm_exits_2() {
    let tmp = TempDir::new().unwrap();
    let img = tmp.path().join("tiny.pgm");
    fs::write(&img, b"P2\n3 3\n255\n0 0 0\n0 255 0\n0 0 0\n").unwrap();
    let out = tmp.path().join("run");
    let p = img.to_str().unwrap();
    let o = reparam(&["reparam-surface", "--target", p, "--source", p, "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(entries(&out).is_empty());
}

#[test]
fn bad_parameters_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = out_arg(tmp.path());
    assert_eq!(reparam(&["reparam-curve", "--builtin", "--layers", "0", "--out", &out]).status.code(), Some(2));
    assert_eq!(reparam(&["reparam-curve", "--builtin", "--epsilon", "1.5", "--out", &out]).status.code(), Some(2));
    assert_eq!(reparam(&["bounds", "--runs", "1", "--grid", "100", "--out", &out]).status.code(), Some(2));
}

#[test]
fn direct_interpolation_hits_both_endpoints() {
    let tmp = TempDir::new().unwrap();
    let a = figure_eight_csv(tmp.path(), "a.csv", 64);
    let b = tmp.path().join("b.csv");
    let mut s = String::from("t,v1,v2\n");
    for i in 0..64 {
        let t = i as f64 / 63.0;
        s.push_str(&format!("{t},{},{}\n", 2.0 * t, t * t));
    }
    fs::write(&b, s).unwrap();
    let out = tmp.path().join("run");
    let o = reparam(&[
        "interpolate", "--mode", "direct", "--source", a.to_str().unwrap(), "--target", b.to_str().unwrap(), "--taus",
        "2", "--out", &out_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("path_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["taus"], serde_json::json!([0.0, 1.0]));
    let (start, end) = (numeric_rows(&out.join("path_000.csv")), numeric_rows(&out.join("path_001.csv")));
    assert_eq!(start, numeric_rows(&a));
    assert_eq!(end, numeric_rows(&b));
}

#[test]
fn geodesic_between_equal_curves_is_constant() {
    let tmp = TempDir::new().unwrap();
    let a = figure_eight_csv(tmp.path(), "a.csv", 64);
    let a = a.to_str().unwrap();
    let out = tmp.path().join("run");
    let o = reparam(&["interpolate", "--mode", "geodesic", "--source", a, "--target", a, "--taus", "5", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = numeric_rows(&out.join("path_000.csv"));
    for i in 1..5 {
        let rows = numeric_rows(&out.join(format!("path_{i:03}.csv")));
        for (r, s) in rows.iter().zip(&first) {
            for (x, y) in r.iter().zip(s) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn bounds_prints_the_schroeder_table_and_handles_zero_runs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = reparam(&["bounds", "--runs", "0", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("k,M_k"));
    assert!(stdout.lines().any(|l| l == "4,26"));
    assert!(stdout.lines().any(|l| l == "10,282137824"));
    let csv = fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert_eq!(csv, "k,L,M,strategy,seed,sum_norm,comp_norm,ratio\n");
    assert!(out.join("bounds_summary.json").is_file() && out.join("run.json").is_file());
}

#[test]
fn small_bounds_run_has_no_violations() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = reparam(&[
        "bounds", "--runs", "3", "--layers", "1,4", "--basis", "2,5", "--grid", "2001", "--out", &out_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("bounds_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["violations"], 0);
    assert_eq!(fs::read_to_string(out.join("bounds.csv")).unwrap().lines().count(), 1 + 3 * 4 * 4);
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let args = |out: &Path| {
        reparam(&[
            "reparam-curve", "--builtin", "--grid", "128", "--layers", "3", "--basis", "3", "--max-iter", "15",
            "--resample-points", "100", "--seed", "4", "--out", &out_arg(out),
        ])
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(args(&a).status.success() && args(&b).status.success());
    for f in ["diffeo.csv", "reparam.csv", "log.csv", "net.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn builtin_surface_run_writes_warp_grid() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = reparam(&[
        "reparam-surface", "--builtin", "--grid", "24", "--layers", "1", "--basis", "1", "--max-iter", "5", "--out",
        &out_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let warp = fs::read_to_string(out.join("warp.csv")).unwrap();
    assert!(warp.starts_with("x,y,phi1,phi2\n"));
    assert!(out.join("reparam.csv").is_file() && out.join("net.json").is_file());
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = reparam(&[
        "sweep", "--builtin", "--grid", "128", "--cells", "1:2,2:2", "--max-iter", "5", "--out", &out_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "L,M,final_loss,iters,seconds");
    assert!(lines[1].starts_with("1,2,") && lines[2].starts_with("2,2,"));
}
