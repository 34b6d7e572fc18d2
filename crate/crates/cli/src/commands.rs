use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::anyhow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reparam_core::bounds::{bound_ratio_experiment, schroeder, BoundExperiment};
use reparam_core::builtin::{circle_image, curve_pair, half_circle_image, surface_pair};
use reparam_core::diffeo::{Basis, Basis1D, Basis2D, DiffeoNet};
use reparam_core::geometry::{lift_image, node, read_curve_csv, read_pgm, read_surface_csv, SampledCurve, SampledSurface};
use reparam_core::optimize::{
    bfgs_reparam, gd_reparam, log_csv, run_sweep, sweep_csv, BfgsConfig, CurveProblem, GdConfig, OptimResult,
    SurfaceProblem,
};
use reparam_core::transforms::{
    compose_curve, compose_surface, default_taus, geodesic_curves, lerp_after_reparam, path_files, transform_curve,
    transform_surface, TransformKind,
};
use serde_json::{json, Value};

use crate::output::Artifacts;
use crate::{
    BoundsArgs, Command, CompareArgs, CurveArgs, CurveInputs, Failure, InterpolateArgs, Mode, OptimArgs, ShapeKind,
    SurfaceArgs, SurfaceInputs, SweepArgs, Transform,
};

/// Reports go to stdout best-effort: a closed pipe must not abort a run
/// whose artifacts are already on disk.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

type CmdResult<T = ()> = Result<T, Failure>;

pub fn run(cmd: &Command) -> CmdResult {
    match cmd {
        Command::ReparamCurve(a) => reparam_curve(cmd, a),
        Command::ReparamSurface(a) => reparam_surface(cmd, a),
        Command::Interpolate(a) => interpolate(cmd, a),
        Command::Sweep(a) => sweep(cmd, a),
        Command::Bounds(a) => bounds(cmd, a),
        Command::CompareGd(a) => compare_gd(cmd, a),
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::new(2, anyhow!("{msg}"))
}

fn kind_of(t: Transform) -> TransformKind {
    match t {
        Transform::Srvt => TransformKind::Srvt,
        Transform::Q => TransformKind::QCurve,
        Transform::Srnf => TransformKind::Srnf,
        Transform::Qsurf => TransformKind::QSurface,
    }
}

fn check_net_params(layers: usize, basis: usize, optim: &OptimArgs) -> CmdResult {
    if layers == 0 || basis == 0 {
        return Err(usage("--layers and --basis must be at least 1"));
    }
    if !(optim.epsilon > 0.0 && optim.epsilon < 1.0) {
        return Err(usage(format!("--epsilon must lie in (0, 1), got {}", optim.epsilon)));
    }
    Ok(())
}

fn check_grid(grid: usize) -> CmdResult {
    if grid < 16 {
        return Err(usage(format!("--grid must be at least 16, got {grid}")));
    }
    Ok(())
}

fn open(path: &Path) -> CmdResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::new(2, anyhow!("cannot open {}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: reparam_core::Result<T>) -> CmdResult<T> {
    r.map_err(|e| {
        let code = crate::exit_code(&e);
        Failure::new(code, anyhow!("{}: {e}", path.display()))
    })
}

fn read_curve(path: &Path) -> CmdResult<SampledCurve> {
    with_path(path, read_curve_csv(open(path)?))
}

fn read_surface(path: &Path, grid: usize) -> CmdResult<SampledSurface> {
    let is_pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm {
        let img = with_path(path, read_pgm(path))?;
        check_grid(grid)?;
        with_path(path, lift_image(&img, grid))
    } else {
        with_path(path, read_surface_csv(open(path)?))
    }
}

fn curve_inputs(inp: &CurveInputs) -> CmdResult<(SampledCurve, SampledCurve)> {
    match (&inp.target, &inp.source) {
        (Some(t), Some(s)) => Ok((read_curve(t)?, read_curve(s)?)),
        _ if inp.builtin => {
            check_grid(inp.grid)?;
            let pair = curve_pair(inp.grid)?;
            Ok((pair.target, pair.source))
        }
        _ => Err(usage("give --target and --source, or --builtin")),
    }
}

fn surface_inputs(inp: &SurfaceInputs) -> CmdResult<(SampledSurface, SampledSurface, Option<DiffeoNet>)> {
    match (&inp.target, &inp.source) {
        (Some(t), Some(s)) => Ok((read_surface(t, inp.grid)?, read_surface(s, inp.grid)?, None)),
        _ if inp.builtin => {
            check_grid(inp.grid)?;
            let pair = surface_pair(inp.grid, 0)?;
            Ok((pair.target, pair.source, Some(pair.warp)))
        }
        _ => Err(usage("give --target and --source, or --builtin")),
    }
}

fn bfgs_config(o: &OptimArgs) -> BfgsConfig {
    BfgsConfig { max_iter: o.max_iter, grad_tol: o.grad_tol, ..Default::default() }
}

fn curve_problem(
    target: &SampledCurve,
    source: &SampledCurve,
    t: Transform,
    resample: Option<usize>,
    seed: u64,
) -> CmdResult<CurveProblem> {
    let kind = kind_of(t);
    if kind.domain_dim() != 1 {
        return Err(usage(format!("{} is not a curve transform", kind.name())));
    }
    let (q1, q2) = (transform_curve(kind, target)?, transform_curve(kind, source)?);
    Ok(match resample {
        None => CurveProblem::new(&q1, &q2)?,
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            CurveProblem::from_points(&q1, &q2, (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect())?
        }
    })
}

fn surface_problem(
    target: &SampledSurface,
    source: &SampledSurface,
    t: Transform,
    resample: Option<usize>,
    seed: u64,
) -> CmdResult<SurfaceProblem> {
    let kind = kind_of(t);
    if kind.domain_dim() != 2 {
        return Err(usage(format!("{} is not a surface transform", kind.name())));
    }
    let (q1, q2) = (transform_surface(kind, target)?, transform_surface(kind, source)?);
    Ok(match resample {
        None => SurfaceProblem::new(&q1, &q2)?,
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = (0..n).map(|_| [rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)]).collect();
            SurfaceProblem::from_points(&q1, &q2, pts)?
        }
    })
}

fn curve_samples(net: &DiffeoNet, k: usize) -> CmdResult<String> {
    let xs: Vec<f64> = (0..k).map(|i| node(i, k)).collect();
    let (phi, _) = net.eval_curve_many(&xs)?;
    let mut out = String::from("x,phi\n");
    for (x, p) in xs.iter().zip(&phi) {
        let _ = writeln!(out, "{x},{p}");
    }
    Ok(out)
}

fn surface_samples(net: &DiffeoNet, k: usize) -> CmdResult<String> {
    let ps: Vec<[f64; 2]> = (0..k * k).map(|idx| [node(idx % k, k), node(idx / k, k)]).collect();
    let (phi, _) = net.eval_surface_many(&ps)?;
    let mut out = String::from("x,y,phi1,phi2\n");
    for (p, q) in ps.iter().zip(&phi) {
        let _ = writeln!(out, "{},{},{},{}", p[0], p[1], q[0], q[1]);
    }
    Ok(out)
}

fn result_json(res: &OptimResult) -> Value {
    json!({
        "initial_loss": res.initial_loss(),
        "final_loss": res.final_loss(),
        "relative_loss": res.relative_loss(),
        "iterations": res.iterations(),
        "stop": format!("{:?}", res.stop),
    })
}

fn report(label: &str, res: &OptimResult) {
    say!(
        "{label}: loss {:.6e} -> {:.6e} (relative {:.3e}) after {} iterations, stop {:?}",
        res.initial_loss(),
        res.final_loss(),
        res.relative_loss(),
        res.iterations(),
        res.stop
    );
}

fn finish(mut art: Artifacts, out: &Path, cmd: &Command, result: Value) -> CmdResult {
    let run = json!({ "version": env!("CARGO_PKG_VERSION"), "config": cmd, "result": result });
    art.add("run.json", serde_json::to_string_pretty(&run).expect("run record serializes") + "\n");
    let written = art
        .commit(out)
        .map_err(|e| Failure::new(2, anyhow!("writing to {}: {e}", out.display())))?;
    for p in written {
        log::info!("wrote {}", p.display());
    }
    say!("outputs in {}", out.display());
    Ok(())
}

fn to_bytes(r: reparam_core::Result<Vec<u8>>) -> CmdResult<Vec<u8>> {
    Ok(r?)
}

fn reparam_curve(cmd: &Command, a: &CurveArgs) -> CmdResult {
    check_net_params(a.layers, a.basis, &a.optim)?;
    let (target, source) = curve_inputs(&a.inputs)?;
    let problem = curve_problem(&target, &source, a.transform, a.resample_points, a.optim.seed)?;
    let start = DiffeoNet::identity(Basis::Sine(Basis1D::new(a.basis)), a.layers, a.optim.epsilon)?;
    let res = bfgs_reparam(&problem, start, &bfgs_config(&a.optim))?;
    report("bfgs", &res);
    let mut art = Artifacts::default();
    art.add("net.json", res.net.to_json());
    art.add("diffeo.csv", curve_samples(&res.net, source.len())?);
    art.add("reparam.csv", to_bytes(reparametrized_curve(&source, &res.net))?);
    art.add("log.csv", log_csv(&res.log));
    finish(art, &a.optim.out, cmd, result_json(&res))
}

fn reparametrized_curve(source: &SampledCurve, net: &DiffeoNet) -> reparam_core::Result<Vec<u8>> {
    use reparam_core::transforms::Shape;
    compose_curve(source, net)?.to_csv()
}

fn reparam_surface(cmd: &Command, a: &SurfaceArgs) -> CmdResult {
    check_net_params(a.layers, a.basis, &a.optim)?;
    let (target, source, _) = surface_inputs(&a.inputs)?;
    let problem = surface_problem(&target, &source, a.transform, a.resample_points, a.optim.seed)?;
    let start = DiffeoNet::identity(Basis::Tangent(Basis2D::new(a.basis)), a.layers, a.optim.epsilon)?;
    let res = bfgs_reparam(&problem, start, &bfgs_config(&a.optim))?;
    report("bfgs", &res);
    let mut art = Artifacts::default();
    art.add("net.json", res.net.to_json());
    art.add("warp.csv", surface_samples(&res.net, source.size())?);
    let reparam = {
        use reparam_core::transforms::Shape;
        compose_surface(&source, &res.net)?.to_csv()?
    };
    art.add("reparam.csv", reparam);
    art.add("log.csv", log_csv(&res.log));
    finish(art, &a.optim.out, cmd, result_json(&res))
}

fn interpolate(cmd: &Command, a: &InterpolateArgs) -> CmdResult {
    let taus = default_taus(a.taus);
    let mut art = Artifacts::default();
    let mut result = json!({ "taus": taus });
    match a.kind {
        ShapeKind::Curve => {
            let grid = a.grid.unwrap_or(1024);
            let inputs = CurveInputs { target: a.target.clone(), source: a.source.clone(), builtin: a.builtin, grid };
            let (target, source) = curve_inputs(&inputs)?;
            let shapes = match a.mode {
                Mode::Direct => taus.iter().map(|&t| target.lerp(&source, t)).collect::<Result<Vec<_>, _>>()?,
                Mode::Geodesic => geodesic_curves(&target, &source, &taus)?,
                Mode::ReparamLerp => {
                    let (layers, basis) = (a.layers.unwrap_or(10), a.basis.unwrap_or(10));
                    check_net_params(layers, basis, &a.optim)?;
                    let transform = a.transform.unwrap_or(Transform::Srvt);
                    let problem = curve_problem(&target, &source, transform, None, a.optim.seed)?;
                    let start = DiffeoNet::identity(Basis::Sine(Basis1D::new(basis)), layers, a.optim.epsilon)?;
                    let res = bfgs_reparam(&problem, start, &bfgs_config(&a.optim))?;
                    report("bfgs", &res);
                    art.add("net.json", res.net.to_json());
                    art.add("log.csv", log_csv(&res.log));
                    result["optimization"] = result_json(&res);
                    result["resolved"] = json!({ "layers": layers, "basis": basis, "transform": transform });
                    lerp_after_reparam(&target, &source, &res.net, &taus)?
                }
            };
            result["grid"] = json!(target.len());
            art.extend(path_files("path", &taus, &shapes)?);
        }
        ShapeKind::Surface => {
            let grid = a.grid.unwrap_or(64);
            let (target, source) = match (&a.target, &a.source) {
                (Some(t), Some(s)) => (read_surface(t, grid)?, read_surface(s, grid)?),
                _ if a.builtin => {
                    check_grid(grid)?;
                    let n = grid.max(64);
                    (lift_image(&circle_image(n)?, grid)?, lift_image(&half_circle_image(n)?, grid)?)
                }
                _ => return Err(usage("give --target and --source, or --builtin")),
            };
            let shapes = match a.mode {
                Mode::Direct => taus.iter().map(|&t| target.lerp(&source, t)).collect::<Result<Vec<_>, _>>()?,
                Mode::Geodesic => return Err(usage("geodesic interpolation is only available for curves")),
                Mode::ReparamLerp => {
                    let (layers, basis) = (a.layers.unwrap_or(5), a.basis.unwrap_or(3));
                    check_net_params(layers, basis, &a.optim)?;
                    let transform = a.transform.unwrap_or(Transform::Qsurf);
                    let problem = surface_problem(&target, &source, transform, None, a.optim.seed)?;
                    let start = DiffeoNet::identity(Basis::Tangent(Basis2D::new(basis)), layers, a.optim.epsilon)?;
                    let res = bfgs_reparam(&problem, start, &bfgs_config(&a.optim))?;
                    report("bfgs", &res);
                    art.add("net.json", res.net.to_json());
                    art.add("log.csv", log_csv(&res.log));
                    result["optimization"] = result_json(&res);
                    result["resolved"] = json!({ "layers": layers, "basis": basis, "transform": transform });
                    lerp_after_reparam(&target, &source, &res.net, &taus)?
                }
            };
            result["grid"] = json!(target.size());
            art.extend(path_files("path", &taus, &shapes)?);
        }
    }
    say!("{} path frames", taus.len());
    finish(art, &a.optim.out, cmd, result)
}

fn default_cells() -> Vec<(usize, usize)> {
    let depth = [1, 2, 4, 6, 8, 10];
    let mut cells: Vec<(usize, usize)> = depth.iter().map(|&l| (l, 10)).collect();
    cells.extend(depth.iter().filter(|&&m| m != 10).map(|&m| (10, m)));
    cells.extend([(10, 3), (1, 30)]);
    cells
}

fn parse_cells(specs: &[String]) -> CmdResult<Vec<(usize, usize)>> {
    if specs.is_empty() {
        return Ok(default_cells());
    }
    specs
        .iter()
        .map(|s| {
            let (l, m) = s.split_once(':').ok_or_else(|| usage(format!("cell {s:?} is not of the form L:M")))?;
            let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| usage(format!("cell {s:?}: {v:?} is not a count")));
            let (l, m) = (parse(l)?, parse(m)?);
            if m == 0 {
                return Err(usage(format!("cell {s:?}: M must be at least 1")));
            }
            Ok((l, m))
        })
        .collect()
}

fn sweep(cmd: &Command, a: &SweepArgs) -> CmdResult {
    check_net_params(1, 1, &a.optim)?;
    let cells = parse_cells(&a.cells)?;
    let (target, source) = curve_inputs(&a.inputs)?;
    let problem = curve_problem(&target, &source, a.transform, None, a.optim.seed)?;
    let rows = run_sweep(&problem, &cells, |m| Basis::Sine(Basis1D::new(m)), a.optim.epsilon, &bfgs_config(&a.optim));
    for r in &rows {
        match &r.error {
            None => say!("L={:<3} M={:<3} final loss {:.6e} after {} iterations", r.layers, r.m, r.final_loss, r.iters),
            Some(e) => say!("L={:<3} M={:<3} failed: {e}", r.layers, r.m),
        }
    }
    let mut art = Artifacts::default();
    art.add("sweep.csv", sweep_csv(&rows));
    let failed: Vec<Value> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| json!({ "L": r.layers, "M": r.m, "error": e })))
        .collect();
    finish(art, &a.optim.out, cmd, json!({ "cells": cells, "failed": failed }))
}

fn bounds(cmd: &Command, a: &BoundsArgs) -> CmdResult {
    let table = schroeder(a.kmax);
    say!("k,M_k");
    for (k, m) in table.values().iter().enumerate().skip(1) {
        say!("{k},{m}");
    }
    let exp = BoundExperiment {
        layers: a.layers.clone(),
        basis_sizes: a.basis.clone(),
        orders: a.orders.clone(),
        runs: a.runs,
        seed: a.seed,
        n_grid: a.grid,
    };
    let rep = bound_ratio_experiment(&exp)?;
    let violations = rep.violations().len();
    let mut by_k = serde_json::Map::new();
    for &k in &a.orders {
        if let Some(r) = rep.max_ratio(k) {
            say!("k={k}: max ratio {r:.6} (M_k = {})", table.values().get(k).copied().unwrap_or_else(|| schroeder(k).get(k)));
            by_k.insert(k.to_string(), json!(r));
        }
    }
    let mut art = Artifacts::default();
    art.add("bounds.csv", rep.to_csv());
    art.add("bounds_summary.json", rep.summary_json()? + "\n");
    finish(art, &a.out, cmd, json!({ "rows": rep.rows.len(), "max_ratio_by_k": by_k, "violations": violations }))?;
    if violations > 0 {
        return Err(Failure::new(3, anyhow!("{violations} ratios exceed M_k")));
    }
    Ok(())
}

fn compare_gd(cmd: &Command, a: &CompareArgs) -> CmdResult {
    check_net_params(a.layers, a.basis, &a.optim)?;
    let (target, source) = curve_inputs(&a.inputs)?;
    let problem = curve_problem(&target, &source, a.transform, None, a.optim.seed)?;
    let basis = Basis::Sine(Basis1D::new(a.basis));
    let gd_cfg = GdConfig { max_iter: a.optim.max_iter, grad_tol: a.optim.grad_tol, epsilon: a.optim.epsilon, ..Default::default() };
    let gd = gd_reparam(&problem, basis, &gd_cfg)?;
    let deep = bfgs_reparam(&problem, DiffeoNet::identity(basis, a.layers, a.optim.epsilon)?, &bfgs_config(&a.optim))?;
    report("gradient descent", &gd);
    report("deep", &deep);
    let k = source.len();
    let mut art = Artifacts::default();
    art.add("gd_log.csv", log_csv(&gd.log));
    art.add("deep_log.csv", log_csv(&deep.log));
    art.add("gd_diffeo.csv", curve_samples(&gd.net, k)?);
    art.add("deep_diffeo.csv", curve_samples(&deep.net, k)?);
    art.add("gd_net.json", gd.net.to_json());
    art.add("deep_net.json", deep.net.to_json());
    finish(art, &a.optim.out, cmd, json!({ "gd": result_json(&gd), "deep": result_json(&deep) }))
}
