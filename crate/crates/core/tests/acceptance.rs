//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::dvector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tubeflow::cli::{builtin, run_scenario, RunOptions, Subcommand};
use tubeflow::horizon::plan_segments;
use tubeflow::integrate::{integrate_relaxed, integrate_switching, sup_gap, RelaxedControl, SwitchingSignal};
use tubeflow::relaxation::{chatter_control, selection_radius};
use tubeflow::setvalued::{hausdorff_finite, truncate_field, PolytopicField, Radius, Tube};

type Outcome = Result<String, String>;

fn counterexample_field() -> PolytopicField {
    PolytopicField::parse(2, &[vec!["x2^2", "-1"], vec!["x2^2", "1"]]).unwrap()
}

fn run(name: &str, command: Subcommand, out: &Path, seed: Option<u64>) -> Result<Value, String> {
    let scenario = builtin(name).ok_or(format!("missing builtin {name}"))?;
    let options = RunOptions {
        seed,
        ..RunOptions::default()
    };
    run_scenario(&scenario, command, out, &options).map_err(|e| e.to_string())
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| e.to_string())?;
            r.iter().map(|v| v.parse::<f64>().map_err(|e| e.to_string())).collect()
        })
        .collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn counterexample_tube(tmp: &Path) -> Outcome {
    let start = Instant::now();
    let manifest = run("counterexample", Subcommand::Horizon, &tmp.join("c1"), None)?;
    let elapsed = start.elapsed().as_secs_f64();
    let eta0: Vec<f64> = serde_json::from_value(manifest["result"]["eta0"].clone()).map_err(|e| e.to_string())?;
    let eta_norm = eta0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rows = read_rows(&tmp.join("c1/trajectory.csv"))?;
    let worst = rows
        .iter()
        .map(|r| r[1] * r[1] + r[2] * r[2] - (-r[0]).exp())
        .fold(f64::NEG_INFINITY, f64::max);
    let end = rows.last().map(|r| r[0]).unwrap_or(0.0);
    check(
        eta_norm <= 1.0 && eta_norm > 0.0 && worst <= 1e-6 && end == 5.0 && elapsed < 60.0,
        format!(
            "eta0 = {eta0:?} (|eta0| = {eta_norm:.3e}), max(x^2+y^2-e^-t) = {worst:.3e} over {} points to t = {end}, {elapsed:.2}s",
            rows.len()
        ),
    )
}

fn origin_impossibility(tmp: &Path) -> Outcome {
    let manifest = run("counterexample", Subcommand::OriginCheck, &tmp.join("c2"), None)?;
    let runs = manifest["result"]["runs"].as_array().ok_or("no runs")?;
    let mut ok = runs.len() == 3;
    let mut parts = Vec::new();
    for (run, n) in runs.iter().zip([1.0f64, 4.0, 16.0]) {
        let x1 = run["state_at_1"][0].as_f64().ok_or("no x(1)")?;
        let expected = 1.0 / (12.0 * n * n);
        let exit = run["first_violation"].as_f64();
        ok &= run["slices_per_unit_time"].as_f64() == Some(n) && (x1 - expected).abs() <= 1e-6 && x1 > 0.0 && exit.is_some();
        parts.push(format!("N={n}: x(1)={x1:.6e} (1/(12N^2)={expected:.6e}), tube exit at t={exit:?}"));
    }
    check(ok, parts.join("; "))
}

fn chattering_convergence() -> Outcome {
    let f = counterexample_field();
    let h = 1e-3;
    let lam = RelaxedControl::constant(vec![0.5, 0.5], (0.0, 1.0)).unwrap();
    let z = integrate_relaxed(&f, &lam, &dvector![0.0, 0.0], (0.0, 1.0), h).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut gaps = Vec::new();
    let mut prev: Option<f64> = None;
    let mut worst_ratio_band = (f64::INFINITY, f64::NEG_INFINITY);
    for p in 1..=8 {
        let n = 1usize << p;
        let u = chatter_control(&lam, n, None).map_err(|e| e.to_string())?;
        let y = integrate_switching(&f, &u, &dvector![0.0, 0.0], (0.0, 1.0), h).map_err(|e| e.to_string())?;
        let (gap, _) = sup_gap(&z, &y).map_err(|e| e.to_string())?;
        let target = 1.0 / (2.0 * n as f64);
        ok &= (gap - target).abs() <= 0.1 * target;
        if let Some(prev) = prev {
            let ratio = gap / prev;
            worst_ratio_band = (worst_ratio_band.0.min(ratio), worst_ratio_band.1.max(ratio));
            ok &= (0.4..=0.6).contains(&ratio);
        }
        prev = Some(gap);
        gaps.push(format!("{n}:{gap:.4e}"));
    }
    check(
        ok,
        format!(
            "gaps {}; halving ratios in [{:.4}, {:.4}]",
            gaps.join(" "),
            worst_ratio_band.0,
            worst_ratio_band.1
        ),
    )
}

fn gronwall_selection(tmp: &Path) -> Outcome {
    let manifest = run("linear-gronwall", Subcommand::Simulate, &tmp.join("c4"), None)?;
    let step = manifest["step"].as_f64().unwrap_or(0.0);
    let rows = read_rows(&tmp.join("c4/gaps.csv"))?;
    let worst = rows
        .iter()
        .map(|r| (r[1] - 0.1 * r[0].exp()).abs())
        .fold(0.0f64, f64::max);
    let holds = manifest["result"]["gronwall"]["holds"].as_bool() == Some(true);
    check(
        worst <= 1e-5 && step == 1e-4 && rows.last().map(|r| r[0]) == Some(1.0) && holds,
        format!(
            "max |gap(t) - 0.1 e^t| = {worst:.3e} over {} points at h = {step}; Gronwall bound holds: {holds}",
            rows.len()
        ),
    )
}

fn truncation_lipschitz() -> Outcome {
    let f = counterexample_field();
    let lam = RelaxedControl::constant(vec![0.5, 0.5], (0.0, 1.0)).unwrap();
    let z = integrate_relaxed(&f, &lam, &dvector![0.0, 0.0], (0.0, 1.0), 1e-3).map_err(|e| e.to_string())?;
    let tube = Tube::constant(z, 0.2).map_err(|e| e.to_string())?;
    let trunc = truncate_field(&f, &tube).map_err(|e| e.to_string())?;
    let k = (1.2f64.powi(4) + 1.0).sqrt() + 2.4;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = f64::NEG_INFINITY;
    let mut exterior = 0;
    let mut exterior_bad = 0;
    for i in 0..10_000 {
        let x = dvector![rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5)];
        let y = if i % 2 == 0 {
            dvector![rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5)]
        } else {
            &x + dvector![rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3)]
        };
        let t = rng.random::<f64>();
        let (fx, fy) = (
            trunc.eval_set(t, &x).map_err(|e| e.to_string())?,
            trunc.eval_set(t, &y).map_err(|e| e.to_string())?,
        );
        let d = hausdorff_finite(&fx, &fy).map_err(|e| e.to_string())?;
        worst = worst.max(d - k * (&x - &y).norm());
        for (p, fp) in [(&x, &fx), (&y, &fy)] {
            if tube.set_distance(p).map_err(|e| e.to_string())? >= 1.0 {
                exterior += 1;
                if fp.iter().any(|v| v.iter().any(|c| *c != 0.0)) {
                    exterior_bad += 1;
                }
            }
        }
    }
    check(
        worst <= 1e-9 && exterior_bad == 0 && exterior > 0,
        format!(
            "max(d_H - (alpha + k0)|x - y|) = {worst:.3e} with alpha + k0 = {k:.6}; {exterior} exterior samples, {exterior_bad} nonzero"
        ),
    )
}

fn delta_and_plans() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let eps = rng.random_range(1e-6..10.0);
        let k = rng.random_range(0.0..20.0);
        worst = worst.max((selection_radius(eps, k) * 4.0 * f64::exp(k) - eps).abs() / eps.max(1.0));
    }
    let mut samples = 0;
    let mut violations = 0;
    for (src, horizon, width) in [
        ("exp(-t)", 5.0, 1.0),
        ("exp(-t)", 3.0, 0.5),
        ("1.1 + sin(t)", 4.0 * std::f64::consts::PI, std::f64::consts::PI),
        ("0.5 + 0.4*cos(5*t)", 3.0, 0.7),
        ("1/(1+t^2)", 8.0, 2.0),
        ("0.3", 2.0, 1.0),
    ] {
        let r = Radius::parse(src).map_err(|e| e.to_string())?;
        let plan = plan_segments(&r, horizon, width).map_err(|e| e.to_string())?;
        for k in 0..plan.segment_count() {
            let (a, b) = (plan.times[k], plan.times[k + 1]);
            for i in 0..=1000 {
                let t = a + (b - a) * i as f64 / 1000.0;
                samples += 1;
                if plan.entry_caps[k] > r.at(t).map_err(|e| e.to_string())? {
                    violations += 1;
                }
            }
        }
    }
    check(
        worst <= 1e-12 && violations == 0,
        format!("round-trip error {worst:.2e} on 1000 inputs; {samples} plan samples, {violations} cap violations"),
    )
}

fn completeness(tmp: &Path) -> Outcome {
    let escape = run("escape-pair", Subcommand::Completeness, &tmp.join("c7a"), None)?;
    let row = &escape["result"]["starts"][0];
    let times = |column: &str| -> Vec<Option<f64>> {
        row[column]["escape_times"]
            .as_array()
            .map(|a| a.iter().map(Value::as_f64).collect())
            .unwrap_or_default()
    };
    let (orig, relaxed) = (times("original"), times("relaxed"));
    let all: Vec<f64> = orig.iter().chain(&relaxed).flatten().copied().collect();
    let every_escaped = orig.len() == 20 && relaxed.len() == 20 && all.len() == 40;
    let spread = all.iter().copied().fold(f64::NEG_INFINITY, f64::max) - all.iter().copied().fold(f64::INFINITY, f64::min);
    let paired = orig
        .iter()
        .zip(&relaxed)
        .map(|(a, b)| (a.unwrap_or(f64::NAN) - b.unwrap_or(f64::NAN)).abs())
        .fold(0.0f64, f64::max);

    let complete = run("complete-pair", Subcommand::Completeness, &tmp.join("c7b"), None)?;
    let row = &complete["result"]["starts"][0];
    let none_escaped = row["original"]["escaped_any"] == false
        && row["relaxed"]["escaped_any"] == false
        && complete["result"]["t_max"] == 10.0
        && complete["result"]["threshold"] == 1e9;
    check(
        every_escaped && spread <= 0.05 && paired <= 0.05 && none_escaped,
        format!(
            "escape-pair: 40/40 escapes = {every_escaped}, spread {spread:.4}, max paired diff {paired:.4}; complete-pair escapes none by t = 10: {none_escaped}"
        ),
    )
}

fn integrator_order() -> Outcome {
    let f = counterexample_field();
    let cases = [
        (SwitchingSignal::constant(1, (0.0, 1.0)).unwrap(), [1.0 / 3.0, 1.0]),
        (SwitchingSignal::new(vec![0.0, 0.5, 1.0], vec![1, 0]).unwrap(), [1.0 / 12.0, 0.0]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (u, expected) in &cases {
        let err = |h: f64| -> Result<f64, String> {
            let tr = integrate_switching(&f, u, &dvector![0.0, 0.0], (0.0, 1.0), h).map_err(|e| e.to_string())?;
            Ok((tr.final_state() - dvector![expected[0], expected[1]]).norm())
        };
        let (e1, e2) = (err(1e-3)?, err(5e-4)?);
        let at_floor = e2 <= 1e-12;
        ok &= e1 <= 1e-8 && (at_floor || e1 / e2 >= 8.0);
        parts.push(format!(
            "({:.6}, {}): err(h=1e-3) = {e1:.2e}, err(h/2) = {e2:.2e}{}",
            expected[0],
            expected[1],
            if at_floor { " (noise floor)" } else { "" }
        ));
    }
    // smooth non-polynomial check of the rate itself
    let circle = PolytopicField::parse(2, &[vec!["-x2", "x1"]]).unwrap();
    let u = SwitchingSignal::constant(0, (0.0, 1.0)).unwrap();
    let err = |h: f64| {
        let tr = integrate_switching(&circle, &u, &dvector![1.0, 0.0], (0.0, 1.0), h).unwrap();
        (tr.final_state() - dvector![1f64.cos(), 1f64.sin()]).norm()
    };
    let ratio = err(0.1) / err(0.05);
    ok &= ratio >= 8.0;
    parts.push(format!("rotation field halving ratio {ratio:.2}"));
    check(ok, parts.join("; "))
}

fn determinism(tmp: &Path) -> Outcome {
    let (a, b) = (tmp.join("c9a"), tmp.join("c9b"));
    run("counterexample", Subcommand::Horizon, &a, Some(42))?;
    run("counterexample", Subcommand::Horizon, &b, Some(42))?;
    let same = |name: &str| std::fs::read(a.join(name)).ok() == std::fs::read(b.join(name)).ok();
    check(
        same("manifest.json") && same("trajectory.csv"),
        format!(
            "manifest.json identical: {}, trajectory.csv identical: {}",
            same("manifest.json"),
            same("trajectory.csv")
        ),
    )
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("counterexample tube", Box::new(|| counterexample_tube(dir))),
        ("origin impossibility", Box::new(|| origin_impossibility(dir))),
        ("chattering convergence", Box::new(chattering_convergence)),
        ("Gronwall selection bound", Box::new(|| gronwall_selection(dir))),
        ("truncation Lipschitz", Box::new(truncation_lipschitz)),
        ("delta formula and plan bounds", Box::new(delta_and_plans)),
        ("completeness probe", Box::new(|| completeness(dir))),
        ("integrator order", Box::new(integrator_order)),
        ("determinism", Box::new(|| determinism(dir))),
    ];
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        match criterion() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
