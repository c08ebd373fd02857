//! Scenario runner behind the `tubeflow` binary.
//!
//! Every run reads one [`Scenario`], executes one pipeline and writes its
//! artifacts into an output directory: `trajectory.csv`, `reference.csv`,
//! `gaps.csv` (`t, |z - x|, r`) where they apply, and always `manifest.json`,
//! which embeds the effective scenario so the run can be replayed.

pub mod builtins;
pub mod output;
pub mod scenario;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::horizon::{completeness_probe, plan_segments, shadow_trajectory, HorizonOptions, ProbeOptions};
use crate::integrate::{
    check_gronwall, gronwall_bound, integrate_relaxed, integrate_switching, reuse_control, sup_gap, tol_int, Control,
    RelaxedControl, SwitchingSignal,
};
use crate::relaxation::{chatter_control, fw_approximate, tube_selection, ChatterOptions, SelectionOptions};
use crate::setvalued::{PolytopicField, Radius};
use crate::trajectory::{State, Trajectory};

pub use builtins::{builtin, builtin_scenarios};
use output::{gap_rows, write_gaps_csv, write_json, write_trajectory_csv, ControlColumns};
pub use scenario::Scenario;
use scenario::{CompletenessSpec, OriginCheckSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subcommand {
    Simulate,
    Relax,
    Chatter,
    Tube,
    Horizon,
    OriginCheck,
    Completeness,
    ListBuiltins,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::Simulate,
        Subcommand::Relax,
        Subcommand::Chatter,
        Subcommand::Tube,
        Subcommand::Horizon,
        Subcommand::OriginCheck,
        Subcommand::Completeness,
        Subcommand::ListBuiltins,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Relax => "relax",
            Subcommand::Chatter => "chatter",
            Subcommand::Tube => "tube",
            Subcommand::Horizon => "horizon",
            Subcommand::OriginCheck => "origin-check",
            Subcommand::Completeness => "completeness",
            Subcommand::ListBuiltins => "list-builtins",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown subcommand `{s}`")))
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub step: Option<f64>,
    /// Worker cap for parallel stages.
    pub jobs: Option<usize>,
}

/// Reads a scenario file, or a shipped one when `source` is `builtin:NAME`.
pub fn load_scenario(source: &str) -> Result<Scenario> {
    match source.strip_prefix("builtin:") {
        Some(name) => builtin(name).ok_or_else(|| Error::invalid(format!("no builtin scenario named `{name}`"))),
        None => Scenario::from_json(&std::fs::read_to_string(source)?),
    }
}

/// The scenario with command-line overrides applied.
pub fn effective_scenario(scenario: &Scenario, options: &RunOptions) -> Result<Scenario> {
    let mut s = scenario.clone();
    if let Some(seed) = options.seed {
        s.seed = seed;
    }
    if let Some(step) = options.step {
        s.step = step;
    }
    s.validate()?;
    Ok(s)
}

/// Names, descriptions and full definitions of the shipped scenarios.
pub fn list_builtins() -> Value {
    Value::Array(
        builtin_scenarios()
            .iter()
            .map(|s| json!({ "name": s.name, "description": s.description, "scenario": s }))
            .collect(),
    )
}

enum Columns {
    Switching(SwitchingSignal),
    Relaxed(RelaxedControl),
}

impl Columns {
    fn as_columns(&self) -> ControlColumns<'_> {
        match self {
            Columns::Switching(u) => ControlColumns::Switching(u),
            Columns::Relaxed(l) => ControlColumns::Relaxed(l),
        }
    }
}

#[derive(Default)]
struct Artifacts {
    trajectory: Option<(Trajectory, Columns)>,
    reference: Option<(Trajectory, Columns)>,
    gaps: Option<Vec<[f64; 3]>>,
    result: Value,
}

/// Runs `command` on `scenario` and writes the artifacts into `out_dir`.
/// Returns the manifest that was written.
pub fn run_scenario(scenario: &Scenario, command: Subcommand, out_dir: &Path, options: &RunOptions) -> Result<Value> {
    let s = effective_scenario(scenario, options)?;
    let field = s.field()?;
    let artifacts = match command {
        Subcommand::Simulate => simulate(&s, &field)?,
        Subcommand::Relax => relax(&s, &field)?,
        Subcommand::Chatter => chatter(&s, &field)?,
        Subcommand::Tube => tube(&s, &field)?,
        Subcommand::Horizon => horizon(&s, &field)?,
        Subcommand::OriginCheck => origin_check(&s, &field)?,
        Subcommand::Completeness => completeness(&s, &field, options)?,
        Subcommand::ListBuiltins => {
            return Err(Error::invalid("list-builtins does not run a scenario"));
        }
    };

    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    if let Some((tr, cols)) = &artifacts.trajectory {
        write_trajectory_csv(&out_dir.join("trajectory.csv"), tr, cols.as_columns())?;
        files.push("trajectory.csv");
    }
    if let Some((tr, cols)) = &artifacts.reference {
        write_trajectory_csv(&out_dir.join("reference.csv"), tr, cols.as_columns())?;
        files.push("reference.csv");
    }
    if let Some(rows) = &artifacts.gaps {
        write_gaps_csv(&out_dir.join("gaps.csv"), rows)?;
        files.push("gaps.csv");
    }
    files.push("manifest.json");
    let manifest = json!({
        "tool": "tubeflow",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": command.name(),
        "scenario": s,
        "field_hash": field.content_hash(),
        "seed": s.seed,
        "step": s.step,
        "files": files,
        "result": artifacts.result,
    });
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn vec_of(x: &State) -> Vec<f64> {
    x.iter().copied().collect()
}

fn selection_options(s: &Scenario) -> Result<SelectionOptions> {
    let mut options = SelectionOptions::new(s.bounds_strategy()?);
    options.chatter.max_slices = s.max_slices();
    Ok(options)
}

fn simulate(s: &Scenario, field: &PolytopicField) -> Result<Artifacts> {
    let (h, xi, u) = (s.step, s.initial(), s.switching()?);
    let x = integrate_switching(field, &u, &xi, s.span(), h)?;
    let mut result = json!({
        "initial_state": vec_of(&xi),
        "final_state": vec_of(x.final_state()),
        "switches": u.switch_count(),
        "grid_points": x.len(),
    });
    let Some(p) = &s.perturbation else {
        return Ok(Artifacts {
            trajectory: Some((x, Columns::Switching(u))),
            result,
            ..Artifacts::default()
        });
    };

    let offset = State::from_column_slice(p);
    let eta = &xi + &offset;
    let member = reuse_control(field, &x, &u, &eta, h)?;
    let ball = x.max_norm().max(member.max_norm()) + 1.0;
    let bounds = s.bounds_strategy()?.resolve(field, ball, s.span())?;
    let check = check_gronwall(&x, &member, &bounds, h)?;
    let tol = tol_int(h, s.horizon);
    let gaps = member
        .times()
        .iter()
        .zip(member.states())
        .map(|(t, m)| [*t, (x.at(*t) - m).norm(), gronwall_bound(tol, offset.norm(), bounds.lipschitz * t)])
        .collect();
    let (gap, gap_time) = sup_gap(&x, &member)?;
    result["eta"] = json!(vec_of(&eta));
    result["perturbed_final_state"] = json!(vec_of(member.final_state()));
    result["sup_gap"] = json!(gap);
    result["sup_gap_time"] = json!(gap_time);
    result["bounds"] = serde_json::to_value(bounds)?;
    result["gronwall"] = serde_json::to_value(check)?;
    Ok(Artifacts {
        trajectory: Some((member, Columns::Switching(u.clone()))),
        reference: Some((x, Columns::Switching(u))),
        gaps: Some(gaps),
        result,
    })
}

fn relax(s: &Scenario, field: &PolytopicField) -> Result<Artifacts> {
    let lambda = s.relaxed_control()?;
    let z = integrate_relaxed(field, &lambda, &s.initial(), s.span(), s.step)?;
    let result = json!({
        "initial_state": s.initial_state,
        "final_state": vec_of(z.final_state()),
        "grid_points": z.len(),
    });
    Ok(Artifacts {
        trajectory: Some((z, Columns::Relaxed(lambda))),
        result,
        ..Artifacts::default()
    })
}

fn chatter(s: &Scenario, field: &PolytopicField) -> Result<Artifacts> {
    let (h, eps, lambda) = (s.step, s.epsilon()?, s.relaxed_control()?);
    let z = integrate_relaxed(field, &lambda, &s.initial(), s.span(), h)?;
    let options = ChatterOptions {
        max_slices: s.max_slices(),
        order: None,
    };
    let approx = fw_approximate(field, &z, &lambda, eps, h, &options)?;
    let gaps = gap_rows(&z, &approx.trajectory, &Radius::Constant(eps))?;
    let result = json!({
        "epsilon": eps,
        "slices": approx.slices,
        "sup_gap": approx.sup_gap,
        "switches": approx.signal.switch_count(),
        "final_state": vec_of(approx.trajectory.final_state()),
        "reference_final_state": vec_of(z.final_state()),
    });
    Ok(Artifacts {
        trajectory: Some((approx.trajectory, Columns::Switching(approx.signal))),
        reference: Some((z, Columns::Relaxed(lambda))),
        gaps: Some(gaps),
        result,
    })
}

fn tube(s: &Scenario, field: &PolytopicField) -> Result<Artifacts> {
    let (h, eps, lambda) = (s.step, s.epsilon()?, s.relaxed_control()?);
    let z = integrate_relaxed(field, &lambda, &s.initial(), s.span(), h)?;
    let family = tube_selection(field, &z, &lambda, eps, h, &selection_options(s)?)?;
    // the requested offset, pulled back onto the ball if it reaches outside
    let direction = match &s.perturbation {
        Some(p) => State::from_column_slice(p),
        None => {
            let mut e1 = State::zeros(s.dimension);
            e1[0] = family.radius;
            e1
        }
    };
    let scale = if direction.norm() > family.radius {
        family.radius / direction.norm()
    } else {
        1.0
    };
    let eta = &family.center + direction * scale;
    let member = family.member(field, &eta, h)?;
    let (gap, gap_time) = sup_gap(&z, &member)?;
    let gaps = gap_rows(&z, &member, &Radius::Constant(eps))?;
    let result = json!({
        "epsilon": eps,
        "center": vec_of(&family.center),
        "delta": family.radius,
        "chatter_epsilon": family.epsilon,
        "slices": family.slices,
        "chatter_gap": family.chatter_gap,
        "lipschitz": family.lipschitz,
        "bounds": family.bounds,
        "verification": family.verification,
        "eta": vec_of(&eta),
        "sup_gap": gap,
        "sup_gap_time": gap_time,
    });
    Ok(Artifacts {
        trajectory: Some((member, Columns::Switching(family.base_signal))),
        reference: Some((z, Columns::Relaxed(lambda))),
        gaps: Some(gaps),
        result,
    })
}

fn horizon(s: &Scenario, field: &PolytopicField) -> Result<Artifacts> {
    let (h, radius, lambda) = (s.step, s.radius()?, s.relaxed_control()?);
    let xi = s.initial();
    let z = integrate_relaxed(field, &lambda, &xi, s.span(), h)?;
    let plan = plan_segments(&radius, s.horizon, s.segment_width.unwrap_or(1.0))?;
    let options = HorizonOptions::new(selection_options(s)?);
    let res = shadow_trajectory(field, &z, &lambda, &radius, &plan, h, &options)?;
    let gaps = gap_rows(&z, &res.trajectory, &radius)?;
    let result = json!({
        "initial_state": vec_of(&xi),
        "eta0": vec_of(&res.eta0),
        "eta0_offset": (&res.eta0 - &xi).norm(),
        "r0": radius.at(0.0)?,
        "plan": plan,
        "segments": res.segments,
        "worst_ratio": res.worst_ratio,
        "worst_ratio_time": res.worst_ratio_time,
        "switches": res.signal.switch_count(),
    });
    Ok(Artifacts {
        trajectory: Some((res.trajectory, Columns::Switching(res.signal))),
        reference: Some((z, Columns::Relaxed(lambda))),
        gaps: Some(gaps),
        result,
    })
}

/// The relaxed control on `[0, end]`; a single-piece control is extended
/// past the scenario horizon.
fn control_on(s: &Scenario, end: f64) -> Result<RelaxedControl> {
    let lambda = s.relaxed_control()?;
    let span_end = lambda.span().1;
    if end < span_end {
        lambda.restrict(0.0, end)
    } else if end == span_end {
        Ok(lambda)
    } else if lambda.weights().len() == 1 {
        RelaxedControl::constant(lambda.weights()[0].clone(), (0.0, end))
    } else {
        Err(Error::invalid(format!(
            "relaxed control ends at {span_end}, scan needs {end}"
        )))
    }
}

/// Chatters the relaxed control with `N` slices per unit time from the
/// initial state and scans for the first exit from the `r(t)`-tube.
fn origin_check(s: &Scenario, field: &PolytopicField) -> Result<Artifacts> {
    let spec = s.origin_check.clone().unwrap_or(OriginCheckSpec {
        slices: vec![1, 4, 16],
        horizon: None,
    });
    if spec.slices.is_empty() || spec.slices.contains(&0) {
        return Err(Error::invalid("origin check needs positive slice counts"));
    }
    let (h, radius, xi) = (s.step, s.radius()?, s.initial());
    let end = spec.horizon.unwrap_or(s.horizon);
    let lambda = control_on(s, end)?;
    let z = integrate_relaxed(field, &lambda, &xi, (0.0, end), h)?;
    let tol = tol_int(h, end);
    let mut runs = Vec::new();
    let mut first = None;
    for &n in &spec.slices {
        let slices = (n as f64 * end).ceil() as usize;
        let u = chatter_control(&lambda, slices, None)?;
        let x = integrate_switching(field, &u, &xi, (0.0, end), h)?;
        let mut violation = None;
        let mut worst_ratio = 0.0f64;
        for (t, state) in x.times().iter().zip(x.states()) {
            let gap = (z.at(*t) - state).norm();
            let r = radius.at(*t)?;
            worst_ratio = worst_ratio.max(gap / r);
            if violation.is_none() && gap > r + tol {
                violation = Some(*t);
            }
        }
        let at_one = (end >= 1.0).then(|| x.at(1.0));
        runs.push(json!({
            "slices_per_unit_time": n,
            "slices": slices,
            "state_at_1": at_one.as_ref().map(vec_of),
            "gap_at_1": at_one.as_ref().map(|x1| (x1 - z.at(1.0)).norm()),
            "first_violation": violation,
            "worst_ratio": worst_ratio,
        }));
        if first.is_none() {
            first = Some((x, u));
        }
    }
    let (x, u) = first.expect("at least one slice count");
    let gaps = gap_rows(&z, &x, &radius)?;
    let result = json!({
        "initial_state": vec_of(&xi),
        "scan_end": end,
        "tolerance": tol,
        "runs": runs,
    });
    Ok(Artifacts {
        trajectory: Some((x, Columns::Switching(u))),
        reference: Some((z, Columns::Relaxed(lambda))),
        gaps: Some(gaps),
        result,
    })
}

fn completeness(s: &Scenario, field: &PolytopicField, options: &RunOptions) -> Result<Artifacts> {
    let spec = s.completeness.clone().unwrap_or(CompletenessSpec {
        starts: None,
        t_max: s.horizon,
        trials: 20,
        switch_interval: 0.01,
    });
    let starts: Vec<State> = match &spec.starts {
        Some(list) => list.iter().map(|v| State::from_column_slice(v)).collect(),
        None => vec![s.initial()],
    };
    let probe = ProbeOptions {
        seed: s.seed,
        switch_interval: spec.switch_interval,
        jobs: options.jobs,
    };
    let report = completeness_probe(field, &starts, spec.t_max, spec.trials, s.step, s.escape_threshold(), &probe)?;
    Ok(Artifacts {
        result: serde_json::to_value(report)?,
        ..Artifacts::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcommand_names_round_trip() {
        for c in Subcommand::ALL {
            assert_eq!(c.name().parse::<Subcommand>().unwrap(), c);
        }
        assert!("relaxx".parse::<Subcommand>().is_err());
    }

    #[test]
    fn overrides_apply() {
        let s = builtins::counterexample();
        let opts = RunOptions {
            seed: Some(7),
            step: Some(0.01),
            jobs: None,
        };
        let e = effective_scenario(&s, &opts).unwrap();
        assert_eq!((e.seed, e.step), (7, 0.01));
        let bad = RunOptions {
            step: Some(-1.0),
            ..RunOptions::default()
        };
        assert!(effective_scenario(&s, &bad).is_err());
    }

    #[test]
    fn loads_builtins_by_name() {
        assert_eq!(load_scenario("builtin:escape-pair").unwrap().name, "escape-pair");
        assert!(load_scenario("builtin:missing").is_err());
        assert!(matches!(load_scenario("/nonexistent/scenario.json"), Err(Error::Io(_))));
    }

    #[test]
    fn zero_field_simulates_constant() {
        let s = Scenario::from_json(
            r#"{"name": "zero", "dimension": 2, "vertices": [["0", "0"]],
                "initial_state": [1, 2], "horizon": 1, "step": 0.1}"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m = run_scenario(&s, Subcommand::Simulate, dir.path(), &RunOptions::default()).unwrap();
        assert_eq!(m["result"]["final_state"], json!([1.0, 2.0]));
        let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        assert!(text.lines().skip(1).all(|l| l.contains(",1.0000000000000000e0,2.0000000000000000e0,")));
        assert!(!dir.path().join("gaps.csv").exists());
    }

    #[test]
    fn list_builtins_names_all() {
        let names: Vec<String> = list_builtins()
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v["name"].as_str().unwrap().to_string())
            .collect();
        assert_eq!(names, ["counterexample", "escape-pair", "complete-pair", "linear-gronwall"]);
    }
}
