//! Scenarios shipped with the binary, addressed as `builtin:NAME`.

use super::scenario::{BoundsSpec, CompletenessSpec, OriginCheckSpec, RelaxedSpec, Scenario};

fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

fn base(name: &str, description: &str, dimension: usize, vertices: &[&[&str]], initial: Vec<f64>) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        dimension,
        vertices: strings(vertices),
        initial_state: initial,
        horizon: 1.0,
        step: 1e-3,
        radius: None,
        segment_width: None,
        epsilon: None,
        relaxed_control: None,
        switching: None,
        perturbation: None,
        bounds: None,
        seed: 0,
        escape_threshold: None,
        max_slices: None,
        completeness: None,
        origin_check: None,
    }
}

/// `x' = y^2, y' in {-1, 1}` from the origin, relaxed by `lambda = (1/2, 1/2)`
/// so `z = 0`. Trapped in `x^2 + y^2 <= exp(-t)` only from a perturbed start.
pub fn counterexample() -> Scenario {
    Scenario {
        horizon: 5.0,
        radius: Some("exp(-t)".into()),
        segment_width: Some(1.0),
        epsilon: Some(0.1),
        relaxed_control: Some(RelaxedSpec {
            breakpoints: None,
            weights: vec![vec![0.5, 0.5]],
        }),
        bounds: Some(BoundsSpec::Analytic {
            lipschitz: "2*R".into(),
            value_bound: "sqrt(R^4+1)".into(),
        }),
        origin_check: Some(OriginCheckSpec {
            slices: vec![1, 4, 16],
            horizon: Some(8.0),
        }),
        ..base(
            "counterexample",
            "x' = y^2, y' in {-1, 1}; relaxed solution z = 0; tube radius exp(-t)",
            2,
            &[&["x2^2", "-1"], &["x2^2", "1"]],
            vec![0.0, 0.0],
        )
    }
}

/// `{x^2 - 1, x^2 + 1}` from 2: every selection escapes near t = 0.5.
pub fn escape_pair() -> Scenario {
    Scenario {
        horizon: 2.0,
        completeness: Some(CompletenessSpec {
            starts: None,
            t_max: 2.0,
            trials: 20,
            switch_interval: 0.01,
        }),
        ..base(
            "escape-pair",
            "x' in {x^2 - 1, x^2 + 1} from 2; both inclusions escape",
            1,
            &[&["x^2 - 1"], &["x^2 + 1"]],
            vec![2.0],
        )
    }
}

/// `{-x, x}` from 1: `|x(t)| <= e^t`, so no escape by t = 10.
pub fn complete_pair() -> Scenario {
    Scenario {
        horizon: 10.0,
        step: 1e-2,
        bounds: Some(BoundsSpec::Analytic {
            lipschitz: "1".into(),
            value_bound: "R".into(),
        }),
        completeness: Some(CompletenessSpec {
            starts: None,
            t_max: 10.0,
            trials: 20,
            switch_interval: 0.01,
        }),
        ..base(
            "complete-pair",
            "x' in {-x, x} from 1; neither inclusion escapes",
            1,
            &[&["-x"], &["x"]],
            vec![1.0],
        )
    }
}

/// `x' = x` from 1 with the start shifted by 0.1: the reused-control gap is
/// exactly `0.1 e^t`.
pub fn linear_gronwall() -> Scenario {
    Scenario {
        step: 1e-4,
        perturbation: Some(vec![0.1]),
        bounds: Some(BoundsSpec::Analytic {
            lipschitz: "1".into(),
            value_bound: "R".into(),
        }),
        ..base(
            "linear-gronwall",
            "x' = x from 1, perturbed start 1.1; gap 0.1 e^t meets the Gronwall bound",
            1,
            &[&["x"]],
            vec![1.0],
        )
    }
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![counterexample(), escape_pair(), complete_pair(), linear_gronwall()]
}

pub fn builtin(name: &str) -> Option<Scenario> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}
