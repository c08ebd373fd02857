//! Scenario files: one JSON document per run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{RelaxedControl, SwitchingSignal, DEFAULT_ESCAPE_THRESHOLD};
use crate::relaxation::DEFAULT_MAX_SLICES;
use crate::setvalued::{AnalyticBounds, BoundsStrategy, PolytopicField, Radius};
use crate::trajectory::State;

/// Bound samples drawn when a scenario does not supply analytic bounds.
pub const DEFAULT_BOUND_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub dimension: usize,
    /// One list of `dimension` expressions per vertex.
    pub vertices: Vec<Vec<String>>,
    pub initial_state: Vec<f64>,
    pub horizon: f64,
    pub step: f64,
    /// Tube radius `r(t)` as an expression in `t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_width: Option<f64>,
    /// Constant tube radius for `chatter` and `tube`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxed_control: Option<RelaxedSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switching: Option<SwitchingSpec>,
    /// Offset added to the initial state for reused-control runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escape_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_slices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completeness: Option<CompletenessSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_check: Option<OriginCheckSpec>,
}

/// Piecewise-constant simplex weights. Without breakpoints the single
/// weight vector applies on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxedSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
}

/// Piecewise-constant vertex choice, vertices numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchingSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundsSpec {
    /// Expressions in the ball radius `R`.
    Analytic { lipschitz: String, value_bound: String },
    Sampled { samples: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompletenessSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<Vec<Vec<f64>>>,
    pub t_max: f64,
    pub trials: usize,
    #[serde(default = "default_switch_interval")]
    pub switch_interval: f64,
}

fn default_switch_interval() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginCheckSpec {
    /// Slices per unit time of the chattered controls.
    pub slices: Vec<usize>,
    /// End of the scan for tube violations; defaults to the scenario horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        if n == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if self.initial_state.len() != n {
            return Err(Error::invalid(format!(
                "initial_state has {} entries, dimension is {n}",
                self.initial_state.len()
            )));
        }
        if let Some(p) = &self.perturbation {
            if p.len() != n {
                return Err(Error::invalid(format!("perturbation has {} entries, dimension is {n}", p.len())));
            }
        }
        if !(self.step > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::invalid("step and horizon must be positive"));
        }
        if let Some(c) = &self.completeness {
            for s in c.starts.iter().flatten() {
                if s.len() != n {
                    return Err(Error::invalid("completeness start has the wrong dimension"));
                }
            }
        }
        self.field()?;
        if self.relaxed_control.is_some() {
            self.relaxed_control()?;
        }
        if self.switching.is_some() {
            self.switching()?;
        }
        if let Some(r) = &self.radius {
            Radius::parse(r)?;
        }
        self.bounds_strategy()?;
        Ok(())
    }

    pub fn field(&self) -> Result<PolytopicField> {
        PolytopicField::parse(self.dimension, &self.vertices)
    }

    pub fn initial(&self) -> State {
        State::from_column_slice(&self.initial_state)
    }

    pub fn span(&self) -> (f64, f64) {
        (0.0, self.horizon)
    }

    /// The scenario's relaxed control; uniform weights when none is given.
    pub fn relaxed_control(&self) -> Result<RelaxedControl> {
        let m = self.vertices.len();
        match &self.relaxed_control {
            None => RelaxedControl::constant(vec![1.0 / m as f64; m], self.span()),
            Some(spec) => {
                if spec.weights.iter().any(|w| w.len() != m) {
                    return Err(Error::invalid(format!("relaxed weights need {m} entries per piece")));
                }
                let breakpoints = spec.breakpoints.clone().unwrap_or_else(|| vec![0.0, self.horizon]);
                RelaxedControl::new(breakpoints, spec.weights.clone())
            }
        }
    }

    /// The scenario's switching signal; vertex 1 throughout when none is given.
    pub fn switching(&self) -> Result<SwitchingSignal> {
        let m = self.vertices.len();
        match &self.switching {
            None => SwitchingSignal::constant(0, self.span()),
            Some(spec) => {
                if let Some(&bad) = spec.indices.iter().find(|&&i| i == 0 || i > m) {
                    return Err(Error::invalid(format!("switching index {bad} outside 1..={m}")));
                }
                let breakpoints = spec.breakpoints.clone().unwrap_or_else(|| vec![0.0, self.horizon]);
                SwitchingSignal::new(breakpoints, spec.indices.iter().map(|i| i - 1).collect())
            }
        }
    }

    pub fn radius(&self) -> Result<Radius> {
        match (&self.radius, self.epsilon) {
            (Some(r), _) => Radius::parse(r),
            (None, Some(eps)) => Ok(Radius::Constant(eps)),
            (None, None) => Err(Error::invalid("scenario defines neither radius nor epsilon")),
        }
    }

    pub fn epsilon(&self) -> Result<f64> {
        self.epsilon
            .ok_or_else(|| Error::invalid("scenario does not define epsilon"))
    }

    pub fn bounds_strategy(&self) -> Result<BoundsStrategy> {
        Ok(match &self.bounds {
            Some(BoundsSpec::Analytic { lipschitz, value_bound }) => {
                BoundsStrategy::Analytic(AnalyticBounds::parse(lipschitz, value_bound)?)
            }
            Some(BoundsSpec::Sampled { samples }) => BoundsStrategy::Sampled {
                samples: *samples,
                seed: self.seed,
            },
            None => BoundsStrategy::Sampled {
                samples: DEFAULT_BOUND_SAMPLES,
                seed: self.seed,
            },
        })
    }

    pub fn escape_threshold(&self) -> f64 {
        self.escape_threshold.unwrap_or(DEFAULT_ESCAPE_THRESHOLD)
    }

    pub fn max_slices(&self) -> usize {
        self.max_slices.unwrap_or(DEFAULT_MAX_SLICES)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "zero",
        "dimension": 2,
        "vertices": [["0", "0"]],
        "initial_state": [1, 2],
        "horizon": 1,
        "step": 0.01
    }"#;

    #[test]
    fn minimal_scenario_defaults() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.seed, 0);
        assert_eq!(s.switching().unwrap().indices(), &[0]);
        assert_eq!(s.relaxed_control().unwrap().weights(), &[vec![1.0]]);
        assert!(matches!(s.bounds_strategy().unwrap(), BoundsStrategy::Sampled { samples: 4096, .. }));
        assert!(s.radius().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_scenarios() {
        let unknown = MINIMAL.replace("\"step\"", "\"stepp\": 1, \"step\"");
        assert!(matches!(Scenario::from_json(&unknown), Err(Error::Json(_))));
        let dim = MINIMAL.replace("[1, 2]", "[1]");
        assert!(Scenario::from_json(&dim).is_err());
        let expr = MINIMAL.replace("[[\"0\", \"0\"]]", "[[\"x3\", \"0\"]]");
        assert!(matches!(Scenario::from_json(&expr), Err(Error::Parse(_))));
        let index = MINIMAL.replace("\"step\"", "\"switching\": {\"indices\": [2]}, \"step\"");
        assert!(Scenario::from_json(&index).is_err());
        let weights = MINIMAL.replace("\"step\"", "\"relaxed_control\": {\"weights\": [[0.7]]}, \"step\"");
        assert!(Scenario::from_json(&weights).is_err());
    }

    #[test]
    fn switching_indices_are_one_based() {
        let src = MINIMAL
            .replace("[[\"0\", \"0\"]]", "[[\"0\", \"0\"], [\"1\", \"1\"]]")
            .replace("\"step\"", "\"switching\": {\"breakpoints\": [0, 0.5, 1], \"indices\": [2, 1]}, \"step\"");
        let s = Scenario::from_json(&src).unwrap();
        assert_eq!(s.switching().unwrap().indices(), &[1, 0]);
    }
}
