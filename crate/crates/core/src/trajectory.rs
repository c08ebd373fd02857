//! Sampled trajectories with piecewise-linear interpolation.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// A point in state space.
pub type State = DVector<f64>;

/// A curve sampled on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<State>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<State>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::invalid(format!(
                "trajectory needs matching non-empty grids ({} times, {} states)",
                times.len(),
                states.len()
            )));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(format!(
                "trajectory grid not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        let n = states[0].len();
        if states.iter().any(|s| s.len() != n) {
            return Err(Error::invalid("trajectory states have mixed dimensions"));
        }
        Ok(Trajectory { times, states })
    }

    pub(crate) fn from_parts_unchecked(times: Vec<f64>, states: Vec<State>) -> Self {
        debug_assert_eq!(times.len(), states.len());
        Trajectory { times, states }
    }

    /// The curve that sits at `state` on every point of `times`.
    pub fn constant(times: Vec<f64>, state: State) -> Result<Self> {
        let states = vec![state; times.len()];
        Trajectory::new(times, states)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.states[0].len()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn initial_state(&self) -> &State {
        &self.states[0]
    }

    pub fn final_state(&self) -> &State {
        self.states.last().unwrap()
    }

    /// Linear interpolation; times outside the grid clamp to the end states.
    pub fn at(&self, t: f64) -> State {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.times[last] {
            return self.states[last].clone();
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        if t == t0 {
            return self.states[i].clone();
        }
        let w = (t - t0) / (t1 - t0);
        &self.states[i] * (1.0 - w) + &self.states[i + 1] * w
    }

    /// Largest Euclidean norm over the samples.
    pub fn max_norm(&self) -> f64 {
        self.states.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Restriction to `[a, b]`, with interpolated end samples.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::invalid(format!("empty restriction [{a}, {b}]")));
        }
        let mut times = vec![a];
        let mut states = vec![self.at(a)];
        for (t, s) in self.times.iter().zip(&self.states) {
            if *t > a && *t < b {
                times.push(*t);
                states.push(s.clone());
            }
        }
        times.push(b);
        states.push(self.at(b));
        Trajectory::new(times, states)
    }

    /// The curve `s -> self(pivot - s)`, sampled on the mirrored grid.
    pub fn reflected(&self, pivot: f64) -> Self {
        let times = self.times.iter().rev().map(|t| pivot - t).collect();
        let states = self.states.iter().rev().cloned().collect();
        Trajectory { times, states }
    }

    /// Same samples, grid moved by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Trajectory {
            times: self.times.iter().map(|t| t + dt).collect(),
            states: self.states.clone(),
        }
    }

    /// Appends `next`, whose first sample must coincide with this curve's last one.
    ///
    /// The shared seam sample is kept once (the one already stored).
    pub fn append(&mut self, next: &Trajectory) -> Result<()> {
        let seam = self.end_time();
        if (next.start_time() - seam).abs() > 1e-9 * seam.abs().max(1.0) {
            return Err(Error::invalid(format!(
                "cannot append trajectory starting at {} to one ending at {seam}",
                next.start_time()
            )));
        }
        for (t, s) in next.times.iter().zip(&next.states).skip(1) {
            self.times.push(*t);
            self.states.push(s.clone());
        }
        Ok(())
    }
}

/// Sorted union of two grids; values equal in floating point are merged.
pub(crate) fn merge_grids(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), Some(&y)) if y < x => {
                j += 1;
                y
            }
            (Some(&x), Some(_)) => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}
