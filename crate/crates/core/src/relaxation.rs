//! Chattering approximation of relaxed trajectories and the tube-selection
//! family built on it.
//!
//! A relaxed control plays convex combinations of vertices. Its chattered
//! counterpart cuts the interval into `N` equal slices and, inside each one,
//! plays every vertex in turn for a share of the slice equal to its weight at
//! the slice midpoint. For Lipschitz fields the sup distance between the two
//! trajectories is `O(1/N)`, so doubling `N` reaches any positive target.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{integrate_switching, reuse_control, sup_gap, tol_int, Control, RelaxedControl, SwitchingSignal};
use crate::setvalued::{BoundsEstimate, BoundsStrategy, PolytopicField};
use crate::trajectory::{State, Trajectory};

pub const DEFAULT_MAX_SLICES: usize = 1 << 20;

/// Per-vertex time allocation inside one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceAllocation {
    pub start: f64,
    pub width: f64,
    /// Durations in play order, as `(vertex, duration)`.
    pub durations: Vec<(usize, f64)>,
}

/// Uniform slicing of a relaxed control into vertex time shares.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatterPlan {
    pub slices: Vec<SliceAllocation>,
}

impl ChatterPlan {
    /// `order` lists the vertices in play order; `None` means `0, 1, ..., m-1`.
    pub fn build(control: &RelaxedControl, slices: usize, order: Option<&[usize]>) -> Result<Self> {
        if slices == 0 {
            return Err(Error::invalid("slice count must be positive"));
        }
        let m = control.vertex_count();
        let default_order: Vec<usize> = (0..m).collect();
        let order = order.unwrap_or(&default_order);
        let mut seen = vec![false; m];
        for &i in order {
            if i >= m || seen[i] {
                return Err(Error::invalid(format!("vertex order {order:?} is not a permutation of 0..{m}")));
            }
            seen[i] = true;
        }
        if order.len() != m {
            return Err(Error::invalid(format!("vertex order {order:?} is not a permutation of 0..{m}")));
        }

        let (a, b) = control.span();
        let edge = |j: usize| if j == slices { b } else { a + (b - a) * j as f64 / slices as f64 };
        let slices = (0..slices)
            .map(|j| {
                let (start, end) = (edge(j), edge(j + 1));
                let width = end - start;
                let weights = control.weights_at(0.5 * (start + end));
                SliceAllocation {
                    start,
                    width,
                    durations: order.iter().map(|&i| (i, width * weights[i])).collect(),
                }
            })
            .collect();
        Ok(ChatterPlan { slices })
    }

    /// The switching signal playing this plan; zero-length pieces are dropped
    /// and consecutive pieces on the same vertex merged.
    pub fn to_signal(&self) -> Result<SwitchingSignal> {
        let mut breakpoints = vec![self.slices[0].start];
        let mut indices: Vec<usize> = Vec::new();
        for slice in &self.slices {
            let end = slice.start + slice.width;
            let mut cursor = slice.start;
            let last_positive = slice.durations.iter().rposition(|&(_, d)| d > 0.0);
            for (pos, &(vertex, duration)) in slice.durations.iter().enumerate() {
                if duration <= 0.0 {
                    continue;
                }
                let stop = if Some(pos) == last_positive { end } else { (cursor + duration).min(end) };
                if !(stop > cursor) {
                    continue;
                }
                if indices.last() == Some(&vertex) {
                    *breakpoints.last_mut().unwrap() = stop;
                } else {
                    indices.push(vertex);
                    breakpoints.push(stop);
                }
                cursor = stop;
            }
        }
        SwitchingSignal::new(breakpoints, indices)
    }
}

/// Time-sliced chattering of `control` into a switching signal.
pub fn chatter_control(control: &RelaxedControl, slices: usize, order: Option<&[usize]>) -> Result<SwitchingSignal> {
    ChatterPlan::build(control, slices, order)?.to_signal()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatterOptions {
    pub max_slices: usize,
    pub order: Option<Vec<usize>>,
}

impl Default for ChatterOptions {
    fn default() -> Self {
        ChatterOptions {
            max_slices: DEFAULT_MAX_SLICES,
            order: None,
        }
    }
}

/// A trajectory of the original inclusion shadowing a relaxed one from the
/// same initial state.
#[derive(Debug, Clone)]
pub struct Approximation {
    pub signal: SwitchingSignal,
    pub trajectory: Trajectory,
    pub slices: usize,
    pub sup_gap: f64,
}

/// Doubles the slice count from 1 until the chattered trajectory started at
/// `z(0)` stays within `epsilon - tol_int` of `z`.
pub fn fw_approximate(
    field: &PolytopicField,
    reference: &Trajectory,
    control: &RelaxedControl,
    epsilon: f64,
    step: f64,
    options: &ChatterOptions,
) -> Result<Approximation> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let span = (reference.start_time(), reference.end_time());
    let control = if control.span() == span {
        control.clone()
    } else {
        control.restrict(span.0, span.1)?
    };
    let target = epsilon - tol_int(step, span.1 - span.0);
    let mut best = f64::INFINITY;
    let mut slices = 1;
    while slices <= options.max_slices {
        let signal = chatter_control(&control, slices, options.order.as_deref())?;
        let trajectory = integrate_switching(field, &signal, reference.initial_state(), span, step)?;
        let (gap, _) = sup_gap(reference, &trajectory)?;
        if gap <= target {
            return Ok(Approximation {
                signal,
                trajectory,
                slices,
                sup_gap: gap,
            });
        }
        best = best.min(gap);
        slices *= 2;
    }
    Err(Error::ChatterNotConverged {
        target: epsilon,
        max_slices: options.max_slices,
        best_gap: best,
    })
}

/// `epsilon / (4 exp(k_integral))`: the start-ball radius whose Gronwall
/// growth over the interval stays below a quarter of `epsilon`.
pub fn selection_radius(epsilon: f64, k_integral: f64) -> f64 {
    epsilon / (4.0 * k_integral.exp())
}

#[derive(Debug, Clone)]
pub struct SelectionOptions {
    pub chatter: ChatterOptions,
    pub bounds: BoundsStrategy,
    /// Probe the ball after construction and shrink it on a tube exit.
    pub verify: bool,
    pub max_halvings: usize,
    /// Upper limit applied to the computed radius.
    pub radius_cap: Option<f64>,
}

impl SelectionOptions {
    pub fn new(bounds: BoundsStrategy) -> Self {
        SelectionOptions {
            chatter: ChatterOptions::default(),
            bounds,
            verify: true,
            max_halvings: 10,
            radius_cap: None,
        }
    }
}

/// Post-hoc containment check of a selection family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    pub probes: usize,
    pub worst_gap: f64,
    pub worst_time: f64,
    pub halvings: usize,
}

/// Starts in `B(center, radius)` all driven by one base switching signal.
#[derive(Debug, Clone)]
pub struct SelectionFamily {
    pub center: State,
    pub radius: f64,
    pub epsilon: f64,
    pub span: (f64, f64),
    pub base_signal: SwitchingSignal,
    pub base_trajectory: Trajectory,
    pub slices: usize,
    pub chatter_gap: f64,
    pub bounds: BoundsEstimate,
    /// `alpha + k0`: Lipschitz rate of the truncated field.
    pub lipschitz: f64,
    pub verification: Option<Verification>,
}

impl SelectionFamily {
    /// The family member started at `eta`; `eta` must lie in the ball.
    pub fn member(&self, field: &PolytopicField, eta: &State, step: f64) -> Result<Trajectory> {
        let offset = (eta - &self.center).norm();
        if offset > self.radius * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "start is {offset} from the family centre, radius is {}",
                self.radius
            )));
        }
        reuse_control(field, &self.base_trajectory, &self.base_signal, eta, step)
    }

    /// Integrates the centre and the `2n` axis points `center +- radius e_i`
    /// and returns the worst time-sliced gap to `reference`.
    fn probe(&self, field: &PolytopicField, reference: &Trajectory, step: f64) -> Result<(usize, f64, f64)> {
        let n = self.center.len();
        let mut starts = vec![self.center.clone()];
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut eta = self.center.clone();
                eta[i] += sign * self.radius;
                starts.push(eta);
            }
        }
        let mut worst = (0.0, self.span.0);
        for eta in &starts {
            let member = reuse_control(field, &self.base_trajectory, &self.base_signal, eta, step)?;
            let (gap, t) = sup_gap(reference, &member)?;
            if gap > worst.0 {
                worst = (gap, t);
            }
        }
        Ok((starts.len(), worst.0, worst.1))
    }
}

/// Builds the family of original-inclusion trajectories that stay in the
/// `epsilon`-tube around the relaxed trajectory `reference`.
///
/// The field constants are taken on `B(0, R)` with `R = max |z| + epsilon + 1`,
/// which contains the unit inflation of the tube where the truncated field
/// lives. The base trajectory chatters to within `epsilon / 2`, and the ball
/// radius is `epsilon / (4 exp((alpha + k0) T))`.
pub fn tube_selection(
    field: &PolytopicField,
    reference: &Trajectory,
    control: &RelaxedControl,
    epsilon: f64,
    step: f64,
    options: &SelectionOptions,
) -> Result<SelectionFamily> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let span = (reference.start_time(), reference.end_time());
    let ball = reference.max_norm() + epsilon + 1.0;
    let bounds = options.bounds.resolve(field, ball, span)?;
    let lipschitz = bounds.value_bound + bounds.lipschitz;
    let approx = fw_approximate(field, reference, control, 0.5 * epsilon, step, &options.chatter)?;
    let mut radius = selection_radius(epsilon, lipschitz * (span.1 - span.0));
    if let Some(cap) = options.radius_cap {
        radius = radius.min(cap);
    }
    let mut family = SelectionFamily {
        center: reference.initial_state().clone(),
        radius,
        epsilon,
        span,
        base_signal: approx.signal,
        base_trajectory: approx.trajectory,
        slices: approx.slices,
        chatter_gap: approx.sup_gap,
        bounds,
        lipschitz,
        verification: None,
    };
    if !options.verify {
        return Ok(family);
    }
    let limit = epsilon + tol_int(step, span.1 - span.0);
    for halvings in 0..=options.max_halvings {
        let (probes, worst_gap, worst_time) = family.probe(field, reference, step)?;
        if worst_gap <= limit {
            family.verification = Some(Verification {
                probes,
                worst_gap,
                worst_time,
                halvings,
            });
            return Ok(family);
        }
        if halvings == options.max_halvings {
            return Err(Error::TubeExit {
                t: worst_time,
                gap: worst_gap,
                radius: epsilon,
            });
        }
        family.radius *= 0.5;
    }
    unreachable!()
}
