//! Fixed-step RK4 integration of the original and relaxed inclusions.
//!
//! Controls are piecewise constant. Every control breakpoint is inserted into
//! the integration grid, so each RK4 step sees a single vertex (or a single
//! weight vector) and the smooth-piece order of the method is preserved.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::setvalued::{BoundsEstimate, PolytopicField};
use crate::trajectory::{merge_grids, State, Trajectory};

/// Integration error budget added to theoretical bounds when they are
/// checked numerically: `100 h^4` per unit time.
pub fn tol_int(step: f64, duration: f64) -> f64 {
    100.0 * step.powi(4) * duration.abs().max(1.0)
}

/// A piecewise-constant control: the breakpoints and a per-piece rule for
/// turning the field's vertices into a velocity.
pub trait Control {
    /// `b_0 < b_1 < ... < b_p`; piece `j` is `[b_j, b_{j+1})`.
    fn breakpoints(&self) -> &[f64];

    /// Velocity on piece `piece` at `(t, x)`.
    fn velocity_into(
        &self,
        field: &PolytopicField,
        piece: usize,
        t: f64,
        x: &[f64],
        scratch: &mut [f64],
        out: &mut [f64],
    ) -> Result<()>;

    fn span(&self) -> (f64, f64) {
        let b = self.breakpoints();
        (b[0], b[b.len() - 1])
    }

    /// Index of the piece containing `t` (last piece for `t` at the end).
    fn piece_at(&self, t: f64) -> usize {
        let b = self.breakpoints();
        let pieces = b.len() - 1;
        b.partition_point(|&s| s <= t).saturating_sub(1).min(pieces - 1)
    }

    fn check_field(&self, field: &PolytopicField) -> Result<()>;
}

fn check_breakpoints(breakpoints: &[f64]) -> Result<()> {
    if breakpoints.len() < 2 {
        return Err(Error::invalid("a control needs at least two breakpoints"));
    }
    if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("control breakpoints must be finite and strictly increasing"));
    }
    Ok(())
}

/// Piecewise-constant vertex selection. Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSignal {
    breakpoints: Vec<f64>,
    indices: Vec<usize>,
}

impl SwitchingSignal {
    pub fn new(breakpoints: Vec<f64>, indices: Vec<usize>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        if indices.len() + 1 != breakpoints.len() {
            return Err(Error::invalid(format!(
                "{} breakpoints need {} indices, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                indices.len()
            )));
        }
        Ok(SwitchingSignal { breakpoints, indices })
    }

    pub fn constant(index: usize, span: (f64, f64)) -> Result<Self> {
        SwitchingSignal::new(vec![span.0, span.1], vec![index])
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn index_at(&self, t: f64) -> usize {
        self.indices[self.piece_at(t)]
    }

    /// Signal driving `s -> x(pivot - s)` when this one drives `x`.
    pub fn reflected(&self, pivot: f64) -> Self {
        SwitchingSignal {
            breakpoints: self.breakpoints.iter().rev().map(|b| pivot - b).collect(),
            indices: self.indices.iter().rev().copied().collect(),
        }
    }

    /// Concatenates `next`, which must start where this one ends.
    pub fn append(&mut self, next: &SwitchingSignal) -> Result<()> {
        let seam = *self.breakpoints.last().unwrap();
        if (next.breakpoints[0] - seam).abs() > 1e-9 * seam.abs().max(1.0) {
            return Err(Error::invalid("switching signals do not meet"));
        }
        self.breakpoints.extend_from_slice(&next.breakpoints[1..]);
        self.indices.extend_from_slice(&next.indices);
        Ok(())
    }

    /// Number of vertex changes.
    pub fn switch_count(&self) -> usize {
        self.indices.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

impl Control for SwitchingSignal {
    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn velocity_into(
        &self,
        field: &PolytopicField,
        piece: usize,
        t: f64,
        x: &[f64],
        _scratch: &mut [f64],
        out: &mut [f64],
    ) -> Result<()> {
        field.eval_vertex_into(self.indices[piece], t, x, out)
    }

    fn check_field(&self, field: &PolytopicField) -> Result<()> {
        match self.indices.iter().find(|&&i| i >= field.vertex_count()) {
            Some(i) => Err(Error::invalid(format!(
                "vertex index {} out of range for a field with {} vertices",
                i + 1,
                field.vertex_count()
            ))),
            None => Ok(()),
        }
    }
}

/// Piecewise-constant simplex weights over the vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedControl {
    breakpoints: Vec<f64>,
    weights: Vec<Vec<f64>>,
}

const SIMPLEX_TOL: f64 = 1e-12;

impl RelaxedControl {
    pub fn new(breakpoints: Vec<f64>, weights: Vec<Vec<f64>>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        if weights.len() + 1 != breakpoints.len() {
            return Err(Error::invalid(format!(
                "{} breakpoints need {} weight vectors, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                weights.len()
            )));
        }
        let m = weights[0].len();
        for w in &weights {
            if w.len() != m || m == 0 {
                return Err(Error::invalid("weight vectors must share a positive length"));
            }
            let sum: f64 = w.iter().sum();
            if w.iter().any(|&l| !(l >= 0.0)) || (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::invalid(format!("weights {w:?} are not on the unit simplex")));
            }
        }
        Ok(RelaxedControl { breakpoints, weights })
    }

    pub fn constant(weights: Vec<f64>, span: (f64, f64)) -> Result<Self> {
        RelaxedControl::new(vec![span.0, span.1], vec![weights])
    }

    /// All weight on vertex `index` out of `m`.
    pub fn vertex(index: usize, m: usize, span: (f64, f64)) -> Result<Self> {
        let mut w = vec![0.0; m];
        w[index] = 1.0;
        RelaxedControl::constant(w, span)
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn vertex_count(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weights_at(&self, t: f64) -> &[f64] {
        &self.weights[self.piece_at(t)]
    }

    pub fn reflected(&self, pivot: f64) -> Self {
        RelaxedControl {
            breakpoints: self.breakpoints.iter().rev().map(|b| pivot - b).collect(),
            weights: self.weights.iter().rev().cloned().collect(),
        }
    }

    /// Restriction to `[a, b]`.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        let (lo, hi) = self.span();
        if a < lo - 1e-12 || b > hi + 1e-12 || !(b > a) {
            return Err(Error::invalid(format!("cannot restrict [{lo}, {hi}] to [{a}, {b}]")));
        }
        let mut breakpoints = vec![a];
        breakpoints.extend(self.breakpoints.iter().copied().filter(|&t| t > a && t < b));
        breakpoints.push(b);
        let weights = breakpoints
            .windows(2)
            .map(|w| self.weights_at(0.5 * (w[0] + w[1])).to_vec())
            .collect();
        Ok(RelaxedControl { breakpoints, weights })
    }
}

impl Control for RelaxedControl {
    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn velocity_into(
        &self,
        field: &PolytopicField,
        piece: usize,
        t: f64,
        x: &[f64],
        scratch: &mut [f64],
        out: &mut [f64],
    ) -> Result<()> {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, &w) in self.weights[piece].iter().enumerate() {
            // zero weights are skipped so a degenerate control reproduces the
            // pure vertex field exactly
            if w == 0.0 {
                continue;
            }
            field.eval_vertex_into(i, t, x, scratch)?;
            if w == 1.0 {
                out.copy_from_slice(scratch);
            } else {
                out.iter_mut().zip(scratch.iter()).for_each(|(o, s)| *o += w * s);
            }
        }
        Ok(())
    }

    fn check_field(&self, field: &PolytopicField) -> Result<()> {
        if self.vertex_count() != field.vertex_count() {
            return Err(Error::invalid(format!(
                "relaxed control has {} weights, field has {} vertices",
                self.vertex_count(),
                field.vertex_count()
            )));
        }
        Ok(())
    }
}

/// Uniform `step` grid over `span` merged with the interior `breakpoints`.
///
/// Uniform nodes that would leave a sliver shorter than `1e-6 step` next to
/// a breakpoint are dropped; breakpoints always survive.
pub fn build_grid(span: (f64, f64), step: f64, breakpoints: &[f64]) -> Result<Vec<f64>> {
    let (a, b) = span;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid(format!("step must be positive, got {step}")));
    }
    if !(b > a) {
        return Err(Error::invalid(format!("empty time span [{a}, {b}]")));
    }
    let n = ((b - a) / step - 1e-9).ceil().max(1.0) as usize;
    let uniform: Vec<f64> = (0..n).map(|i| a + i as f64 * step).chain(std::iter::once(b)).collect();
    let interior: Vec<f64> = breakpoints.iter().copied().filter(|&t| t > a && t < b).collect();
    let sliver = 1e-6 * step;
    let uniform: Vec<f64> = uniform
        .into_iter()
        .filter(|&u| {
            u == a || u == b || {
                let k = interior.partition_point(|&s| s < u);
                let near = |i: Option<&f64>| i.is_some_and(|&s| (s - u).abs() < sliver && s != u);
                !(near(interior.get(k)) || near(k.checked_sub(1).and_then(|k| interior.get(k))))
            }
        })
        .collect();
    Ok(merge_grids(&uniform, &interior))
}

/// Result of a raw integration run.
#[derive(Debug, Clone)]
pub(crate) struct RunOutcome {
    pub trajectory: Trajectory,
    /// Grid time at which `|x| > threshold` (or a non-finite state) was first seen.
    pub stopped_at: Option<f64>,
}

pub(crate) fn run<C: Control + ?Sized>(
    field: &PolytopicField,
    control: &C,
    x0: &State,
    span: (f64, f64),
    step: f64,
    threshold: Option<f64>,
) -> Result<RunOutcome> {
    control.check_field(field)?;
    let n = field.dimension();
    if x0.len() != n {
        return Err(Error::invalid(format!(
            "initial state has dimension {}, field has {n}",
            x0.len()
        )));
    }
    let (c0, c1) = control.span();
    let slack = 1e-9 * (c1 - c0).abs().max(1.0);
    if span.0 < c0 - slack || span.1 > c1 + slack {
        return Err(Error::invalid(format!(
            "control covers [{c0}, {c1}] but integration span is [{}, {}]",
            span.0, span.1
        )));
    }
    let grid = build_grid(span, step, control.breakpoints())?;

    let mut x = x0.as_slice().to_vec();
    let mut k = vec![vec![0.0; n]; 4];
    let mut tmp = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut states = Vec::with_capacity(grid.len());
    states.push(x0.clone());
    let mut stopped_at = None;

    for (i, w) in grid.windows(2).enumerate() {
        let (t, t_next) = (w[0], w[1]);
        let h = t_next - t;
        let piece = control.piece_at(0.5 * (t + t_next));
        let mut eval = |tt: f64, xx: &[f64], out: &mut [f64]| {
            control.velocity_into(field, piece, tt, xx, &mut scratch, out)
        };
        eval(t, &x, &mut k[0])?;
        for j in 0..n {
            tmp[j] = x[j] + 0.5 * h * k[0][j];
        }
        eval(t + 0.5 * h, &tmp, &mut k[1])?;
        for j in 0..n {
            tmp[j] = x[j] + 0.5 * h * k[1][j];
        }
        eval(t + 0.5 * h, &tmp, &mut k[2])?;
        for j in 0..n {
            tmp[j] = x[j] + h * k[2][j];
        }
        eval(t_next, &tmp, &mut k[3])?;
        for j in 0..n {
            x[j] += h / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
        }
        states.push(DVector::from_column_slice(&x));

        let finite = x.iter().all(|v| v.is_finite());
        let escaped = match threshold {
            Some(m) => !finite || x.iter().map(|v| v * v).sum::<f64>().sqrt() > m,
            None => !finite,
        };
        if escaped {
            if threshold.is_none() {
                return Err(Error::NonFinite { t: t_next });
            }
            stopped_at = Some(t_next);
            let times = grid[..i + 2].to_vec();
            return Ok(RunOutcome {
                trajectory: Trajectory::from_parts_unchecked(times, states),
                stopped_at,
            });
        }
    }
    Ok(RunOutcome {
        trajectory: Trajectory::from_parts_unchecked(grid, states),
        stopped_at,
    })
}

/// RK4 solution of `x' = f_{u(t)}(t, x)` on `span`.
pub fn integrate_switching(
    field: &PolytopicField,
    signal: &SwitchingSignal,
    x0: &State,
    span: (f64, f64),
    step: f64,
) -> Result<Trajectory> {
    Ok(run(field, signal, x0, span, step, None)?.trajectory)
}

/// RK4 solution of `x' = sum_i lambda_i(t) f_i(t, x)` on `span`.
pub fn integrate_relaxed(
    field: &PolytopicField,
    control: &RelaxedControl,
    x0: &State,
    span: (f64, f64),
    step: f64,
) -> Result<Trajectory> {
    Ok(run(field, control, x0, span, step, None)?.trajectory)
}

fn check_same_span(a: &Trajectory, b: &Trajectory) -> Result<()> {
    let scale = a.end_time().abs().max(1.0);
    if (a.start_time() - b.start_time()).abs() > 1e-9 * scale || (a.end_time() - b.end_time()).abs() > 1e-9 * scale {
        return Err(Error::SpanMismatch {
            a0: a.start_time(),
            a1: a.end_time(),
            b0: b.start_time(),
            b1: b.end_time(),
        });
    }
    Ok(())
}

/// Discrete AC-norm distance `|a(t0) - b(t0)| + sum |da - db|` on the union grid.
pub fn ac_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_same_span(a, b)?;
    let grid = merge_grids(a.times(), b.times());
    let diffs: Vec<State> = grid.iter().map(|&t| a.at(t) - b.at(t)).collect();
    let variation: f64 = diffs.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum();
    Ok(diffs[0].norm() + variation)
}

/// `sup_t |a(t) - b(t)|` over the union grid, with the time where it occurs.
pub fn sup_gap(a: &Trajectory, b: &Trajectory) -> Result<(f64, f64)> {
    check_same_span(a, b)?;
    let grid = merge_grids(a.times(), b.times());
    Ok(grid
        .iter()
        .map(|&t| ((a.at(t) - b.at(t)).norm(), t))
        .fold((0.0, a.start_time()), |acc, g| if g.0 > acc.0 { g } else { acc }))
}

/// `(eps0 + initial_gap) * exp(k_integral)`.
pub fn gronwall_bound(eps0: f64, initial_gap: f64, k_integral: f64) -> f64 {
    (eps0 + initial_gap) * k_integral.exp()
}

/// Integrates the reference's own switching signal from `eta`.
///
/// This is the constructive selection `eta -> x(., eta)`: one control shared
/// by every start, so the family is continuous in `eta` and separates from
/// the reference no faster than the Gronwall bound.
pub fn reuse_control(
    field: &PolytopicField,
    reference: &Trajectory,
    signal: &SwitchingSignal,
    eta: &State,
    step: f64,
) -> Result<Trajectory> {
    integrate_switching(field, signal, eta, (reference.start_time(), reference.end_time()), step)
}

/// Outcome of checking a reused-control member against the Gronwall bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GronwallCheck {
    /// `min_t (bound(t) - gap(t))`; nonnegative when the contract holds.
    pub worst_slack: f64,
    pub worst_time: f64,
    pub holds: bool,
}

/// Checks `|ref(t) - member(t)| <= gronwall_bound(tol_int, |xi0 - eta|, k (t - t0))`
/// at every grid point of `member`.
///
/// Fails with [`Error::BallExit`] if either curve leaves `B(0, R)` of the
/// bounds used, because `k` is only valid inside that ball.
pub fn check_gronwall(
    reference: &Trajectory,
    member: &Trajectory,
    bounds: &BoundsEstimate,
    step: f64,
) -> Result<GronwallCheck> {
    check_same_span(reference, member)?;
    for tr in [reference, member] {
        for (t, s) in tr.times().iter().zip(tr.states()) {
            let norm = s.norm();
            if norm > bounds.ball_radius {
                return Err(Error::BallExit {
                    radius: bounds.ball_radius,
                    norm,
                    t: *t,
                });
            }
        }
    }
    let t0 = reference.start_time();
    let initial_gap = (reference.initial_state() - member.initial_state()).norm();
    let tol = tol_int(step, reference.end_time() - t0);
    let mut worst = (f64::INFINITY, t0);
    for (t, s) in member.times().iter().zip(member.states()) {
        let gap = (reference.at(*t) - s).norm();
        let slack = gronwall_bound(tol, initial_gap, bounds.lipschitz * (t - t0)) - gap;
        if slack < worst.0 {
            worst = (slack, *t);
        }
    }
    Ok(GronwallCheck {
        worst_slack: worst.0,
        worst_time: worst.1,
        holds: worst.0 >= 0.0,
    })
}

/// Norm-threshold escape report. A crossing is a declared escape, not a proof.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeReport {
    pub escaped: bool,
    pub escape_time: Option<f64>,
    pub norm_threshold: f64,
}

pub const DEFAULT_ESCAPE_THRESHOLD: f64 = 1e9;

/// Integrates until `t_max` or until `|x(t)| > threshold`.
pub fn detect_escape<C: Control + ?Sized>(
    field: &PolytopicField,
    control: &C,
    x0: &State,
    t_max: f64,
    step: f64,
    threshold: f64,
) -> Result<EscapeReport> {
    if !(threshold > 0.0) {
        return Err(Error::invalid("escape threshold must be positive"));
    }
    let t0 = control.span().0;
    let outcome = run(field, control, x0, (t0, t_max), step, Some(threshold))?;
    Ok(EscapeReport {
        escaped: outcome.stopped_at.is_some(),
        escape_time: outcome.stopped_at,
        norm_threshold: threshold,
    })
}
