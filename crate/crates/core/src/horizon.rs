//! Tube-following trajectories on long horizons.
//!
//! Given a relaxed trajectory `z` and a positive radius `r(t)`, the horizon
//! `[0, T_K]` is cut into segments. Each segment is approximated in backward
//! time, starting from the anchor its successor handed down, so the
//! trajectories meet exactly at the segment boundaries. Reversing and gluing
//! the pieces yields a trajectory of the original inclusion that stays in the
//! `r`-tube, started from a perturbed initial state `eta0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{
    detect_escape, reuse_control, tol_int, Control, EscapeReport, RelaxedControl, SwitchingSignal,
};
use crate::relaxation::{tube_selection, SelectionFamily, SelectionOptions};
use crate::setvalued::{PolytopicField, Radius};
use crate::trajectory::{State, Trajectory};

/// Samples per segment used to minimise the radius function.
pub const RADIUS_SAMPLES: usize = 1000;

/// Segment times with the radius minima that drive the construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentPlan {
    /// `T_0 = 0 < T_1 < ... < T_K`.
    pub times: Vec<f64>,
    /// `r_k = min r` on `[T_{k-1}, T_k]`, stored at index `k - 1`.
    pub segment_radii: Vec<f64>,
    /// Cap on the entry-ball radius `delta_k`: `min r` on `[T_k, T_{k+1}]`,
    /// stored at index `k` for `k < K`.
    pub entry_caps: Vec<f64>,
}

impl SegmentPlan {
    pub fn segment_count(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// `[T_{k-1}, T_k]` for `k` in `1..=K`.
    pub fn segment(&self, k: usize) -> (f64, f64) {
        (self.times[k - 1], self.times[k])
    }

    /// Tube radius used for segment `k`: `min(delta_{k-1} cap, r_k)`.
    pub fn segment_epsilon(&self, k: usize) -> f64 {
        self.entry_caps[k - 1].min(self.segment_radii[k - 1])
    }
}

/// Uniform segments of width `width` over `[0, horizon]`; the last segment
/// is shortened to end at the horizon.
pub fn plan_segments(radius: &Radius, horizon: f64, width: f64) -> Result<SegmentPlan> {
    if !(width > 0.0) || !(horizon > 0.0) {
        return Err(Error::invalid(format!(
            "segment width and horizon must be positive (w = {width}, T = {horizon})"
        )));
    }
    let count = ((horizon / width) - 1e-9).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..=count)
        .map(|k| if k == count { horizon } else { k as f64 * width })
        .collect();
    let minima = times
        .windows(2)
        .map(|w| min_on_interval(radius, w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(SegmentPlan {
        times,
        segment_radii: minima.clone(),
        entry_caps: minima,
    })
}

/// Minimum of `r` over `[a, b]`: dense sampling, then golden-section
/// refinement around the best sample. Fails if any sample is nonpositive.
fn min_on_interval(radius: &Radius, a: f64, b: f64) -> Result<f64> {
    let n = RADIUS_SAMPLES;
    let at = |i: usize| if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
    let mut best = (f64::INFINITY, 0);
    for i in 0..=n {
        let v = radius.positive_at(at(i))?;
        if v < best.0 {
            best = (v, i);
        }
    }
    let (mut lo, mut hi) = (at(best.1.saturating_sub(1)), at((best.1 + 1).min(n)));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (radius.at(c)?, radius.at(d)?);
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = radius.at(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = radius.at(d)?;
        }
    }
    let refined = best.0.min(fc).min(fd);
    if refined <= 0.0 {
        return Err(Error::NonPositiveRadius { t: c, value: refined });
    }
    Ok(refined)
}

/// One segment of the construction, expressed in backward time
/// `s = T_k - t`, `s` in `[0, T_k - T_{k-1}]`.
#[derive(Debug, Clone)]
pub struct BackwardSegment {
    pub k: usize,
    /// `(s, x) -> -F(T_k - s, x)`.
    pub field: PolytopicField,
    /// `s -> z(T_k - s)`.
    pub reference: Trajectory,
    /// `s -> lambda(T_k - s)`.
    pub control: RelaxedControl,
    pub family: SelectionFamily,
}

/// Tube selection for segment `k` of `plan`, run in backward time with tube
/// radius `epsilon`.
pub fn backward_segment_approx(
    field: &PolytopicField,
    reference: &Trajectory,
    control: &RelaxedControl,
    k: usize,
    plan: &SegmentPlan,
    epsilon: f64,
    step: f64,
    options: &SelectionOptions,
) -> Result<BackwardSegment> {
    if k == 0 || k > plan.segment_count() {
        return Err(Error::invalid(format!(
            "segment index {k} outside 1..={}",
            plan.segment_count()
        )));
    }
    let limit = plan.segment_epsilon(k);
    if epsilon > limit * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "segment {k} radius {epsilon} exceeds min(delta cap, r_k) = {limit}"
        )));
    }
    let (a, b) = plan.segment(k);
    let backward_field = field.backward(b);
    let backward_reference = reference.restrict(a, b)?.reflected(b);
    let backward_control = control.restrict(a, b)?.reflected(b);
    let mut options = options.clone();
    options.radius_cap = plan.entry_caps.get(k).copied();
    let family = tube_selection(&backward_field, &backward_reference, &backward_control, epsilon, step, &options)?;
    Ok(BackwardSegment {
        k,
        field: backward_field,
        reference: backward_reference,
        control: backward_control,
        family,
    })
}

#[derive(Debug, Clone)]
pub struct HorizonOptions {
    pub selection: SelectionOptions,
    /// Extra attempts per segment, each halving the chattering target, when
    /// the anchored member leaves the tube.
    pub max_refinements: usize,
}

impl HorizonOptions {
    pub fn new(selection: SelectionOptions) -> Self {
        HorizonOptions {
            selection,
            max_refinements: 6,
        }
    }
}

/// Per-segment diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentReport {
    pub k: usize,
    pub start: f64,
    pub end: f64,
    /// Nominal tube radius `min(delta_{k-1} cap, r_k)`.
    pub epsilon: f64,
    /// Radius actually handed to the chattering search.
    pub chatter_epsilon: f64,
    /// Entry-ball radius at `T_k` after capping and verification.
    pub delta: f64,
    pub delta_cap: Option<f64>,
    pub slices: usize,
    pub chatter_gap: f64,
    /// `sup |z - x|` of the glued trajectory over the segment.
    pub achieved_gap: f64,
    /// `|x(T_k) - z(T_k)|`: how far the anchor sits from the reference.
    pub anchor_offset: f64,
    pub refinements: usize,
}

#[derive(Debug, Clone)]
pub struct HorizonResult {
    pub eta0: State,
    pub trajectory: Trajectory,
    pub signal: SwitchingSignal,
    pub segments: Vec<SegmentReport>,
    /// `max_t |z(t) - x(t)| / r(t)` over the grid.
    pub worst_ratio: f64,
    pub worst_ratio_time: f64,
}

/// Builds a trajectory of the original inclusion with `|z(t) - x(t)| <= r(t)`
/// on the whole plan horizon.
///
/// Runs the segments backward from `K` to `1`. Segment `K` is anchored at
/// `z(T_K)`; each later (earlier in time) segment is anchored at the state
/// the previous one reached, so consecutive pieces share their seam state.
pub fn shadow_trajectory(
    field: &PolytopicField,
    reference: &Trajectory,
    control: &RelaxedControl,
    radius: &Radius,
    plan: &SegmentPlan,
    step: f64,
    options: &HorizonOptions,
) -> Result<HorizonResult> {
    let horizon = plan.horizon();
    if reference.start_time() > 1e-12 || reference.end_time() < horizon * (1.0 - 1e-12) {
        return Err(Error::invalid(format!(
            "reference covers [{}, {}], plan needs [0, {horizon}]",
            reference.start_time(),
            reference.end_time()
        )));
    }
    let tol = tol_int(step, horizon);
    let mut anchor = reference.at(horizon);
    let mut pieces: Vec<(Trajectory, SwitchingSignal, SegmentReport)> = Vec::new();

    for k in (1..=plan.segment_count()).rev() {
        let (a, b) = plan.segment(k);
        let epsilon = plan.segment_epsilon(k);
        let anchor_offset = (&anchor - reference.at(b)).norm();
        let mut attempt = 0;
        let (segment, member, gap) = loop {
            let target = epsilon / (1u64 << attempt) as f64;
            let segment = backward_segment_approx(field, reference, control, k, plan, target, step, &options.selection)
                .map_err(|e| Error::Segment { k, source: Box::new(e) })?;
            let member = reuse_control(
                &segment.field,
                &segment.family.base_trajectory,
                &segment.family.base_signal,
                &anchor,
                step,
            )
            .map_err(|e| Error::Segment { k, source: Box::new(e) })?;
            let mut worst = (0.0f64, 0.0);
            let mut inside = true;
            for (s, x) in member.times().iter().zip(member.states()) {
                let gap = (x - segment.reference.at(*s)).norm();
                let r = radius.at(b - s)?;
                if gap > worst.0 {
                    worst = (gap, b - s);
                }
                if gap > epsilon.min(r) + tol {
                    inside = false;
                }
            }
            if inside {
                break (segment, member, worst.0);
            }
            if attempt == options.max_refinements {
                return Err(Error::Segment {
                    k,
                    source: Box::new(Error::TubeExit {
                        t: worst.1,
                        gap: worst.0,
                        radius: epsilon,
                    }),
                });
            }
            attempt += 1;
        };

        let forward = member.reflected(b);
        let forward_signal = segment.family.base_signal.reflected(b);
        let report = SegmentReport {
            k,
            start: a,
            end: b,
            epsilon,
            chatter_epsilon: segment.family.epsilon,
            delta: segment.family.radius,
            delta_cap: plan.entry_caps.get(k).copied(),
            slices: segment.family.slices,
            chatter_gap: segment.family.chatter_gap,
            achieved_gap: gap,
            anchor_offset,
            refinements: attempt,
        };
        anchor = member.final_state().clone();
        pieces.push((forward, forward_signal, report));
    }

    pieces.reverse();
    let mut iter = pieces.into_iter();
    let (mut trajectory, mut signal, first) = iter.next().expect("plan has at least one segment");
    let mut segments = vec![first];
    for (piece, piece_signal, report) in iter {
        trajectory.append(&piece)?;
        signal.append(&piece_signal)?;
        segments.push(report);
    }
    let eta0 = trajectory.initial_state().clone();

    let mut worst = (0.0f64, 0.0);
    for (t, x) in trajectory.times().iter().zip(trajectory.states()) {
        let gap = (x - reference.at(*t)).norm();
        let r = radius.at(*t)?;
        if gap > r + tol {
            return Err(Error::TubeExit { t: *t, gap, radius: r });
        }
        if gap / r > worst.0 {
            worst = (gap / r, *t);
        }
    }
    Ok(HorizonResult {
        eta0,
        trajectory,
        signal,
        segments,
        worst_ratio: worst.0,
        worst_ratio_time: worst.1,
    })
}

/// Random piecewise-constant vertex choices with pieces of width `interval`.
pub fn random_switching<R: Rng + ?Sized>(
    vertices: usize,
    span: (f64, f64),
    interval: f64,
    rng: &mut R,
) -> Result<SwitchingSignal> {
    let breakpoints = piece_grid(span, interval)?;
    let indices = (1..breakpoints.len()).map(|_| rng.random_range(0..vertices)).collect();
    SwitchingSignal::new(breakpoints, indices)
}

/// Random piecewise-constant weights, uniform on the simplex per piece.
pub fn random_relaxed<R: Rng + ?Sized>(
    vertices: usize,
    span: (f64, f64),
    interval: f64,
    rng: &mut R,
) -> Result<RelaxedControl> {
    let breakpoints = piece_grid(span, interval)?;
    let weights = (1..breakpoints.len())
        .map(|_| {
            let raw: Vec<f64> = (0..vertices).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = raw.iter().sum();
            let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
            // absorb rounding so the weights sum to one
            let drift: f64 = 1.0 - w.iter().sum::<f64>();
            w[0] = (w[0] + drift).max(0.0);
            w
        })
        .collect();
    RelaxedControl::new(breakpoints, weights)
}

fn piece_grid(span: (f64, f64), interval: f64) -> Result<Vec<f64>> {
    if !(interval > 0.0) || !(span.1 > span.0) {
        return Err(Error::invalid("random controls need a positive interval and span"));
    }
    let count = ((span.1 - span.0) / interval - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=count)
        .map(|i| if i == count { span.1 } else { span.0 + i as f64 * interval })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    pub seed: u64,
    /// Width of the random control pieces.
    pub switch_interval: f64,
    /// Worker cap; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            seed: 0,
            switch_interval: 0.01,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnReport {
    pub escaped_any: bool,
    pub escape_times: Vec<Option<f64>>,
}

impl ColumnReport {
    fn from_reports(reports: &[EscapeReport]) -> Self {
        ColumnReport {
            escaped_any: reports.iter().any(|r| r.escaped),
            escape_times: reports.iter().map(|r| r.escape_time).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartReport {
    pub start: Vec<f64>,
    pub original: ColumnReport,
    pub relaxed: ColumnReport,
    /// One inclusion declared an escape and the other did not.
    pub disagreement: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessReport {
    pub t_max: f64,
    pub threshold: f64,
    pub trials: usize,
    pub starts: Vec<StartReport>,
}

/// Numerical evidence for "original complete iff relaxed complete": random
/// switching signals and random relaxed controls are run from every start
/// and declared escapes are compared column by column.
///
/// Trial `j` of start `i` uses ChaCha stream `2 (i trials + j) + column`
/// under `seed`, so results do not depend on the worker schedule.
pub fn completeness_probe(
    field: &PolytopicField,
    starts: &[State],
    t_max: f64,
    trials: usize,
    step: f64,
    threshold: f64,
    options: &ProbeOptions,
) -> Result<CompletenessReport> {
    if trials == 0 {
        return Err(Error::invalid("completeness probe needs at least one trial"));
    }
    let m = field.vertex_count();
    let span = (0.0, t_max);
    let tasks: Vec<(usize, usize, bool)> = (0..starts.len())
        .flat_map(|i| (0..trials).flat_map(move |j| [(i, j, false), (i, j, true)]))
        .collect();
    let run_task = |&(i, j, relaxed): &(usize, usize, bool)| -> Result<EscapeReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        rng.set_stream((2 * (i * trials + j) + relaxed as usize) as u64);
        if relaxed {
            let u = random_relaxed(m, span, options.switch_interval, &mut rng)?;
            detect_escape(field, &u as &dyn Control, &starts[i], t_max, step, threshold)
        } else {
            let u = random_switching(m, span, options.switch_interval, &mut rng)?;
            detect_escape(field, &u as &dyn Control, &starts[i], t_max, step, threshold)
        }
    };
    let reports: Vec<EscapeReport> = match options.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(|| tasks.par_iter().map(run_task).collect::<Result<Vec<_>>>())?,
        None => tasks.par_iter().map(run_task).collect::<Result<Vec<_>>>()?,
    };

    let starts = starts
        .iter()
        .enumerate()
        .map(|(i, start)| {
            let block = &reports[2 * i * trials..2 * (i + 1) * trials];
            let original: Vec<EscapeReport> = block.iter().step_by(2).copied().collect();
            let relaxed: Vec<EscapeReport> = block.iter().skip(1).step_by(2).copied().collect();
            let original = ColumnReport::from_reports(&original);
            let relaxed = ColumnReport::from_reports(&relaxed);
            StartReport {
                start: start.iter().copied().collect(),
                disagreement: original.escaped_any != relaxed.escaped_any,
                original,
                relaxed,
            }
        })
        .collect();
    Ok(CompletenessReport {
        t_max,
        threshold,
        trials,
        starts,
    })
}
