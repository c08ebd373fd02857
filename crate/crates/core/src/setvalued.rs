//! Polytopic set-valued maps, Hausdorff distances, tubes and their truncation.
//!
//! A [`PolytopicField`] stores `m` vertex vector fields `f_1 .. f_m`. The
//! original inclusion uses the finite set `{f_i(t, x)}` as admissible
//! velocities; the relaxed inclusion uses its convex hull, parameterised by
//! simplex weights.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exprfield::{eval_vector_into, parse_expr, parse_param_expr, Expr, VectorExpr};
use crate::trajectory::{State, Trajectory};

/// Where the field is defined in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeDomain {
    /// `[0, end]`.
    Bounded(f64),
    /// `[0, inf)`.
    Unbounded,
}

impl TimeDomain {
    fn contains(&self, t: f64) -> bool {
        const SLACK: f64 = 1e-9;
        match *self {
            TimeDomain::Bounded(end) => t >= -SLACK && t <= end + SLACK * end.max(1.0),
            TimeDomain::Unbounded => t >= -SLACK,
        }
    }
}

/// Set-valued map given by finitely many vertex vector fields.
///
/// Evaluation goes through an affine reparameterisation so that the
/// backward-time map `(s, x) -> -F(T - s, x)` is the same type: vertex `i`
/// at `(s, x)` is `velocity_sign * f_i(time_origin + time_sign * s, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopicField {
    dimension: usize,
    vertices: Vec<VectorExpr>,
    domain: TimeDomain,
    time_origin: f64,
    time_sign: f64,
    velocity_sign: f64,
}

impl PolytopicField {
    pub fn new(dimension: usize, vertices: Vec<VectorExpr>, domain: TimeDomain) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("field dimension must be positive"));
        }
        if vertices.is_empty() {
            return Err(Error::invalid("field needs at least one vertex"));
        }
        if let Some(v) = vertices.iter().find(|v| v.dimension() != dimension) {
            return Err(Error::invalid(format!(
                "vertex of dimension {} in a field of dimension {dimension}",
                v.dimension()
            )));
        }
        Ok(PolytopicField {
            dimension,
            vertices,
            domain,
            time_origin: 0.0,
            time_sign: 1.0,
            velocity_sign: 1.0,
        })
    }

    /// Parses one string per vertex component, on an unbounded time domain.
    pub fn parse<S: AsRef<str>>(dimension: usize, vertices: &[Vec<S>]) -> Result<Self> {
        let vertices = vertices
            .iter()
            .map(|v| VectorExpr::parse(v, dimension))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        PolytopicField::new(dimension, vertices, TimeDomain::Unbounded)
    }

    pub fn with_domain(mut self, domain: TimeDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[VectorExpr] {
        &self.vertices
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn is_autonomous(&self) -> bool {
        !self.vertices.iter().any(VectorExpr::depends_on_time)
    }

    /// `(s, x) -> -F(pivot - s, x)`: the map driving the inclusion in backward time.
    pub fn backward(&self, pivot: f64) -> Self {
        let mut out = self.clone();
        out.time_origin = self.time_origin + self.time_sign * pivot;
        out.time_sign = -self.time_sign;
        out.velocity_sign = -self.velocity_sign;
        out
    }

    /// Whether this map is a time-reversed view of its expressions.
    pub fn is_reversed(&self) -> bool {
        self.velocity_sign < 0.0
    }

    fn source_time(&self, t: f64) -> f64 {
        self.time_origin + self.time_sign * t
    }

    /// Writes `f_i(t, x)` into `out`.
    pub fn eval_vertex_into(&self, i: usize, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        let s = self.source_time(t);
        if !self.domain.contains(s) {
            return Err(Error::invalid(format!("time {s} outside the field's domain")));
        }
        eval_vector_into(&self.vertices[i], s, x, out).map_err(|source| Error::Eval { t, source })?;
        if self.velocity_sign < 0.0 {
            out.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(())
    }

    /// The vertex set `F(t, x)`; duplicates kept.
    pub fn eval_set(&self, t: f64, x: &State) -> Result<Vec<State>> {
        let mut buf = vec![0.0; self.dimension];
        (0..self.vertex_count())
            .map(|i| {
                self.eval_vertex_into(i, t, x.as_slice(), &mut buf)?;
                Ok(DVector::from_column_slice(&buf))
            })
            .collect()
    }

    /// Largest vertex norm at `(t, x)`.
    pub fn max_speed(&self, t: f64, x: &State) -> Result<f64> {
        Ok(self.eval_set(t, x)?.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// Stable digest of the vertex expressions and time reparameterisation.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("dim={};", self.dimension));
        for v in &self.vertices {
            hasher.update("[");
            for c in v.components() {
                hasher.update(c.to_string());
                hasher.update(";");
            }
            hasher.update("]");
        }
        hasher.update(format!(
            "origin={:?};tsign={:?};vsign={:?}",
            self.time_origin, self.time_sign, self.velocity_sign
        ));
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Hausdorff distance between two finite point sets (Euclidean metric).
pub fn hausdorff_finite(a: &[State], b: &[State]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.iter().chain(b).any(|p| p.len() != a[0].len()) {
        return Err(Error::invalid("point sets have mixed dimensions"));
    }
    let directed = |from: &[State], to: &[State]| {
        from.iter()
            .map(|p| to.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// Radius of a tube: constant, or a positive function of `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Radius {
    Constant(f64),
    Function(Expr),
}

impl Radius {
    /// Parses an expression in `t` only.
    pub fn parse(source: &str) -> Result<Self> {
        Ok(Radius::Function(parse_expr(source, 0)?))
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        match self {
            Radius::Constant(c) => Ok(*c),
            Radius::Function(e) => e.eval(t, &[]).map_err(|source| Error::Eval { t, source }),
        }
    }

    /// Fails unless the radius is strictly positive at `t`.
    pub fn positive_at(&self, t: f64) -> Result<f64> {
        let value = self.at(t)?;
        if value > 0.0 {
            Ok(value)
        } else {
            Err(Error::NonPositiveRadius { t, value })
        }
    }
}

/// A reference trajectory with a radius around it.
///
/// Two membership notions are exposed: [`Tube::distance`] measures distance
/// to the whole image of the reference (the set used when truncating a
/// field), while [`Tube::sliced_gap`] compares against the reference at the
/// same time instant.
#[derive(Debug, Clone)]
pub struct Tube {
    reference: Trajectory,
    radius: Radius,
}

impl Tube {
    pub fn new(reference: Trajectory, radius: Radius) -> Result<Self> {
        for &t in reference.times() {
            radius.positive_at(t)?;
        }
        Ok(Tube { reference, radius })
    }

    pub fn constant(reference: Trajectory, epsilon: f64) -> Result<Self> {
        Tube::new(reference, Radius::Constant(epsilon))
    }

    pub fn reference(&self) -> &Trajectory {
        &self.reference
    }

    pub fn radius(&self) -> &Radius {
        &self.radius
    }

    /// Distance from `x` to the piecewise-linear image of the reference.
    pub fn distance(&self, x: &State) -> f64 {
        tube_distance(&self.reference, x)
    }

    /// Distance from `x` to the set `{xi : |xi - z(t)| <= eps for some t}`,
    /// for a constant-radius tube.
    pub fn set_distance(&self, x: &State) -> Result<f64> {
        match self.radius {
            Radius::Constant(eps) => Ok((self.distance(x) - eps).max(0.0)),
            Radius::Function(_) => Err(Error::invalid(
                "set-image distance needs a constant-radius tube",
            )),
        }
    }

    /// `|x - z(t)|`.
    pub fn sliced_gap(&self, t: f64, x: &State) -> f64 {
        (x - self.reference.at(t)).norm()
    }

    /// `|x - z(t)| <= r(t) + slack`.
    pub fn contains_sliced(&self, t: f64, x: &State, slack: f64) -> Result<bool> {
        Ok(self.sliced_gap(t, x) <= self.radius.at(t)? + slack)
    }
}

/// Distance from `x` to the polyline through the reference samples.
pub fn tube_distance(reference: &Trajectory, x: &State) -> f64 {
    let states = reference.states();
    if states.len() == 1 {
        return (x - &states[0]).norm();
    }
    states
        .windows(2)
        .map(|w| point_segment_distance(x, &w[0], &w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn point_segment_distance(p: &State, a: &State, b: &State) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// `Phi(x) F(t, x)` with `Phi(x) = max(1 - d(x, T), 0)` and `T` the set image
/// of a constant-radius tube.
///
/// Agrees with `F` on the tube and collapses to `{0}` at distance one or more.
#[derive(Debug, Clone)]
pub struct TruncatedField<'a> {
    field: &'a PolytopicField,
    tube: &'a Tube,
}

pub fn truncate_field<'a>(field: &'a PolytopicField, tube: &'a Tube) -> Result<TruncatedField<'a>> {
    tube.set_distance(tube.reference().initial_state())?;
    Ok(TruncatedField { field, tube })
}

impl TruncatedField<'_> {
    pub fn cutoff(&self, x: &State) -> f64 {
        let d = self.tube.set_distance(x).expect("constant-radius tube checked at construction");
        (1.0 - d).max(0.0)
    }

    pub fn eval_set(&self, t: f64, x: &State) -> Result<Vec<State>> {
        let phi = self.cutoff(x);
        if phi == 0.0 {
            return Ok(vec![State::zeros(self.field.dimension()); self.field.vertex_count()]);
        }
        let mut set = self.field.eval_set(t, x)?;
        if phi < 1.0 {
            set.iter_mut().for_each(|v| *v *= phi);
        }
        Ok(set)
    }
}

/// How the local constants of a field were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsOrigin {
    Analytic,
    /// Sampled maxima; lower bounds on the true suprema.
    Sampled,
}

/// Local Lipschitz rate, speed bound and residual of a field over `B(0, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsEstimate {
    pub ball_radius: f64,
    pub lipschitz: f64,
    pub value_bound: f64,
    /// `|x0| + value_bound` for the anchor `x0 = 0`.
    pub residual: f64,
    pub sample_count: usize,
    pub origin: BoundsOrigin,
}

/// Closed-form bounds as expressions in the ball radius `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticBounds {
    lipschitz: Expr,
    value_bound: Expr,
}

impl AnalyticBounds {
    pub fn parse(lipschitz: &str, value_bound: &str) -> Result<Self> {
        Ok(AnalyticBounds {
            lipschitz: parse_param_expr(lipschitz, &["R"])?,
            value_bound: parse_param_expr(value_bound, &["R"])?,
        })
    }

    pub fn at(&self, ball_radius: f64) -> Result<BoundsEstimate> {
        let eval = |e: &Expr| {
            e.eval_params(&[ball_radius])
                .map_err(|source| Error::Eval { t: 0.0, source })
        };
        let lipschitz = eval(&self.lipschitz)?;
        let value_bound = eval(&self.value_bound)?;
        if !(lipschitz >= 0.0 && value_bound >= 0.0) {
            return Err(Error::invalid(format!(
                "analytic bounds must be nonnegative (k = {lipschitz}, alpha = {value_bound})"
            )));
        }
        Ok(BoundsEstimate {
            ball_radius,
            lipschitz,
            value_bound,
            residual: value_bound,
            sample_count: 0,
            origin: BoundsOrigin::Analytic,
        })
    }

    pub fn lipschitz_source(&self) -> String {
        self.lipschitz.to_string()
    }

    pub fn value_bound_source(&self) -> String {
        self.value_bound.to_string()
    }
}

/// Where pipeline stages get their field constants from.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundsStrategy {
    Analytic(AnalyticBounds),
    Sampled { samples: usize, seed: u64 },
}

impl BoundsStrategy {
    pub fn resolve(&self, field: &PolytopicField, radius: f64, span: (f64, f64)) -> Result<BoundsEstimate> {
        match self {
            BoundsStrategy::Analytic(a) => a.at(radius),
            BoundsStrategy::Sampled { samples, seed } => {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                estimate_bounds(field, radius, span, *samples, &mut rng)
            }
        }
    }
}

/// Monte-Carlo estimate of `k_R`, `alpha_R` and `beta_0` over `B(0, R) x span`.
///
/// Each sample draws a time and a pair of points in the ball; every other
/// pair is a close pair so that local slopes are seen as well as secants.
/// The draws form a single stream, so a run with more samples sees a
/// superset of a shorter run's samples (same `rng` state).
pub fn estimate_bounds<R: Rng + ?Sized>(
    field: &PolytopicField,
    radius: f64,
    span: (f64, f64),
    samples: usize,
    rng: &mut R,
) -> Result<BoundsEstimate> {
    if samples < 2 {
        return Err(Error::invalid("bounds estimation needs at least 2 samples"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("bounds ball radius must be positive"));
    }
    let n = field.dimension();
    let mut lipschitz = 0.0f64;
    let mut value_bound = 0.0f64;
    for i in 0..samples {
        let t = span.0 + (span.1 - span.0) * rng.random::<f64>();
        let a = sample_ball(n, radius, rng);
        let b = if i % 2 == 0 {
            sample_ball(n, radius, rng)
        } else {
            let step = sample_ball(n, 1e-4 * radius, rng);
            let mut b = &a + step;
            let norm = b.norm();
            if norm > radius {
                b *= radius / norm;
            }
            b
        };
        let fa = field.eval_set(t, &a)?;
        let fb = field.eval_set(t, &b)?;
        for v in fa.iter().chain(&fb) {
            value_bound = value_bound.max(v.norm());
        }
        let sep = (&a - &b).norm();
        if sep > 0.0 {
            lipschitz = lipschitz.max(hausdorff_finite(&fa, &fb)? / sep);
        }
    }
    Ok(BoundsEstimate {
        ball_radius: radius,
        lipschitz,
        value_bound,
        residual: value_bound,
        sample_count: samples,
        origin: BoundsOrigin::Sampled,
    })
}

/// Uniform sample from the closed ball of the given radius.
pub(crate) fn sample_ball<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> State {
    loop {
        let dir = State::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = dir.norm();
        if norm > 1e-300 {
            let scale = radius * rng.random::<f64>().powf(1.0 / n as f64) / norm;
            return dir * scale;
        }
    }
}
