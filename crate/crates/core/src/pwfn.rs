//! Exact piecewise function algebra.
//!
//! Two representations cover every time-dependent quantity in the model:
//!
//! * [`PiecewiseConstantFn`]: right-continuous step functions (flow rates).
//! * [`PiecewiseLinearFn`]: continuous broken lines (labels, cumulative
//!   flows, queue lengths, exit times).
//!
//! Both are defined on all of the real line and are kept in canonical form:
//! breakpoints strictly increasing, no redundant breakpoints. Two functions
//! are equal as mathematical objects iff their representations are equal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PwfnError {
    #[error("breakpoints must be strictly increasing (at index {0})")]
    NotIncreasing(usize),
    #[error("a piecewise linear function needs at least one point")]
    NoPoints,
    #[error("inner function of a composition must be nondecreasing")]
    NotMonotone,
    #[error("pointwise minimum of an empty family")]
    EmptyFamily,
}

/// Right-continuous step function: `initial` on `(-inf, b0)`, then `v_i` on
/// `[b_i, b_{i+1})`, the last value extending to `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct PiecewiseConstantFn {
    initial: Rational,
    steps: Vec<(Rational, Rational)>,
}

#[derive(Deserialize)]
struct RawStep {
    initial: Rational,
    steps: Vec<(Rational, Rational)>,
}

impl TryFrom<RawStep> for PiecewiseConstantFn {
    type Error = PwfnError;
    fn try_from(raw: RawStep) -> Result<Self, PwfnError> {
        PiecewiseConstantFn::from_steps(raw.initial, raw.steps)
    }
}

impl PiecewiseConstantFn {
    pub fn from_steps(
        initial: Rational,
        steps: Vec<(Rational, Rational)>,
    ) -> Result<Self, PwfnError> {
        for (i, w) in steps.windows(2).enumerate() {
            if w[0].0 >= w[1].0 {
                return Err(PwfnError::NotIncreasing(i + 1));
            }
        }
        Ok(Self::canonical(initial, steps))
    }

    fn canonical(initial: Rational, steps: Vec<(Rational, Rational)>) -> Self {
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(steps.len());
        for (b, v) in steps {
            let prev = out.last().map(|s| &s.1).unwrap_or(&initial);
            if *prev != v {
                out.push((b, v));
            }
        }
        PiecewiseConstantFn { initial, steps: out }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn constant(c: Rational) -> Self {
        PiecewiseConstantFn { initial: c, steps: Vec::new() }
    }

    /// `value` on `[from, to)`, zero elsewhere.
    pub fn indicator(from: Rational, to: Rational, value: Rational) -> Self {
        let mut b = PcBuilder::new(Rational::zero());
        if from < to {
            b.push(from, value);
            b.push(to, Rational::zero());
        }
        b.finish()
    }

    pub fn initial(&self) -> &Rational {
        &self.initial
    }

    pub fn steps(&self) -> &[(Rational, Rational)] {
        &self.steps
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = &Rational> {
        self.steps.iter().map(|s| &s.0)
    }

    pub fn final_value(&self) -> &Rational {
        self.steps.last().map(|s| &s.1).unwrap_or(&self.initial)
    }

    /// Right-continuous value at `theta`.
    pub fn value_at(&self, theta: &Rational) -> &Rational {
        let idx = self.steps.partition_point(|(b, _)| b <= theta);
        if idx == 0 {
            &self.initial
        } else {
            &self.steps[idx - 1].1
        }
    }

    pub fn eval(&self, theta: &Rational) -> Rational {
        self.value_at(theta).clone()
    }

    /// Maximal constant pieces as `(start, end, value)`; `None` means infinite.
    pub fn pieces(&self) -> Vec<(Option<Rational>, Option<Rational>, Rational)> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let first_end = self.steps.first().map(|s| s.0.clone());
        out.push((None, first_end, self.initial.clone()));
        for (i, (b, v)) in self.steps.iter().enumerate() {
            let end = self.steps.get(i + 1).map(|s| s.0.clone());
            out.push((Some(b.clone()), end, v.clone()));
        }
        out
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.initial.is_negative() && self.steps.iter().all(|(_, v)| !v.is_negative())
    }

    /// True when the function vanishes on the negative axis.
    pub fn vanishes_before_zero(&self) -> bool {
        self.initial.is_zero() && self.steps.first().is_none_or(|(b, _)| !b.is_negative())
    }

    /// `F(theta) = integral of f over [0, theta]` (signed for negative theta).
    pub fn integrate(&self) -> PiecewiseLinearFn {
        if self.steps.is_empty() {
            return PiecewiseLinearFn::linear(self.initial.clone(), Rational::zero());
        }
        let mut points = Vec::with_capacity(self.steps.len());
        let mut acc = Rational::zero();
        for (i, (b, _)) in self.steps.iter().enumerate() {
            if i > 0 {
                let (pb, pv) = &self.steps[i - 1];
                acc += pv * (b - pb);
            }
            points.push((b.clone(), acc.clone()));
        }
        let raw = PiecewiseLinearFn::canonical(
            points,
            self.initial.clone(),
            self.final_value().clone(),
        );
        let offset = raw.eval(&Rational::zero());
        raw.add_constant(&-offset)
    }

    fn combine(&self, other: &Self, op: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        let mut xs: Vec<&Rational> = self.breakpoints().chain(other.breakpoints()).collect();
        xs.sort();
        xs.dedup();
        let steps = xs
            .into_iter()
            .map(|x| (x.clone(), op(self.value_at(x), other.value_at(x))))
            .collect();
        Self::canonical(op(&self.initial, &other.initial), steps)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::canonical(
            &self.initial * c,
            self.steps.iter().map(|(b, v)| (b.clone(), v * c)).collect(),
        )
    }

    /// Same function, set to zero on `[from, +inf)`.
    pub fn truncate(&self, from: &Rational) -> Self {
        let mut b = PcBuilder::new(self.initial.clone());
        for (x, v) in &self.steps {
            if x >= from {
                break;
            }
            b.push(x.clone(), v.clone());
        }
        b.push(from.clone(), Rational::zero());
        b.finish()
    }
}

/// Incremental construction of a step function from left to right.
#[derive(Debug, Clone)]
pub struct PcBuilder {
    initial: Rational,
    steps: Vec<(Rational, Rational)>,
}

impl PcBuilder {
    pub fn new(initial: Rational) -> Self {
        PcBuilder { initial, steps: Vec::new() }
    }

    /// Sets the value from `from` onwards. A push at the same abscissa as
    /// the previous one overwrites it (the earlier piece had zero length).
    ///
    /// Panics if `from` is left of the previous push.
    pub fn push(&mut self, from: Rational, value: Rational) {
        if let Some((last, v)) = self.steps.last_mut() {
            assert!(from >= *last, "PcBuilder::push out of order");
            if from == *last {
                *v = value;
                return;
            }
        }
        self.steps.push((from, value));
    }

    pub fn finish(self) -> PiecewiseConstantFn {
        PiecewiseConstantFn::canonical(self.initial, self.steps)
    }
}

/// Continuous piecewise linear function given by its breakpoints and the
/// slopes of the two unbounded end pieces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLine")]
pub struct PiecewiseLinearFn {
    points: Vec<(Rational, Rational)>,
    slope_before: Rational,
    slope_after: Rational,
}

#[derive(Deserialize)]
struct RawLine {
    points: Vec<(Rational, Rational)>,
    slope_before: Rational,
    slope_after: Rational,
}

impl TryFrom<RawLine> for PiecewiseLinearFn {
    type Error = PwfnError;
    fn try_from(raw: RawLine) -> Result<Self, PwfnError> {
        PiecewiseLinearFn::from_points(raw.points, raw.slope_before, raw.slope_after)
    }
}

fn eval_raw(
    points: &[(Rational, Rational)],
    slope_before: &Rational,
    slope_after: &Rational,
    x: &Rational,
) -> Rational {
    let idx = points.partition_point(|(px, _)| px <= x);
    if idx == 0 {
        let (x0, y0) = &points[0];
        return y0 + slope_before * (x - x0);
    }
    let (xa, ya) = &points[idx - 1];
    match points.get(idx) {
        None => ya + slope_after * (x - xa),
        Some((xb, yb)) => ya + (yb - ya) * (x - xa) / (xb - xa),
    }
}

impl PiecewiseLinearFn {
    pub fn from_points(
        points: Vec<(Rational, Rational)>,
        slope_before: Rational,
        slope_after: Rational,
    ) -> Result<Self, PwfnError> {
        if points.is_empty() {
            return Err(PwfnError::NoPoints);
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[0].0 >= w[1].0 {
                return Err(PwfnError::NotIncreasing(i + 1));
            }
        }
        Ok(Self::canonical(points, slope_before, slope_after))
    }

    /// Drops breakpoints where the slope does not change. A function without
    /// any kink is anchored at `x = 0`.
    fn canonical(
        points: Vec<(Rational, Rational)>,
        slope_before: Rational,
        slope_after: Rational,
    ) -> Self {
        debug_assert!(!points.is_empty());
        let n = points.len();
        let slopes: Vec<Rational> = points
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
            .collect();
        let mut kept = Vec::with_capacity(n);
        for i in 0..n {
            let left = if i == 0 { &slope_before } else { &slopes[i - 1] };
            let right = if i + 1 == n { &slope_after } else { &slopes[i] };
            if left != right {
                kept.push(points[i].clone());
            }
        }
        if kept.is_empty() {
            let zero = Rational::zero();
            let y0 = eval_raw(&points, &slope_before, &slope_after, &zero);
            kept.push((zero, y0));
        }
        PiecewiseLinearFn { points: kept, slope_before, slope_after }
    }

    /// `slope * x + intercept`.
    pub fn linear(slope: Rational, intercept: Rational) -> Self {
        PiecewiseLinearFn {
            points: vec![(Rational::zero(), intercept)],
            slope_before: slope.clone(),
            slope_after: slope,
        }
    }

    pub fn constant(c: Rational) -> Self {
        Self::linear(Rational::zero(), c)
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn identity() -> Self {
        Self::linear(Rational::one(), Rational::zero())
    }

    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = &Rational> {
        self.points.iter().map(|p| &p.0)
    }

    pub fn slope_before(&self) -> &Rational {
        &self.slope_before
    }

    pub fn slope_after(&self) -> &Rational {
        &self.slope_after
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        eval_raw(&self.points, &self.slope_before, &self.slope_after, x)
    }

    /// Slope on `[x, x + eps)`.
    pub fn right_slope(&self, x: &Rational) -> Rational {
        let idx = self.points.partition_point(|(px, _)| px <= x);
        self.segment_slope(idx)
    }

    /// Slope on `(x - eps, x]`.
    pub fn left_slope(&self, x: &Rational) -> Rational {
        let idx = self.points.partition_point(|(px, _)| px < x);
        self.segment_slope(idx)
    }

    /// Slope of segment `i`: segment 0 is the left ray, segment `n` the right ray.
    fn segment_slope(&self, i: usize) -> Rational {
        if i == 0 {
            self.slope_before.clone()
        } else if i == self.points.len() {
            self.slope_after.clone()
        } else {
            let (xa, ya) = &self.points[i - 1];
            let (xb, yb) = &self.points[i];
            (yb - ya) / (xb - xa)
        }
    }

    /// All segment slopes, left ray first.
    pub fn slopes(&self) -> Vec<Rational> {
        (0..=self.points.len()).map(|i| self.segment_slope(i)).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.slopes().iter().all(|s| !s.is_negative())
    }

    pub fn derivative(&self) -> PiecewiseConstantFn {
        let n = self.points.len();
        let steps = (0..n)
            .map(|i| (self.points[i].0.clone(), self.segment_slope(i + 1)))
            .collect();
        PiecewiseConstantFn::canonical(self.slope_before.clone(), steps)
    }

    fn combine(&self, other: &Self, op: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        let mut xs: Vec<&Rational> = self.breakpoints().chain(other.breakpoints()).collect();
        xs.sort();
        xs.dedup();
        let points = xs
            .into_iter()
            .map(|x| (x.clone(), op(&self.eval(x), &other.eval(x))))
            .collect();
        Self::canonical(
            points,
            op(&self.slope_before, &other.slope_before),
            op(&self.slope_after, &other.slope_after),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::canonical(
            self.points.iter().map(|(x, y)| (x.clone(), y * c)).collect(),
            &self.slope_before * c,
            &self.slope_after * c,
        )
    }

    pub fn add_constant(&self, c: &Rational) -> Self {
        PiecewiseLinearFn {
            points: self.points.iter().map(|(x, y)| (x.clone(), y + c)).collect(),
            slope_before: self.slope_before.clone(),
            slope_after: self.slope_after.clone(),
        }
    }

    /// `x -> f(x + d)`.
    pub fn shift_arg(&self, d: &Rational) -> Self {
        PiecewiseLinearFn {
            points: self.points.iter().map(|(x, y)| (x - d, y.clone())).collect(),
            slope_before: self.slope_before.clone(),
            slope_after: self.slope_after.clone(),
        }
    }

    /// `self ∘ inner`. See [`compose_monotone`].
    pub fn compose(&self, inner: &PiecewiseLinearFn) -> Result<Self, PwfnError> {
        compose_monotone(self, inner)
    }

    /// Smallest `x >= start` with `f(x) >= level`, for nondecreasing `f`.
    /// `None` when the level is never reached.
    pub fn first_reach(&self, start: &Rational, level: &Rational) -> Option<Rational> {
        let y0 = self.eval(start);
        if y0 >= *level {
            return Some(start.clone());
        }
        let mut xa = start.clone();
        let mut ya = y0;
        let idx = self.points.partition_point(|(px, _)| px <= start);
        for (xb, yb) in &self.points[idx..] {
            if yb >= level {
                return Some(&xa + (level - &ya) * (xb - &xa) / (yb - &ya));
            }
            xa = xb.clone();
            ya = yb.clone();
        }
        if self.slope_after.is_positive() {
            Some(&xa + (level - &ya) / &self.slope_after)
        } else {
            None
        }
    }
}

/// Exact composition `outer ∘ inner` for nondecreasing `inner`.
///
/// The breakpoints of the result are those of `inner` plus the preimages of
/// the breakpoints of `outer`; between consecutive candidates both functions
/// are affine, so evaluating at the candidates pins the result down.
pub fn compose_monotone(
    outer: &PiecewiseLinearFn,
    inner: &PiecewiseLinearFn,
) -> Result<PiecewiseLinearFn, PwfnError> {
    if !inner.is_monotone() {
        return Err(PwfnError::NotMonotone);
    }
    let pts = &inner.points;
    let n = pts.len();
    let mut cand: Vec<Rational> = pts.iter().map(|p| p.0.clone()).collect();
    for (y, _) in &outer.points {
        // left ray
        if inner.slope_before.is_positive() && *y <= pts[0].1 {
            cand.push(&pts[0].0 + (y - &pts[0].1) / &inner.slope_before);
        }
        for w in pts.windows(2) {
            let ((xa, ya), (xb, yb)) = (&w[0], &w[1]);
            if ya < yb && ya < y && y < yb {
                cand.push(xa + (y - ya) * (xb - xa) / (yb - ya));
            }
        }
        if inner.slope_after.is_positive() && *y >= pts[n - 1].1 {
            cand.push(&pts[n - 1].0 + (y - &pts[n - 1].1) / &inner.slope_after);
        }
    }
    cand.sort();
    cand.dedup();
    let first = &cand[0];
    let last = &cand[cand.len() - 1];
    let slope_before = if inner.slope_before.is_zero() {
        Rational::zero()
    } else {
        &inner.slope_before * outer.left_slope(&inner.eval(first))
    };
    let slope_after = if inner.slope_after.is_zero() {
        Rational::zero()
    } else {
        &inner.slope_after * outer.right_slope(&inner.eval(last))
    };
    let points = cand
        .into_iter()
        .map(|x| {
            let y = outer.eval(&inner.eval(&x));
            (x, y)
        })
        .collect();
    Ok(PiecewiseLinearFn::canonical(points, slope_before, slope_after))
}

/// Exact pointwise minimum, with crossing points inserted as breakpoints.
pub fn min_pointwise(fs: &[PiecewiseLinearFn]) -> Result<PiecewiseLinearFn, PwfnError> {
    envelope(fs, true)
}

/// Exact pointwise maximum.
pub fn max_pointwise(fs: &[PiecewiseLinearFn]) -> Result<PiecewiseLinearFn, PwfnError> {
    envelope(fs, false)
}

fn envelope(fs: &[PiecewiseLinearFn], lower: bool) -> Result<PiecewiseLinearFn, PwfnError> {
    if fs.is_empty() {
        return Err(PwfnError::EmptyFamily);
    }
    if fs.len() == 1 {
        return Ok(fs[0].clone());
    }
    let mut xs: Vec<Rational> = fs.iter().flat_map(|f| f.breakpoints().cloned()).collect();
    xs.sort();
    xs.dedup();

    // Every function is affine on each region between consecutive xs (and on
    // the two rays); add pairwise crossings strictly inside each region.
    let mut cand = xs.clone();
    let regions = xs.len() + 1;
    for r in 0..regions {
        let lo = if r == 0 { None } else { Some(&xs[r - 1]) };
        let hi = xs.get(r);
        let anchor = lo.or(hi).expect("at least one breakpoint");
        let lines: Vec<(Rational, Rational)> = fs
            .iter()
            .map(|f| {
                let slope = match lo {
                    Some(l) => f.right_slope(l),
                    None => f.left_slope(anchor),
                };
                (slope, f.eval(anchor))
            })
            .collect();
        for i in 0..lines.len() {
            for j in (i + 1)..lines.len() {
                let (si, vi) = &lines[i];
                let (sj, vj) = &lines[j];
                if si == sj {
                    continue;
                }
                let x = anchor + (vj - vi) / (si - sj);
                let above_lo = lo.is_none_or(|l| &x > l);
                let below_hi = hi.is_none_or(|h| &x < h);
                if above_lo && below_hi {
                    cand.push(x);
                }
            }
        }
    }
    cand.sort();
    cand.dedup();

    let pick = |a: Rational, b: Rational| {
        if (a < b) == lower {
            a
        } else {
            b
        }
    };
    let points: Vec<(Rational, Rational)> = cand
        .iter()
        .map(|x| {
            let y = fs.iter().map(|f| f.eval(x)).reduce(pick).expect("nonempty");
            (x.clone(), y)
        })
        .collect();

    let first = &points[0];
    let last = &points[points.len() - 1];
    // Left of the first candidate the extremal function is the one attaining
    // the extremum there that is extremal just to the left: for a minimum,
    // the largest left slope.
    let slope_before = fs
        .iter()
        .filter(|f| f.eval(&first.0) == first.1)
        .map(|f| f.left_slope(&first.0))
        .reduce(|a, b| if (a > b) == lower { a } else { b })
        .expect("some function attains the envelope");
    let slope_after = fs
        .iter()
        .filter(|f| f.eval(&last.0) == last.1)
        .map(|f| f.right_slope(&last.0))
        .reduce(pick)
        .expect("some function attains the envelope");
    Ok(PiecewiseLinearFn::canonical(points, slope_before, slope_after))
}

/// Incremental construction of a broken line from left to right.
#[derive(Debug, Clone)]
pub struct PlBuilder {
    slope_before: Rational,
    points: Vec<(Rational, Rational)>,
}

impl PlBuilder {
    pub fn new(slope_before: Rational) -> Self {
        PlBuilder { slope_before, points: Vec::new() }
    }

    /// Appends a point. Pushing the same abscissa again must repeat the value.
    pub fn push(&mut self, x: Rational, y: Rational) {
        if let Some((lx, ly)) = self.points.last() {
            assert!(x >= *lx, "PlBuilder::push out of order");
            if x == *lx {
                assert_eq!(y, *ly, "PlBuilder::push: discontinuity at {x}");
                return;
            }
        }
        self.points.push((x, y));
    }

    pub fn last(&self) -> Option<&(Rational, Rational)> {
        self.points.last()
    }

    pub fn finish(self, slope_after: Rational) -> PiecewiseLinearFn {
        assert!(!self.points.is_empty(), "PlBuilder::finish without points");
        PiecewiseLinearFn::canonical(self.points, self.slope_before, slope_after)
    }
}

/// Sorted, deduplicated union of breakpoints of several broken lines.
pub fn merged_breakpoints<'a>(
    fs: impl IntoIterator<Item = &'a PiecewiseLinearFn>,
) -> Vec<Rational> {
    let mut xs: Vec<Rational> = fs.into_iter().flat_map(|f| f.breakpoints().cloned()).collect();
    xs.sort();
    xs.dedup();
    xs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn pl(points: &[(&str, &str)], sb: &str, sa: &str) -> PiecewiseLinearFn {
        PiecewiseLinearFn::from_points(
            points.iter().map(|(x, y)| (q(x), q(y))).collect(),
            q(sb),
            q(sa),
        )
        .unwrap()
    }

    fn step(initial: &str, steps: &[(&str, &str)]) -> PiecewiseConstantFn {
        PiecewiseConstantFn::from_steps(
            q(initial),
            steps.iter().map(|(b, v)| (q(b), q(v))).collect(),
        )
        .unwrap()
    }

    fn example_inflow() -> PiecewiseConstantFn {
        step("0", &[("0", "2"), ("1", "0"), ("2", "1")])
    }

    #[test]
    fn eval_step_is_right_continuous() {
        let u = example_inflow();
        assert_eq!(u.eval(&q("1")), q("0"));
        assert_eq!(u.eval(&q("-1")), q("0"));
        assert_eq!(u.eval(&q("0")), q("2"));
        assert_eq!(u.eval(&q("7/2")), q("1"));
        assert_eq!(PiecewiseConstantFn::zero().eval(&q("7")), q("0"));
    }

    #[test]
    fn eval_linear_interpolates() {
        let f = pl(&[("0", "1"), ("1", "3")], "0", "0");
        assert_eq!(f.eval(&q("1/2")), q("2"));
        assert_eq!(f.eval(&q("5")), q("3"));
        assert_eq!(f.eval(&q("-5")), q("1"));
        assert_eq!(PiecewiseLinearFn::zero().eval(&q("7")), q("0"));
    }

    #[test]
    fn canonical_forms() {
        let s = step("0", &[("0", "1"), ("1", "1"), ("2", "0")]);
        assert_eq!(s.steps().len(), 2);
        let l = pl(&[("0", "0"), ("1", "1"), ("2", "2")], "1", "1");
        assert_eq!(l, PiecewiseLinearFn::identity());
        assert!(PiecewiseConstantFn::from_steps(q("0"), vec![(q("1"), q("1")), (q("1"), q("2"))])
            .is_err());
        assert!(PiecewiseLinearFn::from_points(vec![], q("0"), q("0")).is_err());
    }

    #[test]
    fn integrate_example_inflow() {
        let big_u = example_inflow().integrate();
        assert_eq!(big_u.eval(&q("0")), q("0"));
        assert_eq!(big_u.eval(&q("1")), q("2"));
        assert_eq!(big_u.eval(&q("2")), q("2"));
        assert_eq!(big_u.eval(&q("3")), q("3"));
        assert_eq!(big_u.eval(&q("-4")), q("0"));
    }

    #[test]
    fn integrate_trivial_cases() {
        assert_eq!(PiecewiseConstantFn::zero().integrate(), PiecewiseLinearFn::zero());
        assert_eq!(
            PiecewiseConstantFn::constant(q("3")).integrate(),
            PiecewiseLinearFn::linear(q("3"), q("0"))
        );
        // integration anchors at zero even when the support starts later
        let f = step("0", &[("2", "1"), ("4", "0")]);
        let big_f = f.integrate();
        assert_eq!(big_f.eval(&q("0")), q("0"));
        assert_eq!(big_f.eval(&q("3")), q("1"));
        assert_eq!(big_f.eval(&q("10")), q("2"));
    }

    #[test]
    fn derivative_inverts_integrate() {
        let u = example_inflow();
        assert_eq!(u.integrate().derivative(), u);
    }

    #[test]
    fn compose_shift_of_label() {
        // l_r from the worked example: 1+theta, then 1+2theta on [0,1], 3 on [1,2], 1+theta after.
        let l_r = pl(&[("0", "1"), ("1", "3"), ("2", "3")], "1", "1");
        let plus_one = PiecewiseLinearFn::linear(q("1"), q("1"));
        let l_t = compose_monotone(&plus_one, &l_r).unwrap();
        assert_eq!(l_t.eval(&q("1")), q("4"));
        assert_eq!(l_t, l_r.add_constant(&q("1")));
        assert_eq!(compose_monotone(&PiecewiseLinearFn::identity(), &l_r).unwrap(), l_r);
    }

    #[test]
    fn compose_kink_preimage() {
        let g = pl(&[("3", "6")], "2", "0");
        let f = PiecewiseLinearFn::linear(q("1"), q("1"));
        let h = compose_monotone(&g, &f).unwrap();
        assert_eq!(h.eval(&q("1")), g.eval(&q("2")));
        assert_eq!(h.points(), &[(q("2"), q("6"))]);
    }

    #[test]
    fn compose_rejects_decreasing_inner() {
        let f = PiecewiseLinearFn::linear(q("-1"), q("0"));
        assert_eq!(
            compose_monotone(&PiecewiseLinearFn::identity(), &f),
            Err(PwfnError::NotMonotone)
        );
    }

    #[test]
    fn min_of_parallel_lines_and_crossing() {
        let a = PiecewiseLinearFn::linear(q("1"), q("2"));
        let b = PiecewiseLinearFn::linear(q("1"), q("3"));
        assert_eq!(min_pointwise(&[a.clone(), b]).unwrap(), a);
        assert_eq!(min_pointwise(std::slice::from_ref(&a)).unwrap(), a);
        let two = PiecewiseLinearFn::linear(q("2"), q("0"));
        let m = min_pointwise(&[two, PiecewiseLinearFn::linear(q("1"), q("1"))]).unwrap();
        assert_eq!(m.points(), &[(q("1"), q("2"))]);
        assert_eq!(m.slope_before(), &q("2"));
        assert_eq!(m.slope_after(), &q("1"));
        assert_eq!(min_pointwise(&[]), Err(PwfnError::EmptyFamily));
    }

    #[test]
    fn first_reach_on_plateaus() {
        let f = pl(&[("0", "0"), ("1", "2"), ("3", "2"), ("4", "3")], "0", "1");
        assert_eq!(f.first_reach(&q("0"), &q("1")), Some(q("1/2")));
        assert_eq!(f.first_reach(&q("0"), &q("2")), Some(q("1")));
        assert_eq!(f.first_reach(&q("2"), &q("5/2")), Some(q("7/2")));
        assert_eq!(f.first_reach(&q("0"), &q("10")), Some(q("11")));
        let flat = pl(&[("0", "0")], "0", "0");
        assert_eq!(flat.first_reach(&q("0"), &q("1")), None);
    }

    #[test]
    fn truncate_and_indicator() {
        let u = example_inflow().truncate(&q("3"));
        assert_eq!(u.eval(&q("5/2")), q("1"));
        assert_eq!(u.eval(&q("3")), q("0"));
        let i = PiecewiseConstantFn::indicator(q("1"), q("2"), q("5"));
        assert_eq!(i.integrate().eval(&q("10")), q("5"));
        assert!(i.vanishes_before_zero());
        assert!(!PiecewiseConstantFn::constant(q("1")).vanishes_before_zero());
    }

    #[test]
    fn serde_roundtrip() {
        let f = pl(&[("0", "1"), ("1", "3")], "1", "0");
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"points":[["0","1"],["1","3"]],"slope_before":"1","slope_after":"0"}"#);
        assert_eq!(serde_json::from_str::<PiecewiseLinearFn>(&s).unwrap(), f);
        let u = example_inflow();
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(serde_json::from_str::<PiecewiseConstantFn>(&s).unwrap(), u);
        let bad = r#"{"initial":"0","steps":[["1","1"],["0","2"]]}"#;
        assert!(serde_json::from_str::<PiecewiseConstantFn>(bad).is_err());
    }
}
