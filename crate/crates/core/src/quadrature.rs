//! Deterministic adaptive Simpson quadrature.
//!
//! The integrator is globally adaptive: the panel with the largest error
//! estimate is bisected until the summed estimate drops below
//! `max(rel_tol * |I|, abs_tol)`. Each panel carries a three-point and a
//! five-point Simpson estimate; the reported value is the Richardson
//! extrapolation of the two.
//!
//! Nested integrals are evaluated by calling the integrator from inside the
//! integrand, with the tolerance budget split evenly across levels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Upper tail mass discarded when an exponentially decaying integrand is
/// truncated to a finite interval.
pub const TAIL_MASS: f64 = 1e-12;

const INITIAL_PANELS: usize = 16;
const MAX_PANELS: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_depth: 50,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_depth: u32) -> Result<Self> {
        let spec = QuadratureSpec {
            rel_tol,
            abs_tol,
            max_depth,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if self.max_depth < 1 {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        Ok(())
    }

    /// Tolerances for one level of an `levels`-deep nested integral.
    pub fn per_level(&self, levels: usize) -> Self {
        let n = levels.max(1) as f64;
        QuadratureSpec {
            rel_tol: self.rel_tol / n,
            abs_tol: self.abs_tol / n,
            max_depth: self.max_depth,
        }
    }
}

/// Length of the interval `[0, x]` beyond which an `exp(-rate * x)` envelope
/// has less than [`TAIL_MASS`] of its mass.
pub fn exponential_truncation(rate: f64) -> f64 {
    -TAIL_MASS.ln() / rate
}

struct Panel {
    a: f64,
    b: f64,
    // f at a, a + h/4, a + h/2, a + 3h/4, b
    f: [f64; 5],
    estimate: f64,
    error: f64,
    depth: u32,
}

impl Panel {
    fn new<F>(func: &mut F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, depth: u32) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let h = b - a;
        let fl = eval(func, a + 0.25 * h)?;
        let fr = eval(func, a + 0.75 * h)?;
        let coarse = h / 6.0 * (fa + 4.0 * fm + fb);
        let fine = h / 12.0 * (fa + 4.0 * fl + 2.0 * fm + 4.0 * fr + fb);
        let diff = fine - coarse;
        Ok(Panel {
            a,
            b,
            f: [fa, fl, fm, fr, fb],
            estimate: fine + diff / 15.0,
            error: diff.abs() / 15.0,
            depth,
        })
    }

    fn split<F>(self, func: &mut F) -> Result<(Panel, Panel)>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let m = 0.5 * (self.a + self.b);
        let [fa, fl, fm, fr, fb] = self.f;
        let left = Panel::new(func, self.a, m, fa, fl, fm, self.depth + 1)?;
        let right = Panel::new(func, m, self.b, fm, fr, fb, self.depth + 1)?;
        Ok((left, right))
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn eval<F>(func: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let y = func(x)?;
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NumericFailure {
            reason: format!("integrand is {y} at x = {x}"),
            lo: x,
            hi: x,
            error: f64::INFINITY,
        })
    }
}

/// Integrates `func` over `[a, b]`.
pub fn integrate<F>(mut func: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_fallible(|x| Ok(func(x)), a, b, spec)
}

/// Like [`integrate`] for integrands that can fail, typically because they
/// evaluate an inner integral.
pub fn integrate_fallible<F>(mut func: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a > b {
        return Err(Error::invalid(format!("lower limit {a} exceeds upper limit {b}")));
    }
    if a == b {
        return Ok(0.0);
    }

    let width = (b - a) / INITIAL_PANELS as f64;
    let mut heap = BinaryHeap::with_capacity(64);
    let mut f_left = eval(&mut func, a)?;
    for k in 0..INITIAL_PANELS {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == INITIAL_PANELS { b } else { lo + width };
        let f_mid = eval(&mut func, 0.5 * (lo + hi))?;
        let f_right = eval(&mut func, hi)?;
        heap.push(Panel::new(&mut func, lo, hi, f_left, f_mid, f_right, 1)?);
        f_left = f_right;
    }

    let mut total: f64 = heap.iter().map(|p| p.estimate).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        let target = (spec.rel_tol * total.abs()).max(spec.abs_tol);
        if error <= target {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        if worst.depth >= spec.max_depth || heap.len() + 2 > MAX_PANELS {
            return Err(Error::NumericFailure {
                reason: format!("tolerance {target:e} not reached within depth {}", spec.max_depth),
                lo: worst.a,
                hi: worst.b,
                error: worst.error,
            });
        }
        total -= worst.estimate;
        error -= worst.error;
        let (left, right) = worst.split(&mut func)?;
        total += left.estimate + right.estimate;
        error += left.error + right.error;
        heap.push(left);
        heap.push(right);
        // Incremental sums drift; resynchronize before trusting them to stop.
        if error <= target {
            error = heap.iter().map(|p| p.error).sum();
            total = heap.iter().map(|p| p.estimate).sum();
        }
    }
    Ok(heap.iter().map(|p| p.estimate).sum())
}

/// Integrates over `[a, b]` split at the given interior breakpoints, which
/// lets kinks and jumps of the integrand fall on panel boundaries.
/// Breakpoints outside `(a, b)` are ignored.
pub fn integrate_piecewise<F>(mut func: F, a: f64, b: f64, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut points: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    if points.is_empty() {
        return integrate_fallible(func, a, b, spec);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let pieces = points.len() + 1;
    let piece_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / pieces as f64,
        ..*spec
    };
    let mut lo = a;
    let mut sum = 0.0;
    for hi in points.into_iter().chain(std::iter::once(b)) {
        // one-sided limits at the breaks
        let (mut inner_lo, mut inner_hi) = (lo.next_up(), hi.next_down());
        if inner_lo > inner_hi {
            (inner_lo, inner_hi) = (lo, hi);
        }
        let nudged = |x: f64| func(x.clamp(inner_lo, inner_hi));
        sum += integrate_fallible(nudged, lo, hi, &piece_spec)?;
        lo = hi;
    }
    Ok(sum)
}

/// Integrates `func(x)` over `[a, inf)` for integrands bounded by an
/// `exp(-rate * (x - a))` envelope, truncating at the [`TAIL_MASS`] quantile.
pub fn integrate_exponential_tail<F>(func: F, a: f64, rate: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid(format!("decay rate must be positive, got {rate}")));
    }
    integrate(func, a, a + exponential_truncation(rate), spec)
}

/// Limits of one integration variable, as a function of the variables
/// outside it (outermost first).
pub type Limits<'a> = &'a dyn Fn(&[f64]) -> (f64, f64);

/// Iterated integral of `func` over a region given level by level, outermost
/// variable first. `func` receives the point with the same ordering.
///
/// A level whose upper limit falls below its lower limit contributes an empty
/// region (zero), which is how variable inner limits such as `D - g(v)`
/// express the boundary of a triangular domain.
pub fn integrate_nested<F>(func: F, limits: &[Limits<'_>], spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if limits.is_empty() {
        return Err(Error::invalid("nested integral needs at least one level"));
    }
    let level_spec = spec.per_level(limits.len());
    let mut point = Vec::with_capacity(limits.len());
    nested_level(&func, limits, 0, &mut point, &level_spec)
}

fn nested_level<F>(func: &F, limits: &[Limits<'_>], level: usize, point: &mut Vec<f64>, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let (lo, hi) = limits[level](&point[..level]);
    if hi <= lo {
        return Ok(0.0);
    }
    integrate_fallible(
        |x| {
            point.truncate(level);
            point.push(x);
            if level + 1 == limits.len() {
                Ok(func(point))
            } else {
                nested_level(func, limits, level + 1, point, spec)
            }
        },
        lo,
        hi,
        spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    /// 20-point Gauss-Legendre on many subintervals; a reference rule that
    /// shares nothing with the adaptive Simpson path.
    fn gauss_legendre_reference(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
        // Nodes and weights on [-1, 1] by Newton iteration on P_20.
        let n = 20;
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    nodes.push((x, w));
                    break;
                }
            }
        }
        let h = (b - a) / pieces as f64;
        (0..pieces)
            .map(|k| {
                let lo = a + k as f64 * h;
                let mid = lo + 0.5 * h;
                nodes.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
            })
            .sum()
    }

    #[test]
    fn simpson_is_exact_on_polynomials() {
        let value = integrate(|x| x * x, 0.0, 3.0, &spec()).unwrap();
        assert!((value - 9.0).abs() < 1e-12, "{value}");
    }

    #[test]
    fn normalizes_exponential_density() {
        let value = integrate_exponential_tail(|x| 1.5 * (-1.5 * x).exp(), 0.0, 1.5, &spec()).unwrap();
        assert!((value - 1.0).abs() < 1e-9, "{value}");
    }

    #[test]
    fn sine_matches_gauss_legendre_reference() {
        let reference = gauss_legendre_reference(f64::sin, 0.0, PI, 8);
        assert!((reference - 2.0).abs() < 1e-14);
        let value = integrate(f64::sin, 0.0, PI, &spec()).unwrap();
        assert!((value - reference).abs() < 1e-9, "{value} vs {reference}");
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|x| x.exp(), 2.0, 2.0, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_reversed_and_infinite_limits() {
        assert!(matches!(integrate(|x| x, 1.0, 0.0, &spec()), Err(Error::InvalidInput(_))));
        assert!(matches!(integrate(|x| x, 0.0, f64::INFINITY, &spec()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(QuadratureSpec::new(0.0, 1e-12, 50).is_err());
        assert!(QuadratureSpec::new(1e-9, -1.0, 50).is_err());
        assert!(QuadratureSpec::new(1e-9, 1e-12, 0).is_err());
    }

    #[test]
    fn depth_exhaustion_reports_worst_subinterval() {
        let tight = QuadratureSpec::new(1e-15, 1e-300, 4).unwrap();
        let err = integrate(|x| x.sqrt(), 0.0, 1.0, &tight).unwrap_err();
        match err {
            Error::NumericFailure { lo, hi, .. } => {
                assert_eq!(lo, 0.0);
                assert!(hi > 0.0 && hi <= 0.25);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_a_numeric_failure() {
        let err = integrate(|x| 1.0 / x, 0.0, 1.0, &spec()).unwrap_err();
        assert!(err.is_numeric_failure());
    }

    #[test]
    fn triangle_area() {
        let outer: Limits = &|_| (0.0, 1.0);
        let inner: Limits = &|x| (0.0, 1.0 - x[0]);
        let value = integrate_nested(|_| 1.0, &[outer, inner], &spec()).unwrap();
        assert!((value - 0.5).abs() < 1e-12, "{value}");
    }

    #[test]
    fn separable_product_over_unit_square() {
        let unit: Limits = &|_| (0.0, 1.0);
        let value = integrate_nested(|p| p[0] * p[1], &[unit, unit], &spec()).unwrap();
        assert!((value - 0.25).abs() < 1e-12, "{value}");
    }

    #[test]
    fn empty_inner_region_contributes_zero() {
        let outer: Limits = &|_| (0.0, 2.0);
        let inner: Limits = &|x| (0.0, 1.0 - x[0]);
        let value = integrate_nested(|_| 1.0, &[outer, inner], &spec()).unwrap();
        assert!((value - 0.5).abs() < 1e-12, "{value}");
    }

    #[test]
    fn piecewise_handles_a_jump() {
        let step = |x: f64| Ok(if x < 0.3 { 1.0 } else { 2.0 });
        let value = integrate_piecewise(step, 0.0, 1.0, &[0.3, 5.0], &spec()).unwrap();
        assert!((value - 1.7).abs() < 1e-12, "{value}");
    }

    #[test]
    fn doubling_truncation_changes_result_below_abs_tol() {
        let f = |x: f64| x * 1.5 * (-1.5 * x).exp();
        let cut = exponential_truncation(1.5);
        let once = integrate(f, 0.0, cut, &spec()).unwrap();
        let twice = integrate(f, 0.0, 2.0 * cut, &spec()).unwrap();
        assert!((once - twice).abs() < spec().abs_tol * 100.0, "{once} {twice}");
        assert!((once - 1.0 / 1.5).abs() < 1e-9);
    }

    #[test]
    fn halving_tolerance_does_not_increase_error() {
        let f = |x: f64| (x * x).exp() * x.cos();
        let reference = gauss_legendre_reference(f, 0.0, 2.0, 64);
        let mut previous = f64::INFINITY;
        let mut rel = 1e-4;
        while rel >= 1e-10 {
            let s = QuadratureSpec::new(rel, 1e-14, 50).unwrap();
            let err = (integrate(f, 0.0, 2.0, &s).unwrap() - reference).abs();
            assert!(err <= previous.max(1e-13), "rel {rel}: {err} > {previous}");
            previous = err;
            rel /= 2.0;
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn linearity(alpha in -3.0..3.0f64, beta in -3.0..3.0f64, b in 0.1..6.0f64) {
                let s = spec();
                let f = |x: f64| (-x).exp() * (1.0 + x).ln();
                let g = |x: f64| x.sin() + 0.5 * x * x;
                let combined = integrate(|x| alpha * f(x) + beta * g(x), 0.0, b, &s).unwrap();
                let (fi, gi) = (integrate(f, 0.0, b, &s).unwrap(), integrate(g, 0.0, b, &s).unwrap());
                let separate = alpha * fi + beta * gi;
                // Each side is within tolerance of the exact value.
                let budget = s.rel_tol * (combined.abs() + (alpha * fi).abs() + (beta * gi).abs());
                let tol = 2.0 * budget.max(s.abs_tol);
                prop_assert!((combined - separate).abs() <= tol, "{} vs {}", combined, separate);
            }
        }
    }
}
