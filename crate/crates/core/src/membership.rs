//! Membership of a window in the class `V_{N,a}`.
//!
//! A window belongs to `V_{N,a}` when it is even (A1), strictly increasing on
//! `[-N/2, 0]` (A2) and has a nonnegative backward second difference on the
//! stretch of the left half-support fixed by (A3). Besides the direct axiom
//! scan this module implements two derivative criteria that certify
//! membership for every shift `0 < a < N` at once.
//!
//! All checks run on finite grids; a failing grid point is recorded as a
//! [`Witness`] carrying the amount by which the inequality fails.

use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::closed_grid;
use crate::window::{RealFn, Window};

/// First difference `f(x) - f(x - a)`.
pub fn delta(w: &impl RealFn, a: f64, x: f64) -> f64 {
    w.eval(x) - w.eval(x - a)
}

/// Second difference `f(x) - 2 f(x - a) + f(x - 2a)`.
pub fn delta2(w: &impl RealFn, a: f64, x: f64) -> f64 {
    w.eval(x) - 2.0 * w.eval(x - a) + w.eval(x - 2.0 * a)
}

/// Backward difference operator with a fixed positive shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceStencil {
    a: f64,
}

impl DifferenceStencil {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a > 0.0 {
            Ok(DifferenceStencil { a })
        } else {
            Err(Error::Parameter(format!("difference shift a = {a} must be positive")))
        }
    }

    pub fn shift(&self) -> f64 {
        self.a
    }

    pub fn first(&self, w: &impl RealFn, x: f64) -> f64 {
        delta(w, self.a, x)
    }

    pub fn second(&self, w: &impl RealFn, x: f64) -> f64 {
        delta2(w, self.a, x)
    }
}

/// The inequality a witness violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criterion {
    /// Symmetry `f(x) = f(-x)`.
    A1,
    /// Strict increase on `[-N/2, 0]`.
    A2,
    /// Nonnegative second difference (including the closed-form point clause).
    A3,
    /// Derivative increasing on `(-N/2, -N/4]`.
    DerivIncreasingQuarter,
    /// `g'(-x - N/2) <= g'(x)` on `[-N/4, 0)`.
    DerivReflection,
    /// Derivative positive on `(-N/2, 0)`.
    DerivPositive,
    /// Derivative increasing on `(-N/2, 0)`.
    DerivIncreasingHalf,
    /// Second difference on the extended interval `[-N/2, -N/4 + 3a/4]`.
    ExtendedA3,
}

impl Criterion {
    pub fn id(self) -> &'static str {
        match self {
            Criterion::A1 => "A1",
            Criterion::A2 => "A2",
            Criterion::A3 => "A3",
            Criterion::DerivIncreasingQuarter => "P41c",
            Criterion::DerivReflection => "P41d",
            Criterion::DerivPositive => "C19pos",
            Criterion::DerivIncreasingHalf => "C19inc",
            Criterion::ExtendedA3 => "L45",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub criterion: Criterion,
    pub x: f64,
    /// Nonnegative amount by which the inequality fails at `x`.
    pub deficit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Axioms,
    Prop41,
    Cor19,
}

impl Method {
    pub fn id(self) -> &'static str {
        match self {
            Method::Axioms => "axioms",
            Method::Prop41 => "prop41",
            Method::Cor19 => "cor19",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub method: Method,
    pub n: f64,
    /// Shift the axioms were checked for; `None` for the derivative criteria.
    pub a: Option<f64>,
    pub grid_step: f64,
    pub tol: f64,
    pub a1_pass: bool,
    pub a2_pass: bool,
    pub a3_pass: bool,
    /// Membership holds for every `0 < a < N`, not just one shift.
    pub universal: bool,
    /// Sorted by `x` ascending.
    pub witnesses: Vec<Witness>,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.a1_pass && self.a2_pass && self.a3_pass
    }

    pub fn witnesses_for(&self, c: Criterion) -> impl Iterator<Item = &Witness> {
        self.witnesses.iter().filter(move |w| w.criterion == c)
    }

    /// JSON object with sorted keys.
    pub fn to_json(&self) -> serde_json::Value {
        let witnesses: Vec<_> = self
            .witnesses
            .iter()
            .map(|w| json!({"axiom": w.criterion.id(), "x": w.x, "deficit": w.deficit}))
            .collect();
        json!({
            "member": self.is_member(),
            "method": self.method.id(),
            "universal": self.universal && self.is_member(),
            "axioms": {"A1": self.a1_pass, "A2": self.a2_pass, "A3": self.a3_pass},
            "witnesses": witnesses,
            "params": {"N": self.n, "a": self.a, "grid_step": self.grid_step, "tol": self.tol},
        })
    }
}

/// Grid step used when the caller does not choose one: `min(a, N/2) / 1000`.
pub fn default_grid_step(n: f64, a: f64) -> f64 {
    a.min(n / 2.0) / 1000.0
}

/// Step for the derivative criteria, which have no shift: `N / 2000`.
pub fn default_derivative_step(n: f64) -> f64 {
    n / 2000.0
}

/// `1e-10` times the peak value of the window.
pub fn default_tol(w: &Window) -> f64 {
    1e-10 * w.max_value().abs()
}

fn validate_common(grid_step: f64, tol: f64) -> Result<()> {
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::Parameter(format!("grid_step = {grid_step} must be positive")));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Parameter(format!("tol = {tol} must be nonnegative")));
    }
    Ok(())
}

fn validate_shift(n: f64, a: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0 && a < n) {
        return Err(Error::Parameter(format!("shift a = {a} must satisfy 0 < a < N = {n}")));
    }
    Ok(())
}

fn sort_witnesses(ws: &mut [Witness]) {
    ws.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.criterion.cmp(&q.criterion)));
}

fn check_symmetry(w: &Window, step: f64, tol: f64, out: &mut Vec<Witness>) -> bool {
    let mut pass = true;
    for x in closed_grid(0.0, w.support_radius(), step) {
        let gap = (w.evaluate(x) - w.evaluate(-x)).abs();
        if gap > tol {
            pass = false;
            out.push(Witness { criterion: Criterion::A1, x, deficit: gap });
        }
    }
    pass
}

/// Strict increase between consecutive samples of `[-N/2, 0]`. The pair
/// starting at the left endpoint is skipped: the window is zero there and the
/// question of strictness at a single endpoint is left open.
fn check_strict_increase(w: &Window, step: f64, out: &mut Vec<Witness>) -> bool {
    let grid = closed_grid(-w.support_radius(), 0.0, step);
    let mut pass = true;
    for pair in grid.windows(2).skip(1) {
        let rise = w.evaluate(pair[1]) - w.evaluate(pair[0]);
        if rise <= 0.0 {
            pass = false;
            out.push(Witness { criterion: Criterion::A2, x: pair[1], deficit: -rise });
        }
    }
    pass
}

/// Grid of `[lo, hi]` refined with every point where the second difference
/// can kink: the window breakpoints shifted by `0`, `a` and `2a`.
fn second_difference_grid(w: &Window, a: f64, lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut pts = closed_grid(lo, hi, step);
    for bp in w.breakpoints() {
        for s in [bp, bp + a, bp + 2.0 * a] {
            if s > lo && s < hi {
                pts.push(s);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|p, q| (*p - *q).abs() <= 1e-12 * step);
    pts
}

fn scan_second_difference(
    w: &Window,
    a: f64,
    lo: f64,
    hi: f64,
    step: f64,
    tol: f64,
    criterion: Criterion,
    out: &mut Vec<Witness>,
) -> bool {
    let mut pass = true;
    for x in second_difference_grid(w, a, lo, hi, step) {
        let d2 = delta2(w, a, x);
        if d2 < -tol {
            pass = false;
            out.push(Witness { criterion, x, deficit: -d2 });
        }
    }
    pass
}

/// Checks (A1)-(A3) for the shift `a` on a grid of spacing `grid_step`.
///
/// For `a >= N/3` the extra point `x = -N/4 + 3a/4` of (A3) is tested through
/// the equivalent closed form `f(N/4 - 3a/4) - 2 f(-N/4 - a/4) >= 0`.
pub fn check_axioms(w: &Window, a: f64, grid_step: f64, tol: f64) -> Result<MembershipReport> {
    let n = w.n();
    validate_shift(n, a)?;
    validate_common(grid_step, tol)?;
    if grid_step > a / 10.0 {
        return Err(Error::Parameter(format!(
            "grid_step = {grid_step} is coarser than a/10 = {}",
            a / 10.0
        )));
    }
    let mut witnesses = Vec::new();
    let a1_pass = check_symmetry(w, grid_step, tol, &mut witnesses);
    let a2_pass = check_strict_increase(w, grid_step, &mut witnesses);
    let left = -n / 2.0;
    let a3_pass = if a < n / 3.0 {
        scan_second_difference(w, a, left, -n / 4.0 + 0.75 * a, grid_step, tol, Criterion::A3, &mut witnesses)
    } else {
        let scan = scan_second_difference(w, a, left, 0.0, grid_step, tol, Criterion::A3, &mut witnesses);
        let point = w.evaluate(n / 4.0 - 0.75 * a) - 2.0 * w.evaluate(-n / 4.0 - 0.25 * a);
        let point_ok = point >= -tol;
        if !point_ok {
            witnesses.push(Witness {
                criterion: Criterion::A3,
                x: -n / 4.0 + 0.75 * a,
                deficit: -point,
            });
        }
        scan && point_ok
    };
    sort_witnesses(&mut witnesses);
    Ok(MembershipReport {
        method: Method::Axioms,
        n,
        a: Some(a),
        grid_step,
        tol,
        a1_pass,
        a2_pass,
        a3_pass,
        universal: false,
        witnesses,
    })
}

/// [`check_axioms`] with the default grid step and tolerance.
pub fn check_axioms_default(w: &Window, a: f64) -> Result<MembershipReport> {
    check_axioms(w, a, default_grid_step(w.n(), a), default_tol(w))
}

/// Numerical derivative by central differences, switching to a one-sided
/// quotient when a breakpoint lies strictly inside the stencil. Returns `None`
/// at breakpoints themselves.
fn derivative(w: &Window, breakpoints: &[f64], x: f64, h: f64) -> Option<f64> {
    if breakpoints.iter().any(|&b| (b - x).abs() <= 1e-9 * h) {
        return None;
    }
    let mut h = h;
    for _ in 0..32 {
        let left = breakpoints.iter().any(|&b| b > x - h && b < x);
        let right = breakpoints.iter().any(|&b| b > x && b < x + h);
        match (left, right) {
            (false, false) => return Some((w.evaluate(x + h) - w.evaluate(x - h)) / (2.0 * h)),
            (true, false) => return Some((w.evaluate(x + h) - w.evaluate(x)) / h),
            (false, true) => return Some((w.evaluate(x) - w.evaluate(x - h)) / h),
            (true, true) => h /= 2.0,
        }
    }
    None
}

/// Derivative nondecreasing over the open-left grid of `(lo, hi]`.
fn check_derivative_increasing(
    w: &Window,
    bps: &[f64],
    lo: f64,
    hi: f64,
    include_hi: bool,
    h: f64,
    tol: f64,
    criterion: Criterion,
    out: &mut Vec<Witness>,
) -> bool {
    let mut grid = closed_grid(lo, hi, h);
    grid.remove(0);
    if !include_hi {
        grid.pop();
    }
    let mut pass = true;
    let mut prev: Option<f64> = None;
    for x in grid {
        let Some(d) = derivative(w, bps, x, h) else {
            continue;
        };
        if let Some(p) = prev {
            if d < p - tol {
                pass = false;
                out.push(Witness { criterion, x, deficit: p - d });
            }
        }
        prev = Some(d);
    }
    pass
}

/// Derivative criterion with four conditions: symmetry, strict increase on
/// the left half, `g'` increasing on `(-N/2, -N/4]` and
/// `g'(-x - N/2) <= g'(x)` on `[-N/4, 0)`. Passing certifies membership in
/// `V_{N,a}` for every `0 < a < N`.
pub fn check_prop41(w: &Window, grid_step: f64, tol: f64) -> Result<MembershipReport> {
    validate_common(grid_step, tol)?;
    let n = w.n();
    let r = w.support_radius();
    let bps = w.breakpoints();
    let mut witnesses = Vec::new();
    let a1_pass = check_symmetry(w, grid_step, tol, &mut witnesses);
    let a2_pass = check_strict_increase(w, grid_step, &mut witnesses);
    let c_pass = check_derivative_increasing(
        w,
        &bps,
        -r,
        -n / 4.0,
        true,
        grid_step,
        tol,
        Criterion::DerivIncreasingQuarter,
        &mut witnesses,
    );
    let mut d_pass = true;
    let mut grid = closed_grid(-n / 4.0, 0.0, grid_step);
    grid.pop();
    for x in grid {
        let mirror = -x - r;
        let (Some(dx), Some(dm)) = (derivative(w, &bps, x, grid_step), derivative(w, &bps, mirror, grid_step)) else {
            continue;
        };
        if dm > dx + tol {
            d_pass = false;
            witnesses.push(Witness {
                criterion: Criterion::DerivReflection,
                x,
                deficit: dm - dx,
            });
        }
    }
    sort_witnesses(&mut witnesses);
    Ok(MembershipReport {
        method: Method::Prop41,
        n,
        a: None,
        grid_step,
        tol,
        a1_pass,
        a2_pass,
        a3_pass: c_pass && d_pass,
        universal: true,
        witnesses,
    })
}

/// Simpler derivative criterion: symmetry plus `g'` positive and increasing
/// on `(-N/2, 0)`. Passing certifies membership for every `0 < a < N`.
pub fn check_cor19(w: &Window, grid_step: f64, tol: f64) -> Result<MembershipReport> {
    validate_common(grid_step, tol)?;
    let n = w.n();
    let r = w.support_radius();
    let bps = w.breakpoints();
    let mut witnesses = Vec::new();
    let a1_pass = check_symmetry(w, grid_step, tol, &mut witnesses);
    let mut grid = closed_grid(-r, 0.0, grid_step);
    grid.remove(0);
    grid.pop();
    let mut positive = true;
    for x in grid {
        if let Some(d) = derivative(w, &bps, x, grid_step) {
            if d <= 0.0 {
                positive = false;
                witnesses.push(Witness {
                    criterion: Criterion::DerivPositive,
                    x,
                    deficit: -d,
                });
            }
        }
    }
    let increasing = check_derivative_increasing(
        w,
        &bps,
        -r,
        0.0,
        false,
        grid_step,
        tol,
        Criterion::DerivIncreasingHalf,
        &mut witnesses,
    );
    sort_witnesses(&mut witnesses);
    Ok(MembershipReport {
        method: Method::Cor19,
        n,
        a: None,
        grid_step,
        tol,
        a1_pass,
        a2_pass: positive,
        a3_pass: increasing,
        universal: true,
        witnesses,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedCheck {
    pub pass: bool,
    pub witnesses: Vec<Witness>,
}

/// Second difference nonnegative on the whole of `[-N/2, -N/4 + 3a/4]`,
/// which every member of `V_{N,a}` satisfies. Used as a consistency check.
pub fn check_lemma45_extension(w: &Window, a: f64, grid_step: f64, tol: f64) -> Result<ExtendedCheck> {
    let n = w.n();
    validate_shift(n, a)?;
    validate_common(grid_step, tol)?;
    let mut witnesses = Vec::new();
    let pass = scan_second_difference(
        w,
        a,
        -n / 2.0,
        -n / 4.0 + 0.75 * a,
        grid_step,
        tol,
        Criterion::ExtendedA3,
        &mut witnesses,
    );
    sort_witnesses(&mut witnesses);
    Ok(ExtendedCheck { pass, witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::{make_window, WindowSpec};

    fn w(spec: Result<WindowSpec>) -> Window {
        make_window(spec.unwrap()).unwrap()
    }

    #[test]
    fn differences_of_the_triangle() {
        let b2 = w(WindowSpec::bspline(2));
        assert_eq!(delta(&b2, 1.0, 0.0), 1.0);
        assert_eq!(delta2(&b2, 1.0, 1.0), -2.0);
        assert_eq!(delta2(&b2, 0.5, -0.5), 0.5);
        assert_eq!(delta(&b2, 0.5, 7.0), 0.0);
        let bx = w(WindowSpec::boxcar(1.0));
        assert_eq!(delta(&bx, 0.5, 0.25), 0.0);
        let stencil = DifferenceStencil::new(1.0).unwrap();
        assert_eq!(stencil.second(&b2, 1.0), -2.0);
        assert!(DifferenceStencil::new(0.0).is_err());
    }

    #[test]
    fn triangle_is_member() {
        let b2 = w(WindowSpec::bspline(2));
        let r = check_axioms_default(&b2, 0.5).unwrap();
        assert!(r.is_member(), "{:?}", r.witnesses);
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn box_fails_strict_increase() {
        let bx = w(WindowSpec::boxcar(1.0));
        let r = check_axioms_default(&bx, 0.5).unwrap();
        assert!(!r.a2_pass);
        assert!(!r.is_member());
        assert!(r.witnesses_for(Criterion::A2).all(|w| w.x >= -1.0 && w.x <= 0.0));
    }

    #[test]
    fn truncated_gaussian_counterexample() {
        let g1 = w(WindowSpec::trunc_gauss(1.0));
        let r = check_axioms_default(&g1, 0.25).unwrap();
        assert!(r.a1_pass && r.a2_pass);
        assert!(!r.a3_pass);
        assert!(r
            .witnesses_for(Criterion::A3)
            .any(|w| (-0.1..=-0.0625).contains(&w.x)));
        // every witness sits inside the quantified interval
        assert!(r.witnesses_for(Criterion::A3).all(|w| w.x >= -0.5 && w.x <= -0.0625 + 1e-15));
        let ext = check_lemma45_extension(&g1, 0.25, default_grid_step(1.0, 0.25), default_tol(&g1)).unwrap();
        assert!(!ext.pass);
        assert!(ext.witnesses.iter().any(|w| (w.x + 0.08).abs() < 0.005));
    }

    #[test]
    fn truncated_gaussian_member_for_large_shift() {
        let g2 = w(WindowSpec::trunc_gauss(2.0));
        let r = check_axioms_default(&g2, 1.0).unwrap();
        assert!(r.is_member(), "{:?}", &r.witnesses[..r.witnesses.len().min(5)]);
        let ext = check_lemma45_extension(&g2, 1.0, default_grid_step(2.0, 1.0), default_tol(&g2)).unwrap();
        assert!(ext.pass);
    }

    #[test]
    fn parameter_errors() {
        let b2 = w(WindowSpec::bspline(2));
        assert!(matches!(check_axioms_default(&b2, 2.0), Err(Error::Parameter(_))));
        assert!(matches!(check_axioms_default(&b2, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(check_axioms(&b2, 0.5, 0.06, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(check_axioms(&b2, 0.5, 0.001, -1.0), Err(Error::Parameter(_))));
        assert!(check_prop41(&b2, 0.0, 0.0).is_err());
    }

    #[test]
    fn derivative_criteria_on_catalog() {
        for spec in [WindowSpec::bspline(3), WindowSpec::cospower(3)] {
            let win = w(spec);
            let r = check_prop41(&win, default_derivative_step(win.n()), default_tol(&win)).unwrap();
            assert!(r.is_member(), "{}: {:?}", win.spec(), &r.witnesses[..r.witnesses.len().min(5)]);
            assert!(r.universal);
        }
        for spec in [WindowSpec::trunc_exp(2.0), WindowSpec::trunc_rational_abs(2.0), WindowSpec::bspline(2)] {
            let win = w(spec);
            let r = check_cor19(&win, default_derivative_step(win.n()), default_tol(&win)).unwrap();
            assert!(r.is_member(), "{}: {:?}", win.spec(), &r.witnesses[..r.witnesses.len().min(5)]);
        }
        let g2 = w(WindowSpec::trunc_gauss(2.0));
        let r = check_prop41(&g2, default_derivative_step(2.0), default_tol(&g2)).unwrap();
        assert!(r.a1_pass && r.a2_pass);
        assert!(!r.a3_pass);
    }

    #[test]
    fn json_schema_keys() {
        let b2 = w(WindowSpec::bspline(2));
        let v = check_axioms_default(&b2, 0.5).unwrap().to_json();
        assert_eq!(v["member"], true);
        assert_eq!(v["method"], "axioms");
        assert_eq!(v["axioms"]["A3"], true);
        assert_eq!(v["params"]["N"], 2.0);
        assert_eq!(v["params"]["a"], 0.5);
        assert!(v["witnesses"].as_array().unwrap().is_empty());
    }
}
