//! Independent verification of a window pair `(g, h)`.
//!
//! Two bounded compactly supported windows generate dual Gabor frames exactly
//! when, for almost every `x` in `[-a/2, a/2]` and every integer `l`,
//!
//! ```text
//! sum_m g(x - l/b + m a) h(x + m a) = b * delta(l, 0).
//! ```
//!
//! This module evaluates the left-hand side by brute force over every `m`
//! with overlapping support and reports the largest deviation per `l`. It
//! never looks at `G(x)` or at how `h` was produced.

use serde_json::json;

use crate::dual::DualResult;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::GridFunction;
use crate::window::RealFn;

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    /// `(l, max_x |sum - b delta(l,0)|)` for every `|l| <= ell_range`, ascending in `l`.
    pub residuals: Vec<(i64, f64)>,
    pub ell_range: i64,
    pub grid_step: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl DualityReport {
    pub fn residual(&self, ell: i64) -> Option<f64> {
        self.residuals.iter().find(|(l, _)| *l == ell).map(|(_, r)| *r)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .residuals
            .iter()
            .map(|(l, r)| json!({"ell": l, "residual": r}))
            .collect();
        json!({
            "residuals": rows,
            "pass": self.pass,
            "tolerance": self.tolerance,
            "grid_step": self.grid_step,
            "ell_range": self.ell_range,
        })
    }
}

/// Where in `[-a/2, a/2]` the conditions are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualGrid {
    /// Interior nodes `-a/2 + k*step`, `0 < k < a/step`: the synthesis grid
    /// without its two endpoints, which form a null set where the dual may jump.
    Nodes,
    /// Cell midpoints, which also pick up the interpolation error of `h`.
    Midpoints,
}

#[derive(Debug, Clone, Copy)]
pub struct ResidualOptions {
    pub grid_step: f64,
    pub tolerance: f64,
    pub grid: ResidualGrid,
    pub exec: Execution,
}

/// Default pass tolerance `1e-6 * b`.
pub fn default_tolerance(b: f64) -> f64 {
    1e-6 * b
}

fn radius(f: &impl RealFn) -> f64 {
    let (lo, hi) = f.support();
    lo.abs().max(hi.abs())
}

/// Range of `m` for which `x + m a` can meet the support of `h`, padded by one.
fn overlap_range(h: &impl RealFn, a: f64, x: f64) -> (i64, i64) {
    let (lo, hi) = h.support();
    (((lo - x) / a).ceil() as i64 - 1, ((hi - x) / a).floor() as i64 + 1)
}

/// `sum_m g(x - l/b + m a) h(x + m a)` over every overlapping `m`.
pub fn condition_sum(g: &impl RealFn, h: &impl RealFn, a: f64, b: f64, ell: i64, x: f64) -> f64 {
    let (m0, m1) = overlap_range(h, a, x);
    let shift = ell as f64 / b;
    (m0..=m1)
        .map(|m| {
            let y = x + m as f64 * a;
            g.eval(y - shift) * h.eval(y)
        })
        .sum()
}

/// The part of [`condition_sum`] with `|m| >= 2`. Zero whenever `h` lives in
/// `[-3a/2, 3a/2]` and `x` in the open interval `(-a/2, a/2)`.
pub fn high_order_terms(g: &impl RealFn, h: &impl RealFn, a: f64, b: f64, ell: i64, x: f64) -> f64 {
    let (m0, m1) = overlap_range(h, a, x);
    let shift = ell as f64 / b;
    (m0..=m1)
        .filter(|m| m.abs() >= 2)
        .map(|m| {
            let y = x + m as f64 * a;
            g.eval(y - shift) * h.eval(y)
        })
        .sum()
}

fn residual_grid(a: f64, grid_step: f64, kind: ResidualGrid) -> (Vec<f64>, f64) {
    let n = ((a / grid_step).round() as usize).max(1);
    let step = a / n as f64;
    let pts = match kind {
        ResidualGrid::Nodes => (1..n)
            .map(|k| {
                if 2 * k <= n {
                    -a / 2.0 + k as f64 * step
                } else {
                    a / 2.0 - (n - k) as f64 * step
                }
            })
            .collect(),
        ResidualGrid::Midpoints => (0..n).map(|k| -a / 2.0 + (k as f64 + 0.5) * step).collect(),
    };
    (pts, step)
}

/// Residuals of the duality conditions on the interior synthesis nodes.
pub fn duality_residuals(
    g: &impl RealFn,
    h: &GridFunction,
    a: f64,
    b: f64,
    grid_step: f64,
    tolerance: f64,
) -> Result<DualityReport> {
    duality_residuals_with(
        g,
        h,
        a,
        b,
        ResidualOptions {
            grid_step,
            tolerance,
            grid: ResidualGrid::Nodes,
            exec: Execution::default(),
        },
    )
}

pub fn duality_residuals_with(
    g: &impl RealFn,
    h: &impl RealFn,
    a: f64,
    b: f64,
    opts: ResidualOptions,
) -> Result<DualityReport> {
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(Error::Parameter(format!("a = {a}, b = {b} must be positive")));
    }
    if !(opts.grid_step.is_finite() && opts.grid_step > 0.0 && opts.grid_step <= a) {
        return Err(Error::Parameter(format!("grid_step = {} must lie in (0, a]", opts.grid_step)));
    }
    let ell_range = (b * (radius(g) + radius(h))).floor() as i64;
    let (xs, step) = residual_grid(a, opts.grid_step, opts.grid);
    let ells: Vec<i64> = (-ell_range..=ell_range).collect();
    // one task per grid point; max is order independent so both strategies agree
    let per_point = opts.exec.map(xs.len(), |k| {
        ells.iter()
            .map(|&ell| {
                let target = if ell == 0 { b } else { 0.0 };
                (condition_sum(g, h, a, b, ell, xs[k]) - target).abs()
            })
            .collect::<Vec<f64>>()
    });
    let residuals: Vec<(i64, f64)> = ells
        .iter()
        .enumerate()
        .map(|(i, &ell)| (ell, per_point.iter().fold(0.0, |m, r| f64::max(m, r[i]))))
        .collect();
    let pass = residuals.iter().all(|(_, r)| *r <= opts.tolerance);
    Ok(DualityReport {
        residuals,
        ell_range,
        grid_step: step,
        tolerance: opts.tolerance,
        pass,
    })
}

/// Verifies a synthesized dual on its own grid and stores the report in it.
pub fn attach_residuals<'d>(g: &impl RealFn, dual: &'d mut DualResult, tolerance: f64) -> Result<&'d DualityReport> {
    let report = duality_residuals(g, &dual.h, dual.a, dual.b, dual.grid_step, tolerance)?;
    Ok(dual.residual_summary.insert(report))
}

/// Estimate of the upper frame bound,
/// `(1/b) sum_k sup_x |sum_n w(x - n a) w(x - n a - k/b)|`,
/// with the supremum taken over cell midpoints of `[0, a]`.
///
/// Midpoints keep jump points of discontinuous windows (where the closed box
/// double counts) off the grid; for continuous windows the choice is
/// immaterial at this resolution. This is a grid estimate, not a certified bound.
pub fn bessel_upper_bound(w: &impl RealFn, a: f64, b: f64, grid_step: f64) -> f64 {
    bessel_upper_bound_with(w, a, b, grid_step, Execution::default())
}

pub fn bessel_upper_bound_with(w: &impl RealFn, a: f64, b: f64, grid_step: f64, exec: Execution) -> f64 {
    let (lo, hi) = w.support();
    let width = hi - lo;
    let kmax = (b * width).floor() as i64;
    let cells = ((a / grid_step).round() as usize).max(1);
    let step = a / cells as f64;
    let ks: Vec<i64> = (-kmax..=kmax).collect();
    let sups = exec.map(ks.len(), |i| {
        let shift = ks[i] as f64 / b;
        (0..cells)
            .map(|c| {
                let x = (c as f64 + 0.5) * step;
                let n0 = ((x - hi) / a).ceil() as i64 - 1;
                let n1 = ((x - lo) / a).floor() as i64 + 1;
                (n0..=n1)
                    .map(|n| {
                        let y = x - n as f64 * a;
                        w.eval(y) * w.eval(y - shift)
                    })
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    });
    sups.iter().sum::<f64>() / b
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsEstimate {
    pub bessel_upper_g: f64,
    pub bessel_upper_h: f64,
    /// `1 / bessel_upper_h`, a lower frame bound for `g` once duality holds.
    pub lower_frame_g: f64,
}

/// Bessel estimates for both windows and the implied lower frame bound of `g`.
pub fn frame_bounds_from_dual(
    g: &impl RealFn,
    h: &GridFunction,
    a: f64,
    b: f64,
    grid_step: f64,
    tolerance: f64,
) -> Result<BoundsEstimate> {
    let report = duality_residuals(g, h, a, b, grid_step, tolerance)?;
    if !report.pass {
        return Err(Error::DualityNotVerified {
            max_residual: report.max_residual(),
            tolerance,
        });
    }
    let step = a / 2000.0;
    let bessel_upper_g = bessel_upper_bound(g, a, b, step);
    let bessel_upper_h = bessel_upper_bound(h, a, b, step);
    Ok(BoundsEstimate {
        bessel_upper_g,
        bessel_upper_h,
        lower_frame_g: 1.0 / bessel_upper_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::synthesize_dual;
    use crate::window::{make_window, sample, Window, WindowSpec};

    fn b2() -> Window {
        make_window(WindowSpec::bspline(2).unwrap()).unwrap()
    }

    fn unit_box() -> Window {
        make_window(WindowSpec::boxcar(0.5).unwrap()).unwrap()
    }

    #[test]
    fn synthesized_triangle_dual_passes() {
        let g = b2();
        let mut d = synthesize_dual(&g, 0.5, 1.0, 0.5 / 2000.0).unwrap();
        let r = attach_residuals(&g, &mut d, default_tolerance(1.0)).unwrap();
        assert!(r.pass);
        assert!(r.max_residual() <= 1e-8, "{:?}", r.residuals);
        assert_eq!(r.ell_range, 1);
        assert!(d.residual_summary.is_some());
    }

    #[test]
    fn zero_dual_misses_by_b() {
        let g = b2();
        let zero = GridFunction::new(-0.75, 0.00025, vec![0.0; 6001]).unwrap();
        let r = duality_residuals(&g, &zero, 0.5, 1.0, 0.00025, 1e-6).unwrap();
        assert_eq!(r.residual(0), Some(1.0));
        assert!(r.residuals.iter().filter(|(l, _)| *l != 0).all(|(_, v)| *v == 0.0));
        assert!(!r.pass);
        assert!(matches!(
            frame_bounds_from_dual(&g, &zero, 0.5, 1.0, 0.00025, 1e-6),
            Err(Error::DualityNotVerified { .. })
        ));
    }

    #[test]
    fn doubled_dual_misses_by_b() {
        let g = b2();
        let d = synthesize_dual(&g, 0.5, 1.0, 0.5 / 2000.0).unwrap();
        let r = duality_residuals(&g, &d.h.scaled(2.0), 0.5, 1.0, d.grid_step, 1e-6).unwrap();
        assert!((r.residual(0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn box_bessel_bound_and_painless_pair() {
        let bx = unit_box();
        assert!((bessel_upper_bound(&bx, 1.0, 1.0, 1.0 / 2000.0) - 1.0).abs() < 1e-12);
        let h = sample(&bx, -0.5, 0.5, 0.001).unwrap();
        let bounds = frame_bounds_from_dual(&bx, &h, 1.0, 1.0, 0.001, 1e-6).unwrap();
        assert!((bounds.lower_frame_g - 1.0).abs() < 0.05);
        assert!((bounds.bessel_upper_g - 1.0).abs() < 0.05);
    }

    #[test]
    fn zero_window_has_zero_bound() {
        let zero = GridFunction::new(-1.0, 0.5, vec![0.0; 5]).unwrap();
        assert_eq!(bessel_upper_bound(&zero, 1.0, 0.5, 0.001), 0.0);
    }

    #[test]
    fn grid_validation() {
        let g = b2();
        let h = GridFunction::new(-0.75, 0.25, vec![0.0; 7]).unwrap();
        assert!(duality_residuals(&g, &h, 0.5, 1.0, 0.0, 1e-6).is_err());
        assert!(duality_residuals(&g, &h, 0.0, 1.0, 0.1, 1e-6).is_err());
    }
}
