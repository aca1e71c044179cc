//! Window descriptions and their exact evaluators.
//!
//! Every catalog window is even, real valued and supported on
//! `[-N/2, N/2]` (or `[-c, c]` for the box). Evaluation is exact: closed forms
//! for the truncated classical functions and an `O(N^2)` triangular table of
//! the centered two-term recurrence for B-splines.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{whole_steps, GridFunction};

/// A real function of one variable with bounded support.
pub trait RealFn: Sync {
    fn eval(&self, x: f64) -> f64;

    /// Closed interval outside of which the function vanishes.
    fn support(&self) -> (f64, f64);
}

impl<F: RealFn + ?Sized> RealFn for &F {
    fn eval(&self, x: f64) -> f64 {
        (**self).eval(x)
    }

    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowKind {
    /// Centered cardinal B-spline `B_N`.
    BSpline { order: u32 },
    /// `cos^(2N-2)(pi x / N)` on `[-N/2, N/2]`.
    CosPower { n: u32 },
    /// `exp(-|x|) - exp(-N/2)`.
    TruncExp { n: f64 },
    /// `1/(1+|x|) - 1/(1+N/2)`.
    TruncRationalAbs { n: f64 },
    /// `1/(1+x^2) - 1/(1+(N/2)^2)`.
    TruncRationalSq { n: f64 },
    /// `exp(-x^2) - exp(-N^2/4)`.
    TruncGauss { n: f64 },
    /// Indicator of the closed interval `[-c, c]`.
    Box { c: f64 },
    /// Even, monotone piecewise-linear interpolant through knots on `[-N/2, 0]`.
    KnotInterpolant { n: f64, knots: Vec<(f64, f64)> },
}

/// Validated description of a catalog window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    kind: WindowKind,
}

impl WindowSpec {
    pub fn new(kind: WindowKind) -> Result<Self> {
        let spec = WindowSpec { kind };
        spec.validate()?;
        Ok(spec)
    }

    pub fn bspline(order: u32) -> Result<Self> {
        Self::new(WindowKind::BSpline { order })
    }

    pub fn cospower(n: u32) -> Result<Self> {
        Self::new(WindowKind::CosPower { n })
    }

    pub fn trunc_exp(n: f64) -> Result<Self> {
        Self::new(WindowKind::TruncExp { n })
    }

    pub fn trunc_rational_abs(n: f64) -> Result<Self> {
        Self::new(WindowKind::TruncRationalAbs { n })
    }

    pub fn trunc_rational_sq(n: f64) -> Result<Self> {
        Self::new(WindowKind::TruncRationalSq { n })
    }

    pub fn trunc_gauss(n: f64) -> Result<Self> {
        Self::new(WindowKind::TruncGauss { n })
    }

    pub fn boxcar(c: f64) -> Result<Self> {
        Self::new(WindowKind::Box { c })
    }

    pub fn knot_interpolant(n: f64, knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(WindowKind::KnotInterpolant { n, knots })
    }

    pub fn kind(&self) -> &WindowKind {
        &self.kind
    }

    pub fn support_radius(&self) -> f64 {
        match &self.kind {
            WindowKind::BSpline { order } => *order as f64 / 2.0,
            WindowKind::CosPower { n } => *n as f64 / 2.0,
            WindowKind::Box { c } => *c,
            WindowKind::TruncExp { n }
            | WindowKind::TruncRationalAbs { n }
            | WindowKind::TruncRationalSq { n }
            | WindowKind::TruncGauss { n }
            | WindowKind::KnotInterpolant { n, .. } => n / 2.0,
        }
    }

    /// Support length `N`.
    pub fn support_length(&self) -> f64 {
        2.0 * self.support_radius()
    }

    /// Canonical identifier in the command-line grammar, e.g. `bspline:N=2`.
    pub fn id(&self) -> String {
        self.to_string()
    }

    fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(field, format!("{v} must be positive and finite")))
            }
        }
        match &self.kind {
            WindowKind::BSpline { order } if *order == 0 => {
                Err(Error::validation("N", "B-spline order must be a positive integer"))
            }
            WindowKind::CosPower { n } if *n < 2 => {
                Err(Error::validation("N", format!("cospower requires N >= 2, got {n}")))
            }
            WindowKind::BSpline { .. } | WindowKind::CosPower { .. } => Ok(()),
            WindowKind::TruncExp { n }
            | WindowKind::TruncRationalAbs { n }
            | WindowKind::TruncRationalSq { n }
            | WindowKind::TruncGauss { n } => positive("N", *n),
            WindowKind::Box { c } => positive("c", *c),
            WindowKind::KnotInterpolant { n, knots } => validate_knots(*n, knots),
        }
    }
}

fn validate_knots(n: f64, knots: &[(f64, f64)]) -> Result<()> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::validation("N", format!("{n} must be positive and finite")));
    }
    if knots.len() < 2 {
        return Err(Error::validation("knots", "at least two knots are required"));
    }
    if let Some((x, v)) = knots.iter().find(|(x, v)| !(x.is_finite() && v.is_finite())) {
        return Err(Error::validation("knots", format!("non-finite knot ({x}, {v})")));
    }
    let eps = 1e-12 * n.max(1.0);
    let (x0, v0) = knots[0];
    if (x0 + n / 2.0).abs() > eps {
        return Err(Error::validation("knots", format!("first knot must sit at -N/2 = {}, got {x0}", -n / 2.0)));
    }
    if v0 != 0.0 {
        return Err(Error::validation("knots", format!("value at -N/2 must be 0, got {v0}")));
    }
    let (xl, _) = knots[knots.len() - 1];
    if xl.abs() > eps {
        return Err(Error::validation("knots", format!("last knot must sit at x = 0, got {xl}")));
    }
    for pair in knots.windows(2) {
        let ((xa, va), (xb, vb)) = (pair[0], pair[1]);
        if xb <= xa {
            return Err(Error::validation("knots", format!("x not strictly ascending at {xa} -> {xb}")));
        }
        if vb <= va {
            return Err(Error::validation("knots", format!("values not strictly increasing at x = {xb} ({va} -> {vb})")));
        }
    }
    Ok(())
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WindowKind::BSpline { order } => write!(f, "bspline:N={order}"),
            WindowKind::CosPower { n } => write!(f, "cospower:N={n}"),
            WindowKind::TruncExp { n } => write!(f, "exp:N={n}"),
            WindowKind::TruncRationalAbs { n } => write!(f, "rational_abs:N={n}"),
            WindowKind::TruncRationalSq { n } => write!(f, "rational_sq:N={n}"),
            WindowKind::TruncGauss { n } => write!(f, "gauss:N={n}"),
            WindowKind::Box { c } => write!(f, "box:c={c}"),
            WindowKind::KnotInterpolant { n, knots } => write!(f, "knots:N={n};k={}", knots.len()),
        }
    }
}

/// Parses the closed-form part of the window grammar (`bspline:N=2`,
/// `gauss:N=2`, `box:c=1`, ...). Knot windows need a file and are loaded
/// through [`crate::io::window_from_arg`].
impl FromStr for WindowSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::validation("window", format!("expected NAME:KEY=VALUE, got `{s}`")))?;
        let (key, value) = rest
            .split_once('=')
            .ok_or_else(|| Error::validation("window", format!("expected KEY=VALUE after `{name}:`, got `{rest}`")))?;
        let real = || -> Result<f64> {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::validation("window", format!("`{value}` is not a number")))
        };
        let integer = || -> Result<u32> {
            value
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::validation("N", format!("`{value}` is not a positive integer")))
        };
        let expect_key = |want: &str| -> Result<()> {
            if key.trim() == want {
                Ok(())
            } else {
                Err(Error::validation("window", format!("`{name}` takes `{want}=`, got `{key}=`")))
            }
        };
        match name.trim() {
            "bspline" => {
                expect_key("N")?;
                WindowSpec::bspline(integer()?)
            }
            "cospower" => {
                expect_key("N")?;
                WindowSpec::cospower(integer()?)
            }
            "exp" => {
                expect_key("N")?;
                WindowSpec::trunc_exp(real()?)
            }
            "gauss" => {
                expect_key("N")?;
                WindowSpec::trunc_gauss(real()?)
            }
            "rational_abs" => {
                expect_key("N")?;
                WindowSpec::trunc_rational_abs(real()?)
            }
            "rational_sq" => {
                expect_key("N")?;
                WindowSpec::trunc_rational_sq(real()?)
            }
            "box" => {
                expect_key("c")?;
                WindowSpec::boxcar(real()?)
            }
            "knots" => Err(Error::validation("window", "knot windows are read from a CSV file")),
            other => Err(Error::validation("window", format!("unknown window kind `{other}`"))),
        }
    }
}

/// An immutable, evaluable window.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    spec: WindowSpec,
    radius: f64,
    /// Value subtracted by the truncated windows so that they vanish at the edge.
    floor: f64,
}

/// Builds the evaluator for a validated spec.
pub fn make_window(spec: WindowSpec) -> Result<Window> {
    spec.validate()?;
    let radius = spec.support_radius();
    let floor = match spec.kind {
        WindowKind::TruncExp { .. } => (-radius).exp(),
        WindowKind::TruncRationalAbs { .. } => 1.0 / (1.0 + radius),
        WindowKind::TruncRationalSq { .. } => 1.0 / (1.0 + radius * radius),
        WindowKind::TruncGauss { .. } => (-radius * radius).exp(),
        _ => 0.0,
    };
    Ok(Window {
        spec,
        radius,
        floor,
    })
}

impl Window {
    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn support_radius(&self) -> f64 {
        self.radius
    }

    /// Support length `N`.
    pub fn n(&self) -> f64 {
        2.0 * self.radius
    }

    /// Largest value; every catalog window peaks at the origin.
    pub fn max_value(&self) -> f64 {
        self.evaluate(0.0)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let t = x.abs();
        if let WindowKind::Box { c } = self.spec.kind {
            return if t <= c { 1.0 } else { 0.0 };
        }
        if let WindowKind::BSpline { order: 1 } = self.spec.kind {
            return if t <= 0.5 { 1.0 } else { 0.0 };
        }
        if !(t < self.radius) {
            return 0.0;
        }
        match &self.spec.kind {
            WindowKind::BSpline { order } => bspline(*order, -t),
            WindowKind::CosPower { n } => {
                let n = *n as f64;
                (PI * t / n).cos().powi(2 * (n as i32) - 2)
            }
            WindowKind::TruncExp { .. } => (-t).exp() - self.floor,
            WindowKind::TruncRationalAbs { .. } => 1.0 / (1.0 + t) - self.floor,
            WindowKind::TruncRationalSq { .. } => 1.0 / (1.0 + t * t) - self.floor,
            WindowKind::TruncGauss { .. } => (-t * t).exp() - self.floor,
            WindowKind::KnotInterpolant { knots, .. } => piecewise_linear(knots, -t),
            WindowKind::Box { .. } => unreachable!(),
        }
    }

    /// Points where the window or its derivative may fail to be smooth,
    /// sorted ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let r = self.radius;
        let mut pts = match &self.spec.kind {
            WindowKind::BSpline { order } => (0..=*order).map(|k| -r + k as f64).collect(),
            WindowKind::CosPower { .. } | WindowKind::TruncRationalSq { .. } | WindowKind::TruncGauss { .. } => {
                vec![-r, r]
            }
            WindowKind::TruncExp { .. } | WindowKind::TruncRationalAbs { .. } => vec![-r, 0.0, r],
            WindowKind::Box { c } => vec![-c, *c],
            WindowKind::KnotInterpolant { knots, .. } => knots
                .iter()
                .flat_map(|&(x, _)| [x, -x])
                .collect(),
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        pts
    }

    /// Whether the window is continuous on the real line.
    pub fn is_continuous(&self) -> bool {
        !matches!(self.spec.kind, WindowKind::Box { .. } | WindowKind::BSpline { order: 1 })
    }
}

impl RealFn for Window {
    fn eval(&self, x: f64) -> f64 {
        self.evaluate(x)
    }

    fn support(&self) -> (f64, f64) {
        (-self.radius, self.radius)
    }
}

/// Samples `w` at `x_min + k * step` for `k = 0..=floor((x_max - x_min) / step)`.
pub fn sample(w: &impl RealFn, x_min: f64, x_max: f64, step: f64) -> Result<GridFunction> {
    if !(x_min.is_finite() && x_max.is_finite()) {
        return Err(Error::validation("bounds", format!("[{x_min}, {x_max}] is not finite")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::validation("step", format!("{step} must be positive and finite")));
    }
    if !(x_min < x_max) {
        return Err(Error::validation("bounds", format!("x_min = {x_min} must be below x_max = {x_max}")));
    }
    let len = whole_steps(x_min, x_max, step) + 1;
    GridFunction::from_fn(x_min, step, len, |x| w.eval(x))
}

/// Centered B-spline of the given order at `x`.
///
/// Level `k` of the table holds `B_{order-k}` at `x + (k - 2i)/2`, so each
/// level is built from the two neighbouring entries of the level below. The
/// base box is half-open so adjacent unit cells never double count.
fn bspline(order: u32, x: f64) -> f64 {
    let half = order as f64 / 2.0;
    if !(x.abs() < half) {
        return 0.0;
    }
    if order == 1 {
        return 1.0;
    }
    let top = (order - 1) as usize;
    let mut vals: Vec<f64> = (0..=top)
        .map(|i| {
            let p = x + (top as f64 - 2.0 * i as f64) / 2.0;
            if (-0.5..0.5).contains(&p) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for k in 2..=order {
        let level = (order - k) as usize;
        let hk = k as f64 / 2.0;
        let denom = (k - 1) as f64;
        for i in 0..=level {
            let p = x + (level as f64 - 2.0 * i as f64) / 2.0;
            vals[i] = ((p + hk) * vals[i] + (hk - p) * vals[i + 1]) / denom;
        }
        vals.truncate(level + 1);
    }
    vals[0]
}

/// Linear interpolation through ascending knots; `x` must lie in their span.
fn piecewise_linear(knots: &[(f64, f64)], x: f64) -> f64 {
    let j = knots.partition_point(|&(kx, _)| kx <= x);
    if j == 0 {
        return knots[0].1;
    }
    if j == knots.len() {
        return knots[j - 1].1;
    }
    let (x0, v0) = knots[j - 1];
    let (x1, v1) = knots[j];
    if x == x0 {
        return v0;
    }
    v0 + (v1 - v0) * (x - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example_knots() -> Vec<(f64, f64)> {
        vec![(-2.5, 0.0), (-7.0 / 3.0, 3.0), (-4.0 / 3.0, 5.0), (-1.0, 10.0), (0.0, 12.0)]
    }

    fn w(spec: Result<WindowSpec>) -> Window {
        make_window(spec.unwrap()).unwrap()
    }

    #[test]
    fn bspline_low_orders_match_closed_forms() {
        let b2 = w(WindowSpec::bspline(2));
        assert_eq!(b2.evaluate(0.0), 1.0);
        assert_eq!(b2.evaluate(1.0), 0.0);
        assert_eq!(b2.evaluate(-1.0), 0.0);
        assert_eq!(b2.evaluate(0.5), 0.5);
        let b3 = w(WindowSpec::bspline(3));
        // B_3 = 3/4 - x^2 on |x| <= 1/2, (3/2 - |x|)^2 / 2 on 1/2 <= |x| <= 3/2
        for &x in &[0.0f64, 0.2, -0.4, 0.5, 0.9, -1.3] {
            let t: f64 = x.abs();
            let want = if t <= 0.5 { 0.75 - t * t } else { (1.5 - t).powi(2) / 2.0 };
            assert!((b3.evaluate(x) - want).abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn b1_is_closed_unit_box() {
        let b1 = w(WindowSpec::bspline(1));
        assert_eq!(b1.evaluate(0.5), 1.0);
        assert_eq!(b1.evaluate(-0.5), 1.0);
        assert_eq!(b1.evaluate(0.5000001), 0.0);
        assert!(!b1.is_continuous());
    }

    #[test]
    fn truncated_windows_vanish_at_edges() {
        assert_eq!(w(WindowSpec::trunc_exp(2.0)).evaluate(1.0), 0.0);
        assert_eq!(w(WindowSpec::trunc_exp(2.0)).evaluate(-1.0), 0.0);
        let g = w(WindowSpec::trunc_gauss(2.0));
        assert!((g.evaluate(0.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(g.evaluate(2.0), 0.0);
        let p = w(WindowSpec::trunc_rational_sq(2.0));
        assert!((p.evaluate(0.0) - 0.5).abs() < 1e-15);
        let k = w(WindowSpec::trunc_rational_abs(2.0));
        assert!((k.evaluate(0.0) - 0.5).abs() < 1e-15);
        let f = w(WindowSpec::cospower(3));
        assert_eq!(f.evaluate(0.0), 1.0);
        assert_eq!(f.evaluate(1.5), 0.0);
        assert!((f.evaluate(0.75) - (PI / 4.0).cos().powi(4)).abs() < 1e-15);
    }

    #[test]
    fn knot_interpolant_hits_its_knots() {
        let g = w(WindowSpec::knot_interpolant(5.0, example_knots()));
        assert_eq!(g.evaluate(0.0), 12.0);
        assert_eq!(g.evaluate(-1.0), 10.0);
        assert_eq!(g.evaluate(1.0), 10.0);
        assert_eq!(g.evaluate(-4.0 / 3.0), 5.0);
        assert_eq!(g.evaluate(7.0 / 3.0), 3.0);
        assert_eq!(g.evaluate(-2.5), 0.0);
        assert!((g.evaluate(-0.5) - 11.0).abs() < 1e-14);
    }

    #[test]
    fn knot_validation_names_the_field() {
        let mut bad = example_knots();
        bad[2].1 = 2.0;
        let err = WindowSpec::knot_interpolant(5.0, bad).unwrap_err();
        assert!(matches!(err, Error::Validation { field: "knots", .. }), "{err}");
        let mut off = example_knots();
        off[0] = (-2.4, 0.0);
        assert!(WindowSpec::knot_interpolant(5.0, off).is_err());
        let mut lifted = example_knots();
        lifted[0].1 = 0.5;
        assert!(WindowSpec::knot_interpolant(5.0, lifted).is_err());
        assert!(WindowSpec::cospower(1).is_err());
        assert!(WindowSpec::bspline(0).is_err());
        assert!(WindowSpec::trunc_gauss(-1.0).is_err());
        assert!(matches!(WindowSpec::boxcar(0.0), Err(Error::Validation { field: "c", .. })));
    }

    #[test]
    fn sampling() {
        let b2 = w(WindowSpec::bspline(2));
        let s = sample(&b2, -1.0, 1.0, 0.5).unwrap();
        assert_eq!(s.values(), &[0.0, 0.5, 1.0, 0.5, 0.0]);
        let bx = w(WindowSpec::boxcar(1.0));
        assert_eq!(sample(&bx, 0.0, 1.0, 0.5).unwrap().values(), &[1.0, 1.0, 1.0]);
        for (x, v) in s.nodes() {
            assert_eq!(s.evaluate(x), v);
        }
        assert!(sample(&b2, f64::NEG_INFINITY, 1.0, 0.5).is_err());
        assert!(sample(&b2, 1.0, -1.0, 0.5).is_err());
        assert!(sample(&b2, -1.0, 1.0, 0.0).is_err());
        let fine = sample(&b2, -1.0, 1.0, 0.001).unwrap();
        assert_eq!(fine.len(), 2001);
    }

    #[test]
    fn spec_grammar_round_trips() {
        for s in ["bspline:N=2", "cospower:N=3", "exp:N=2", "gauss:N=2", "rational_abs:N=2", "rational_sq:N=2", "box:c=1"] {
            let spec: WindowSpec = s.parse().unwrap();
            assert_eq!(spec.id(), s);
        }
        assert!("bspline:N=2.5".parse::<WindowSpec>().is_err());
        assert!("box:N=1".parse::<WindowSpec>().is_err());
        assert!("triangle:N=2".parse::<WindowSpec>().is_err());
        assert!("gauss".parse::<WindowSpec>().is_err());
    }

    #[test]
    fn breakpoints_of_bspline_are_its_knots() {
        let b4 = w(WindowSpec::bspline(4));
        assert_eq!(b4.breakpoints(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let b3 = w(WindowSpec::bspline(3));
        assert_eq!(b3.breakpoints(), vec![-1.5, -0.5, 0.5, 1.5]);
    }
}
