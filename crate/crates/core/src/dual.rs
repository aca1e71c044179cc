//! Pointwise synthesis of a dual window supported on `[-3a/2, 3a/2]`.
//!
//! For `x` in `[-a/2, a/2]` the duality conditions for a dual `h` with that
//! support reduce to the 3x3 system
//!
//! ```text
//! G(x) (h(x-a), h(x), h(x+a))^T = (0, b, 0)^T,   G(x)[l][m] = g(x - l/b + m a),
//! ```
//!
//! with `l, m` running over `-1, 0, 1`. Solving it at every grid point of
//! `[-a/2, a/2]` fills three disjoint translates of that interval, which
//! together form the dual.

use crate::duality::DualityReport;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::GridFunction;
use crate::window::RealFn;

/// Relative singularity threshold: `|det G| <= 1e-10 * s^3`, `s = max |G_ij|`.
pub const SINGULARITY_RTOL: f64 = 1e-10;

/// Relative tolerance for agreement of the two solves meeting at `x = ±a/2`.
pub const SEAM_RTOL: f64 = 1e-8;

/// `G(x)` with `entries[l + 1][m + 1] = g(x - l/b + m a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GMatrix {
    pub x: f64,
    pub entries: [[f64; 3]; 3],
}

/// Unsigned minors of the middle row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minors {
    pub g21: f64,
    pub g22: f64,
    pub g23: f64,
}

pub fn build_g(w: &impl RealFn, a: f64, b: f64, x: f64) -> GMatrix {
    let period = 1.0 / b;
    let mut entries = [[0.0; 3]; 3];
    for (i, row) in entries.iter_mut().enumerate() {
        let l = i as f64 - 1.0;
        for (j, e) in row.iter_mut().enumerate() {
            let m = j as f64 - 1.0;
            *e = w.eval(x - l * period + m * a);
        }
    }
    GMatrix { x, entries }
}

pub fn minors(m: &GMatrix) -> Minors {
    m.minors()
}

pub fn det_g(m: &GMatrix) -> f64 {
    m.det()
}

impl GMatrix {
    pub fn identity(x: f64) -> Self {
        GMatrix {
            x,
            entries: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn minors(&self) -> Minors {
        let e = &self.entries;
        Minors {
            g21: e[0][1] * e[2][2] - e[0][2] * e[2][1],
            g22: e[0][0] * e[2][2] - e[0][2] * e[2][0],
            g23: e[0][0] * e[2][1] - e[0][1] * e[2][0],
        }
    }

    /// Cofactor expansion along the middle row:
    /// `-g(x-a) G21 + g(x) G22 - g(x+a) G23`.
    pub fn det(&self) -> f64 {
        let m = self.minors();
        let row = &self.entries[1];
        -row[0] * m.g21 + row[1] * m.g22 - row[2] * m.g23
    }

    /// Lower bound `A_N(x) = (g(x) - g(x-a)) G21 + (g(x) - g(x+a)) G23`.
    pub fn lower_bound(&self) -> f64 {
        let m = self.minors();
        let row = &self.entries[1];
        (row[1] - row[0]) * m.g21 + (row[1] - row[2]) * m.g23
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    pub fn is_singular(&self) -> bool {
        let s = self.max_abs();
        self.det().abs() <= SINGULARITY_RTOL * s * s * s
    }

    /// Cramer's rule for `G v = (0, b, 0)^T`. Replacing column `j` by the
    /// right-hand side and expanding along that column leaves `±b G2j`.
    pub fn solve_middle(&self, b: f64) -> [f64; 3] {
        let m = self.minors();
        let det = self.det();
        [-b * m.g21 / det, b * m.g22 / det, -b * m.g23 / det]
    }

    /// `|| G v - (0, b, 0)^T ||_inf`.
    pub fn residual(&self, v: &[f64; 3], b: f64) -> f64 {
        let rhs = [0.0, b, 0.0];
        self.entries
            .iter()
            .zip(rhs)
            .map(|(row, r)| (row[0] * v[0] + row[1] * v[1] + row[2] * v[2] - r).abs())
            .fold(0.0, f64::max)
    }

    /// Infinity-norm condition number via the adjugate.
    pub fn condition_estimate(&self) -> f64 {
        let e = &self.entries;
        let det = self.det();
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| e[r0][c0] * e[r1][c1] - e[r0][c1] * e[r1][c0];
        // adj[i][j] = cofactor C[j][i]
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let norm = |m: &[[f64; 3]; 3]| m.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        norm(e) * norm(&adj) / det.abs()
    }
}

/// One row of the determinant scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetSample {
    pub x: f64,
    pub det: f64,
    /// The lower bound `A_N(x)`.
    pub a_n: f64,
    pub g21: f64,
    pub g22: f64,
    pub g23: f64,
    /// Largest absolute entry of `G(x)`.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetScan {
    pub samples: Vec<DetSample>,
    pub min_abs_det: f64,
    pub argmin: f64,
    pub step: f64,
}

impl DetScan {
    /// Signed determinant as a grid function over `[-a/2, a/2]`.
    pub fn det_function(&self) -> GridFunction {
        GridFunction::new(
            self.samples[0].x,
            self.step,
            self.samples.iter().map(|s| s.det).collect(),
        )
        .expect("scan has at least two finite samples")
    }

    /// Largest matrix entry seen over the scan.
    pub fn scale(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.scale))
    }
}

/// Grid of `[-a/2, a/2]` whose step divides `a` exactly, so the three
/// translates used by the dual share one uniform grid. Mirrored halves are
/// computed as exact negatives of each other.
fn centered_grid(a: f64, grid_step: f64) -> (Vec<f64>, f64) {
    let n = ((a / grid_step).round() as usize).max(1);
    let step = a / n as f64;
    let pts = (0..=n)
        .map(|k| {
            if 2 * k <= n {
                -a / 2.0 + k as f64 * step
            } else {
                a / 2.0 - (n - k) as f64 * step
            }
        })
        .collect();
    (pts, step)
}

fn support_length(w: &impl RealFn) -> f64 {
    let (lo, hi) = w.support();
    hi - lo
}

fn validate(w: &impl RealFn, a: f64, b: f64, grid_step: f64) -> Result<()> {
    let n = support_length(w);
    if !(a.is_finite() && a > 0.0 && a < n) {
        return Err(Error::Parameter(format!("a = {a} must satisfy 0 < a < N = {n}")));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::Parameter(format!("b = {b} must be positive")));
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::Parameter(format!("grid_step = {grid_step} must be positive")));
    }
    Ok(())
}

/// Default synthesis step `a / 2000`.
pub fn default_grid_step(a: f64) -> f64 {
    a / 2000.0
}

/// `det G(x)` and its diagnostics on the closed grid of `[-a/2, a/2]`.
pub fn det_scan(w: &impl RealFn, a: f64, b: f64, grid_step: f64) -> Result<DetScan> {
    det_scan_with(w, a, b, grid_step, Execution::default())
}

pub fn det_scan_with(w: &impl RealFn, a: f64, b: f64, grid_step: f64, exec: Execution) -> Result<DetScan> {
    validate(w, a, b, grid_step)?;
    if grid_step > a / 100.0 {
        return Err(Error::Parameter(format!(
            "grid_step = {grid_step} is coarser than a/100 = {}",
            a / 100.0
        )));
    }
    let (xs, step) = centered_grid(a, grid_step);
    let samples = exec.map(xs.len(), |k| {
        let g = build_g(w, a, b, xs[k]);
        let m = g.minors();
        DetSample {
            x: xs[k],
            det: g.det(),
            a_n: g.lower_bound(),
            g21: m.g21,
            g22: m.g22,
            g23: m.g23,
            scale: g.max_abs(),
        }
    });
    let (argmin, min_abs_det) = samples
        .iter()
        .map(|s| (s.x, s.det.abs()))
        .fold((samples[0].x, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    Ok(DetScan {
        samples,
        min_abs_det,
        argmin,
        step,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SynthesisOptions {
    pub grid_step: Option<f64>,
    /// Run even when `b <= 2/(N+a)`; the result is flagged as out of range.
    pub force: bool,
    pub exec: Execution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualResult {
    /// Dual window on `[-3a/2, 3a/2]`, zero outside.
    pub h: GridFunction,
    pub a: f64,
    pub b: f64,
    pub min_abs_det: f64,
    pub det_argmin: f64,
    /// Actual step; divides `a` exactly.
    pub grid_step: f64,
    /// Largest gap between the two solves that meet at `x = ±a/2`. The dual
    /// is only determined almost everywhere and may jump there; the stored
    /// seam sample is the mean of both sides.
    pub seam_jump: f64,
    /// `seam_jump <= SEAM_RTOL * max |h|`.
    pub seam_consistent: bool,
    /// Largest `|| G v - (0,b,0) ||_inf / (b * cond(G))` over the grid.
    pub max_relative_solve_residual: f64,
    /// `b <= 2/(N+a)` and the run was forced.
    pub out_of_range: bool,
    /// Filled in by [`crate::duality::duality_residuals`] when requested.
    pub residual_summary: Option<DualityReport>,
}

impl DualResult {
    /// Support bound `3a/2`.
    pub fn support_radius(&self) -> f64 {
        1.5 * self.a
    }
}

/// Lower edge `2/(N+a)` of the synthesis range in `b`.
pub fn degenerate_bound(n: f64, a: f64) -> f64 {
    2.0 / (n + a)
}

/// Synthesizes the dual with default options.
pub fn synthesize_dual(w: &impl RealFn, a: f64, b: f64, grid_step: f64) -> Result<DualResult> {
    synthesize_dual_with(
        w,
        a,
        b,
        SynthesisOptions {
            grid_step: Some(grid_step),
            ..SynthesisOptions::default()
        },
    )
}

pub fn synthesize_dual_with(w: &impl RealFn, a: f64, b: f64, opts: SynthesisOptions) -> Result<DualResult> {
    let grid_step = opts.grid_step.unwrap_or_else(|| default_grid_step(a));
    validate(w, a, b, grid_step)?;
    let n = support_length(w);
    let bound = degenerate_bound(n, a);
    let out_of_range = b <= bound;
    if out_of_range && !opts.force {
        return Err(Error::ParameterOutOfRange { b, bound });
    }
    let (xs, step) = centered_grid(a, grid_step);
    let cells = xs.len() - 1;

    struct Point {
        det: f64,
        singular: bool,
        v: [f64; 3],
        rel_residual: f64,
    }
    let points = opts.exec.map(xs.len(), |k| {
        let g = build_g(w, a, b, xs[k]);
        let det = g.det();
        if g.is_singular() {
            return Point {
                det,
                singular: true,
                v: [0.0; 3],
                rel_residual: 0.0,
            };
        }
        let v = g.solve_middle(b);
        let rel_residual = g.residual(&v, b) / (b * g.condition_estimate());
        Point {
            det,
            singular: false,
            v,
            rel_residual,
        }
    });

    let (argmin, min_abs_det) = xs
        .iter()
        .zip(&points)
        .map(|(&x, p)| (x, p.det.abs()))
        .fold((xs[0], f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    if let Some((x, p)) = xs
        .iter()
        .zip(&points)
        .filter(|(_, p)| p.singular)
        .min_by(|l, r| l.1.det.abs().total_cmp(&r.1.det.abs()))
    {
        return Err(Error::SingularMatrix {
            x: *x,
            abs_det: p.det.abs(),
        });
    }

    // strand s of point k lands on node s * cells + k
    let mut values = vec![0.0; 3 * cells + 1];
    for (k, p) in points.iter().enumerate() {
        for (s, &v) in p.v.iter().enumerate() {
            values[s * cells + k] = v;
        }
    }
    let left_jump = points[cells].v[0] - points[0].v[1];
    let right_jump = points[cells].v[1] - points[0].v[2];
    values[cells] = 0.5 * (points[cells].v[0] + points[0].v[1]);
    values[2 * cells] = 0.5 * (points[cells].v[1] + points[0].v[2]);
    let seam_jump = left_jump.abs().max(right_jump.abs());

    let h = GridFunction::new(-1.5 * a, step, values)?;
    let seam_consistent = seam_jump <= SEAM_RTOL * h.max_abs();
    let max_relative_solve_residual = points.iter().map(|p| p.rel_residual).fold(0.0, f64::max);
    Ok(DualResult {
        h,
        a,
        b,
        min_abs_det,
        det_argmin: argmin,
        grid_step: step,
        seam_jump,
        seam_consistent,
        max_relative_solve_residual,
        out_of_range,
        residual_summary: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::{make_window, Window, WindowSpec};

    fn b2() -> Window {
        make_window(WindowSpec::bspline(2).unwrap()).unwrap()
    }

    fn counterexample() -> Window {
        let knots = vec![(-2.5, 0.0), (-7.0 / 3.0, 3.0), (-4.0 / 3.0, 5.0), (-1.0, 10.0), (0.0, 12.0)];
        make_window(WindowSpec::knot_interpolant(5.0, knots).unwrap()).unwrap()
    }

    fn reference_matrix() -> GMatrix {
        GMatrix {
            x: 0.0,
            entries: [[5.0, 3.0, 0.0], [10.0, 12.0, 10.0], [0.0, 3.0, 5.0]],
        }
    }

    #[test]
    fn counterexample_matrix() {
        let g = build_g(&counterexample(), 1.0, 3.0 / 7.0, 0.0);
        let want = reference_matrix().entries;
        for i in 0..3 {
            for j in 0..3 {
                assert!((g.entries[i][j] - want[i][j]).abs() < 1e-12, "({i},{j}) = {}", g.entries[i][j]);
            }
        }
    }

    #[test]
    fn determinant_and_minors() {
        let p = reference_matrix();
        assert_eq!(p.det(), 0.0);
        assert_eq!(minors(&p), Minors { g21: 15.0, g22: 25.0, g23: 15.0 });
        let t = build_g(&b2(), 0.5, 1.0, 0.0);
        assert_eq!(t.entries, [[0.5, 0.0, 0.0], [0.5, 1.0, 0.5], [0.0, 0.0, 0.5]]);
        assert_eq!(det_g(&t), 0.25);
        assert_eq!(t.minors(), Minors { g21: 0.0, g22: 0.25, g23: 0.0 });
        assert_eq!(GMatrix::identity(0.0).det(), 1.0);
        let zero = GMatrix { x: 0.0, entries: [[0.0; 3]; 3] };
        assert_eq!(zero.minors(), Minors { g21: 0.0, g22: 0.0, g23: 0.0 });
        assert!(zero.is_singular());
    }

    #[test]
    fn far_rows_vanish_outside_support() {
        // 1/b = 5 is far beyond the support of B_2 for every x in [-a/2, a/2]
        let g = build_g(&b2(), 0.5, 0.2, 0.1);
        assert_eq!(g.entries[0], [0.0; 3]);
        assert_eq!(g.entries[2], [0.0; 3]);
    }

    #[test]
    fn cramer_solution_at_origin() {
        let t = build_g(&b2(), 0.5, 1.0, 0.0);
        assert_eq!(t.solve_middle(1.0), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn triangle_dual() {
        let d = synthesize_dual(&b2(), 0.5, 1.0, 0.5 / 2000.0).unwrap();
        assert!((d.h.evaluate(0.0) - 1.0).abs() < 1e-12);
        assert!(d.h.evaluate(0.5).abs() < 1e-12);
        assert!(d.h.evaluate(-0.5).abs() < 1e-12);
        assert_eq!(d.h.evaluate(0.75 + 1e-6), 0.0);
        assert_eq!(d.h.evaluate(-0.76), 0.0);
        assert!(!d.out_of_range);
        assert!(d.min_abs_det > 0.0);
        // the two one-sided solves at x = -a/2 give 1.5 and 0 (worked by hand)
        assert!((d.seam_jump - 1.5).abs() < 1e-12);
        assert!(!d.seam_consistent);
        assert!(d.max_relative_solve_residual < 1e-14);
    }

    #[test]
    fn singular_counterexample() {
        let err = synthesize_dual(&counterexample(), 1.0, 3.0 / 7.0, 1.0 / 2000.0).unwrap_err();
        match err {
            Error::SingularMatrix { x, abs_det } => {
                assert!(x.abs() < 1e-12, "x = {x}");
                assert!(abs_det < 1e-9);
            }
            other => panic!("unexpected {other}"),
        }
        let scan = det_scan(&counterexample(), 1.0, 3.0 / 7.0, 1.0 / 2000.0).unwrap();
        assert!(scan.min_abs_det < 1e-9);
        assert!(scan.argmin.abs() < 1e-12);
    }

    #[test]
    fn out_of_range_is_flagged() {
        let err = synthesize_dual(&b2(), 0.5, 0.5, 0.5 / 2000.0).unwrap_err();
        assert!(matches!(err, Error::ParameterOutOfRange { .. }), "{err}");
        let forced = synthesize_dual_with(
            &b2(),
            0.5,
            0.5,
            SynthesisOptions {
                force: true,
                ..SynthesisOptions::default()
            },
        );
        // forcing runs the solve, which then meets the zero rows
        assert!(matches!(forced, Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn scan_regression_values() {
        let scan = det_scan(&b2(), 0.5, 1.0, 0.5 / 2000.0).unwrap();
        assert_eq!(scan.samples.len(), 2001);
        // on [-1/4, 1/4] the entries are affine in x and det G = 1/4 - |x|/2
        assert!((scan.min_abs_det - 0.125).abs() < 1e-12, "{}", scan.min_abs_det);
        assert_eq!(scan.argmin, -0.25);
        for s in scan.samples.iter().step_by(97) {
            assert!((s.det - (0.25 - 0.5 * s.x.abs())).abs() < 1e-12, "x = {}", s.x);
        }
        assert!(matches!(det_scan(&b2(), 0.5, 1.0, 0.01), Err(Error::Parameter(_))));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let opts = |exec| SynthesisOptions { grid_step: Some(1e-4), force: false, exec };
        let s = synthesize_dual_with(&b2(), 0.5, 1.0, opts(Execution::Sequential)).unwrap();
        let p = synthesize_dual_with(&b2(), 0.5, 1.0, opts(Execution::Parallel)).unwrap();
        assert_eq!(s, p);
    }
}
