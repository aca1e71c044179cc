//! Uniformly sampled functions and grid construction.

use crate::error::{Error, Result};
use crate::window::RealFn;

/// Relative distance (in units of the step) within which an abscissa is
/// treated as lying exactly on a node.
const NODE_SNAP: f64 = 1e-9;

/// A real function sampled on `x_min + k * step`, `k = 0..len`, evaluated by
/// linear interpolation and extended by zero outside `[x_min, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    x_min: f64,
    step: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(x_min: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !x_min.is_finite() {
            return Err(Error::validation("x_min", format!("{x_min} is not finite")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::validation("step", format!("{step} must be positive and finite")));
        }
        if values.is_empty() {
            return Err(Error::validation("values", "at least one sample is required"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation("values", format!("sample {v} is not finite")));
        }
        Ok(GridFunction {
            x_min,
            step,
            values,
        })
    }

    /// Samples `f` at `x_min + k * step` for `k = 0..len`.
    pub fn from_fn(x_min: f64, step: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..len).map(|k| f(x_min + k as f64 * step)).collect();
        GridFunction::new(x_min, step, values)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.node(self.values.len() - 1)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Abscissa of node `k`.
    pub fn node(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| (self.node(k), v))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise `c * self`.
    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    /// Linear interpolation with zero extension.
    pub fn evaluate(&self, x: f64) -> f64 {
        let last = (self.values.len() - 1) as f64;
        let t = (x - self.x_min) / self.step;
        if !(t >= -NODE_SNAP && t <= last + NODE_SNAP) {
            return 0.0;
        }
        let nearest = t.round();
        if (t - nearest).abs() <= NODE_SNAP {
            return self.values[nearest.clamp(0.0, last) as usize];
        }
        let i = t.floor() as usize;
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

impl RealFn for GridFunction {
    fn eval(&self, x: f64) -> f64 {
        self.evaluate(x)
    }

    fn support(&self) -> (f64, f64) {
        (self.x_min, self.x_max())
    }
}

/// Points of `[lo, hi]` spaced by `step`; the last point is `hi` itself and the
/// final interval may be shorter than `step`.
pub fn closed_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    debug_assert!(step > 0.0);
    if hi <= lo {
        return vec![lo];
    }
    let intervals = (((hi - lo) / step) - NODE_SNAP).ceil().max(1.0) as usize;
    let mut pts: Vec<f64> = (0..intervals).map(|k| lo + k as f64 * step).collect();
    pts.push(hi);
    pts
}

/// Number of whole steps in `[lo, hi]`, tolerant to rounding in the ratio.
pub(crate) fn whole_steps(lo: f64, hi: f64, step: f64) -> usize {
    ((hi - lo) / step + NODE_SNAP).floor() as usize
}
