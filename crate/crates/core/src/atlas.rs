//! Classification of lattice parameters `(a, b)` for a compactly supported window.
//!
//! A point is labelled from what is known for continuous windows supported on
//! `[-N/2, N/2]`:
//!
//! * necessary conditions `ab < 1` and `a < N`;
//! * a small database of known obstructions;
//! * four sufficient rules, each with a hypothesis on the window that is
//!   checked numerically (or taken from a membership certificate):
//!   - painless region `b <= 1/N` with `inf_x sum_n |g(x - n a)|^2 > 0`;
//!   - `0 < b <= 2/(N+a)` with `inf |g| > 0` on `[-a/2, a/2]`;
//!   - `N/2 <= a < N`, `b < 1/a` with `g > 0` inside the support;
//!   - `2/(N+a) < b <= 4/(N+3a)` with `g` in `V_{N,a}`.
//!
//! Everything else is `unknown`; the atlas never claims a non-frame point
//! outside the obstruction database.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{closed_grid, whole_steps};
use crate::membership::check_axioms_default;
use crate::window::{RealFn, Window, WindowKind};

pub type Rational = Ratio<i128>;

/// A real parameter, optionally carrying the exact rational it was given as.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Param {
    pub value: f64,
    pub exact: Option<Rational>,
}

impl Param {
    pub fn float(value: f64) -> Self {
        Param { value, exact: None }
    }

    pub fn rational(p: i128, q: i128) -> Result<Self> {
        if q == 0 {
            return Err(Error::validation("rational", format!("{p}/{q} has zero denominator")));
        }
        let r = Rational::new(p, q);
        Ok(Param {
            value: *r.numer() as f64 / *r.denom() as f64,
            exact: Some(r),
        })
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::float(v)
    }
}

/// Accepts a decimal (`0.25`, `1e-3`) or a rational `p/q`; integers and
/// rationals keep their exact value.
impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let parse = |t: &str| {
                t.trim()
                    .parse::<i128>()
                    .map_err(|_| Error::validation("rational", format!("`{s}` is not p/q with integer p, q")))
            };
            return Param::rational(parse(p)?, parse(q)?);
        }
        if let Ok(k) = s.parse::<i128>() {
            return Param::rational(k, 1);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::validation("number", format!("`{s}` is not a number")))?;
        if !v.is_finite() {
            return Err(Error::validation("number", format!("`{s}` is not finite")));
        }
        Ok(Param::float(v))
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

/// Window support length `N` and lattice parameters `a`, `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborParams {
    pub n: Param,
    pub a: Param,
    pub b: Param,
}

impl GaborParams {
    pub fn new(n: impl Into<Param>, a: impl Into<Param>, b: impl Into<Param>) -> Result<Self> {
        let p = GaborParams {
            n: n.into(),
            a: a.into(),
            b: b.into(),
        };
        for (name, v) in [("N", p.n), ("a", p.a), ("b", p.b)] {
            if !(v.value.is_finite() && v.value > 0.0) {
                return Err(Error::Parameter(format!("{name} = {} must be positive", v.value)));
            }
        }
        Ok(p)
    }

    fn exact(&self) -> Option<(Rational, Rational, Rational)> {
        Some((self.n.exact?, self.a.exact?, self.b.exact?))
    }

    /// Evaluates a comparison exactly when all three parameters are rational.
    fn test(
        &self,
        float: impl Fn(f64, f64, f64) -> bool,
        exact: impl Fn(Rational, Rational, Rational) -> bool,
    ) -> bool {
        match self.exact() {
            Some((n, a, b)) => exact(n, a, b),
            None => float(self.n.value, self.a.value, self.b.value),
        }
    }

    pub fn ab_below_one(&self) -> bool {
        self.test(|_, a, b| a * b < 1.0, |_, a, b| a * b < Rational::from(1))
    }

    pub fn a_below_n(&self) -> bool {
        self.test(|n, a, _| a < n, |n, a, _| a < n)
    }

    /// `b <= 1/N`.
    pub fn in_painless_range(&self) -> bool {
        self.test(|n, _, b| b <= 1.0 / n, |n, _, b| b * n <= Rational::from(1))
    }

    /// `b <= 2/(N+a)`.
    pub fn in_short_dual_range(&self) -> bool {
        self.test(
            |n, a, b| b <= 2.0 / (n + a),
            |n, a, b| b * (n + a) <= Rational::from(2),
        )
    }

    /// `N/2 <= a` and `b < 1/a`.
    pub fn in_half_support_range(&self) -> bool {
        self.test(
            |n, a, b| n / 2.0 <= a && b < 1.0 / a,
            |n, a, b| n <= a * 2 && a * b < Rational::from(1),
        )
    }

    /// `2/(N+a) < b <= 4/(N+3a)`.
    pub fn in_theorem_range(&self) -> bool {
        self.test(
            |n, a, b| b > 2.0 / (n + a) && b <= 4.0 / (n + 3.0 * a),
            |n, a, b| b * (n + a) > Rational::from(2) && b * (n + a * 3) <= Rational::from(4),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    FrameGuaranteed,
    KnownNotFrame,
    NecessaryViolated,
    Unknown,
}

impl Status {
    pub fn id(self) -> &'static str {
        match self {
            Status::FrameGuaranteed => "frame_guaranteed",
            Status::KnownNotFrame => "known_not_frame",
            Status::NecessaryViolated => "necessary_violated",
            Status::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    RegionAMultiplication,
    PropIiShortDual,
    PropIiiHalfSupport,
    ThmDVClass,
    NecAbLt1,
    NecALtN,
    ObstructionDb,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::RegionAMultiplication => "regionA_multiplication",
            Rule::PropIiShortDual => "prop_ii_shortdual",
            Rule::PropIiiHalfSupport => "prop_iii_halfsupport",
            Rule::ThmDVClass => "thm_D_Vclass",
            Rule::NecAbLt1 => "nec_ab_lt_1",
            Rule::NecALtN => "nec_a_lt_N",
            Rule::ObstructionDb => "obstruction_db",
        }
    }

    pub fn is_sufficient(self) -> bool {
        matches!(
            self,
            Rule::RegionAMultiplication | Rule::PropIiShortDual | Rule::PropIiiHalfSupport | Rule::ThmDVClass
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionClassification {
    pub status: Status,
    pub rules_fired: Vec<Rule>,
    pub details: Vec<String>,
}

impl RegionClassification {
    pub fn fired(&self, rule: Rule) -> bool {
        self.rules_fired.contains(&rule)
    }

    /// Fired rules joined by `;`.
    pub fn rules_string(&self) -> String {
        self.rules_fired.iter().map(|r| r.id()).collect::<Vec<_>>().join(";")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstruction {
    pub window_id: String,
    /// `None` matches every `a`.
    pub a: Option<Param>,
    pub b: Param,
    pub citation: String,
}

const MATCH_TOL: f64 = 1e-12;

fn same(x: Param, y: Param) -> bool {
    match (x.exact, y.exact) {
        (Some(p), Some(q)) => p == q,
        _ => (x.value - y.value).abs() <= MATCH_TOL,
    }
}

impl Obstruction {
    pub fn matches(&self, window_id: &str, a: Param, b: Param) -> bool {
        self.window_id == window_id && same(self.b, b) && self.a.is_none_or(|ea| same(ea, a))
    }
}

/// Parameter points known to lie outside the frame set.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionDb {
    pub entries: Vec<Obstruction>,
}

impl Default for ObstructionDb {
    /// The two known B_2 obstructions.
    fn default() -> Self {
        let r = |p, q| Param::rational(p, q).expect("nonzero denominator");
        ObstructionDb {
            entries: vec![
                Obstruction {
                    window_id: "bspline:N=2".into(),
                    a: None,
                    b: r(2, 1),
                    citation: "B_2 generates no Gabor frame for b = 2 (integer-b obstruction)".into(),
                },
                Obstruction {
                    window_id: "bspline:N=2".into(),
                    a: Some(r(2, 7)),
                    b: r(7, 4),
                    citation: "(a,b) = (2/7, 7/4) lies outside the frame set of B_2".into(),
                },
            ],
        }
    }
}

impl ObstructionDb {
    pub fn empty() -> Self {
        ObstructionDb { entries: Vec::new() }
    }

    pub fn lookup(&self, window_id: &str, a: Param, b: Param) -> Option<&Obstruction> {
        self.entries.iter().find(|e| e.matches(window_id, a, b))
    }

    /// Appends rows `window,a,b,citation` from a CSV file with a header;
    /// `a` may be `any`, numbers may be rationals `p/q`.
    pub fn extend_from_csv(&mut self, path: &Path) -> Result<()> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 3 {
                return Err(Error::validation("obstructions", format!("row {} has {} fields, need window,a,b[,citation]", i + 1, rec.len())));
            }
            let a = match &rec[1] {
                "any" | "*" => None,
                s => Some(s.parse::<Param>()?),
            };
            self.entries.push(Obstruction {
                window_id: rec[0].to_string(),
                a,
                b: rec[2].parse()?,
                citation: rec.get(3).unwrap_or("").to_string(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct AtlasOptions {
    /// Re-verify `V_{N,a}` membership numerically even for certified catalog windows.
    pub strict: bool,
    /// Step of the hypothesis grids; defaults to `min(a, N) / 2000`.
    pub grid_step: Option<f64>,
    pub obstructions: ObstructionDb,
    pub exec: Execution,
}

/// Grid infimum over `[0, a]` of `sum_n |g(x - n a)|^2`.
pub fn region_a_infimum(w: &impl RealFn, a: f64, grid_step: f64) -> f64 {
    let (lo, hi) = w.support();
    closed_grid(0.0, a, grid_step)
        .into_iter()
        .map(|x| {
            let n0 = ((x - hi) / a).ceil() as i64 - 1;
            let n1 = ((x - lo) / a).floor() as i64 + 1;
            (n0..=n1)
                .map(|n| w.eval(x - n as f64 * a).powi(2))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Shift ranges on which the catalog windows are proven members of `V_{N,a}`.
pub fn membership_certificate(w: &Window, a: f64) -> Option<&'static str> {
    let n = w.n();
    if !(a > 0.0 && a < n) {
        return None;
    }
    match w.spec().kind() {
        WindowKind::BSpline { order } if *order >= 2 => Some("B_N is a member for all 0 < a < N"),
        WindowKind::CosPower { .. } => Some("cos^(2N-2) window is a member for all 0 < a < N"),
        WindowKind::TruncExp { .. } => Some("truncated two-sided exponential is a member for all 0 < a < N"),
        WindowKind::TruncRationalAbs { .. } => Some("truncated 1/(1+|x|) is a member for all 0 < a < N"),
        WindowKind::TruncGauss { .. } if a >= 3.0 * n / 7.0 => Some("truncated Gaussian is a member for 3N/7 <= a < N"),
        WindowKind::TruncRationalSq { .. } if a >= 3.0 * n / 7.0 => {
            Some("truncated 1/(1+x^2) is a member for 3N/7 <= a < N")
        }
        WindowKind::TruncRationalSq { .. } if a >= n / 3.0 && n >= (12.0f64 / 5.0).sqrt() => {
            Some("truncated 1/(1+x^2) is a member for N/3 <= a < 3N/7 when N >= sqrt(12/5)")
        }
        _ => None,
    }
}

/// Window hypotheses that depend on `a` only, shared by a column of the scan.
struct ShiftHypotheses {
    region_a_inf: f64,
    central_inf: f64,
    interior_positive: bool,
    member: bool,
    member_source: String,
}

impl ShiftHypotheses {
    fn compute(w: &Window, a: f64, opts: &AtlasOptions) -> Self {
        let n = w.n();
        let step = opts.grid_step.unwrap_or(a.min(n) / 2000.0);
        let valid_shift = a > 0.0 && a < n;
        let region_a_inf = region_a_infimum(w, a, step);
        let central_inf = closed_grid(-a / 2.0, a / 2.0, step)
            .into_iter()
            .map(|x| w.evaluate(x).abs())
            .fold(f64::INFINITY, f64::min);
        let r = w.support_radius();
        let interior = closed_grid(-r, r, step.min(r / 1000.0));
        let interior_positive = interior[1..interior.len() - 1].iter().all(|&x| w.evaluate(x) > 0.0);
        let certificate = if opts.strict { None } else { membership_certificate(w, a) };
        let (member, member_source) = match (valid_shift, certificate) {
            (false, _) => (false, "shift outside (0, N)".to_string()),
            (true, Some(c)) => (true, format!("certificate: {c}")),
            (true, None) => match check_axioms_default(w, a) {
                Ok(rep) if rep.is_member() => (true, "axioms verified numerically".to_string()),
                Ok(rep) => (false, format!("axioms fail with {} witnesses", rep.witnesses.len())),
                Err(e) => (false, e.to_string()),
            },
        };
        ShiftHypotheses {
            region_a_inf,
            central_inf,
            interior_positive,
            member,
            member_source,
        }
    }
}

fn classify_with(
    w: &Window,
    p: &GaborParams,
    hyp: &ShiftHypotheses,
    opts: &AtlasOptions,
) -> Result<RegionClassification> {
    let mut rules = Vec::new();
    let mut details = Vec::new();
    if !p.ab_below_one() {
        rules.push(Rule::NecAbLt1);
        details.push(format!("ab = {} >= 1", p.a.value * p.b.value));
    }
    if !p.a_below_n() {
        rules.push(Rule::NecALtN);
        details.push(format!("a = {} >= N = {}", p.a.value, p.n.value));
    }
    if !rules.is_empty() {
        return Ok(RegionClassification {
            status: Status::NecessaryViolated,
            rules_fired: rules,
            details,
        });
    }

    let obstruction = opts.obstructions.lookup(&w.spec().id(), p.a, p.b);
    if let Some(o) = obstruction {
        rules.push(Rule::ObstructionDb);
        details.push(format!("obstruction: {}", o.citation));
    }

    if p.in_painless_range() {
        if hyp.region_a_inf > 0.0 {
            rules.push(Rule::RegionAMultiplication);
            details.push(format!(
                "regionA: inf sum |g(x-na)|^2 = {:e}; boundary b <= 1/N is an interpretation",
                hyp.region_a_inf
            ));
        } else {
            details.push("regionA: translates leave a gap (infimum 0)".into());
        }
    }
    if p.in_short_dual_range() {
        if hyp.central_inf > 0.0 {
            rules.push(Rule::PropIiShortDual);
            details.push(format!("prop_ii: inf |g| on [-a/2,a/2] = {:e}", hyp.central_inf));
        } else {
            details.push("prop_ii: g vanishes somewhere on [-a/2,a/2]".into());
        }
    }
    if p.in_half_support_range() {
        if hyp.interior_positive {
            rules.push(Rule::PropIiiHalfSupport);
            details.push("prop_iii: g > 0 inside the support".into());
        } else {
            details.push("prop_iii: g not positive inside the support".into());
        }
    }
    if p.in_theorem_range() {
        if hyp.member {
            rules.push(Rule::ThmDVClass);
        }
        details.push(format!("thm_D: {}", hyp.member_source));
    }

    let sufficient = rules.iter().any(|r| r.is_sufficient());
    let status = match (obstruction.is_some(), sufficient) {
        (true, true) => {
            return Err(Error::Integrity(format!(
                "({}, {}) for {} is both an obstruction and covered by {}",
                p.a,
                p.b,
                w.spec(),
                rules.iter().filter(|r| r.is_sufficient()).map(|r| r.id()).collect::<Vec<_>>().join(",")
            )))
        }
        (true, false) => Status::KnownNotFrame,
        (false, true) => Status::FrameGuaranteed,
        (false, false) => Status::Unknown,
    };
    Ok(RegionClassification {
        status,
        rules_fired: rules,
        details,
    })
}

/// Support length of `w`, exact when it is an integer.
pub fn support_param(w: &Window) -> Param {
    let n = w.n();
    if n.fract() == 0.0 && n.abs() < 1e15 {
        Param::rational(n as i128, 1).expect("nonzero denominator")
    } else {
        Param::float(n)
    }
}

/// Classifies one parameter point. `p.n` should be the window's support length.
pub fn classify(w: &Window, p: &GaborParams, opts: &AtlasOptions) -> Result<RegionClassification> {
    let hyp = ShiftHypotheses::compute(w, p.a.value, opts);
    classify_with(w, p, &hyp, opts)
}

/// Inclusive arithmetic range `start:stop:step`. When all three parts are
/// rationals the lattice values are exact too.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeRange {
    pub start: Param,
    pub stop: Param,
    pub step: Param,
}

impl LatticeRange {
    pub fn new(start: impl Into<Param>, stop: impl Into<Param>, step: impl Into<Param>) -> Result<Self> {
        let (start, stop, step) = (start.into(), stop.into(), step.into());
        if !(start.value.is_finite() && stop.value.is_finite() && step.value.is_finite()) {
            return Err(Error::validation("range", "bounds and step must be finite"));
        }
        if !(step.value > 0.0) {
            return Err(Error::validation("range", format!("step {step} must be positive")));
        }
        if !(start.value > 0.0 && stop.value >= start.value) {
            return Err(Error::validation("range", format!("need 0 < start <= stop, got {start}:{stop}")));
        }
        Ok(LatticeRange { start, stop, step })
    }

    pub fn single(v: impl Into<Param>) -> Result<Self> {
        let v = v.into();
        LatticeRange::new(v, v, 1.0)
    }

    fn exact(&self) -> Option<(Rational, Rational, Rational)> {
        Some((self.start.exact?, self.stop.exact?, self.step.exact?))
    }

    pub fn len(&self) -> usize {
        match self.exact() {
            Some((a, b, h)) => ((b - a) / h).floor().to_integer() as usize + 1,
            None => whole_steps(self.start.value, self.stop.value, self.step.value) + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn params(&self) -> Vec<Param> {
        match self.exact() {
            Some((a, _, h)) => (0..self.len())
                .map(|i| {
                    let r = a + h * Rational::from(i as i128);
                    Param::rational(*r.numer(), *r.denom()).expect("nonzero denominator")
                })
                .collect(),
            None if self.len() == 1 => vec![self.start],
            None => (0..self.len())
                .map(|i| Param::float(self.start.value + i as f64 * self.step.value))
                .collect(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.params().into_iter().map(|p| p.value).collect()
    }
}

impl FromStr for LatticeRange {
    type Err = Error;

    /// `start:stop:step`, or a single value; each part may be `p/q`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<Param> {
            t.parse::<Param>()
                .map_err(|_| Error::validation("range", format!("`{t}` in `{s}` is not a number")))
        };
        match parts.as_slice() {
            [v] => LatticeRange::single(num(v)?),
            [a, b, c] => LatticeRange::new(num(a)?, num(b)?, num(c)?),
            _ => Err(Error::validation("range", format!("expected start:stop:step, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub a: f64,
    pub b: f64,
    pub classification: RegionClassification,
}

/// Classifies every lattice point, row-major by ascending `a` then `b`.
pub fn scan_region(
    w: &Window,
    a_range: LatticeRange,
    b_range: LatticeRange,
    opts: &AtlasOptions,
) -> Result<Vec<ScanPoint>> {
    let n = support_param(w);
    let a_values = a_range.params();
    let b_values = b_range.params();
    let columns = opts.exec.map(a_values.len(), |i| {
        let a = a_values[i];
        let hyp = ShiftHypotheses::compute(w, a.value, opts);
        b_values
            .iter()
            .map(|&b| {
                let p = GaborParams::new(n, a, b)?;
                Ok(ScanPoint {
                    a: a.value,
                    b: b.value,
                    classification: classify_with(w, &p, &hyp, opts)?,
                })
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(a_values.len() * b_values.len());
    for col in columns {
        out.extend(col?);
    }
    Ok(out)
}
