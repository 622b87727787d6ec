//! Positive fixed points of the scalar map `g`, their stability, and the
//! tangent-line thresholds `η1 < η2` that decide how many there are.
//!
//! Two independent routes find the fixed points:
//!
//! * [`find_positive_fixed_points`] brackets sign changes of `g(x) - x` on a
//!   log-uniform grid, refined with the inflection point of `g` and the
//!   points where `g' = 1` so that `g(x) - x` is monotone between adjacent
//!   nodes, then bisects and Newton-polishes.
//! * [`quartic_positive_roots`] takes the eigenvalues of the companion
//!   matrix of `x(d+cx)³ - (1+cdx)³`.

use std::fmt;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TransferWeights;
use crate::recurrence::{scalar_map_dg, scalar_map_g};

pub const GRID_POINTS: usize = 400;
const GRID_LN_MIN: f64 = -8.0 * std::f64::consts::LN_10;
const GRID_LN_MAX: f64 = 8.0 * std::f64::consts::LN_10;
/// Stability labels use `|g'| < 1 - tol` / `> 1 + tol`.
pub const MARGINAL_TOL: f64 = 1e-9;
/// A grid node with `|g(x) - m x| <= ROOT_TOL * m x` is itself a root.
pub const ROOT_TOL: f64 = 1e-12;
/// Threshold equality tolerance in [`predict_count`].
pub const THRESHOLD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn from_derivative(dg: f64) -> Self {
        let m = dg.abs();
        if m < 1.0 - MARGINAL_TOL {
            Stability::Stable
        } else if m > 1.0 + MARGINAL_TOL {
            Stability::Unstable
        } else {
            Stability::Marginal
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    /// Positive fixed points in ascending order.
    pub roots: Vec<f64>,
    pub stability: Vec<Stability>,
    /// `g'` at each root.
    pub derivative: Vec<f64>,
    pub count: usize,
}

impl FixedPointReport {
    fn unclassified(roots: Vec<f64>) -> Self {
        let count = roots.len();
        Self {
            roots,
            stability: Vec::new(),
            derivative: Vec::new(),
            count,
        }
    }

    pub fn has_phase_transition(&self) -> bool {
        self.count >= 2
    }
}

/// Which part of the parameter space `d` falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `d < 1`: `g` is decreasing, exactly one fixed point.
    Unique,
    /// `1 <= d <= 2`: not covered by the threshold statement; counted directly.
    Unstated,
    /// `d > 2`: up to three fixed points, decided by `η1`, `η2`.
    MultiCapable,
}

impl Regime {
    pub fn of(w: &TransferWeights) -> Self {
        let d = w.d();
        if d < 1.0 {
            Regime::Unique
        } else if d > 2.0 {
            Regime::MultiCapable
        } else {
            Regime::Unstated
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Unique => "unique",
            Regime::Unstated => "unstated",
            Regime::MultiCapable => "multi-capable",
        })
    }
}

/// Tangent lines through the origin: roots of `c²d x² - 2c(d²-2)x + d = 0`
/// and the slopes `η = g(x*)/x*` there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub regime: Regime,
    pub x_crit_1: Option<f64>,
    pub x_crit_2: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    /// The closed forms for `η1`, `η2` in terms of `c`, `d`.
    pub closed_form_eta1: Option<f64>,
    pub closed_form_eta2: Option<f64>,
    /// `Some(false)` flags a disagreement between the two routes.
    pub closed_form_agrees: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountPrediction {
    pub count: usize,
    pub regime: Regime,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub trajectory: Vec<f64>,
    pub limit: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Index into the ascending fixed-point list the limit matched, if any.
    pub matched_root: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub bracketing: Vec<f64>,
    pub quartic: Vec<f64>,
    pub max_relative_difference: f64,
    pub agree: bool,
}

/// Coefficients of `x(d+cx)³ - (1+cdx)³` in descending powers.
pub fn quartic_coefficients(w: &TransferWeights) -> [f64; 5] {
    let (c, d) = (w.c(), w.d());
    let (c2, c3, d2, d3) = (c * c, c * c * c, d * d, d * d * d);
    [
        c3,
        3.0 * c2 * d - c3 * d3,
        3.0 * c * d2 - 3.0 * c2 * d2,
        d3 - 3.0 * c * d,
        -1.0,
    ]
}

fn horner(coeffs: &[f64; 5], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &a in coeffs {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// Positive real roots of the quartic, from the companion-matrix eigenvalues
/// and Newton-polished on the polynomial.
pub fn quartic_positive_roots(w: &TransferWeights) -> Vec<f64> {
    let coeffs = quartic_coefficients(w);
    let lead = coeffs[0];
    let m = Matrix4::new(
        -coeffs[1] / lead,
        -coeffs[2] / lead,
        -coeffs[3] / lead,
        -coeffs[4] / lead,
        1.0,
        0.0,
        0.0,
        0.0,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        0.0,
        1.0,
        0.0,
    );
    let mut roots: Vec<f64> = Vec::new();
    for z in m.complex_eigenvalues().iter() {
        if z.re <= 0.0 || z.im.abs() > 1e-6 * z.norm().max(1.0) {
            continue;
        }
        let mut x = z.re;
        for _ in 0..60 {
            let (p, dp) = horner(&coeffs, x);
            if dp == 0.0 || p == 0.0 {
                break;
            }
            let next = x - p / dp;
            if !(next.is_finite() && next > 0.0) {
                break;
            }
            let done = (next - x).abs() <= 1e-16 * x;
            x = next;
            if done {
                break;
            }
        }
        roots.push(x);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() <= 1e-6 * a.abs().max(1.0));
    roots
}

fn search_window(w: &TransferWeights, slope: f64) -> (f64, f64) {
    // Every intersection of g with y = slope*x lies in [d^-3, d^3]/slope (or
    // the reverse interval when d < 1).
    let span = 3.0 * w.ln_b().abs() * 2.0;
    let ln_m = slope.ln();
    let lo = (GRID_LN_MIN.min(-span - ln_m) - 1.0).max(-700.0);
    let hi = (GRID_LN_MAX.max(span - ln_m) + 1.0).min(700.0);
    (lo, hi)
}

fn bisect_log<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// All positive solutions of `g(x) = slope·x`, ascending.
pub fn positive_intersections(w: &TransferWeights, slope: f64) -> Result<Vec<f64>> {
    if !(slope.is_finite() && slope > 0.0) {
        return Err(Error::Domain(format!(
            "slope must be positive, got {slope}"
        )));
    }
    let (c, d) = (w.c(), w.d());
    let phi = |x: f64| scalar_map_g(x, w) - slope * x;
    let dphi = |x: f64| scalar_map_dg(x, w) - slope;

    let (ln_lo, ln_hi) = search_window(w, slope);
    let mut nodes: Vec<f64> = (0..GRID_POINTS)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect();
    let (x_lo, x_hi) = (nodes[0], nodes[GRID_POINTS - 1]);

    // g' is unimodal with its peak at the inflection point of g
    let inflection = (d * d - 2.0) / (c * d);
    if inflection > x_lo && inflection < x_hi {
        nodes.push(inflection);
        nodes.sort_by(f64::total_cmp);
    }
    let mut critical = Vec::new();
    for pair in nodes.windows(2) {
        let (s0, s1) = (dphi(pair[0]), dphi(pair[1]));
        if s0 == 0.0 {
            critical.push(pair[0]);
        } else if s0.signum() != s1.signum() && s1 != 0.0 {
            critical.push(bisect_log(dphi, pair[0], pair[1]));
        }
    }
    nodes.extend(critical);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let values: Vec<f64> = nodes.iter().map(|&x| phi(x)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Bracketing(format!(
            "non-finite g(x) - x on search window [{x_lo:e}, {x_hi:e}]"
        )));
    }
    let sign = |x: f64, v: f64| -> i8 {
        if v.abs() <= ROOT_TOL * slope * x {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };
    let signs: Vec<i8> = nodes
        .iter()
        .zip(&values)
        .map(|(&x, &v)| sign(x, v))
        .collect();
    if signs[0] <= 0 || signs[signs.len() - 1] >= 0 {
        return Err(Error::Bracketing(format!(
            "g(x) - {slope}x does not change sign across [{x_lo:e}, {x_hi:e}]"
        )));
    }

    let mut roots = Vec::new();
    for i in 0..nodes.len() {
        if signs[i] == 0 {
            roots.push(nodes[i]);
        }
        if i + 1 < nodes.len() && signs[i] * signs[i + 1] == -1 {
            roots.push(polish(&phi, &dphi, nodes[i], nodes[i + 1]));
        }
    }
    Ok(roots)
}

fn polish<F, D>(phi: &F, dphi: &D, mut lo: f64, mut hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let lo_positive = phi(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-12 * mid.max(1.0) * 1e-3 {
            break;
        }
        if (phi(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = if phi(lo).abs() < phi(hi).abs() {
        lo
    } else {
        hi
    };
    for _ in 0..5 {
        let slope = dphi(x);
        if slope == 0.0 {
            break;
        }
        let next = x - phi(x) / slope;
        if !(next >= lo && next <= hi) || phi(next).abs() >= phi(x).abs() {
            break;
        }
        x = next;
    }
    x
}

/// Positive fixed points of `g`, labelled by stability.
pub fn find_positive_fixed_points(w: &TransferWeights) -> Result<FixedPointReport> {
    let roots = positive_intersections(w, 1.0)?;
    Ok(classify_stability(FixedPointReport::unclassified(roots), w))
}

pub fn classify_stability(mut report: FixedPointReport, w: &TransferWeights) -> FixedPointReport {
    report.derivative = report.roots.iter().map(|&r| scalar_map_dg(r, w)).collect();
    report.stability = report
        .derivative
        .iter()
        .map(|&dg| Stability::from_derivative(dg))
        .collect();
    report.count = report.roots.len();
    report
}

/// Closed-form threshold slopes in terms of `c`, `d` (valid for `d > 2`).
pub fn closed_form_etas(c: f64, d: f64) -> (f64, f64) {
    let d2 = d * d;
    let s = (d2 * d2 - 5.0 * d2 + 4.0).sqrt();
    let d4 = d2 * d2;
    let eta1 = -c * d4 * (1.0 - d2 + s).powi(3) / ((2.0 - 2.0 * d2 + s).powi(3) * (2.0 - d2 + s));
    let eta2 = c * d4 * (-1.0 + d2 + s).powi(3) / ((-2.0 + d2 + s) * (-2.0 + 2.0 * d2 + s).powi(3));
    (eta1, eta2)
}

pub fn critical_points(w: &TransferWeights) -> ThresholdReport {
    let (c, d) = (w.c(), w.d());
    let regime = Regime::of(w);
    let mut report = ThresholdReport {
        regime,
        x_crit_1: None,
        x_crit_2: None,
        eta1: None,
        eta2: None,
        closed_form_eta1: None,
        closed_form_eta2: None,
        closed_form_agrees: None,
    };
    let d2 = d * d;
    let discriminant = (d2 - 1.0) * (d2 - 4.0);
    if d2 - 2.0 <= 0.0 || discriminant < 0.0 {
        return report;
    }
    let x2 = ((d2 - 2.0) + discriminant.sqrt()) / (c * d);
    // product of the two roots is 1/c²
    let x1 = 1.0 / (c * c * x2);
    let eta = |x: f64| scalar_map_g(x, w) / x;
    report.x_crit_1 = Some(x1);
    report.x_crit_2 = Some(x2);
    report.eta1 = Some(eta(x1));
    report.eta2 = Some(eta(x2));
    if regime == Regime::MultiCapable {
        let (e1, e2) = closed_form_etas(c, d);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-8 * x.abs().max(y.abs());
        report.closed_form_eta1 = Some(e1);
        report.closed_form_eta2 = Some(e2);
        report.closed_form_agrees = Some(close(e1, eta(x1)) && close(e2, eta(x2)));
    }
    report
}

pub fn predict_count(w: &TransferWeights) -> Result<CountPrediction> {
    predict_count_for_slope(w, 1.0)
}

/// Number of positive solutions of `g(x) = slope·x` predicted from the regime.
pub fn predict_count_for_slope(w: &TransferWeights, slope: f64) -> Result<CountPrediction> {
    let regime = Regime::of(w);
    let (count, explanation) = match regime {
        Regime::Unique => (1, format!("d = {} < 1: g is decreasing", w.d())),
        Regime::MultiCapable => {
            let th = critical_points(w);
            let (e1, e2) = (th.eta1.unwrap_or(f64::NAN), th.eta2.unwrap_or(f64::NAN));
            let tol = THRESHOLD_TOL * slope.max(1.0);
            if (e1 - slope).abs() <= tol || (e2 - slope).abs() <= tol {
                (
                    2,
                    format!("d > 2, tangent: eta1 = {e1}, eta2 = {e2}, slope = {slope}"),
                )
            } else if e1 < slope && slope < e2 {
                (3, format!("d > 2, eta1 = {e1} < {slope} < eta2 = {e2}"))
            } else {
                (
                    1,
                    format!("d > 2, slope {slope} outside (eta1, eta2) = ({e1}, {e2})"),
                )
            }
        }
        Regime::Unstated => {
            let n = positive_intersections(w, slope)?.len();
            (
                n,
                format!(
                    "1 <= d = {} <= 2: outside the threshold statement, counted directly",
                    w.d()
                ),
            )
        }
    };
    Ok(CountPrediction {
        count,
        regime,
        explanation,
    })
}

pub fn compare_root_oracles(w: &TransferWeights) -> Result<OracleComparison> {
    let bracketing = find_positive_fixed_points(w)?.roots;
    let quartic = quartic_positive_roots(w);
    let mut max_rel = 0.0f64;
    let agree = bracketing.len() == quartic.len() && {
        for (a, b) in bracketing.iter().zip(&quartic) {
            max_rel = max_rel.max((a - b).abs() / a.abs().max(b.abs()));
        }
        max_rel <= 1e-9
    };
    if bracketing.len() != quartic.len() {
        max_rel = f64::INFINITY;
    }
    Ok(OracleComparison {
        bracketing,
        quartic,
        max_relative_difference: max_rel,
        agree,
    })
}

/// Iterates `x_{n+1} = g(x_n)` until successive values differ by less than
/// `tol·max(1, x_n)` or `max_iter` steps have been taken.
pub fn iterate_map(
    x0: f64,
    w: &TransferWeights,
    max_iter: usize,
    tol: f64,
) -> Result<IterationResult> {
    if !(x0.is_finite() && x0 > 0.0) {
        return Err(Error::Domain(format!(
            "starting point must be positive, got {x0}"
        )));
    }
    let mut trajectory = vec![x0];
    let mut x = x0;
    let mut converged = false;
    for _ in 0..max_iter {
        let next = scalar_map_g(x, w);
        trajectory.push(next);
        let step = (next - x).abs();
        x = next;
        if step < tol * trajectory[trajectory.len() - 2].max(1.0) {
            converged = true;
            break;
        }
    }
    let roots = find_positive_fixed_points(w)?.roots;
    let matched_root = roots
        .iter()
        .position(|&r| (x - r).abs() <= 1e-6 * r.max(1.0));
    Ok(IterationResult {
        iterations: trajectory.len() - 1,
        trajectory,
        limit: x,
        converged,
        matched_root,
    })
}
