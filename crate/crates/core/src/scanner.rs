//! Parameter sweeps over `(J, Jp, T)` and their CSV / JSON-lines output.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixpoint::{
    critical_points, find_positive_fixed_points, predict_count, Regime, Stability,
};
use crate::model::{field_from_scalar, CouplingParameters};
use crate::oracle::kolmogorov_consistency_check;
use crate::recurrence::scalar_map_g;

pub const CSV_HEADER: [&str; 11] = [
    "J",
    "Jp",
    "T",
    "c",
    "d",
    "root_count",
    "roots",
    "stabilities",
    "eta1",
    "eta2",
    "phase_transition",
];
pub const CONSISTENCY_COLUMN: &str = "consistency_residual";
pub const DEFAULT_CURVE_RANGE: (f64, f64) = (1e-4, 1e4);
pub const DEFAULT_CURVE_SAMPLES: usize = 400;

/// `min:max:steps`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl ParamRange {
    pub fn fixed(v: f64) -> Self {
        Self {
            min: v,
            max: v,
            steps: 1,
        }
    }

    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        let r = Self { min, max, steps };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite bound in {self}")));
        }
        if self.steps == 0 {
            return Err(Error::InvalidGrid("steps must be at least 1".into()));
        }
        if self.min > self.max {
            return Err(Error::InvalidGrid(format!("min > max in {self}")));
        }
        if self.steps == 1 && self.min != self.max {
            return Err(Error::InvalidGrid(format!(
                "a single step needs min == max in {self}"
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        (0..self.steps)
            .map(|i| {
                if i == self.steps - 1 {
                    self.max
                } else {
                    self.min + span * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

impl fmt::Display for ParamRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps == 1 && self.min == self.max {
            write!(f, "{}", self.min)
        } else {
            write!(f, "{}:{}:{}", self.min, self.max, self.steps)
        }
    }
}

impl FromStr for ParamRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_f = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidGrid(format!("bad number `{t}`: {e}")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let r = match parts.as_slice() {
            [v] => Self::fixed(parse_f(v)?),
            [lo, hi, n] => Self {
                min: parse_f(lo)?,
                max: parse_f(hi)?,
                steps: n
                    .trim()
                    .parse()
                    .map_err(|e| Error::InvalidGrid(format!("bad step count `{n}`: {e}")))?,
            },
            _ => {
                return Err(Error::InvalidGrid(format!(
                    "expected `v` or `min:max:steps`, got `{s}`"
                )))
            }
        };
        r.validate()?;
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub j: ParamRange,
    pub jp: ParamRange,
    pub t: ParamRange,
}

impl GridSpec {
    pub fn singleton(j: f64, jp: f64, t: f64) -> Self {
        Self {
            j: ParamRange::fixed(j),
            jp: ParamRange::fixed(jp),
            t: ParamRange::fixed(t),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.j.validate()?;
        self.jp.validate()?;
        self.t.validate()?;
        if self.t.steps == 1 && self.t.min == 0.0 {
            return Err(Error::InvalidGrid("temperature must be nonzero".into()));
        }
        Ok(())
    }

    pub fn is_singleton(&self) -> bool {
        self.j.steps == 1 && self.jp.steps == 1 && self.t.steps == 1
    }

    /// Grid cells in J-major, then Jp, then T order. Temperature cells equal
    /// to zero are dropped and returned as warnings.
    pub fn cells(&self) -> (Vec<(f64, f64, f64)>, Vec<String>) {
        let temps = self.t.values();
        let mut warnings = Vec::new();
        let kept: Vec<f64> = temps
            .into_iter()
            .filter(|&t| {
                if t == 0.0 {
                    warnings.push(format!(
                        "dropped T = 0 cell from temperature range {}",
                        self.t
                    ));
                    false
                } else {
                    true
                }
            })
            .collect();
        let mut cells = Vec::new();
        for j in self.j.values() {
            for jp in self.jp.values() {
                for &t in &kept {
                    cells.push((j, jp, t));
                }
            }
        }
        (cells, warnings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "Jp")]
    pub jp: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub root_count: usize,
    pub roots: Vec<f64>,
    pub stabilities: Vec<Stability>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub regime: Option<Regime>,
    pub phase_transition: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency_residuals: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PhasePoint {
    fn failed(j: f64, jp: f64, t: f64, err: &Error) -> Self {
        Self {
            j,
            jp,
            t,
            c: None,
            d: None,
            root_count: 0,
            roots: Vec::new(),
            stabilities: Vec::new(),
            eta1: None,
            eta2: None,
            regime: None,
            phase_transition: false,
            consistency_residuals: None,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScanOptions {
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    pub check_consistency: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutput {
    pub points: Vec<PhasePoint>,
    pub warnings: Vec<String>,
}

/// Analyses a single parameter point. Numerical failures are recorded in
/// the returned point.
pub fn analyze_point(j: f64, jp: f64, t: f64, check_consistency: bool) -> PhasePoint {
    let run = || -> Result<PhasePoint> {
        let params = CouplingParameters::new(j, jp, t)?;
        let w = params.weights()?;
        let report = find_positive_fixed_points(&w)?;
        let thresholds = critical_points(&w);
        let regime = predict_count(&w)?.regime;
        let consistency_residuals = if check_consistency {
            Some(
                report
                    .roots
                    .iter()
                    .map(|&x| kolmogorov_consistency_check(&params, &field_from_scalar(x)?))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        let (eta1, eta2) = if regime == Regime::MultiCapable {
            (thresholds.eta1, thresholds.eta2)
        } else {
            (None, None)
        };
        Ok(PhasePoint {
            j,
            jp,
            t,
            c: Some(w.c()),
            d: Some(w.d()),
            root_count: report.count,
            phase_transition: report.has_phase_transition(),
            roots: report.roots,
            stabilities: report.stability,
            eta1,
            eta2,
            regime: Some(regime),
            consistency_residuals,
            error: None,
        })
    };
    run().unwrap_or_else(|e| PhasePoint::failed(j, jp, t, &e))
}

pub fn scan_grid(spec: &GridSpec, options: ScanOptions) -> Result<ScanOutput> {
    spec.validate()?;
    let (cells, warnings) = spec.cells();
    let work = || -> Vec<PhasePoint> {
        cells
            .par_iter()
            .map(|&(j, jp, t)| analyze_point(j, jp, t, options.check_consistency))
            .collect()
    };
    let points = if options.workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| {
                Error::InvalidGrid(format!("cannot start {} workers: {e}", options.workers))
            })?
            .install(work)
    };
    Ok(ScanOutput { points, warnings })
}

/// Formats with 12 significant digits, `%g` style.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp) as usize, v))
    } else {
        format!("{}e{}", trim(mantissa), exp)
    }
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn join<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(";")
}

fn csv_record(p: &PhasePoint, with_consistency: bool) -> Vec<String> {
    let mut rec = vec![
        format_float(p.j),
        format_float(p.jp),
        format_float(p.t),
        opt_float(p.c),
        opt_float(p.d),
    ];
    match &p.error {
        Some(e) => {
            rec.extend([String::new(), format!("error: {e}"), String::new()]);
        }
        None => rec.extend([
            p.root_count.to_string(),
            join(&p.roots, |r| format_float(*r)),
            join(&p.stabilities, |s| s.to_string()),
        ]),
    }
    rec.extend([
        opt_float(p.eta1),
        opt_float(p.eta2),
        p.phase_transition.to_string(),
    ]);
    if with_consistency {
        rec.push(
            p.consistency_residuals
                .as_deref()
                .map(|r| join(r, |x| format_float(*x)))
                .unwrap_or_default(),
        );
    }
    rec
}

pub fn emit_csv(points: &[PhasePoint]) -> String {
    write_csv(points, false)
}

/// CSV with an extra trailing residual column (one value per root).
pub fn emit_csv_with_consistency(points: &[PhasePoint]) -> String {
    write_csv(points, true)
}

fn write_csv(points: &[PhasePoint], with_consistency: bool) -> String {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if with_consistency {
        header.push(CONSISTENCY_COLUMN);
    }
    wtr.write_record(&header).expect("in-memory write");
    for p in points {
        wtr.write_record(csv_record(p, with_consistency))
            .expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

pub fn emit_jsonl(points: &[PhasePoint]) -> String {
    let mut out = String::new();
    for p in points {
        out.push_str(&serde_json::to_string(p).expect("PhasePoint serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub x: f64,
    pub g: f64,
    pub g_minus_x: f64,
    /// Set on the sample nearest (in log x) to a fixed point.
    pub fixed_point: Option<(f64, Stability)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
    pub fixed_points: Vec<(f64, Stability)>,
}

impl CurveTable {
    pub fn sign_changes(&self) -> usize {
        self.rows
            .windows(2)
            .filter(|w| (w[0].g_minus_x > 0.0) != (w[1].g_minus_x > 0.0))
            .count()
    }

    pub fn to_csv(&self) -> String {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        wtr.write_record(["x", "g", "g_minus_x", "fixed_point"])
            .expect("in-memory write");
        for r in &self.rows {
            let marker = r
                .fixed_point
                .map(|(x, s)| format!("{}:{}", format_float(x), s))
                .unwrap_or_default();
            wtr.write_record([
                format_float(r.x),
                format_float(r.g),
                format_float(r.g_minus_x),
                marker,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }
}

/// Log-uniform samples of `g` over `x_range`.
pub fn emit_curve(
    params: &CouplingParameters,
    x_range: (f64, f64),
    samples: usize,
) -> Result<CurveTable> {
    let (lo, hi) = x_range;
    if samples < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!("invalid curve range [{lo}, {hi}]")));
    }
    let w = params.weights()?;
    let report = find_positive_fixed_points(&w)?;
    let fixed_points: Vec<(f64, Stability)> = report
        .roots
        .iter()
        .copied()
        .zip(report.stability.iter().copied())
        .collect();
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let mut rows: Vec<CurveRow> = (0..samples)
        .map(|i| {
            let x = (ln_lo + (ln_hi - ln_lo) * i as f64 / (samples - 1) as f64).exp();
            let g = scalar_map_g(x, &w);
            CurveRow {
                x,
                g,
                g_minus_x: g - x,
                fixed_point: None,
            }
        })
        .collect();
    for &(root, stability) in &fixed_points {
        if root < lo || root > hi {
            continue;
        }
        let nearest = rows
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = (a.1.x.ln() - root.ln()).abs();
                let db = (b.1.x.ln() - root.ln()).abs();
                da.total_cmp(&db)
            })
            .map(|(i, _)| i)
            .expect("at least two rows");
        rows[nearest].fixed_point = Some((root, stability));
    }
    Ok(CurveTable { rows, fixed_points })
}
