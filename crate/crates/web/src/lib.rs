//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Each exported function has a plain-Rust twin returning serde types so
//! the logic can be tested natively; the exports only convert to JSON or
//! typed arrays.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use cayley_gibbs::fixpoint::{compare_root_oracles, predict_count};
use cayley_gibbs::scanner::emit_curve;
use cayley_gibbs::{critical_points, find_positive_fixed_points, iterate_map, CouplingParameters};

#[derive(Debug, Serialize)]
pub struct PointSummary {
    pub c: f64,
    pub d: f64,
    pub regime: String,
    pub roots: Vec<f64>,
    pub stability: Vec<String>,
    pub derivative: Vec<f64>,
    pub quartic_roots: Vec<f64>,
    pub oracles_agree: bool,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub prediction: String,
}

#[derive(Debug, Serialize)]
pub struct CurveData {
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    pub roots: Vec<f64>,
    pub stability: Vec<String>,
}

pub fn summarize(j: f64, jp: f64, t: f64) -> cayley_gibbs::Result<PointSummary> {
    let w = CouplingParameters::new(j, jp, t)?.weights()?;
    let report = find_positive_fixed_points(&w)?;
    let oracles = compare_root_oracles(&w)?;
    let th = critical_points(&w);
    let prediction = predict_count(&w)?;
    Ok(PointSummary {
        c: w.c(),
        d: w.d(),
        regime: prediction.regime.to_string(),
        stability: report.stability.iter().map(ToString::to_string).collect(),
        derivative: report.derivative,
        roots: report.roots,
        quartic_roots: oracles.quartic,
        oracles_agree: oracles.agree,
        eta1: th.eta1,
        eta2: th.eta2,
        prediction: prediction.explanation,
    })
}

pub fn sample_curve(
    j: f64,
    jp: f64,
    t: f64,
    x_min: f64,
    x_max: f64,
    samples: usize,
) -> cayley_gibbs::Result<CurveData> {
    let params = CouplingParameters::new(j, jp, t)?;
    let table = emit_curve(&params, (x_min, x_max), samples)?;
    Ok(CurveData {
        x: table.rows.iter().map(|r| r.x).collect(),
        g: table.rows.iter().map(|r| r.g).collect(),
        roots: table.fixed_points.iter().map(|(x, _)| *x).collect(),
        stability: table
            .fixed_points
            .iter()
            .map(|(_, s)| s.to_string())
            .collect(),
    })
}

/// Fixed-point counts on an `n × n` grid over `(J, Jp)` at fixed `T`,
/// row-major with `Jp` varying fastest. Cells that fail report 0.
pub fn count_grid(j_min: f64, j_max: f64, jp_min: f64, jp_max: f64, t: f64, n: usize) -> Vec<u8> {
    let at = |lo: f64, hi: f64, i: usize| {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let count = CouplingParameters::new(at(j_min, j_max, a), at(jp_min, jp_max, b), t)
                .and_then(|p| p.weights())
                .and_then(|w| find_positive_fixed_points(&w))
                .map(|r| r.count as u8)
                .unwrap_or(0);
            out.push(count);
        }
    }
    out
}

fn to_js<E: std::fmt::Display>(e: E) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Fixed points, stability, thresholds and oracle agreement as JSON.
#[wasm_bindgen]
pub fn analyze(j: f64, jp: f64, t: f64) -> Result<String, JsValue> {
    let summary = summarize(j, jp, t).map_err(to_js)?;
    serde_json::to_string(&summary).map_err(to_js)
}

/// Log-uniform samples of g over `[x_min, x_max]` as JSON.
#[wasm_bindgen]
pub fn curve(
    j: f64,
    jp: f64,
    t: f64,
    x_min: f64,
    x_max: f64,
    samples: usize,
) -> Result<String, JsValue> {
    let data = sample_curve(j, jp, t, x_min, x_max, samples).map_err(to_js)?;
    serde_json::to_string(&data).map_err(to_js)
}

#[wasm_bindgen]
pub fn phase_map(j_min: f64, j_max: f64, jp_min: f64, jp_max: f64, t: f64, n: usize) -> Vec<u8> {
    count_grid(j_min, j_max, jp_min, jp_max, t, n)
}

/// Orbit `x0, g(x0), g(g(x0)), ...` for cobweb plots.
#[wasm_bindgen]
pub fn orbit(j: f64, jp: f64, t: f64, x0: f64, steps: usize) -> Result<Vec<f64>, JsValue> {
    let w = CouplingParameters::new(j, jp, t)
        .and_then(|p| p.weights())
        .map_err(to_js)?;
    let it = iterate_map(x0, &w, steps, 0.0).map_err(to_js)?;
    Ok(it.trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_for_three_root_point() {
        let s = summarize(-1.7, 6.5, 13.0).unwrap();
        assert_eq!(s.roots.len(), 3);
        assert!(s.oracles_agree);
        assert_eq!(s.stability, ["stable", "unstable", "stable"]);
        assert!(serde_json::to_string(&s)
            .unwrap()
            .contains("\"regime\":\"multi-capable\""));
    }

    #[test]
    fn curve_marks_roots() {
        let c = sample_curve(-1.7, 6.5, 13.0, 1e-3, 1e3, 64).unwrap();
        assert_eq!(c.x.len(), 64);
        assert_eq!(c.roots.len(), 3);
        assert!(sample_curve(0.0, 0.0, 0.0, 1e-3, 1e3, 64).is_err());
    }

    #[test]
    fn grid_has_transition_cells() {
        let g = count_grid(-3.0, 3.0, -3.0, 7.0, 13.0, 21);
        assert_eq!(g.len(), 441);
        assert!(g.iter().all(|&n| (1..=3).contains(&n)));
        assert!(g.contains(&3));
    }

    #[test]
    fn orbit_length() {
        // tol 0 never triggers early exit
        let o = orbit(-1.7, 6.5, 13.0, 5.0, 50).unwrap();
        assert_eq!(o.len(), 51);
        assert!((o[50] - 7.931).abs() < 1e-3);
    }
}
