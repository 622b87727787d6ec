//! The eight-equation recurrence for the collapsed boundary field, its
//! four-variable reduction, and the scalar map `g` with derivatives.
//!
//! Every map returns the bracket expressions with the partition-function
//! ratio `L2 = Z1/Z2` factored out and reported as a separate gauge. The
//! gauge multiplies components whose equation has a direct left-hand side
//! (classes 1, 3, 6, 8) and divides those with an inverted one (2, 4, 5, 7).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundaryFieldVector, TransferWeights};

const LN_3: f64 = 1.098_612_288_668_109_8;
/// Bracket terms above this size are summed in log space.
const LINEAR_LIMIT: f64 = 1e280;

/// Classes whose recurrence equation gives `u'_i` directly (0-based).
pub const DIRECT_CLASSES: [usize; 4] = [0, 2, 5, 7];
/// Classes whose recurrence equation gives `(u'_i)^{-1}` (0-based).
pub const INVERTED_CLASSES: [usize; 4] = [1, 3, 4, 6];

const EQUATION_NAMES: [&str; 8] = [
    "u'_1 equation",
    "(u'_2)^-1 equation",
    "u'_3 equation",
    "(u'_4)^-1 equation",
    "(u'_5)^-1 equation",
    "u'_6 equation",
    "(u'_7)^-1 equation",
    "u'_8 equation",
];

/// `u_i = exp(h_i)` for the eight configuration classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UVector([f64; 8]);

impl UVector {
    pub fn new(u: [f64; 8]) -> Result<Self> {
        if u.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Domain(format!(
                "u components must be positive and finite: {u:?}"
            )));
        }
        Ok(Self(u))
    }

    pub fn ones() -> Self {
        Self([1.0; 8])
    }

    pub fn from_field(h: &BoundaryFieldVector) -> Result<Self> {
        Self::new(h.u())
    }

    pub fn components(&self) -> [f64; 8] {
        self.0
    }

    /// Component of class `index` in `1..=8`.
    pub fn get(&self, index: usize) -> f64 {
        self.0[index - 1]
    }

    pub fn to_field(&self) -> BoundaryFieldVector {
        BoundaryFieldVector::from_u(self.0).expect("UVector components are positive")
    }

    /// Applies a gauge `λ`: direct components are multiplied by `λ`,
    /// inverted ones divided.
    pub fn apply_gauge(&self, gauge: f64) -> Self {
        let mut u = self.0;
        for i in DIRECT_CLASSES {
            u[i] *= gauge;
        }
        for i in INVERTED_CLASSES {
            u[i] /= gauge;
        }
        Self(u)
    }
}

/// The four variables `(v1, v4, v5, v8)` of the reduced system, `u_i = v_i³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VVector {
    pub v1: f64,
    pub v4: f64,
    pub v5: f64,
    pub v8: f64,
}

impl VVector {
    pub fn new(v1: f64, v4: f64, v5: f64, v8: f64) -> Result<Self> {
        let v = Self { v1, v4, v5, v8 };
        if v.as_array().iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Domain(format!(
                "v components must be positive and finite: {v:?}"
            )));
        }
        Ok(v)
    }

    /// Point of set A (`v1 = v4³`, `v8 = v5³`).
    pub fn on_set_a(v4: f64, v5: f64) -> Result<Self> {
        Self::new(v4.powi(3), v4, v5, v5.powi(3))
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.v1, self.v4, self.v5, self.v8]
    }

    pub fn is_on_set_a(&self, rel_tol: f64) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= rel_tol * x.abs().max(y.abs());
        close(self.v1, self.v4.powi(3)) && close(self.v8, self.v5.powi(3))
    }

    /// Full eight-component vector with `u_i = v_i³` for `i ∈ {1,4,5,8}`
    /// and the remaining classes filled by the cube relations.
    pub fn to_uvector(&self) -> UVector {
        let Self { v1, v4, v5, v8 } = *self;
        UVector([
            v1.powi(3),
            v4 / (v1 * v1),
            v1 / (v4 * v4),
            v4.powi(3),
            v5.powi(3),
            v8 / (v5 * v5),
            v5 / (v8 * v8),
            v8.powi(3),
        ])
    }
}

/// The four branch sums entering the recurrence, indexed by
/// (center spin, successor spin): `P = (+,+)`, `Q = (+,-)`, `R = (-,+)`,
/// `S = (-,-)`. Stored as natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchBrackets {
    pub ln_p: f64,
    pub ln_q: f64,
    pub ln_r: f64,
    pub ln_s: f64,
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn ln_add_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

/// Sums four positive terms, linearly when every term is moderate and in log
/// space otherwise. Returns the logarithm of the sum.
fn ln_bracket(linear: [f64; 4], logs: [f64; 4]) -> f64 {
    if linear
        .iter()
        .all(|t| t.is_finite() && *t <= LINEAR_LIMIT && *t > 0.0)
    {
        linear.iter().sum::<f64>().ln()
    } else {
        log_sum_exp(&logs)
    }
}

pub fn branch_brackets(u: &UVector, w: &TransferWeights) -> BranchBrackets {
    let [u1, u2, u3, u4, u5, u6, u7, u8] = u.0;
    let l = u.0.map(f64::ln);
    let (a, b) = (w.a(), w.b());
    let ab = a * b;
    let ab3 = ab * ab * ab;
    let a_b = a / b;
    let a_b3 = a_b * a_b * a_b;
    let ln_ab = w.ln_a() + w.ln_b();
    let ln_a_b = w.ln_a() - w.ln_b();

    let ln_p = ln_bracket(
        [ab3 * u1, 3.0 * ab / u2, 3.0 * u3 / ab, 1.0 / (ab3 * u4)],
        [
            3.0 * ln_ab + l[0],
            LN_3 + ln_ab - l[1],
            LN_3 - ln_ab + l[2],
            -3.0 * ln_ab - l[3],
        ],
    );
    let ln_q = ln_bracket(
        [1.0 / (a_b3 * u5), 3.0 * u6 / a_b, 3.0 * a_b / u7, a_b3 * u8],
        [
            -3.0 * ln_a_b - l[4],
            LN_3 - ln_a_b + l[5],
            LN_3 + ln_a_b - l[6],
            3.0 * ln_a_b + l[7],
        ],
    );
    let ln_r = ln_bracket(
        [a_b3 * u1, 3.0 * a_b / u2, 3.0 * u3 / a_b, 1.0 / (a_b3 * u4)],
        [
            3.0 * ln_a_b + l[0],
            LN_3 + ln_a_b - l[1],
            LN_3 - ln_a_b + l[2],
            -3.0 * ln_a_b - l[3],
        ],
    );
    let ln_s = ln_bracket(
        [1.0 / (ab3 * u5), 3.0 * u6 / ab, 3.0 * ab / u7, ab3 * u8],
        [
            -3.0 * ln_ab - l[4],
            LN_3 - ln_ab + l[5],
            LN_3 + ln_ab - l[6],
            3.0 * ln_ab + l[7],
        ],
    );
    BranchBrackets {
        ln_p,
        ln_q,
        ln_r,
        ln_s,
    }
}

/// `ln(Z1/Z2)` for translation-invariant boundary field `u` on the
/// depth-1 and depth-2 balls.
pub fn log_partition_ratio(u: &UVector, w: &TransferWeights) -> f64 {
    let br = branch_brackets(u, w);
    log_partition_ratio_with(u, w, &br)
}

fn log_partition_ratio_with(u: &UVector, w: &TransferWeights, br: &BranchBrackets) -> f64 {
    let l = u.0.map(f64::ln);
    let la = w.ln_a();
    let ln_z1 = log_sum_exp(&[
        3.0 * la + l[0],
        LN_3 + la - l[1],
        LN_3 - la + l[2],
        -3.0 * la - l[3],
        -3.0 * la - l[4],
        LN_3 - la + l[5],
        LN_3 + la - l[6],
        3.0 * la + l[7],
    ]);
    let up = ln_add_exp(la + br.ln_p, br.ln_q - la);
    let down = ln_add_exp(br.ln_r - la, la + br.ln_s);
    let ln_z2 = ln_add_exp(3.0 * up, 3.0 * down);
    ln_z1 - ln_z2
}

/// One step of the eight-equation recurrence.
///
/// Returns the raw bracket expressions (gauge 1, inverted left-hand sides
/// solved for `u'_i`) and the gauge `L2 = Z1/Z2` implied by `u`. At a
/// translation-invariant fixed point, `raw.apply_gauge(gauge) == u`.
pub fn full_step(u: &UVector, w: &TransferWeights) -> Result<(UVector, f64)> {
    let br = branch_brackets(u, w);
    let BranchBrackets {
        ln_p,
        ln_q,
        ln_r,
        ln_s,
    } = br;
    let logs = [
        3.0 * ln_p,
        -(2.0 * ln_p + ln_q),
        ln_p + 2.0 * ln_q,
        -3.0 * ln_q,
        -3.0 * ln_r,
        2.0 * ln_r + ln_s,
        -(ln_r + 2.0 * ln_s),
        3.0 * ln_s,
    ];
    let mut next = [0.0; 8];
    for (i, ln_v) in logs.iter().enumerate() {
        let v = ln_v.exp();
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Overflow {
                equation: EQUATION_NAMES[i],
            });
        }
        next[i] = v;
    }
    let gauge = log_partition_ratio_with(u, w, &br).exp();
    if !(gauge.is_finite() && gauge > 0.0) {
        return Err(Error::Overflow {
            equation: "gauge Z1/Z2",
        });
    }
    Ok((UVector(next), gauge))
}

/// Relative deviations from the cube identities satisfied by every output
/// of [`full_step`]:
/// `(u'2)³(u'1)²/u'4`, `(u'3)³(u'4)²/u'1`, `(u'6)³(u'5)²/u'8`,
/// `(u'7)³(u'8)²/u'5`, each compared with 1.
pub fn check_identities(u_next: &UVector) -> [f64; 4] {
    let [u1, u2, u3, u4, u5, u6, u7, u8] = u_next.0;
    [
        (u2.powi(3) * u1 * u1 / u4 - 1.0).abs(),
        (u3.powi(3) * u4 * u4 / u1 - 1.0).abs(),
        (u6.powi(3) * u5 * u5 / u8 - 1.0).abs(),
        (u7.powi(3) * u8 * u8 / u5 - 1.0).abs(),
    ]
}

/// One step of the four-variable system on `(v1, v4, v5, v8)`.
///
/// Returns raw components (gauge 1) and the gauge `L2^{1/3}`.
pub fn reduced_step(v: &VVector, w: &TransferWeights) -> Result<(VVector, f64)> {
    let (la, lb) = (w.ln_a(), w.ln_b());
    let ln_ab = la + lb;
    let [l1, l4, l5, l8] = v.as_array().map(f64::ln);
    let ln_x1 = ln_add_exp(0.0, 2.0 * ln_ab + l1 + l4) - ln_ab - l4;
    let ln_x4 = ln_add_exp(2.0 * lb, 2.0 * la + l5 + l8) - ln_ab - l5;
    let ln_x5 = ln_add_exp(2.0 * lb, 2.0 * la + l1 + l4) - ln_ab - l4;
    let ln_x8 = ln_add_exp(0.0, 2.0 * ln_ab + l5 + l8) - ln_ab - l5;

    let eval = |ln_v: f64, equation: &'static str| -> Result<f64> {
        let x = ln_v.exp();
        if x.is_finite() && x > 0.0 {
            Ok(x)
        } else {
            Err(Error::Overflow { equation })
        }
    };
    let next = VVector {
        v1: eval(3.0 * ln_x1, "v'_1 equation")?,
        v4: eval(-3.0 * ln_x4, "(v'_4)^-1 equation")?,
        v5: eval(-3.0 * ln_x5, "(v'_5)^-1 equation")?,
        v8: eval(3.0 * ln_x8, "v'_8 equation")?,
    };
    let gauge = eval(
        log_partition_ratio(&v.to_uvector(), w) / 3.0,
        "gauge (Z1/Z2)^(1/3)",
    )?;
    Ok((next, gauge))
}

/// Gauge-invariant scalar image `v'_1 · v'_4` of a reduced step. On the
/// symmetric slice of set A (`v4 = v5`, `x = v4⁴`) this equals `g(x)`.
pub fn reduced_scalar_image(v: &VVector, w: &TransferWeights) -> Result<f64> {
    let (next, _) = reduced_step(v, w)?;
    Ok(next.v1 * next.v4)
}

/// `g(x) = ((1 + c d x) / (d + c x))³`.
pub fn scalar_map_g(x: f64, w: &TransferWeights) -> f64 {
    let (c, d) = (w.c(), w.d());
    let ratio = (1.0 + c * d * x) / (d + c * x);
    ratio * ratio * ratio
}

/// `g'(x) = 3c(d²-1)(1+cdx)² / (d+cx)⁴`.
pub fn scalar_map_dg(x: f64, w: &TransferWeights) -> f64 {
    let (c, d) = (w.c(), w.d());
    let num = 1.0 + c * d * x;
    let den = d + c * x;
    3.0 * c * (d * d - 1.0) * num * num / den.powi(4)
}

/// `g''(x) = -6c²(d²-1)(1+cdx)(2-d²+cdx) / (d+cx)⁵`.
pub fn scalar_map_d2g(x: f64, w: &TransferWeights) -> f64 {
    let (c, d) = (w.c(), w.d());
    let num = 1.0 + c * d * x;
    let den = d + c * x;
    -6.0 * c * c * (d * d - 1.0) * num * (2.0 - d * d + c * d * x) / den.powi(5)
}
