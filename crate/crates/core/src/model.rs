//! Physical parameters, transfer weights, semi-ball configurations and
//! boundary-field vectors shared by the rest of the crate.
//!
//! Units: Boltzmann constant is 1, so `beta = 1 / T`. Negative temperatures
//! are accepted; only `T = 0` is rejected.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this magnitude of `beta * J` (or `beta * Jp`) the weights are
/// assembled from their logarithms rather than by repeated multiplication.
const LOG_SPACE_THRESHOLD: f64 = 300.0;

/// Couplings `J` (nearest neighbour) and `Jp` (prolonged next-nearest
/// neighbour) together with the temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParameters {
    j: f64,
    jp: f64,
    t: f64,
    beta: f64,
}

impl CouplingParameters {
    pub fn new(j: f64, jp: f64, t: f64) -> Result<Self> {
        if !(j.is_finite() && jp.is_finite() && t.is_finite()) {
            return Err(Error::NonFiniteParameter { j, jp, t });
        }
        if t == 0.0 {
            return Err(Error::ZeroTemperature);
        }
        Ok(Self {
            j,
            jp,
            t,
            beta: 1.0 / t,
        })
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn jp(&self) -> f64 {
        self.jp
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn weights(&self) -> Result<TransferWeights> {
        derive_weights(self)
    }
}

/// Exponentiated couplings: `a = e^{βJ}`, `b = e^{βJp}`, `c = a²`, `d = b²`.
///
/// The logarithms `ln a` and `ln b` are kept alongside so that callers can
/// evaluate products of many weights without overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferWeights {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    ln_a: f64,
    ln_b: f64,
}

fn checked_exp(name: &'static str, log_value: f64) -> Result<f64> {
    let v = log_value.exp();
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::WeightRange { name, log_value })
    }
}

impl TransferWeights {
    /// Builds weights from `ln a = βJ` and `ln b = βJp`.
    pub fn from_logs(ln_a: f64, ln_b: f64) -> Result<Self> {
        if !(ln_a.is_finite() && ln_b.is_finite()) {
            return Err(Error::InvalidWeights(format!(
                "non-finite log weights ln a={ln_a}, ln b={ln_b}"
            )));
        }
        let a = checked_exp("a", ln_a)?;
        let b = checked_exp("b", ln_b)?;
        let c = if ln_a.abs() > LOG_SPACE_THRESHOLD {
            checked_exp("c", 2.0 * ln_a)?
        } else {
            a * a
        };
        let d = if ln_b.abs() > LOG_SPACE_THRESHOLD {
            checked_exp("d", 2.0 * ln_b)?
        } else {
            b * b
        };
        Ok(Self {
            a,
            b,
            c,
            d,
            ln_a,
            ln_b,
        })
    }

    /// Builds weights directly from `c` and `d`, both strictly positive.
    pub fn from_cd(c: f64, d: f64) -> Result<Self> {
        if !(c.is_finite() && d.is_finite() && c > 0.0 && d > 0.0) {
            return Err(Error::InvalidWeights(format!(
                "c and d must be positive and finite (c={c}, d={d})"
            )));
        }
        Ok(Self {
            a: c.sqrt(),
            b: d.sqrt(),
            c,
            d,
            ln_a: 0.5 * c.ln(),
            ln_b: 0.5 * d.ln(),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn ln_a(&self) -> f64 {
        self.ln_a
    }

    pub fn ln_b(&self) -> f64 {
        self.ln_b
    }
}

pub fn derive_weights(params: &CouplingParameters) -> Result<TransferWeights> {
    TransferWeights::from_logs(params.beta * params.j, params.beta * params.jp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn value(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn from_value(v: i32) -> Option<Self> {
        match v {
            1 => Some(Spin::Up),
            -1 => Some(Spin::Down),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "+",
            Spin::Down => "-",
        })
    }
}

/// A vertex together with its three direct successors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SemiBallConfiguration {
    pub center: Spin,
    pub successors: [Spin; 3],
}

impl SemiBallConfiguration {
    pub fn new(center: Spin, successors: [Spin; 3]) -> Self {
        Self { center, successors }
    }

    /// All sixteen configurations, center `+` first, successors enumerated
    /// with the first slot varying slowest.
    pub fn all() -> [SemiBallConfiguration; 16] {
        let mut out = [SemiBallConfiguration::new(Spin::Up, [Spin::Up; 3]); 16];
        let mut n = 0;
        for center in Spin::ALL {
            for s0 in Spin::ALL {
                for s1 in Spin::ALL {
                    for s2 in Spin::ALL {
                        out[n] = SemiBallConfiguration::new(center, [s0, s1, s2]);
                        n += 1;
                    }
                }
            }
        }
        out
    }

    pub fn up_successors(&self) -> usize {
        self.successors.iter().filter(|s| **s == Spin::Up).count()
    }

    pub fn spin_product(&self) -> i32 {
        self.successors
            .iter()
            .fold(self.center.value(), |acc, s| acc * s.value())
    }
}

impl fmt::Display for SemiBallConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z] = self.successors;
        write!(f, "({}; {},{},{})", self.center, x, y, z)
    }
}

/// One of the eight successor-permutation classes of semi-ball
/// configurations, with the product of its four spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfigClass {
    index: u8,
    sign: i8,
}

impl ConfigClass {
    /// Class index in `1..=8`.
    pub fn index(&self) -> usize {
        self.index as usize
    }

    pub fn sign(&self) -> i32 {
        self.sign as i32
    }

    /// Number of configurations that collapse onto this class.
    pub fn multiplicity(&self) -> usize {
        match self.index {
            1 | 4 | 5 | 8 => 1,
            _ => 3,
        }
    }
}

/// Classes 1-4 have center `+` with 3, 2, 1, 0 up successors; classes 5-8
/// repeat the pattern with center `-`.
pub fn classify_config(cfg: &SemiBallConfiguration) -> ConfigClass {
    let offset = match cfg.center {
        Spin::Up => 1,
        Spin::Down => 5,
    };
    let index = offset + (3 - cfg.up_successors()) as u8;
    ConfigClass {
        index,
        sign: cfg.spin_product() as i8,
    }
}

/// Collapsed boundary field `h = (h1, ..., h8)`, one value per
/// configuration class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFieldVector {
    h: [f64; 8],
}

impl BoundaryFieldVector {
    pub fn from_h(h: [f64; 8]) -> Result<Self> {
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite field component in {h:?}"
            )));
        }
        Ok(Self { h })
    }

    pub fn from_u(u: [f64; 8]) -> Result<Self> {
        if u.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Domain(format!(
                "u components must be positive: {u:?}"
            )));
        }
        Ok(Self { h: u.map(f64::ln) })
    }

    pub fn zero() -> Self {
        Self { h: [0.0; 8] }
    }

    pub fn h(&self) -> [f64; 8] {
        self.h
    }

    pub fn u(&self) -> [f64; 8] {
        self.h.map(f64::exp)
    }

    /// Field value of class `index` in `1..=8`.
    pub fn class_value(&self, index: usize) -> f64 {
        self.h[index - 1]
    }

    /// Contribution `sign * h_class` of one semi-ball to the measure's exponent.
    pub fn semi_ball_exponent(&self, cfg: &SemiBallConfiguration) -> f64 {
        let class = classify_config(cfg);
        class.sign() as f64 * self.class_value(class.index())
    }

    /// Reads back the scalar `x` of a vector produced by [`field_from_scalar`].
    pub fn scalar(&self) -> f64 {
        (4.0 * self.h[3] / 3.0).exp()
    }

    /// Absolute deviations from the cube relations
    /// `h2 = (h4-2h1)/3, h3 = (h1-2h4)/3, h6 = (h8-2h5)/3, h7 = (h5-2h8)/3`.
    pub fn cube_relation_residuals(&self) -> [f64; 4] {
        let h = &self.h;
        [
            (h[1] - (h[3] - 2.0 * h[0]) / 3.0).abs(),
            (h[2] - (h[0] - 2.0 * h[3]) / 3.0).abs(),
            (h[5] - (h[7] - 2.0 * h[4]) / 3.0).abs(),
            (h[6] - (h[4] - 2.0 * h[7]) / 3.0).abs(),
        ]
    }
}

pub fn field_form_from_pqrs(p: f64, q: f64, r: f64, s: f64) -> BoundaryFieldVector {
    BoundaryFieldVector {
        h: [
            p,
            (q - 2.0 * p) / 3.0,
            (p - 2.0 * q) / 3.0,
            q,
            r,
            (s - 2.0 * r) / 3.0,
            (r - 2.0 * s) / 3.0,
            s,
        ],
    }
}

/// Boundary field on the symmetric slice of set A: `v4 = v5 = x^{1/4}`,
/// `v1 = v4³`, `v8 = v5³`, `u_i = v_i³`.
pub fn field_from_scalar(x: f64) -> Result<BoundaryFieldVector> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("scalar x must be positive, got {x}")));
    }
    let ln_v4 = 0.25 * x.ln();
    let ln_v1 = 3.0 * ln_v4;
    let h1 = 3.0 * ln_v1;
    let h4 = 3.0 * ln_v4;
    Ok(field_form_from_pqrs(h1, h4, h4, h1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_couplings_give_unit_weights() {
        let w = CouplingParameters::new(0.0, 0.0, 1.0)
            .unwrap()
            .weights()
            .unwrap();
        assert_eq!((w.a(), w.b(), w.c(), w.d()), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn figure_parameter_weights() {
        let w = CouplingParameters::new(-1.7, 6.5, 13.0)
            .unwrap()
            .weights()
            .unwrap();
        assert_relative_eq!(w.d(), std::f64::consts::E, max_relative = 1e-15);
        let w = CouplingParameters::new(6.75, 1.95, -5.75)
            .unwrap()
            .weights()
            .unwrap();
        assert_relative_eq!(w.c(), (2.0 * 6.75 / -5.75f64).exp(), max_relative = 1e-15);
        assert!((w.c() - 0.09560).abs() < 5e-5);
    }

    #[test]
    fn zero_temperature_rejected() {
        assert_eq!(
            CouplingParameters::new(1.0, 1.0, 0.0),
            Err(Error::ZeroTemperature)
        );
        assert!(CouplingParameters::new(1.0, -0.0, -0.0).is_err());
    }

    #[test]
    fn overflowing_weights_are_range_errors() {
        let p = CouplingParameters::new(1000.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            derive_weights(&p),
            Err(Error::WeightRange { name: "a", .. })
        ));
        // a fits, c = a² does not
        let p = CouplingParameters::new(400.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            derive_weights(&p),
            Err(Error::WeightRange { name: "c", .. })
        ));
        let p = CouplingParameters::new(0.0, -800.0, 1.0).unwrap();
        assert!(derive_weights(&p).is_err());
    }

    #[test]
    fn classify_examples() {
        use Spin::*;
        let c = classify_config(&SemiBallConfiguration::new(Up, [Up, Up, Up]));
        assert_eq!((c.index(), c.sign()), (1, 1));
        let c = classify_config(&SemiBallConfiguration::new(Up, [Up, Up, Down]));
        assert_eq!((c.index(), c.sign()), (2, -1));
        let c = classify_config(&SemiBallConfiguration::new(Down, [Down, Down, Down]));
        assert_eq!((c.index(), c.sign()), (8, 1));
    }

    #[test]
    fn class_partition_multiplicities() {
        let mut counts = [0usize; 8];
        for cfg in SemiBallConfiguration::all() {
            let class = classify_config(&cfg);
            counts[class.index() - 1] += 1;
            assert_eq!(class.sign(), cfg.spin_product());
            assert_eq!(class.multiplicity(), counts_expected(class.index()));
        }
        assert_eq!(counts, [1, 3, 3, 1, 1, 3, 3, 1]);
        assert_eq!(counts.iter().sum::<usize>(), 16);

        fn counts_expected(i: usize) -> usize {
            [1, 3, 3, 1, 1, 3, 3, 1][i - 1]
        }
    }

    #[test]
    fn class_is_permutation_invariant() {
        for cfg in SemiBallConfiguration::all() {
            let [x, y, z] = cfg.successors;
            for perm in [
                [x, y, z],
                [x, z, y],
                [y, x, z],
                [y, z, x],
                [z, x, y],
                [z, y, x],
            ] {
                let p = SemiBallConfiguration::new(cfg.center, perm);
                assert_eq!(classify_config(&p), classify_config(&cfg));
            }
        }
    }

    #[test]
    fn pqrs_examples() {
        assert_eq!(field_form_from_pqrs(0.0, 0.0, 0.0, 0.0).h(), [0.0; 8]);
        assert_eq!(
            field_form_from_pqrs(3.0, 0.0, 0.0, 3.0).h(),
            [3.0, -2.0, 1.0, 0.0, 0.0, 1.0, -2.0, 3.0]
        );
    }

    #[test]
    fn scalar_field_examples() {
        assert!(field_from_scalar(1.0)
            .unwrap()
            .h()
            .iter()
            .all(|h| *h == 0.0));
        let h = field_from_scalar(16.0).unwrap().h();
        let ln2 = std::f64::consts::LN_2;
        assert_relative_eq!(h[0], 9.0 * ln2, max_relative = 1e-14);
        assert_relative_eq!(h[3], 3.0 * ln2, max_relative = 1e-14);
        assert_relative_eq!(
            field_from_scalar(16.0).unwrap().scalar(),
            16.0,
            max_relative = 1e-12
        );
        assert!(field_from_scalar(0.0).is_err());
        assert!(field_from_scalar(-2.0).is_err());
    }
}
