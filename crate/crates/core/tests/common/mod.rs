//! Helpers shared by the integration tests.
#![allow(dead_code)]

use cayley_gibbs::{CouplingParameters, TransferWeights, UVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const THREE_ROOTS: (f64, f64, f64) = (-1.7, 6.5, 13.0);
pub const DISPUTED: (f64, f64, f64) = (-1.045, -1.045, 6.55);
pub const ONE_ROOT: (f64, f64, f64) = (6.75, 1.95, -5.75);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn params((j, jp, t): (f64, f64, f64)) -> CouplingParameters {
    CouplingParameters::new(j, jp, t).unwrap()
}

pub fn weights(p: (f64, f64, f64)) -> TransferWeights {
    params(p).weights().unwrap()
}

/// Weights with `ln a`, `ln b` drawn uniformly from `[-spread, spread]`.
pub fn random_weights(rng: &mut impl Rng, spread: f64) -> TransferWeights {
    TransferWeights::from_logs(
        rng.gen_range(-spread..=spread),
        rng.gen_range(-spread..=spread),
    )
    .unwrap()
}

/// Positive vector with `ln u_i` uniform in `[-spread, spread]`.
pub fn random_u(rng: &mut impl Rng, spread: f64) -> UVector {
    UVector::new(std::array::from_fn(|_| {
        rng.gen_range(-spread..=spread).exp()
    }))
    .unwrap()
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite input")
}

fn g_exact(x: &BigRational, c: &BigRational, d: &BigRational) -> BigRational {
    let ratio = (BigRational::one() + c * d * x) / (d + c * x);
    &ratio * &ratio * &ratio
}

/// Step for the difference quotients: a small fraction of the distance from
/// `x` to the nearer of the two poles of the map's partial fractions.
fn fd_step(x: f64, c: f64, d: f64) -> f64 {
    let pole = (d + c * x) / c;
    let zero = (1.0 + c * d * x) / (c * d);
    1e-5 * pole.min(zero)
}

/// Central differences `(g(x+h) - g(x-h)) / 2h` and
/// `(g(x+h) - 2g(x) + g(x-h)) / h²`, evaluated in exact rational arithmetic
/// so only truncation error remains.
pub fn central_differences(x: f64, c: f64, d: f64) -> (f64, f64) {
    let step = fd_step(x, c, d);
    let (xr, cr, dr, h) = (exact(x), exact(c), exact(d), exact(step));
    let plus = g_exact(&(&xr + &h), &cr, &dr);
    let mid = g_exact(&xr, &cr, &dr);
    let minus = g_exact(&(&xr - &h), &cr, &dr);
    let two = BigRational::from_integer(BigInt::from(2));
    let first = (&plus - &minus) / (&two * &h);
    let second = (&plus - &two * &mid + &minus) / (&h * &h);
    (first.to_f64().unwrap(), second.to_f64().unwrap())
}

pub fn relative_error(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        ((value - reference) / reference).abs()
    }
}
