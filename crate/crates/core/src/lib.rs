//! Translation-invariant Gibbs measures with memory of length 2 for the
//! Ising model with competing nearest-neighbour and prolonged
//! next-nearest-neighbour couplings on the semi-infinite Cayley tree of
//! order three.
//!
//! * [`model`]: couplings, transfer weights, semi-ball classes, boundary fields.
//! * [`recurrence`]: the eight-equation recurrence, its four-variable
//!   reduction and the scalar map `g(x) = ((1+cdx)/(d+cx))³`.
//! * [`fixpoint`]: positive fixed points of `g`, stability, thresholds.
//! * [`oracle`]: brute-force finite-volume measures used as ground truth.
//! * [`scanner`]: `(J, Jp, T)` sweeps and their CSV / JSON-lines output.

pub mod error;
pub mod fixpoint;
pub mod model;
pub mod oracle;
pub mod recurrence;
pub mod scanner;

pub use error::{Error, Result};
pub use fixpoint::{
    classify_stability, critical_points, find_positive_fixed_points, iterate_map, predict_count,
    quartic_coefficients, quartic_positive_roots, FixedPointReport, Regime, Stability,
    ThresholdReport,
};
pub use model::{
    classify_config, derive_weights, field_form_from_pqrs, field_from_scalar, BoundaryFieldVector,
    ConfigClass, CouplingParameters, SemiBallConfiguration, Spin, TransferWeights,
};
pub use recurrence::{
    check_identities, full_step, reduced_step, scalar_map_d2g, scalar_map_dg, scalar_map_g,
    UVector, VVector,
};
