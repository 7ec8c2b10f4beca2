//! Parameter estimation for multidimensional modal (damped harmonic)
//! signals via simultaneous sparse approximation with multigrid dictionary
//! refinement, together with exact Cramér-Rao lower bounds for the model.
//!
//! The crate is organized around a dense complex tensor type and a small set
//! of estimator entry points:
//!
//! * [`signal`] — modal signal synthesis, seeded complex Gaussian noise and
//!   the total-RMSE evaluation metric;
//! * [`dictionary`] — normalized modal dictionaries on (frequency, damping)
//!   grids and local multigrid refinement;
//! * [`somp`] — the greedy simultaneous sparse solver shared by the
//!   estimators;
//! * [`stsm`] — the single-tone multigrid estimator (frequency pass followed
//!   by a damping pass, per dimension);
//! * [`mtsm`] — the multiple-tone estimator that separates components via a
//!   signal-subspace shift invariance and re-estimates them through a
//!   residual-decreasing deflation loop;
//! * [`crlb`] — Fisher-information bounds for every model parameter, with
//!   closed forms in the single-mode case.

pub mod crlb;
pub mod dictionary;
pub mod error;
mod linalg;
pub mod mtsm;
pub mod signal;
pub mod somp;
pub mod stsm;
pub mod tensor;

pub use error::{
    CrlbError, EstimatorError, GridError, LinalgError, SignalError, SompError, TensorError,
};
pub use signal::{Parameter, RdMode, SignalSpec};
pub use tensor::{ComplexMatrix, ComplexTensor};
