//! Spectral simulation and analysis of `2m`-order parabolic stochastic PDEs
//! on the one-dimensional torus.
//!
//! The crate is organised around the pieces needed to study
//!
//! ```text
//! du = [(-1)^{m+1} Σ A_{αβ} D^{α+β} u + f] dt + Σ_k [Σ B^k_α D^α u + g^k] dw^k
//! ```
//!
//! - [`multiindex`]: multi-indices and coefficient tensors.
//! - [`coercivity`]: exact decision of the standard and `p`-dependent
//!   coercivity conditions, and the critical integrability index.
//! - [`spectral`]: Fourier fields on the torus, symbols, Parseval norms.
//! - [`simulate`]: reproducible Wiener paths, the exact mode sampler for the
//!   model example and an exponential-Euler scheme with forcing.
//! - [`moments`]: closed-form and Monte Carlo moments, blowup verdicts.
//! - [`holder`]: stochastic Hölder norm estimators and the Schauder ratio.
//! - `cli` (feature `cli`): the `spde` command-line tool.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coercivity;
mod error;
pub mod holder;
pub mod moments;
pub mod multiindex;
mod parallel;
pub mod simulate;
pub mod spectral;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
pub use multiindex::{CoefficientSet, MultiIndex};
pub use spectral::SpectralField;
