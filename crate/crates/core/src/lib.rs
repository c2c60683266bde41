//! Quantifying genuine tripartite entanglement of photon triplets from
//! third-order spontaneous parametric down-conversion.
//!
//! The crate is organized by task:
//!
//! - [`entropy`]: Shannon, conditional, and differential entropy kernels.
//! - [`triple_gaussian`]: the triple-Gaussian state, its exact tripartite
//!   entanglement of formation, pair statistics, and sampling.
//! - [`spdc`]: phase matching, Gaussian fit widths, the closed-form witness,
//!   and triplet generation rates for a pump/medium configuration.
//! - [`witness`]: entropic lower bounds on tripartite entanglement from
//!   measured statistics, coefficient optimization, and a numerical check of
//!   the entanglement-correlation relation.
//! - [`sampling_sim`]: simulated adaptive multiresolution coincidence scans.
//! - [`report`] and [`io`]: report, CSV, and config file formats.

pub mod entropy;
pub mod error;
pub mod io;
pub mod report;
pub mod rng;
pub mod sampling_sim;
pub mod spdc;
pub mod triple_gaussian;
pub mod witness;

pub use error::{Error, Result};
