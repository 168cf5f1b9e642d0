//! Low-rank tensor-train toolkit for discretized probability density
//! functions (pdfs) and characteristic functions (pcfs).
//!
//! The pieces fit together like this: a pdf or pcf sampled on a centered
//! tensor grid becomes an order-d tensor, stored in the train format
//! ([`tt::TTTensor`]). Point-wise functions of such tensors (inverse, roots,
//! sign, log, exp, …) are computed with truncated Hadamard-algebra iterations
//! ([`pointwise`]), black-box grid functions are interpolated directly by
//! maxvol cross approximation ([`cross`]), and pdf ↔ pcf conversion is a
//! rank-preserving dimension-wise FFT ([`spectral`]). On top of that sit
//! discrete integrals, moments, entropies and f-divergences ([`stats`]) and
//! analytic reference distributions ([`dist`]).
//!
//! Everything is double precision; tensors are immutable and all operations
//! are pure functions. [`dense::DenseTensor`] is the deliberately naive
//! full-storage oracle used by the test suites.

pub mod cp;
pub mod cross;
pub mod dense;
pub mod dist;
pub mod error;
pub mod grid;
pub mod pointwise;
pub mod scalar;
pub mod spectral;
pub mod stats;
pub mod tt;
pub mod ttjson;

pub use error::{Error, Result};
pub use scalar::{Field, Scalar};
pub use tt::{RoundReport, TTTensor, TruncationConfig};
