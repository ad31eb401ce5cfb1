//! Symbolic analysis of splitting integrators for Ito and Stratonovich SDEs.
//!
//! Words over an alphabet of vector-field labels index iterated integrals and
//! elementary differentials. A splitting scheme is turned into a word series
//! whose coefficients are polynomials in canonical (Lyndon) iterated-integral
//! atoms; comparing with the exact series yields strong and weak order
//! conditions.

pub mod analysis;
pub mod bridge;
pub mod chen;
pub mod error;
pub mod expectation;
pub mod poly;
pub mod ring;
pub mod scheme;
pub mod series;
pub mod words;

pub use error::{Error, Result};
