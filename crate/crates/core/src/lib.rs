//! Random group presentations at density one half.
//!
//! Samplers for the density model, exact letter statistics of random reduced
//! words, the coloured pigeonhole coincidence experiment, a certificate-emitting
//! triviality pipeline, van Kampen diagram counting bounds, and the asymptotic
//! threshold conditions that separate the trivial and hyperbolic regimes.

pub mod diagrams;
pub mod distribution;
pub mod error;
pub mod pigeonhole;
pub mod rng;
pub mod thresholds;
pub mod trivializer;
pub mod words;

pub use error::{Error, Result};
pub use words::{Letter, ModelParams, Presentation, Word};
