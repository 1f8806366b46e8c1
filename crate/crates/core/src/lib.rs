//! Polar codes over arbitrary finite alphabets.
//!
//! Finite-field arithmetic, discrete memoryless channels and their
//! reliability metrics, general and linear polarization kernels, the
//! one-step channel transform, multi-level polarization statistics, and a
//! successive-cancellation encoder/decoder.

pub mod budget;
pub mod channel;
pub mod codec;
pub mod error;
pub mod gfq;
pub mod io;
pub mod kernel;
pub mod numeric;
pub mod polarize;
pub mod transform;

pub use budget::Budgets;
pub use channel::{BoundReport, Channel, Permutation};
pub use error::{Error, Result};
pub use gfq::{Element, Field, Matrix};
pub use kernel::{DistanceProfile, Kernel, Witness};
