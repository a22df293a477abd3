pub mod corpus;
pub mod error;
pub mod euclid;
pub mod experiments;
mod fft;
pub mod grid;
pub mod hardy;
pub mod kernels;
pub mod multipliers;
pub mod orlicz;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::GridFunction;
pub use spectral::TrigPoly;
