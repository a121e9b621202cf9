pub mod error;
pub mod field;
pub mod minimax;
pub mod metrics;
pub mod pft;
pub mod ptycho;
pub mod solvers;

pub use error::{Error, Result};
