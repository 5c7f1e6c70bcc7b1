//! Restarted PDHG for standard-form linear programs, with tools that compute
//! the condition measures governing its iteration count.

pub mod error;
pub mod linalg;
pub mod model;
pub mod pdhg;
pub mod conditioning;
pub mod restart;
pub mod tuning;

pub use error::{Error, Result};
pub use linalg::SparseMatrixCSC;
pub use model::StandardFormLP;
pub use pdhg::{Iterate, StepSizes};
