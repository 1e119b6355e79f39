pub mod cocycles;
pub mod detbundle;
pub mod error;
pub mod grassmann;
pub mod harness;
pub mod numkernel;
pub mod polarized;
pub mod regdet;
pub mod stiefel;

pub use error::{Error, Result};
