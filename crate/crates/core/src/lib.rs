pub mod commoncause;
pub mod dynamics;
pub mod error;
pub mod isingnet;
pub mod matrixcore;
pub mod oscillator;
pub mod probspace;
pub mod spacetime;

pub use error::{Error, Result};
