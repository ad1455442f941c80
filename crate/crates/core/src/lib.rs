pub mod error;
pub mod qmat;
pub mod superop;
pub mod extops;
pub mod dilation;
pub mod infomeasures;
pub mod formats;
pub mod sampling;
pub mod checks;
pub mod cli;

pub use error::{Error, Result};
pub use num_complex::Complex64;
