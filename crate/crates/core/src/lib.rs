pub mod acceptance;
pub mod channels;
pub mod clifford;
pub mod error;
pub mod garble;
pub mod harness;
pub mod idealfunc;
pub mod protocol;
pub mod qmat;
pub mod scenario;

pub use error::{Error, Result};
