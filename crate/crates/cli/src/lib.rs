//! Instance files and the hard-instance generator used by the `orbitcut` binary.

pub mod file;
pub mod generate;
