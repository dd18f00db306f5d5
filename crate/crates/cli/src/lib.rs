//! Library surface of the command-line driver, shared with the integration
//! and acceptance test suites.

pub mod driver;
pub mod kinds;
pub mod matrix;
pub mod oracles;
pub mod stats;
pub mod verify;
