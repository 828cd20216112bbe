//! Library surface of the verification runner (the binary is a thin shell
//! around these modules; the acceptance suite drives them directly).

pub mod config;
pub mod plots;
pub mod report;
pub mod suites;
pub mod symbol_file;
