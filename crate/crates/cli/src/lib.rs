//! Library half of `posdef-lab`: output formats shared by the binary and its
//! tests.

pub mod output;
