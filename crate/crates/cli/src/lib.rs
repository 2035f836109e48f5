//! Library surface of the command-line front end: scenario files, the
//! drift expression grammar, CSV/metadata rendering and the selftest
//! battery. The `fracguide` binary is a thin dispatcher over these pieces.

// Reference values keep every digit of their arbitrary-precision source.
#![allow(clippy::excessive_precision)]

pub mod expr;
pub mod report;
pub mod scenario;
pub mod selftest;
