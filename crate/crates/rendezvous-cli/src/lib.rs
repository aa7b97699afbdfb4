//! IO side of the rendezvous simulator: output formats, run manifests for
//! byte-exact replay, and the parallel sweep runner behind the binary.

pub mod formats;
pub mod manifest;
pub mod runner;
