//! Library side of the overlap-lab tool: the acceptance suite, tabulation,
//! Monte Carlo verification and bulk-convergence studies, plus report
//! emission with manifests.

pub mod args;
pub mod converge;
pub mod emit;
pub mod manifest;
pub mod selftest;
pub mod tabulate;
pub mod verify;
