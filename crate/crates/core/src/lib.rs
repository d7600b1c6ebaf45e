//! Toolkit for finite-domain constraint problems in the XCSP3-core format:
//! model, reader and writer, checker, propagation solver, problem
//! generators and a competition harness.

pub mod model;
pub mod xcsp;
pub mod checker;
pub mod engine;
pub mod generators;
pub mod harness;
