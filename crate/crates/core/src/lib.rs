//! Dynamic equilibria of flows over time in fluid queueing networks.
//!
//! All arithmetic is exact (`Rational`). The main entry points are
//! [`engine::solve_equilibrium`], [`loading::load`] and the checks in
//! [`verify`].

// errors carry the offending rationals, which are wide
#![allow(clippy::result_large_err)]

pub mod engine;
pub mod exactlp;
pub mod gen;
pub mod loading;
pub mod netmodel;
pub mod ntf;
pub mod pwfn;
pub mod rational;
pub mod scenario;
pub mod verify;
#[cfg(test)]
mod testnets;

pub use netmodel::{EdgeSetPair, Network};
pub use pwfn::{PiecewiseConstantFn, PiecewiseLinearFn};
pub use rational::Rational;
