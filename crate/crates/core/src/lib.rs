//! Discrete scale invariant Markov (DSIM) sequences.
//!
//! The crate covers geometric sampling lattices and the quasi-Lamperti
//! transform ([`grid`]), seeded simulators ([`process`]), the exact covariance
//! algebra of DSIM sequences ([`covariance`]), moment and Hurst estimators
//! ([`estimate`]), the spectral objects of the associated multi-dimensional
//! self-similar process ([`spectral`]), and the Monte Carlo harness behind the
//! command-line benchmarks ([`bench`]).

// `!(x > 0.0)` guards reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod covariance;
pub mod error;
pub mod estimate;
pub mod grid;
pub mod mle;
pub mod path;
pub mod process;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/covariance.md")]
    mod covariance {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
