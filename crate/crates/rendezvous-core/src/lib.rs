#![cfg_attr(not(any(feature = "std", test)), no_std)]

//! Channel-hopping rendezvous: hop rules, closed forms, simulation, exact oracles.
//!
//! Two users each hold a subset of N globally labeled channels and hop once per
//! time slot; they rendezvous in the first slot where both occupy a commonly
//! available channel. This crate houses the domain types, the six hop rules,
//! closed-form ETTR quantities, a deterministic Monte Carlo engine, and
//! small-instance brute-force oracles. Everything is usable without std
//! (alloc is required); IO and file formats live in the companion CLI crate.

extern crate alloc;

pub mod channel;
pub mod hop;
pub mod instances;
pub mod oracle;
pub mod rand;
pub mod sim;
pub mod theory;

pub use channel::{intersection_size, ChannelId, ChannelSet, ProblemInstance, TtrSample};
pub use hop::{ChannelMultiset, HopAlgorithm};
pub use instances::{InstanceSpec, Layout};
pub use rand::{derive_seed, make_permutation, Permutation, PrivateRandomness, SharedRandomness};
pub use sim::{DriftModel, Setting, SimulationConfig};

/// Failure modes shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidArgument(&'static str),
    /// A channel set or instance pair broke a structural invariant.
    InvalidInstance(&'static str),
    /// An instance specification cannot be realized inside its label space.
    InfeasibleSpec {
        n_total: u32,
        n1: u32,
        n2: u32,
        n12: u32,
        reason: &'static str,
    },
    /// A brute-force enumeration was requested beyond its complexity guard.
    GuardViolation { n_total: u32, max_supported: u32 },
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidInstance(msg) => write!(f, "invalid instance: {msg}"),
            Error::InfeasibleSpec {
                n_total,
                n1,
                n2,
                n12,
                reason,
            } => write!(
                f,
                "infeasible spec (N={n_total}, n1={n1}, n2={n2}, n12={n12}): {reason}"
            ),
            Error::GuardViolation {
                n_total,
                max_supported,
            } => write!(
                f,
                "enumeration guard: N={n_total} is too large, use N <= {max_supported}"
            ),
        }
    }
}

#[cfg(any(feature = "std", test))]
impl std::error::Error for Error {}
