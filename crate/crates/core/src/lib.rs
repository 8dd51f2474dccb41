//! Exact-arithmetic invariants of Galois lattices.
//!
//! The crate computes, entirely over the integers:
//!
//! - Smith normal forms, fraction-free determinants, saturated kernel
//!   lattices and quotient invariants ([`linalg`]);
//! - finite matrix groups over `Z` by closure from generators, with Sylow
//!   subgroups ([`group`]);
//! - first group cohomology `H^1(G, M)` of a finite group acting on a free
//!   `Z`-module, by an exact cocycle-constraint method cross-checked against
//!   the bar complex ([`lattice`]);
//! - symmetric squares, exterior squares and tensor products of such modules
//!   ([`multilinear`]);
//! - Picard lattices of del Pezzo surfaces with their Weyl group actions,
//!   exceptional classes, root systems, and the obstruction invariants
//!   attached to the symmetric square of the Picard lattice ([`delpezzo`]);
//! - Picard lattices of Chatelet surface conic bundles from a root-action
//!   description, with orbit decompositions and a six-step filtration of the
//!   invariant part of the symmetric square ([`chatelet`]).
//!
//! A built-in verification battery ([`verify`]) reproduces the published
//! numerical facts these constructions rest on — determinant identities,
//! class counts, Weyl orders, cohomology vanishing — and is exposed on the
//! command line by the `latcoh` binary.

pub mod chatelet;
pub mod delpezzo;
pub mod error;
pub mod group;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod multilinear;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use group::MatGroup;
pub use lattice::GLattice;
pub use linalg::{FinAbGroup, IntMat, SmithForm};

/// Default ceiling on group closures (number of elements).
pub const DEFAULT_CAP: usize = 200_000;

/// Default seed for the randomized parts of the verification battery.
pub const DEFAULT_SEED: u64 = 42;
