//! Deterministic dense-state simulation and classical post-processing for
//! hidden subgroup problems.
//!
//! The crate is organized bottom-up:
//!
//! - [`numtheory`]: gcd/egcd, modular exponentiation, continued fractions.
//! - [`groups`]: finite abelian groups, characters, subgroups, annihilators,
//!   push/lift plumbing between groups, and unitary representation tables.
//! - [`qsim`]: the dense two-register simulator (prepare, transform, oracle,
//!   measure) over an abelian or nonabelian left register.
//! - [`qrand`]: the four-step sampling pipeline and the abelian hidden
//!   subgroup solver built on it.
//! - [`shor`]: period finding over Z_Q, factoring, the dual (reciprocal
//!   period) variant, and exponent estimation over Z^n.
//! - [`freegrp`]: reduced words, finite presentations, coset enumeration,
//!   Schreier transversals, and relator search for kernels of maps out of a
//!   free group.
//! - [`grover`]: unstructured search as a coset-labeling problem on the
//!   symmetric group.
//!
//! Everything is `no_std + alloc`; callers supply the RNG, so identical
//! seeds give identical outputs on every platform.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod freegrp;
pub mod groups;
pub mod grover;
pub mod numtheory;
pub mod qrand;
pub mod qsim;
pub mod shor;
