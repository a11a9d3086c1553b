//! Exact computer algebra for quantizations in characteristic p.
//!
//! The crate covers truncated coefficient rings and h-adic series
//! ([`coeff`]), the truncated Poisson algebra A₀ with its forms calculus
//! ([`poisson`]), the restricted Weyl algebra and its flat sibling
//! ([`weyl`]), the matrix representation ([`matrep`]), Rees algebras of
//! differential operators ([`diffops`]), points of the automorphism group
//! ([`autgrp`]) and graded Lie algebra checks ([`lie`]). [`suites`] bundles
//! the verification checks used by the command line runner.

pub mod autgrp;
pub mod coeff;
pub mod diffops;
pub mod fp;
pub mod lie;
pub mod matrep;
pub mod poisson;
pub mod suites;
pub mod weyl;

mod error;

pub use error::{Error, Result};
