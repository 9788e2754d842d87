//! Exact p-adic Newton and Hodge polygons of abelian L-functions on open
//! subsets of the projective line.
//!
//! The crate computes Artin L-functions of `Z/p^nZ` characters given by
//! Artin–Schreier–Witt data, builds Hodge polygons from Swan conductors,
//! checks local-to-global touching of Newton and Hodge polygons, and
//! cross-checks local Newton polygons against a truncated Dwork operator.
//! [`valmat`] holds the valued-matrix perturbation machinery on its own.
//!
//! Module map:
//!
//! - [`exactnum`]: `Z[ζ_{p^n}]` with exact `π`-adic valuation, rationals
//! - [`ff`]: finite fields `F_{p^k}`, traces, embeddings
//! - [`witt`]: p-typical Witt vectors and traces to `Z/p^nZ`
//! - [`polygon`]: slope sets and their Newton polygons
//! - [`character`]: ASW characters, Swan conductors, Hodge polygons
//! - [`lfunction`]: L-polynomials from character sums, touching checks, zeta of covers
//! - [`dwork`]: Dwork operator oracle for order-`p` characters on `A¹`
//! - [`valmat`]: Newton/Hodge/column-Hodge polygons of valued matrices
//! - [`cli`]: the `nhlab` subcommands and their verdict records

pub mod character;
pub mod cli;
pub mod dwork;
pub mod error;
pub mod exactnum;
pub mod ff;
pub mod lfunction;
pub mod polygon;
pub mod valmat;
pub mod witt;

pub use error::{Error, Result};
