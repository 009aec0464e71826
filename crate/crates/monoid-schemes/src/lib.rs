//! Monoid schemes of finite type.
//!
//! Pointed partially cancellative torsionfree (pctf) monoids are presented as
//! lattice semigroups modulo monomial ideals; schemes are finite posets of
//! such stalks. On top of this sit fans and toric schemes, blow-ups, a
//! decision suite for morphisms, and the squares of the cdh topology.

pub mod blowup;
pub mod cdh;
pub mod cone;
pub mod error;
pub mod lattice;
pub mod fan;
pub mod monoid;
pub mod morphisms;
pub mod realization;
pub mod scheme;

pub use error::{Error, Result};
