//! Pairwise balanced designs PBD(v, {3,4,5}) in which every three points
//! generate a small flat.
//!
//! The crate builds finite geometries, composes them with Wilson's
//! fundamental construction and group filling, legally truncates PG_d(4),
//! and dispatches every `v` to a construction route that certifies a bound on
//! three-point flats. Derived latin squares and cycle scans live in
//! [`latin`].

pub mod catalog;
pub mod certificate;
pub mod compose;
pub mod design;
pub mod error;
pub mod field;
pub mod flats;
pub mod geometry;
pub mod inflation;
pub mod io;
pub mod latin;
pub mod truncation;

pub use error::{Error, Result};
