#![no_std]

extern crate alloc;

pub mod cells;
pub mod error;
pub mod family;
pub mod ladder;
pub mod lattice;
pub mod norms;
pub mod orthonormal;
pub mod poly;
pub mod quadrature;
pub mod scalar;
pub mod rodrigues;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use family::{catalog_get, FamilySpec, Params};
pub use lattice::{GridFunction, Lattice, LatticeKind, Site};
pub use poly::Poly;
pub use scalar::{parse_rational, parse_scalar, Rational, Real, Scalar};
