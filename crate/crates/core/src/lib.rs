//! Exact computational tools for shadows of PL maps into products, sunny
//! collapses, stable sunny collapses, and the homotopies they produce.

pub mod blister;
pub mod bundle;
pub mod collapse;
pub mod complex;
pub mod error;
mod fiber;
pub mod fixtures;
pub mod homotopy;
pub mod linalg;
pub mod lp;
pub mod maps;
pub mod rational;
pub mod shadow;
pub mod subdivide;

pub use complex::{Complex, Partition, ProductComplex, Simplex, Subcomplex};
pub use error::{Error, Result};
pub use rational::{Point, Rational};
