//! Exact lattice and discriminant-form toolkit for classifying symmetric
//! hyperkähler fourfolds of K3^[2]-type.

pub mod classify;
pub mod cli;
pub mod dataset;
pub mod enumerate;
pub mod error;
pub mod exact;
pub mod fqm;
pub mod glue;
pub mod hilb2;
pub mod lattice;
pub mod table;
pub mod leech;

pub use error::{Error, Result};
