//! Reduced Whitehead groups of graded division algebras.

pub mod abgroup;
pub mod descriptor;
pub mod error;
pub mod ff;
pub mod gmodule;
pub mod graded;
pub mod linalg;
pub mod matdiv;
pub mod poly;
pub mod series;
pub mod sk1;
pub mod skewpoly;
pub mod tower;
pub mod wedderburn;

pub use error::{Error, Result};
