//! Exact search and certificate checking for sets of integers that contain
//! no `k + 1` pairwise coprime members.

pub mod arith;
pub mod conj2;
pub mod error;
pub mod goodsets;
pub mod scanner;
pub mod search;
pub mod sets;
pub mod tables;
pub mod theorems;

pub use error::{Error, Result};
