pub mod action;
pub mod arith;
pub mod attack;
pub mod ddh;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod pairing;
pub mod quadform;
pub mod selftest;
pub mod sqrt_disambiguation;

pub use error::{Error, Result};
