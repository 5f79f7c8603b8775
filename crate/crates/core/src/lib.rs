//! 2-adic partial Stirling functions.
//!
//! `P_n(x) = (1/n!) Σ_{j odd} C(n,j) j^x` extends continuously to the 2-adic
//! integers. This crate evaluates it to any precision, locates its zeros bit by
//! bit, and checks the finite conditions behind the known results about them.

pub mod atlas_io;
pub mod dyadic;
pub mod error;
pub mod golden;
pub mod kernel;
pub mod limits;
pub mod verify;
pub mod word;
pub mod zeros;

pub use dyadic::{TwoAdic, Valuation};
pub use error::{Error, Result};
pub use word::Word;

pub type TwoAdic64 = TwoAdic<u64>;
pub type TwoAdic128 = TwoAdic<u128>;
pub type TwoAdicBig = TwoAdic<num_bigint::BigUint>;
