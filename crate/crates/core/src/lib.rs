//! Primitive element pairs (α, α + α⁻¹) with prescribed trace.
//!
//! The crate decides, for a prime power q and n ≥ 3, whether every a ∈ F_q
//! is the trace of some primitive α ∈ F_{q^n} whose companion α + α⁻¹ is
//! also primitive. It offers three sieve criteria with exact rational
//! thresholds ([`sieve`]), the character-sum count with a brute-force oracle
//! ([`charsum`]), two direct verification algorithms ([`verifier`]) and
//! range surveys ([`survey`]).

pub mod charsum;
pub mod decimal;
pub mod error;
pub mod ffield;
pub mod intnum;
pub mod sieve;
pub mod survey;
pub mod verifier;

pub use error::{Error, Result};
