//! Address sequence generation for memory built-in self-test.
//!
//! Every address sequence produced here is a set of linear combinations over
//! GF(2) of the rows of a full-rank `m × m` generation matrix. The rows are
//! selected either directly by a binary counter ([`seqgen::generate_direct`])
//! or one at a time by the switching sequence of a reflected gray counter
//! ([`seqgen::generate_recursive`]), which needs exactly one XOR per address.
//!
//! ```
//! use addrseq::gf2::GenerationMatrix;
//! use addrseq::seqgen::{generate_recursive, SequenceSpec};
//!
//! let v = GenerationMatrix::from_bit_strings(&["1011", "1000", "0101", "1111"]).unwrap();
//! let spec = SequenceSpec::new(v).unwrap();
//! let first: Vec<String> = generate_recursive(&spec).take(4).map(|a| a.to_string()).collect();
//! assert_eq!(first, ["0000", "1011", "0011", "1000"]);
//! ```
//!
//! Bit convention: an address `A = a_m … a_1` is stored with `a_1` in the
//! least significant bit and always printed most significant bit first, so
//! a printed matrix row reads the same as the printed address it contributes.

pub mod analysis;
pub mod error;
pub mod format;
pub mod gf2;
pub mod gray;
pub mod matrixlib;
pub mod seqgen;

pub use error::{Error, Result};
pub use gf2::{BitVector, GenerationMatrix};
pub use seqgen::{AddressStream, Direction, SequenceSpec};

/// Largest supported address width.
pub const MAX_WIDTH: usize = 64;

/// Mask with the low `width` bits set.
#[inline]
pub(crate) fn width_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// `2^m` as a `u128`, the length of a complete sequence.
#[inline]
pub fn full_length(m: usize) -> u128 {
    1u128 << m
}
