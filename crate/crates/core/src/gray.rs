//! Reflected gray code and the switching sequence that drives row selection.
//!
//! The switching-sequence generator is a software copy of the hardware
//! dataflow: an up-counter `B(n)`, a gray converter `B(n)_g`, and an XOR of
//! consecutive gray words whose single set bit names the row `v_i` to apply.

use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::width_mask;

/// Gray word of a counter value: `g_m = b_m`, `g_i = b_{i+1} ⊕ b_i`.
#[inline]
pub fn gray_word(b: u64) -> u64 {
    b ^ (b >> 1)
}

/// Inverse of [`gray_word`].
#[inline]
pub fn gray_word_inverse(g: u64) -> u64 {
    let mut b = g;
    let mut shift = 1;
    while shift < 64 {
        b ^= b >> shift;
        shift <<= 1;
    }
    b
}

pub fn to_gray(b: &BitVector) -> BitVector {
    // width is already valid and b >> 1 cannot grow the value
    BitVector::new(b.width(), gray_word(b.word())).expect("gray word fits width")
}

/// 1-based index of the single bit in which two gray words differ.
pub fn switching_index(prev_gray: &BitVector, cur_gray: &BitVector) -> Result<usize> {
    let diff = prev_gray.checked_xor(cur_gray)?;
    let weight = diff.weight();
    if weight != 1 {
        return Err(Error::NonAdjacentGray { weight });
    }
    Ok(diff.word().trailing_zeros() as usize + 1)
}

/// Unchecked word form; `diff` must have exactly one set bit.
#[inline]
pub(crate) fn index_of_flip(prev_gray: u64, cur_gray: u64) -> usize {
    let diff = prev_gray ^ cur_gray;
    debug_assert_eq!(diff.count_ones(), 1);
    diff.trailing_zeros() as usize + 1
}

/// One output of the switching-sequence generator: step `n` moves the
/// address from `A(n−1)` to `A(n)` using row `v_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchingStep {
    pub n: u64,
    pub index: usize,
}

/// Up-counter plus gray converter plus XOR stage.
///
/// The counter wraps modulo `2^m` without notice; iteration never ends on
/// its own, so callers bound it (see [`switching_sequence`]).
#[derive(Debug, Clone)]
pub struct SwitchingGenerator {
    mask: u64,
    counter: u64,
    gray: u64,
    n: u64,
}

impl SwitchingGenerator {
    pub fn new(m: usize, b0: u64) -> Result<Self> {
        BitVector::new(m, b0)?;
        Ok(Self::from_parts(m, b0))
    }

    pub(crate) fn from_parts(m: usize, b0: u64) -> Self {
        let mask = width_mask(m);
        let counter = b0 & mask;
        Self {
            mask,
            counter,
            gray: gray_word(counter),
            n: 0,
        }
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Increments the counter and returns the index of the flipped gray bit.
    #[inline]
    pub fn advance(&mut self) -> usize {
        self.counter = self.counter.wrapping_add(1) & self.mask;
        let next = gray_word(self.counter);
        let index = index_of_flip(self.gray, next);
        self.gray = next;
        self.n += 1;
        index
    }
}

impl Iterator for SwitchingGenerator {
    type Item = SwitchingStep;

    fn next(&mut self) -> Option<SwitchingStep> {
        let index = self.advance();
        Some(SwitchingStep { n: self.n, index })
    }
}

/// Index of the cyclic transition into counter state `b0`, i.e. from
/// `b0 − 1 (mod 2^m)` to `b0`. For `b0 = 0` this is `m`.
pub fn wrap_index(m: usize, b0: u64) -> Result<usize> {
    BitVector::new(m, b0)?;
    let prev = b0.wrapping_sub(1) & width_mask(m);
    Ok(index_of_flip(gray_word(prev), gray_word(b0)))
}

/// Switching indices for a sequence of `count` addresses with the counter
/// started at `b0`. Step `n` (for `n = 1..count`) carries the index used
/// to move from address `n − 1` to `n`; step 0 emits nothing, so the result
/// has `count − 1` entries.
pub fn switching_sequence(m: usize, b0: &BitVector, count: u128) -> Result<Vec<SwitchingStep>> {
    if b0.width() != m {
        return Err(Error::WidthMismatch {
            expected: m,
            found: b0.width(),
        });
    }
    if count > crate::full_length(m) {
        return Err(Error::CountTooLarge { count, m });
    }
    let steps = count.saturating_sub(1) as usize;
    Ok(SwitchingGenerator::from_parts(m, b0.word())
        .take(steps)
        .collect())
}
