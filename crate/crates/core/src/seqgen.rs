//! Address-sequence engines.
//!
//! * direct: `A(n) = b_1(n)·v_1 ⊕ … ⊕ b_m(n)·v_m` for the counter `B(n) = n`;
//! * recursive: `A(0) = A0`, `A(n) = A(n−1) ⊕ v_i` with `i` taken from the
//!   switching sequence of a gray counter started at `B0`.
//!
//! The two are tied together by the prefix-XOR basis transform:
//! `direct(V) = recursive(to_star_basis(V))` and
//! `recursive(V) = direct(from_star_basis(V))` (for `A0 = B0 = 0`).
//! Down-sequences, shifted copies and bit-inverted copies are all
//! recursive runs with different `(A0, B0)`.

use crate::error::{Error, Result};
use crate::gf2::{BitVector, GenerationMatrix};
use crate::gray::{gray_word, SwitchingGenerator};
use crate::{full_length, width_mask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Up,
    Down,
}

/// Complete recipe for one recursive sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSpec {
    matrix: GenerationMatrix,
    a0: u64,
    b0: u64,
    direction: Direction,
    count: u128,
}

impl SequenceSpec {
    /// Defaults: `A0 = 0`, `B0 = 0`, up, full length `2^m`.
    pub fn new(matrix: GenerationMatrix) -> Result<Self> {
        matrix.require_full_rank()?;
        let count = full_length(matrix.m());
        Ok(Self {
            matrix,
            a0: 0,
            b0: 0,
            direction: Direction::Up,
            count,
        })
    }

    pub fn with_start_address(mut self, a0: u64) -> Result<Self> {
        BitVector::new(self.m(), a0)?;
        self.a0 = a0;
        Ok(self)
    }

    pub fn with_start_counter(mut self, b0: u64) -> Result<Self> {
        BitVector::new(self.m(), b0)?;
        self.b0 = b0;
        Ok(self)
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_count(mut self, count: u128) -> Result<Self> {
        if count > full_length(self.m()) {
            return Err(Error::CountTooLarge { count, m: self.m() });
        }
        self.count = count;
        Ok(self)
    }

    pub fn matrix(&self) -> &GenerationMatrix {
        &self.matrix
    }

    pub fn m(&self) -> usize {
        self.matrix.m()
    }

    pub fn start_address(&self) -> BitVector {
        BitVector::from_masked(self.m(), self.a0)
    }

    pub fn start_counter(&self) -> BitVector {
        BitVector::from_masked(self.m(), self.b0)
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn count(&self) -> u128 {
        self.count
    }

    /// True when the spec covers all `2^m` addresses.
    pub fn is_complete(&self) -> bool {
        self.count == full_length(self.m())
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Direct { counter: u64 },
    Recursive { switching: SwitchingGenerator },
}

/// A lazily produced address sequence.
///
/// Holds its own copy of the matrix rows, so streams are independent of one
/// another and of the matrix they were built from.
#[derive(Debug, Clone)]
pub struct AddressStream {
    m: usize,
    matrix: GenerationMatrix,
    engine: Engine,
    current: u64,
    emitted: u128,
    count: u128,
    xor_ops: u64,
}

impl AddressStream {
    fn new(matrix: &GenerationMatrix, engine: Engine, start: u64, count: u128) -> Self {
        Self {
            m: matrix.m(),
            matrix: matrix.clone(),
            engine,
            current: start,
            emitted: 0,
            count,
            xor_ops: 0,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of addresses emitted so far.
    pub fn position(&self) -> u128 {
        self.emitted
    }

    pub fn remaining(&self) -> u128 {
        self.count - self.emitted
    }

    /// Row XORs performed so far. The recursive engine does exactly one per
    /// address after the first; the direct engine does `popcount(n)` for
    /// address `n`.
    pub fn xor_ops(&self) -> u64 {
        self.xor_ops
    }

    /// Next address as a raw word.
    #[inline]
    pub fn next_word(&mut self) -> Option<u64> {
        if self.emitted == self.count {
            return None;
        }
        if self.emitted > 0 {
            match &mut self.engine {
                Engine::Direct { counter } => {
                    *counter = counter.wrapping_add(1) & width_mask(self.m);
                    self.xor_ops += u64::from(counter.count_ones());
                    self.current = self.matrix.combine(*counter);
                }
                Engine::Recursive { switching } => {
                    let index = switching.advance();
                    self.current ^= self.matrix.row_words()[index - 1];
                    self.xor_ops += 1;
                }
            }
        }
        self.emitted += 1;
        Some(self.current)
    }

    pub fn words(self) -> impl Iterator<Item = u64> {
        let mut s = self;
        std::iter::from_fn(move || s.next_word())
    }
}

impl Iterator for AddressStream {
    type Item = BitVector;

    #[inline]
    fn next(&mut self) -> Option<BitVector> {
        let m = self.m;
        self.next_word().map(|w| BitVector::from_masked(m, w))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = usize::try_from(self.remaining()).unwrap_or(usize::MAX);
        (left, usize::try_from(self.remaining()).ok())
    }
}

/// `A(n) = V · B(n)` for the binary counter `B(n) = n`, `n = 0..count`.
pub fn generate_direct(v: &GenerationMatrix, count: u128) -> Result<AddressStream> {
    v.require_full_rank()?;
    if count > full_length(v.m()) {
        return Err(Error::CountTooLarge { count, m: v.m() });
    }
    Ok(AddressStream::new(
        v,
        Engine::Direct { counter: 0 },
        0,
        count,
    ))
}

/// Up-sequence of the recursive engine. The spec's direction is ignored;
/// [`generate`] dispatches on it.
pub fn generate_recursive(spec: &SequenceSpec) -> AddressStream {
    let switching = SwitchingGenerator::from_parts(spec.m(), spec.b0);
    AddressStream::new(
        &spec.matrix,
        Engine::Recursive { switching },
        spec.a0,
        spec.count,
    )
}

/// Last address `A(2^m − 1)` of the up-sequence described by `spec`,
/// without iterating.
pub fn final_up_address(spec: &SequenceSpec) -> BitVector {
    let mask = width_mask(spec.m());
    let last = spec.b0.wrapping_sub(1) & mask;
    let word = spec.a0 ^ spec.matrix.combine(gray_word(last) ^ gray_word(spec.b0));
    BitVector::from_masked(spec.m(), word)
}

/// Reverse of the full up-sequence: `⇓A(n) = ⇑A(2^m − 1 − n)`.
///
/// Starts the same recursive engine at `⇑A(2^m − 1)`. The counter starts at
/// `−B0 mod 2^m`, whose switching sequence is the reversal of the one
/// started at `B0` (for `B0 = 0` both are the palindrome `T_m`). A partial
/// count truncates the reversed sequence.
pub fn generate_down(spec: &SequenceSpec) -> AddressStream {
    let m = spec.m();
    let start = final_up_address(spec).word();
    let b0 = spec.b0.wrapping_neg() & width_mask(m);
    let switching = SwitchingGenerator::from_parts(m, b0);
    AddressStream::new(
        &spec.matrix,
        Engine::Recursive { switching },
        start,
        spec.count,
    )
}

/// Runs the recursive engine in the spec's direction.
pub fn generate(spec: &SequenceSpec) -> AddressStream {
    match spec.direction {
        Direction::Up => generate_recursive(spec),
        Direction::Down => generate_down(spec),
    }
}

fn check_shift(m: usize, l: u128) -> Result<u64> {
    if l >= full_length(m) {
        return Err(Error::ShiftOutOfRange { shift: l, m });
    }
    Ok(l as u64)
}

/// Address `l` of the recursive sequence with `A0 = B0 = 0`, in O(m):
/// a direct combination over `from_star_basis(V)`.
pub fn start_address_at(v: &GenerationMatrix, l: u128) -> Result<BitVector> {
    let l = check_shift(v.m(), l)?;
    let adjacent = v.from_star_basis();
    Ok(BitVector::from_masked(v.m(), adjacent.combine(l)))
}

/// The recursive sequence of `V` rotated left by `l` positions:
/// `B0 = l`, `A0 = A(l)`.
pub fn generate_shifted(v: &GenerationMatrix, l: u128, count: u128) -> Result<AddressStream> {
    let a0 = start_address_at(v, l)?.word();
    let spec = SequenceSpec::new(v.clone())?
        .with_start_counter(l as u64)?
        .with_start_address(a0)?
        .with_count(count)?;
    Ok(generate_recursive(&spec))
}
