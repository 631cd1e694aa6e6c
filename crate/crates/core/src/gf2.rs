//! Bit vectors and square matrices over GF(2).
//!
//! A [`BitVector`] is one machine word plus a width. Bit `k` (LSB = 0) holds
//! the component the address notation calls `a_{k+1}`; text rendering is
//! most significant bit first.
//!
//! A [`GenerationMatrix`] keeps its rows in order `v_1 … v_m`. Row order is
//! significant (it defines which address comes out of which counter value),
//! so nothing in this module ever reorders rows in place.

use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::{width_mask, MAX_WIDTH};

fn check_width(width: usize) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        Err(Error::WidthOutOfRange(width))
    } else {
        Ok(())
    }
}

/// An `width`-bit binary word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    width: u8,
    word: u64,
}

impl BitVector {
    pub fn new(width: usize, word: u64) -> Result<Self> {
        check_width(width)?;
        if word & !width_mask(width) != 0 {
            return Err(Error::ValueTooWide { value: word, width });
        }
        Ok(Self {
            width: width as u8,
            word,
        })
    }

    pub fn zero(width: usize) -> Result<Self> {
        Self::new(width, 0)
    }

    /// Width is assumed valid and `word` is masked to it.
    #[inline]
    pub(crate) fn from_masked(width: usize, word: u64) -> Self {
        debug_assert!((1..=MAX_WIDTH).contains(&width));
        Self {
            width: width as u8,
            word: word & width_mask(width),
        }
    }

    /// Parses an MSB-first string of `0`/`1`; the width is the string length.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let s = s.trim();
        check_width(s.len())?;
        let mut word = 0u64;
        for c in s.chars() {
            word <<= 1;
            match c {
                '0' => {}
                '1' => word |= 1,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "'{s}' is not a binary string"
                    )))
                }
            }
        }
        Self::new(s.len(), word)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width as usize
    }

    #[inline]
    pub fn word(&self) -> u64 {
        self.word
    }

    /// Component `a_index`, with `index` in `1..=width`.
    pub fn bit(&self, index: usize) -> bool {
        assert!(
            (1..=self.width()).contains(&index),
            "bit index {index} out of range 1..={}",
            self.width
        );
        (self.word >> (index - 1)) & 1 == 1
    }

    #[inline]
    pub fn weight(&self) -> u32 {
        self.word.count_ones()
    }

    /// Bitwise complement within the vector's width.
    pub fn complement(&self) -> Self {
        Self::from_masked(self.width(), !self.word)
    }

    pub fn checked_xor(&self, other: &Self) -> Result<Self> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                expected: self.width(),
                found: other.width(),
            });
        }
        Ok(Self {
            width: self.width,
            word: self.word ^ other.word,
        })
    }
}

impl BitXor for BitVector {
    type Output = BitVector;

    /// Panics on mismatched widths; use [`BitVector::checked_xor`] otherwise.
    fn bitxor(self, rhs: Self) -> Self::Output {
        self.checked_xor(&rhs)
            .expect("xor of vectors with different widths")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.word, width = self.width())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_bit_str(s)
    }
}

/// GF(2) row rank of `m`-bit rows, by elimination on a copy.
pub fn rank_of_rows(rows: &[u64]) -> usize {
    let mut work = rows.to_vec();
    let mut rank = 0;
    for col in (0..64).rev() {
        let bit = 1u64 << col;
        let Some(p) = (rank..work.len()).find(|&r| work[r] & bit != 0) else {
            continue;
        };
        work.swap(rank, p);
        let pivot = work[rank];
        for w in &mut work[rank + 1..] {
            if *w & bit != 0 {
                *w ^= pivot;
            }
        }
        rank += 1;
        if rank == work.len() {
            break;
        }
    }
    rank
}

/// An `m × m` matrix over GF(2) whose rows `v_1 … v_m` generate addresses.
///
/// Rank is computed once at construction. Matrices of any rank can be built
/// (rank statistics need them); generation entry points reject rank < m.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GenerationMatrix {
    m: usize,
    rows: Vec<u64>,
    rank: usize,
}

impl GenerationMatrix {
    /// Builds a matrix from row words; `rows[0]` is `v_1`.
    pub fn from_rows(m: usize, rows: Vec<u64>) -> Result<Self> {
        check_width(m)?;
        if rows.len() != m {
            return Err(Error::RowCount {
                expected: m,
                found: rows.len(),
            });
        }
        let mask = width_mask(m);
        if let Some(&bad) = rows.iter().find(|&&r| r & !mask != 0) {
            return Err(Error::ValueTooWide {
                value: bad,
                width: m,
            });
        }
        let rank = rank_of_rows(&rows);
        Ok(Self { m, rows, rank })
    }

    pub fn from_vectors(rows: &[BitVector]) -> Result<Self> {
        let m = rows.len();
        if let Some(r) = rows.iter().find(|r| r.width() != m) {
            return Err(Error::WidthMismatch {
                expected: m,
                found: r.width(),
            });
        }
        Self::from_rows(m, rows.iter().map(BitVector::word).collect())
    }

    /// Builds a matrix from MSB-first row strings, e.g. `["1011", "1000", …]`.
    pub fn from_bit_strings<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let vectors = rows
            .iter()
            .map(|s| BitVector::from_bit_str(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_vectors(&vectors)
    }

    pub fn identity(m: usize) -> Result<Self> {
        check_width(m)?;
        Self::from_rows(m, (0..m).map(|i| 1u64 << i).collect())
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.m
    }

    /// Errors with the rank found if the matrix cannot generate a sequence.
    pub fn require_full_rank(&self) -> Result<()> {
        if self.is_full_rank() {
            Ok(())
        } else {
            Err(Error::RankDeficient {
                rank: self.rank,
                m: self.m,
            })
        }
    }

    #[inline]
    pub fn row_words(&self) -> &[u64] {
        &self.rows
    }

    /// Row `v_index`, `index` in `1..=m`.
    pub fn row(&self, index: usize) -> BitVector {
        BitVector::from_masked(self.m, self.rows[index - 1])
    }

    pub fn rows(&self) -> impl Iterator<Item = BitVector> + '_ {
        self.rows
            .iter()
            .map(move |&w| BitVector::from_masked(self.m, w))
    }

    /// XOR of the rows `v_i` whose selector bit `b_i` is set (`b_1` is the LSB).
    #[inline]
    pub fn combine(&self, selector: u64) -> u64 {
        let mut acc = 0u64;
        let mut bits = selector & width_mask(self.m);
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            acc ^= self.rows[i];
            bits &= bits - 1;
        }
        acc
    }

    /// Prefix-XOR transform: row `i` of the result is `v_1 ⊕ … ⊕ v_i`.
    pub fn to_star_basis(&self) -> Self {
        let mut acc = 0u64;
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                acc ^= r;
                acc
            })
            .collect();
        Self {
            m: self.m,
            rows,
            rank: self.rank,
        }
    }

    /// Inverse of [`to_star_basis`](Self::to_star_basis): row 1 is copied,
    /// row `i > 1` is the XOR of adjacent rows `i − 1` and `i`.
    pub fn from_star_basis(&self) -> Self {
        let rows = (0..self.m)
            .map(|i| {
                if i == 0 {
                    self.rows[0]
                } else {
                    self.rows[i - 1] ^ self.rows[i]
                }
            })
            .collect();
        Self {
            m: self.m,
            rows,
            rank: self.rank,
        }
    }

    /// Text form: `m=<m>` followed by one MSB-first row per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("m={}\n", self.m);
        for row in self.rows() {
            out.push_str(&row.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the text form. Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty matrix file".into(),
        })?;
        let m: usize = header
            .strip_prefix("m=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                line: hline,
                msg: format!("expected 'm=<int>', got '{header}'"),
            })?;
        check_width(m).map_err(|e| Error::Parse {
            line: hline,
            msg: e.to_string(),
        })?;

        let mut rows = Vec::with_capacity(m);
        for (line, text) in lines {
            if rows.len() == m {
                return Err(Error::Parse {
                    line,
                    msg: format!("unexpected extra row after {m} rows"),
                });
            }
            if text.len() != m {
                return Err(Error::Parse {
                    line,
                    msg: format!("row has {} characters, expected {m}", text.len()),
                });
            }
            let v = BitVector::from_bit_str(text).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            rows.push(v.word());
        }
        if rows.len() != m {
            return Err(Error::RowCount {
                expected: m,
                found: rows.len(),
            });
        }
        Self::from_rows(m, rows)
    }
}

/// Free-function form of [`GenerationMatrix::rank`], recomputed from the rows.
pub fn matrix_rank(v: &GenerationMatrix) -> usize {
    rank_of_rows(v.row_words())
}

pub fn to_star_basis(v: &GenerationMatrix) -> GenerationMatrix {
    v.to_star_basis()
}

pub fn from_star_basis(v: &GenerationMatrix) -> GenerationMatrix {
    v.from_star_basis()
}

/// `A = b_1·v_1 ⊕ … ⊕ b_m·v_m`.
pub fn matvec_combination(v: &GenerationMatrix, b: &BitVector) -> Result<BitVector> {
    if b.width() != v.m() {
        return Err(Error::WidthMismatch {
            expected: v.m(),
            found: b.width(),
        });
    }
    Ok(BitVector::from_masked(v.m(), v.combine(b.word())))
}

impl fmt::Debug for GenerationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenerationMatrix")
            .field("m", &self.m)
            .field("rank", &self.rank)
            .field(
                "rows",
                &self.rows().map(|r| r.to_string()).collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl fmt::Display for GenerationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for GenerationMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_text(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn mat(rows: &[&str]) -> GenerationMatrix {
        GenerationMatrix::from_bit_strings(rows).unwrap()
    }

    fn strings(v: &GenerationMatrix) -> Vec<String> {
        v.rows().map(|r| r.to_string()).collect()
    }

    // Rank as log2 of the span size; independent of elimination.
    fn span_rank(rows: &[u64]) -> usize {
        let mut span: HashSet<u64> = HashSet::new();
        for sel in 0u64..(1 << rows.len()) {
            let mut acc = 0;
            for (i, r) in rows.iter().enumerate() {
                if sel >> i & 1 == 1 {
                    acc ^= r;
                }
            }
            span.insert(acc);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn bitvector_rendering_is_msb_first() {
        let v = BitVector::from_bit_str("1011").unwrap();
        assert_eq!(v.word(), 0b1011);
        assert!(v.bit(1) && v.bit(2) && !v.bit(3) && v.bit(4));
        assert_eq!(v.to_string(), "1011");
        assert_eq!(v.complement().to_string(), "0100");
    }

    #[test]
    fn bitvector_rejects_bad_width_and_value() {
        assert_eq!(BitVector::new(0, 0), Err(Error::WidthOutOfRange(0)));
        assert_eq!(BitVector::new(65, 0), Err(Error::WidthOutOfRange(65)));
        assert!(matches!(
            BitVector::new(3, 0b1000),
            Err(Error::ValueTooWide { .. })
        ));
        assert!(BitVector::new(64, u64::MAX).is_ok());
        assert!(BitVector::from_bit_str("10a1").is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(matrix_rank(&mat(&["1011", "1000", "0101", "1111"])), 4);
        for m in [1, 5, 17, 64] {
            assert_eq!(GenerationMatrix::identity(m).unwrap().rank(), m);
        }
        assert_eq!(matrix_rank(&mat(&["1011", "1011", "0101", "1111"])), 3);
    }

    #[test]
    fn rank_matches_span_oracle_for_all_3x3() {
        for bits in 0u64..(1 << 9) {
            let rows: Vec<u64> = (0..3).map(|i| (bits >> (3 * i)) & 0b111).collect();
            assert_eq!(rank_of_rows(&rows), span_rank(&rows), "{rows:?}");
        }
    }

    #[test]
    fn rank_does_not_reorder_rows() {
        let v = mat(&["0001", "1000", "0100", "0010"]);
        let before = v.row_words().to_vec();
        let _ = matrix_rank(&v);
        assert_eq!(v.row_words(), &before[..]);
    }

    #[test]
    fn star_basis_examples() {
        let v = mat(&["1011", "1000", "0101", "1111"]);
        assert_eq!(
            strings(&v.to_star_basis()),
            ["1011", "0011", "0110", "1001"]
        );

        let id = GenerationMatrix::identity(4).unwrap();
        assert_eq!(
            strings(&id.to_star_basis()),
            ["0001", "0011", "0111", "1111"]
        );

        let w = mat(&["1011", "0011", "1101", "1010"]);
        assert_eq!(
            strings(&w.from_star_basis()),
            ["1011", "1000", "1110", "0111"]
        );

        let zero = GenerationMatrix::from_rows(4, vec![0; 4]).unwrap();
        assert_eq!(zero.from_star_basis(), zero);
        assert_eq!(zero.rank(), 0);
    }

    #[test]
    fn matvec_examples() {
        let v = mat(&["1011", "1000", "0101", "1111"]);
        let b = |s| BitVector::from_bit_str(s).unwrap();
        assert_eq!(
            matvec_combination(&v, &b("0101")).unwrap().to_string(),
            "1110"
        );
        assert_eq!(
            matvec_combination(&v, &b("0000")).unwrap().to_string(),
            "0000"
        );
        assert_eq!(
            matvec_combination(&v, &b("1111")).unwrap().to_string(),
            "1001"
        );
        assert!(matvec_combination(&v, &b("101")).is_err());
    }

    #[test]
    fn full_rank_map_is_bijection() {
        for m in 1..=12 {
            let v = GenerationMatrix::from_rows(m, (0..m).map(|i| (1u64 << (i + 1)) - 1).collect())
                .unwrap()
                .to_star_basis();
            assert!(v.is_full_rank());
            let seen: HashSet<u64> = (0..1u64 << m).map(|b| v.combine(b)).collect();
            assert_eq!(seen.len(), 1 << m);
        }
    }

    #[test]
    fn text_format_round_trip_and_errors() {
        let v = mat(&["1011", "1000", "0101", "1111"]);
        let text = v.to_text();
        assert_eq!(text, "m=4\n1011\n1000\n0101\n1111\n");
        assert_eq!(text.parse::<GenerationMatrix>().unwrap(), v);
        assert_eq!(
            GenerationMatrix::parse_text("# comment\nm=2\n  10 \n\n01\n").unwrap(),
            mat(&["10", "01"])
        );

        assert!(matches!(
            GenerationMatrix::parse_text("m=3\n101\n11\n111\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            GenerationMatrix::parse_text("n=3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            GenerationMatrix::parse_text("m=2\n10\n"),
            Err(Error::RowCount { .. })
        ));
        assert!(matches!(
            GenerationMatrix::parse_text("m=65\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    fn arb_matrix() -> impl Strategy<Value = GenerationMatrix> {
        (1usize..=16).prop_flat_map(|m| {
            proptest::collection::vec(0u64..(1u64 << m), m)
                .prop_map(move |rows| GenerationMatrix::from_rows(m, rows).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn star_transforms_are_inverse(v in arb_matrix()) {
            prop_assert_eq!(v.to_star_basis().from_star_basis(), v.clone());
            prop_assert_eq!(v.from_star_basis().to_star_basis(), v.clone());
        }

        #[test]
        fn star_transform_preserves_rank(v in arb_matrix()) {
            prop_assert_eq!(matrix_rank(&v.to_star_basis()), matrix_rank(&v));
            prop_assert_eq!(matrix_rank(&v.from_star_basis()), matrix_rank(&v));
        }

        #[test]
        fn combination_is_linear(v in arb_matrix(), b1 in any::<u64>(), b2 in any::<u64>()) {
            let mask = crate::width_mask(v.m());
            let (b1, b2) = (b1 & mask, b2 & mask);
            prop_assert_eq!(v.combine(b1 ^ b2), v.combine(b1) ^ v.combine(b2));
        }
    }

    proptest! {
        #[test]
        fn rank_matches_span_oracle(m in 1usize..=10, seed in proptest::collection::vec(any::<u64>(), 10)) {
            let rows: Vec<u64> = seed[..m].iter().map(|r| r & crate::width_mask(m)).collect();
            prop_assert_eq!(rank_of_rows(&rows), span_rank(&rows));
        }
    }
}
