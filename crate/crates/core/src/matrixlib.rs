//! Standard generation matrices, random full-rank sampling, rank
//! statistics, and address bit permutation.
//!
//! Row strings in the docs below are printed MSB-first (`a_m … a_1`).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::gf2::{rank_of_rows, BitVector, GenerationMatrix};
use crate::{width_mask, MAX_WIDTH};

fn check_m(m: usize) -> Result<()> {
    if m == 0 || m > MAX_WIDTH {
        Err(Error::WidthOutOfRange(m))
    } else {
        Ok(())
    }
}

fn built(m: usize, rows: Vec<u64>) -> GenerationMatrix {
    let v = GenerationMatrix::from_rows(m, rows).expect("constructor rows fit width");
    debug_assert!(v.is_full_rank());
    v
}

#[inline]
fn rotate_left(word: u64, j: usize, m: usize) -> u64 {
    if j == 0 || m == 64 {
        return word.rotate_left(j as u32);
    }
    ((word << j) | (word >> (m - j))) & width_mask(m)
}

/// A permutation of bit positions `1..=m`.
///
/// `perm[k]` (for output position `k + 1`) is the input position whose bit
/// lands there.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitPermutation {
    source: Vec<usize>,
}

impl BitPermutation {
    pub fn new(source: Vec<usize>) -> Result<Self> {
        let m = source.len();
        if m == 0 || m > MAX_WIDTH {
            return Err(Error::InvalidPermutation(format!(
                "length {m} out of range"
            )));
        }
        let mut seen = vec![false; m];
        for &p in &source {
            if p == 0 || p > m {
                return Err(Error::InvalidPermutation(format!(
                    "position {p} outside 1..={m}"
                )));
            }
            if std::mem::replace(&mut seen[p - 1], true) {
                return Err(Error::InvalidPermutation(format!("position {p} repeated")));
            }
        }
        Ok(Self { source })
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new((1..=m).collect())
    }

    /// Builds from the printed column header, e.g. `[1, 2, 3]` for `a_1a_2a_3`:
    /// the leftmost printed output column takes `a_1`.
    pub fn from_printed_order(printed: &[usize]) -> Result<Self> {
        Self::new(printed.iter().rev().copied().collect())
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    /// Source position for output position `index` (both 1-based).
    pub fn source_of(&self, index: usize) -> usize {
        self.source[index - 1]
    }

    pub fn apply(&self, word: u64) -> u64 {
        self.source
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &src)| acc | (((word >> (src - 1)) & 1) << k))
    }
}

impl FromStr for BitPermutation {
    type Err = Error;

    /// Comma-separated source positions, output position 1 first.
    fn from_str(s: &str) -> Result<Self> {
        let source = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPermutation(format!("'{t}' is not a position")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(source)
    }
}

impl fmt::Display for BitPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.source.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Linear (counting) sequence: row `v_i` has its `i` rightmost bits set.
///
/// `m = 4`: `0001, 0011, 0111, 1111`.
pub fn linear_matrix(m: usize) -> Result<GenerationMatrix> {
    check_m(m)?;
    Ok(built(m, (1..=m).map(width_mask).collect()))
}

/// `2^j` sequence: the linear matrix with its columns rotated left by `j`,
/// which puts the all-ones column at printed position `m − j`.
///
/// `m = 4, j = 2`: `0100, 1100, 1101, 1111`.
pub fn power2_matrix(m: usize, j: usize) -> Result<GenerationMatrix> {
    check_m(m)?;
    if j >= m {
        return Err(Error::InvalidParameter(format!(
            "power-of-two exponent {j} out of range 0..{m}"
        )));
    }
    let rows = (1..=m).map(|i| rotate_left(width_mask(i), j, m)).collect();
    Ok(built(m, rows))
}

/// Complement sequence: row `v_i` has its `m − i + 1` leftmost bits set.
///
/// `m = 4`: `1111, 1110, 1100, 1000`.
pub fn complement_matrix(m: usize) -> Result<GenerationMatrix> {
    check_m(m)?;
    let mask = width_mask(m);
    Ok(built(m, (0..m).map(|i| mask & !width_mask(i)).collect()))
}

/// Limited (highest) switching activity: row 1 all ones, row `i ≥ 2` all
/// ones except bit `a_{i−1}`. The column of `a_m` stays all ones.
///
/// `m = 4`: `1111, 1110, 1101, 1011`.
pub fn limited_matrix(m: usize) -> Result<GenerationMatrix> {
    check_m(m)?;
    if m < 2 {
        return Err(Error::InvalidParameter(
            "limited matrix needs m >= 2".into(),
        ));
    }
    limited_matrix_with_zeros(m, &(1..m).collect::<Vec<_>>())
}

/// Limited matrix with explicit zero placement: `zeros[k]` is the bit
/// position (1-based, `a_1` = 1) of the single 0 in row `k + 2`. Positions
/// must be distinct, which leaves exactly one all-ones column.
pub fn limited_matrix_with_zeros(m: usize, zeros: &[usize]) -> Result<GenerationMatrix> {
    check_m(m)?;
    if m < 2 {
        return Err(Error::InvalidParameter(
            "limited matrix needs m >= 2".into(),
        ));
    }
    if zeros.len() != m - 1 {
        return Err(Error::InvalidParameter(format!(
            "expected {} zero positions, got {}",
            m - 1,
            zeros.len()
        )));
    }
    let mask = width_mask(m);
    let mut used = 0u64;
    let mut rows = vec![mask];
    for &z in zeros {
        if z == 0 || z > m {
            return Err(Error::InvalidParameter(format!(
                "zero position {z} outside 1..={m}"
            )));
        }
        let bit = 1u64 << (z - 1);
        if used & bit != 0 {
            return Err(Error::InvalidParameter(format!(
                "zero position {z} used twice"
            )));
        }
        used |= bit;
        rows.push(mask & !bit);
    }
    Ok(built(m, rows))
}

/// Gray-code (minimum switching activity) matrix: row `v_i` is the unit
/// vector at bit position `perm(i)`. The identity gives the reflected gray
/// code.
pub fn graycode_matrix(m: usize, perm: &BitPermutation) -> Result<GenerationMatrix> {
    check_m(m)?;
    if perm.len() != m {
        return Err(Error::InvalidPermutation(format!(
            "permutation of length {} for width {m}",
            perm.len()
        )));
    }
    Ok(built(
        m,
        (1..=m).map(|i| 1u64 << (perm.source_of(i) - 1)).collect(),
    ))
}

/// Quasi-random (van der Corput) matrix: lower triangular with every entry
/// on and below the diagonal set.
///
/// `m = 4`: `1000, 1100, 1110, 1111`.
pub fn quasirandom_matrix(m: usize) -> Result<GenerationMatrix> {
    check_m(m)?;
    let mask = width_mask(m);
    Ok(built(
        m,
        (1..=m).map(|i| mask & !width_mask(m - i)).collect(),
    ))
}

/// Quasi-random matrix with caller-chosen direction numbers. Row `i` must
/// have printed column `i` set (unit diagonal) and nothing to its right.
pub fn quasirandom_matrix_with(rows: &[BitVector]) -> Result<GenerationMatrix> {
    let m = rows.len();
    check_m(m)?;
    for (k, row) in rows.iter().enumerate() {
        let i = k + 1;
        if row.width() != m {
            return Err(Error::WidthMismatch {
                expected: m,
                found: row.width(),
            });
        }
        let diagonal = 1u64 << (m - i);
        if row.word() & diagonal == 0 {
            return Err(Error::InvalidParameter(format!(
                "row {i} ({row}) has a 0 on the diagonal"
            )));
        }
        if row.word() & (diagonal - 1) != 0 {
            return Err(Error::InvalidParameter(format!(
                "row {i} ({row}) has bits above the diagonal"
            )));
        }
    }
    Ok(built(m, rows.iter().map(BitVector::word).collect()))
}

/// SplitMix64. The seed to matrix mapping is stable across releases.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// `m` rows of uniform bits (the low `m` bits of successive outputs).
    pub fn matrix_rows(&mut self, m: usize) -> Vec<u64> {
        let mask = width_mask(m);
        (0..m).map(|_| self.next_u64() & mask).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RandomMatrix {
    pub matrix: GenerationMatrix,
    /// Draws made, including the accepted one.
    pub tries: u64,
}

/// Rejection-samples uniform random matrices until one has full rank.
pub fn random_fullrank_matrix(m: usize, seed: u64) -> Result<RandomMatrix> {
    check_m(m)?;
    let mut rng = SplitMix64::new(seed);
    let mut tries = 0;
    loop {
        tries += 1;
        let rows = rng.matrix_rows(m);
        if rank_of_rows(&rows) == m {
            return Ok(RandomMatrix {
                matrix: built(m, rows),
                tries,
            });
        }
    }
}

/// Probability that a uniform random `m × m` GF(2) matrix is invertible:
/// `∏_{i=1..m} (1 − 2^{−i})`. Tends to 0.2887880950866… as `m` grows.
pub fn fullrank_probability(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 - 0.5f64.powi(i as i32)).product()
}

/// Monte Carlo rank statistics over uniform random matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct RankSample {
    pub m: usize,
    pub samples: u64,
    pub full_rank: u64,
    pub deficit_sum: u64,
}

impl RankSample {
    pub fn full_rank_rate(&self) -> f64 {
        self.full_rank as f64 / self.samples as f64
    }

    pub fn mean_deficit(&self) -> f64 {
        self.deficit_sum as f64 / self.samples as f64
    }
}

pub fn sample_ranks(m: usize, samples: u64, seed: u64) -> Result<RankSample> {
    check_m(m)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut out = RankSample {
        m,
        samples,
        full_rank: 0,
        deficit_sum: 0,
    };
    for _ in 0..samples {
        let deficit = m - rank_of_rows(&rng.matrix_rows(m));
        out.deficit_sum += deficit as u64;
        if deficit == 0 {
            out.full_rank += 1;
        }
    }
    Ok(out)
}

/// Monte Carlo estimate of `E[m − rank]`; about 0.850179830874 for large `m`.
pub fn expected_rank_deficit(m: usize, samples: u64, seed: u64) -> Result<f64> {
    Ok(sample_ranks(m, samples, seed)?.mean_deficit())
}

/// Exact rank distribution over all `2^{m²}` matrices: `counts[r]` matrices
/// have rank `r`. Limited to `m ≤ 5`.
pub fn rank_census(m: usize) -> Result<Vec<u64>> {
    check_m(m)?;
    if m > 5 {
        return Err(Error::InvalidParameter(format!(
            "exhaustive census needs m <= 5, got {m}"
        )));
    }
    let mut counts = vec![0u64; m + 1];
    let mask = width_mask(m);
    let mut rows = vec![0u64; m];
    for bits in 0u64..(1u64 << (m * m)) {
        for (i, r) in rows.iter_mut().enumerate() {
            *r = (bits >> (i * m)) & mask;
        }
        counts[rank_of_rows(&rows)] += 1;
    }
    Ok(counts)
}

/// Rearranges each address's bits by `perm`. Lazily adapts any address
/// iterator; bijectivity of the sequence is preserved.
pub fn permute_address_bits<I>(seq: I, perm: &BitPermutation) -> impl Iterator<Item = BitVector>
where
    I: IntoIterator<Item = BitVector>,
{
    let perm = perm.clone();
    seq.into_iter().map(move |a| {
        assert_eq!(
            a.width(),
            perm.len(),
            "address width differs from permutation length"
        );
        BitVector::from_masked(a.width(), perm.apply(a.word()))
    })
}

/// `m!` exactly, and the Stirling estimate `m^m e^{−m} √(2πm)`.
pub fn permutation_count(m: usize) -> (BigUint, f64) {
    let exact = (1..=m as u64).fold(BigUint::from(1u32), |acc, k| acc * k);
    let r = m as f64;
    let stirling = (r * r.ln() - r).exp() * (2.0 * std::f64::consts::PI * r).sqrt();
    (exact, stirling)
}

/// A generation-matrix family, addressable by name on the command line:
/// `linear`, `pow2:j`, `complement`, `limited`, `gray[:perm]`, `quasi`,
/// `random:seed` (also `random:seed=N`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyKind {
    Linear,
    Power2(usize),
    Complement,
    Limited,
    GrayCode(Option<BitPermutation>),
    Quasirandom,
    Pseudorandom(u64),
}

impl FamilyKind {
    pub fn build(&self, m: usize) -> Result<GenerationMatrix> {
        match self {
            FamilyKind::Linear => linear_matrix(m),
            FamilyKind::Power2(j) => power2_matrix(m, *j),
            FamilyKind::Complement => complement_matrix(m),
            FamilyKind::Limited => limited_matrix(m),
            FamilyKind::GrayCode(None) => graycode_matrix(m, &BitPermutation::identity(m)?),
            FamilyKind::GrayCode(Some(p)) => graycode_matrix(m, p),
            FamilyKind::Quasirandom => quasirandom_matrix(m),
            FamilyKind::Pseudorandom(seed) => Ok(random_fullrank_matrix(m, *seed)?.matrix),
        }
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let unknown = || Error::InvalidParameter(format!("unknown family '{s}'"));
        let number = |a: &str| -> Result<u64> {
            a.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad family parameter '{a}'")))
        };
        match (name.trim(), arg) {
            ("linear", None) => Ok(FamilyKind::Linear),
            ("pow2", Some(j)) => Ok(FamilyKind::Power2(number(j)? as usize)),
            ("complement", None) => Ok(FamilyKind::Complement),
            ("limited", None) => Ok(FamilyKind::Limited),
            ("gray", None) => Ok(FamilyKind::GrayCode(None)),
            ("gray", Some(p)) => Ok(FamilyKind::GrayCode(Some(p.parse()?))),
            ("quasi", None) => Ok(FamilyKind::Quasirandom),
            ("random", Some(seed)) => {
                let seed = seed.trim();
                let seed = seed.strip_prefix("seed=").unwrap_or(seed);
                Ok(FamilyKind::Pseudorandom(number(seed)?))
            }
            _ => Err(unknown()),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::Linear => f.write_str("linear"),
            FamilyKind::Power2(j) => write!(f, "pow2:{j}"),
            FamilyKind::Complement => f.write_str("complement"),
            FamilyKind::Limited => f.write_str("limited"),
            FamilyKind::GrayCode(None) => f.write_str("gray"),
            FamilyKind::GrayCode(Some(p)) => write!(f, "gray:{p}"),
            FamilyKind::Quasirandom => f.write_str("quasi"),
            FamilyKind::Pseudorandom(seed) => write!(f, "random:{seed}"),
        }
    }
}
