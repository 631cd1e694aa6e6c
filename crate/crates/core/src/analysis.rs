//! Verification and switching-activity profiling of address sequences.
//!
//! Sequences are passed as raw words (`a_1` in bit 0) plus the width `m`.
//! The balance properties checked here:
//!
//! * completeness: exactly `2^m` addresses, all distinct;
//! * bit balance: every bit is 1 in exactly `2^{m−1}` addresses;
//! * tuple balance: for every set of `r` bit positions, each of the `2^r`
//!   patterns occurs exactly `2^{m−r}` times.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::width_mask;

/// Outcome of the completeness check, with the first offending values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completeness {
    pub m: usize,
    pub length: usize,
    pub complete: bool,
    /// `(position, value)` of the first repeated address.
    pub first_duplicate: Option<(usize, u64)>,
    /// Smallest address that never occurs.
    pub first_missing: Option<u64>,
    /// `(position, value)` of the first address wider than `m` bits.
    pub first_out_of_range: Option<(usize, u64)>,
}

impl Completeness {
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.length as u128 != 1u128 << self.m {
            parts.push(format!("length {} != 2^{}", self.length, self.m));
        }
        if let Some((n, v)) = self.first_out_of_range {
            parts.push(format!(
                "address {v} at position {n} exceeds {} bits",
                self.m
            ));
        }
        if let Some((n, v)) = self.first_duplicate {
            parts.push(format!("duplicate address {v} at position {n}"));
        }
        if let Some(v) = self.first_missing {
            parts.push(format!("missing address {v}"));
        }
        if parts.is_empty() {
            "complete".into()
        } else {
            parts.join("; ")
        }
    }
}

/// Largest width for which a presence set is built. The CLI caps lower.
const PRESENCE_MAX_M: usize = 40;

/// Checks that `seq` lists every `m`-bit address exactly once.
pub fn verify_complete(seq: &[u64], m: usize) -> Completeness {
    let mut out = Completeness {
        m,
        length: seq.len(),
        complete: false,
        first_duplicate: None,
        first_missing: None,
        first_out_of_range: None,
    };
    if m == 0 || m > PRESENCE_MAX_M {
        return out;
    }
    let mask = width_mask(m);
    let size = 1usize << m;
    let mut seen = vec![0u64; size.div_ceil(64)];
    for (n, &a) in seq.iter().enumerate() {
        if a & !mask != 0 {
            out.first_out_of_range.get_or_insert((n, a));
            continue;
        }
        let (w, b) = ((a / 64) as usize, a % 64);
        if seen[w] >> b & 1 == 1 {
            out.first_duplicate.get_or_insert((n, a));
        }
        seen[w] |= 1 << b;
    }
    out.first_missing = seen.iter().enumerate().find_map(|(w, &bits)| {
        let valid = if (w + 1) * 64 <= size {
            u64::MAX
        } else {
            width_mask(size - w * 64)
        };
        let holes = !bits & valid;
        (holes != 0).then(|| w as u64 * 64 + u64::from(holes.trailing_zeros()))
    });
    out.complete = seq.len() == size
        && out.first_duplicate.is_none()
        && out.first_missing.is_none()
        && out.first_out_of_range.is_none();
    out
}

fn require_complete(seq: &[u64], m: usize) -> Result<()> {
    let c = verify_complete(seq, m);
    if c.complete {
        Ok(())
    } else {
        Err(Error::IncompleteSequence(c.describe()))
    }
}

/// Number of addresses with each bit set, `a_1` first. No completeness check.
pub fn ones_per_bit(seq: &[u64], m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; m];
    for &a in seq {
        for (k, c) in counts.iter_mut().enumerate() {
            *c += (a >> k) & 1;
        }
    }
    counts
}

/// Per-bit ones counts of a complete sequence (each should be `2^{m−1}`).
pub fn bit_balance(seq: &[u64], m: usize) -> Result<Vec<u64>> {
    require_complete(seq, m)?;
    Ok(ones_per_bit(seq, m))
}

/// Pattern counts over a set of bit positions.
///
/// `counts[p]` is the number of addresses whose bits at `positions` read `p`,
/// with `positions[0]` as the most significant bit of `p`. So for
/// positions `{3, 1}` the pattern `0b10` means `a_3 = 1, a_1 = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleCounts {
    pub positions: Vec<usize>,
    pub counts: Vec<u64>,
}

impl TupleCounts {
    pub fn is_uniform(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] == w[1])
    }

    pub fn pattern_string(&self, pattern: usize) -> String {
        format!("{pattern:0r$b}", r = self.positions.len())
    }
}

fn check_positions(m: usize, positions: &[usize]) -> Result<()> {
    if positions.is_empty() || positions.len() > m {
        return Err(Error::InvalidParameter(format!(
            "need between 1 and {m} bit positions, got {}",
            positions.len()
        )));
    }
    let mut used = 0u64;
    for &p in positions {
        if p == 0 || p > m {
            return Err(Error::InvalidParameter(format!(
                "bit position {p} outside 1..={m}"
            )));
        }
        if used >> (p - 1) & 1 == 1 {
            return Err(Error::InvalidParameter(format!(
                "bit position {p} repeated"
            )));
        }
        used |= 1 << (p - 1);
    }
    Ok(())
}

/// Pattern counts over `positions` (1-based) with no completeness check.
pub fn count_patterns(seq: &[u64], m: usize, positions: &[usize]) -> Result<TupleCounts> {
    check_positions(m, positions)?;
    let r = positions.len();
    let mut counts = vec![0u64; 1 << r];
    for &a in seq {
        let p = positions.iter().fold(0usize, |acc, &pos| {
            (acc << 1) | ((a >> (pos - 1)) & 1) as usize
        });
        counts[p] += 1;
    }
    Ok(TupleCounts {
        positions: positions.to_vec(),
        counts,
    })
}

/// Pattern counts of a complete sequence (each should be `2^{m−r}`).
pub fn tuple_balance(seq: &[u64], m: usize, positions: &[usize]) -> Result<TupleCounts> {
    require_complete(seq, m)?;
    count_patterns(seq, m, positions)
}

/// Consecutive Hamming distances and per-bit toggle counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HammingProfile {
    pub distances: Vec<u32>,
    /// Toggles of each bit over the whole sequence, `a_1` first.
    pub per_bit_transitions: Vec<u64>,
}

impl HammingProfile {
    pub fn min(&self) -> u32 {
        self.distances.iter().copied().min().unwrap_or(0)
    }

    pub fn max(&self) -> u32 {
        self.distances.iter().copied().max().unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        if self.distances.is_empty() {
            0.0
        } else {
            self.distances.iter().map(|&d| f64::from(d)).sum::<f64>() / self.distances.len() as f64
        }
    }

    /// `(distance, occurrences)` for each distance that occurs, ascending.
    pub fn histogram(&self) -> Vec<(u32, u64)> {
        let mut h = vec![0u64; 65];
        for &d in &self.distances {
            h[d as usize] += 1;
        }
        h.into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(d, c)| (d as u32, c))
            .collect()
    }
}

/// Entry `n` is `popcount(seq[n] ⊕ seq[n+1])`. Shorter than two addresses
/// gives an empty profile.
pub fn hamming_profile(seq: &[u64], m: usize) -> HammingProfile {
    let mut per_bit = vec![0u64; m];
    let distances = seq
        .windows(2)
        .map(|w| {
            let diff = w[0] ^ w[1];
            let mut bits = diff;
            while bits != 0 {
                let k = bits.trailing_zeros() as usize;
                if k < m {
                    per_bit[k] += 1;
                }
                bits &= bits - 1;
            }
            diff.count_ones()
        })
        .collect();
    HammingProfile {
        distances,
        per_bit_transitions: per_bit,
    }
}

/// One pattern whose count differs from `2^{m−r}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceFailure {
    pub positions: Vec<usize>,
    pub pattern: String,
    pub count: u64,
    pub expected: u64,
}

impl fmt::Display for BalanceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pos: Vec<String> = self.positions.iter().map(|p| p.to_string()).collect();
        write!(
            f,
            "{{{}}}:{}={}/{}",
            pos.join(","),
            self.pattern,
            self.count,
            self.expected
        )
    }
}

/// Largest width the Walsh-transform balance check will allocate for.
pub const WALSH_MAX_M: usize = 24;

fn walsh_spectrum(seq: &[u64], m: usize) -> Vec<i32> {
    let size = 1usize << m;
    let mut h = vec![0i32; size];
    let mask = width_mask(m);
    for &a in seq {
        h[(a & mask) as usize] += 1;
    }
    let mut len = 1;
    while len < size {
        for block in h.chunks_mut(2 * len) {
            let (lo, hi) = block.split_at_mut(len);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        }
        len <<= 1;
    }
    h
}

/// Visits every subset of `{0..m}` with `1..=max_r` elements as a bit mask.
fn for_each_subset(m: usize, max_r: usize, mut f: impl FnMut(u64) -> bool) {
    fn rec(start: usize, m: usize, left: usize, mask: u64, f: &mut dyn FnMut(u64) -> bool) -> bool {
        if mask != 0 && !f(mask) {
            return false;
        }
        if left == 0 {
            return true;
        }
        for k in start..m {
            if !rec(k + 1, m, left - 1, mask | (1 << k), f) {
                return false;
            }
        }
        true
    }
    rec(0, m, max_r, 0, &mut f);
}

fn positions_of(mask: u64, m: usize) -> Vec<usize> {
    (0..m)
        .rev()
        .filter(|k| mask >> k & 1 == 1)
        .map(|k| k + 1)
        .collect()
}

/// Every unbalanced `(positions, pattern)` over subsets of at most `max_r`
/// bits, up to `limit` entries. The expected count per pattern is
/// `len / 2^r`, so this is meaningful for any sequence whose length is a
/// multiple of `2^max_r`.
///
/// A subset `S` is balanced iff the Walsh coefficient of the address
/// histogram vanishes for every nonempty `T ⊆ S`; only subsets that fail
/// that test are counted directly.
pub fn find_balance_failures(
    seq: &[u64],
    m: usize,
    max_r: usize,
    limit: usize,
) -> Result<Vec<BalanceFailure>> {
    if m == 0 || m > WALSH_MAX_M {
        return Err(Error::InvalidParameter(format!(
            "Walsh balance check supports 1..={WALSH_MAX_M} bits, got {m}"
        )));
    }
    let max_r = max_r.min(m);
    let spectrum = walsh_spectrum(seq, m);
    let mut biased = Vec::new();
    for_each_subset(m, max_r, |t| {
        if spectrum[t as usize] != 0 {
            biased.push(t);
        }
        true
    });
    let mut failures = Vec::new();
    if biased.is_empty() {
        return Ok(failures);
    }
    let mut err = None;
    for_each_subset(m, max_r, |s| {
        if biased.iter().all(|&t| t & !s != 0) {
            return true;
        }
        let positions = positions_of(s, m);
        let tuple = match count_patterns(seq, m, &positions) {
            Ok(t) => t,
            Err(e) => {
                err = Some(e);
                return false;
            }
        };
        let expected = seq.len() as u64 >> positions.len();
        for (p, &c) in tuple.counts.iter().enumerate() {
            if c != expected {
                failures.push(BalanceFailure {
                    positions: positions.clone(),
                    pattern: tuple.pattern_string(p),
                    count: c,
                    expected,
                });
                if failures.len() >= limit {
                    return false;
                }
            }
        }
        true
    });
    match err {
        Some(e) => Err(e),
        None => Ok(failures),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TupleMethod {
    /// Every subset checked through the Walsh spectrum.
    Walsh,
    /// Too wide to transform; balance follows from completeness.
    Implied,
    None,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    /// Largest tuple size `r` checked.
    pub max_tuple: usize,
    /// Longest Hamming profile written out in full by the report.
    pub profile_limit: usize,
    /// Cap on recorded balance failures.
    pub failure_limit: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            max_tuple: 4,
            profile_limit: 1 << 16,
            failure_limit: 64,
        }
    }
}

/// Aggregate result of [`analyze`].
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityReport {
    pub m: usize,
    pub length: usize,
    pub complete: bool,
    pub completeness: Completeness,
    pub ones_per_bit: Vec<u64>,
    pub bit_balance: CheckStatus,
    pub tuple_balance: CheckStatus,
    pub tuple_max_r: usize,
    pub tuple_method: TupleMethod,
    pub balance_failures: Vec<BalanceFailure>,
    pub profile: HammingProfile,
    pub profile_limit: usize,
}

impl ActivityReport {
    /// True when every checked property holds.
    pub fn passed(&self) -> bool {
        self.complete
            && self.bit_balance == CheckStatus::Pass
            && self.tuple_balance == CheckStatus::Pass
    }

    /// Flat `key=value` lines with stable keys. Per-bit lists run `a_1` first.
    pub fn to_kv(&self) -> String {
        fn list<T: ToString>(v: &[T]) -> String {
            if v.is_empty() {
                "none".into()
            } else {
                v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
            }
        }
        let c = &self.completeness;
        let p = &self.profile;
        let mut s = String::new();
        let _ = writeln!(s, "m={}", self.m);
        let _ = writeln!(s, "length={}", self.length);
        let _ = writeln!(s, "expected_length={}", 1u128 << self.m);
        let _ = writeln!(s, "complete={}", self.complete);
        let _ = writeln!(
            s,
            "first_duplicate={}",
            c.first_duplicate
                .map_or("none".into(), |(n, v)| format!("{v}@{n}"))
        );
        let _ = writeln!(
            s,
            "first_missing={}",
            c.first_missing.map_or("none".into(), |v| v.to_string())
        );
        let _ = writeln!(
            s,
            "first_out_of_range={}",
            c.first_out_of_range
                .map_or("none".into(), |(n, v)| format!("{v}@{n}"))
        );
        let _ = writeln!(s, "ones_per_bit={}", list(&self.ones_per_bit));
        let _ = writeln!(s, "bit_balance={}", self.bit_balance.as_str());
        let _ = writeln!(s, "tuple_balance={}", self.tuple_balance.as_str());
        let _ = writeln!(s, "tuple_max_r={}", self.tuple_max_r);
        let method = match self.tuple_method {
            TupleMethod::Walsh => "walsh",
            TupleMethod::Implied => "implied",
            TupleMethod::None => "none",
        };
        let _ = writeln!(s, "tuple_method={method}");
        let _ = writeln!(
            s,
            "balance_failures={}",
            if self.balance_failures.is_empty() {
                "none".to_string()
            } else {
                self.balance_failures
                    .iter()
                    .map(|f| f.to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            }
        );
        let _ = writeln!(s, "per_bit_transitions={}", list(&p.per_bit_transitions));
        let _ = writeln!(
            s,
            "total_transitions={}",
            p.per_bit_transitions.iter().sum::<u64>()
        );
        let _ = writeln!(s, "hamming_min={}", p.min());
        let _ = writeln!(s, "hamming_max={}", p.max());
        let _ = writeln!(s, "hamming_mean={:.6}", p.mean());
        let hist: Vec<String> = p
            .histogram()
            .iter()
            .map(|(d, c)| format!("{d}:{c}"))
            .collect();
        let _ = writeln!(s, "hamming_histogram={}", list(&hist));
        let profile = if p.distances.len() <= self.profile_limit {
            list(&p.distances)
        } else {
            "omitted".into()
        };
        let _ = writeln!(s, "hamming_profile={profile}");
        let _ = writeln!(s, "verdict={}", if self.passed() { "pass" } else { "fail" });
        s
    }
}

impl fmt::Display for ActivityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv())
    }
}

/// Runs every check on `seq`. Balance checks only run on complete
/// sequences; partial input gives `complete = false` and skipped balances.
pub fn analyze(seq: &[u64], m: usize, opts: &AnalyzeOptions) -> ActivityReport {
    let completeness = verify_complete(seq, m);
    let complete = completeness.complete;
    let ones = ones_per_bit(seq, m);
    let tuple_max_r = opts.max_tuple.min(m);

    let mut report = ActivityReport {
        m,
        length: seq.len(),
        complete,
        completeness,
        ones_per_bit: ones,
        bit_balance: CheckStatus::Skipped,
        tuple_balance: CheckStatus::Skipped,
        tuple_max_r,
        tuple_method: TupleMethod::None,
        balance_failures: Vec::new(),
        profile: hamming_profile(seq, m),
        profile_limit: opts.profile_limit,
    };
    if !complete {
        return report;
    }

    let half = (seq.len() / 2) as u64;
    report.bit_balance = if report.ones_per_bit.iter().all(|&c| c == half) {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };

    if tuple_max_r == 0 {
        report.tuple_balance = CheckStatus::Skipped;
    } else if m <= WALSH_MAX_M {
        report.tuple_method = TupleMethod::Walsh;
        let failures = find_balance_failures(seq, m, tuple_max_r, opts.failure_limit)
            .expect("width checked above");
        report.tuple_balance = if failures.is_empty() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        report.balance_failures = failures;
    } else {
        report.tuple_method = TupleMethod::Implied;
        report.tuple_balance = CheckStatus::Pass;
    }
    report
}
