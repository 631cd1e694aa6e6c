//! Text encodings of address sequences.
//!
//! | format | one line per address                                   |
//! |--------|--------------------------------------------------------|
//! | `bin`  | `m` characters, MSB first                              |
//! | `dec`  | unsigned decimal                                       |
//! | `hex`  | `0x` + lowercase digits, zero padded to `⌈m/4⌉`        |
//! | `csv`  | header `n,address_dec,address_bin,hamming_to_prev`     |
//!
//! In `csv`, `hamming_to_prev` is empty on the first row.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::{width_mask, MAX_WIDTH};

pub const CSV_HEADER: &str = "n,address_dec,address_bin,hamming_to_prev";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeqFormat {
    #[default]
    Bin,
    Dec,
    Hex,
    Csv,
}

impl FromStr for SeqFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bin" => Ok(SeqFormat::Bin),
            "dec" => Ok(SeqFormat::Dec),
            "hex" => Ok(SeqFormat::Hex),
            "csv" => Ok(SeqFormat::Csv),
            _ => Err(Error::InvalidParameter(format!(
                "unknown sequence format '{s}'"
            ))),
        }
    }
}

impl fmt::Display for SeqFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeqFormat::Bin => "bin",
            SeqFormat::Dec => "dec",
            SeqFormat::Hex => "hex",
            SeqFormat::Csv => "csv",
        })
    }
}

/// Streams addresses to `out` without buffering the sequence. Returns the
/// number of lines written (header excluded).
pub fn write_sequence<W, I>(out: &mut W, m: usize, format: SeqFormat, seq: I) -> io::Result<u64>
where
    W: Write,
    I: IntoIterator<Item = u64>,
{
    let hex_digits = m.div_ceil(4);
    let mut prev: Option<u64> = None;
    let mut n = 0u64;
    if format == SeqFormat::Csv {
        writeln!(out, "{CSV_HEADER}")?;
    }
    for a in seq {
        match format {
            SeqFormat::Bin => writeln!(out, "{a:0m$b}")?,
            SeqFormat::Dec => writeln!(out, "{a}")?,
            SeqFormat::Hex => writeln!(out, "0x{a:0hex_digits$x}")?,
            SeqFormat::Csv => match prev {
                None => writeln!(out, "{n},{a},{a:0m$b},")?,
                Some(p) => writeln!(out, "{n},{a},{a:0m$b},{}", (p ^ a).count_ones())?,
            },
        }
        prev = Some(a);
        n += 1;
    }
    Ok(n)
}

/// A parsed sequence plus the width it was read at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSequence {
    pub m: usize,
    pub format: SeqFormat,
    pub words: Vec<u64>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_bin(line: usize, t: &str) -> Result<u64> {
    if t.is_empty() || t.len() > MAX_WIDTH || !t.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(parse_err(line, format!("'{t}' is not a binary address")));
    }
    u64::from_str_radix(t, 2).map_err(|e| parse_err(line, e.to_string()))
}

fn parse_dec(line: usize, t: &str) -> Result<u64> {
    t.parse::<u64>()
        .map_err(|_| parse_err(line, format!("'{t}' is not a decimal address")))
}

fn parse_hex(line: usize, t: &str) -> Result<u64> {
    let digits = t
        .strip_prefix("0x")
        .or_else(|| t.strip_prefix("0X"))
        .unwrap_or(t);
    u64::from_str_radix(digits, 16)
        .map_err(|_| parse_err(line, format!("'{t}' is not a hexadecimal address")))
}

/// Guesses the format from the content lines. CSV is recognised by its
/// header, hex by a `0x` prefix, bin by every line being an equal-length
/// 0/1 string (of length `m` when `m` is known); anything else is dec.
pub fn detect_format(lines: &[(usize, &str)], m: Option<usize>) -> SeqFormat {
    let Some(&(_, first)) = lines.first() else {
        return SeqFormat::Bin;
    };
    if first.starts_with("n,") {
        return SeqFormat::Csv;
    }
    if lines
        .iter()
        .any(|(_, l)| l.starts_with("0x") || l.starts_with("0X"))
    {
        return SeqFormat::Hex;
    }
    let len = first.len();
    let all_bin = lines
        .iter()
        .all(|(_, l)| l.len() == len && l.bytes().all(|b| b == b'0' || b == b'1'));
    if all_bin && m.is_none_or(|m| m == len) {
        SeqFormat::Bin
    } else {
        SeqFormat::Dec
    }
}

/// Parses a sequence. Blank lines are ignored; errors carry 1-based line
/// numbers. Without an explicit width, `bin` and `csv` take it from the
/// binary strings and `dec`/`hex` use the smallest width that holds both
/// the largest value and the sequence length.
pub fn parse_sequence<R: BufRead>(
    input: R,
    format: Option<SeqFormat>,
    m: Option<usize>,
) -> Result<ParsedSequence> {
    let raw: Vec<String> = input
        .lines()
        .collect::<io::Result<_>>()
        .map_err(|e| parse_err(0, e.to_string()))?;
    let lines: Vec<(usize, &str)> = raw
        .iter()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let format = format.unwrap_or_else(|| detect_format(&lines, m));

    let mut bin_width: Option<usize> = None;
    let mut check_bin_width = |line: usize, t: &str| -> Result<()> {
        match bin_width {
            None => {
                bin_width = Some(t.len());
                Ok(())
            }
            Some(w) if w == t.len() => Ok(()),
            Some(w) => Err(parse_err(
                line,
                format!("binary address '{t}' is not {w} characters wide"),
            )),
        }
    };

    let mut words = Vec::with_capacity(lines.len());
    let body: &[(usize, &str)] = if format == SeqFormat::Csv {
        match lines.first() {
            Some(&(_, h)) if h == CSV_HEADER => &lines[1..],
            Some(&(n, h)) => {
                return Err(parse_err(
                    n,
                    format!("expected CSV header '{CSV_HEADER}', got '{h}'"),
                ))
            }
            None => &lines[..],
        }
    } else {
        &lines[..]
    };

    for &(line, t) in body {
        let w = match format {
            SeqFormat::Bin => {
                check_bin_width(line, t)?;
                parse_bin(line, t)?
            }
            SeqFormat::Dec => parse_dec(line, t)?,
            SeqFormat::Hex => parse_hex(line, t)?,
            SeqFormat::Csv => {
                let cols: Vec<&str> = t.split(',').collect();
                if cols.len() != 4 {
                    return Err(parse_err(
                        line,
                        format!("expected 4 CSV columns, got {}", cols.len()),
                    ));
                }
                let dec = parse_dec(line, cols[1])?;
                let bin = cols[2].trim();
                check_bin_width(line, bin)?;
                if parse_bin(line, bin)? != dec {
                    return Err(parse_err(line, "address_dec and address_bin disagree"));
                }
                dec
            }
        };
        words.push(w);
    }

    let m = match m {
        Some(m) => m,
        None => match bin_width {
            Some(w) => w,
            None => {
                let max = words.iter().copied().max().unwrap_or(0);
                let value_bits = (64 - max.leading_zeros()) as usize;
                let length_bits = words.len().next_power_of_two().trailing_zeros() as usize;
                value_bits.max(length_bits).max(1)
            }
        },
    };
    if m == 0 || m > MAX_WIDTH {
        return Err(Error::WidthOutOfRange(m));
    }
    if let Some(w) = bin_width {
        if w != m {
            return Err(Error::WidthMismatch {
                expected: m,
                found: w,
            });
        }
    }
    let mask = width_mask(m);
    if let Some(i) = words.iter().position(|w| w & !mask != 0) {
        return Err(parse_err(
            body[i].0,
            format!("address {} does not fit in {m} bits", words[i]),
        ));
    }
    Ok(ParsedSequence { m, format, words })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn render(m: usize, f: SeqFormat, seq: &[u64]) -> String {
        let mut out = Vec::new();
        write_sequence(&mut out, m, f, seq.iter().copied()).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn writers() {
        let seq = [0u64, 11, 3];
        assert_eq!(render(4, SeqFormat::Bin, &seq), "0000\n1011\n0011\n");
        assert_eq!(render(4, SeqFormat::Dec, &seq), "0\n11\n3\n");
        assert_eq!(render(5, SeqFormat::Hex, &seq), "0x00\n0x0b\n0x03\n");
        assert_eq!(
            render(4, SeqFormat::Csv, &seq),
            "n,address_dec,address_bin,hamming_to_prev\n0,0,0000,\n1,11,1011,3\n2,3,0011,1\n"
        );
    }

    #[test]
    fn detection() {
        let parse = |s: &str| parse_sequence(s.as_bytes(), None, None).unwrap();
        assert_eq!(parse("00\n01\n11\n10\n").format, SeqFormat::Bin);
        assert_eq!(parse("0\n1\n2\n3\n").format, SeqFormat::Dec);
        assert_eq!(parse("0x0\n0xf\n").format, SeqFormat::Hex);
        assert_eq!(
            parse(&render(3, SeqFormat::Csv, &[0, 1])).format,
            SeqFormat::Csv
        );
        // binary-looking lines of the wrong width fall back to decimal
        let p = parse_sequence("10\n11\n".as_bytes(), None, Some(4)).unwrap();
        assert_eq!((p.format, p.words), (SeqFormat::Dec, vec![10, 11]));
    }

    #[test]
    fn width_inference() {
        let p = parse_sequence("0\n1\n2\n3\n".as_bytes(), Some(SeqFormat::Dec), None).unwrap();
        assert_eq!(p.m, 2);
        let p = parse_sequence("0\n1\n".as_bytes(), Some(SeqFormat::Dec), None).unwrap();
        assert_eq!(p.m, 1);
        let p = parse_sequence("0\n5\n".as_bytes(), Some(SeqFormat::Dec), None).unwrap();
        assert_eq!(p.m, 3);
        let p = parse_sequence("0001\n".as_bytes(), None, None).unwrap();
        assert_eq!(p.m, 4);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_sequence(
            "0000\n\n0010\n01x0\n".as_bytes(),
            Some(SeqFormat::Bin),
            None,
        )
        .unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 4,
                msg: "'01x0' is not a binary address".into()
            }
        );

        let e = parse_sequence("000\n0010\n".as_bytes(), Some(SeqFormat::Bin), None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));

        let e = parse_sequence("1\n2\n17\n".as_bytes(), Some(SeqFormat::Dec), Some(4)).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));

        let e = parse_sequence(
            "n,address_dec,address_bin,hamming_to_prev\n0,1,0000,\n".as_bytes(),
            None,
            None,
        )
        .unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));

        let e = parse_sequence("n,foo\n".as_bytes(), Some(SeqFormat::Csv), None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));

        assert!(parse_sequence("0101\n".as_bytes(), Some(SeqFormat::Bin), Some(3)).is_err());
    }

    #[test]
    fn format_names() {
        for f in [
            SeqFormat::Bin,
            SeqFormat::Dec,
            SeqFormat::Hex,
            SeqFormat::Csv,
        ] {
            assert_eq!(f.to_string().parse::<SeqFormat>().unwrap(), f);
        }
        assert!("oct".parse::<SeqFormat>().is_err());
    }

    proptest! {
        #[test]
        fn every_format_round_trips(
            m in 1usize..=64,
            raw in proptest::collection::vec(any::<u64>(), 1..50),
            which in 0usize..4,
        ) {
            let f = [SeqFormat::Bin, SeqFormat::Dec, SeqFormat::Hex, SeqFormat::Csv][which];
            let seq: Vec<u64> = raw.iter().map(|w| w & width_mask(m)).collect();
            let text = render(m, f, &seq);
            let explicit = parse_sequence(text.as_bytes(), Some(f), Some(m)).unwrap();
            prop_assert_eq!(&explicit.words, &seq);
            // auto-detection with known width always recovers the values
            let auto = parse_sequence(text.as_bytes(), None, Some(m)).unwrap();
            prop_assert_eq!(&auto.words, &seq);
        }
    }
}
