use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn addrseq(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_addrseq"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn addrseq");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(bytes) = stdin {
            pipe.write_all(bytes).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str], stdin: Option<&[u8]>) -> String {
    let out = addrseq(args, stdin);
    assert!(
        out.status.success(),
        "addrseq {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn lines(s: &str) -> Vec<&str> {
    s.lines().collect()
}

fn kv<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
        .unwrap_or_else(|| panic!("no {key} in report:\n{report}"))
}

#[test]
fn gen_from_matrix_file() {
    let path = temp_file("example_v.txt", "m=4\n1011\n1000\n0101\n1111\n");
    let p = path.to_str().unwrap();
    let up = ok(&["gen", "--matrix", p], None);
    assert_eq!(
        lines(&up),
        "0000 1011 0011 1000 1101 0110 1110 0101 1010 0001 1001 0010 0111 1100 0100 1111"
            .split(' ')
            .collect::<Vec<_>>()
    );
    let direct = ok(&["gen", "--matrix", p, "--engine", "direct"], None);
    assert_eq!(lines(&direct)[..4], ["0000", "1011", "1000", "0011"]);

    let down = ok(&["gen", "--matrix", p, "--down"], None);
    let mut rev = lines(&up);
    rev.reverse();
    assert_eq!(lines(&down), rev);

    let shifted = ok(&["gen", "--matrix", p, "--shift", "3"], None);
    assert_eq!(lines(&shifted)[..4], ["1000", "1101", "0110", "1110"]);
    let offset = ok(
        &["gen", "--matrix", p, "--b0", "0b0011", "--a0", "0b1000"],
        None,
    );
    assert_eq!(shifted, offset);
    let decimal_b0 = ok(&["gen", "--matrix", p, "--b0", "3", "--a0", "8"], None);
    assert_eq!(shifted, decimal_b0);
}

#[test]
fn gen_linear_decimal() {
    let out = ok(
        &["gen", "-m", "4", "--family", "linear", "--format", "dec"],
        None,
    );
    let want: Vec<String> = (0..16).map(|n| n.to_string()).collect();
    assert_eq!(lines(&out), want);
}

#[test]
fn gen_count_and_csv() {
    let out = ok(
        &[
            "gen", "-m", "4", "--family", "gray", "--count", "3", "--format", "csv",
        ],
        None,
    );
    assert_eq!(lines(&out)[0], "n,address_dec,address_bin,hamming_to_prev");
    assert_eq!(lines(&out).len(), 4);
}

#[test]
fn matrix_command() {
    let out = ok(&["matrix", "-m", "4", "--family", "complement"], None);
    assert_eq!(lines(&out), ["m=4", "1111", "1110", "1100", "1000"]);
    let out = ok(&["matrix", "-m", "4", "--family", "gray", "--check"], None);
    assert_eq!(
        lines(&out),
        [
            "m=4",
            "0001",
            "0010",
            "0100",
            "1000",
            "# rank=4 full_rank=true"
        ]
    );
    let a = ok(&["matrix", "-m", "16", "--family", "random:seed=7"], None);
    let b = ok(&["matrix", "-m", "16", "--family", "random:7"], None);
    assert_eq!(a, b);
    assert_ne!(a, ok(&["matrix", "-m", "16", "--family", "random:8"], None));
}

#[test]
fn matrix_output_feeds_gen() {
    let text = ok(
        &["matrix", "-m", "5", "--family", "limited", "--check"],
        None,
    );
    let path = temp_file("limited5.txt", &text);
    let via_file = ok(&["gen", "--matrix", path.to_str().unwrap()], None);
    let via_family = ok(&["gen", "-m", "5", "--family", "limited"], None);
    assert_eq!(via_file, via_family);
}

#[test]
fn gen_verify_round_trip_all_families() {
    for m in 1..=12usize {
        let ms = m.to_string();
        let mut families = vec![
            "linear".to_string(),
            "complement".into(),
            "gray".into(),
            "quasi".into(),
            format!("random:{m}"),
            format!("pow2:{}", m / 2),
        ];
        if m >= 2 {
            families.push("limited".into());
        }
        for family in &families {
            let seq = ok(&["gen", "-m", &ms, "--family", family], None);
            let out = addrseq(&["verify", "-m", &ms], Some(seq.as_bytes()));
            assert!(
                out.status.success(),
                "verify failed for {family} m={m}: {}",
                String::from_utf8_lossy(&out.stdout)
            );
        }
    }
}

#[test]
fn verify_rejects_truncated_and_duplicated() {
    let seq = ok(&["gen", "-m", "4", "--family", "limited"], None);
    let truncated: String = seq.lines().take(15).map(|l| format!("{l}\n")).collect();
    let out = addrseq(&["verify", "-m", "4"], Some(truncated.as_bytes()));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(kv(&String::from_utf8_lossy(&out.stdout), "verdict"), "fail");

    let mut dup = lines(&seq);
    dup[3] = dup[2];
    let dup = dup.join("\n");
    let out = addrseq(&["verify", "-m", "4"], Some(dup.as_bytes()));
    assert_eq!(out.status.code(), Some(1));
    assert_ne!(
        kv(&String::from_utf8_lossy(&out.stdout), "first_duplicate"),
        "none"
    );
}

#[test]
fn analyze_gray_has_unit_distances() {
    let seq = ok(&["gen", "-m", "6", "--family", "gray:3,1,2,6,5,4"], None);
    let report = ok(&["analyze"], Some(seq.as_bytes()));
    assert_eq!(kv(&report, "m"), "6");
    assert_eq!(kv(&report, "hamming_min"), "1");
    assert_eq!(kv(&report, "hamming_max"), "1");
    assert_eq!(kv(&report, "verdict"), "pass");
}

#[test]
fn rank_stats() {
    let out = ok(&["rank-stats", "-m", "4", "--exhaustive"], None);
    assert_eq!(kv(&out, "exhaustive_full_rank_fraction"), "20160/65536");
    let out = ok(&["rank-stats", "-m", "1"], None);
    assert_eq!(
        kv(&out, "fullrank_probability").parse::<f64>().unwrap(),
        0.5
    );
    let again = ok(&["rank-stats", "-m", "1"], None);
    assert_eq!(out, again);
}

#[test]
fn permute_counter_sequence() {
    let seq = ok(&["gen", "-m", "3", "--family", "linear"], None);
    let out = ok(&["permute", "--perm", "3,2,1"], Some(seq.as_bytes()));
    assert_eq!(
        lines(&out),
        ["000", "100", "010", "110", "001", "101", "011", "111"]
    );
    let bad = addrseq(&["permute", "--perm", "1,1,2"], Some(seq.as_bytes()));
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn formats_round_trip() {
    let reference = ok(
        &["gen", "-m", "7", "--family", "random:3", "--format", "dec"],
        None,
    );
    for fmt in ["bin", "dec", "hex", "csv"] {
        let seq = ok(
            &["gen", "-m", "7", "--family", "random:3", "--format", fmt],
            None,
        );
        let back = ok(
            &[
                "permute",
                "--perm",
                "1,2,3,4,5,6,7",
                "-m",
                "7",
                "--input-format",
                fmt,
                "--format",
                "dec",
            ],
            Some(seq.as_bytes()),
        );
        assert_eq!(back, reference, "format {fmt}");
    }
}

#[test]
fn rejects_rank_deficient_matrix_file() {
    let path = temp_file("deficient.txt", "m=4\n1011\n1011\n0101\n1111\n");
    let out = addrseq(&["gen", "--matrix", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank"));
}

#[test]
fn rejects_bad_arguments() {
    let out = addrseq(&["gen", "-m", "65", "--family", "linear"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = addrseq(
        &[
            "gen", "-m", "4", "--family", "linear", "--engine", "direct", "--down",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    let out = addrseq(&["gen", "-m", "4", "--family", "nope"], None);
    assert_eq!(out.status.code(), Some(2));
}
