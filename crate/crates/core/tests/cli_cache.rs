use pointscatter::arith::SumsOfTwoSquaresTable;
use pointscatter::cache::{decode, encode, read_cache, write_cache};
use pointscatter::cli::{run, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};
use tempfile::tempdir;

fn run_args(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["pointscatter"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn cache_round_trip_is_byte_identical() {
    let dir = tempdir().unwrap();
    let t = SumsOfTwoSquaresTable::build(100_000).unwrap();
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    write_cache(&t, &a).unwrap();
    let back = read_cache(&a).unwrap();
    assert!(back == t);
    write_cache(&back, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn damaged_caches_fail_loudly() {
    let bytes = encode(&SumsOfTwoSquaresTable::build(10_000).unwrap());
    let e = decode(&bytes[..bytes.len() / 2]).unwrap_err().to_string();
    assert!(e.contains("checksum"), "{e}");
    let mut v2 = bytes.clone();
    v2[4..8].copy_from_slice(&2u32.to_le_bytes());
    let e = decode(&v2).unwrap_err().to_string();
    assert!(e.contains("version 2") && e.contains("[1]"), "{e}");
}

#[test]
fn spectrum_chain_up_to_ten() {
    let (code, out, _) = run_args(&["spectrum", "--limit", "10", "--phi", "0", "--mode", "weak"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# {") && lines[0].contains("\"version\""));
    assert_eq!(lines[2], "m,m_minus,lambda,residual,iterations");
    let lambdas: Vec<(u64, f64)> = lines[3..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    let ms: Vec<u64> = lambdas.iter().map(|x| x.0).collect();
    assert_eq!(ms, [0, 1, 2, 4, 5, 8, 9, 10]);
    let mut prev = f64::NEG_INFINITY;
    let mut left = None;
    for (m, l) in lambdas {
        assert!(l > prev && l < m as f64 && left.is_none_or(|a: u64| l > a as f64));
        prev = l;
        left = Some(m);
    }
}

#[test]
fn element_emits_one_json_line() {
    let (code, out, _) = run_args(&[
        "element", "--k", "4", "--lambda", "3.0", "--format", "jsonl",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
    for key in ["re", "im", "trunc", "tail"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(
        run_args(&["spectrum", "--limit", "10", "--bogus"]).0,
        EXIT_CONFIG
    );
    let (code, _, err) = run_args(&["spectrum", "--limit", "10", "--phi", "3.2"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("--phi"), "{err}");
    let (code, _, err) = run_args(&[
        "spectrum", "--limit", "10", "--mode", "strong", "--delta", "1.5",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("--delta"), "{err}");
    let (code, _, err) = run_args(&["element", "--k", "4", "--zeta", "1;2", "--lambda", "3"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("--zeta"), "{err}");
    assert_eq!(
        run_args(&["stats", "hecke", "--k", "6", "--x", "100"]).0,
        EXIT_CONFIG
    );
    let (code, _, err) = run_args(&[
        "element",
        "--k",
        "4",
        "--lambda",
        "3000",
        "--table-limit",
        "70000",
    ]);
    assert_eq!(code, EXIT_NUMERICAL, "{err}");
    assert_eq!(run_args(&["--version"]).0, EXIT_OK);
}

#[test]
fn bad_cache_is_a_config_error() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("bad.bin");
    std::fs::write(&path, b"S2SQ garbage").unwrap();
    let (code, _, err) = run_args(&[
        "stats",
        "landau",
        "--limit",
        "2000",
        "--cache",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("cache"), "{err}");
}

#[test]
fn cache_flag_reuses_the_table() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("t.bin");
    let p = path.to_str().unwrap();
    let first = run_args(&["stats", "moments", "--limit", "20000", "--cache", p]);
    assert!(path.exists());
    let second = run_args(&["stats", "moments", "--limit", "20000", "--cache", p]);
    assert_eq!(first, second);
    let (code, _, err) = run_args(&["stats", "moments", "--limit", "40000", "--cache", p]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("--cache"), "{err}");
}

#[test]
fn secular_has_holes_at_poles() {
    let (code, out, _) = run_args(&["secular", "--from", "-5", "--to", "30", "--samples", "8"]);
    assert_eq!(code, EXIT_OK);
    let holes: Vec<&str> = out.lines().filter(|l| l.ends_with(',')).collect();
    assert_eq!(holes, ["0.0,", "5.0,", "10.0,", "20.0,", "25.0,"]);
}
