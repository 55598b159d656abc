#![no_main]

use clap::Parser;
use libfuzzer_sys::fuzz_target;
use pointscatter::cli::{parse_int_pair, parse_real_pair, Cli};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_int_pair(text);
    if let Ok((a, b)) = parse_real_pair(text) {
        assert!(a.is_finite() && b.is_finite());
    }
    let argv = std::iter::once("pointscatter").chain(text.split('\0'));
    let _ = Cli::try_parse_from(argv);
});
