#![no_main]

use libfuzzer_sys::fuzz_target;
use pointscatter::cache::{decode, encode};

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = decode(data) {
        assert_eq!(encode(&table), data);
    }
});
