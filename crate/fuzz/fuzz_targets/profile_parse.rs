#![no_main]

use libfuzzer_sys::fuzz_target;
use pointscatter::ergostat::PropertyProfile;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = PropertyProfile::from_toml(text) {
            assert!(p.eps().iter().all(|&e| e > 0.0 && e <= 0.2));
            assert!(p.scaled(0.5).validate().is_ok());
        }
    }
});
