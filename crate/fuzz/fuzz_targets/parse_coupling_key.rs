#![no_main]

use libfuzzer_sys::fuzz_target;
use shocklab_core::CouplingKey;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(key) = text.parse::<CouplingKey>() {
        assert!(key.k >= 1);
        assert_eq!(key.to_string(), text);
    }
});
