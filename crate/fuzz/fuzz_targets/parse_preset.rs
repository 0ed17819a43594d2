#![no_main]

use libfuzzer_sys::fuzz_target;
use shocklab_cli::Preset;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = text.parse::<Preset>() {
        assert_eq!(p.name(), text);
        let _ = p.job();
    }
});
