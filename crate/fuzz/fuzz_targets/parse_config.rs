#![no_main]

use libfuzzer_sys::fuzz_target;
use shocklab_cli::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = parse_config(text) else {
        return;
    };
    // accepted configs resolve and survive their own echo
    let _ = cfg.couplings();
    let _ = cfg.flow_legs();
    let echo = serde_json::to_string(&cfg.resolved()).unwrap();
    let again = parse_config(&echo).expect("echoed config parses");
    assert_eq!(again.resolved(), cfg.resolved());
});
