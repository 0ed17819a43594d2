use std::fs;
use std::path::PathBuf;

use shocklab_cli::{parse_config, Preset};
use shocklab_core::CouplingKey;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds_echo_cleanly() {
    let mut accepted = 0;
    for (path, text) in seeds("parse_config") {
        let Ok(cfg) = parse_config(&text) else {
            continue;
        };
        accepted += 1;
        let _ = cfg.couplings();
        let _ = cfg.flow_legs();
        let echo = serde_json::to_string(&cfg.resolved()).unwrap();
        let again = parse_config(&echo).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(again.resolved(), cfg.resolved(), "{}", path.display());
    }
    assert!(accepted >= 5);
}

#[test]
fn preset_seeds_round_trip() {
    for (_, text) in seeds("parse_preset") {
        if let Ok(p) = text.parse::<Preset>() {
            assert_eq!(p.name(), text);
        }
    }
}

#[test]
fn coupling_key_seeds_round_trip() {
    let mut accepted = 0;
    for (_, text) in seeds("parse_coupling_key") {
        if let Ok(key) = text.parse::<CouplingKey>() {
            accepted += 1;
            assert!(key.k >= 1);
            assert_eq!(key.to_string(), text);
        }
    }
    assert_eq!(accepted, 4);
}
