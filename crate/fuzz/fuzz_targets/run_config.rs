#![no_main]

use ddro_cli::config::{parse_config, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = parse_config(text) else { return };
    let json = serde_json::to_string(&cfg).unwrap();
    let back: RunConfig = parse_config(&json).unwrap();
    assert_eq!(cfg, back);
});
