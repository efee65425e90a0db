#![no_main]

use libfuzzer_sys::fuzz_target;
use senti_risk::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::parse(s) {
            assert!(cfg.validate().is_ok());
        }
    }
});
