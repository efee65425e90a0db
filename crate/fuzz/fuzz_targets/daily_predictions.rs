#![no_main]

use libfuzzer_sys::fuzz_target;
use senti_risk::alert::{detect_inflections, AlertRuleConfig};
use senti_risk::train::parse_daily_predictions;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(preds) = parse_daily_predictions(s) {
            let _ = detect_inflections(&preds, &AlertRuleConfig::default());
        }
    }
});
