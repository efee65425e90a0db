#![no_main]

use libfuzzer_sys::fuzz_target;
use senti_risk::model::{checkpoint_from_str, checkpoint_to_string};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(model) = checkpoint_from_str(s) {
            let text = checkpoint_to_string(&model).expect("loaded model serializes");
            let again = checkpoint_from_str(&text).expect("written checkpoint loads");
            assert_eq!(again.params, model.params);
        }
    }
});
