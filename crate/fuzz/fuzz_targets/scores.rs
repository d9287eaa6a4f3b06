#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ms) = capeval_core::metrics::parse_scores(text) {
            let list: Vec<_> = ms.into_values().collect();
            let again = capeval_core::metrics::scores_to_jsonl(&list);
            assert!(capeval_core::metrics::parse_scores(&again).is_ok());
        }
    }
});
