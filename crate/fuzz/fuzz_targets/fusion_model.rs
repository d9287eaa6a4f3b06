#![no_main]

use capeval_core::fusion::FusionModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(model) = FusionModel::from_json(text) {
            let _ = model.raw_weights();
            let _ = model.weights_table();
        }
    }
});
