#![no_main]
use libfuzzer_sys::fuzz_target;
use unilocal::io::{bisym_spec_from_json, fs_spec_from_json};
use unilocal::localization::{block_log_negativity, equivalent_two_mode_invariants};
use unilocal::states::{bisymmetric_cm, fully_symmetric_cm};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = fs_spec_from_json(text) {
        if spec.modes <= 16 {
            let _ = fully_symmetric_cm(&spec);
            let _ = block_log_negativity(&spec, spec.modes / 2);
        }
    }
    if let Ok(spec) = bisym_spec_from_json(text) {
        if spec.m + spec.n <= 16 {
            let _ = bisymmetric_cm(&spec);
            let _ = equivalent_two_mode_invariants(&spec);
        }
    }
});
