#![no_main]
use libfuzzer_sys::fuzz_target;
use unilocal::io::{cm_from_json, cm_to_json};
use unilocal::measures::{log_negativity, ModeBipartition};
use unilocal::symplectic::symplectic_eigenvalues;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cm) = cm_from_json(text) else { return };
    assert_eq!(cm_from_json(&cm_to_json(&cm)).expect("own output parses"), cm);
    // Small accepted matrices also go through the numerics, which must
    // fail with an error rather than panic.
    if cm.modes() <= 4 {
        let _ = symplectic_eigenvalues(&cm);
        if cm.modes() >= 2 {
            let part = ModeBipartition::split(1, cm.modes() - 1).expect("valid split");
            let _ = log_negativity(&cm, &part);
        }
    }
});
