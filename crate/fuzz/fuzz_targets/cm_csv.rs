#![no_main]
use libfuzzer_sys::fuzz_target;
use unilocal::io::{cm_from_csv, cm_to_csv};
use unilocal::symplectic::symplectic_eigenvalues;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cm) = cm_from_csv(text) else { return };
    assert_eq!(cm_from_csv(&cm_to_csv(&cm)).expect("own output parses"), cm);
    if cm.modes() <= 4 {
        let _ = symplectic_eigenvalues(&cm);
    }
});
