#![no_main]
use libfuzzer_sys::fuzz_target;
use unilocal::experiments::BGrid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(grid) = text.parse::<BGrid>() else { return };
    if grid.steps <= 10_000 {
        let values = grid.values();
        assert_eq!(values.len(), grid.steps);
        assert!(values.iter().all(|&b| b >= grid.lo && b <= grid.hi));
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }
});
