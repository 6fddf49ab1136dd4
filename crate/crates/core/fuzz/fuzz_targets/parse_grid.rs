#![no_main]
use libfuzzer_sys::fuzz_target;
use maxsurf::config::parse_grid;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(g) = parse_grid(s) {
            let again = parse_grid(&format!("{}x{}", g.nx, g.ny)).expect("grid to round trip");
            assert_eq!(again, g);
        }
    }
});
