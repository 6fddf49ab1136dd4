#![no_main]
use libfuzzer_sys::fuzz_target;
use maxsurf::config::parse_bounds;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(b) = parse_bounds(s) {
            assert!(b.is_valid());
        }
    }
});
