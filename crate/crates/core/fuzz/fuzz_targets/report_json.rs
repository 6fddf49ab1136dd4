#![no_main]
use libfuzzer_sys::fuzz_target;
use maxsurf::diffgeo::VerificationReport;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = VerificationReport::from_json(s);
    }
});
