#![no_main]
use libfuzzer_sys::fuzz_target;
use maxsurf::config::Config;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = Config::parse(s) {
            for k in cfg.keys() {
                let _ = cfg.get_f64(k);
                let _ = cfg.get_grid(k);
                let _ = cfg.get_bounds(k);
            }
        }
    }
});
