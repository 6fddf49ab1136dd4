#![no_main]
use libfuzzer_sys::fuzz_target;
use maxsurf::mesh::MeshGrid;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(m) = MeshGrid::from_json(s) {
            let _ = m.to_obj();
            let _ = m.quads().count();
        }
    }
});
