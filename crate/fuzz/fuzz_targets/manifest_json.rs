#![no_main]
use libfuzzer_sys::fuzz_target;
use spatial_irv::experiments::RunManifest;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(m) = RunManifest::from_json(s) {
        let back = serde_json::to_string(&m).unwrap();
        assert_eq!(RunManifest::from_json(&back).unwrap().command, m.command);
    }
});
