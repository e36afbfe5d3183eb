#![no_main]
use libfuzzer_sys::fuzz_target;
use spatial_irv::experiments::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(cfg) = serde_json::from_slice::<ExperimentConfig>(data) else { return };
    if cfg.validate().is_ok() && !cfg.dist.starts_with("table:") {
        cfg.distribution().unwrap();
    }
});
