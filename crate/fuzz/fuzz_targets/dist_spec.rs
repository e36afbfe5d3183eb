#![no_main]
use libfuzzer_sys::fuzz_target;
use spatial_irv::experiments::OutputFormat;
use spatial_irv::{DistSpec, Rule, TieRule};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = s.parse::<Rule>();
    let _ = s.parse::<TieRule>();
    let _ = s.parse::<OutputFormat>();
    if let Ok(spec) = s.parse::<DistSpec>() {
        // table specs would touch the filesystem
        if !matches!(spec, DistSpec::Table(_)) {
            let again: DistSpec = spec.to_string().parse().expect("display round-trips");
            assert_eq!(again.to_string(), spec.to_string());
            if let Ok(d) = spec.build() {
                let q = d.quantile(0.3).unwrap();
                assert!((0.0..=1.0).contains(&q));
            }
        }
    }
});
