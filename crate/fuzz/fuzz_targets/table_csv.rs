#![no_main]
use libfuzzer_sys::fuzz_target;
use spatial_irv::VoterDistribution;

fuzz_target!(|data: &[u8]| {
    let Ok(d) = VoterDistribution::from_table_csv(data) else { return };
    for p in [0.0, 0.1, 0.5, 0.9, 1.0] {
        let x = d.quantile(p).unwrap();
        assert!((0.0..=1.0).contains(&x));
        let f = d.cdf(x).unwrap();
        assert!((0.0..=1.0).contains(&f));
    }
    let _ = d.classify_shape();
});
