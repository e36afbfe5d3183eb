#![no_main]
use libfuzzer_sys::fuzz_target;
use spatial_irv::tabulate::{irv_winner, parse_positions, plurality_winner};
use spatial_irv::{Profile, TieRule, VoterDistribution};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(xs) = parse_positions(s) else { return };
    let Ok(p) = Profile::new(xs) else { return };
    if p.len() > 64 {
        return;
    }
    let d = VoterDistribution::uniform();
    let irv = irv_winner(&p, &d, TieRule::default()).unwrap();
    assert!(irv.winner_index < p.len());
    let total: f64 = irv.rounds[0].shares.iter().sum();
    assert!((total - 1.0).abs() < 1e-9);
    plurality_winner(&p, &d, TieRule::EliminateRightmost).unwrap();
});
