//! The self-check suite behind `verify`: each check re-derives one claim
//! from simulation or exact arithmetic and reports pass/fail with its seed.

use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::drivers::{run_beta_sweep, run_scatter, run_winner_histograms};
use crate::asymptotics::{
    circle_coupling_experiment, max_gap_experiment, winner_uniformity_experiment,
    winning_share_experiment, SpacingSource,
};
use crate::dist::VoterDistribution;
use crate::error::Result;
use crate::exactk3::{density_k3, order_statistic_win_prob};
use crate::seeds::{experiment_id, par_trials, rng_from_seed, trial_seed};
use crate::stats::sort_floats;
use crate::tabulate::{
    irv_discrete, irv_sorted, irv_winner, plurality_winner, sample_ballots, sorted_vote_shares,
    Profile, Rule, TieRule,
};
use crate::zones::{force_plurality_winner, small_k_counterexample, tightness_profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// Reduced trial counts, seconds to run.
    #[default]
    Quick,
    /// Full desk-scale trial counts.
    Full,
}

/// Deliberate bugs used to show the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// IRV reads each candidate's share from its left neighbour's slot.
    ShiftedShares,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub scale: Scale,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub claim: String,
    pub seed: u64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

struct Ctx {
    opts: VerifyOptions,
}

impl Ctx {
    fn pick<T>(&self, quick: T, full: T) -> T {
        match self.opts.scale {
            Scale::Quick => quick,
            Scale::Full => full,
        }
    }

    fn seed(&self, name: &str) -> u64 {
        trial_seed(self.opts.seed, experiment_id(name), 0)
    }
}

type Check = (&'static str, &'static str, fn(&Ctx, u64) -> Result<(bool, String)>);

const CHECKS: &[Check] = &[
    (
        "uniform_zone",
        "uniform voters: any candidate in [1/6, 5/6] forces the IRV winner into it; otherwise the candidate nearest 1/2 wins",
        check_uniform_zone,
    ),
    (
        "tightness",
        "for c > 1/6 the constructed profiles elect a candidate outside (c, 1 - c)",
        check_tightness,
    ),
    (
        "exact_k3",
        "k = 3 densities: continuity, unit mass, variances 23/540 and 25/864, order-statistic decomposition",
        check_exact_k3,
    ),
    (
        "k3_histograms",
        "simulated k = 3 winner positions follow the exact densities",
        check_k3_histograms,
    ),
    (
        "plurality_spread",
        "plurality winners of many uniform candidates are spread uniformly",
        check_plurality_spread,
    ),
    (
        "gumbel_share",
        "normalized winning plurality share is near Gumbel",
        check_gumbel_share,
    ),
    ("gumbel_max_gap", "normalized largest uniform spacing is near Gumbel", check_max_gap),
    (
        "circle_coupling",
        "circle and interval plurality winners disagree less often as k grows",
        check_circle,
    ),
    (
        "beta_zones",
        "symmetric Beta voters: IRV winners respect each closed-form zone",
        check_beta_zones,
    ),
    (
        "forced_plurality",
        "any interior target can be made the plurality winner by adding candidates",
        check_forced,
    ),
    (
        "small_k_dominance",
        "for k <= 4 IRV is never more extreme than plurality; at k = 5 it can be",
        check_small_k,
    ),
    (
        "oracle_equivalence",
        "continuous IRV agrees with IRV on sampled ballots for decisive profiles",
        check_oracle,
    ),
];

pub fn run_verify(opts: VerifyOptions) -> Result<VerifyReport> {
    let ctx = Ctx { opts };
    let mut checks = Vec::new();
    for &(name, claim, f) in CHECKS {
        let seed = ctx.seed(name);
        let (passed, detail) = f(&ctx, seed)?;
        log::info!("{name}: {} ({detail})", if passed { "pass" } else { "FAIL" });
        checks.push(CheckResult {
            name: name.into(),
            claim: claim.into(),
            seed,
            passed,
            detail,
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        options: opts,
        checks,
        passed,
    })
}

/// IRV where candidate i is scored with the share belonging to i - 1.
fn irv_shifted(xs: &[f64], d: &VoterDistribution) -> usize {
    let mut active: Vec<usize> = (0..xs.len()).collect();
    while active.len() > 1 {
        let pos: Vec<f64> = active.iter().map(|&i| xs[i]).collect();
        let mut shares = sorted_vote_shares(&pos, d);
        shares.rotate_right(1);
        let out = (0..shares.len())
            .min_by(|&a, &b| shares[a].total_cmp(&shares[b]))
            .unwrap();
        active.remove(out);
    }
    active[0]
}

fn check_uniform_zone(ctx: &Ctx, seed: u64) -> Result<(bool, String)> {
    let trials = ctx.pick(20_000, 1_000_000);
    let d = VoterDistribution::uniform();
    let fault = ctx.opts.fault;
    let res = par_trials(seed, "uniform_zone", trials, |_, rng| -> Result<(bool, bool)> {
        let k = rng.random_range(3..=10);
        let xs = crate::asymptotics::draw_sorted(&d, k, rng);
        let w = match fault {
            Some(Fault::ShiftedShares) => irv_shifted(&xs, &d),
            None => irv_sorted(&xs, &d, TieRule::default())?.winner,
        };
        let moderate = xs.iter().any(|&x| (1.0 / 6.0..=5.0 / 6.0).contains(&x));
        let ok = if moderate {
            (1.0 / 6.0..=5.0 / 6.0).contains(&xs[w])
        } else {
            let best = xs.iter().map(|x| (x - 0.5).abs()).fold(f64::INFINITY, f64::min);
            (xs[w] - 0.5).abs() == best
        };
        Ok((moderate, ok))
    });
    let res: Vec<(bool, bool)> = res.into_iter().collect::<Result<_>>()?;
    let bad_mod = res.iter().filter(|(m, ok)| *m && !ok).count();
    let bad_ext = res.iter().filter(|(m, ok)| !*m && !ok).count();
    let n_ext = res.iter().filter(|(m, _)| !*m).count();
    Ok((
        bad_mod == 0 && bad_ext == 0,
        format!("{trials} trials, {bad_mod} zone violations, {bad_ext}/{n_ext} non-median winners without moderates"),
    ))
}

fn check_tightness(_: &Ctx, _: u64) -> Result<(bool, String)> {
    let d = VoterDistribution::uniform();
    let mut good = 0;
    for c in [0.17, 0.2, 0.3] {
        for k in [3, 5, 8] {
            let p = tightness_profile(c, k, 0.25 * (0.5 - c))?;
            let w = irv_winner(&p, &d, TieRule::default())?.winner_position;
            good += !(w > c && w < 1.0 - c) as usize;
        }
    }
    Ok((good == 9, format!("{good}/9 constructions elect outside (c, 1 - c)")))
}

fn check_exact_k3(_: &Ctx, _: u64) -> Result<(bool, String)> {
    let (p, r) = (density_k3(Rule::Plurality), density_k3(Rule::Irv));
    let mut ok = p.variance() == Rational64::new(23, 540) && r.variance() == Rational64::new(25, 864);
    ok &= p.integral() == Rational64::from_integer(1) && r.integral() == Rational64::from_integer(1);
    ok &= p.max_jump() <= 1e-12 && r.max_jump() <= 1e-12;
    let mut worst: f64 = 0.0;
    for rule in [Rule::Plurality, Rule::Irv] {
        let dens = density_k3(rule);
        for j in 0..200 {
            let w = 0.5 * j as f64 / 199.0;
            let s: f64 = (1..=3)
                .map(|i| order_statistic_win_prob(rule, i, w))
                .sum::<Result<f64>>()?;
            worst = worst.max((3.0 * s - dens.eval(w)?).abs());
        }
    }
    ok &= worst <= 1e-12;
    Ok((ok, format!("Var ratio {}, worst decomposition error {worst:.1e}", p.variance() / r.variance())))
}

fn check_k3_histograms(ctx: &Ctx, seed: u64) -> Result<(bool, String)> {
    let trials = ctx.pick(100_000, 1_000_000);
    let tol = ctx.pick(0.01, 0.005);
    let cfg = ExperimentConfig {
        trials,
        master_seed: seed,
        ..Default::default()
    };
    let run = run_winner_histograms(&cfg)?;
    let ks: Vec<f64> = run.summaries.iter().map(|s| s.ks_exact.unwrap_or(1.0)).collect();
    Ok((
        ks.iter().all(|&k| k <= tol),
        format!("KS plurality {:.4}, IRV {:.4} (tol {tol})", ks[0], ks[1]),
    ))
}

fn check_plurality_spread(ctx: &Ctx, seed: u64) -> Result<(bool, String)> {
    let trials = ctx.pick(10_000, 100_000);
    let r = winner_uniformity_experiment(
        Rule::Plurality,
        1000,
        trials,
        &VoterDistribution::uniform(),
        seed,
        TieRule::default(),
    )?;
    let ks = r.ks_uniform.unwrap_or(1.0);
    Ok((ks <= 0.05, format!("k = 1000, {trials} trials, KS {ks:.4} (tol 0.05)")))
}

fn check_gumbel_share(ctx: &Ctx, seed: u64) -> Result<(bool, String)> {
    let (k, trials) = ctx.pick((10_000, 2_000), (100_000, 10_000));
    let r = winning_share_experiment(k, trials, seed)?;
    Ok((
        r.ks_statistic <= 0.1,
        format!("k = {k}, {trials} trials, KS {:.4} (tol 0.1), median {:.3}", r.ks_statistic, r.median),
    ))
}

fn check_max_gap(ctx: &Ctx, seed: u64) -> Result<(bool, String)> {
    let (n, trials, tol) = ctx.pick((10_000, 2_000, 0.06), (100_000, 10_000, 0.05));
    let r = max_gap_experiment(n, trials, seed, SpacingSource::Exponential)?;
    Ok((
        r.ks_statistic <= tol,
        format!("n = {n}, {trials} trials, KS {:.4} (tol {tol})", r.ks_statistic),
    ))
}

fn check_circle(ctx: &Ctx, seed: u64) -> Result<(bool, String)> {
    let ks: &[usize] = ctx.pick(&[10, 100, 1000], &[10, 100, 1000, 10_000]);
    let trials = ctx.pick(4_000, 10_000);
    let rates = ks
        .iter()
        .map(|&k| circle_coupling_experiment(k, trials, seed).map(|r| r.rate))
        .collect::<Result<Vec<f64>>>()?;
    let decreasing = rates.windows(2).all(|w| w[1] < w[0]);
    let last = *rates.last().unwrap();
    Ok((decreasing && last <= 0.05, format!("k {ks:?}: rates {rates:?}")))
}

fn check_beta_zones(ctx: &Ctx, seed: u64) -> Result<(bool, String)> {
    let cfg = ExperimentConfig {
        ks: vec![30],
        trials: ctx.pick(5_000, 100_000),
        master_seed: seed,
        ..Default::default()
    };
    let run = run_beta_sweep(&cfg)?;
    let hyper_ok = run
        .summaries
        .iter()
        .filter(|s| s.alpha == 0.3)
        .all(|s| s.qualifying > 0 && s.irv_violations == 0);
    let v = run.total_violations();
    Ok((
        v == 0 && hyper_ok,
        format!("{} alphas, {v} violations", run.summaries.len()),
    ))
}

fn check_forced(ctx: &Ctx, seed: u64) -> Result<(bool, String)> {
    let sets = ctx.pick(100, 1000);
    let mut rng = rng_from_seed(seed);
    let mut ok = 0;
    let dists = [VoterDistribution::uniform(), VoterDistribution::symmetric_beta(2.0)?];
    for d in &dists {
        for _ in 0..sets {
            let k = rng.random_range(1..=8);
            let xs: Vec<f64> = (0..k).map(|_| rng.random_range(0.001..0.999)).collect();
            let target = rng.random_range(0..k);
            let p = Profile::new(xs)?;
            let forced = force_plurality_winner(&p, target, d)?;
            if plurality_winner(&forced, d, TieRule::Error).is_ok_and(|o| o.winner_index == target) {
                ok += 1;
            }
        }
    }
    let total = 2 * sets;
    Ok((ok == total, format!("{ok}/{total} targets forced")))
}

fn check_small_k(ctx: &Ctx, seed: u64) -> Result<(bool, String)> {
    let trials = ctx.pick(20_000, 1_000_000);
    let mut bad = 0;
    for dist in ["uniform", "beta:2"] {
        let cfg = ExperimentConfig {
            ks: vec![3, 4],
            dist: dist.into(),
            trials,
            master_seed: seed,
            ..Default::default()
        };
        bad += run_scatter(&cfg)?
            .summaries
            .iter()
            .map(|s| s.irv_more_extreme_untied)
            .sum::<u64>();
    }
    let d = VoterDistribution::uniform();
    let p = small_k_counterexample();
    let pl = plurality_winner(&p, &d, TieRule::default())?;
    let irv = irv_winner(&p, &d, TieRule::default())?;
    let five = pl.winner_position == 0.5
        && (pl.rounds[0].shares[2] - 0.3).abs() < 1e-12
        && (irv.winner_position == 0.2 || irv.winner_position == 0.8);
    Ok((
        bad == 0 && five,
        format!("{bad} IRV-more-extreme trials at k <= 4; k = 5 construction {}", if five { "holds" } else { "fails" }),
    ))
}

fn check_oracle(ctx: &Ctx, seed: u64) -> Result<(bool, String)> {
    let (profiles, voters) = ctx.pick((60, 200_000), (500, 1_000_000));
    let dists = [VoterDistribution::uniform(), VoterDistribution::symmetric_beta(2.0)?];
    let res = par_trials(seed, "oracle", profiles, |t, rng| -> Result<bool> {
        let d = &dists[(t % 2) as usize];
        let p = loop {
            let k = rng.random_range(3..=8);
            let mut xs = d.sample_n(rng, k);
            sort_floats(&mut xs);
            let p = Profile::new(xs)?;
            if irv_winner(&p, d, TieRule::default())?.margin > 0.005 {
                break p;
            }
        };
        let cont = irv_winner(&p, d, TieRule::default())?.winner_index;
        let ballots = sample_ballots(&p, d, voters, rng)?;
        Ok(irv_discrete(&ballots, TieRule::default())? == cont)
    });
    let agree = res.into_iter().collect::<Result<Vec<bool>>>()?.iter().filter(|&&a| a).count();
    let frac = agree as f64 / profiles as f64;
    Ok((frac >= 0.99, format!("{agree}/{profiles} profiles agree ({voters} voters each)")))
}
