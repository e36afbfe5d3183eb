use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::{fmt_float, CsvRecord};
use crate::asymptotics::draw_sorted;
use crate::dist::VoterDistribution;
use crate::error::{Error, Result};
use crate::exactk3::density_k3;
use crate::seeds::par_trials;
use crate::stats::{ks_one_sample, mean};
use crate::tabulate::{irv_sorted, plurality_sorted, Decision, Rule, TieRule};
use crate::zones::{zone_closed_form, ExclusionZone, Regime, ZoneKind, VERIFY_INSET};

pub const DENSITY_OVERLAY_POINTS: usize = 201;

/// Distances from 1/2 closer than this count as equal.
const SAME_TOL: f64 = 1e-12;

fn decide(rule: Rule, xs: &[f64], d: &VoterDistribution, tie: TieRule) -> Result<Decision> {
    match rule {
        Rule::Plurality => plurality_sorted(xs, d, tie),
        Rule::Irv => irv_sorted(xs, d, tie),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinnerSample {
    pub rule: Rule,
    pub k: usize,
    pub trial: u64,
    pub position: f64,
}

impl CsvRecord for WinnerSample {
    fn header() -> &'static [&'static str] {
        &["rule", "k", "trial", "winner_position"]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            self.rule.to_string(),
            self.k.to_string(),
            self.trial.to_string(),
            fmt_float(self.position),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub rule: Rule,
    pub k: usize,
    pub trials: u64,
    pub ties: u64,
    pub outside_sixths: u64,
    pub mean_position: f64,
    /// KS distance to the exact density (k = 3, uniform voters).
    pub ks_exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub x: f64,
    pub plurality: f64,
    pub irv: f64,
}

impl CsvRecord for DensityPoint {
    fn header() -> &'static [&'static str] {
        &["x", "plurality_density", "irv_density"]
    }
    fn fields(&self) -> Vec<String> {
        vec![fmt_float(self.x), fmt_float(self.plurality), fmt_float(self.irv)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRun {
    pub samples: Vec<WinnerSample>,
    pub summaries: Vec<HistogramSummary>,
    /// Exact k = 3 densities on a grid, when k = 3 with uniform voters.
    pub overlay: Vec<DensityPoint>,
}

/// Winner positions for every (rule, k). Both rules see the same candidate
/// draws for a given k.
pub fn run_winner_histograms(cfg: &ExperimentConfig) -> Result<HistogramRun> {
    cfg.validate()?;
    let d = cfg.distribution()?;
    let mut samples = Vec::new();
    let mut summaries = Vec::new();
    for &k in &cfg.ks {
        let per_trial = par_trials(cfg.master_seed, &format!("histogram/k{k}"), cfg.trials, |_, rng| {
            let xs = draw_sorted(&d, k, rng);
            cfg.rules
                .iter()
                .map(|&r| decide(r, &xs, &d, cfg.tie_rule).map(|dec| (xs[dec.winner], dec.tied)))
                .collect::<Result<Vec<_>>>()
        });
        let per_trial: Vec<Vec<(f64, bool)>> = per_trial.into_iter().collect::<Result<_>>()?;
        for (ri, &rule) in cfg.rules.iter().enumerate() {
            let positions: Vec<f64> = per_trial.iter().map(|t| t[ri].0).collect();
            let ks_exact = (k == 3 && d.is_uniform_equivalent()).then(|| {
                let exact = density_k3(rule);
                ks_one_sample(&positions, |x| exact.cdf(x).expect("position in [0, 1]"))
            });
            summaries.push(HistogramSummary {
                rule,
                k,
                trials: cfg.trials,
                ties: per_trial.iter().filter(|t| t[ri].1).count() as u64,
                outside_sixths: positions.iter().filter(|&&x| !(1.0 / 6.0..=5.0 / 6.0).contains(&x)).count()
                    as u64,
                mean_position: mean(&positions),
                ks_exact,
            });
            samples.extend(positions.into_iter().enumerate().map(|(t, position)| WinnerSample {
                rule,
                k,
                trial: t as u64,
                position,
            }));
        }
    }
    let overlay = if cfg.ks.contains(&3) && d.is_uniform_equivalent() {
        let (p, r) = (density_k3(Rule::Plurality), density_k3(Rule::Irv));
        (0..DENSITY_OVERLAY_POINTS)
            .map(|i| {
                let x = i as f64 / (DENSITY_OVERLAY_POINTS - 1) as f64;
                DensityPoint {
                    x,
                    plurality: p.eval(x).expect("grid in [0, 1]"),
                    irv: r.eval(x).expect("grid in [0, 1]"),
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(HistogramRun {
        samples,
        summaries,
        overlay,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub trial: u64,
    pub plurality_position: f64,
    pub irv_position: f64,
    /// The alpha's zone is usable and its hypothesis on candidates holds.
    pub qualifies: bool,
    pub irv_violation: bool,
}

impl CsvRecord for SweepRow {
    fn header() -> &'static [&'static str] {
        &["alpha", "trial", "plurality_position", "irv_position", "qualifies", "irv_violation"]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_float(self.alpha),
            self.trial.to_string(),
            fmt_float(self.plurality_position),
            fmt_float(self.irv_position),
            self.qualifies.to_string(),
            self.irv_violation.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub alpha: f64,
    pub regime: Option<Regime>,
    pub kind: Option<ZoneKind>,
    pub c: Option<f64>,
    /// Zero-width or unverified bound: reported but not tested.
    pub degenerate: bool,
    pub trials: u64,
    pub qualifying: u64,
    pub irv_violations: u64,
    /// Qualifying trials whose plurality winner lies outside the zone.
    pub plurality_outside: u64,
    pub ties: u64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub k: usize,
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<SweepSummary>,
}

impl SweepRun {
    pub fn total_violations(&self) -> u64 {
        self.summaries.iter().map(|s| s.irv_violations).sum()
    }
}

/// Symmetric Beta voters and candidates for each alpha, both rules on the
/// same draws, checked against the closed-form zone for that alpha.
pub fn run_beta_sweep(cfg: &ExperimentConfig) -> Result<SweepRun> {
    cfg.validate()?;
    if cfg.alphas.is_empty() {
        return Err(Error::InvalidParameter("alpha list is empty".into()));
    }
    let k = cfg.ks[0];
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &alpha in &cfg.alphas {
        let d = VoterDistribution::symmetric_beta(alpha)?;
        let (zone, note) = match zone_closed_form(&d) {
            Ok(z) => {
                let note = z.warnings.first().cloned();
                (Some(z), note)
            }
            Err(Error::UnsupportedRegime(m)) => (None, Some(m)),
            Err(e) => return Err(e),
        };
        let usable: Option<&ExclusionZone> = zone.as_ref().filter(|z| z.c > VERIFY_INSET && z.verified);
        let trials = par_trials(cfg.master_seed, &format!("betasweep/alpha{alpha}"), cfg.trials, |t, rng| {
            let xs = draw_sorted(&d, k, rng);
            let p = plurality_sorted(&xs, &d, cfg.tie_rule)?;
            let i = irv_sorted(&xs, &d, cfg.tie_rule)?;
            let qualifies = usable.is_some_and(|z| z.applies_to(&xs));
            let irv_position = xs[i.winner];
            Ok((
                SweepRow {
                    alpha,
                    trial: t,
                    plurality_position: xs[p.winner],
                    irv_position,
                    qualifies,
                    irv_violation: qualifies && !usable.unwrap().contains(irv_position),
                },
                p.tied || i.tied,
            ))
        });
        let trials: Vec<(SweepRow, bool)> = trials.into_iter().collect::<Result<_>>()?;
        let qualifying: Vec<&SweepRow> = trials.iter().map(|(r, _)| r).filter(|r| r.qualifies).collect();
        summaries.push(SweepSummary {
            alpha,
            regime: zone.as_ref().map(|z| z.regime),
            kind: zone.as_ref().map(|z| z.kind),
            c: zone.as_ref().map(|z| z.c),
            degenerate: zone.is_some() && usable.is_none(),
            trials: cfg.trials,
            qualifying: qualifying.len() as u64,
            irv_violations: qualifying.iter().filter(|r| r.irv_violation).count() as u64,
            plurality_outside: qualifying
                .iter()
                .filter(|r| !usable.unwrap().contains(r.plurality_position))
                .count() as u64,
            ties: trials.iter().filter(|(_, t)| *t).count() as u64,
            note,
        });
        rows.extend(trials.into_iter().map(|(r, _)| r));
    }
    Ok(SweepRun { k, rows, summaries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    IrvMoreModerate,
    PluralityMoreModerate,
    Same,
}

impl Comparison {
    pub fn of(plurality: f64, irv: f64) -> Self {
        let (dp, di) = ((plurality - 0.5).abs(), (irv - 0.5).abs());
        if (dp - di).abs() <= SAME_TOL {
            Comparison::Same
        } else if di < dp {
            Comparison::IrvMoreModerate
        } else {
            Comparison::PluralityMoreModerate
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Comparison::IrvMoreModerate => "irv",
            Comparison::PluralityMoreModerate => "plurality",
            Comparison::Same => "same",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub k: usize,
    pub trial: u64,
    pub plurality_position: f64,
    pub irv_position: f64,
    pub more_moderate: Comparison,
    pub tied: bool,
}

impl CsvRecord for ScatterRow {
    fn header() -> &'static [&'static str] {
        &["k", "trial", "plurality_position", "irv_position", "more_moderate", "tied"]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            self.trial.to_string(),
            fmt_float(self.plurality_position),
            fmt_float(self.irv_position),
            self.more_moderate.as_str().into(),
            self.tied.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSummary {
    pub k: usize,
    pub trials: u64,
    pub ties: u64,
    pub irv_more_moderate: u64,
    pub plurality_more_moderate: u64,
    pub same: u64,
    /// Untied trials where IRV's winner is strictly farther from 1/2.
    pub irv_more_extreme_untied: u64,
    /// Fractions of trials by side of 1/2: (plurality, irv) in
    /// left-left, left-right, right-left, right-right order.
    pub quadrants: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRun {
    pub rows: Vec<ScatterRow>,
    pub summaries: Vec<ScatterSummary>,
}

/// Both rules on the same draw, per k.
pub fn run_scatter(cfg: &ExperimentConfig) -> Result<ScatterRun> {
    cfg.validate()?;
    let d = cfg.distribution()?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &k in &cfg.ks {
        let batch = par_trials(cfg.master_seed, &format!("scatter/k{k}"), cfg.trials, |t, rng| {
            let xs = draw_sorted(&d, k, rng);
            let p = plurality_sorted(&xs, &d, cfg.tie_rule)?;
            let i = irv_sorted(&xs, &d, cfg.tie_rule)?;
            let (pp, ip) = (xs[p.winner], xs[i.winner]);
            Ok(ScatterRow {
                k,
                trial: t,
                plurality_position: pp,
                irv_position: ip,
                more_moderate: Comparison::of(pp, ip),
                tied: p.tied || i.tied,
            })
        });
        let batch: Vec<ScatterRow> = batch.into_iter().collect::<Result<_>>()?;
        let count = |f: &dyn Fn(&ScatterRow) -> bool| batch.iter().filter(|r| f(r)).count() as u64;
        let n = batch.len() as f64;
        let quad = |pl: bool, il: bool| {
            count(&|r| (r.plurality_position < 0.5) == pl && (r.irv_position < 0.5) == il) as f64 / n
        };
        summaries.push(ScatterSummary {
            k,
            trials: cfg.trials,
            ties: count(&|r| r.tied),
            irv_more_moderate: count(&|r| r.more_moderate == Comparison::IrvMoreModerate),
            plurality_more_moderate: count(&|r| r.more_moderate == Comparison::PluralityMoreModerate),
            same: count(&|r| r.more_moderate == Comparison::Same),
            irv_more_extreme_untied: count(&|r| {
                !r.tied && r.more_moderate == Comparison::PluralityMoreModerate
            }),
            quadrants: [quad(true, true), quad(true, false), quad(false, true), quad(false, false)],
        });
        rows.extend(batch);
    }
    Ok(ScatterRun { rows, summaries })
}
