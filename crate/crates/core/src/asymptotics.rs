//! Large-k behaviour under uniform voters: stick-breaking gaps, the Gumbel
//! law of the winning plurality share, the circle/interval coupling and the
//! spread of winner positions.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::dist::VoterDistribution;
use crate::error::{Error, Result};
use crate::seeds::par_trials;
use crate::stats::{ks_one_sample, ks_sorted, mean, median, sort_floats};
use crate::tabulate::{irv_sorted, plurality_sorted, sorted_vote_shares, Rule, TieRule};

const SHARE_SUM_TOL: f64 = 1e-12;

pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Number of gaps cut by k candidates: k + 1.
pub fn gaps_for(k: usize) -> usize {
    k + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingSource {
    #[default]
    SortedUniform,
    Exponential,
}

/// Lengths of the n pieces of [0, 1] cut at n - 1 uniform points.
#[derive(Debug, Clone, PartialEq)]
pub struct StickBreakingSample {
    pub gaps: Vec<f64>,
    /// Unit exponentials behind the gaps, when built that way.
    pub exponentials: Option<Vec<f64>>,
    /// Their sum.
    pub total: Option<f64>,
}

impl StickBreakingSample {
    pub fn uniform_spacings<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let cuts = sorted_uniforms(n - 1, rng);
        let mut gaps = Vec::with_capacity(n);
        let mut prev = 0.0;
        for &c in &cuts {
            gaps.push(c - prev);
            prev = c;
        }
        gaps.push(1.0 - prev);
        Self {
            gaps,
            exponentials: None,
            total: None,
        }
    }

    /// Gaps `X_i / T` for unit exponentials `X_i` with sum `T`.
    pub fn exponential<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let xs: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = xs.iter().sum();
        Self {
            gaps: xs.iter().map(|x| x / total).collect(),
            exponentials: Some(xs),
            total: Some(total),
        }
    }

    pub fn draw<R: Rng + ?Sized>(source: SpacingSource, n: usize, rng: &mut R) -> Self {
        match source {
            SpacingSource::SortedUniform => Self::uniform_spacings(n, rng),
            SpacingSource::Exponential => Self::exponential(n, rng),
        }
    }

    pub fn n(&self) -> usize {
        self.gaps.len()
    }

    pub fn max_gap(&self) -> f64 {
        match (&self.exponentials, self.total) {
            // exact ratio, free of the rounding in the normalized gaps
            (Some(xs), Some(t)) => xs.iter().cloned().fold(0.0, f64::max) / t,
            _ => self.gaps.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// The n - 1 cut points.
    pub fn cut_points(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.gaps[..self.gaps.len() - 1]
            .iter()
            .map(|g| {
                acc += g;
                acc
            })
            .collect()
    }
}

fn sorted_uniforms<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    sort_floats(&mut xs);
    xs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelExperimentResult {
    /// Candidates (share mode) or cut points (max-gap mode).
    pub k: usize,
    /// Gaps: k + 1.
    pub n: usize,
    pub trials: u64,
    #[serde(skip)]
    pub statistics: Vec<f64>,
    pub ks_statistic: f64,
    pub median: f64,
    pub mean: f64,
}

impl GumbelExperimentResult {
    fn from_stats(k: usize, n: usize, mut statistics: Vec<f64>) -> Self {
        let trials = statistics.len() as u64;
        let m = mean(&statistics);
        let med = median(&statistics);
        sort_floats(&mut statistics);
        let ks_statistic = ks_sorted(&statistics, gumbel_cdf);
        Self {
            k,
            n,
            trials,
            statistics,
            ks_statistic,
            median: med,
            mean: m,
        }
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    Ok(())
}

/// `2 n V_k - ln n - ln ln n` for the largest first-round share `V_k` of k
/// uniform candidates under uniform voters, n = k + 1.
///
/// The statistics are returned sorted.
pub fn winning_share_experiment(k: usize, trials: u64, seed: u64) -> Result<GumbelExperimentResult> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("k = {k} must be at least 3")));
    }
    check_trials(trials)?;
    let n = gaps_for(k);
    let nf = n as f64;
    let shift = nf.ln() + nf.ln().ln();
    let uniform = VoterDistribution::uniform();
    let stats = par_trials(seed, "winning_share", trials, |_, rng| {
        let xs = sorted_uniforms(k, rng);
        let shares = sorted_vote_shares(&xs, &uniform);
        let v = shares.iter().cloned().fold(0.0, f64::max);
        assert!(v >= 1.0 / k as f64 - SHARE_SUM_TOL, "largest share {v} below 1/k");
        2.0 * nf * v - shift
    });
    Ok(GumbelExperimentResult::from_stats(k, n, stats))
}

/// `n B_n - ln n` for the largest of n stick-breaking gaps.
pub fn max_gap_experiment(
    n: usize,
    trials: u64,
    seed: u64,
    source: SpacingSource,
) -> Result<GumbelExperimentResult> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    check_trials(trials)?;
    let nf = n as f64;
    let stats = par_trials(seed, "max_gap", trials, |_, rng| {
        let s = StickBreakingSample::draw(source, n, rng);
        nf * s.max_gap() - nf.ln()
    });
    Ok(GumbelExperimentResult::from_stats(n - 1, n, stats))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub k: usize,
    pub trials: u64,
    pub disagreements: u64,
    pub rate: f64,
}

/// Candidate shares on a circle of circumference 1 with the candidates at
/// ascending `xs`: half of each adjacent arc.
pub fn circle_shares(xs: &[f64]) -> Vec<f64> {
    let k = xs.len();
    let wrap = 1.0 - xs[k - 1] + xs[0];
    (0..k)
        .map(|i| {
            let left = if i == 0 { wrap } else { xs[i] - xs[i - 1] };
            let right = if i + 1 == k { wrap } else { xs[i + 1] - xs[i] };
            0.5 * (left + right)
        })
        .collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Fraction of trials in which the plurality winner on the circle differs
/// from the winner on the interval obtained by cutting the circle at 0.
pub fn circle_coupling_experiment(k: usize, trials: u64, seed: u64) -> Result<CouplingResult> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("k = {k} must be at least 3")));
    }
    check_trials(trials)?;
    let uniform = VoterDistribution::uniform();
    let flags = par_trials(seed, "circle_coupling", trials, |_, rng| {
        let xs = sorted_uniforms(k, rng);
        let circle = circle_shares(&xs);
        let line = sorted_vote_shares(&xs, &uniform);
        assert!((circle.iter().sum::<f64>() - 1.0).abs() < SHARE_SUM_TOL);
        // cutting at 0 only moves mass between the two end candidates
        for i in 1..k - 1 {
            assert!((circle[i] - line[i]).abs() < SHARE_SUM_TOL);
        }
        argmax(&circle) != argmax(&line)
    });
    let disagreements = flags.iter().filter(|&&f| f).count() as u64;
    Ok(CouplingResult {
        k,
        trials,
        disagreements,
        rate: disagreements as f64 / trials as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityResult {
    pub rule: Rule,
    pub k: usize,
    pub trials: u64,
    #[serde(skip)]
    pub positions: Vec<f64>,
    /// KS distance to Uniform(0, 1); computed for uniform voters only.
    pub ks_uniform: Option<f64>,
    /// Winners outside [1/6, 5/6].
    pub outside_sixths: u64,
    /// IRV trials with a candidate in [1/6, 5/6] but a winner outside it.
    pub exclusion_violations: u64,
    pub ties: u64,
}

/// Winner positions over random profiles of k candidates drawn from `d`.
pub fn winner_uniformity_experiment(
    rule: Rule,
    k: usize,
    trials: u64,
    d: &VoterDistribution,
    seed: u64,
    tie: TieRule,
) -> Result<UniformityResult> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    check_trials(trials)?;
    let (lo, hi) = (1.0 / 6.0, 5.0 / 6.0);
    let outcomes = par_trials(seed, "winner_uniformity", trials, |_, rng| -> Result<_> {
        let mut xs = d.sample_n(rng, k);
        sort_floats(&mut xs);
        let dec = match rule {
            Rule::Plurality => plurality_sorted(&xs, d, tie)?,
            Rule::Irv => irv_sorted(&xs, d, tie)?,
        };
        let w = xs[dec.winner];
        let moderate_present = xs.iter().any(|&x| (lo..=hi).contains(&x));
        Ok((w, moderate_present, dec.tied))
    });
    let mut positions = Vec::with_capacity(trials as usize);
    let (mut outside, mut violations, mut ties) = (0, 0, 0);
    for o in outcomes {
        let (w, moderate_present, tied) = o?;
        let out = !(lo..=hi).contains(&w);
        outside += out as u64;
        violations += (rule == Rule::Irv && d.is_uniform_equivalent() && moderate_present && out) as u64;
        ties += tied as u64;
        positions.push(w);
    }
    let ks_uniform = d
        .is_uniform_equivalent()
        .then(|| ks_one_sample(&positions, |x| x.clamp(0.0, 1.0)));
    Ok(UniformityResult {
        rule,
        k,
        trials,
        positions,
        ks_uniform,
        outside_sixths: outside,
        exclusion_violations: violations,
        ties,
    })
}

pub(crate) fn draw_sorted<R: Rng + ?Sized>(d: &VoterDistribution, k: usize, rng: &mut R) -> Vec<f64> {
    let mut xs = d.sample_n(rng, k);
    sort_floats(&mut xs);
    xs
}
