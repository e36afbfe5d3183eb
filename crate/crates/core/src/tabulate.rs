//! Continuous-electorate tabulation for plurality and instant runoff, and a
//! sampled-ballot IRV count used as an independent check.
//!
//! With voters distributed by F and candidates at `x_1 < ... < x_k`, candidate
//! i receives `F(m_i) - F(m_{i-1})` where `m_i` is the midpoint between i and
//! its right neighbour (`m_0 = 0`, `m_k = 1`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::VoterDistribution;
use crate::error::{Error, Result};

/// Shares closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Candidate positions, kept both in the caller's labeling and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    original: Vec<f64>,
    sorted: Vec<f64>,
    /// `labels[j]` is the original label of the j-th leftmost candidate.
    labels: Vec<usize>,
}

impl Profile {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidProfile("no candidates".into()));
        }
        if let Some(x) = positions.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidProfile(format!("position {x} outside [0, 1]")));
        }
        let mut labels: Vec<usize> = (0..positions.len()).collect();
        labels.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));
        let sorted: Vec<f64> = labels.iter().map(|&l| positions[l]).collect();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidProfile(format!("duplicate position {}", w[0])));
        }
        Ok(Self {
            original: positions,
            sorted,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Positions in caller order.
    pub fn positions(&self) -> &[f64] {
        &self.original
    }

    /// Positions in ascending order.
    pub fn sorted_positions(&self) -> &[f64] {
        &self.sorted
    }

    /// Sort permutation: entry j is the label of the j-th leftmost candidate.
    pub fn sort_permutation(&self) -> &[usize] {
        &self.labels
    }

    pub fn position(&self, label: usize) -> f64 {
        self.original[label]
    }

    /// Mirror image x -> 1 - x with labels preserved.
    pub fn reflected(&self) -> Profile {
        Profile::new(self.original.iter().map(|x| 1.0 - x).collect())
            .expect("reflection keeps positions distinct and in range")
    }

    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.sorted.iter().filter(|&&x| x >= lo && x <= hi).count()
    }
}

/// Parses a comma-separated list of positions such as `0.2,0.3,0.4,0.85`.
pub fn parse_positions(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| Error::InvalidProfile(format!("bad position `{t}`")))
                .and_then(|x| {
                    if x.is_finite() {
                        Ok(x)
                    } else {
                        Err(Error::InvalidProfile(format!("non-finite position `{t}`")))
                    }
                })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    #[default]
    EliminateLeftmost,
    EliminateRightmost,
    Error,
}

impl TieRule {
    /// The rule that produces the mirror-image outcome on a reflected profile.
    pub fn mirrored(self) -> Self {
        match self {
            TieRule::EliminateLeftmost => TieRule::EliminateRightmost,
            TieRule::EliminateRightmost => TieRule::EliminateLeftmost,
            TieRule::Error => TieRule::Error,
        }
    }
}

impl std::str::FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" | "eliminate-leftmost" => Ok(TieRule::EliminateLeftmost),
            "right" | "eliminate-rightmost" => Ok(TieRule::EliminateRightmost),
            "error" => Ok(TieRule::Error),
            _ => Err(Error::InvalidParameter(format!("unknown tie rule `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Plurality,
    Irv,
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plurality" => Ok(Rule::Plurality),
            "irv" => Ok(Rule::Irv),
            _ => Err(Error::InvalidParameter(format!("unknown rule `{s}`"))),
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rule::Plurality => "plurality",
            Rule::Irv => "irv",
        })
    }
}

/// One tabulation round: surviving labels left to right and their shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub active: Vec<usize>,
    pub shares: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieEvent {
    pub round: usize,
    pub tied: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulationOutcome {
    pub rounds: Vec<Round>,
    pub elimination_order: Vec<usize>,
    pub winner_index: usize,
    pub winner_position: f64,
    pub ties: Vec<TieEvent>,
    /// Smallest share gap behind any decision (IRV: eliminated vs. next
    /// weakest; plurality: winner vs. runner-up). 1 when uncontested.
    pub margin: f64,
    pub sort_permutation: Vec<usize>,
}

impl TabulationOutcome {
    pub fn had_tie(&self) -> bool {
        !self.ties.is_empty()
    }
}

/// Shares of candidates at ascending `sorted` positions.
pub fn sorted_vote_shares(sorted: &[f64], d: &VoterDistribution) -> Vec<f64> {
    let k = sorted.len();
    let mut shares = Vec::with_capacity(k);
    let mut left = 0.0;
    for i in 0..k {
        let right = if i + 1 < k {
            d.cdf_unchecked(0.5 * (sorted[i] + sorted[i + 1]))
        } else {
            1.0
        };
        shares.push(right - left);
        left = right;
    }
    shares
}

/// First-round vote shares, in the profile's original labeling.
pub fn vote_shares(p: &Profile, d: &VoterDistribution) -> Vec<f64> {
    let sorted = sorted_vote_shares(&p.sorted, d);
    let mut out = vec![0.0; p.len()];
    for (j, &label) in p.labels.iter().enumerate() {
        out[label] = sorted[j];
    }
    out
}

/// Indices (into `shares`) within [`TIE_TOL`] of the extreme value.
fn near(shares: &[f64], target: f64) -> Vec<usize> {
    shares
        .iter()
        .enumerate()
        .filter(|(_, s)| (**s - target).abs() <= TIE_TOL)
        .map(|(i, _)| i)
        .collect()
}

/// Winner of a plurality count over ascending positions, as a sorted index.
///
/// Returns `(winner, tied_indices, margin)`; `tied_indices` is empty
/// without a tie.
fn plurality_core(shares: &[f64], tie: TieRule) -> Result<(usize, Vec<usize>, f64)> {
    let max = shares.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tied = near(shares, max);
    let runner_up = shares
        .iter()
        .enumerate()
        .filter(|(i, _)| !tied.contains(i))
        .map(|(_, s)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = if shares.len() == 1 { 1.0 } else if tied.len() > 1 { 0.0 } else { max - runner_up };
    let winner = match (tied.len(), tie) {
        (1, _) => tied[0],
        (_, TieRule::Error) => return Err(Error::Tie { round: 0, tied }),
        (_, TieRule::EliminateLeftmost) => *tied.last().unwrap(),
        (_, TieRule::EliminateRightmost) => tied[0],
    };
    let tied = if tied.len() > 1 { tied } else { Vec::new() };
    Ok((winner, tied, margin))
}

pub fn plurality_winner(p: &Profile, d: &VoterDistribution, tie: TieRule) -> Result<TabulationOutcome> {
    let shares = sorted_vote_shares(&p.sorted, d);
    let (w, tied, margin) = plurality_core(&shares, tie).map_err(|e| relabel_tie(e, p))?;
    let ties = if tied.is_empty() {
        Vec::new()
    } else {
        vec![TieEvent {
            round: 0,
            tied: tied.iter().map(|&j| p.labels[j]).collect(),
        }]
    };
    Ok(TabulationOutcome {
        rounds: vec![Round {
            active: p.labels.clone(),
            shares,
        }],
        elimination_order: Vec::new(),
        winner_index: p.labels[w],
        winner_position: p.sorted[w],
        ties,
        margin,
        sort_permutation: p.labels.clone(),
    })
}

fn relabel_tie(e: Error, p: &Profile) -> Error {
    match e {
        Error::Tie { round, tied } => Error::Tie {
            round,
            tied: tied.iter().map(|&j| p.labels[j]).collect(),
        },
        other => other,
    }
}

/// Lightweight result used by the Monte Carlo drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Index into the ascending positions.
    pub winner: usize,
    pub tied: bool,
    pub margin: f64,
}

pub fn plurality_sorted(sorted: &[f64], d: &VoterDistribution, tie: TieRule) -> Result<Decision> {
    let shares = sorted_vote_shares(sorted, d);
    let (winner, tied, margin) = plurality_core(&shares, tie)?;
    Ok(Decision {
        winner,
        tied: !tied.is_empty(),
        margin,
    })
}

pub fn irv_sorted(sorted: &[f64], d: &VoterDistribution, tie: TieRule) -> Result<Decision> {
    irv_core(sorted, d, tie, None)
}

#[derive(Default)]
struct Trace {
    rounds: Vec<(Vec<usize>, Vec<f64>)>,
    eliminated: Vec<usize>,
    ties: Vec<(usize, Vec<usize>)>,
}

const NONE: usize = usize::MAX;

/// IRV over ascending positions, run to the last survivor.
///
/// Each round's shares are differences of F at the current midpoints. F at a
/// midpoint is cached per adjacent pair; only the pair bridging an eliminated
/// candidate needs a fresh evaluation.
fn irv_core(
    sorted: &[f64],
    d: &VoterDistribution,
    tie: TieRule,
    mut trace: Option<&mut Trace>,
) -> Result<Decision> {
    let k = sorted.len();
    let mut prev: Vec<usize> = (0..k).map(|i| if i == 0 { NONE } else { i - 1 }).collect();
    let mut next: Vec<usize> = (0..k).map(|i| if i + 1 == k { NONE } else { i + 1 }).collect();
    let mut right_cdf: Vec<f64> = (0..k)
        .map(|i| {
            if i + 1 < k {
                d.cdf_unchecked(0.5 * (sorted[i] + sorted[i + 1]))
            } else {
                1.0
            }
        })
        .collect();
    let mut head = 0;
    let mut any_tie = false;
    let mut margin: f64 = 1.0;
    let mut active: Vec<usize> = Vec::with_capacity(k);
    let mut shares: Vec<f64> = Vec::with_capacity(k);

    for round in 0.. {
        active.clear();
        shares.clear();
        let mut i = head;
        while i != NONE {
            let left = if prev[i] == NONE { 0.0 } else { right_cdf[prev[i]] };
            active.push(i);
            shares.push(right_cdf[i] - left);
            i = next[i];
        }
        if let Some(t) = trace.as_deref_mut() {
            t.rounds.push((active.clone(), shares.clone()));
        }
        if active.len() == 1 {
            return Ok(Decision {
                winner: active[0],
                tied: any_tie,
                margin,
            });
        }

        let min = shares.iter().cloned().fold(f64::INFINITY, f64::min);
        let tied = near(&shares, min);
        let runner = shares
            .iter()
            .enumerate()
            .filter(|(j, _)| !tied.contains(j))
            .map(|(_, s)| *s)
            .fold(f64::INFINITY, f64::min);
        if tied.len() > 1 {
            any_tie = true;
            margin = 0.0;
            let labels: Vec<usize> = tied.iter().map(|&j| active[j]).collect();
            if let Some(t) = trace.as_deref_mut() {
                t.ties.push((round, labels.clone()));
            }
            if tie == TieRule::Error {
                return Err(Error::Tie { round, tied: labels });
            }
        } else if runner.is_finite() {
            margin = margin.min(runner - min);
        }
        let out = match tie {
            TieRule::EliminateRightmost => active[*tied.last().unwrap()],
            _ => active[tied[0]],
        };
        if let Some(t) = trace.as_deref_mut() {
            t.eliminated.push(out);
        }

        let (p, n) = (prev[out], next[out]);
        if p != NONE {
            next[p] = n;
            right_cdf[p] = if n != NONE {
                d.cdf_unchecked(0.5 * (sorted[p] + sorted[n]))
            } else {
                1.0
            };
        } else {
            head = n;
        }
        if n != NONE {
            prev[n] = p;
        }
    }
    unreachable!()
}

/// Instant runoff with a full round-by-round trace.
pub fn irv_winner(p: &Profile, d: &VoterDistribution, tie: TieRule) -> Result<TabulationOutcome> {
    let mut trace = Trace::default();
    let decision = irv_core(&p.sorted, d, tie, Some(&mut trace)).map_err(|e| relabel_tie(e, p))?;
    let lab = |j: usize| p.labels[j];
    Ok(TabulationOutcome {
        rounds: trace
            .rounds
            .into_iter()
            .map(|(active, shares)| Round {
                active: active.into_iter().map(lab).collect(),
                shares,
            })
            .collect(),
        elimination_order: trace.eliminated.into_iter().map(lab).collect(),
        winner_index: lab(decision.winner),
        winner_position: p.sorted[decision.winner],
        ties: trace
            .ties
            .into_iter()
            .map(|(round, tied)| TieEvent {
                round,
                tied: tied.into_iter().map(lab).collect(),
            })
            .collect(),
        margin: decision.margin,
        sort_permutation: p.labels.clone(),
    })
}

pub fn tabulate(rule: Rule, p: &Profile, d: &VoterDistribution, tie: TieRule) -> Result<TabulationOutcome> {
    match rule {
        Rule::Plurality => plurality_winner(p, d, tie),
        Rule::Irv => irv_winner(p, d, tie),
    }
}

/// Candidate labels ordered by distance from `voter`; equidistant
/// candidates are ordered left first.
pub fn rank_candidates(voter: f64, p: &Profile) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        (voter - p.sorted[a])
            .abs()
            .total_cmp(&(voter - p.sorted[b]).abs())
    });
    order.into_iter().map(|j| p.labels[j]).collect()
}

/// A multiset of complete rankings.
#[derive(Debug, Clone, PartialEq)]
pub struct BallotSet {
    n_candidates: usize,
    /// Labels left to right; drives the positional tie rules.
    left_to_right: Vec<usize>,
    ballots: Vec<(Vec<usize>, u64)>,
}

impl BallotSet {
    /// Ballots over labels `0..n_candidates`, taken to be in left-to-right
    /// order for tie breaking.
    pub fn new(n_candidates: usize, ballots: Vec<(Vec<usize>, u64)>) -> Result<Self> {
        Self::with_order(n_candidates, (0..n_candidates).collect(), ballots)
    }

    pub fn with_order(
        n_candidates: usize,
        left_to_right: Vec<usize>,
        ballots: Vec<(Vec<usize>, u64)>,
    ) -> Result<Self> {
        let is_perm = |v: &[usize]| {
            let mut seen = vec![false; n_candidates];
            v.len() == n_candidates
                && v.iter().all(|&c| c < n_candidates && !std::mem::replace(&mut seen[c], true))
        };
        if n_candidates == 0 || !is_perm(&left_to_right) {
            return Err(Error::InvalidProfile("bad candidate ordering".into()));
        }
        if ballots.iter().all(|(_, n)| *n == 0) {
            return Err(Error::InvalidProfile("no ballots".into()));
        }
        if let Some((r, _)) = ballots.iter().find(|(r, _)| !is_perm(r)) {
            return Err(Error::InvalidProfile(format!("ballot {r:?} is not a full ranking")));
        }
        Ok(Self {
            n_candidates,
            left_to_right,
            ballots,
        })
    }

    pub fn ballots(&self) -> &[(Vec<usize>, u64)] {
        &self.ballots
    }

    pub fn total(&self) -> u64 {
        self.ballots.iter().map(|(_, n)| n).sum()
    }

    /// First-preference counts per label.
    pub fn first_preferences(&self) -> Vec<u64> {
        let mut c = vec![0; self.n_candidates];
        for (r, n) in &self.ballots {
            c[r[0]] += n;
        }
        c
    }
}

/// Draws `n_voters` voters from `d` and records each one's proximity ranking.
///
/// In one dimension a voter's ranking only changes when crossing a pairwise
/// midpoint, so voters are classified by comparing their uniform draw with F
/// at the sorted midpoints (exactly equivalent to inverse-transform sampling
/// followed by ranking) and each cell's ranking is computed once.
pub fn sample_ballots<R: Rng + ?Sized>(
    p: &Profile,
    d: &VoterDistribution,
    n_voters: u64,
    rng: &mut R,
) -> Result<BallotSet> {
    if n_voters == 0 {
        return Err(Error::InvalidParameter("n_voters must be positive".into()));
    }
    let xs = &p.sorted;
    let mut cuts: Vec<f64> = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            cuts.push(0.5 * (xs[i] + xs[j]));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let thresholds: Vec<f64> = cuts.iter().map(|&c| d.cdf_unchecked(c)).collect();

    let mut counts = vec![0u64; cuts.len() + 1];
    for _ in 0..n_voters {
        let u: f64 = rng.random();
        counts[thresholds.partition_point(|&t| t < u)] += 1;
    }

    let ballots = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(c, &n)| {
            let lo = if c == 0 { 0.0 } else { cuts[c - 1] };
            let hi = if c == cuts.len() { 1.0 } else { cuts[c] };
            (rank_candidates(0.5 * (lo + hi), p), n)
        })
        .collect();
    BallotSet::with_order(p.len(), p.labels.clone(), ballots)
}

/// Standard instant runoff on ranked ballots; returns the winning label.
pub fn irv_discrete(ballots: &BallotSet, tie: TieRule) -> Result<usize> {
    let n = ballots.n_candidates;
    let mut alive = vec![true; n];
    let mut remaining = n;
    let mut round = 0;
    while remaining > 1 {
        let mut counts = vec![0u64; n];
        for (ranking, c) in &ballots.ballots {
            if let Some(&top) = ranking.iter().find(|&&x| alive[x]) {
                counts[top] += c;
            }
        }
        let min = (0..n).filter(|&c| alive[c]).map(|c| counts[c]).min().unwrap();
        // tied candidates in left-to-right order
        let tied: Vec<usize> = ballots
            .left_to_right
            .iter()
            .copied()
            .filter(|&c| alive[c] && counts[c] == min)
            .collect();
        let out = match (tied.len(), tie) {
            (1, _) => tied[0],
            (_, TieRule::Error) => return Err(Error::Tie { round, tied }),
            (_, TieRule::EliminateLeftmost) => tied[0],
            (_, TieRule::EliminateRightmost) => *tied.last().unwrap(),
        };
        alive[out] = false;
        remaining -= 1;
        round += 1;
    }
    Ok(alive.iter().position(|&a| a).unwrap())
}
