//! Exclusion zones for IRV under symmetric voter distributions, and the
//! explicit profiles showing where such guarantees stop.
//!
//! A moderate zone `[c, 1 - c]` is certified by
//! `g(x) = F((x + 1 - c)/2) - F((c + x)/2) > 1/3` for all `x` in `[c, 1/2]`.

use serde::{Deserialize, Serialize};

use crate::dist::{ShapeLabel, VoterDistribution};
use crate::error::{Error, Result};
use crate::tabulate::{sorted_vote_shares, Profile, TIE_TOL};

pub const DEFAULT_GRID_POINTS: usize = 10_000;
pub const CONDITION_MARGIN: f64 = 1e-9;
/// Closed-form bounds make the condition an equality at some x, so they are
/// checked this far inside the bound.
pub const VERIFY_INSET: f64 = 1e-6;
pub const MAX_ADDED_CANDIDATES: usize = 1_000_000;

const SCAN_STEPS: usize = 256;
const DELTA_PROBES: usize = 200;
const MAX_DELTA_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZoneKind {
    /// `[c, 1 - c]`
    ModerateInterval,
    /// `[0, c] ∪ [1 - c, 1]`
    ExtremePair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Moderate,
    Polarized,
    HyperPolarized,
    GeneralNumeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionZone {
    pub c: f64,
    pub kind: ZoneKind,
    pub regime: Regime,
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ExclusionZone {
    pub fn contains(&self, x: f64) -> bool {
        match self.kind {
            ZoneKind::ModerateInterval => x >= self.c && x <= 1.0 - self.c,
            ZoneKind::ExtremePair => x <= self.c || x >= 1.0 - self.c,
        }
    }

    /// Whether the zone's guarantee applies to a profile: some candidate in
    /// `[c, 1 - c]`, or for an extreme pair, candidates on both sides.
    pub fn applies_to(&self, positions: &[f64]) -> bool {
        match self.kind {
            ZoneKind::ModerateInterval => positions.iter().any(|&x| self.contains(x)),
            ZoneKind::ExtremePair => {
                positions.iter().any(|&x| x <= self.c) && positions.iter().any(|&x| x >= 1.0 - self.c)
            }
        }
    }

    /// Re-checks the zone's hypothesis against `d`.
    pub fn verify(&self, d: &VoterDistribution) -> bool {
        match (self.kind, self.regime) {
            (ZoneKind::ExtremePair, _) => d.classify_shape().hyper_polarized,
            (_, Regime::GeneralNumeric) => check_condition(d, self.c, DEFAULT_GRID_POINTS)
                .map(|r| r.holds)
                .unwrap_or(false),
            _ => {
                self.c > VERIFY_INSET
                    && check_condition(d, self.c - VERIFY_INSET, DEFAULT_GRID_POINTS)
                        .map(|r| r.holds)
                        .unwrap_or(false)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub holds: bool,
    /// Minimum of g over the grid.
    pub min_value: f64,
    /// Grid point attaining the minimum.
    pub witness: f64,
}

pub fn check_condition(d: &VoterDistribution, c: f64, grid_points: usize) -> Result<ConditionCheck> {
    check_condition_with_margin(d, c, grid_points, CONDITION_MARGIN)
}

pub fn check_condition_with_margin(
    d: &VoterDistribution,
    c: f64,
    grid_points: usize,
    margin: f64,
) -> Result<ConditionCheck> {
    if !(c > 0.0 && c < 0.5) {
        return Err(Error::InvalidParameter(format!("c = {c} must lie in (0, 1/2)")));
    }
    if grid_points < 2 {
        return Err(Error::InvalidParameter("grid_points must be at least 2".into()));
    }
    let g = |x: f64| d.cdf_unchecked(0.5 * (x + 1.0 - c)) - d.cdf_unchecked(0.5 * (c + x));
    let (mut min_value, mut witness) = (f64::INFINITY, c);
    for i in 0..grid_points {
        let x = if i + 1 == grid_points {
            0.5
        } else {
            c + (0.5 - c) * i as f64 / (grid_points - 1) as f64
        };
        let v = g(x);
        if v < min_value {
            min_value = v;
            witness = x;
        }
    }
    Ok(ConditionCheck {
        holds: min_value > 1.0 / 3.0 + margin,
        min_value,
        witness,
    })
}

/// Largest zone each closed-form regime guarantees.
pub fn zone_closed_form(d: &VoterDistribution) -> Result<ExclusionZone> {
    let shape = d.classify_shape();
    let (c, kind, regime) = if shape.label == ShapeLabel::NonDecreasingOnLeftHalf {
        (d.quantile(1.0 / 6.0)?, ZoneKind::ModerateInterval, Regime::Moderate)
    } else if shape.hyper_polarized {
        (2.0 * d.quantile(1.0 / 3.0)?, ZoneKind::ExtremePair, Regime::HyperPolarized)
    } else if shape.is_nonincreasing() {
        (
            2.0 * (d.quantile(1.0 / 3.0)? - 0.25),
            ZoneKind::ModerateInterval,
            Regime::Polarized,
        )
    } else {
        return Err(Error::UnsupportedRegime(format!(
            "{} is neither monotone on [0, 1/2] nor hyper-polarized",
            d.label()
        )));
    };
    let mut warnings = Vec::new();
    let c = if c <= VERIFY_INSET {
        let msg = format!("zero-width zone for {} (c = {c:.3e})", d.label());
        log::warn!("{msg}");
        warnings.push(msg);
        c.max(0.0)
    } else {
        c
    };
    let mut zone = ExclusionZone {
        c,
        kind,
        regime,
        verified: false,
        warnings,
    };
    zone.verified = zone.verify(d);
    Ok(zone)
}

/// Numerically finds the smallest certified zone `[c, 1 - c]`.
///
/// Scans c downward from 1/2 until the zone condition first holds, then bisects
/// between that point and the failing grid point above it. The returned c
/// always satisfies the check; it is within `tol` of a failing c but, since
/// the valid set need not be an interval, larger valid c may exist.
pub fn min_zone_numeric(d: &VoterDistribution, tol: f64) -> Result<ExclusionZone> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let holds = |c: f64| -> Result<bool> { Ok(check_condition(d, c, DEFAULT_GRID_POINTS)?.holds) };
    let step = 0.5 / SCAN_STEPS as f64;
    let mut bracket = None;
    let mut upper = 0.5;
    for j in (1..SCAN_STEPS).rev() {
        let c = j as f64 * step;
        if holds(c)? {
            bracket = Some((c, upper));
            break;
        }
        upper = c;
    }
    if bracket.is_none() {
        // below the coarse grid, halve toward zero
        let mut c = step / 2.0;
        while c > 1e-12 {
            if holds(c)? {
                bracket = Some((c, upper));
                break;
            }
            upper = c;
            c /= 2.0;
        }
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::NoZone(format!("condition fails for every tested c under {}", d.label()))
    })?;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ExclusionZone {
        c: lo,
        kind: ZoneKind::ModerateInterval,
        regime: Regime::GeneralNumeric,
        verified: true,
        warnings: Vec::new(),
    })
}

/// Adds candidates to `targets` so that the candidate labelled `target`
/// becomes the strict plurality winner under `d`. Original labels are kept;
/// added candidates follow them.
pub fn force_plurality_winner(targets: &Profile, target: usize, d: &VoterDistribution) -> Result<Profile> {
    if target >= targets.len() {
        return Err(Error::InvalidParameter(format!("no candidate labelled {target}")));
    }
    let x1 = targets.position(target);
    if x1 <= 0.0 || x1 >= 1.0 {
        return Err(Error::Unconstructible(format!(
            "target at {x1}: an endpoint candidate can be outvoted by any neighbour"
        )));
    }
    let added = if d.is_uniform_equivalent() {
        uniform_flood(targets, x1)
    } else {
        general_flood(targets, x1, d)?
    };
    let mut all = targets.positions().to_vec();
    all.extend(added);
    Profile::new(all)
}

fn with_endpoints(targets: &Profile) -> Vec<f64> {
    let mut xs = targets.sorted_positions().to_vec();
    let mut extra = Vec::new();
    if xs[0] > 0.0 {
        extra.push(0.0);
    }
    if *xs.last().unwrap() < 1.0 {
        extra.push(1.0);
    }
    xs.extend(&extra);
    xs.sort_by(f64::total_cmp);
    xs
}

/// New points splitting every gap in `xs` (ascending) to width at most `s`.
fn fill_gaps(xs: &[f64], s: f64, out: &mut Vec<f64>) {
    for w in xs.windows(2) {
        let n = ((w[1] - w[0]) / s).ceil() as usize;
        for j in 1..n {
            out.push(w[0] + (w[1] - w[0]) * j as f64 / n as f64);
        }
    }
}

/// Uniform voters: with neighbours at half-gaps v_l, v_r from the target,
/// every gap beyond them is cut to at most min(v_l, v_r)/2, which caps every
/// other share below the target's v_l + v_r.
fn uniform_flood(targets: &Profile, x1: f64) -> Vec<f64> {
    let all = with_endpoints(targets);
    let i = all.iter().position(|&x| x == x1).unwrap();
    let (xl, xr) = (all[i - 1], all[i + 1]);
    let s = 0.5 * (0.5 * (x1 - xl)).min(0.5 * (xr - x1));
    let mut added: Vec<f64> = all.iter().copied().filter(|x| !targets.positions().contains(x)).collect();
    fill_gaps(&all[..i], s, &mut added);
    fill_gaps(&all[i + 1..], s, &mut added);
    added
}

/// General density: bracket the target at distance δ, where the density stays
/// within a quarter of f(x1), then split gaps outside the bracket until their
/// mass is too small for any other candidate to match the target.
fn general_flood(targets: &Profile, x1: f64, d: &VoterDistribution) -> Result<Vec<f64>> {
    let f1 = d.density_unchecked(x1);
    if !(f1 > 0.0 && f1.is_finite()) {
        return Err(Error::Unconstructible(format!("density at target {x1} is {f1}")));
    }
    let nearest = targets
        .sorted_positions()
        .iter()
        .filter(|&&x| x != x1)
        .map(|&x| (x - x1).abs())
        .fold(f64::INFINITY, f64::min);
    let mut delta = 0.5 * x1.min(1.0 - x1).min(nearest);
    let flat = |delta: f64| {
        (0..=DELTA_PROBES).all(|j| {
            let t = -delta + 2.0 * delta * j as f64 / DELTA_PROBES as f64;
            (d.density_unchecked(x1 + t) - f1).abs() < 0.25 * f1
        })
    };
    let mut halvings = 0;
    while !flat(delta) {
        delta *= 0.5;
        halvings += 1;
        if halvings > MAX_DELTA_HALVINGS {
            return Err(Error::Unconstructible(format!("density not continuous at {x1}")));
        }
    }
    let (l, r) = (x1 - delta, x1 + delta);
    let f = |x: f64| d.cdf_unchecked(x);
    let target_share = f(0.5 * (x1 + r)) - f(0.5 * (l + x1));
    // mass each of l and r already collects from the target side
    let inner_l = f(0.5 * (l + x1)) - f(l);
    let inner_r = f(r) - f(0.5 * (x1 + r));
    let slack = (1.0 - 1e-9) * target_share - 2.0 * TIE_TOL;
    let bound = 0.5 * slack;
    let bound_l = bound.min(slack - inner_l);
    let bound_r = bound.min(slack - inner_r);
    if bound_l <= 0.0 || bound_r <= 0.0 {
        return Err(Error::Unconstructible("bracket neighbours cannot be outvoted".into()));
    }

    let mut left: Vec<f64> = with_endpoints(targets).into_iter().filter(|&x| x < x1).collect();
    left.push(l);
    let mut right = vec![r];
    right.extend(with_endpoints(targets).into_iter().filter(|&x| x > x1));

    let mut added: Vec<f64> = [0.0, 1.0]
        .into_iter()
        .filter(|x| !targets.positions().contains(x))
        .chain([l, r])
        .collect();
    let split = |a: f64, b: f64, limit: f64, added: &mut Vec<f64>| -> Result<()> {
        let mut stack = vec![(a, b, limit)];
        while let Some((a, b, lim)) = stack.pop() {
            if f(b) - f(a) < lim {
                continue;
            }
            if added.len() >= MAX_ADDED_CANDIDATES {
                return Err(Error::Unconstructible(format!(
                    "more than {MAX_ADDED_CANDIDATES} candidates needed"
                )));
            }
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                return Err(Error::Unconstructible("gap cannot be split further".into()));
            }
            added.push(m);
            // only the piece touching the bracket keeps the tighter limit
            stack.push((a, m, if b == l { bound } else { lim }));
            stack.push((m, b, if a == r { bound } else { lim }));
        }
        Ok(())
    };
    for w in left.windows(2) {
        split(w[0], w[1], if w[1] == l { bound_l } else { bound }, &mut added)?;
    }
    for w in right.windows(2) {
        split(w[0], w[1], if w[0] == r { bound_r } else { bound }, &mut added)?;
    }
    Ok(added)
}

/// Profile with `c`, `1/2`, `1 - c` and `k - 3` candidates packed into
/// `(1 - eps, 1]`; under uniform voters its IRV winner is an extreme one.
pub fn tightness_profile(c: f64, k: usize, eps: f64) -> Result<Profile> {
    if !(c > 1.0 / 6.0 && c < 0.5) {
        return Err(Error::InvalidParameter(format!("c = {c} must lie in (1/6, 1/2)")));
    }
    if k < 3 {
        return Err(Error::InvalidParameter("k must be at least 3".into()));
    }
    if !(eps > 0.0 && eps < 0.5 * (0.5 - c)) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, (1/2 - c)/2)")));
    }
    let mut xs = vec![c, 0.5, 1.0 - c];
    let extra = k - 3;
    xs.extend((0..extra).map(|j| 1.0 - eps * j as f64 / extra as f64));
    Profile::new(xs)
}

/// Five candidates where IRV picks a more extreme winner than plurality.
pub fn small_k_counterexample() -> Profile {
    Profile::new(vec![0.01, 0.2, 0.5, 0.8, 1.0]).expect("valid profile")
}

/// Share of the target in `p`, and the largest share among the rest.
pub fn target_and_rival_shares(p: &Profile, target: usize, d: &VoterDistribution) -> (f64, f64) {
    let shares = sorted_vote_shares(p.sorted_positions(), d);
    let j = p.sort_permutation().iter().position(|&l| l == target).unwrap();
    let rival = shares
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, s)| *s)
        .fold(0.0, f64::max);
    (shares[j], rival)
}
