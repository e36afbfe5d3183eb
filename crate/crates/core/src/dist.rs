//! Symmetric voter and candidate distributions on [0, 1].
//!
//! Every distribution exposes density, cdf, quantile and inverse-transform
//! sampling. Only distributions symmetric about 1/2 can be constructed; the
//! cdf and quantile are evaluated on the left half and mirrored, so
//! `cdf(x) + cdf(1 - x) == 1` holds to rounding.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::special::{beta_reg_cf, ln_beta};

/// Bisection steps taken from [0, 1] before Newton refinement.
const BISECTION_STEPS: usize = 40;
/// Resolution of the cached quantile table used by the sampler.
const SAMPLER_TABLE_SIZE: usize = 1024;
/// Relative tolerance on symmetry of tabulated input.
const TABLE_SYMMETRY_TOL: f64 = 1e-9;
/// Slope tolerance when classifying tabulated densities.
const SHAPE_SLOPE_TOL: f64 = 1e-9;
const QUARTER_MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DistKind {
    Uniform,
    SymmetricBeta { alpha: f64 },
    Tabulated { grid: Vec<f64>, densities: Vec<f64> },
}

/// A symmetric distribution on [0, 1].
///
/// Immutable after construction and shareable across threads. The sampler's
/// quantile table is built lazily on first use.
#[derive(Debug, Clone)]
pub struct VoterDistribution {
    kind: DistKind,
    /// ln B(alpha, alpha) for Beta, raw table mass for tabulated, 1 otherwise.
    norm: f64,
    table: Option<PiecewiseLinear>,
    sampler_table: OnceLock<Vec<f64>>,
}

/// Normalized piecewise-linear density with node cdf values.
#[derive(Debug, Clone)]
struct PiecewiseLinear {
    xs: Vec<f64>,
    ds: Vec<f64>,
    cum: Vec<f64>,
}

impl PiecewiseLinear {
    fn cell(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&g| g <= x);
        i.saturating_sub(1).min(self.xs.len() - 2)
    }

    fn density(&self, x: f64) -> f64 {
        let i = self.cell(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        self.ds[i] + t * (self.ds[i + 1] - self.ds[i])
    }

    fn cdf(&self, x: f64) -> f64 {
        let i = self.cell(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = x - self.xs[i];
        let slope = (self.ds[i + 1] - self.ds[i]) / h;
        self.cum[i] + self.ds[i] * t + 0.5 * slope * t * t
    }
}

impl VoterDistribution {
    pub fn uniform() -> Self {
        Self::from_parts(DistKind::Uniform, 1.0, None)
    }

    /// Beta(alpha, alpha).
    pub fn symmetric_beta(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "beta shape must be a positive finite number, got {alpha}"
            )));
        }
        Ok(Self::from_parts(
            DistKind::SymmetricBeta { alpha },
            ln_beta(alpha, alpha),
            None,
        ))
    }

    /// Piecewise-linear density through `(grid[i], densities[i])`,
    /// renormalized to unit mass.
    ///
    /// The grid must start at 0, end at 1, be strictly increasing and be
    /// mirror-symmetric together with the densities. Interior zeros are
    /// accepted with a warning.
    pub fn tabulated(grid: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        if grid.len() < 2 || grid.len() != densities.len() {
            return bad(format!(
                "table needs at least two rows and matching columns (got {} x, {} density)",
                grid.len(),
                densities.len()
            ));
        }
        if grid.iter().chain(&densities).any(|v| !v.is_finite()) {
            return bad("table contains non-finite values".into());
        }
        if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
            return bad("table grid must start at 0 and end at 1".into());
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("table grid must be strictly increasing".into());
        }
        if densities.iter().any(|&d| d < 0.0) {
            return bad("table densities must be nonnegative".into());
        }
        let m = grid.len();
        let d_max = densities.iter().cloned().fold(0.0, f64::max);
        for i in 0..m {
            let j = m - 1 - i;
            if (grid[i] + grid[j] - 1.0).abs() > TABLE_SYMMETRY_TOL
                || (densities[i] - densities[j]).abs() > TABLE_SYMMETRY_TOL * d_max.max(1.0)
            {
                return bad(format!(
                    "table is not symmetric about 1/2 (rows {i} and {j} differ)"
                ));
            }
        }
        let mass: f64 = grid
            .windows(2)
            .zip(densities.windows(2))
            .map(|(x, d)| 0.5 * (x[1] - x[0]) * (d[0] + d[1]))
            .sum();
        if mass <= 0.0 {
            return bad("table has zero total mass".into());
        }
        let ds: Vec<f64> = densities.iter().map(|d| d / mass).collect();
        let mut cum = Vec::with_capacity(m);
        cum.push(0.0);
        for i in 1..m {
            let step = 0.5 * (grid[i] - grid[i - 1]) * (ds[i - 1] + ds[i]);
            cum.push(cum[i - 1] + step);
        }
        let table = PiecewiseLinear { xs: grid.clone(), ds, cum };
        let dist = Self::from_parts(DistKind::Tabulated { grid, densities }, mass, Some(table));
        if dist.has_interior_zeros() {
            log::warn!("tabulated density has interior zeros; plurality constructions may fail");
        }
        Ok(dist)
    }

    /// Parses a `x,density` CSV table (with header) into a tabulated
    /// distribution.
    pub fn from_table_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "density" {
            return Err(Error::InvalidDistribution(format!(
                "table header must be `x,density`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut grid = Vec::new();
        let mut densities = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::InvalidDistribution(format!(
                    "row {} has {} fields",
                    line + 2,
                    record.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| {
                    Error::InvalidDistribution(format!("row {}: `{s}`: {e}", line + 2))
                })
            };
            grid.push(parse(&record[0])?);
            densities.push(parse(&record[1])?);
        }
        Self::tabulated(grid, densities)
    }

    pub fn from_table_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_table_csv(std::io::BufReader::new(file))
    }

    fn from_parts(kind: DistKind, norm: f64, table: Option<PiecewiseLinear>) -> Self {
        Self {
            kind,
            norm,
            table,
            sampler_table: OnceLock::new(),
        }
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    /// Normalization constant: ln B(a, a) for Beta, the raw table mass for
    /// tabulated input, 1 for uniform.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Short label, e.g. `uniform` or `beta:0.5`.
    pub fn label(&self) -> String {
        match &self.kind {
            DistKind::Uniform => "uniform".into(),
            DistKind::SymmetricBeta { alpha } => format!("beta:{alpha}"),
            DistKind::Tabulated { grid, .. } => format!("table({} rows)", grid.len()),
        }
    }

    /// Beta(1, 1) is evaluated exactly as the uniform.
    fn is_uniform(&self) -> bool {
        match self.kind {
            DistKind::Uniform => true,
            DistKind::SymmetricBeta { alpha } => alpha == 1.0,
            DistKind::Tabulated { .. } => false,
        }
    }

    pub fn is_uniform_equivalent(&self) -> bool {
        self.is_uniform()
    }

    pub fn has_interior_zeros(&self) -> bool {
        match &self.table {
            Some(t) => t.ds[1..t.ds.len() - 1].contains(&0.0),
            None => false,
        }
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.density_unchecked(x))
    }

    pub(crate) fn density_unchecked(&self, x: f64) -> f64 {
        if self.is_uniform() {
            return 1.0;
        }
        match (&self.kind, &self.table) {
            (DistKind::SymmetricBeta { alpha }, _) => {
                let a = *alpha;
                ((a - 1.0) * (x.ln() + (1.0 - x).ln()) - self.norm).exp()
            }
            (_, Some(t)) => t.density(x.min(1.0 - x)),
            _ => unreachable!("tabulated distribution without table"),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.cdf_unchecked(x))
    }

    /// cdf for x already known to lie in [0, 1].
    pub(crate) fn cdf_unchecked(&self, x: f64) -> f64 {
        if self.is_uniform() {
            return x;
        }
        if x > 0.5 {
            1.0 - self.cdf_left(1.0 - x)
        } else if x == 0.5 {
            0.5
        } else {
            self.cdf_left(x)
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match (&self.kind, &self.table) {
            (DistKind::SymmetricBeta { alpha }, _) => beta_reg_cf(*alpha, *alpha, x, self.norm),
            (_, Some(t)) => t.cdf(x),
            _ => unreachable!("uniform handled by caller"),
        }
    }

    /// Smallest x with F(x) >= p.
    ///
    /// Bisects from [0, 1] for a fixed number of steps, then polishes with
    /// Newton steps kept inside the bisection bracket.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_unit(p)?;
        if self.is_uniform() {
            return Ok(p);
        }
        Ok(self.mirrored_quantile(p, |d, q| d.quantile_left_bisect(q)))
    }

    fn mirrored_quantile(&self, p: f64, left: impl Fn(&Self, f64) -> f64) -> f64 {
        if p > 0.5 {
            1.0 - left(self, 1.0 - p)
        } else if p == 0.5 {
            0.5
        } else {
            left(self, p)
        }
    }

    fn quantile_left_bisect(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.cdf_unchecked(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.newton_in_bracket(p, lo, hi, 0.5 * (lo + hi))
    }

    /// Newton iteration on F(x) = p safeguarded by the bracket [lo, hi].
    fn newton_in_bracket(&self, p: f64, mut lo: f64, mut hi: f64, start: f64) -> f64 {
        let mut x = start;
        for _ in 0..200 {
            let fx = self.cdf_unchecked(x) - p;
            if fx == 0.0 {
                return x;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
            let step = fx / self.density_unchecked(x);
            let next = x - step;
            if next.is_finite() && next > lo && next < hi {
                if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs() {
                    return next;
                }
                x = next;
            } else {
                x = 0.5 * (lo + hi);
            }
        }
        // closest bracket end in probability
        if (self.cdf_unchecked(hi) - p).abs() <= (self.cdf_unchecked(lo) - p).abs() {
            hi
        } else {
            lo
        }
    }

    /// Quantile used by the sampler: brackets from a cached table of exact
    /// quantiles, then runs the same safeguarded Newton polish.
    pub(crate) fn quantile_fast(&self, p: f64) -> f64 {
        if self.is_uniform() {
            return p;
        }
        self.mirrored_quantile(p, |d, q| d.quantile_left_table(q))
    }

    fn quantile_left_table(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        let table = self.sampler_table.get_or_init(|| {
            (0..=SAMPLER_TABLE_SIZE / 2)
                .map(|j| self.quantile_left_bisect(j as f64 / SAMPLER_TABLE_SIZE as f64))
                .collect()
        });
        let scaled = p * SAMPLER_TABLE_SIZE as f64;
        let j = (scaled as usize).min(SAMPLER_TABLE_SIZE / 2 - 1);
        let (lo, hi) = (table[j], table[j + 1]);
        let frac = (scaled - j as f64).clamp(0.0, 1.0);
        self.newton_in_bracket(p, lo, hi, lo + frac * (hi - lo))
    }

    /// Inverse-transform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile_fast(u)
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// Monotonicity of the density on [0, 1/2] and the hyper-polarization
    /// test F(1/4) > 1/3.
    pub fn classify_shape(&self) -> ShapeClass {
        let quarter = self.cdf_unchecked(0.25);
        let hyper_polarized = quarter > 1.0 / 3.0 + QUARTER_MASS_TOL;
        let (nondecreasing, nonincreasing) = match (&self.kind, &self.table) {
            _ if self.is_uniform() => (true, true),
            (DistKind::SymmetricBeta { alpha }, _) => (*alpha > 1.0, *alpha < 1.0),
            (_, Some(t)) => {
                let mut vals: Vec<f64> = t
                    .xs
                    .iter()
                    .zip(&t.ds)
                    .take_while(|(x, _)| **x < 0.5)
                    .map(|(_, d)| *d)
                    .collect();
                vals.push(t.density(0.5));
                let nondec = vals.windows(2).all(|w| w[1] - w[0] >= -SHAPE_SLOPE_TOL);
                let noninc = vals.windows(2).all(|w| w[1] - w[0] <= SHAPE_SLOPE_TOL);
                (nondec, noninc)
            }
            _ => unreachable!(),
        };
        let label = if nondecreasing {
            ShapeLabel::NonDecreasingOnLeftHalf
        } else if nonincreasing {
            ShapeLabel::NonIncreasingOnLeftHalf
        } else {
            ShapeLabel::Neither
        };
        ShapeClass {
            label,
            also_nonincreasing: nondecreasing && nonincreasing,
            hyper_polarized,
            cdf_at_quarter: quarter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeLabel {
    NonDecreasingOnLeftHalf,
    NonIncreasingOnLeftHalf,
    Neither,
}

/// Shape of a symmetric density over [0, 1/2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeClass {
    pub label: ShapeLabel,
    /// Set only for flat densities, which are monotone both ways.
    pub also_nonincreasing: bool,
    pub hyper_polarized: bool,
    pub cdf_at_quarter: f64,
}

impl ShapeClass {
    pub fn is_nonincreasing(&self) -> bool {
        self.label == ShapeLabel::NonIncreasingOnLeftHalf || self.also_nonincreasing
    }
}

/// Distribution as written on the command line: `uniform`, `beta:<alpha>`
/// or `table:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Uniform,
    Beta(f64),
    Table(PathBuf),
}

impl FromStr for DistSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("uniform") {
            return Ok(DistSpec::Uniform);
        }
        match s.split_once(':') {
            Some((kind, rest)) if kind.eq_ignore_ascii_case("beta") => {
                let alpha: f64 = rest.trim().parse().map_err(|_| {
                    Error::InvalidDistribution(format!("bad beta shape `{rest}`"))
                })?;
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "beta shape must be positive, got {alpha}"
                    )));
                }
                Ok(DistSpec::Beta(alpha))
            }
            Some((kind, rest)) if kind.eq_ignore_ascii_case("table") && !rest.is_empty() => {
                Ok(DistSpec::Table(PathBuf::from(rest)))
            }
            _ => Err(Error::InvalidDistribution(format!(
                "expected `uniform`, `beta:<alpha>` or `table:<path>`, got `{s}`"
            ))),
        }
    }
}

impl std::fmt::Display for DistSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistSpec::Uniform => write!(f, "uniform"),
            DistSpec::Beta(a) => write!(f, "beta:{a}"),
            DistSpec::Table(p) => write!(f, "table:{}", p.display()),
        }
    }
}

impl DistSpec {
    pub fn build(&self) -> Result<VoterDistribution> {
        match self {
            DistSpec::Uniform => Ok(VoterDistribution::uniform()),
            DistSpec::Beta(a) => VoterDistribution::symmetric_beta(*a),
            DistSpec::Table(p) => VoterDistribution::from_table_path(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_from_seed;
    use crate::stats::ks_one_sample;
    use proptest::prelude::*;
    use rand::Rng;

    /// Root of 3x^2 - 2x^3 = 1/6 on (0, 1/2) by plain bisection on the
    /// closed-form Beta(2,2) cdf (mpmath: 0.259149014744314677364...).
    fn beta22_sixth_root() -> f64 {
        let f = |x: f64| 3.0 * x * x - 2.0 * x * x * x - 1.0 / 6.0;
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    fn builtins() -> Vec<VoterDistribution> {
        let mut v = vec![VoterDistribution::uniform()];
        for a in [0.3, 0.5, 0.8, 1.0, 2.0, 5.0] {
            v.push(VoterDistribution::symmetric_beta(a).unwrap());
        }
        v.push(tent());
        v
    }

    /// Density 4x on [0, 1/2], mirrored.
    fn tent() -> VoterDistribution {
        VoterDistribution::tabulated(vec![0.0, 0.5, 1.0], vec![0.0, 2.0, 0.0]).unwrap()
    }

    #[test]
    fn cdf_examples() {
        let u = VoterDistribution::uniform();
        assert_eq!(u.cdf(0.3).unwrap(), 0.3);
        let arcsine = VoterDistribution::symmetric_beta(0.5).unwrap();
        assert!((arcsine.cdf(0.25).unwrap() - 1.0 / 3.0).abs() < 1e-13);
        let b2 = VoterDistribution::symmetric_beta(2.0).unwrap();
        assert_eq!(b2.cdf(0.5).unwrap(), 0.5);
    }

    #[test]
    fn cdf_domain_error() {
        let u = VoterDistribution::uniform();
        assert!(matches!(u.cdf(1.5), Err(Error::Domain { .. })));
        assert!(matches!(u.cdf(-0.1), Err(Error::Domain { .. })));
        assert!(u.quantile(1.1).is_err());
    }

    #[test]
    fn quantile_examples() {
        let u = VoterDistribution::uniform();
        assert_eq!(u.quantile(1.0 / 6.0).unwrap(), 1.0 / 6.0);
        let arcsine = VoterDistribution::symmetric_beta(0.5).unwrap();
        assert!((arcsine.quantile(1.0 / 3.0).unwrap() - 0.25).abs() < 1e-12);
        let b2 = VoterDistribution::symmetric_beta(2.0).unwrap();
        let oracle = beta22_sixth_root();
        assert!((oracle - 0.259_149_014_744_314_7).abs() < 1e-15);
        assert!((b2.quantile(1.0 / 6.0).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn quantile_hits_probability() {
        for d in builtins() {
            for i in 0..=100 {
                let p = i as f64 / 100.0;
                let x = d.quantile(p).unwrap();
                assert!((d.cdf(x).unwrap() - p).abs() <= 1e-10, "{} p={p}", d.label());
            }
        }
    }

    #[test]
    fn fast_quantile_matches_bisection_path() {
        for d in builtins() {
            for i in 0..=1000 {
                let p = i as f64 / 1000.0;
                let a = d.quantile(p).unwrap();
                let b = d.quantile_fast(p);
                assert!((a - b).abs() < 1e-10, "{} p={p}: {a} vs {b}", d.label());
            }
        }
    }

    #[test]
    fn symmetry_on_grid() {
        for d in builtins() {
            for i in 0..=10_000 {
                let x = i as f64 / 10_000.0;
                let s = d.cdf(x).unwrap() + d.cdf(1.0 - x).unwrap() - 1.0;
                assert!(s.abs() <= 1e-10, "{} x={x}", d.label());
                let dx = d.density(x).unwrap();
                let dm = d.density(1.0 - x).unwrap();
                assert!(dx == dm || (dx - dm).abs() <= 1e-9 * dx.abs().max(1.0));
            }
            assert!(d.cdf(0.0).unwrap().abs() <= 1e-12);
            assert!((d.cdf(1.0).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn cdf_nondecreasing() {
        for d in builtins() {
            let mut prev = 0.0;
            for i in 0..=10_000 {
                let f = d.cdf(i as f64 / 10_000.0).unwrap();
                assert!(f >= prev, "{}", d.label());
                prev = f;
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        // Beta(5,5) density vanishes to fourth order at the ends, so the
        // round trip is checked on a narrower window there.
        for d in builtins() {
            let (lo, hi) = match d.kind() {
                DistKind::SymmetricBeta { alpha } if *alpha > 2.0 => (0.02, 0.98),
                _ => (0.001, 0.999),
            };
            for i in 0..=2000 {
                let x = lo + (hi - lo) * i as f64 / 2000.0;
                let back = d.quantile(d.cdf(x).unwrap()).unwrap();
                assert!((back - x).abs() <= 1e-9, "{} x={x} back={back}", d.label());
                let p = x;
                let again = d.cdf(d.quantile(p).unwrap()).unwrap();
                assert!((again - p).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn beta_one_is_uniform() {
        let b1 = VoterDistribution::symmetric_beta(1.0).unwrap();
        let u = VoterDistribution::uniform();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert!((b1.cdf(x).unwrap() - u.cdf(x).unwrap()).abs() <= 1e-12);
            assert!((b1.quantile(x).unwrap() - u.quantile(x).unwrap()).abs() <= 1e-12);
            assert!((b1.density(x).unwrap() - u.density(x).unwrap()).abs() <= 1e-12);
        }
        let mut r1 = rng_from_seed(99);
        let mut r2 = rng_from_seed(99);
        assert_eq!(b1.sample_n(&mut r1, 1000), u.sample_n(&mut r2, 1000));
    }

    #[test]
    fn uniform_sample_is_the_draw() {
        let mut r1 = rng_from_seed(5);
        let mut r2 = rng_from_seed(5);
        let u: f64 = r2.random();
        assert_eq!(VoterDistribution::uniform().sample(&mut r1), u);
    }

    #[test]
    fn beta_two_sample_mean() {
        // sd of the mean is sqrt(1/20 / 1e6) ~ 2.2e-4; 0.001 is ~4.5 sd.
        let d = VoterDistribution::symmetric_beta(2.0).unwrap();
        let mut rng = rng_from_seed(2024);
        let n = 1_000_000;
        let m = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((m - 0.5).abs() < 0.001, "mean {m}");
    }

    #[test]
    fn ks_of_samples() {
        for (i, d) in builtins().into_iter().enumerate() {
            let mut rng = rng_from_seed(1000 + i as u64);
            let xs = d.sample_n(&mut rng, 100_000);
            let ks = ks_one_sample(&xs, |x| d.cdf(x).unwrap());
            assert!(ks <= 0.01, "{} ks={ks}", d.label());
        }
    }

    #[test]
    fn classify_examples() {
        let s = VoterDistribution::symmetric_beta(2.0).unwrap().classify_shape();
        assert_eq!(s.label, ShapeLabel::NonDecreasingOnLeftHalf);
        assert!(!s.hyper_polarized);
        assert!((s.cdf_at_quarter - 5.0 / 32.0).abs() < 1e-14);

        let s = VoterDistribution::symmetric_beta(1.0).unwrap().classify_shape();
        assert_eq!(s.label, ShapeLabel::NonDecreasingOnLeftHalf);
        assert!(s.also_nonincreasing);
        assert!(!s.hyper_polarized);

        let s = VoterDistribution::symmetric_beta(0.3).unwrap().classify_shape();
        assert_eq!(s.label, ShapeLabel::NonIncreasingOnLeftHalf);
        assert!(s.hyper_polarized);

        // Beta(1/2,1/2) sits exactly on F(1/4) = 1/3.
        let s = VoterDistribution::symmetric_beta(0.5).unwrap().classify_shape();
        assert!(!s.hyper_polarized);
    }

    #[test]
    fn classify_tabulated() {
        assert_eq!(tent().classify_shape().label, ShapeLabel::NonDecreasingOnLeftHalf);
        let valley =
            VoterDistribution::tabulated(vec![0.0, 0.5, 1.0], vec![2.0, 0.5, 2.0]).unwrap();
        assert_eq!(valley.classify_shape().label, ShapeLabel::NonIncreasingOnLeftHalf);
        let bumpy = VoterDistribution::tabulated(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![1.0, 2.0, 1.0, 2.0, 1.0],
        )
        .unwrap();
        assert_eq!(bumpy.classify_shape().label, ShapeLabel::Neither);
        let flat = VoterDistribution::tabulated(vec![0.0, 0.3, 0.7, 1.0], vec![3.0; 4]).unwrap();
        let s = flat.classify_shape();
        assert!(s.also_nonincreasing);
        assert!((flat.cdf(0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn tabulated_tent_cdf() {
        let t = tent();
        // F(x) = 2x^2 on [0, 1/2]
        for i in 0..=50 {
            let x = i as f64 / 100.0;
            assert!((t.cdf(x).unwrap() - 2.0 * x * x).abs() < 1e-15);
        }
        assert_eq!(t.normalization(), 1.0);
    }

    #[test]
    fn tabulated_validation() {
        let asym = VoterDistribution::tabulated(vec![0.0, 0.5, 1.0], vec![1.0, 1.0, 2.0]);
        assert!(matches!(asym, Err(Error::InvalidDistribution(_))));
        let gap = VoterDistribution::tabulated(vec![0.0, 0.9], vec![1.0, 1.0]);
        assert!(gap.is_err());
        let unsorted = VoterDistribution::tabulated(vec![0.0, 0.6, 0.4, 1.0], vec![1.0; 4]);
        assert!(unsorted.is_err());
        let negative = VoterDistribution::tabulated(vec![0.0, 0.5, 1.0], vec![1.0, -1.0, 1.0]);
        assert!(negative.is_err());
        let zero = VoterDistribution::tabulated(vec![0.0, 1.0], vec![0.0, 0.0]);
        assert!(zero.is_err());
        let holes = VoterDistribution::tabulated(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![1.0, 0.0, 1.0, 0.0, 1.0],
        )
        .unwrap();
        assert!(holes.has_interior_zeros());
    }

    #[test]
    fn table_csv_parsing() {
        let text = "x,density\n0,1\n0.5,1\n1,1\n";
        let d = VoterDistribution::from_table_csv(text.as_bytes()).unwrap();
        assert!((d.cdf(0.25).unwrap() - 0.25).abs() < 1e-15);
        let bad_header = "pos,dens\n0,1\n1,1\n";
        assert!(VoterDistribution::from_table_csv(bad_header.as_bytes()).is_err());
        let bad_number = "x,density\n0,one\n1,1\n";
        assert!(VoterDistribution::from_table_csv(bad_number.as_bytes()).is_err());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("uniform".parse::<DistSpec>().unwrap(), DistSpec::Uniform);
        assert_eq!("beta:0.5".parse::<DistSpec>().unwrap(), DistSpec::Beta(0.5));
        assert_eq!(
            "table:/tmp/x.csv".parse::<DistSpec>().unwrap(),
            DistSpec::Table("/tmp/x.csv".into())
        );
        for bad in ["", "beta:", "beta:-1", "beta:nan", "gauss", "table:"] {
            assert!(bad.parse::<DistSpec>().is_err(), "{bad}");
        }
        assert_eq!(DistSpec::Beta(2.0).to_string(), "beta:2");
    }

    proptest! {
        #[test]
        fn beta_cdf_symmetric(alpha in 0.2f64..8.0, x in 0.0f64..1.0) {
            let d = VoterDistribution::symmetric_beta(alpha).unwrap();
            prop_assert!((d.cdf(x).unwrap() + d.cdf(1.0 - x).unwrap() - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn beta_quantile_inverts(alpha in 0.2f64..4.0, p in 0.001f64..0.999) {
            let d = VoterDistribution::symmetric_beta(alpha).unwrap();
            let x = d.quantile(p).unwrap();
            prop_assert!((d.cdf(x).unwrap() - p).abs() <= 1e-10);
        }
    }
}
