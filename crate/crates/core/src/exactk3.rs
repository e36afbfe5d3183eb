//! Exact winner-position densities for three candidates drawn uniformly with
//! uniform voters, plus the small-x tail of the IRV density for any k.

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tabulate::Rule;

type Q = Rational64;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

fn to_f64(v: Q) -> f64 {
    v.to_f64().expect("finite rational")
}

/// Polynomial pieces with exact rational coefficients on exact breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<Q>,
    /// `coeffs[j][p]` multiplies `x^p` on `[breakpoints[j], breakpoints[j+1]]`.
    coeffs: Vec<Vec<Q>>,
}

/// Float view used for serialization and printing.
#[derive(Debug, Clone, Serialize)]
pub struct PiecewiseView {
    pub breakpoints: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
}

fn eval_poly(c: &[Q], x: Q) -> Q {
    c.iter().rev().fold(Q::zero(), |acc, &a| acc * x + a)
}

fn eval_poly_f64(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn antiderivative(c: &[Q]) -> Vec<Q> {
    std::iter::once(Q::zero())
        .chain(c.iter().enumerate().map(|(p, &a)| a / qi(p as i64 + 1)))
        .collect()
}

/// Coefficients of p(1 - x).
fn reflect(c: &[Q]) -> Vec<Q> {
    let n = c.len();
    let mut out = vec![Q::zero(); n];
    for (p, &a) in c.iter().enumerate() {
        // a (1 - x)^p = a sum_j C(p, j) (-x)^j
        let mut binom = 1i64;
        for (j, slot) in out.iter_mut().enumerate().take(p + 1) {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            *slot += a * qi(sign * binom);
            binom = binom * (p - j) as i64 / (j as i64 + 1);
        }
    }
    out
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<Q>, coeffs: Vec<Vec<Q>>) -> Result<Self> {
        if breakpoints.len() < 2 || coeffs.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidParameter("need one piece per breakpoint interval".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("breakpoints must increase".into()));
        }
        Ok(Self { breakpoints, coeffs })
    }

    /// Symmetric function on [0, 1] from its pieces on [0, 1/2].
    pub fn symmetric_from_left(left_breaks: Vec<Q>, left_coeffs: Vec<Vec<Q>>) -> Result<Self> {
        if left_breaks.first() != Some(&Q::zero()) || left_breaks.last() != Some(&q(1, 2)) {
            return Err(Error::InvalidParameter("left half must span [0, 1/2]".into()));
        }
        let mut breaks = left_breaks.clone();
        breaks.extend(left_breaks.iter().rev().skip(1).map(|&b| Q::one() - b));
        let mut coeffs = left_coeffs.clone();
        coeffs.extend(left_coeffs.iter().rev().map(|c| reflect(c)));
        Self::new(breaks, coeffs)
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn coefficients(&self) -> &[Vec<Q>] {
        &self.coeffs
    }

    pub fn view(&self) -> PiecewiseView {
        PiecewiseView {
            breakpoints: self.breakpoints.iter().map(|&b| to_f64(b)).collect(),
            coefficients: self
                .coeffs
                .iter()
                .map(|c| c.iter().map(|&a| to_f64(a)).collect())
                .collect(),
        }
    }

    fn piece_index(&self, x: f64) -> usize {
        let n = self.coeffs.len();
        self.breakpoints[1..n]
            .iter()
            .position(|&b| x < to_f64(b))
            .unwrap_or(n - 1)
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = (to_f64(self.breakpoints[0]), to_f64(*self.breakpoints.last().unwrap()));
        if x >= lo && x <= hi {
            Ok(())
        } else {
            Err(Error::Domain { value: x, domain: "breakpoint span" })
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let c: Vec<f64> = self.coeffs[self.piece_index(x)].iter().map(|&a| to_f64(a)).collect();
        Ok(eval_poly_f64(&c, x))
    }

    pub fn eval_exact(&self, x: Q) -> Q {
        let j = self.breakpoints[1..self.coeffs.len()]
            .iter()
            .position(|&b| x < b)
            .unwrap_or(self.coeffs.len() - 1);
        eval_poly(&self.coeffs[j], x)
    }

    /// Values of the two pieces meeting at interior breakpoint `j`.
    pub fn one_sided_values(&self, j: usize) -> (Q, Q) {
        let b = self.breakpoints[j];
        (eval_poly(&self.coeffs[j - 1], b), eval_poly(&self.coeffs[j], b))
    }

    /// Largest jump across interior breakpoints.
    pub fn max_jump(&self) -> f64 {
        (1..self.coeffs.len())
            .map(|j| {
                let (l, r) = self.one_sided_values(j);
                to_f64((l - r).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Exact integral of `x^n` times the function over its whole span.
    pub fn moment(&self, n: usize) -> Q {
        self.coeffs
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(c, w)| {
                let mut shifted = vec![Q::zero(); n];
                shifted.extend_from_slice(c);
                let a = antiderivative(&shifted);
                eval_poly(&a, w[1]) - eval_poly(&a, w[0])
            })
            .fold(Q::zero(), |s, v| s + v)
    }

    pub fn integral(&self) -> Q {
        self.moment(0)
    }

    pub fn mean(&self) -> Q {
        self.moment(1) / self.integral()
    }

    pub fn variance(&self) -> Q {
        let m = self.mean();
        self.moment(2) / self.integral() - m * m
    }

    /// Exact integral from the left end up to `x`.
    pub fn integral_to(&self, x: Q) -> Q {
        let mut total = Q::zero();
        for (c, w) in self.coeffs.iter().zip(self.breakpoints.windows(2)) {
            if x <= w[0] {
                break;
            }
            let hi = if x < w[1] { x } else { w[1] };
            let a = antiderivative(c);
            total += eval_poly(&a, hi) - eval_poly(&a, w[0]);
        }
        total
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let mut total = 0.0;
        for (c, w) in self.coeffs.iter().zip(self.breakpoints.windows(2)) {
            let (lo, hi) = (to_f64(w[0]), to_f64(w[1]));
            if x <= lo {
                break;
            }
            let a: Vec<f64> = antiderivative(c).into_iter().map(to_f64).collect();
            total += eval_poly_f64(&a, x.min(hi)) - eval_poly_f64(&a, lo);
        }
        Ok(total)
    }
}

/// Density of the plurality winner's position, three candidates.
pub fn plurality_density_k3() -> PiecewisePolynomial {
    PiecewisePolynomial::symmetric_from_left(
        vec![qi(0), q(1, 3), q(1, 2)],
        vec![
            vec![qi(0), qi(4), q(1, 2)],
            vec![q(-3, 2), qi(13), qi(-13)],
        ],
    )
    .expect("static pieces")
}

/// Density of the IRV winner's position, three candidates.
pub fn irv_density_k3() -> PiecewisePolynomial {
    PiecewisePolynomial::symmetric_from_left(
        vec![qi(0), q(1, 6), q(1, 4), q(1, 3), q(1, 2)],
        vec![
            vec![qi(0), qi(0), qi(12)],
            vec![qi(1), qi(-12), qi(48)],
            vec![qi(-5), qi(36), qi(-48)],
            vec![qi(-1), qi(12), qi(-12)],
        ],
    )
    .expect("static pieces")
}

pub fn density_k3(rule: Rule) -> PiecewisePolynomial {
    match rule {
        Rule::Plurality => plurality_density_k3(),
        Rule::Irv => irv_density_k3(),
    }
}

/// IRV winner density on `[0, 1/6]` for k candidates: `k (2x)^(k-1)`.
///
/// No candidate inside `[1/6, 5/6]` is the only way an IRV winner lands
/// this far out, which pins the density down there exactly.
pub fn irv_tail_density(k: usize, x: f64) -> Result<f64> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("k = {k} must be at least 3")));
    }
    if !(0.0..=1.0 / 6.0).contains(&x) {
        return Err(Error::Domain { value: x, domain: "[0, 1/6]" });
    }
    Ok(k as f64 * (2.0 * x).powi(k as i32 - 1))
}

/// Mirror of [`irv_tail_density`] on `[5/6, 1]`.
pub fn irv_tail_density_right(k: usize, x: f64) -> Result<f64> {
    if !(5.0 / 6.0..=1.0).contains(&x) {
        return Err(Error::Domain { value: x, domain: "[5/6, 1]" });
    }
    irv_tail_density(k, (1.0 - x).clamp(0.0, 1.0 / 6.0))
}

/// Mass of the IRV winner density on `[0, 1/6]`: `(1/3)^k / 2`.
pub fn irv_tail_mass(k: usize) -> Q {
    Q::new(1, 2 * 3i64.pow(k as u32))
}

fn piecewise_at(w: f64, pieces: &[(f64, [f64; 3])]) -> f64 {
    let (_, c) = pieces
        .iter()
        .find(|(upper, _)| w <= *upper)
        .unwrap_or_else(|| pieces.last().unwrap());
    eval_poly_f64(c, w)
}

/// Probability that three uniform candidates produce a winner at `w`
/// holding order position `i` (1 = leftmost), per unit of `w` and divided
/// by 3 for the choice of which candidate sits at `w`.
///
/// Summing over `i` and multiplying by 3 gives the winner density.
pub fn order_statistic_win_prob(rule: Rule, i: usize, w: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&w) {
        return Err(Error::Domain { value: w, domain: "[0, 1/2]" });
    }
    let (t, s) = (1.0 / 3.0, 1.0 / 6.0);
    let v = match (rule, i) {
        (Rule::Plurality, 1) => piecewise_at(
            w,
            &[(t, [0.0, 4.0 / 3.0, -4.0 / 3.0]), (0.5, [-t, 10.0 / 3.0, -13.0 / 3.0])],
        ),
        (Rule::Plurality, 2) => piecewise_at(w, &[(t, [0.0, 0.0, 0.5]), (0.5, [-s, 1.0, -1.0])]),
        (Rule::Plurality | Rule::Irv, 3) => w * w,
        (Rule::Irv, 1) => irv_leftmost_middle_out(w) + irv_leftmost_right_out(w),
        (Rule::Irv, 2) => irv_middle_left_out(w) + irv_middle_right_out(w),
        _ => return Err(Error::InvalidParameter(format!("order index {i} not in 1..=3"))),
    };
    Ok(v)
}

/// w leftmost and the middle candidate eliminated first.
fn irv_leftmost_middle_out(w: f64) -> f64 {
    piecewise_at(
        w,
        &[
            (1.0 / 6.0, [0.0, 0.0, 0.0]),
            (0.25, [1.0 / 3.0, -4.0, 12.0]),
            (1.0 / 3.0, [-1.0, 20.0 / 3.0, -28.0 / 3.0]),
            (0.5, [-1.0 / 3.0, 8.0 / 3.0, -10.0 / 3.0]),
        ],
    )
}

/// w leftmost and the rightmost candidate eliminated first.
fn irv_leftmost_right_out(w: f64) -> f64 {
    piecewise_at(w, &[(0.25, [0.0, 0.0, 1.0]), (0.5, [-1.0 / 6.0, 4.0 / 3.0, -5.0 / 3.0])])
}

/// w in the middle and the leftmost candidate eliminated first.
fn irv_middle_left_out(w: f64) -> f64 {
    piecewise_at(
        w,
        &[
            (0.25, [0.0, 0.0, 2.0]),
            (1.0 / 3.0, [-0.5, 4.0, -6.0]),
            (0.5, [-1.0 / 6.0, 2.0, -3.0]),
        ],
    )
}

/// w in the middle and the rightmost candidate eliminated first.
fn irv_middle_right_out(w: f64) -> f64 {
    piecewise_at(w, &[(1.0 / 3.0, [0.0, 0.0, 0.0]), (0.5, [1.0 / 3.0, -2.0, 3.0])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plurality_breakpoints_and_continuity() {
        let p = plurality_density_k3();
        assert_eq!(p.breakpoints(), &[qi(0), q(1, 3), q(1, 2), q(2, 3), qi(1)]);
        assert_eq!(p.one_sided_values(1), (q(25, 18), q(25, 18)));
        assert_eq!(p.max_jump(), 0.0);
    }

    #[test]
    fn irv_breakpoints_and_continuity() {
        let r = irv_density_k3();
        assert_eq!(r.breakpoints().len(), 9);
        assert_eq!(r.one_sided_values(1), (q(1, 3), q(1, 3)));
        assert_eq!(r.max_jump(), 0.0);
        assert_eq!(r.eval_exact(q(1, 4)), qi(1));
    }

    #[test]
    fn exact_moments() {
        let p = plurality_density_k3();
        let r = irv_density_k3();
        assert_eq!(p.integral(), qi(1));
        assert_eq!(r.integral(), qi(1));
        assert_eq!(p.mean(), q(1, 2));
        assert_eq!(r.mean(), q(1, 2));
        assert_eq!(p.variance(), q(23, 540));
        assert_eq!(r.variance(), q(25, 864));
        assert_eq!(p.variance() / r.variance(), q(184, 125));
    }

    #[test]
    fn symmetric_nonnegative_and_cdf() {
        for d in [plurality_density_k3(), irv_density_k3()] {
            for i in 0..=10_000 {
                let x = i as f64 / 10_000.0;
                let v = d.eval(x).unwrap();
                assert!(v >= -1e-15);
                assert!((v - d.eval(1.0 - x).unwrap()).abs() < 1e-12);
            }
            assert!((d.cdf(0.5).unwrap() - 0.5).abs() < 1e-14);
            assert!((d.cdf(1.0).unwrap() - 1.0).abs() < 1e-14);
            assert!(d.eval(1.5).is_err());
        }
    }

    #[test]
    fn reflection_expands_binomially() {
        // (1 - x)^2 = 1 - 2x + x^2
        assert_eq!(reflect(&[qi(0), qi(0), qi(1)]), vec![qi(1), qi(-2), qi(1)]);
        assert_eq!(reflect(&[qi(3), qi(5)]), vec![qi(8), qi(-5)]);
    }

    #[test]
    fn tail_density() {
        assert!((irv_tail_density(3, 0.1).unwrap() - 0.12).abs() < 1e-15);
        assert!((irv_tail_density(3, 0.1).unwrap() - irv_density_k3().eval(0.1).unwrap()).abs() < 1e-15);
        assert_eq!(irv_tail_density(3, 0.0).unwrap(), 0.0);
        assert!(irv_tail_density(3, 0.2).is_err());
        assert!(irv_tail_density(2, 0.1).is_err());
        assert_eq!(irv_tail_mass(4), q(1, 162));
        assert_eq!(irv_density_k3().integral_to(q(1, 6)), q(1, 54));
        assert!((irv_tail_density_right(5, 0.9).unwrap() - irv_tail_density(5, 0.1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn tail_mass_matches_quadrature() {
        // Simpson's rule is exact for the cubic k = 4 and close for larger k.
        for k in 3..9 {
            let n = 2000;
            let h = (1.0 / 6.0) / n as f64;
            let mut s = 0.0;
            for j in 0..=n {
                let wgt = if j == 0 || j == n { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
                s += wgt * irv_tail_density(k, j as f64 * h).unwrap();
            }
            s *= h / 3.0;
            assert!((s - to_f64(irv_tail_mass(k))).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn order_statistics_sum_to_density() {
        for rule in [Rule::Plurality, Rule::Irv] {
            let d = density_k3(rule);
            for j in 0..200 {
                let w = 0.5 * j as f64 / 199.0;
                let s: f64 = (1..=3).map(|i| order_statistic_win_prob(rule, i, w).unwrap()).sum();
                assert!((3.0 * s - d.eval(w).unwrap()).abs() < 1e-12, "{rule} w = {w}");
            }
        }
        assert_eq!(order_statistic_win_prob(Rule::Plurality, 3, 0.4).unwrap(), 0.4 * 0.4);
        assert_eq!(order_statistic_win_prob(Rule::Irv, 3, 0.4).unwrap(), 0.4 * 0.4);
        let s: f64 = (1..=3).map(|i| order_statistic_win_prob(Rule::Irv, i, 0.25).unwrap()).sum();
        assert!((3.0 * s - 1.0).abs() < 1e-12);
        assert!(order_statistic_win_prob(Rule::Irv, 4, 0.2).is_err());
        assert!(order_statistic_win_prob(Rule::Irv, 1, 0.6).is_err());
    }
}
