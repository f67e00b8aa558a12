//! Exact calculus for continuous piecewise-linear functions on `[0, 1]` with
//! zero boundary values and their piecewise-constant weak derivatives.
//!
//! Every operation here works on big rationals, so results on rational input
//! are exact. The `p`-Laplacian pairing `<F(u), w> = ∫ |u'| u' w' dt` has a
//! piecewise-constant integrand, which makes it a finite exact sum over the
//! common refinement of the two derivative grids.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, int, pow, rational_list, ExactReal, Rational};

/// Highest polynomial degree accepted by [`test_integral`].
pub const MAX_TEST_DEGREE: usize = 8;
/// Deepest dyadic level accepted by [`TestFunction::dyadic`].
pub const MAX_DYADIC_LEVEL: u32 = 8;

/// A continuous piecewise-linear function on `[0, 1]` vanishing at both ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLinear")]
pub struct PiecewiseLinearFn {
    #[serde(with = "rational_list")]
    breakpoints: Vec<Rational>,
    #[serde(with = "rational_list")]
    values: Vec<Rational>,
}

#[derive(Deserialize)]
struct RawLinear {
    #[serde(with = "rational_list")]
    breakpoints: Vec<Rational>,
    #[serde(with = "rational_list")]
    values: Vec<Rational>,
}

impl TryFrom<RawLinear> for PiecewiseLinearFn {
    type Error = Error;
    fn try_from(raw: RawLinear) -> Result<Self> {
        PiecewiseLinearFn::new(raw.breakpoints, raw.values)
    }
}

/// A step function on `[0, 1]`: one value per open interval between
/// consecutive breakpoints. Used for weak derivatives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawConst")]
pub struct PiecewiseConstFn {
    #[serde(with = "rational_list")]
    breakpoints: Vec<Rational>,
    #[serde(with = "rational_list")]
    values: Vec<Rational>,
}

#[derive(Deserialize)]
struct RawConst {
    #[serde(with = "rational_list")]
    breakpoints: Vec<Rational>,
    #[serde(with = "rational_list")]
    values: Vec<Rational>,
}

impl TryFrom<RawConst> for PiecewiseConstFn {
    type Error = Error;
    fn try_from(raw: RawConst) -> Result<Self> {
        PiecewiseConstFn::new(raw.breakpoints, raw.values)
    }
}

fn check_grid(breakpoints: &[Rational]) -> Result<()> {
    if breakpoints.len() < 2 {
        return Err(Error::InvalidFunction(
            "need at least the breakpoints 0 and 1".into(),
        ));
    }
    if !breakpoints[0].is_zero() || !breakpoints[breakpoints.len() - 1].is_one() {
        return Err(Error::InvalidFunction(
            "breakpoints must start at 0 and end at 1".into(),
        ));
    }
    if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidFunction(format!(
            "breakpoints not strictly increasing at {} -> {}",
            format_rational(&w[0]),
            format_rational(&w[1])
        )));
    }
    Ok(())
}

impl PiecewiseLinearFn {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        check_grid(&breakpoints)?;
        if values.len() != breakpoints.len() {
            return Err(Error::InvalidFunction(format!(
                "{} values for {} breakpoints",
                values.len(),
                breakpoints.len()
            )));
        }
        if !values[0].is_zero() || !values[values.len() - 1].is_zero() {
            return Err(Error::InvalidFunction(
                "boundary values must be zero".into(),
            ));
        }
        Ok(PiecewiseLinearFn { breakpoints, values })
    }

    pub fn zero() -> Self {
        PiecewiseLinearFn {
            breakpoints: vec![Rational::zero(), Rational::one()],
            values: vec![Rational::zero(), Rational::zero()],
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    /// Value at `t`, or `None` outside `[0, 1]`.
    pub fn value_at(&self, t: &Rational) -> Option<Rational> {
        let bp = &self.breakpoints;
        if t < &bp[0] || t > &bp[bp.len() - 1] {
            return None;
        }
        Some(match bp.binary_search(t) {
            Ok(i) => self.values[i].clone(),
            Err(i) => interpolate(&bp[i - 1], &self.values[i - 1], &bp[i], &self.values[i], t),
        })
    }

    pub fn max_value(&self) -> Rational {
        self.values.iter().max().cloned().unwrap_or_else(Rational::zero)
    }

    /// Exact weak derivative.
    pub fn derivative(&self) -> PiecewiseConstFn {
        let values = self
            .breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, y)| (&y[1] - &y[0]) / (&t[1] - &t[0]))
            .collect();
        PiecewiseConstFn {
            breakpoints: self.breakpoints.clone(),
            values,
        }
    }

    /// `∫₀¹ |u(t)|^p dt`, exact. Segments crossing zero are split at the root.
    pub fn pow_integral(&self, p: u32) -> Rational {
        let mut total = Rational::zero();
        for (t, y) in self.breakpoints.windows(2).zip(self.values.windows(2)) {
            let h = &t[1] - &t[0];
            let (y0, y1) = (&y[0], &y[1]);
            if y0.is_negative() && y1.is_positive() || y0.is_positive() && y1.is_negative() {
                let s = y0 / (y0 - y1);
                let denom = int(i64::from(p) + 1);
                total += &h * &s * pow(&y0.abs(), p) / &denom;
                total += &h * (Rational::one() - &s) * pow(&y1.abs(), p) / &denom;
            } else {
                let (a, b) = (y0.abs(), y1.abs());
                let sum = (0..=p).fold(Rational::zero(), |acc, j| {
                    acc + pow(&a, p - j) * pow(&b, j)
                });
                total += h * sum / int(i64::from(p) + 1);
            }
        }
        total
    }

    /// Drops breakpoints where the function has no kink.
    pub fn simplified(&self) -> Self {
        let n = self.breakpoints.len();
        let mut breakpoints = vec![self.breakpoints[0].clone()];
        let mut values = vec![self.values[0].clone()];
        for i in 1..n - 1 {
            let left = (&self.values[i] - &values[values.len() - 1])
                / (&self.breakpoints[i] - &breakpoints[breakpoints.len() - 1]);
            let right = (&self.values[i + 1] - &self.values[i])
                / (&self.breakpoints[i + 1] - &self.breakpoints[i]);
            if left != right {
                breakpoints.push(self.breakpoints[i].clone());
                values.push(self.values[i].clone());
            }
        }
        breakpoints.push(self.breakpoints[n - 1].clone());
        values.push(self.values[n - 1].clone());
        PiecewiseLinearFn { breakpoints, values }
    }
}

impl PiecewiseConstFn {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        check_grid(&breakpoints)?;
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidFunction(format!(
                "{} interval values for {} breakpoints",
                values.len(),
                breakpoints.len()
            )));
        }
        Ok(PiecewiseConstFn { breakpoints, values })
    }

    pub fn constant(c: Rational) -> Self {
        PiecewiseConstFn {
            breakpoints: vec![Rational::zero(), Rational::one()],
            values: vec![c],
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Iterates `(left, right, value)` per interval.
    pub fn intervals(&self) -> impl Iterator<Item = (&Rational, &Rational, &Rational)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(t, c)| (&t[0], &t[1], c))
    }

    /// Value on the interval containing `t` (right-continuous; the last
    /// interval also owns `t = 1`).
    pub fn value_at(&self, t: &Rational) -> Option<&Rational> {
        let bp = &self.breakpoints;
        if t < &bp[0] || t > &bp[bp.len() - 1] {
            return None;
        }
        let idx = match bp.binary_search(t) {
            Ok(i) => i.min(self.values.len() - 1),
            Err(i) => i - 1,
        };
        Some(&self.values[idx])
    }

    /// Re-expresses the function on `grid`, which must contain every
    /// breakpoint of `self`.
    fn refine_to(&self, grid: &[Rational]) -> Self {
        let mut values = Vec::with_capacity(grid.len() - 1);
        let mut j = 0;
        for w in grid.windows(2) {
            while self.breakpoints[j + 1] <= w[0] {
                j += 1;
            }
            values.push(self.values[j].clone());
        }
        PiecewiseConstFn {
            breakpoints: grid.to_vec(),
            values,
        }
    }

    /// `∫₀¹ |f|^p dt`: the p-th power of the Lᵖ norm, exact.
    pub fn pow_norm(&self, p: u32) -> ExactReal {
        pow_norm(self, p)
    }

    /// The Lᵖ norm itself; approximate unless it is 0 or 1.
    pub fn norm(&self, p: u32) -> ExactReal {
        pow_norm(self, p).root(p)
    }
}

fn interpolate(t0: &Rational, y0: &Rational, t1: &Rational, y1: &Rational, t: &Rational) -> Rational {
    y0 + (y1 - y0) * (t - t0) / (t1 - t0)
}

/// Sorted union of two strictly increasing grids, deduplicated by exact
/// equality.
pub fn merge_breakpoints(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => match x.cmp(y) {
                Ordering::Less => {
                    i += 1;
                    x
                }
                Ordering::Greater => {
                    j += 1;
                    y
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    x
                }
            },
            (Some(x), None) => {
                i += 1;
                x
            }
            (None, Some(y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next.clone());
    }
    out
}

/// Both inputs re-expressed on the union of their breakpoints.
pub fn common_refinement(
    f: &PiecewiseConstFn,
    g: &PiecewiseConstFn,
) -> (PiecewiseConstFn, PiecewiseConstFn) {
    let grid = merge_breakpoints(&f.breakpoints, &g.breakpoints);
    (f.refine_to(&grid), g.refine_to(&grid))
}

/// Sums `term(c, d) * len` over the common refinement of `f` and `g`
/// without materialising the refined functions.
fn sum_over_refinement<F>(f: &PiecewiseConstFn, g: &PiecewiseConstFn, mut term: F) -> Rational
where
    F: FnMut(&Rational, &Rational) -> Rational,
{
    let mut terms = Vec::with_capacity(f.values.len() + g.values.len());
    let (mut i, mut j) = (0, 0);
    let mut left = Rational::zero();
    while i < f.values.len() && j < g.values.len() {
        let fr = &f.breakpoints[i + 1];
        let gr = &g.breakpoints[j + 1];
        let right = if fr <= gr { fr.clone() } else { gr.clone() };
        let t = term(&f.values[i], &g.values[j]);
        if !t.is_zero() {
            terms.push(t * (&right - &left));
        }
        if *fr == right {
            i += 1;
        }
        if *gr == right {
            j += 1;
        }
        left = right;
    }
    exact_sum(&terms)
}

/// Sum over the least common denominator, reduced once at the end.
fn exact_sum(terms: &[Rational]) -> Rational {
    let den = terms.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let num: BigInt = terms.iter().map(|x| x.numer() * (&den / x.denom())).sum();
    Rational::new(num, den)
}

/// `∫₀¹ |f(t)|^p dt`, exact.
pub fn pow_norm(f: &PiecewiseConstFn, p: u32) -> ExactReal {
    // lengths in grid units n_{i+1} − n_i of 1/D, weights over their lcm E
    let t = &f.breakpoints;
    let d = t.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let n: Vec<BigInt> = t.iter().map(|x| x.numer() * (&d / x.denom())).collect();
    let weights: Vec<Rational> = f.values.iter().map(|c| pow(&c.abs(), p)).collect();
    let e = weights.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let num: BigInt = weights
        .iter()
        .zip(n.windows(2))
        .filter(|(w, _)| !w.is_zero())
        .map(|(w, len)| w.numer() * (&e / w.denom()) * (&len[1] - &len[0]))
        .sum();
    ExactReal::Exact(Rational::new(num, d * e))
}

/// `|c| c`, the cubic-growth flux of the p = 3 Laplacian.
pub fn flux(c: &Rational) -> Rational {
    c.abs() * c
}

/// `<F(u), w> = ∫₀¹ |u'| u' w' dt`, exact.
pub fn p_laplacian_pairing(u: &PiecewiseLinearFn, w: &PiecewiseLinearFn) -> ExactReal {
    let du = u.derivative();
    let dw = w.derivative();
    ExactReal::Exact(sum_over_refinement(&du, &dw, |c, d| flux(c) * d))
}

/// `<F(u) - F(w), u - w> = ∫ (|u'|u' - |w'|w') (u' - w') dt`, exact.
pub fn monotone_gap(u: &PiecewiseLinearFn, w: &PiecewiseLinearFn) -> ExactReal {
    let du = u.derivative();
    let dw = w.derivative();
    ExactReal::Exact(sum_over_refinement(&du, &dw, |c, d| (flux(c) - flux(d)) * (c - d)))
}

/// `a·u + b·w` on the union breakpoint grid.
pub fn lin_comb(
    a: &Rational,
    u: &PiecewiseLinearFn,
    b: &Rational,
    w: &PiecewiseLinearFn,
) -> PiecewiseLinearFn {
    let grid = merge_breakpoints(&u.breakpoints, &w.breakpoints);
    let ue = sample_on(u, &grid);
    let we = sample_on(w, &grid);
    let values = ue
        .iter()
        .zip(&we)
        .map(|(x, y)| a * x + b * y)
        .collect();
    PiecewiseLinearFn {
        breakpoints: grid,
        values,
    }
}

/// Values of `u` at every point of `grid` (a refinement of its breakpoints).
fn sample_on(u: &PiecewiseLinearFn, grid: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(grid.len());
    let mut j = 0;
    for t in grid {
        while j + 1 < u.breakpoints.len() - 1 && u.breakpoints[j + 1] <= *t {
            j += 1;
        }
        if *t == u.breakpoints[j] {
            out.push(u.values[j].clone());
        } else if *t == u.breakpoints[j + 1] {
            out.push(u.values[j + 1].clone());
        } else {
            out.push(interpolate(
                &u.breakpoints[j],
                &u.values[j],
                &u.breakpoints[j + 1],
                &u.values[j + 1],
                t,
            ));
        }
    }
    out
}

/// Test functions for weak-convergence probes: polynomials with rational
/// coefficients (ascending order) or indicators of rational sub-intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestFunction {
    Polynomial(Vec<Rational>),
    Indicator { lo: Rational, hi: Rational },
}

impl TestFunction {
    pub fn monomial(degree: usize) -> Result<Self> {
        if degree > MAX_TEST_DEGREE {
            return Err(Error::UnsupportedTest(format!(
                "degree {degree} exceeds {MAX_TEST_DEGREE}"
            )));
        }
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = Rational::one();
        Ok(TestFunction::Polynomial(coeffs))
    }

    pub fn indicator(lo: Rational, hi: Rational) -> Result<Self> {
        let f = TestFunction::Indicator { lo, hi };
        f.validate()?;
        Ok(f)
    }

    /// Indicator of `[j/2^level, (j+1)/2^level]`.
    pub fn dyadic(level: u32, j: u64) -> Result<Self> {
        if level > MAX_DYADIC_LEVEL {
            return Err(Error::UnsupportedTest(format!(
                "dyadic level {level} exceeds {MAX_DYADIC_LEVEL}"
            )));
        }
        let cells = 1u64 << level;
        if j >= cells {
            return Err(Error::UnsupportedTest(format!(
                "dyadic cell {j} out of range at level {level}"
            )));
        }
        let den = cells as i64;
        TestFunction::indicator(
            Rational::new((j as i64).into(), den.into()),
            Rational::new((j as i64 + 1).into(), den.into()),
        )
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TestFunction::Polynomial(coeffs) => {
                let degree = coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
                if degree > MAX_TEST_DEGREE {
                    return Err(Error::UnsupportedTest(format!(
                        "degree {degree} exceeds {MAX_TEST_DEGREE}"
                    )));
                }
                Ok(())
            }
            TestFunction::Indicator { lo, hi } => {
                if lo.is_negative() || hi > &Rational::one() || lo >= hi {
                    return Err(Error::UnsupportedTest(format!(
                        "indicator interval [{}, {}] is not a sub-interval of [0, 1]",
                        format_rational(lo),
                        format_rational(hi)
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Polynomial(coeffs) => {
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(m, c)| match (m, c.is_one()) {
                        (0, _) => format_rational(c),
                        (_, true) => format!("t^{m}"),
                        (_, false) => format!("{}*t^{m}", format_rational(c)),
                    })
                    .collect();
                if terms.is_empty() {
                    "0".into()
                } else {
                    terms.join(" + ")
                }
            }
            TestFunction::Indicator { lo, hi } => {
                format!("1[{}, {}]", format_rational(lo), format_rational(hi))
            }
        }
    }
}

/// `∫₀¹ f(t) φ(t) dt`, exact.
pub fn test_integral(f: &PiecewiseConstFn, phi: &TestFunction) -> Result<ExactReal> {
    phi.validate()?;
    let total = match phi {
        TestFunction::Polynomial(coeffs) => polynomial_test_integral(f, coeffs),
        TestFunction::Indicator { lo, hi } => {
            let t = &f.breakpoints;
            let first = t.partition_point(|x| x <= lo).saturating_sub(1);
            let last = t.partition_point(|x| x < hi).min(t.len() - 1);
            (first..last)
                .filter(|&i| !f.values[i].is_zero())
                .fold(Rational::zero(), |acc, i| {
                    let left = if &t[i] > lo { &t[i] } else { lo };
                    let right = if &t[i + 1] < hi { &t[i + 1] } else { hi };
                    acc + &f.values[i] * (right - left)
                })
        }
    };
    Ok(ExactReal::Exact(total))
}

/// `Σ_i c_i (Φ(t_{i+1}) − Φ(t_i)) = Σ_j Φ(t_j)(c_{j−1} − c_j)` with
/// `Φ(t) = Σ_m a_m t^{m+1}/(m+1)`. Breakpoints and jumps are put over common
/// denominators `D` and `E`, so each degree needs one integer dot product
/// `Σ_j W_j n_j^{m+1}` and a single reduction.
fn polynomial_test_integral(f: &PiecewiseConstFn, coeffs: &[Rational]) -> Rational {
    let t = &f.breakpoints;
    let zero = Rational::zero();
    let jumps: Vec<Rational> = (0..t.len())
        .map(|j| {
            let before = if j == 0 { &zero } else { &f.values[j - 1] };
            before - f.values.get(j).unwrap_or(&zero)
        })
        .collect();
    let d = t.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let e = jumps.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let (n, w): (Vec<BigInt>, Vec<BigInt>) = t
        .iter()
        .zip(&jumps)
        .filter(|(_, jump)| !jump.is_zero())
        .map(|(x, jump)| (x.numer() * (&d / x.denom()), jump.numer() * (&e / jump.denom())))
        .unzip();
    let mut powers = n.clone();
    let mut d_power = d.clone();
    let mut total = Rational::zero();
    for (m, a) in coeffs.iter().enumerate() {
        if !a.is_zero() {
            let dot: BigInt = w.iter().zip(&powers).map(|(wj, pj)| wj * pj).sum();
            total += a * Rational::new(dot, &e * &d_power * BigInt::from(m + 1));
        }
        for (p, nj) in powers.iter_mut().zip(&n) {
            *p *= nj;
        }
        d_power *= &d;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn pl(points: &[(i64, i64, i64, i64)]) -> PiecewiseLinearFn {
        let (bp, v) = points
            .iter()
            .map(|&(tn, td, vn, vd)| (rat(tn, td), rat(vn, vd)))
            .unzip();
        PiecewiseLinearFn::new(bp, v).unwrap()
    }

    fn hat(alpha: i64) -> PiecewiseLinearFn {
        pl(&[(0, 1, 0, 1), (1, 2, alpha, 2), (1, 1, 0, 1)])
    }

    #[test]
    fn rejects_invalid_functions() {
        let ok = || vec![int(0), rat(1, 2), int(1)];
        assert!(PiecewiseLinearFn::new(ok(), vec![int(0), int(1)]).is_err());
        assert!(PiecewiseLinearFn::new(ok(), vec![int(1), int(1), int(0)]).is_err());
        assert!(PiecewiseLinearFn::new(vec![int(0), rat(1, 2), rat(1, 2), int(1)], vec![int(0); 4]).is_err());
        assert!(PiecewiseLinearFn::new(vec![rat(1, 4), int(1)], vec![int(0); 2]).is_err());
        assert!(PiecewiseLinearFn::new(vec![int(0)], vec![int(0)]).is_err());
        assert!(PiecewiseConstFn::new(ok(), vec![int(1); 3]).is_err());
    }

    #[test]
    fn derivative_of_zero() {
        let d = PiecewiseLinearFn::zero().derivative();
        assert_eq!(d, PiecewiseConstFn::constant(int(0)));
    }

    #[test]
    fn derivative_of_hat() {
        let d = hat(1).derivative();
        assert_eq!(d.values(), &[int(1), int(-1)]);
        assert_eq!(d.breakpoints(), &[int(0), rat(1, 2), int(1)]);
    }

    #[test]
    fn refinement_copies_values() {
        let f = PiecewiseConstFn::new(vec![int(0), rat(1, 2), int(1)], vec![int(2), int(5)]).unwrap();
        let g = PiecewiseConstFn::new(vec![int(0), rat(1, 3), int(1)], vec![int(-1), int(7)]).unwrap();
        let (fr, gr) = common_refinement(&f, &g);
        let grid = vec![int(0), rat(1, 3), rat(1, 2), int(1)];
        assert_eq!(fr.breakpoints(), grid.as_slice());
        assert_eq!(gr.breakpoints(), grid.as_slice());
        assert_eq!(fr.values(), &[int(2), int(2), int(5)]);
        assert_eq!(gr.values(), &[int(-1), int(7), int(7)]);

        let (a, b) = common_refinement(&f, &f);
        assert_eq!(a, f);
        assert_eq!(b, f);
    }

    #[test]
    fn pow_norm_basics() {
        assert_eq!(PiecewiseConstFn::constant(int(0)).pow_norm(5), ExactReal::zero());
        assert_eq!(PiecewiseConstFn::constant(int(2)).pow_norm(3), ExactReal::from(int(8)));
        assert!(PiecewiseConstFn::constant(int(8)).norm(3).to_f64() - 8.0 < 1e-12);
    }

    #[test]
    fn pairing_basics() {
        let w = hat(3);
        assert_eq!(p_laplacian_pairing(&PiecewiseLinearFn::zero(), &w), ExactReal::zero());
        // slopes ±1 against ±3 over two halves: 1*3/2 + 1*3/2
        assert_eq!(p_laplacian_pairing(&hat(1), &w), ExactReal::from(int(3)));
        // |2|·2·2 over two halves each
        assert_eq!(p_laplacian_pairing(&hat(2), &hat(2)), ExactReal::from(int(8)));
    }

    #[test]
    fn lin_comb_cases() {
        let u = pl(&[(0, 1, 0, 1), (1, 3, 2, 5), (2, 3, -1, 7), (1, 1, 0, 1)]);
        let zero = lin_comb(&int(1), &u, &int(-1), &u);
        assert!(zero.is_zero());
        let doubled = lin_comb(&int(2), &u, &int(0), &hat(1));
        assert_eq!(doubled.value_at(&rat(1, 3)), Some(rat(4, 5)));
        assert_eq!(doubled.value_at(&rat(2, 3)), Some(rat(-2, 7)));
        assert_eq!(doubled.simplified().breakpoints(), u.breakpoints());
    }

    #[test]
    fn value_lookup() {
        let h = hat(1);
        assert_eq!(h.value_at(&rat(1, 4)), Some(rat(1, 4)));
        assert_eq!(h.value_at(&rat(3, 4)), Some(rat(1, 4)));
        assert_eq!(h.value_at(&rat(5, 4)), None);
        let d = h.derivative();
        assert_eq!(d.value_at(&rat(1, 2)), Some(&int(-1)));
        assert_eq!(d.value_at(&int(1)), Some(&int(-1)));
        assert_eq!(d.value_at(&int(0)), Some(&int(1)));
    }

    #[test]
    fn pow_integral_with_sign_change() {
        // u = hat through (1/2, 1) then down to (3/4, -1) then back to 0
        let u = pl(&[(0, 1, 0, 1), (1, 2, 1, 1), (3, 4, -1, 1), (1, 1, 0, 1)]);
        // pieces: [0,1/2] ramp 0→1: 1/2·1/4; [1/2,3/4] crosses at 5/8: 2·(1/8)/4;
        // [3/4,1] ramp -1→0: 1/4·1/4
        let expected = rat(1, 8) + rat(1, 16) + rat(1, 16);
        assert_eq!(u.pow_integral(3), expected);
        assert_eq!(hat(2).pow_integral(1), rat(1, 2));
    }

    #[test]
    fn test_integrals() {
        let three = PiecewiseConstFn::constant(int(3));
        let t = TestFunction::monomial(1).unwrap();
        assert_eq!(test_integral(&three, &t).unwrap(), ExactReal::from(rat(3, 2)));
        let one = TestFunction::monomial(0).unwrap();
        assert_eq!(test_integral(&hat(5).derivative(), &one).unwrap(), ExactReal::zero());
        let ind = TestFunction::indicator(rat(1, 4), rat(3, 4)).unwrap();
        assert_eq!(test_integral(&hat(1).derivative(), &ind).unwrap(), ExactReal::zero());
        assert_eq!(test_integral(&three, &ind).unwrap(), ExactReal::from(rat(3, 2)));
    }

    #[test]
    fn unsupported_tests_rejected() {
        assert!(TestFunction::monomial(9).is_err());
        assert!(TestFunction::dyadic(9, 0).is_err());
        assert!(TestFunction::dyadic(2, 4).is_err());
        assert!(TestFunction::indicator(rat(1, 2), rat(1, 4)).is_err());
        let big = TestFunction::Polynomial(vec![int(1); 10]);
        assert!(matches!(
            test_integral(&PiecewiseConstFn::constant(int(1)), &big),
            Err(Error::UnsupportedTest(_))
        ));
        // trailing zero coefficients don't count towards the degree
        let mut padded = vec![int(0); 12];
        padded[2] = int(1);
        assert!(test_integral(&PiecewiseConstFn::constant(int(1)), &TestFunction::Polynomial(padded)).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let u = pl(&[(0, 1, 0, 1), (1, 3, -2, 5), (1, 1, 0, 1)]);
        let text = serde_json::to_string(&u).unwrap();
        assert_eq!(
            text,
            r#"{"breakpoints":[["0","1"],["1","3"],["1","1"]],"values":[["0","1"],["-2","5"],["0","1"]]}"#
        );
        let back: PiecewiseLinearFn = serde_json::from_str(&text).unwrap();
        assert_eq!(back, u);
        let d = u.derivative();
        let back: PiecewiseConstFn = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
        // invariants are enforced on the way in
        let bad = r#"{"breakpoints":[["0","1"],["1","1"]],"values":[["1","1"],["0","1"]]}"#;
        assert!(serde_json::from_str::<PiecewiseLinearFn>(bad).is_err());
    }
}
