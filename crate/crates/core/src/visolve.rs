//! Finite-dimensional variational inequalities for the Galerkin-discretised
//! p = 3 Laplacian, solved by a projected extragradient method.
//!
//! The discrete operator is `G(x)_j = <F(u_x), φ_j> − f_j`, where `u_x` is
//! the piecewise-linear function with nodal values `x` on a uniform grid of
//! `n` interior nodes and `φ_j` the hat basis function at node `j`. The
//! element weights `∫_{I_i} φ_j'` are assembled once with the exact kernel;
//! iteration then runs in `f64`. [`PLaplacianOperator::evaluate_exact`]
//! evaluates the same operator through exact pairings for cross-checks.
//!
//! Solutions demonstrate the finite-dimensional analogue of existence for
//! bounded pseudomonotone VIs on compact convex sets; they prove nothing
//! about the infinite-dimensional problem.

// negated float comparisons below are deliberate: NaN must fail them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, Rational};
use crate::pwcalc::{self, PiecewiseLinearFn, TestFunction};

pub const DEFAULT_EPS: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_STEP: f64 = 0.1;
pub const BACKTRACK: f64 = 0.5;
/// Step acceptance: `λ‖G(x) − G(y)‖ <= ν‖x − y‖`.
const STEP_NU: f64 = 0.5;
/// Number of trailing perturbed solutions combined when estimating their
/// limit.
pub const RICHARDSON_DEPTH: usize = 6;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A compact convex feasible set with a closed-form Euclidean projection.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl FeasibleSet {
    pub fn uniform_box(n: usize, lower: f64, upper: f64) -> Self {
        FeasibleSet::Box {
            lower: vec![lower; n],
            upper: vec![upper; n],
        }
    }

    pub fn centered_ball(n: usize, radius: f64) -> Self {
        FeasibleSet::Ball {
            center: vec![0.0; n],
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FeasibleSet::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(Error::InvalidProblem("box bounds differ in length".into()));
                }
                if let Some(j) = (0..lower.len()).find(|&j| !(lower[j] <= upper[j])) {
                    return Err(Error::InvalidProblem(format!(
                        "box bound {j}: lower {} > upper {}",
                        lower[j], upper[j]
                    )));
                }
                if lower.iter().chain(upper).any(|b| !b.is_finite()) {
                    return Err(Error::InvalidProblem("box bounds must be finite".into()));
                }
            }
            FeasibleSet::Ball { center, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidProblem(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidProblem("ball center must be finite".into()));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            FeasibleSet::Ball { center, radius } => dist(x, center) <= radius + tol,
        }
    }
}

/// Euclidean projection onto `set`: componentwise clamp for boxes, radial
/// scaling towards the center for balls.
pub fn project(set: &FeasibleSet, x: &[f64]) -> Vec<f64> {
    match set {
        FeasibleSet::Box { lower, upper } => x
            .iter()
            .zip(lower.iter().zip(upper))
            .map(|(v, (l, u))| v.clamp(*l, *u))
            .collect(),
        FeasibleSet::Ball { center, radius } => {
            let d = dist(x, center);
            if d <= *radius {
                x.to_vec()
            } else {
                let s = radius / d;
                x.iter().zip(center).map(|(v, c)| c + s * (v - c)).collect()
            }
        }
    }
}

/// The Galerkin p-Laplacian on `n` interior nodes with constant forcing.
#[derive(Debug, Clone)]
pub struct PLaplacianOperator {
    n: usize,
    forcing: Vec<f64>,
    /// `(interval, ∫_{interval} φ_j')` for each basis function `j`.
    weights: Vec<Vec<(usize, f64)>>,
}

/// Grid spacing `1/(n+1)`.
fn spacing(n: usize) -> Rational {
    Rational::new(1.into(), (n as i64 + 1).into())
}

/// `u_x`: the piecewise-linear function with nodal values `x` at `j/(n+1)`.
pub fn nodal_function(x: &[Rational]) -> PiecewiseLinearFn {
    let n = x.len();
    let h = spacing(n);
    let breakpoints = (0..=n + 1).map(|i| &h * int(i as i64)).collect();
    let values = std::iter::once(Rational::zero())
        .chain(x.iter().cloned())
        .chain(std::iter::once(Rational::zero()))
        .collect();
    PiecewiseLinearFn::new(breakpoints, values).expect("uniform grid is valid")
}

/// Hat basis function at interior node `j` (0-based) of an `n`-node grid.
pub fn hat_basis(n: usize, j: usize) -> PiecewiseLinearFn {
    let mut x = vec![Rational::zero(); n];
    x[j] = int(1);
    nodal_function(&x)
}

/// Builds the discrete operator; `forcing` defaults to zero.
pub fn assemble_operator(n: usize, forcing: Option<Vec<f64>>) -> Result<PLaplacianOperator> {
    if n == 0 {
        return Err(Error::InvalidProblem("dimension must be at least 1".into()));
    }
    let forcing = forcing.unwrap_or_else(|| vec![0.0; n]);
    if forcing.len() != n {
        return Err(Error::InvalidProblem(format!(
            "forcing has {} entries for n = {n}",
            forcing.len()
        )));
    }
    if forcing.iter().any(|f| !f.is_finite()) {
        return Err(Error::InvalidProblem("forcing must be finite".into()));
    }
    let h = spacing(n);
    let weights = (0..n)
        .map(|j| {
            let dphi = hat_basis(n, j).derivative();
            // φ_j lives on intervals j and j+1 of the n+1 element grid
            (j..=j + 1)
                .map(|i| {
                    let cell = TestFunction::indicator(&h * int(i as i64), &h * int(i as i64 + 1))
                        .expect("grid cell inside [0, 1]");
                    let w = pwcalc::test_integral(&dphi, &cell).expect("valid test function");
                    (i, w.to_f64())
                })
                .collect()
        })
        .collect();
    Ok(PLaplacianOperator { n, forcing, weights })
}

impl PLaplacianOperator {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn forcing(&self) -> &[f64] {
        &self.forcing
    }

    /// `G(x)` in floating point.
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let inv_h = (self.n + 1) as f64;
        let node = |i: usize| if i == 0 || i > self.n { 0.0 } else { x[i - 1] };
        let flux: Vec<f64> = (0..=self.n)
            .map(|i| {
                let c = (node(i + 1) - node(i)) * inv_h;
                c.abs() * c
            })
            .collect();
        self.weights
            .iter()
            .zip(&self.forcing)
            .map(|(row, f)| row.iter().map(|(i, w)| flux[*i] * w).sum::<f64>() - f)
            .collect()
    }

    /// `G(x)` through exact pairings `<F(u_x), φ_j>`; the forcing enters as
    /// the exact rational value of each `f64`.
    pub fn evaluate_exact(&self, x: &[Rational]) -> Vec<Rational> {
        let u = nodal_function(x);
        (0..self.n)
            .map(|j| {
                let pairing = pwcalc::p_laplacian_pairing(&u, &hat_basis(self.n, j));
                let f = Rational::from_float(self.forcing[j]).expect("finite forcing");
                pairing.as_exact().expect("rational data").clone() - f
            })
            .collect()
    }
}

/// A discrete VI instance: find `x ∈ A` with `<G(x), y − x> >= 0` for all
/// `y ∈ A`.
#[derive(Debug, Clone)]
pub struct DiscreteVI {
    pub operator: PLaplacianOperator,
    pub set: FeasibleSet,
    pub eps: f64,
    pub max_iter: usize,
}

impl DiscreteVI {
    pub fn new(n: usize, forcing: Option<Vec<f64>>, set: FeasibleSet) -> Result<Self> {
        let operator = assemble_operator(n, forcing)?;
        set.validate()?;
        if set.dim() != n {
            return Err(Error::InvalidProblem(format!(
                "feasible set has dimension {} for n = {n}",
                set.dim()
            )));
        }
        Ok(DiscreteVI {
            operator,
            set,
            eps: DEFAULT_EPS,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn with_tolerances(mut self, eps: f64, max_iter: usize) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidProblem(format!("eps must be positive, got {eps}")));
        }
        self.eps = eps;
        self.max_iter = max_iter;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn with_forcing(&self, forcing: Vec<f64>) -> Result<Self> {
        let mut vi = DiscreteVI::new(self.dim(), Some(forcing), self.set.clone())?;
        vi.eps = self.eps;
        vi.max_iter = self.max_iter;
        Ok(vi)
    }
}

/// Natural residual `‖x − P_A(x − G(x))‖₂`; zero exactly at solutions.
pub fn residual(vi: &DiscreteVI, x: &[f64]) -> f64 {
    natural_residual(vi, x, &vi.operator.evaluate(x))
}

fn natural_residual(vi: &DiscreteVI, x: &[f64], gx: &[f64]) -> f64 {
    let trial: Vec<f64> = x.iter().zip(gx).map(|(a, g)| a - g).collect();
    dist(x, &project(&vi.set, &trial))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub x_hat: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Extragradient with backtracking:
/// `y = P(x − λG(x))`, `x⁺ = P(x − λG(y))`, halving `λ` until
/// `λ‖G(x) − G(y)‖ <= ‖x − y‖/2` (which also gives
/// `<G(x) − G(y), x − y> <= ‖x − y‖²/(2λ)`). Stops once the natural
/// residual drops to `vi.eps` or after `vi.max_iter` steps, returning the
/// best iterate seen.
pub fn extragradient_solve(vi: &DiscreteVI, x0: &[f64], step: f64) -> Result<SolveResult> {
    if x0.len() != vi.dim() {
        return Err(Error::InvalidProblem(format!(
            "start point has {} entries for n = {}",
            x0.len(),
            vi.dim()
        )));
    }
    if !vi.set.contains(x0, 1e-12) {
        return Err(Error::InvalidProblem("start point is not feasible".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidProblem(format!("step must be positive, got {step}")));
    }
    let g = |x: &[f64]| vi.operator.evaluate(x);
    let mut x = project(&vi.set, x0);
    let mut lambda = step;
    let mut best = (x.clone(), f64::INFINITY);
    for iterations in 0..=vi.max_iter {
        let gx = g(&x);
        let r = natural_residual(vi, &x, &gx);
        if r < best.1 {
            best = (x.clone(), r);
        }
        if r <= vi.eps {
            return Ok(SolveResult {
                x_hat: x,
                residual: r,
                iterations,
                converged: true,
            });
        }
        if iterations == vi.max_iter {
            break;
        }
        let gy = loop {
            let trial: Vec<f64> = x.iter().zip(&gx).map(|(a, g)| a - lambda * g).collect();
            let y = project(&vi.set, &trial);
            let gy = g(&y);
            let dx = dist(&x, &y);
            if lambda * dist(&gx, &gy) <= STEP_NU * dx || dx == 0.0 || lambda < f64::MIN_POSITIVE {
                break gy;
            }
            lambda *= BACKTRACK;
        };
        let trial: Vec<f64> = x.iter().zip(&gy).map(|(a, g)| a - lambda * g).collect();
        x = project(&vi.set, &trial);
    }
    let (x_hat, residual) = best;
    Ok(SolveResult {
        x_hat,
        residual,
        iterations: vi.max_iter,
        converged: false,
    })
}

/// Solves from `P_A(0)` with the default step.
pub fn solve(vi: &DiscreteVI) -> Result<SolveResult> {
    let x0 = project(&vi.set, &vec![0.0; vi.dim()]);
    extragradient_solve(vi, &x0, DEFAULT_STEP)
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    /// Solutions for forcing `f + 2^{-m}·d`, `m = 1..=m_max`.
    pub solutions: Vec<Vec<f64>>,
    /// Richardson extrapolation of the solutions to `m → ∞`, projected onto A.
    pub limit: Vec<f64>,
    pub limit_residual: f64,
    pub last_residual: f64,
    pub all_converged: bool,
}

/// Solves the perturbed problems with forcing `f + 2^{-m}·direction`,
/// estimates the limit of their solutions and evaluates the unperturbed
/// residual there.
pub fn perturbation_closedness(
    vi: &DiscreteVI,
    direction: &[f64],
    m_max: u32,
) -> Result<PerturbationReport> {
    if direction.len() != vi.dim() || m_max == 0 {
        return Err(Error::InvalidProblem(
            "perturbation needs a full-length direction and m_max >= 1".into(),
        ));
    }
    let mut solutions = Vec::with_capacity(m_max as usize);
    let mut all_converged = true;
    for m in 1..=m_max {
        let delta = 0.5f64.powi(m as i32);
        let forcing = vi
            .operator
            .forcing()
            .iter()
            .zip(direction)
            .map(|(f, d)| f + delta * d)
            .collect();
        let res = solve(&vi.with_forcing(forcing)?)?;
        all_converged &= res.converged;
        solutions.push(res.x_hat);
    }
    let limit = project(&vi.set, &richardson(&solutions, RICHARDSON_DEPTH));
    Ok(PerturbationReport {
        limit_residual: residual(vi, &limit),
        last_residual: residual(vi, solutions.last().expect("m_max >= 1")),
        limit,
        solutions,
        all_converged,
    })
}

/// Richardson extrapolation over the last `depth` entries of a sequence
/// whose error halves from one entry to the next.
pub fn richardson(seq: &[Vec<f64>], depth: usize) -> Vec<f64> {
    let depth = depth.min(seq.len());
    let mut table: Vec<Vec<f64>> = seq[seq.len() - depth..].to_vec();
    for level in 1..depth {
        let factor = (1u64 << level) as f64 - 1.0;
        table = table
            .windows(2)
            .map(|w| {
                w[1].iter()
                    .zip(&w[0])
                    .map(|(fine, coarse)| fine + (fine - coarse) / factor)
                    .collect()
            })
            .collect();
    }
    table.pop().expect("non-empty table")
}

/// Difference quotients `‖G(x + s·d) − G(x)‖ / (s‖d‖)` for `s = 2^{-i}`,
/// `i = 0..levels`, along `d = z − x`.
pub fn continuity_moduli(op: &PLaplacianOperator, x: &[f64], z: &[f64], levels: u32) -> Vec<f64> {
    let d: Vec<f64> = z.iter().zip(x).map(|(a, b)| a - b).collect();
    let dn = norm(&d);
    let gx = op.evaluate(x);
    (0..levels)
        .map(|i| {
            let s = 0.5f64.powi(i as i32);
            let p: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + s * b).collect();
            dist(&op.evaluate(&p), &gx) / (s * dn)
        })
        .collect()
}

/// Converts an `f64` vector to exact rationals (every finite double is a
/// dyadic rational).
pub fn to_rationals(x: &[f64]) -> Vec<Rational> {
    x.iter()
        .map(|v| Rational::from_float(*v).expect("finite value"))
        .collect()
}

pub fn to_f64s(x: &[Rational]) -> Vec<f64> {
    x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
}
