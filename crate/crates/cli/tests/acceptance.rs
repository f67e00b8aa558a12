//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! reach the terminal.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde_json::Value;
use viproplab_core::exact::{int, rat};
use viproplab_core::proplab::{
    default_test_family, equilibrium_gap, monotone_gap_certificate, monotone_gap_check,
    weak_convergence_evidence,
};
use viproplab_core::pwcalc::{p_laplacian_pairing, pow_norm};
use viproplab_core::sample::{random_pl, rng, seed_from_env};
use viproplab_core::visolve::{perturbation_closedness, solve};
use viproplab_core::{
    sawtooth, scaled_hat, DiscreteVI, ExactReal, FeasibleSet, PiecewiseLinearFn, Rational,
    SequenceSpec, TestFunction, Verdict,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn exact(v: &ExactReal) -> Result<&Rational, String> {
    v.as_exact().ok_or_else(|| format!("approximate value {v}"))
}

fn viproplab(args: &[&str]) -> Result<(i32, Value), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_viproplab"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code().ok_or("killed by signal")?;
    let json = serde_json::from_slice(&out.stdout).map_err(|e| format!("{args:?}: {e}"))?;
    Ok((code, json))
}

fn json_rational(v: &Value) -> Result<Rational, String> {
    let part = |i: usize| {
        v[i].as_str()
            .and_then(|s| s.parse::<i64>().ok())
            .ok_or_else(|| format!("not a rational pair: {v}"))
    };
    Ok(rat(part(0)?, part(1)?))
}

// --- 1 ----------------------------------------------------------------------

fn norm_identity() -> Check {
    let start = Instant::now();
    for k in 1..=256u64 {
        let u = sawtooth(k).map_err(|e| e.to_string())?;
        let norm = pow_norm(&u.derivative(), 3);
        ensure(exact(&norm)? == &int(45), || format!("k = {k}: {norm}"))?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("k = 1..256 all exactly 45 in {:.2?}", start.elapsed()))
}

// --- 2 ----------------------------------------------------------------------

fn pairing_identity() -> Check {
    let start = Instant::now();
    let alphas = [rat(31, 2), int(16), int(20), int(100)];
    let hats = alphas
        .iter()
        .map(|a| scaled_hat(a).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    for k in 1..=64u64 {
        let u = sawtooth(k).map_err(|e| e.to_string())?;
        for (alpha, v) in alphas.iter().zip(&hats) {
            let psi = equilibrium_gap(&u, v);
            let expected = int(45) - int(3) * alpha;
            ensure(exact(&psi)? == &expected, || format!("k = {k}, α = {alpha}: {psi}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("k = 1..64 × 4 scales exact in {:.2?}", start.elapsed()))
}

// --- 3 ----------------------------------------------------------------------

fn certificates() -> Check {
    let (code, v) = viproplab(&["certify", "--kmax", "64", "--alpha", "16"])?;
    ensure(code == 0, || format!("certify α = 16 exited {code}"))?;
    let ky = &v["certificates"][0];
    let premise = &v["certificates"][1];
    ensure(ky["property"] == "kyFanViolation", || "first certificate".into())?;
    ensure(premise["property"] == "pseudomonotonePremiseFails", || "second certificate".into())?;
    for c in [ky, premise] {
        ensure(c["verdict"] == "established", || format!("{}: {}", c["property"], c["verdict"]))?;
        ensure(c["exactness"] == "exact", || format!("{} not exact", c["property"]))?;
    }
    let m1 = json_rational(&ky["witness"]["margin"])?;
    let t1 = json_rational(&ky["witness"]["tail_constant"])?;
    let t2 = json_rational(&premise["witness"]["tail_constant"])?;
    ensure(m1 == int(3) && t1 == int(-3), || format!("Ky–Fan margin {m1}, tail {t1}"))?;
    ensure(t2 == int(45), || format!("premise tail {t2}"))?;

    let (code, v) = viproplab(&["certify", "--kmax", "64", "--alpha", "10"])?;
    ensure(v["certificates"][0]["verdict"] == "refuted", || {
        format!("α = 10: {}", v["certificates"][0]["verdict"])
    })?;
    ensure(code == 0, || format!("certify α = 10 exited {code}"))?;
    Ok("α = 16: margins 3 and 45 established; α = 10 refuted".into())
}

// --- 4 ----------------------------------------------------------------------

fn l2_unit_vectors() -> Check {
    let (code, v) = viproplab(&["remark32", "--kmax", "64"])?;
    ensure(code == 0, || format!("exited {code}"))?;
    let rows = v["rows"].as_array().ok_or("rows missing")?;
    for row in rows {
        ensure(json_rational(&row["value"])? == int(1), || format!("row {row}"))?;
    }
    let tail = json_rational(&v["certificate"]["witness"]["tail_constant"])?;
    ensure(tail == int(1), || format!("tail constant {tail}"))?;
    ensure(json_rational(&v["limit"])? == int(1), || format!("limit {}", v["limit"]))?;
    ensure(v["conclusion"] == "limit != 0", || format!("conclusion {}", v["conclusion"]))?;
    ensure(v["certificate"]["verdict"] == "established", || "verdict".into())?;
    Ok(format!("{} rows equal 1, tail constant 1, limit != 0", rows.len()))
}

// --- 5 ----------------------------------------------------------------------

/// Slope of `u` on the interval containing the open interval `(a, b)`.
fn slope_on(u: &PiecewiseLinearFn, a: &Rational, b: &Rational) -> Rational {
    let t = u.breakpoints();
    let i = t.iter().rposition(|x| x <= a).expect("a inside [0, 1]");
    debug_assert!(&t[i + 1] >= b);
    (&u.values()[i + 1] - &u.values()[i]) / (&t[i + 1] - &t[i])
}

/// `∫(|u'|u' − |w'|w')(u' − w')` over a merge built from a sorted set.
fn gap_oracle(u: &PiecewiseLinearFn, w: &PiecewiseLinearFn) -> Rational {
    let cuts: BTreeSet<Rational> = u.breakpoints().iter().chain(w.breakpoints()).cloned().collect();
    let cuts: Vec<Rational> = cuts.into_iter().collect();
    cuts.windows(2)
        .map(|p| {
            let (c, d) = (slope_on(u, &p[0], &p[1]), slope_on(w, &p[0], &p[1]));
            (c.abs() * &c - d.abs() * &d) * (c - d) * (&p[1] - &p[0])
        })
        .fold(Rational::zero(), |acc, x| acc + x)
}

fn monotone_pairs() -> Check {
    let mut r = rng(seed_from_env());
    let pairs: Vec<_> = (0..1000).map(|_| (random_pl(&mut r, 8), random_pl(&mut r, 8))).collect();
    let violations = pairs
        .par_iter()
        .filter(|(u, w)| match monotone_gap_check(u, w).as_exact() {
            Some(g) => g.is_negative() || *g != gap_oracle(u, w),
            None => true,
        })
        .count();
    ensure(violations == 0, || format!("{violations} pairs violate or disagree"))?;
    let cert = monotone_gap_certificate(&pairs);
    ensure(cert.verdict == Verdict::Established, || format!("verdict {:?}", cert.verdict))?;
    Ok("1000 seeded pairs, zero violations, oracle agrees".into())
}

// --- 6 ----------------------------------------------------------------------

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
    GL5.iter().map(|(x, w)| w * f(m + r * x)).sum::<f64>() * r
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = (a + b) / 2.0;
    let (left, right) = (gauss(f, a, m), gauss(f, m, b));
    if depth == 0 || (left + right - whole).abs() <= tol {
        return left + right;
    }
    adaptive(f, a, m, left, tol / 2.0, depth - 1) + adaptive(f, m, b, right, tol / 2.0, depth - 1)
}

fn float_slopes(u: &PiecewiseLinearFn) -> (Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = u.breakpoints().iter().map(|q| q.to_f64().unwrap()).collect();
    let y: Vec<f64> = u.values().iter().map(|q| q.to_f64().unwrap()).collect();
    let s = (0..t.len() - 1).map(|i| (y[i + 1] - y[i]) / (t[i + 1] - t[i])).collect();
    (t, s)
}

fn slope_at(t: &[f64], s: &[f64], x: f64) -> f64 {
    s[t.partition_point(|b| *b <= x).clamp(1, s.len()) - 1]
}

/// Adaptive Gauss–Legendre on panels cut at both breakpoint sets.
fn quadrature(u: &PiecewiseLinearFn, w: &PiecewiseLinearFn) -> f64 {
    let ((tu, su), (tw, sw)) = (float_slopes(u), float_slopes(w));
    let f = |x: f64| {
        let c = slope_at(&tu, &su, x);
        c.abs() * c * slope_at(&tw, &sw, x)
    };
    let mut cuts: Vec<f64> = tu.iter().chain(&tw).copied().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let scale: f64 = cuts.windows(2).map(|p| gauss(&f, p[0], p[1]).abs()).sum();
    let tol = 1e-14 * scale.max(f64::MIN_POSITIVE) / cuts.len() as f64;
    cuts.windows(2)
        .map(|p| adaptive(&f, p[0], p[1], gauss(&f, p[0], p[1]), tol, 40))
        .sum()
}

fn quadrature_agreement() -> Check {
    let mut r = rng(seed_from_env() ^ 0x0a0c);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (u, w) = (random_pl(&mut r, 6), random_pl(&mut r, 6));
        let exact = p_laplacian_pairing(&u, &w).to_f64();
        let quad = quadrature(&u, &w);
        let err = if exact == 0.0 {
            quad.abs()
        } else {
            (quad - exact).abs() / exact.abs()
        };
        worst = worst.max(err);
    }
    ensure(worst <= 1e-10, || format!("worst relative error {worst:e}"))?;
    Ok(format!("200 instances, worst relative error {worst:.1e}"))
}

// --- 7 ----------------------------------------------------------------------

/// `u_k(t)` from its closed form.
fn sawtooth_value(k: i64, t: &Rational) -> Rational {
    if t >= &rat(1, 2) {
        return Rational::zero();
    }
    let s = t * int(6 * k);
    let r = &s - (&s / int(3)).floor() * int(3);
    if r <= int(1) {
        r / int(k)
    } else {
        (int(3) - r) / int(2 * k)
    }
}

/// `∫ u_k' t^m` by parts on the grid `j/(6k)`, in integers. With node values
/// `U_j/(2k)`, each linear piece `[p, q]` contributes
/// `(m+1)(U_p q − U_q p)(q^m − p^m) + m(U_q − U_p)(q^{m+1} − p^{m+1})` over
/// `2k(q − p)(m+1)(6k)^m`, and `q − p` is 1 or 2.
fn monomial_moment(k: i64, m: u32) -> Rational {
    let nodes: Vec<i128> = (0..=3 * k as i128).filter(|j| j % 3 != 2).collect();
    let value = |j: i128| if j % 3 == 1 { 2i128 } else { 0 };
    let mut num = 0i128;
    for pq in nodes.windows(2) {
        let (p, q) = (pq[0], pq[1]);
        let (up, uq) = (value(p), value(q));
        let piece = (m as i128 + 1) * (up * q - uq * p) * (q.pow(m) - p.pow(m))
            + m as i128 * (uq - up) * (q.pow(m + 1) - p.pow(m + 1));
        num += piece * (2 / (q - p));
    }
    let den = 4 * k as i128 * (m as i128 + 1) * (6 * k as i128).pow(m);
    Rational::new((-num).into(), den.into())
}

/// `∫ u_k' φ` by parts: `u_k(b) − u_k(a)` for an indicator, `−∫ u_k φ'` for
/// a polynomial.
fn weak_integral_oracle(k: i64, phi: &TestFunction) -> Rational {
    match phi {
        TestFunction::Indicator { lo, hi } => sawtooth_value(k, hi) - sawtooth_value(k, lo),
        TestFunction::Polynomial(coeffs) => coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Rational::zero(), |acc, (m, c)| acc + c * monomial_moment(k, m as u32)),
    }
}

fn weak_evidence() -> Check {
    const K_MAX: u64 = 256;
    let family = default_test_family();
    let monomials = family.iter().filter(|f| matches!(f, TestFunction::Polynomial(_))).count();
    ensure(monomials == 6 && family.len() == 6 + 127, || format!("family of {}", family.len()))?;
    let report = weak_convergence_evidence(&SequenceSpec::Sawtooth, &family, K_MAX)
        .map_err(|e| e.to_string())?;
    let half = rat(1, 2);
    let mut right_half = 0;
    let failures: Vec<String> = family
        .par_iter()
        .zip(&report.tests)
        .filter_map(|(phi, t)| {
            let oracle: Vec<Rational> =
                (1..=K_MAX as i64).map(|k| weak_integral_oracle(k, phi)).collect();
            let c_phi = oracle
                .iter()
                .zip(1i64..)
                .map(|(v, k)| v.abs() * int(k))
                .max()
                .unwrap_or_else(Rational::zero);
            for (k, (got, want)) in (1i64..).zip(t.integrals.iter().zip(&oracle)) {
                let Some(got) = got.as_exact() else {
                    return Some(format!("{}: k = {k} approximate", t.test));
                };
                if got != want || got.abs() * int(k) > c_phi {
                    return Some(format!("{}: k = {k}", t.test));
                }
            }
            if t.bound_constant.as_exact() != Some(&c_phi) {
                return Some(format!("{}: C = {} vs oracle {c_phi}", t.test, t.bound_constant));
            }
            None
        })
        .collect();
    ensure(failures.is_empty(), || failures.join("; "))?;
    for (phi, t) in family.iter().zip(&report.tests) {
        if let TestFunction::Indicator { lo, .. } = phi {
            if lo >= &half {
                right_half += 1;
                ensure(t.all_zero, || format!("{} not identically zero", t.test))?;
            }
        }
    }
    ensure(report.consistent, || report.verdict.clone())?;
    Ok(format!(
        "{} tests × k = 1..{K_MAX} match the by-parts oracle; {right_half} right-half tests all 0",
        family.len()
    ))
}

// --- 8 ----------------------------------------------------------------------

fn solver() -> Check {
    let start = Instant::now();
    let err = |e: viproplab_core::Error| e.to_string();

    let vi = DiscreteVI::new(1, Some(vec![8.0]), FeasibleSet::uniform_box(1, -1.0, 1.0)).map_err(err)?;
    let res = solve(&vi).map_err(err)?;
    ensure((res.x_hat[0] - 1.0).abs() <= 1e-6, || format!("n = 1: x̂ = {}", res.x_hat[0]))?;

    let n = 32;
    let h = 1.0 / (n as f64 + 1.0);
    let mut r = rng(seed_from_env() ^ 0x5017);
    let mut instances = vec![
        (vec![h; n], FeasibleSet::centered_ball(n, 1.0)),
        (vec![h; n], FeasibleSet::uniform_box(n, -1.0, 1.0)),
        (vec![4.0 * h; n], FeasibleSet::uniform_box(n, -0.05, 0.05)),
    ];
    for _ in 0..3 {
        let f: Vec<f64> = (0..n).map(|_| h * r.gen_range(-3.0..3.0)).collect();
        instances.push((f, FeasibleSet::centered_ball(n, 0.5)));
    }
    let mut worst = 0.0f64;
    for (i, (f, set)) in instances.into_iter().enumerate() {
        let vi = DiscreteVI::new(n, Some(f), set).map_err(err)?;
        let res = solve(&vi).map_err(err)?;
        ensure(res.converged && res.residual < 1e-8, || {
            format!("n = 32 instance {i}: residual {:e} after {}", res.residual, res.iterations)
        })?;
        worst = worst.max(res.residual);
    }

    for set in [FeasibleSet::uniform_box(n, -1.0, 1.0), FeasibleSet::centered_ball(n, 2.0)] {
        let vi = DiscreteVI::new(n, None, set).map_err(err)?;
        let res = solve(&vi).map_err(err)?;
        ensure(res.x_hat.iter().all(|x| *x == 0.0), || "unforced x̂ != 0".into())?;
    }

    let vi = DiscreteVI::new(n, Some(vec![h; n]), FeasibleSet::uniform_box(n, -1.0, 1.0))
        .and_then(|vi| vi.with_tolerances(1e-12, 1_000_000))
        .map_err(err)?;
    let rep = perturbation_closedness(&vi, &vec![1.0; n], 10).map_err(err)?;
    ensure(rep.all_converged, || "a perturbed solve did not converge".into())?;
    ensure(rep.limit_residual <= 1e-6, || format!("limit residual {:e}", rep.limit_residual))?;

    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "x̂(n=1) = {:.9}; 6 n = 32 instances, worst residual {worst:.1e}; perturbation limit residual {:.1e}; {:.2?}",
        res.x_hat[0],
        rep.limit_residual,
        start.elapsed()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("exact norm identity", norm_identity),
        ("exact pairing identity", pairing_identity),
        ("counterexample certificates", certificates),
        ("ℓ² unit-vector pairing", l2_unit_vectors),
        ("monotonicity suite", monotone_pairs),
        ("quadrature oracle", quadrature_agreement),
        ("weak-convergence evidence", weak_evidence),
        ("solver", solver),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        match result {
            Ok(detail) => println!("PASS [{}] {name}: {detail} [{took:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
