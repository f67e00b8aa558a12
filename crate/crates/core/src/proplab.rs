//! Executable certificates for operator properties along explicit sequences.
//!
//! Limits of infinite sequences are not computable, so every check here
//! works on a finite window `k = 1..=k_max`. A sequence counts as having a
//! limit when its tail window is exactly constant (exact data) or Cauchy to
//! within [`CAUCHY_TOL`] (approximate data); otherwise the verdict is
//! `inconclusive`. All verdicts are statements about the given sequence
//! and direction, never about the operator as a whole.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{int, ExactReal, Rational};
use crate::gen::{Point, SequenceSpec};
use crate::pwcalc::{self, PiecewiseLinearFn, TestFunction};

pub const DEFAULT_KMAX: u64 = 64;
pub const MIN_KMAX: u64 = 8;
pub const CAUCHY_TOL: f64 = 1e-12;
pub const HOLDER_RTOL: f64 = 1e-9;

/// Allowed growth of `k·|∫∇x_k φ|` from the head half of the window to the
/// tail half before the decay evidence is rejected.
pub const DECAY_SLACK: (i64, i64) = (5, 4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitMethod {
    EventuallyConstant,
    CauchyTail,
    None,
}

/// The values `<F(x_k), x_k − y>` for `k = 1..=k_max`.
#[derive(Debug, Clone, Serialize)]
pub struct PairingSequenceReport {
    pub indices: Vec<u64>,
    pub values: Vec<ExactReal>,
    pub limit_candidate: Option<ExactReal>,
    pub method: LimitMethod,
    pub tail_window: usize,
}

impl PairingSequenceReport {
    /// First and last index of the tail window.
    pub fn k_window(&self) -> [u64; 2] {
        let last = *self.indices.last().unwrap_or(&0);
        [last + 1 - self.tail_window as u64, last]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Property {
    KyFanViolation,
    PseudomonotonePremiseFails,
    MonotoneGapNonneg,
    BoundedHolder,
    #[serde(rename = "remark32")]
    L2UnitLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Established,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Exactness {
    Exact,
    Approximate,
}

impl Exactness {
    fn of(values: &[&ExactReal]) -> Self {
        if values.iter().all(|v| v.is_exact()) {
            Exactness::Exact
        } else {
            Exactness::Approximate
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Witness {
    pub y: Option<Point>,
    pub margin: Option<ExactReal>,
    pub tail_constant: Option<ExactReal>,
    pub k_window: Option<[u64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub property: Property,
    pub verdict: Verdict,
    pub witness: Witness,
    pub exactness: Exactness,
}

impl Certificate {
    pub fn is_established(&self) -> bool {
        self.verdict == Verdict::Established
    }

    fn inconclusive(property: Property, report: &PairingSequenceReport, what: &str) -> Self {
        Certificate {
            property,
            verdict: Verdict::Inconclusive,
            witness: Witness {
                k_window: Some(report.k_window()),
                note: Some(format!(
                    "{what}: no eventually-constant or Cauchy tail over the last {} terms",
                    report.tail_window
                )),
                ..Witness::default()
            },
            exactness: Exactness::of(&report.values.iter().collect::<Vec<_>>()),
        }
    }
}

fn check_kmax(k_max: u64) -> Result<()> {
    if k_max < MIN_KMAX {
        return Err(Error::InvalidParameter(format!(
            "k_max must be at least {MIN_KMAX}, got {k_max}"
        )));
    }
    Ok(())
}

fn same_space(x: &Point, y: &Point) -> Result<()> {
    if std::mem::discriminant(x) != std::mem::discriminant(y) {
        return Err(Error::SpaceMismatch(format!(
            "{} vs {}",
            x.space(),
            y.space()
        )));
    }
    Ok(())
}

/// `Ψ(x, y) = <F(x), x − y>` for the p-Laplacian.
pub fn equilibrium_gap(x: &PiecewiseLinearFn, y: &PiecewiseLinearFn) -> ExactReal {
    let direction = pwcalc::lin_comb(&Rational::one(), x, &-Rational::one(), y);
    pwcalc::p_laplacian_pairing(x, &direction)
}

/// `Ψ(x, y)` in whichever space the points live: p-Laplacian on functions,
/// identity on ℓ².
pub fn point_gap(x: &Point, y: &Point) -> Result<ExactReal> {
    same_space(x, y)?;
    Ok(match (x, y) {
        (Point::Function(x), Point::Function(y)) => equilibrium_gap(x, y),
        (Point::L2(x), Point::L2(y)) => ExactReal::Exact(x.dot(&x.sub(y))),
        _ => unreachable!(),
    })
}

fn detect_limit(values: &[ExactReal], window: usize) -> (Option<ExactReal>, LimitMethod) {
    let tail = &values[values.len() - window..];
    let first = &tail[0];
    if tail.iter().all(ExactReal::is_exact) {
        if tail.iter().all(|v| v == first) {
            return (Some(first.clone()), LimitMethod::EventuallyConstant);
        }
        return (None, LimitMethod::None);
    }
    let cauchy = tail
        .windows(2)
        .all(|w| (w[1].to_f64() - w[0].to_f64()).abs() < CAUCHY_TOL);
    if cauchy {
        let last = tail[tail.len() - 1].to_f64();
        (Some(ExactReal::Approx(last)), LimitMethod::CauchyTail)
    } else {
        (None, LimitMethod::None)
    }
}

/// `<F(x_k), x_k − y>` for `k = 1..=k_max`, with limit detection over the
/// last `k_max / 2` terms.
pub fn pairing_sequence(seq: &SequenceSpec, y: &Point, k_max: u64) -> Result<PairingSequenceReport> {
    check_kmax(k_max)?;
    let values = (1..=k_max)
        .into_par_iter()
        .map(|k| point_gap(&seq.term(k)?, y))
        .collect::<Result<Vec<_>>>()?;
    let tail_window = (k_max / 2) as usize;
    let (limit_candidate, method) = detect_limit(&values, tail_window);
    Ok(PairingSequenceReport {
        indices: (1..=k_max).collect(),
        values,
        limit_candidate,
        method,
        tail_window,
    })
}

/// Looks for a failure of weak sequential lower semicontinuity of
/// `x ↦ <F(x), x − y>` along `seq → limit`: established when the detected
/// limit `L` of the pairing sequence satisfies `Ψ(limit, y) > L`.
pub fn ky_fan_violation_certificate(
    seq: &SequenceSpec,
    limit: &Point,
    y: &Point,
    k_max: u64,
) -> Result<Certificate> {
    let report = pairing_sequence(seq, y, k_max)?;
    let at_limit = point_gap(limit, y)?;
    let Some(tail) = report.limit_candidate.clone() else {
        return Ok(Certificate::inconclusive(
            Property::KyFanViolation,
            &report,
            "limit of <F(x_k), x_k - y>",
        ));
    };
    let margin = &at_limit - &tail;
    let verdict = if margin.is_positive() {
        Verdict::Established
    } else {
        Verdict::Refuted
    };
    let note = format!(
        "Psi(limit, y) = {at_limit}, tail = {tail}; {}",
        if verdict == Verdict::Established {
            "lower semicontinuity fails along this sequence"
        } else {
            "no violation in this direction"
        }
    );
    Ok(Certificate {
        property: Property::KyFanViolation,
        verdict,
        exactness: Exactness::of(&[&at_limit, &tail]),
        witness: Witness {
            y: Some(y.clone()),
            margin: Some(margin),
            tail_constant: Some(tail),
            k_window: Some(report.k_window()),
            note: Some(note),
        },
    })
}

/// Checks whether `limsup <F(x_k), x_k − x> <= 0` fails along `seq → limit`.
/// Established when the tail constant is strictly positive, in which case
/// pseudomonotonicity places no requirement on this sequence.
pub fn pseudomonotone_premise_audit(
    seq: &SequenceSpec,
    limit: &Point,
    k_max: u64,
) -> Result<Certificate> {
    let report = pairing_sequence(seq, limit, k_max)?;
    Ok(premise_certificate(Property::PseudomonotonePremiseFails, limit, &report))
}

fn premise_certificate(property: Property, limit: &Point, report: &PairingSequenceReport) -> Certificate {
    let Some(tail) = report.limit_candidate.clone() else {
        return Certificate::inconclusive(property, report, "limsup of <F(x_k), x_k - x>");
    };
    let verdict = if tail.is_positive() {
        Verdict::Established
    } else {
        Verdict::Refuted
    };
    let note = if verdict == Verdict::Established {
        format!("limsup = {tail} > 0: the premise fails")
    } else {
        format!("limsup = {tail} <= 0: the premise holds")
    };
    Certificate {
        property,
        verdict,
        exactness: Exactness::of(&[&tail]),
        witness: Witness {
            y: Some(limit.clone()),
            margin: Some(tail.clone()),
            tail_constant: Some(tail),
            k_window: Some(report.k_window()),
            note: Some(note),
        },
    }
}

/// `<F(u) − F(w), u − w>`; nonnegative for the p-Laplacian.
pub fn monotone_gap_check(u: &PiecewiseLinearFn, w: &PiecewiseLinearFn) -> ExactReal {
    pwcalc::monotone_gap(u, w)
}

/// Runs [`monotone_gap_check`] over `pairs`. Established when every gap is
/// nonnegative; the witness margin is the smallest gap seen.
pub fn monotone_gap_certificate(pairs: &[(PiecewiseLinearFn, PiecewiseLinearFn)]) -> Certificate {
    let gaps: Vec<ExactReal> = pairs
        .par_iter()
        .map(|(u, w)| monotone_gap_check(u, w))
        .collect();
    let min = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("exact gaps are ordered"));
    let violations = gaps.iter().filter(|g| **g < ExactReal::zero()).count();
    let (verdict, note) = match min {
        None => (Verdict::Inconclusive, "no pairs supplied".to_string()),
        Some(_) if violations == 0 => (
            Verdict::Established,
            format!("{} pairs, all gaps nonnegative", gaps.len()),
        ),
        Some((i, _)) => (
            Verdict::Refuted,
            format!("{violations} negative gaps; smallest at pair {i}"),
        ),
    };
    Certificate {
        property: Property::MonotoneGapNonneg,
        verdict,
        exactness: Exactness::Exact,
        witness: Witness {
            margin: min.map(|(_, g)| g.clone()),
            note: Some(note),
            ..Witness::default()
        },
    }
}

/// Hölder bound `|<F(u), w>| <= ‖∇u‖²_{L³} ‖∇w‖_{L³}` checked in floating
/// point with relative tolerance [`HOLDER_RTOL`].
pub fn holder_boundedness_check(u: &PiecewiseLinearFn, w: &PiecewiseLinearFn) -> Certificate {
    let lhs = pwcalc::p_laplacian_pairing(u, w).abs();
    let nu = u.derivative().pow_norm(3).to_f64();
    let nw = w.derivative().pow_norm(3).to_f64();
    let rhs = nu.powf(2.0 / 3.0) * nw.powf(1.0 / 3.0);
    let lhs_f = lhs.to_f64();
    let verdict = if lhs_f <= rhs + HOLDER_RTOL * rhs.abs().max(f64::MIN_POSITIVE) {
        Verdict::Established
    } else {
        Verdict::Refuted
    };
    Certificate {
        property: Property::BoundedHolder,
        verdict,
        exactness: Exactness::Approximate,
        witness: Witness {
            y: Some(Point::Function(w.clone())),
            margin: Some(ExactReal::Approx(rhs - lhs_f)),
            note: Some(format!("|<F(u), w>| = {lhs}, bound = {rhs:e}")),
            ..Witness::default()
        },
    }
}

/// Runs the premise audit on the ℓ² unit-vector sequence with `F = Id`.
/// The claim under test is that a convergent `<F(e_k), e_k − 0>` must tend
/// to zero; established means its limit is nonzero.
#[derive(Debug, Clone, Serialize)]
pub struct L2UnitReport {
    pub report: PairingSequenceReport,
    pub certificate: Certificate,
    pub limit_is_zero: Option<bool>,
}

pub fn l2_unit_check(k_max: u64) -> Result<L2UnitReport> {
    let seq = SequenceSpec::L2UnitVector;
    let limit = seq.known_weak_limit().expect("ℓ² unit vectors tend weakly to 0");
    let report = pairing_sequence(&seq, &limit, k_max)?;
    let mut certificate = premise_certificate(Property::L2UnitLimit, &limit, &report);
    let limit_is_zero = report.limit_candidate.as_ref().map(ExactReal::is_zero);
    certificate.verdict = match limit_is_zero {
        Some(false) => Verdict::Established,
        Some(true) => Verdict::Refuted,
        None => Verdict::Inconclusive,
    };
    if let Some(zero) = limit_is_zero {
        certificate.witness.note = Some(if zero {
            "limit = 0".into()
        } else {
            "limit != 0".into()
        });
    }
    Ok(L2UnitReport {
        report,
        certificate,
        limit_is_zero,
    })
}

/// Monomials `t⁰..t⁵` and every dyadic indicator of level `0..=6`.
pub fn default_test_family() -> Vec<TestFunction> {
    let mut family: Vec<TestFunction> = (0..=5)
        .map(|m| TestFunction::monomial(m).expect("degree within cap"))
        .collect();
    for level in 0..=6u32 {
        for j in 0..(1u64 << level) {
            family.push(TestFunction::dyadic(level, j).expect("level within cap"));
        }
    }
    family
}

#[derive(Debug, Clone, Serialize)]
pub struct TestEvidence {
    pub test: String,
    pub integrals: Vec<ExactReal>,
    /// `max_k k·|∫∇x_k φ|` over the whole window.
    pub bound_constant: ExactReal,
    /// The same maximum restricted to `k <= k_max / 2`.
    pub head_constant: ExactReal,
    pub all_zero: bool,
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakEvidenceReport {
    pub sequence: String,
    pub k_max: u64,
    pub tests: Vec<TestEvidence>,
    /// `∫|x_k|³` for each k: strong L³ decay of the sequence itself.
    pub l3_cubes: Vec<ExactReal>,
    pub consistent: bool,
    pub verdict: String,
}

/// Exact test integrals `∫∇x_k φ` for every `φ` in `family`, with a decay
/// bound `C/k` fitted per test function. A test is consistent with
/// `∇x_k ⇀ 0` when `k·|∫∇x_k φ|` over the tail half of the window stays
/// within [`DECAY_SLACK`] of its maximum over the head half. This is
/// evidence only: weak convergence cannot be certified from finitely many
/// tests.
pub fn weak_convergence_evidence(
    seq: &SequenceSpec,
    family: &[TestFunction],
    k_max: u64,
) -> Result<WeakEvidenceReport> {
    check_kmax(k_max)?;
    if family.is_empty() {
        return Err(Error::InvalidParameter("test family is empty".into()));
    }
    for phi in family {
        phi.validate()?;
    }
    let terms = (1..=k_max)
        .into_par_iter()
        .map(|k| match seq.term(k)? {
            Point::Function(u) => Ok(u),
            other => Err(Error::SpaceMismatch(format!(
                "weak-convergence evidence needs function terms, got {}",
                other.space()
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    let derivatives: Vec<_> = terms.par_iter().map(PiecewiseLinearFn::derivative).collect();
    let l3_cubes = terms
        .par_iter()
        .map(|u| ExactReal::Exact(u.pow_integral(3)))
        .collect();

    let half = (k_max / 2) as usize;
    let (slack_num, slack_den) = DECAY_SLACK;
    let tests = family
        .par_iter()
        .map(|phi| {
            let integrals = derivatives
                .iter()
                .map(|d| pwcalc::test_integral(d, phi))
                .collect::<Result<Vec<_>>>()?;
            let scaled: Vec<Rational> = integrals
                .iter()
                .zip(1i64..)
                .map(|(v, k)| v.as_exact().expect("rational data").abs() * int(k))
                .collect();
            let head = scaled[..half].iter().max().cloned().unwrap_or_else(Rational::zero);
            let tail = scaled[half..].iter().max().cloned().unwrap_or_else(Rational::zero);
            let bound = if head > tail { head.clone() } else { tail.clone() };
            let consistent = tail * int(slack_den) <= &head * int(slack_num);
            Ok(TestEvidence {
                test: phi.label(),
                all_zero: integrals.iter().all(ExactReal::is_zero),
                integrals,
                bound_constant: ExactReal::Exact(bound),
                head_constant: ExactReal::Exact(head),
                consistent,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let consistent = tests.iter().all(|t| t.consistent);
    let verdict = if consistent {
        "EVIDENCE (not proof): consistent with weak null convergence of the derivatives"
    } else {
        "EVIDENCE (not proof): NOT consistent with weak null convergence of the derivatives"
    };
    Ok(WeakEvidenceReport {
        sequence: seq.to_string(),
        k_max,
        tests,
        l3_cubes,
        consistent,
        verdict: verdict.into(),
    })
}
