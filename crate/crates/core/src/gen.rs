//! Constructors for the concrete families used by the lab: the sawtooth
//! sequence `u_k`, the scaled hat `v_α(t) = α·min{t, 1 − t}` and the unit
//! vectors `e_k` of ℓ².

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{format_rational, int, ExactReal, Rational, RationalRepr};
use crate::pwcalc::PiecewiseLinearFn;

/// Sequence kind names accepted on the command line.
pub const SEQUENCE_KINDS: [&str; 3] = ["sawtooth", "hat", "l2unit"];

/// The k-th sawtooth: value `1/k` at `(3i+1)/(6k)`, zero at `i/(2k)` for
/// `i = 0..=k`, and zero on `[1/2, 1]`.
pub fn sawtooth(k: u64) -> Result<PiecewiseLinearFn> {
    if k == 0 {
        return Err(Error::InvalidParameter("sawtooth index must be >= 1".into()));
    }
    let k = k as i64;
    let den = 6 * k;
    let height = Rational::new(1.into(), k.into());
    // nodes in units of 1/(6k): valleys at 3i, peaks at 3i+1
    let mut breakpoints = Vec::with_capacity(2 * k as usize + 2);
    let mut values = Vec::with_capacity(2 * k as usize + 2);
    for i in 0..k {
        breakpoints.push(Rational::new((3 * i).into(), den.into()));
        values.push(Rational::zero());
        breakpoints.push(Rational::new((3 * i + 1).into(), den.into()));
        values.push(height.clone());
    }
    breakpoints.push(Rational::new((3 * k).into(), den.into()));
    values.push(Rational::zero());
    breakpoints.push(Rational::one());
    values.push(Rational::zero());
    PiecewiseLinearFn::new(breakpoints, values)
}

/// `α·min{t, 1 − t}`.
pub fn scaled_hat(alpha: &Rational) -> Result<PiecewiseLinearFn> {
    if !alpha.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "hat scale must be positive, got {}",
            format_rational(alpha)
        )));
    }
    PiecewiseLinearFn::new(
        vec![Rational::zero(), Rational::new(1.into(), 2.into()), Rational::one()],
        vec![Rational::zero(), alpha / int(2), Rational::zero()],
    )
}

/// Smallest hat scale for which `Ψ(u_k, v_α) = 45 − 3α` turns negative:
/// the root of `‖∇u_k‖³ − 3α`, i.e. `α = 15`. Values strictly above it
/// give a negative gap.
pub fn hat_threshold() -> Rational {
    // ‖∇u_k‖³ = 45 and <F(u_k), v_α> = 3α for every k, so use k = 1.
    let u = sawtooth(1).expect("k = 1 is valid");
    let norm = u.derivative().pow_norm(3);
    let per_alpha = crate::pwcalc::p_laplacian_pairing(&u, &scaled_hat(&int(1)).expect("1 > 0"));
    match (norm, per_alpha) {
        (ExactReal::Exact(n), ExactReal::Exact(p)) => n / p,
        _ => unreachable!("pairings on rational data are exact"),
    }
}

/// The k-th standard unit vector of ℓ².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct L2SeqVector {
    index: u64,
}

impl L2SeqVector {
    pub fn new(index: u64) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidParameter("ℓ² indices start at 1".into()));
        }
        Ok(L2SeqVector { index })
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn to_sparse(self) -> SparseL2 {
        let mut entries = BTreeMap::new();
        entries.insert(self.index, Rational::one());
        SparseL2 { entries }
    }
}

/// `<e_a, e_b>`: 1 on the diagonal, 0 otherwise.
pub fn l2_pairing(a: &L2SeqVector, b: &L2SeqVector) -> ExactReal {
    ExactReal::Exact(if a.index == b.index {
        Rational::one()
    } else {
        Rational::zero()
    })
}

/// A finitely supported element of ℓ² with exact rational entries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SparseL2 {
    entries: BTreeMap<u64, Rational>,
}

impl SparseL2 {
    pub fn zero() -> Self {
        SparseL2::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (u64, Rational)>>(entries: I) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (i, v) in entries {
            if i == 0 {
                return Err(Error::InvalidParameter("ℓ² indices start at 1".into()));
            }
            if !v.is_zero() {
                out.insert(i, v);
            }
        }
        Ok(SparseL2 { entries: out })
    }

    pub fn entries(&self) -> &BTreeMap<u64, Rational> {
        &self.entries
    }

    pub fn dot(&self, other: &SparseL2) -> Rational {
        self.entries
            .iter()
            .filter_map(|(i, a)| other.entries.get(i).map(|b| a * b))
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    pub fn sub(&self, other: &SparseL2) -> SparseL2 {
        let mut entries = self.entries.clone();
        for (i, b) in &other.entries {
            let v = entries.remove(i).unwrap_or_else(Rational::zero) - b;
            if !v.is_zero() {
                entries.insert(*i, v);
            }
        }
        SparseL2 { entries }
    }
}

/// A point of one of the two model spaces: `W₀^{1,3}(0,1)` (piecewise
/// linear) with the p-Laplacian, or ℓ² with the identity operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Point {
    Function(PiecewiseLinearFn),
    L2(SparseL2),
}

impl Point {
    pub fn space(&self) -> &'static str {
        match self {
            Point::Function(_) => "W0^{1,3}(0,1)",
            Point::L2(_) => "l2",
        }
    }

    /// The zero element of the same space as `self`.
    pub fn zero_like(&self) -> Point {
        match self {
            Point::Function(_) => Point::Function(PiecewiseLinearFn::zero()),
            Point::L2(_) => Point::L2(SparseL2::zero()),
        }
    }
}

impl From<PiecewiseLinearFn> for Point {
    fn from(u: PiecewiseLinearFn) -> Self {
        Point::Function(u)
    }
}

impl From<SparseL2> for Point {
    fn from(x: SparseL2) -> Self {
        Point::L2(x)
    }
}

impl Serialize for SparseL2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.entries.len()))?;
        for (i, v) in &self.entries {
            seq.serialize_element(&(i, RationalRepr(v.clone())))?;
        }
        seq.end()
    }
}

/// Functions serialize as their breakpoint document; ℓ² points as
/// `{"l2_entries": [[index, ["num","den"]], ...]}`.
impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Function(u) => u.serialize(serializer),
            Point::L2(x) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("l2_entries", x)?;
                map.end()
            }
        }
    }
}

/// A symbolic sequence `{x_k}`, evaluable at any `k >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SequenceSpec {
    /// `u_k`, the sawtooth family.
    Sawtooth,
    /// The constant sequence `x_k = v_α`.
    ScaledHat { alpha: Rational },
    /// `e_k` in ℓ².
    L2UnitVector,
    /// Listed terms `x_1, x_2, ...`; the last one repeats forever.
    Explicit(Vec<Point>),
}

impl SequenceSpec {
    /// Resolves a CLI kind name; `hat` takes its scale from `alpha`.
    pub fn from_name(name: &str, alpha: &Rational) -> Result<Self> {
        match name {
            "sawtooth" => Ok(SequenceSpec::Sawtooth),
            "hat" => {
                scaled_hat(alpha)?;
                Ok(SequenceSpec::ScaledHat { alpha: alpha.clone() })
            }
            "l2unit" => Ok(SequenceSpec::L2UnitVector),
            other => Err(Error::InvalidParameter(format!(
                "unknown sequence kind {other:?}; expected one of {}",
                SEQUENCE_KINDS.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SequenceSpec::Sawtooth => "sawtooth",
            SequenceSpec::ScaledHat { .. } => "hat",
            SequenceSpec::L2UnitVector => "l2unit",
            SequenceSpec::Explicit(_) => "explicit",
        }
    }

    /// The weak limit the lab assumes for this family, when one is known.
    pub fn known_weak_limit(&self) -> Option<Point> {
        match self {
            SequenceSpec::Sawtooth => Some(Point::Function(PiecewiseLinearFn::zero())),
            SequenceSpec::ScaledHat { alpha } => scaled_hat(alpha).ok().map(Point::Function),
            SequenceSpec::L2UnitVector => Some(Point::L2(SparseL2::zero())),
            SequenceSpec::Explicit(_) => None,
        }
    }

    pub fn term(&self, k: u64) -> Result<Point> {
        if k == 0 {
            return Err(Error::InvalidParameter("sequence indices start at 1".into()));
        }
        match self {
            SequenceSpec::Sawtooth => sawtooth(k).map(Point::Function),
            SequenceSpec::ScaledHat { alpha } => scaled_hat(alpha).map(Point::Function),
            SequenceSpec::L2UnitVector => Ok(Point::L2(L2SeqVector::new(k)?.to_sparse())),
            SequenceSpec::Explicit(terms) => {
                let last = terms
                    .len()
                    .checked_sub(1)
                    .ok_or_else(|| Error::InvalidParameter("explicit sequence is empty".into()))?;
                Ok(terms[(k as usize - 1).min(last)].clone())
            }
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::ScaledHat { alpha } => write!(f, "hat(alpha={})", format_rational(alpha)),
            other => f.write_str(other.name()),
        }
    }
}
