//! Field backends with exactly computable non-archimedean absolute values.
//!
//! Two backends share one `Scalar` type:
//! - `Padic`: the rationals with the p-adic absolute value (a dense subfield
//!   of the p-adic numbers; every algorithm here is finitary in the scalars,
//!   so completeness of the ambient field is metadata, not a dependency).
//! - `Hahn`: finite generalized power series in `t` with rational
//!   coefficients, rational exponents and `|t| = 1/p`, optionally carrying a
//!   tail marker `O(t^r)` recording where knowledge stops. The completed
//!   field is spherically complete and has dense value group p^Q.
//!
//! The tail discipline is strict: a value whose every known coefficient has
//! cancelled cannot report a leading exponent, so the operation that would
//! create it fails with `PrecisionExhausted` instead of storing a lie. As a
//! consequence every stored scalar has a well-defined exact absolute value.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::magnitude::{parse_rational, power_search, GroupKind, Magnitude, ValueGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Padic,
    Hahn,
}

/// A valued field: backend, prime, and (for the Hahn backend) the default
/// relative depth at which inexact divisions truncate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDescriptor {
    backend: Backend,
    prime: u64,
    /// Relative truncation depth for inexact Hahn division; unused for Padic.
    default_tail_order: BigRational,
}

impl FieldDescriptor {
    pub fn padic(prime: u64) -> Result<Self> {
        ValueGroup::new(prime, GroupKind::Discrete)?;
        Ok(FieldDescriptor {
            backend: Backend::Padic,
            prime,
            default_tail_order: BigRational::from_integer(BigInt::from(5)),
        })
    }

    pub fn hahn(prime: u64) -> Result<Self> {
        Self::hahn_with_tail(prime, BigRational::from_integer(BigInt::from(5)))
    }

    pub fn hahn_with_tail(prime: u64, default_tail_order: BigRational) -> Result<Self> {
        ValueGroup::new(prime, GroupKind::Dense)?;
        if !default_tail_order.is_positive() {
            return Err(Error::Unsupported {
                context: format!("default tail order {default_tail_order} must be positive"),
            });
        }
        Ok(FieldDescriptor { backend: Backend::Hahn, prime, default_tail_order })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn default_tail_order(&self) -> &BigRational {
        &self.default_tail_order
    }

    pub fn value_group(&self) -> ValueGroup {
        let kind = match self.backend {
            Backend::Padic => GroupKind::Discrete,
            Backend::Hahn => GroupKind::Dense,
        };
        ValueGroup { prime: self.prime, kind }
    }

    /// Documents the completed field's meta-theory; both completions are
    /// spherically complete. No algorithm here consumes this flag.
    pub fn spherically_complete(&self) -> bool {
        true
    }

    pub fn zero(&self) -> Scalar {
        match self.backend {
            Backend::Padic => Scalar::Padic(BigRational::zero()),
            Backend::Hahn => Scalar::Hahn(HahnSeries::zero()),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_rational(BigRational::one())
    }

    pub fn from_integer(&self, n: i64) -> Scalar {
        self.from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// Embeds a rational constant (Hahn: coefficient of t^0).
    pub fn from_rational(&self, q: BigRational) -> Scalar {
        match self.backend {
            Backend::Padic => Scalar::Padic(q),
            Backend::Hahn => {
                if q.is_zero() {
                    Scalar::Hahn(HahnSeries::zero())
                } else {
                    Scalar::Hahn(HahnSeries {
                        terms: vec![(q, BigRational::zero())],
                        tail: None,
                    })
                }
            }
        }
    }

    /// A single Hahn term c*t^e (c nonzero). Errors on the Padic backend.
    pub fn monomial(&self, c: BigRational, e: BigRational) -> Result<Scalar> {
        match self.backend {
            Backend::Padic => Err(Error::Unsupported {
                context: "monomials exist only on the Hahn backend".into(),
            }),
            Backend::Hahn => {
                if c.is_zero() {
                    return Err(Error::Unsupported { context: "zero monomial coefficient".into() });
                }
                Ok(Scalar::Hahn(HahnSeries { terms: vec![(c, e)], tail: None }))
            }
        }
    }

    fn mismatch(&self, got: &Scalar) -> Error {
        Error::FieldMismatch {
            expected: self.to_string(),
            got: match got {
                Scalar::Padic(_) => "padic scalar".into(),
                Scalar::Hahn(_) => "hahn scalar".into(),
            },
        }
    }

    /// Checks that a scalar belongs to this backend.
    pub fn check(&self, s: &Scalar) -> Result<()> {
        match (self.backend, s) {
            (Backend::Padic, Scalar::Padic(_)) | (Backend::Hahn, Scalar::Hahn(_)) => Ok(()),
            _ => Err(self.mismatch(s)),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        match (self.backend, a, b) {
            (Backend::Padic, Scalar::Padic(x), Scalar::Padic(y)) => Ok(Scalar::Padic(x + y)),
            (Backend::Hahn, Scalar::Hahn(x), Scalar::Hahn(y)) => Ok(Scalar::Hahn(hadd(x, y)?)),
            _ => Err(self.mismatch(if matches!(a, Scalar::Padic(_)) == matches!(self.backend, Backend::Padic) { b } else { a })),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Result<Scalar> {
        self.check(a)?;
        Ok(match a {
            Scalar::Padic(x) => Scalar::Padic(-x),
            Scalar::Hahn(x) => Scalar::Hahn(HahnSeries {
                terms: x.terms.iter().map(|(c, e)| (-c, e.clone())).collect(),
                tail: x.tail.clone(),
            }),
        })
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        self.add(a, &self.neg(b)?)
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        match (self.backend, a, b) {
            (Backend::Padic, Scalar::Padic(x), Scalar::Padic(y)) => Ok(Scalar::Padic(x * y)),
            (Backend::Hahn, Scalar::Hahn(x), Scalar::Hahn(y)) => Ok(Scalar::Hahn(hmul(x, y))),
            _ => Err(self.mismatch(if matches!(a, Scalar::Padic(_)) == matches!(self.backend, Backend::Padic) { b } else { a })),
        }
    }

    /// Multiplicative inverse. Exact for Padic scalars and Hahn monomials;
    /// for a multi-term Hahn scalar the geometric series is truncated at
    /// `default_tail_order` above the inverse's leading exponent (or earlier
    /// if the operand's own tail knows less), and the result carries a tail.
    pub fn inv(&self, a: &Scalar) -> Result<Scalar> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match a {
            Scalar::Padic(x) => Ok(Scalar::Padic(x.recip())),
            Scalar::Hahn(x) => Ok(Scalar::Hahn(hinv(x, &self.default_tail_order))),
        }
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        self.mul(a, &self.inv(b)?)
    }

    /// Exact absolute value into the magnitude group. Total: the tail
    /// discipline guarantees every constructed scalar has a leading term or
    /// is exactly zero.
    pub fn abs(&self, a: &Scalar) -> Magnitude {
        match a {
            Scalar::Padic(x) => {
                if x.is_zero() {
                    return Magnitude::Zero;
                }
                let v = padic_valuation(x.numer(), self.prime)
                    - padic_valuation(x.denom(), self.prime);
                let e = BigRational::from_integer(BigInt::from(-v));
                Magnitude::prime_pow(self.prime, e).expect("field prime is prime")
            }
            Scalar::Hahn(x) => match x.leading() {
                None => Magnitude::Zero,
                Some((_, e)) => Magnitude::prime_pow(self.prime, -e.clone())
                    .expect("field prime is prime"),
            },
        }
    }

    /// The canonical scalar with the requested absolute value: a power of p
    /// (Padic) or a monomial in t (Hahn). Zero maps to zero.
    pub fn scalar_with_abs(&self, m: &Magnitude) -> Result<Scalar> {
        if m.is_zero() {
            return Ok(self.zero());
        }
        if !self.value_group().contains(m) {
            return Err(Error::NotInValueGroup { magnitude: m.to_string() });
        }
        let q = m.exponent_of(self.prime);
        match self.backend {
            Backend::Padic => {
                // |p^(-k)| = p^k = m, with k = q integral
                let k = q.to_integer();
                Ok(Scalar::Padic(rational_prime_power(self.prime, &-k)))
            }
            Backend::Hahn => self.monomial(BigRational::one(), -q),
        }
    }

    /// Deterministic scalar whose absolute value lies in (lo, hi], found in
    /// the same search order as coset representatives.
    pub fn scalar_with_abs_in(&self, lo: &Magnitude, hi: &Magnitude) -> Result<Scalar> {
        self.scalar_with_abs_in_mode(lo, hi, true)
    }

    pub(crate) fn scalar_with_abs_in_mode(
        &self,
        lo: &Magnitude,
        hi: &Magnitude,
        include_hi: bool,
    ) -> Result<Scalar> {
        let (_, m) = power_search(&self.value_group(), &Magnitude::one(), lo, hi, include_hi)?;
        self.scalar_with_abs(&m)
    }

    /// Parses a scalar in this field's grammar.
    ///
    /// Padic: `INT` or `INT/POSINT`. Hahn: `0`, or terms joined by `+`, each
    /// `COEFF*t^(RAT)` or `t^(RAT)` (coefficient 1), exponents strictly
    /// ascending, optionally ending in `+O(t^(RAT))`; e.g.
    /// `3/4*t^(1/2)+t^(2)+O(t^(5))`. No whitespace anywhere.
    pub fn parse_scalar(&self, s: &str) -> Result<Scalar> {
        let err = |reason: &str| Error::Parse {
            what: "scalar",
            input: s.to_string(),
            reason: reason.to_string(),
        };
        match self.backend {
            Backend::Padic => {
                let q = parse_rational(s).ok_or_else(|| err("expected INT or INT/POSINT"))?;
                Ok(Scalar::Padic(q))
            }
            Backend::Hahn => {
                if s == "0" {
                    return Ok(self.zero());
                }
                let mut terms: Vec<(BigRational, BigRational)> = Vec::new();
                let mut tail: Option<BigRational> = None;
                let parts: Vec<&str> = s.split('+').collect();
                for (i, part) in parts.iter().enumerate() {
                    if let Some(inner) = part.strip_prefix("O(t^(") {
                        if i + 1 != parts.len() {
                            return Err(err("tail marker must be the final term"));
                        }
                        if terms.is_empty() {
                            return Err(err("a pure tail marker has no leading term"));
                        }
                        let inner = inner.strip_suffix("))").ok_or_else(|| err("unclosed tail marker"))?;
                        let r = parse_rational(inner).ok_or_else(|| err("malformed tail exponent"))?;
                        tail = Some(r);
                        continue;
                    }
                    let (coeff, exp_src) = if let Some(rest) = part.strip_prefix("t^(") {
                        (BigRational::one(), rest)
                    } else if let Some(idx) = part.find("*t^(") {
                        let c = parse_rational(&part[..idx]).ok_or_else(|| err("malformed coefficient"))?;
                        if c.is_zero() {
                            return Err(err("zero coefficient"));
                        }
                        (c, &part[idx + 4..])
                    } else {
                        return Err(err("term must be COEFF*t^(RAT) or t^(RAT)"));
                    };
                    let exp_src = exp_src.strip_suffix(')').ok_or_else(|| err("unclosed exponent"))?;
                    let e = parse_rational(exp_src).ok_or_else(|| err("malformed exponent"))?;
                    if let Some((_, last)) = terms.last() {
                        if e <= *last {
                            return Err(err("exponents must be strictly ascending"));
                        }
                    }
                    terms.push((coeff, e));
                }
                if let Some(r) = &tail {
                    if terms.iter().any(|(_, e)| e >= r) {
                        return Err(err("term exponent at or above the tail marker"));
                    }
                }
                HahnSeries::new(terms, tail).map(Scalar::Hahn).map_err(|_| err("invalid series"))
            }
        }
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.backend {
            Backend::Padic => write!(f, "padic p={}", self.prime),
            Backend::Hahn => write!(f, "hahn p={} tail {}", self.prime, self.default_tail_order),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    backend: Backend,
    prime: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail_order: Option<String>,
}

impl Serialize for FieldDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tail_order = match self.backend {
            Backend::Padic => None,
            Backend::Hahn => Some(self.default_tail_order.to_string()),
        };
        FieldRepr { backend: self.backend, prime: self.prime, tail_order }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = FieldRepr::deserialize(d)?;
        match repr.backend {
            Backend::Padic => {
                if repr.tail_order.is_some() {
                    return Err(D::Error::custom("tail_order is a Hahn-backend field"));
                }
                FieldDescriptor::padic(repr.prime).map_err(D::Error::custom)
            }
            Backend::Hahn => match repr.tail_order {
                None => FieldDescriptor::hahn(repr.prime).map_err(D::Error::custom),
                Some(t) => {
                    let r = parse_rational(&t)
                        .ok_or_else(|| D::Error::custom("malformed tail_order"))?;
                    FieldDescriptor::hahn_with_tail(repr.prime, r).map_err(D::Error::custom)
                }
            },
        }
    }
}

/// One scalar value of either backend.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Padic(BigRational),
    Hahn(HahnSeries),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Padic(x) => x.is_zero(),
            Scalar::Hahn(x) => x.is_zero(),
        }
    }

    /// Whether the value is known exactly (no truncation tail).
    pub fn is_exact(&self) -> bool {
        match self {
            Scalar::Padic(_) => true,
            Scalar::Hahn(x) => x.tail.is_none(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Padic(x) => write!(f, "{x}"),
            Scalar::Hahn(x) => {
                if x.is_zero() {
                    return f.write_str("0");
                }
                for (i, (c, e)) in x.terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    if c.is_one() {
                        write!(f, "t^({e})")?;
                    } else {
                        write!(f, "{c}*t^({e})")?;
                    }
                }
                if let Some(r) = &x.tail {
                    write!(f, "+O(t^({r}))")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A finite generalized power series in t: nonzero rational coefficients at
/// strictly increasing rational exponents, plus an optional tail marker
/// strictly above every stored exponent. A tail with no terms is not a
/// representable value (its absolute value would be unknown), so constructors
/// refuse it; `is_zero` therefore means exact zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HahnSeries {
    terms: Vec<(BigRational, BigRational)>,
    tail: Option<BigRational>,
}

impl HahnSeries {
    pub fn zero() -> Self {
        HahnSeries { terms: Vec::new(), tail: None }
    }

    pub fn new(terms: Vec<(BigRational, BigRational)>, tail: Option<BigRational>) -> Result<Self> {
        for w in terms.windows(2) {
            if w[0].1 >= w[1].1 {
                return Err(Error::Unsupported {
                    context: "series exponents must be strictly ascending".into(),
                });
            }
        }
        if terms.iter().any(|(c, _)| c.is_zero()) {
            return Err(Error::Unsupported { context: "zero series coefficient".into() });
        }
        if let Some(r) = &tail {
            if terms.iter().any(|(_, e)| e >= r) {
                return Err(Error::Unsupported {
                    context: "series term at or above its tail order".into(),
                });
            }
            if terms.is_empty() {
                return Err(Error::PrecisionExhausted {
                    context: format!("series is O(t^({r})) with no known term"),
                });
            }
        }
        Ok(HahnSeries { terms, tail })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.tail.is_none()
    }

    /// Leading (coefficient, exponent), None for exact zero.
    pub fn leading(&self) -> Option<(&BigRational, &BigRational)> {
        self.terms.first().map(|(c, e)| (c, e))
    }

    pub fn terms(&self) -> &[(BigRational, BigRational)] {
        &self.terms
    }

    pub fn tail(&self) -> Option<&BigRational> {
        self.tail.as_ref()
    }
}

fn min_opt(a: Option<&BigRational>, b: Option<&BigRational>) -> Option<BigRational> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => Some(y.clone()),
        (Some(x), Some(y)) => Some(if x <= y { x.clone() } else { y.clone() }),
    }
}

fn hadd(a: &HahnSeries, b: &HahnSeries) -> Result<HahnSeries> {
    let tail = min_opt(a.tail.as_ref(), b.tail.as_ref());
    let mut acc: BTreeMap<BigRational, BigRational> = BTreeMap::new();
    for (c, e) in a.terms.iter().chain(b.terms.iter()) {
        let slot = acc.entry(e.clone()).or_insert_with(BigRational::zero);
        *slot += c;
    }
    let terms: Vec<_> = acc
        .into_iter()
        .filter(|(e, c)| !c.is_zero() && tail.as_ref().map_or(true, |r| e < r))
        .map(|(e, c)| (c, e))
        .collect();
    if terms.is_empty() {
        if let Some(r) = tail {
            return Err(Error::PrecisionExhausted {
                context: format!("all known terms cancelled below O(t^({r}))"),
            });
        }
    }
    HahnSeries::new(terms, tail)
}

fn hmul(a: &HahnSeries, b: &HahnSeries) -> HahnSeries {
    // exact zero absorbs even a tailed operand
    if a.is_zero() || b.is_zero() {
        return HahnSeries::zero();
    }
    let lead_a = &a.terms[0].1;
    let lead_b = &b.terms[0].1;
    let mut tail: Option<BigRational> = None;
    if let Some(ta) = &a.tail {
        tail = min_opt(tail.as_ref(), Some(&(ta + lead_b)));
    }
    if let Some(tb) = &b.tail {
        tail = min_opt(tail.as_ref(), Some(&(tb + lead_a)));
    }
    if let (Some(ta), Some(tb)) = (&a.tail, &b.tail) {
        tail = min_opt(tail.as_ref(), Some(&(ta + tb)));
    }
    let mut acc: BTreeMap<BigRational, BigRational> = BTreeMap::new();
    for (ca, ea) in &a.terms {
        for (cb, eb) in &b.terms {
            let e = ea + eb;
            if tail.as_ref().map_or(true, |r| &e < r) {
                let slot = acc.entry(e).or_insert_with(BigRational::zero);
                *slot += ca * cb;
            }
        }
    }
    let terms: Vec<_> = acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (c, e))
        .collect();
    // the leading product term has the strictly minimal exponent sum, sits
    // below every tail candidate and cannot cancel, so the result is never
    // a bare tail
    HahnSeries::new(terms, tail).expect("product of nonzero series keeps its leading term")
}

/// Inverse of a nonzero series. Monomials invert exactly; otherwise the
/// geometric series runs to `default_depth` above the result's leading
/// exponent, clipped by whatever the operand's own tail already hides.
fn hinv(a: &HahnSeries, default_depth: &BigRational) -> HahnSeries {
    let (c0, e0) = a.leading().expect("nonzero series has a leading term");
    let c0 = c0.clone();
    let e0 = e0.clone();
    let rel_depth = match &a.tail {
        Some(r) => {
            let avail = r - &e0;
            if avail < *default_depth { avail } else { default_depth.clone() }
        }
        None => default_depth.clone(),
    };
    if a.terms.len() == 1 && a.tail.is_none() {
        return HahnSeries { terms: vec![(c0.recip(), -e0)], tail: None };
    }
    // relative series u with a = c0 t^e0 (1 + u), u exponents > 0
    let neg_u: Vec<(BigRational, BigRational)> = a.terms[1..]
        .iter()
        .map(|(c, e)| (-(c / &c0), e - &e0))
        .filter(|(_, e)| *e < rel_depth)
        .collect();
    let mut acc: BTreeMap<BigRational, BigRational> = BTreeMap::new();
    acc.insert(BigRational::zero(), BigRational::one());
    let mut pow: Vec<(BigRational, BigRational)> =
        vec![(BigRational::one(), BigRational::zero())];
    while !neg_u.is_empty() {
        let mut next: BTreeMap<BigRational, BigRational> = BTreeMap::new();
        for (cp, ep) in &pow {
            for (cu, eu) in &neg_u {
                let e = ep + eu;
                if e < rel_depth {
                    let slot = next.entry(e).or_insert_with(BigRational::zero);
                    *slot += cp * cu;
                }
            }
        }
        next.retain(|_, c| !c.is_zero());
        if next.is_empty() {
            break;
        }
        for (e, c) in &next {
            let slot = acc.entry(e.clone()).or_insert_with(BigRational::zero);
            *slot += c;
        }
        pow = next.into_iter().map(|(e, c)| (c, e)).collect();
    }
    let terms: Vec<_> = acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (&c / &c0, e - &e0))
        .collect();
    let tail = Some(&rel_depth - &e0);
    HahnSeries::new(terms, tail).expect("inverse keeps its leading term")
}

/// p-adic valuation of a nonzero integer.
fn padic_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0i64;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        rest = q;
        v += 1;
    }
}

/// p^k as an exact rational (k may be negative).
fn rational_prime_power(p: u64, k: &BigInt) -> BigRational {
    let mag = BigInt::from(p).pow(k.magnitude().to_u32_digits().first().copied().unwrap_or(0));
    if k.is_negative() {
        BigRational::new(BigInt::one(), mag)
    } else {
        BigRational::from_integer(mag)
    }
}

/// Self-describing parse used by deserializers that later re-check the
/// backend: a bare rational is Padic, anything mentioning t is Hahn.
pub fn parse_scalar_any(s: &str) -> Result<Scalar> {
    if s.contains('t') || s.contains('O') {
        let f = FieldDescriptor::hahn(2)?;
        f.parse_scalar(s)
    } else {
        let f = FieldDescriptor::padic(2)?;
        f.parse_scalar(s)
    }
}

impl FieldDescriptor {
    /// Re-homes a backend-ambiguous parsed scalar (only zero is ambiguous).
    pub fn coerce(&self, s: Scalar) -> Result<Scalar> {
        if self.check(&s).is_ok() {
            return Ok(s);
        }
        if s.is_zero() {
            return Ok(self.zero());
        }
        Err(self.mismatch(&s))
    }

    /// Compares absolute values without materializing both magnitudes when
    /// backends make it cheap; helper for hot paths.
    pub fn abs_cmp(&self, a: &Scalar, b: &Scalar) -> Ordering {
        self.abs(a).cmp_mag(&self.abs(b))
    }
}
