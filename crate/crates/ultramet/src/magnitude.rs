//! Magnitudes: zero together with the positive reals expressible as finite
//! products of prime powers with rational exponents.
//!
//! This class is closed under products, quotients and k-th roots, which is
//! exactly what norm bookkeeping needs, and its order is decidable: equality
//! is a structural check on canonical factor maps, and strict comparison
//! reduces to the sign of a nonzero rational combination of logarithms of
//! primes, refined to arbitrary precision with exact error control.
//!
//! Absolute values of field elements, space weights, norms, distances,
//! orthogonality defects and all the `t`/`epsilon` thresholds in the crate
//! live here; no decision anywhere is made with floating point.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical factor map: prime -> nonzero rational exponent.
pub type Exponents = BTreeMap<u64, BigRational>;

/// A nonnegative real: zero, or a formal product of prime powers.
///
/// Invariant: `Pos` never stores a zero exponent, so the empty map is 1 and
/// structural equality coincides with numerical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Magnitude {
    Zero,
    Pos(Exponents),
}

impl Magnitude {
    pub fn one() -> Self {
        Magnitude::Pos(Exponents::new())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Magnitude::Zero)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Magnitude::Pos(m) if m.is_empty())
    }

    /// Builds p^e; e may be zero (giving 1). Errors if p is not prime.
    pub fn prime_pow(p: u64, e: BigRational) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        let mut m = Exponents::new();
        if !e.is_zero() {
            m.insert(p, e);
        }
        Ok(Magnitude::Pos(m))
    }

    pub fn from_u64(n: u64) -> Result<Self> {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact factorization of a nonnegative rational.
    pub fn from_rational(q: &BigRational) -> Result<Self> {
        if q.is_negative() {
            return Err(Error::Unsupported {
                context: format!("negative rational {q} has no magnitude"),
            });
        }
        if q.is_zero() {
            return Ok(Magnitude::Zero);
        }
        let mut map = Exponents::new();
        for (p, k) in factor_bigint(q.numer())? {
            map.insert(p, BigRational::from_integer(BigInt::from(k)));
        }
        for (p, k) in factor_bigint(q.denom())? {
            let e = map.entry(p).or_insert_with(BigRational::zero);
            *e -= BigRational::from_integer(BigInt::from(k));
            if e.is_zero() {
                map.remove(&p);
            }
        }
        Ok(Magnitude::Pos(map))
    }

    /// The exponent of p in the factor map (zero if absent). Zero magnitude has no exponents.
    pub fn exponent_of(&self, p: u64) -> BigRational {
        match self {
            Magnitude::Zero => BigRational::zero(),
            Magnitude::Pos(m) => m.get(&p).cloned().unwrap_or_else(BigRational::zero),
        }
    }

    pub fn exponents(&self) -> Option<&Exponents> {
        match self {
            Magnitude::Zero => None,
            Magnitude::Pos(m) => Some(m),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Magnitude::Zero, _) | (_, Magnitude::Zero) => Magnitude::Zero,
            (Magnitude::Pos(a), Magnitude::Pos(b)) => {
                let mut out = a.clone();
                for (p, e) in b {
                    let slot = out.entry(*p).or_insert_with(BigRational::zero);
                    *slot += e;
                    if slot.is_zero() {
                        out.remove(p);
                    }
                }
                Magnitude::Pos(out)
            }
        }
    }

    pub fn recip(&self) -> Result<Self> {
        match self {
            Magnitude::Zero => Err(Error::DivisionByZero),
            Magnitude::Pos(m) => {
                Ok(Magnitude::Pos(m.iter().map(|(p, e)| (*p, -e)).collect()))
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    /// k-th root, k >= 1; exponents divide exactly. Zero has no root here.
    pub fn root(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Unsupported { context: "0th root".into() });
        }
        match self {
            Magnitude::Zero => Err(Error::ZeroMagnitude { context: "root" }),
            Magnitude::Pos(m) => {
                let kk = BigRational::from_integer(BigInt::from(k));
                Ok(Magnitude::Pos(m.iter().map(|(p, e)| (*p, e / &kk)).collect()))
            }
        }
    }

    /// Integer power. Zero^k is Zero for k > 0 and undefined otherwise.
    pub fn pow(&self, k: i64) -> Result<Self> {
        match self {
            Magnitude::Zero => {
                if k > 0 {
                    Ok(Magnitude::Zero)
                } else {
                    Err(Error::ZeroMagnitude { context: "pow" })
                }
            }
            Magnitude::Pos(m) => {
                if k == 0 {
                    return Ok(Magnitude::one());
                }
                let kk = BigRational::from_integer(BigInt::from(k));
                Ok(Magnitude::Pos(
                    m.iter()
                        .map(|(p, e)| (*p, e * &kk))
                        .filter(|(_, e)| !e.is_zero())
                        .collect(),
                ))
            }
        }
    }

    /// Total order. Equality is structural (the representation is canonical);
    /// strict comparison resolves sign(sum e_i ln p_i) by interval refinement,
    /// which terminates because logarithms of distinct primes are linearly
    /// independent over the rationals.
    pub fn cmp_mag(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Magnitude::Zero, Magnitude::Zero) => Ordering::Equal,
            (Magnitude::Zero, Magnitude::Pos(_)) => Ordering::Less,
            (Magnitude::Pos(_), Magnitude::Zero) => Ordering::Greater,
            (Magnitude::Pos(a), Magnitude::Pos(b)) => {
                let mut diff: Vec<(u64, BigRational)> = Vec::new();
                for (p, e) in a {
                    let d = e - other.exponent_of(*p);
                    if !d.is_zero() {
                        diff.push((*p, d));
                    }
                }
                for (p, e) in b {
                    if !a.contains_key(p) {
                        diff.push((*p, -e));
                    }
                }
                if diff.is_empty() {
                    return Ordering::Equal;
                }
                // single-signed products of p^e compare against 1 for free
                if diff.iter().all(|(_, e)| e.is_positive()) {
                    return Ordering::Greater;
                }
                if diff.iter().all(|(_, e)| e.is_negative()) {
                    return Ordering::Less;
                }
                refine_log_sign(&diff)
            }
        }
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Magnitude {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_mag(other)
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Zero => f.write_str("0"),
            Magnitude::Pos(m) if m.is_empty() => f.write_str("1"),
            Magnitude::Pos(m) => {
                let mut first = true;
                for (p, e) in m {
                    if !first {
                        f.write_str("*")?;
                    }
                    first = false;
                    write!(f, "{p}^{e}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Magnitude {
    type Err = Error;

    /// Grammar: `0`, `1`, or `TERM ("*" TERM)*` with `TERM := PRIME "^" RATIONAL`,
    /// primes strictly ascending, no whitespace. `1` is the empty product.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse {
            what: "magnitude",
            input: s.to_string(),
            reason: reason.to_string(),
        };
        match s {
            "0" => return Ok(Magnitude::Zero),
            "1" => return Ok(Magnitude::one()),
            "" => return Err(err("empty input")),
            _ => {}
        }
        let mut map = Exponents::new();
        let mut last_p: Option<u64> = None;
        for term in s.split('*') {
            let (ps, es) = term.split_once('^').ok_or_else(|| err("term is missing ^"))?;
            if ps.is_empty() || !ps.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err("prime must be a bare decimal integer"));
            }
            if ps.len() > 1 && ps.starts_with('0') {
                return Err(err("leading zero in prime"));
            }
            let p: u64 = ps.parse().map_err(|_| err("prime does not fit in 64 bits"))?;
            if !is_prime_u64(p) {
                return Err(Error::NotPrime(p));
            }
            if let Some(lp) = last_p {
                if p <= lp {
                    return Err(err("primes must be strictly ascending"));
                }
            }
            last_p = Some(p);
            let e = parse_rational(es).ok_or_else(|| err("malformed exponent"))?;
            if !e.is_zero() {
                map.insert(p, e);
            }
        }
        Ok(Magnitude::Pos(map))
    }
}

impl Serialize for Magnitude {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Magnitude {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Strict rational literal: `INT` or `INT "/" POSINT`, no signs on the
/// denominator, no leading zeros, no whitespace. Shared by the scalar grammar.
pub(crate) fn parse_rational(s: &str) -> Option<BigRational> {
    let (ns, ds) = match s.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let digits = ns.strip_prefix('-').unwrap_or(ns);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    let mut num = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    if ns.starts_with('-') {
        num = -num;
    }
    let den = match ds {
        Some(d) => {
            if d.is_empty() || d.starts_with('0') || !d.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            BigInt::parse_bytes(d.as_bytes(), 10)?
        }
        None => BigInt::one(),
    };
    Some(BigRational::new(num, den))
}

// ---------------------------------------------------------------------------
// log-interval engine

/// Certified bounds lo <= 2^bits * ln(p) <= hi.
///
/// For p = 2: ln 2 = 2 atanh(1/3). For odd p with 2^k <= p < 2^(k+1):
/// ln p = k ln 2 + 2 atanh((p - 2^k)/(p + 2^k)), argument in (0, 1/3).
fn ln_prime_bounds(p: u64, bits: u32) -> (BigInt, BigInt) {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), (BigInt, BigInt)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&(p, bits)) {
        return v.clone();
    }
    let out = if p == 2 {
        let (l, h) = atanh_bounds(&BigInt::one(), &BigInt::from(3), bits);
        (l * 2, h * 2)
    } else {
        let k = p.ilog2();
        let m = 1u64 << k;
        let (zl, zh) = atanh_bounds(&BigInt::from(p - m), &BigInt::from(p + m), bits);
        let (tl, th) = ln_prime_bounds(2, bits);
        (BigInt::from(k) * tl + zl * 2, BigInt::from(k) * th + zh * 2)
    };
    cache.lock().unwrap().insert((p, bits), out.clone());
    out
}

/// Certified bounds on 2^bits * atanh(num/den) for 0 < num/den <= 1/3.
///
/// Partial sums of z + z^3/3 + z^5/5 + ... with floored terms. Each kept term
/// loses < 1 scaled unit; the loop stops at the first term that floors to 0,
/// i.e. z^(2J+1) 2^bits < 2J+1, so the true tail is under
/// z^(2J+1)/((2J+1)(1-z^2)) <= (9/8)(2J+1)/2^bits / (2J+1), below 2 units.
fn atanh_bounds(num: &BigInt, den: &BigInt, bits: u32) -> (BigInt, BigInt) {
    let scale = BigInt::one() << bits;
    let n2 = num * num;
    let d2 = den * den;
    let mut numpow = num.clone();
    let mut denpow = den.clone();
    let mut sum = BigInt::zero();
    let mut terms: u32 = 0;
    let mut j: u64 = 0;
    loop {
        let term = (&scale * &numpow) / (&denpow * BigInt::from(2 * j + 1));
        if term.is_zero() {
            break;
        }
        sum += term;
        terms += 1;
        numpow *= &n2;
        denpow *= &d2;
        j += 1;
    }
    let hi = &sum + BigInt::from(terms) + BigInt::from(2u32);
    (sum, hi)
}

/// Sign of sum e_i ln p_i for a nonempty mixed-sign difference, by doubling
/// the precision of certified log intervals until the enclosure misses zero.
fn refine_log_sign(diff: &[(u64, BigRational)]) -> Ordering {
    let mut bits: u32 = 64;
    loop {
        let scale = BigInt::one() << bits;
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (p, e) in diff {
            let (bl, bh) = ln_prime_bounds(*p, bits);
            let rl = BigRational::new(bl, scale.clone());
            let rh = BigRational::new(bh, scale.clone());
            if e.is_positive() {
                lo += e * rl;
                hi += e * rh;
            } else {
                lo += e * rh;
                hi += e * rl;
            }
        }
        if lo.is_positive() {
            return Ordering::Greater;
        }
        if hi.is_negative() {
            return Ordering::Less;
        }
        bits = bits.checked_mul(2).expect("log refinement precision overflow");
        // A reduced nonempty difference is never zero, so this resolves; the
        // cap only guards against representation bugs.
        assert!(bits <= 1 << 22, "log refinement exceeded 4M bits");
    }
}

// ---------------------------------------------------------------------------
// primality and factoring (u64 scale)

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    // deterministic Miller-Rabin base set for the full u64 range
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Brent-cycle Pollard rho; n must be composite, odd, > 1, with no factor <= 31.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn factor_u64(n: u64, out: &mut BTreeMap<u64, u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = pollard_rho(n);
    factor_u64(d, out);
    factor_u64(n / d, out);
}

/// Factors a positive BigInt. Small primes are stripped by trial division;
/// the cofactor must fit in u64 (then Pollard rho finishes) or the input is
/// rejected as unfactorable at this crate's scale.
fn factor_bigint(n: &BigInt) -> Result<Vec<(u64, u64)>> {
    debug_assert!(n.is_positive());
    let mut rest = n.clone();
    let mut map: BTreeMap<u64, u64> = BTreeMap::new();
    let mut d = 2u64;
    while d < (1 << 20) {
        let db = BigInt::from(d);
        if (&db * &db) > rest {
            break;
        }
        while (&rest % &db).is_zero() {
            rest /= &db;
            *map.entry(d).or_insert(0) += 1;
        }
        d = if d == 2 { 3 } else { d + 2 };
    }
    if !rest.is_one() {
        match rest.to_u64() {
            Some(r) => factor_u64(r, &mut map),
            None => {
                return Err(Error::FactorOverflow { value: n.to_string() });
            }
        }
    }
    Ok(map.into_iter().collect())
}

// ---------------------------------------------------------------------------
// value groups and cosets

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    /// |K*| = p^Z (rank-one discrete valuation).
    Discrete,
    /// |K*| = p^Q (densely valued).
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ValueGroup {
    pub prime: u64,
    pub kind: GroupKind,
}

impl ValueGroup {
    pub fn new(prime: u64, kind: GroupKind) -> Result<Self> {
        if !is_prime_u64(prime) {
            return Err(Error::NotPrime(prime));
        }
        Ok(ValueGroup { prime, kind })
    }

    /// Membership of a nonzero magnitude in the group.
    pub fn contains(&self, m: &Magnitude) -> bool {
        match m {
            Magnitude::Zero => false,
            Magnitude::Pos(map) => map.iter().all(|(p, e)| {
                *p == self.prime
                    && match self.kind {
                        GroupKind::Discrete => e.is_integer(),
                        GroupKind::Dense => true,
                    }
            }),
        }
    }
}

/// A coset of the value group in the positive reals, in canonical form:
/// for Dense groups the p-exponent is deleted, for Discrete it is reduced
/// into [0, 1). `base` is the canonical coset representative as a magnitude.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coset {
    group: ValueGroup,
    base: Magnitude,
}

pub fn coset_of(m: &Magnitude, g: &ValueGroup) -> Result<Coset> {
    let exps = match m {
        Magnitude::Zero => return Err(Error::ZeroMagnitude { context: "coset_of" }),
        Magnitude::Pos(e) => e,
    };
    let mut factors = exps.clone();
    match g.kind {
        GroupKind::Dense => {
            factors.remove(&g.prime);
        }
        GroupKind::Discrete => {
            if let Some(e) = factors.get_mut(&g.prime) {
                let reduced = &*e - e.floor();
                if reduced.is_zero() {
                    factors.remove(&g.prime);
                } else {
                    *e = reduced;
                }
            }
        }
    }
    Ok(Coset { group: *g, base: Magnitude::Pos(factors) })
}

impl Coset {
    pub fn group(&self) -> &ValueGroup {
        &self.group
    }

    pub fn is_trivial(&self) -> bool {
        self.base.is_one()
    }

    /// The canonical representative (p-exponent deleted or reduced to [0,1)).
    pub fn base_magnitude(&self) -> &Magnitude {
        &self.base
    }

    /// Deterministic representative of the coset in (lo, hi].
    ///
    /// Discrete: the interval must span at least one group period (hi/lo >= p),
    /// and the representative is the largest coset point <= hi. Dense:
    /// breadth-first search over dyadic exponents of p, smallest denominator
    /// first, then smallest |numerator|, positive sign preferred.
    pub fn representative_in(&self, lo: &Magnitude, hi: &Magnitude) -> Result<Magnitude> {
        if self.group.kind == GroupKind::Discrete && !lo.is_zero() {
            let period_hi = lo.mul(&Magnitude::prime_pow(self.group.prime, BigRational::one())?);
            if period_hi.cmp_mag(hi) == Ordering::Greater {
                return Err(Error::IntervalTooShort {
                    lo: lo.to_string(),
                    hi: hi.to_string(),
                });
            }
        }
        power_search(&self.group, &self.base, lo, hi, true).map(|(_, m)| m)
    }
}

impl fmt::Display for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.base, f)
    }
}

/// Searches for q with base*p^q in the interval (lo, hi] (or (lo, hi) when
/// `include_hi` is false), q integral for Discrete groups and dyadic for
/// Dense ones, in the deterministic order documented on `representative_in`.
/// Returns (q, base*p^q).
pub(crate) fn power_search(
    group: &ValueGroup,
    base: &Magnitude,
    lo: &Magnitude,
    hi: &Magnitude,
    include_hi: bool,
) -> Result<(BigRational, Magnitude)> {
    const MAX_DYADIC_DEPTH: u32 = 48;
    debug_assert!(!base.is_zero() && !hi.is_zero());
    let empty = || Error::EmptyIntersection { lo: lo.to_string(), hi: hi.to_string() };
    if lo.cmp_mag(hi) != Ordering::Less {
        return Err(empty());
    }
    let p = group.prime;
    let ok_hi = |m: &Magnitude| match m.cmp_mag(hi) {
        Ordering::Less => true,
        Ordering::Equal => include_hi,
        Ordering::Greater => false,
    };
    let ok_lo = |m: &Magnitude| m.cmp_mag(lo) == Ordering::Greater;
    let shift = |q: &BigRational| -> Magnitude {
        base.mul(&Magnitude::prime_pow(p, q.clone()).expect("group prime is prime"))
    };
    let int_shift = |k: i64| shift(&BigRational::from_integer(BigInt::from(k)));

    // largest integer k with pred(base * p^k), by exponential bracket + bisection
    let largest_ok = |pred: &dyn Fn(&Magnitude) -> bool| -> i64 {
        let mut k: i64 = 0;
        if pred(&int_shift(0)) {
            let mut stride: i64 = 1;
            while pred(&int_shift(k + stride)) {
                k += stride;
                stride *= 2;
            }
            let mut step = stride / 2;
            while step > 0 {
                if pred(&int_shift(k + step)) {
                    k += step;
                }
                step /= 2;
            }
        } else {
            let mut stride: i64 = 1;
            while !pred(&int_shift(k - stride)) {
                k -= stride;
                stride *= 2;
            }
            let mut base_k = k - stride;
            let mut step = stride / 2;
            while step > 0 {
                if pred(&int_shift(base_k + step)) {
                    base_k += step;
                }
                step /= 2;
            }
            k = base_k;
        }
        k
    };

    let k_top = largest_ok(&ok_hi);
    match group.kind {
        GroupKind::Discrete => {
            let m = int_shift(k_top);
            if ok_lo(&m) {
                Ok((BigRational::from_integer(BigInt::from(k_top)), m))
            } else {
                Err(empty())
            }
        }
        GroupKind::Dense => {
            let k_high = k_top + 1; // every q >= k_high overshoots hi
            let k_low: Option<i64> = if lo.is_zero() {
                None
            } else {
                // largest k with base*p^k <= lo; every q <= k_low undershoots
                Some(largest_ok(&|m: &Magnitude| !ok_lo(m)))
            };
            for b in 0..=MAX_DYADIC_DEPTH {
                let den: i64 = 1i64 << b;
                let top = k_high.saturating_mul(den);
                let bot = k_low.map(|kl| kl.saturating_mul(den));
                let step: i64 = if b == 0 { 1 } else { 2 };
                let mut v: i64 = if b == 0 { 0 } else { 1 };
                let try_a = |a: i64| -> Option<(BigRational, Magnitude)> {
                    if a >= top {
                        return None;
                    }
                    if let Some(btm) = bot {
                        if a <= btm {
                            return None;
                        }
                    }
                    let q = BigRational::new(BigInt::from(a), BigInt::from(den));
                    let m = shift(&q);
                    (ok_lo(&m) && ok_hi(&m)).then_some((q, m))
                };
                loop {
                    let dead_pos = v >= top;
                    let dead_neg = match bot {
                        Some(btm) => -v <= btm,
                        None => false,
                    };
                    if dead_pos && dead_neg {
                        break;
                    }
                    if let Some(hit) = try_a(v) {
                        return Ok(hit);
                    }
                    if v != 0 {
                        if let Some(hit) = try_a(-v) {
                            return Ok(hit);
                        }
                    }
                    v += step;
                }
            }
            Err(Error::Unsupported {
                context: format!(
                    "dyadic exponent search in ({lo}, {hi}{}] exceeded depth {MAX_DYADIC_DEPTH}",
                    if include_hi { "" } else { ")" }
                ),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mag(s: &str) -> Magnitude {
        s.parse().unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn multiplicative_examples() {
        let h = mag("2^-1/2");
        assert_eq!(h.mul(&h), mag("2^-1"));
        assert_eq!(mag("2^-2*3^1").root(3).unwrap(), mag("2^-2/3*3^1/3"));
        assert_eq!(Magnitude::one().div(&mag("2^1/3")).unwrap(), mag("2^-1/3"));
        assert_eq!(mag("2^1").mul(&Magnitude::Zero), Magnitude::Zero);
    }

    #[test]
    fn factorization_round_trip() {
        assert_eq!(Magnitude::from_u64(12).unwrap(), mag("2^2*3^1"));
        assert_eq!(Magnitude::from_u64(0).unwrap(), Magnitude::Zero);
        assert_eq!(Magnitude::from_rational(&rat(3, 4)).unwrap(), mag("2^-2*3^1"));
        assert_eq!(Magnitude::from_u64(1).unwrap(), Magnitude::one());
        // large prime cofactors still factor (Pollard rho path)
        let n = 1_000_003u64 * 998_244_353;
        let m = Magnitude::from_u64(n).unwrap();
        assert_eq!(m, mag("1000003^1*998244353^1"));
    }

    #[test]
    fn cmp_trivial_cases() {
        assert_eq!(mag("2^-1").cmp_mag(&mag("3^-1")), Ordering::Greater);
        assert_eq!(mag("2^3/6").cmp_mag(&mag("2^1/2")), Ordering::Equal);
        assert_eq!(Magnitude::Zero.cmp_mag(&mag("2^-100")), Ordering::Less);
        assert_eq!(mag("2^-100").cmp_mag(&Magnitude::Zero), Ordering::Greater);
        assert_eq!(Magnitude::Zero.cmp_mag(&Magnitude::Zero), Ordering::Equal);
    }

    #[test]
    fn cmp_interval_refinement_example() {
        // Oracle first, independent of the log engine: both sides squared are
        // rational, and (2^(-1/2))^2 = 1/2 = 8/16 < 9/16 = (3/4)^2 exactly.
        let lhs_sq = rat(1, 2);
        let rhs_sq = rat(9, 16);
        assert!(lhs_sq < rhs_sq);
        // The engine must agree on the unsquared comparison, which mixes
        // exponent signs over the primes {2, 3} and so exercises refinement.
        assert_eq!(mag("2^-1/2").cmp_mag(&mag("2^-2*3^1")), Ordering::Less);
        assert_eq!(mag("2^-2*3^1").cmp_mag(&mag("2^-1/2")), Ordering::Greater);
    }

    #[test]
    fn cmp_agrees_with_rational_order_on_rationals() {
        let pairs = [(rat(3, 4), rat(5, 6)), (rat(7, 2), rat(10, 3)), (rat(1, 1), rat(1, 1))];
        for (a, b) in pairs {
            let ma = Magnitude::from_rational(&a).unwrap();
            let mb = Magnitude::from_rational(&b).unwrap();
            assert_eq!(ma.cmp_mag(&mb), a.cmp(&b), "{a} vs {b}");
        }
    }

    #[test]
    fn certified_log_bounds_bracket_known_constants() {
        // ln 2 = 0.69314718055994530941..., ln 3 = 1.09861228866810969139...
        // The interval must contain the constant and stay within ~40 floored
        // terms of it (1e-17 slack at 64 bits covers that comfortably).
        let check = |p: u64, val10: i128| {
            let (l, h) = ln_prime_bounds(p, 64);
            let scale: BigInt = BigInt::one() << 64;
            let val_lo = BigRational::new(l, scale.clone());
            let val_hi = BigRational::new(h, scale);
            let digit = |k: i128| BigRational::new(BigInt::from(k), BigInt::from(10i128.pow(20)));
            let slack = digit(1000);
            assert!(val_lo <= val_hi);
            // the true constant lies within one last-digit unit of val10
            assert!(val_lo <= digit(val10 + 1), "{p}: lower bound above the constant");
            assert!(val_hi >= digit(val10 - 1), "{p}: upper bound below the constant");
            assert!(&val_hi - &val_lo < slack, "{p}: interval too wide");
        };
        check(2, 69314718055994530942);
        check(3, 109861228866810969140);
        check(5, 160943791243410037460);
    }

    #[test]
    fn grammar_round_trips() {
        for s in ["0", "1", "2^-1/2", "2^-1/2*3^1", "2^2*3^1", "5^-7/3", "2^1/2", "1000003^1"] {
            let m = mag(s);
            assert_eq!(m.to_string(), s, "canonical print");
            assert_eq!(mag(&m.to_string()), m, "reparse");
        }
        // non-canonical but valid input normalizes
        assert_eq!(mag("2^3/6"), mag("2^1/2"));
        assert_eq!(mag("2^0"), Magnitude::one());
    }

    #[test]
    fn grammar_rejections() {
        for s in [
            "", " ", "2", "2^", "^1", "2^1 ", " 2^1", "2 ^1", "4^1", "1^1", "0^1",
            "3^1*2^1", "2^1*2^1", "2^1*", "*2^1", "2^+1", "2^1/0", "2^1/-2", "2^01",
            "02^1", "2^--1", "2^1//2", "2^1.5", "-2^1", "2^1/02",
        ] {
            assert!(s.parse::<Magnitude>().is_err(), "{s:?} should be rejected");
        }
    }

    #[test]
    fn coset_examples() {
        let d2 = ValueGroup::new(2, GroupKind::Discrete).unwrap();
        let q2 = ValueGroup::new(2, GroupKind::Dense).unwrap();
        assert!(coset_of(&mag("2^3"), &d2).unwrap().is_trivial());
        let half = coset_of(&mag("2^1/2"), &d2).unwrap();
        assert_eq!(half.base_magnitude(), &mag("2^1/2"));
        let dense = coset_of(&mag("2^5/7*3^1"), &q2).unwrap();
        assert_eq!(dense.base_magnitude(), &mag("3^1"));
        assert!(coset_of(&Magnitude::Zero, &d2).is_err());
        // negative exponents reduce into [0, 1)
        let c = coset_of(&mag("2^-1/2"), &d2).unwrap();
        assert_eq!(c.base_magnitude(), &mag("2^1/2"));
    }

    #[test]
    fn coset_invariance_under_group_shifts() {
        let d3 = ValueGroup::new(3, GroupKind::Discrete).unwrap();
        let q3 = ValueGroup::new(3, GroupKind::Dense).unwrap();
        let m = mag("2^1*3^-5/4");
        let shift_int = mag("3^7");
        assert_eq!(coset_of(&m, &d3).unwrap(), coset_of(&m.mul(&shift_int), &d3).unwrap());
        let shift_q = mag("3^22/7");
        assert_eq!(coset_of(&m, &q3).unwrap(), coset_of(&m.mul(&shift_q), &q3).unwrap());
        assert_ne!(coset_of(&m, &d3).unwrap(), coset_of(&m.mul(&mag("3^1/2")), &d3).unwrap());
    }

    #[test]
    fn discrete_representative_is_the_unique_ladder_point() {
        let d2 = ValueGroup::new(2, GroupKind::Discrete).unwrap();
        let half = coset_of(&mag("2^1/2"), &d2).unwrap();
        let lo = mag("2^-1");
        let hi = Magnitude::one();
        // Oracle: squares are rational, 1/4 < 1/2 <= 1 certifies membership of
        // 2^(-1/2) in (1/2, 1]; the neighbors 2^(1/2), 2^(-3/2) square outside.
        assert!(rat(1, 4) < rat(1, 2) && rat(1, 2) <= rat(1, 1));
        let rep = half.representative_in(&lo, &hi).unwrap();
        assert_eq!(rep, mag("2^-1/2"));

        let trivial = coset_of(&Magnitude::one(), &d2).unwrap();
        assert_eq!(trivial.representative_in(&lo, &hi).unwrap(), Magnitude::one());

        // interval shorter than one period is refused
        let err = trivial.representative_in(&mag("2^-1/2"), &hi).unwrap_err();
        assert!(matches!(err, Error::IntervalTooShort { .. }));
    }

    #[test]
    fn dense_representative_search_order() {
        let q2 = ValueGroup::new(2, GroupKind::Dense).unwrap();
        let c = coset_of(&mag("3^1"), &q2).unwrap();
        let rep = c.representative_in(&mag("2^-1"), &Magnitude::one()).unwrap();
        // 3 * 2^(-2) = 3/4: the integer level already contains a point, found
        // at numerator -2 after -1 overshoots.
        assert_eq!(rep, mag("2^-2*3^1"));

        // trivial coset over a dense group: q = 0 is admissible and preferred
        let t = coset_of(&Magnitude::one(), &q2).unwrap();
        assert_eq!(t.representative_in(&mag("2^-1"), &Magnitude::one()).unwrap(), Magnitude::one());

        // open top: the first dyadic strictly inside (lo, 1) for lo = (2/3)^(1/3)
        let lo = Magnitude::one().div(&mag("2^-1*3^1")).unwrap().root(3).unwrap();
        let (q, m) = power_search(&q2, &Magnitude::one(), &lo, &Magnitude::one(), false).unwrap();
        assert_eq!(q, rat(-1, 8));
        assert_eq!(m, mag("2^-1/8"));
    }

    #[test]
    fn representative_rejects_empty_intervals() {
        let q2 = ValueGroup::new(2, GroupKind::Dense).unwrap();
        let c = coset_of(&mag("3^1"), &q2).unwrap();
        assert!(matches!(
            c.representative_in(&Magnitude::one(), &Magnitude::one()),
            Err(Error::EmptyIntersection { .. })
        ));
        assert!(matches!(
            c.representative_in(&mag("2^1"), &Magnitude::one()),
            Err(Error::EmptyIntersection { .. })
        ));
    }

    #[test]
    fn group_membership() {
        let d2 = ValueGroup::new(2, GroupKind::Discrete).unwrap();
        let q2 = ValueGroup::new(2, GroupKind::Dense).unwrap();
        assert!(d2.contains(&mag("2^3")));
        assert!(d2.contains(&Magnitude::one()));
        assert!(!d2.contains(&mag("2^1/2")));
        assert!(!d2.contains(&mag("3^1")));
        assert!(q2.contains(&mag("2^-22/7")));
        assert!(!q2.contains(&mag("2^1*3^1")));
        assert!(!q2.contains(&Magnitude::Zero));
        assert!(ValueGroup::new(6, GroupKind::Dense).is_err());
    }

    #[test]
    fn primality_and_rho() {
        assert!(is_prime_u64(2) && is_prime_u64(3) && is_prime_u64(998_244_353));
        assert!(!is_prime_u64(0) && !is_prime_u64(1) && !is_prime_u64(561));
        // strong pseudoprime to several small bases
        assert!(!is_prime_u64(3_215_031_751));
        let mut f = BTreeMap::new();
        factor_u64(1_000_003u64 * 1_000_033, &mut f);
        assert_eq!(f.get(&1_000_003), Some(&1));
        assert_eq!(f.get(&1_000_033), Some(&1));
    }

    #[test]
    fn serde_as_grammar_strings() {
        let m = mag("2^-1/2*3^1");
        let j = serde_json::to_string(&m).unwrap();
        assert_eq!(j, "\"2^-1/2*3^1\"");
        let back: Magnitude = serde_json::from_str(&j).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Magnitude>("\"4^1\"").is_err());
    }
}
