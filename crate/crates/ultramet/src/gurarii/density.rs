//! Density of the attained norm set, and exact gap certificates proving that
//! no ε-isometry into a discretely valued stage can exist.

use num::{BigRational, One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::magnitude::{GroupKind, Magnitude, ValueGroup};
use crate::magnitude::power_search;
use crate::scalar::FieldDescriptor;
use crate::space::WeightedSpace;

use super::Ambient;

#[derive(Clone, Debug, Serialize)]
pub struct DensityAnswer {
    pub dense: bool,
    /// When not dense: an open interval disjoint from the value set
    /// (the maximal gap just below 1).
    pub gap: Option<(Magnitude, Magnitude)>,
}

/// Largest ladder point w * p^z that is <= x (or < x when `strict`).
fn ladder_below(
    group: &ValueGroup,
    w: &Magnitude,
    x: &Magnitude,
    strict: bool,
) -> Result<Magnitude> {
    power_search(group, w, &Magnitude::Zero, x, !strict).map(|(_, m)| m)
}

fn in_ladder(group: &ValueGroup, w: &Magnitude, x: &Magnitude) -> Result<bool> {
    Ok(ladder_below(group, w, x, false)? == *x)
}

fn step_up(group: &ValueGroup, m: &Magnitude) -> Result<Magnitude> {
    Ok(m.mul(&Magnitude::prime_pow(group.prime, BigRational::one())?))
}

/// Per-ladder neighbors of a point: (largest below or at, smallest strictly
/// above) when the point is on the ladder, else the two adjacent rungs.
fn neighbors(
    group: &ValueGroup,
    w: &Magnitude,
    x: &Magnitude,
) -> Result<(Magnitude, Magnitude)> {
    let below = ladder_below(group, w, x, true)?;
    let above = step_up(group, &below)?;
    debug_assert!(below < *x && *x <= above);
    Ok((below, above))
}

/// Whether the value set { w_i * |c| : c in K* } of a finite stage is dense.
/// Discrete group: never, and the gap between the two value-set points
/// enclosing 1 is returned as witness. Dense group: always.
pub fn value_set_dense(e: &WeightedSpace) -> Result<DensityAnswer> {
    let group = e.field().value_group();
    if group.kind == GroupKind::Dense {
        return Ok(DensityAnswer { dense: true, gap: None });
    }
    if e.dim() == 0 {
        // no attained norms at all: everything below 1 is a gap
        let below = Magnitude::prime_pow(group.prime, -BigRational::one())?;
        return Ok(DensityAnswer { dense: false, gap: Some((below, Magnitude::one())) });
    }
    let one = Magnitude::one();
    let mut below = Magnitude::Zero;
    let mut above: Option<Magnitude> = None;
    for w in e.weights() {
        let at = ladder_below(&group, w, &one, false)?;
        let (b, a) = if at == one { (ladder_below(&group, w, &one, true)?, one.clone()) } else { (at.clone(), step_up(&group, &at)?) };
        if b > below {
            below = b;
        }
        if above.as_ref().map_or(true, |cur| a < *cur) {
            above = Some(a);
        }
    }
    Ok(DensityAnswer { dense: false, gap: Some((below, above.expect("dim checked"))) })
}

/// Density for an ambient: declared universal stages are dense by
/// construction (their registry ranges over all cosets); otherwise the
/// current stage decides.
pub fn value_set_dense_ambient(a: &Ambient) -> Result<DensityAnswer> {
    if a.declared_dense() {
        return Ok(DensityAnswer { dense: true, gap: None });
    }
    value_set_dense(&a.stage())
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightNeighbors {
    pub weight: Magnitude,
    pub below: Magnitude,
    pub above: Magnitude,
}

/// Proof that the value set of E misses an open interval (a, b) containing
/// [(1-eps)s1, (1+eps)s1]. Any ε-isometry f from Y = (K^2, max(|x1|, s1|x2|))
/// into E would need ||f(0,1)|| inside that closed interval yet attained in
/// E, which the per-weight ladder neighbors rule out. Re-verifiable from
/// scratch via `reverify`.
#[derive(Clone, Debug, Serialize)]
pub struct GapCertificate {
    pub version: String,
    pub field: FieldDescriptor,
    pub weights: Vec<Magnitude>,
    pub s1: Magnitude,
    /// Rational literal for eps.
    pub eps: String,
    /// Which containment the certificate asserts.
    pub predicate: String,
    pub gap: (Magnitude, Magnitude),
    pub interval: (Magnitude, Magnitude),
    pub per_weight: Vec<WeightNeighbors>,
    /// Weights of the two-dimensional test space Y.
    pub test_space: Vec<Magnitude>,
}

#[derive(Clone, Debug, Serialize)]
pub enum GapOutcome {
    Certificate(GapCertificate),
    /// No gap: the value set meets the closed interval at this point.
    NoGap { blocking: Magnitude },
}

pub(crate) fn parse_eps(eps: &BigRational) -> Result<(BigRational, BigRational)> {
    if *eps <= BigRational::zero() || *eps >= BigRational::one() {
        return Err(Error::EpsilonOutOfRange { eps: eps.to_string() });
    }
    Ok((BigRational::one() - eps, BigRational::one() + eps))
}

pub fn nonexistence_certificate(
    e: &WeightedSpace,
    s1: &Magnitude,
    eps: &BigRational,
) -> Result<GapOutcome> {
    let (lo_f, hi_f) = parse_eps(eps)?;
    if s1.is_zero() {
        return Err(Error::ZeroMagnitude { context: "target norm s1" });
    }
    if e.dim() == 0 {
        return Err(Error::Unsupported { context: "empty stage has no attained norms".into() });
    }
    let lo_req = s1.mul(&Magnitude::from_rational(&lo_f)?);
    let hi_req = s1.mul(&Magnitude::from_rational(&hi_f)?);
    let group = e.field().value_group();
    if group.kind == GroupKind::Dense {
        // dense value set: some point lands inside the interval
        let (_, blocking) = power_search(&group, &e.weights()[0], &lo_req, &hi_req, true)?;
        return Ok(GapOutcome::NoGap { blocking });
    }
    let mut per_weight = Vec::with_capacity(e.dim());
    let mut gap_lo = Magnitude::Zero;
    let mut gap_hi: Option<Magnitude> = None;
    for w in e.weights() {
        if in_ladder(&group, w, s1)? {
            return Ok(GapOutcome::NoGap { blocking: s1.clone() });
        }
        let (below, above) = neighbors(&group, w, s1)?;
        if below > gap_lo {
            gap_lo = below.clone();
        }
        if gap_hi.as_ref().map_or(true, |cur| above < *cur) {
            gap_hi = Some(above.clone());
        }
        per_weight.push(WeightNeighbors { weight: w.clone(), below, above });
    }
    let gap_hi = gap_hi.expect("dim checked");
    if gap_lo >= lo_req {
        return Ok(GapOutcome::NoGap { blocking: gap_lo });
    }
    if hi_req >= gap_hi {
        return Ok(GapOutcome::NoGap { blocking: gap_hi });
    }
    Ok(GapOutcome::Certificate(GapCertificate {
        version: env!("CARGO_PKG_VERSION").to_string(),
        field: e.field().clone(),
        weights: e.weights().to_vec(),
        s1: s1.clone(),
        eps: eps.to_string(),
        predicate: "[(1-eps)s1, (1+eps)s1] inside the open value-set gap (a, b)".to_string(),
        gap: (gap_lo, gap_hi),
        interval: (lo_req, hi_req),
        per_weight,
        test_space: vec![Magnitude::one(), s1.clone()],
    }))
}

impl GapCertificate {
    /// Recomputes the ladder neighbors and all comparisons from the stored
    /// field, weights, s1 and eps; true iff everything matches.
    pub fn reverify(&self) -> Result<bool> {
        let eps: BigRational = match crate::magnitude::parse_rational(&self.eps) {
            Some(q) => q,
            None => return Ok(false),
        };
        let e = WeightedSpace::new(self.field.clone(), self.weights.clone())?;
        match nonexistence_certificate(&e, &self.s1, &eps)? {
            GapOutcome::NoGap { .. } => Ok(false),
            GapOutcome::Certificate(fresh) => Ok(fresh.gap == self.gap
                && fresh.interval == self.interval
                && fresh.per_weight.len() == self.per_weight.len()
                && fresh
                    .per_weight
                    .iter()
                    .zip(&self.per_weight)
                    .all(|(a, b)| a.weight == b.weight && a.below == b.below && a.above == b.above)
                && fresh.test_space == self.test_space),
        }
    }

    /// The value-set argument against one candidate map: a norm attained in
    /// E can never land in the closed interval, so any claimed ε-isometry is
    /// refuted by its value at (0, 1).
    pub fn refutes_norm(&self, candidate: &Magnitude) -> bool {
        *candidate < self.interval.0 || *candidate > self.interval.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn mag(s: &str) -> Magnitude {
        s.parse().unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn std_q2(dim: usize) -> WeightedSpace {
        WeightedSpace::standard(FieldDescriptor::padic(2).unwrap(), dim)
    }

    #[test]
    fn density_dichotomy() {
        // 2^Z misses everything strictly between 1/2 and 1
        let ans = value_set_dense(&std_q2(3)).unwrap();
        assert!(!ans.dense);
        assert_eq!(ans.gap, Some((mag("2^-1"), Magnitude::one())));

        // merged ladders of weights {1, 2^(-1/2)}: adjacent points 2^(-1/2), 1
        let e = WeightedSpace::new(
            FieldDescriptor::padic(2).unwrap(),
            vec![Magnitude::one(), mag("2^-1/2")],
        )
        .unwrap();
        let ans = value_set_dense(&e).unwrap();
        assert_eq!(ans.gap, Some((mag("2^-1/2"), Magnitude::one())));

        let h = WeightedSpace::standard(FieldDescriptor::hahn(2).unwrap(), 2);
        assert!(value_set_dense(&h).unwrap().dense);

        let u = Ambient::universal(FieldDescriptor::padic(2).unwrap(), None).unwrap();
        assert!(value_set_dense_ambient(&u).unwrap().dense);
        let plain = Ambient::over(FieldDescriptor::padic(2).unwrap(), vec![Magnitude::one()])
            .unwrap();
        assert!(!value_set_dense_ambient(&plain).unwrap().dense);
    }

    #[test]
    fn gap_certificate_for_three_quarters() {
        // oracle for the interval endpoints: 3/4 * 3/4 = 9/16, 3/4 * 5/4 = 15/16,
        // and 1/2 = 8/16 < 9/16 <= 15/16 < 16/16 = 1
        assert!(rat(1, 2) < rat(9, 16) && rat(15, 16) < rat(1, 1));
        let e = std_q2(2);
        let out = nonexistence_certificate(&e, &mag("2^-2*3^1"), &rat(1, 4)).unwrap();
        let cert = match out {
            GapOutcome::Certificate(c) => c,
            GapOutcome::NoGap { blocking } => panic!("unexpected blocking point {blocking}"),
        };
        assert_eq!(cert.gap, (mag("2^-1"), Magnitude::one()));
        assert_eq!(cert.interval, (mag("2^-4*3^2"), mag("2^-4*3^1*5^1")));
        assert_eq!(cert.test_space, vec![Magnitude::one(), mag("2^-2*3^1")]);
        assert!(cert.reverify().unwrap());
        // the blocking argument kills every value-set point
        assert!(cert.refutes_norm(&Magnitude::one()));
        assert!(cert.refutes_norm(&mag("2^-1")));
        assert!(!cert.refutes_norm(&mag("2^-2*3^1")));
    }

    #[test]
    fn no_gap_outcomes() {
        let e = std_q2(1);
        // s1 on the ladder
        match nonexistence_certificate(&e, &mag("2^-1"), &rat(1, 4)).unwrap() {
            GapOutcome::NoGap { blocking } => assert_eq!(blocking, mag("2^-1")),
            _ => panic!("expected NoGap"),
        }
        // eps too wide: 3/4 * 3/5 = 9/20 < 1/2, so the ladder point 1/2 blocks
        assert!(rat(9, 20) < rat(1, 2));
        match nonexistence_certificate(&e, &mag("2^-2*3^1"), &rat(2, 5)).unwrap() {
            GapOutcome::NoGap { blocking } => assert_eq!(blocking, mag("2^-1")),
            _ => panic!("expected NoGap"),
        }
        // dense backend: always blocked
        let h = WeightedSpace::standard(FieldDescriptor::hahn(2).unwrap(), 1);
        match nonexistence_certificate(&h, &mag("2^-2*3^1"), &rat(1, 4)).unwrap() {
            GapOutcome::NoGap { blocking } => {
                assert!(blocking >= mag("2^-4*3^2") && blocking <= mag("2^-4*3^1*5^1"));
                assert!(h.field().value_group().contains(&blocking));
            }
            _ => panic!("expected NoGap"),
        }
        // eps out of range
        assert!(matches!(
            nonexistence_certificate(&e, &mag("2^-2*3^1"), &rat(3, 2)),
            Err(Error::EpsilonOutOfRange { .. })
        ));
    }

    #[test]
    fn merged_ladder_gap_narrows() {
        // weights {1, 2^(-1/2)}: the gap around 3/4 is (2^(-1/2), 1), too
        // narrow for eps = 1/4 at s1 = 3/4 since 9/16 < 2^(-1/2)
        let e = WeightedSpace::new(
            FieldDescriptor::padic(2).unwrap(),
            vec![Magnitude::one(), mag("2^-1/2")],
        )
        .unwrap();
        // oracle: (9/16)^2 = 81/256 < 128/256 = 1/2, so 9/16 < 2^(-1/2)
        assert!(rat(81, 256) < rat(1, 2));
        match nonexistence_certificate(&e, &mag("2^-2*3^1"), &rat(1, 4)).unwrap() {
            GapOutcome::NoGap { blocking } => assert_eq!(blocking, mag("2^-1/2")),
            _ => panic!("expected NoGap"),
        }
        // a tighter eps fits inside (2^(-1/2), 1): eps = 1/20 gives
        // [57/80, 63/80]; oracle (57/80)^2 = 3249/6400 > 3200/6400 = 1/2
        assert!(rat(3249, 6400) > rat(1, 2));
        match nonexistence_certificate(&e, &mag("2^-2*3^1"), &rat(1, 20)).unwrap() {
            GapOutcome::Certificate(c) => {
                assert_eq!(c.gap, (mag("2^-1/2"), Magnitude::one()));
                assert!(c.reverify().unwrap());
            }
            GapOutcome::NoGap { blocking } => panic!("unexpected blocking point {blocking}"),
        }
    }
}
