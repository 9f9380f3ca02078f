//! Synthesis of ε-isometric retractions over densely valued fields.

use num::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::magnitude::{power_search, GroupKind, Magnitude};
use crate::space::{extend_base, t_defect, LinearMap, Subspace, Vector};

use super::density::parse_eps;
use super::Ambient;

/// A constructed ε-isometry f: Y -> stage with f(i(x)) = x, together with
/// the exact bounds it was verified against.
#[derive(Clone, Debug, Serialize)]
pub struct EpsIsometryReport {
    pub map: LinearMap,
    pub eps: String,
    /// The deterministic dyadic magnitude in ( (1+eps)^(-1/3), 1 ).
    pub t: Magnitude,
    /// Smallest and largest ||f(b)|| / ||b|| over the codomain base.
    pub lower: Magnitude,
    pub upper: Magnitude,
    /// Global bounds t^2 <= ||f(y)||/||y|| <= t^(-2) implied by the
    /// t-orthogonal base with all norms in (t, 1].
    pub chain: (Magnitude, Magnitude),
    /// f(i(x)) = x checked coordinate-exactly on a base of X.
    pub retraction_verified: bool,
    /// The strict two-sided unit predicate (1+eps)^(-1) < ratio < 1+eps,
    /// evaluated separately from the non-strict (1-eps, 1+eps) bounds.
    pub strict_predicate: bool,
    /// Fresh coordinates allocated on the x side.
    pub allocated: usize,
    /// Defect certificate level of the final scaled codomain base.
    pub base_level: Magnitude,
}

/// Builds f: Y -> stage with f(i(x)) = x exactly and
/// (1-eps) ||y|| <= ||f(y)|| <= (1+eps) ||y|| for all y.
///
/// t is the first dyadic prime power in ((1+eps)^(-1/3), 1). A base of X is
/// carried through i and extended to a >= t-orthogonal base of Y; every base
/// vector on both sides is rescaled into norm (t, 1], which is possible
/// exactly because the value group is dense. Pairing the bases then changes
/// any norm by at most a factor in [t^2, t^(-2)], inside [1-eps, 1+eps].
pub fn epsilon_isometry(
    a: &mut Ambient,
    x: &Subspace,
    i: &LinearMap,
    eps: &BigRational,
) -> Result<EpsIsometryReport> {
    let (lo_f, hi_f) = parse_eps(eps)?;
    let field = a.field().clone();
    let group = field.value_group();
    if group.kind != GroupKind::Dense {
        return Err(Error::NotDenselyValued);
    }
    let stage = a.stage();
    if x.space() != &stage {
        return Err(Error::DimensionMismatch { expected: stage.dim(), got: x.space().dim() });
    }
    if i.domain_space() != &stage {
        return Err(Error::DimensionMismatch {
            expected: stage.dim(),
            got: i.domain_space().dim(),
        });
    }
    if !i.certify_isometry()?.is_certified() {
        return Err(Error::Unsupported { context: "the embedding i is not an isometry".into() });
    }
    // i's domain must be exactly X
    for v in x.span() {
        i.coefficients(v)?;
    }
    for b in i.domain_base() {
        if !x.contains(b)? {
            return Err(Error::NotInDomain);
        }
    }
    let y_space = i.codomain_space().clone();

    let one = Magnitude::one();
    let t_floor = Magnitude::from_rational(&hi_f.recip())?.root(3)?;
    let (_, t) = power_search(&group, &one, &t_floor, &one, false)?;

    // base of X through i, both sides rescaled into norm (t, 1]
    let xb = x.reduced()?.base.clone();
    let mut x_side: Vec<Vector> = Vec::with_capacity(xb.len());
    let mut y_side: Vec<Vector> = Vec::with_capacity(xb.len());
    for b in &xb {
        let n = stage.norm(b)?;
        let mu = field.scalar_with_abs_in(&t.div(&n)?, &one.div(&n)?)?;
        x_side.push(stage.scale(&mu, b)?);
        y_side.push(y_space.scale(&mu, &i.evaluate(b)?)?);
    }

    // extend to a >= t-orthogonal base of Y and rescale the added vectors
    let ext = extend_base(&y_space, &y_side, None, &t)?;
    let added: Vec<Vector> = ext.vectors[ext.prefix_len..].to_vec();
    let mut y_full = y_side;
    for u in &added {
        let n = y_space.norm(u)?;
        let nu = field.scalar_with_abs_in(&t.div(&n)?, &one.div(&n)?)?;
        y_full.push(y_space.scale(&nu, u)?);
    }

    // x-side counterparts: leftover stage units orthogonal to X, then fresh
    // coordinates of weight 1
    let x_pivots = x.reduced()?.pivots.clone();
    let free_units: Vec<usize> =
        (0..stage.dim()).filter(|j| !x_pivots.contains(j)).take(added.len()).collect();
    let fresh_needed = added.len() - free_units.len();
    if fresh_needed > a.remaining_capacity() {
        return Err(Error::AllocatorExhausted);
    }
    let mut fresh_idx = Vec::with_capacity(fresh_needed);
    for _ in 0..fresh_needed {
        fresh_idx.push(a.alloc_with_weight(Magnitude::one())?);
    }
    let final_stage = a.stage();
    let mut x_full: Vec<Vector> = Vec::with_capacity(y_full.len());
    for v in &x_side {
        x_full.push(a.lift(v)?);
    }
    for &j in free_units.iter().chain(&fresh_idx) {
        let u = final_stage.unit(j);
        let n = final_stage.norm(&u)?;
        let sigma = field.scalar_with_abs_in(&t.div(&n)?, &one.div(&n)?)?;
        x_full.push(final_stage.scale(&sigma, &u)?);
    }

    let map = LinearMap::new(y_space.clone(), y_full.clone(), x_full.clone(), final_stage.clone())?;

    // retraction f(i(x)) = x on the base of X, coordinate-exact
    let mut retraction_verified = true;
    for b in &xb {
        let through = map.evaluate(&i.evaluate(b)?)?;
        if through != a.lift(b)? {
            retraction_verified = false;
        }
    }
    if !retraction_verified {
        return Err(Error::Unsupported {
            context: "constructed map fails the retraction identity".into(),
        });
    }

    // exact ratio bounds over the final base
    let lo_bound = Magnitude::from_rational(&lo_f)?;
    let hi_bound = Magnitude::from_rational(&hi_f)?;
    let strict_lo = Magnitude::from_rational(&hi_f.recip())?;
    let mut lower: Option<Magnitude> = None;
    let mut upper: Option<Magnitude> = None;
    let mut strict_predicate = true;
    for (yb, im) in map.domain_base().iter().zip(map.base_images()) {
        let ratio = final_stage.norm(im)?.div(&y_space.norm(yb)?)?;
        if !(ratio > strict_lo && ratio < hi_bound) {
            strict_predicate = false;
        }
        if lower.as_ref().map_or(true, |m| ratio < *m) {
            lower = Some(ratio.clone());
        }
        if upper.as_ref().map_or(true, |m| ratio > *m) {
            upper = Some(ratio);
        }
    }
    let lower = lower.unwrap_or_else(Magnitude::one);
    let upper = upper.unwrap_or_else(Magnitude::one);
    if lower < lo_bound || upper > hi_bound {
        return Err(Error::Unsupported {
            context: format!("ratio bounds [{lower}, {upper}] escape [1-eps, 1+eps]"),
        });
    }
    let base_level = t_defect(&y_space, map.domain_base())?.level;
    debug_assert!(base_level >= t);

    Ok(EpsIsometryReport {
        map,
        eps: eps.to_string(),
        t: t.clone(),
        lower,
        upper,
        chain: (t.pow(2)?, t.pow(-2)?),
        retraction_verified,
        strict_predicate,
        allocated: fresh_needed,
        base_level,
    })
}
