//! Exhaustive distance checker, independent of the pivot-reduction minimizer.
//!
//! The oracle grids coefficient tuples over an orthogonalized base and takes
//! the best residual norm. It is only sound on instances whose optimal
//! coefficients land on the grid, which is why the caps exist and why suite
//! generators that feed it keep coordinate digits small.

use num::{BigInt, BigRational, Zero};

use crate::error::{Error, Result};
use crate::magnitude::Magnitude;
use crate::scalar::Backend;
use crate::space::{orthogonalize, Vector, WeightedSpace};

#[derive(Clone, Debug)]
pub struct OracleConfig {
    /// Valuation window: coefficient magnitudes range over p^-m ..= p^m.
    pub m: i64,
    /// Numerator and denominator of the unit part are bounded by this.
    pub digit_depth: u64,
    pub ambient_cap: usize,
    pub subspace_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { m: 4, digit_depth: 5, ambient_cap: 3, subspace_cap: 2 }
    }
}

/// Best grid point found. `distance` is the exact distance whenever the true
/// minimizer's coefficients lie on the searched grid; `combinations` records
/// how large that grid was after pruning.
#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub distance: Magnitude,
    /// Attaining coefficients, one per orthogonalized base vector.
    pub coefficients: Vec<BigRational>,
    pub combinations: usize,
    /// Nonzero coefficient magnitudes were confined to [window.0, window.1].
    pub window: (Magnitude, Magnitude),
}

/// Distance from v to span(d) by exhaustive search over coefficients
/// u * p^k with u = +-a/b, gcd(a,b) = 1, p not dividing a or b, a,b within
/// the digit depth, |k| <= m, plus zero.
///
/// The base is orthogonalized first. Reduction coefficients satisfy
/// ||lambda_i b_i|| <= ||v|| (each elimination step subtracts a term no
/// larger than the residual it acts on), so candidates violating that bound
/// are pruned without losing the optimum.
pub fn brute_force_distance(
    space: &WeightedSpace,
    v: &Vector,
    d: &[Vector],
    cfg: &OracleConfig,
) -> Result<OracleOutcome> {
    if space.field().backend() != Backend::Padic {
        return Err(Error::Unsupported {
            context: "the exhaustive distance oracle runs on the p-adic backend only".into(),
        });
    }
    if cfg.m < 1 {
        return Err(Error::Unsupported {
            context: format!("oracle valuation window {} must be at least 1", cfg.m),
        });
    }
    if space.dim() > cfg.ambient_cap {
        return Err(Error::Unsupported {
            context: format!(
                "oracle ambient cap exceeded: dim {} > {}",
                space.dim(),
                cfg.ambient_cap
            ),
        });
    }
    if d.len() > cfg.subspace_cap {
        return Err(Error::Unsupported {
            context: format!("oracle subspace cap exceeded: {} > {}", d.len(), cfg.subspace_cap),
        });
    }
    space.check_vector(v)?;
    let field = space.field().clone();
    let p = field.prime();
    let target = space.norm(v)?;
    let base = orthogonalize(space, d)?.base;

    // Candidate lists per base vector, pruned by ||lambda b|| <= ||v||.
    let units = unit_parts(p, cfg.digit_depth);
    let mut candidates: Vec<Vec<BigRational>> = Vec::with_capacity(base.len());
    for b in &base {
        let norm_b = space.norm(b)?;
        let mut list = vec![BigRational::zero()];
        for k in -cfg.m..=cfg.m {
            // |u p^k| = p^-k for a unit u.
            let lambda_abs = Magnitude::prime_pow(p, BigRational::from_integer(BigInt::from(-k)))?;
            if lambda_abs.mul(&norm_b) > target {
                continue;
            }
            let pk = BigRational::from_integer(BigInt::from(p)).pow(k as i32);
            for u in &units {
                list.push(u * &pk);
            }
        }
        candidates.push(list);
    }

    let mut best = (target, vec![BigRational::zero(); base.len()]);
    let mut combinations = 0usize;
    let mut chosen = vec![BigRational::zero(); base.len()];
    search(space, v, &base, &candidates, 0, &mut chosen, &mut best, &mut combinations)?;

    Ok(OracleOutcome {
        distance: best.0,
        coefficients: best.1,
        combinations,
        window: (
            Magnitude::prime_pow(p, BigRational::from_integer(BigInt::from(-cfg.m)))?,
            Magnitude::prime_pow(p, BigRational::from_integer(BigInt::from(cfg.m)))?,
        ),
    })
}

/// All +-a/b in lowest terms with a, b <= depth and p dividing neither.
fn unit_parts(p: u64, depth: u64) -> Vec<BigRational> {
    let mut out = Vec::new();
    for a in 1..=depth {
        if a % p == 0 {
            continue;
        }
        for b in 1..=depth {
            if b % p == 0 || num::integer::gcd(a, b) != 1 {
                continue;
            }
            let q = BigRational::new(BigInt::from(a), BigInt::from(b));
            out.push(q.clone());
            out.push(-q);
        }
    }
    out
}

fn search(
    space: &WeightedSpace,
    residual: &Vector,
    base: &[Vector],
    candidates: &[Vec<BigRational>],
    depth: usize,
    chosen: &mut Vec<BigRational>,
    best: &mut (Magnitude, Vec<BigRational>),
    combinations: &mut usize,
) -> Result<()> {
    if depth == base.len() {
        *combinations += 1;
        let n = space.norm(residual)?;
        if n < best.0 {
            *best = (n, chosen.clone());
        }
        return Ok(());
    }
    let field = space.field();
    for lambda in &candidates[depth] {
        let next = if lambda.is_zero() {
            residual.clone()
        } else {
            let s = field.from_rational(lambda.clone());
            space.sub(residual, &space.scale(&s, &base[depth])?)?
        };
        chosen[depth] = lambda.clone();
        search(space, &next, base, candidates, depth + 1, chosen, best, combinations)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FieldDescriptor;
    use crate::space::{distance, Subspace};
    use num::One;

    fn q2() -> WeightedSpace {
        WeightedSpace::standard(FieldDescriptor::padic(2).unwrap(), 2)
    }

    fn vec2(space: &WeightedSpace, a: i64, b: i64) -> Vector {
        let f = space.field();
        Vector::new(vec![f.from_integer(a), f.from_integer(b)])
    }

    #[test]
    fn membership_and_the_two_pinned_gaps() {
        let space = q2();
        let cfg = OracleConfig::default();

        // v inside the span comes back at distance zero.
        let d = vec![vec2(&space, 1, 1)];
        let r = brute_force_distance(&space, &vec2(&space, 3, 3), &d, &cfg).unwrap();
        assert!(r.distance.is_zero());
        assert_eq!(r.coefficients, vec![BigRational::from_integer(BigInt::from(3))]);

        // dist((1,0), span{(1,1)}) = 1: any lambda leaves a coordinate of
        // size max(|1-lambda|, |lambda|) >= 1 in the 2-adic metric.
        let r = brute_force_distance(&space, &vec2(&space, 1, 0), &d, &cfg).unwrap();
        assert_eq!(r.distance, Magnitude::one());

        // dist((1,2), span{(1,0)}) = |2| = 2^-1, attained at lambda = 1.
        let d = vec![vec2(&space, 1, 0)];
        let r = brute_force_distance(&space, &vec2(&space, 1, 2), &d, &cfg).unwrap();
        assert_eq!(r.distance, "2^-1".parse().unwrap());
        assert_eq!(r.coefficients, vec![BigRational::one()]);
    }

    #[test]
    fn agrees_with_the_reduction_minimizer_on_a_mixed_instance() {
        let field = FieldDescriptor::padic(3).unwrap();
        let space = WeightedSpace::new(
            field.clone(),
            vec!["3^1".parse().unwrap(), Magnitude::one(), "3^-1".parse().unwrap()],
        )
        .unwrap();
        let v = Vector::new(vec![
            field.from_rational(BigRational::new(BigInt::from(2), BigInt::from(3))),
            field.from_integer(2),
            field.from_integer(9),
        ]);
        let d = vec![
            Vector::new(vec![field.from_integer(1), field.from_integer(3), field.zero()]),
            Vector::new(vec![field.zero(), field.from_integer(2), field.from_integer(1)]),
        ];
        let sub = Subspace::new(space.clone(), d.clone()).unwrap();
        let alg = distance(&v, &sub).unwrap();
        let orc = brute_force_distance(&space, &v, &d, &OracleConfig::default()).unwrap();
        assert_eq!(alg.distance, orc.distance);
        assert!(orc.combinations > 1);
    }

    #[test]
    fn caps_and_backend_are_enforced() {
        let cfg = OracleConfig::default();
        let field = FieldDescriptor::padic(2).unwrap();
        let wide = WeightedSpace::standard(field.clone(), 4);
        let v = wide.zero_vector();
        assert!(matches!(
            brute_force_distance(&wide, &v, &[], &cfg),
            Err(Error::Unsupported { .. })
        ));

        let space = q2();
        let too_many = vec![space.unit(0), space.unit(1), vec2(&space, 1, 1)];
        assert!(matches!(
            brute_force_distance(&space, &vec2(&space, 1, 0), &too_many, &cfg),
            Err(Error::Unsupported { .. })
        ));

        let hahn = WeightedSpace::standard(FieldDescriptor::hahn(2).unwrap(), 2);
        assert!(matches!(
            brute_force_distance(&hahn, &hahn.zero_vector(), &[], &cfg),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn empty_subspace_reports_the_norm_itself() {
        let space = q2();
        let r =
            brute_force_distance(&space, &vec2(&space, 2, 0), &[], &OracleConfig::default())
                .unwrap();
        assert_eq!(r.distance, "2^-1".parse().unwrap());
        assert!(r.coefficients.is_empty());
        assert_eq!(r.combinations, 1);
    }
}
