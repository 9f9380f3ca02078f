//! Seeded instance generators for the suites.
//!
//! Everything here is a pure function of the per-case RNG, so suites stay
//! reproducible under any parallel schedule. Generators only emit instances
//! the exact backends handle without truncation: p-adic coordinates are
//! rationals with small digits, Hahn coordinates are monomials, and Hahn
//! spans keep every coordinate owned by a single vector so pivot divisions
//! never meet a multi-term series.

use num::{BigInt, BigRational};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::magnitude::Magnitude;
use crate::scalar::{Backend, FieldDescriptor, Scalar};
use crate::space::{IsometryOutcome, LinearMap, Subspace, Vector, WeightedSpace};

/// Master seed plus case index. Each case derives its own ChaCha stream, so
/// cases are independent and insensitive to evaluation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceSeed {
    pub master: u64,
    pub case: u64,
}

impl InstanceSeed {
    pub fn rng(&self) -> ChaCha12Rng {
        let mut r = ChaCha12Rng::seed_from_u64(self.master);
        r.set_stream(self.case);
        r
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn gen_prime(rng: &mut ChaCha12Rng) -> u64 {
    [2, 3, 5][rng.random_range(0..3)]
}

/// A point of the field's value group: p^k for the discrete group, p^(a/b)
/// with dyadic b for the dense one.
pub fn gen_group_magnitude(rng: &mut ChaCha12Rng, field: &FieldDescriptor) -> Magnitude {
    let p = field.prime();
    let e = match field.backend() {
        Backend::Padic => rat(rng.random_range(-2..=2), 1),
        Backend::Hahn => rat(rng.random_range(-4..=4), [1, 2, 4][rng.random_range(0..3)]),
    };
    Magnitude::prime_pow(p, e).expect("prime base")
}

/// A weight; with `allow_off_group` it sometimes carries a factor from a
/// different prime, landing outside the value group on both backends.
pub fn gen_weight(rng: &mut ChaCha12Rng, field: &FieldDescriptor, allow_off_group: bool) -> Magnitude {
    let w = gen_group_magnitude(rng, field);
    if allow_off_group && rng.random_bool(0.5) {
        let q = if field.prime() == 2 { 3 } else { 2 };
        return w.mul(&Magnitude::prime_pow(q, rat(1, 1)).expect("prime base"));
    }
    w
}

pub fn gen_space(
    rng: &mut ChaCha12Rng,
    field: &FieldDescriptor,
    dim: usize,
    allow_off_group: bool,
) -> WeightedSpace {
    let weights = (0..dim).map(|_| gen_weight(rng, field, allow_off_group)).collect();
    WeightedSpace::new(field.clone(), weights).expect("nonzero weights")
}

/// A possibly-zero coordinate: small-digit rational times p^k on the p-adic
/// backend, a monomial c t^(a/b) on the Hahn backend.
pub fn gen_scalar(rng: &mut ChaCha12Rng, field: &FieldDescriptor) -> Scalar {
    if rng.random_bool(0.2) {
        return field.zero();
    }
    gen_nonzero_scalar(rng, field)
}

pub fn gen_nonzero_scalar(rng: &mut ChaCha12Rng, field: &FieldDescriptor) -> Scalar {
    let sign = if rng.random_bool(0.5) { 1 } else { -1 };
    match field.backend() {
        Backend::Padic => {
            let a = rng.random_range(1..=2);
            let b = rng.random_range(1..=2);
            let k = rng.random_range(-2..=2);
            let pk = BigRational::from_integer(BigInt::from(field.prime())).pow(k);
            field.from_rational(rat(sign * a, b) * pk)
        }
        Backend::Hahn => {
            let c = rat(sign * rng.random_range(1..=3), 1);
            let e = rat(rng.random_range(-4..=4), [1, 2, 4][rng.random_range(0..3)]);
            field.monomial(c, e).expect("nonzero coefficient")
        }
    }
}

/// |u| = 1: a p-adic unit, or a nonzero constant on the Hahn side.
pub fn gen_unit_scalar(rng: &mut ChaCha12Rng, field: &FieldDescriptor) -> Scalar {
    match field.backend() {
        Backend::Padic => {
            let p = field.prime() as i64;
            let mut pick = || loop {
                let a = rng.random_range(1..=5i64);
                if a % p != 0 {
                    return a;
                }
            };
            let (a, b) = (pick(), pick());
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            field.from_rational(rat(sign * a, b))
        }
        Backend::Hahn => {
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            field.from_rational(rat(sign * rng.random_range(1..=3), 1))
        }
    }
}

pub fn gen_vector(rng: &mut ChaCha12Rng, space: &WeightedSpace) -> Vector {
    Vector::new((0..space.dim()).map(|_| gen_scalar(rng, space.field())).collect())
}

pub fn gen_nonzero_vector(rng: &mut ChaCha12Rng, space: &WeightedSpace) -> Vector {
    let mut coords: Vec<Scalar> =
        (0..space.dim()).map(|_| gen_scalar(rng, space.field())).collect();
    let forced = rng.random_range(0..space.dim());
    if coords.iter().all(|c| c.is_zero()) {
        coords[forced] = gen_nonzero_scalar(rng, space.field());
    }
    Vector::new(coords)
}

/// A random subspace given by `want` generators (dependents are fine; the
/// reduced dimension may come out smaller). On the Hahn backend each
/// generator owns a disjoint set of coordinates, which keeps every later
/// pivot division monomial-by-monomial and therefore exact.
pub fn gen_subspace(rng: &mut ChaCha12Rng, space: &WeightedSpace, want: usize) -> Result<Subspace> {
    let want = want.min(space.dim());
    let vectors = match space.field().backend() {
        Backend::Padic => (0..want).map(|_| gen_nonzero_vector(rng, space)).collect(),
        Backend::Hahn => {
            let mut coords: Vec<usize> = (0..space.dim()).collect();
            coords.shuffle(rng);
            let mut owned: Vec<Vec<usize>> = coords[..want].iter().map(|&c| vec![c]).collect();
            for &extra in &coords[want..] {
                if rng.random_bool(0.5) {
                    let i = rng.random_range(0..want);
                    owned[i].push(extra);
                }
            }
            owned
                .into_iter()
                .map(|cs| {
                    let mut v = vec![space.field().zero(); space.dim()];
                    for (slot, c) in cs.iter().enumerate() {
                        // the first owned coordinate is always populated
                        if slot == 0 || rng.random_bool(0.7) {
                            v[*c] = gen_nonzero_scalar(rng, space.field());
                        }
                    }
                    Vector::new(v)
                })
                .collect()
        }
    };
    Subspace::new(space.clone(), vectors)
}

/// A random isometric automorphism: a composition of swaps between
/// equal-weight coordinates, unit scalings, and shears e_k -> e_k + mu e_j
/// with |mu| w_j <= w_k checked exactly. Certified before it is returned.
pub fn gen_isometry(
    rng: &mut ChaCha12Rng,
    space: &WeightedSpace,
    steps: usize,
) -> Result<LinearMap> {
    let field = space.field().clone();
    let dim = space.dim();
    let mut images: Vec<Vector> = (0..dim).map(|i| space.unit(i)).collect();
    for _ in 0..steps {
        match rng.random_range(0..3) {
            0 => {
                let pairs: Vec<(usize, usize)> = (0..dim)
                    .flat_map(|i| (i + 1..dim).map(move |j| (i, j)))
                    .filter(|&(i, j)| space.weights()[i] == space.weights()[j])
                    .collect();
                if let Some(&(i, j)) = pairs.get(rng.random_range(0..pairs.len().max(1))) {
                    for v in &mut images {
                        let mut coords = v.coords.clone();
                        coords.swap(i, j);
                        *v = Vector::new(coords);
                    }
                }
            }
            1 => {
                let i = rng.random_range(0..dim);
                let u = gen_unit_scalar(rng, &field);
                for v in &mut images {
                    let mut coords = v.coords.clone();
                    coords[i] = field.mul(&coords[i], &u)?;
                    *v = Vector::new(coords);
                }
            }
            _ => {
                if dim < 2 {
                    continue;
                }
                let k = rng.random_range(0..dim);
                let j = (k + 1 + rng.random_range(0..dim - 1)) % dim;
                let ratio = space.weights()[k].div(&space.weights()[j])?;
                // largest p^c <= ratio within a small window; skip if none
                let p = field.prime();
                let Some(step) = (-6..=6i64)
                    .rev()
                    .map(|c| Magnitude::prime_pow(p, rat(c, 1)).expect("prime base"))
                    .find(|m| *m <= ratio)
                else {
                    continue;
                };
                let mu = field.mul(&field.scalar_with_abs(&step)?, &gen_unit_scalar(rng, &field))?;
                debug_assert!(field.abs(&mu).mul(&space.weights()[j]) <= space.weights()[k]);
                for v in &mut images {
                    let mut coords = v.coords.clone();
                    coords[j] = field.add(&coords[j], &field.mul(&mu, &coords[k])?)?;
                    *v = Vector::new(coords);
                }
            }
        }
    }
    let units: Vec<Vector> = (0..dim).map(|i| space.unit(i)).collect();
    let map = LinearMap::new(space.clone(), units, images, space.clone())?;
    match map.certify_isometry()? {
        IsometryOutcome::Certified(_) => Ok(map),
        IsometryOutcome::Refuted(r) => Err(Error::Unsupported {
            context: format!("generator emitted a non-isometry at witness {:?}", r.witness),
        }),
    }
}
