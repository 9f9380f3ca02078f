//! Randomized invariants. Structured instances come from the seeded
//! generators in `verify::generate`; proptest supplies the seeds plus the
//! raw component values for the grammar round trips.

use num::BigRational;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use ultramet::magnitude::Magnitude;
use ultramet::scalar::FieldDescriptor;
use ultramet::space::{distance, extend_base, orthogonalize, t_defect, LinearMap, Vector};
use ultramet::verify::generate as gen;
use ultramet::{io, Error};

fn arb_magnitude() -> impl Strategy<Value = Magnitude> {
    let term = (
        prop_oneof![Just(2u64), Just(3), Just(5), Just(7), Just(97)],
        (-30i64..=30).prop_filter("nonzero exponent", |n| *n != 0),
        1i64..=9,
    )
        .prop_map(|(p, n, d)| {
            Magnitude::prime_pow(p, BigRational::new(n.into(), d.into())).unwrap()
        });
    prop_oneof![
        1 => Just("0".parse::<Magnitude>().unwrap()),
        2 => Just(Magnitude::one()),
        12 => proptest::collection::vec(term, 1..4).prop_map(|terms| {
            terms.iter().fold(Magnitude::one(), |acc, t| acc.mul(t))
        }),
    ]
}

fn seeded(seed: u64) -> ChaCha12Rng {
    gen::InstanceSeed { master: seed, case: 0 }.rng()
}

fn field_for(rng: &mut ChaCha12Rng, hahn: bool) -> FieldDescriptor {
    let p = gen::gen_prime(rng);
    if hahn {
        FieldDescriptor::hahn(p).unwrap()
    } else {
        FieldDescriptor::padic(p).unwrap()
    }
}

proptest! {
    #[test]
    fn magnitude_printing_reparses(m in arb_magnitude()) {
        let s = m.to_string();
        prop_assert_eq!(&s.parse::<Magnitude>().unwrap(), &m);
        // the grammar has no whitespace anywhere
        let padded_front = format!(" {s}");
        let padded_back = format!("{s} ");
        prop_assert!(padded_front.parse::<Magnitude>().is_err());
        prop_assert!(padded_back.parse::<Magnitude>().is_err());
    }

    #[test]
    fn magnitude_order_respects_multiplication(
        a in arb_magnitude(),
        b in arb_magnitude(),
        c in arb_magnitude(),
    ) {
        if a < b && !c.is_zero() {
            prop_assert!(a.mul(&c) < b.mul(&c));
        }
        if !a.is_zero() {
            prop_assert_eq!(a.root(3).unwrap().pow(3).unwrap(), a.clone());
            prop_assert_eq!(a.mul(&a.recip().unwrap()), Magnitude::one());
        }
    }

    #[test]
    fn scalar_printing_reparses(seed in any::<u64>(), hahn in any::<bool>()) {
        let mut rng = seeded(seed);
        let field = field_for(&mut rng, hahn);
        for _ in 0..8 {
            let s = gen::gen_scalar(&mut rng, &field);
            let printed = s.to_string();
            prop_assert_eq!(&field.parse_scalar(&printed).unwrap(), &s);
        }
    }

    #[test]
    fn file_formats_reparse(seed in any::<u64>(), hahn in any::<bool>()) {
        let mut rng = seeded(seed);
        let field = field_for(&mut rng, hahn);
        let dim = rng.random_range(1..=4);
        let space = gen::gen_space(&mut rng, &field, dim, true);
        prop_assert_eq!(&io::parse_space(&io::space_json(&space)).unwrap(), &space);

        let vectors: Vec<Vector> = (0..3).map(|_| gen::gen_vector(&mut rng, &space)).collect();
        prop_assert_eq!(&io::parse_vectors(&io::vectors_json(&vectors), &space).unwrap(), &vectors);

        let want = rng.random_range(1..=dim);
        let sub = gen::gen_subspace(&mut rng, &space, want).unwrap();
        let back = io::parse_subspace(&io::subspace_json(&sub), &space).unwrap();
        prop_assert_eq!(back.span(), sub.span());
    }

    #[test]
    fn norms_are_ultrametric_and_homogeneous(seed in any::<u64>(), hahn in any::<bool>()) {
        let mut rng = seeded(seed);
        let field = field_for(&mut rng, hahn);
        let dim = rng.random_range(1..=5);
        let space = gen::gen_space(&mut rng, &field, dim, true);
        let x = gen::gen_vector(&mut rng, &space);
        let y = gen::gen_vector(&mut rng, &space);
        let nx = space.norm(&x).unwrap();
        let ny = space.norm(&y).unwrap();
        let cap = nx.clone().max(ny.clone());
        let nsum = space.norm(&space.add(&x, &y).unwrap()).unwrap();
        prop_assert!(nsum <= cap);
        if nx != ny {
            prop_assert_eq!(&nsum, &cap);
        }
        let lambda = gen::gen_scalar(&mut rng, &field);
        let scaled = space.norm(&space.scale(&lambda, &x).unwrap()).unwrap();
        prop_assert_eq!(scaled, field.abs(&lambda).mul(&nx));
    }

    #[test]
    fn echelon_bases_satisfy_the_max_formula(seed in any::<u64>()) {
        // exact arithmetic throughout needs the rational backend; arbitrary
        // input lists over truncated series can exhaust precision
        let mut rng = seeded(seed);
        let field = field_for(&mut rng, false);
        let dim = rng.random_range(2..=5);
        let space = gen::gen_space(&mut rng, &field, dim, true);
        let count = rng.random_range(1..=dim + 1);
        let vectors: Vec<Vector> = (0..count).map(|_| gen::gen_vector(&mut rng, &space)).collect();
        let orth = orthogonalize(&space, &vectors).unwrap();
        prop_assert_eq!(orth.base.len() + orth.dropped.len(), vectors.len());
        if orth.base.is_empty() {
            return Ok(());
        }
        prop_assert!(t_defect(&space, &orth.base).unwrap().level.is_one());
        for _ in 0..3 {
            let mut combo = space.zero_vector();
            let mut expected = "0".parse::<Magnitude>().unwrap();
            for b in &orth.base {
                let lambda = gen::gen_scalar(&mut rng, &field);
                combo = space.add(&combo, &space.scale(&lambda, b).unwrap()).unwrap();
                expected = expected.max(field.abs(&lambda).mul(&space.norm(b).unwrap()));
            }
            prop_assert_eq!(space.norm(&combo).unwrap(), expected);
        }
    }

    #[test]
    fn distance_witnesses_attain_and_are_minimal(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let field = field_for(&mut rng, false);
        let dim = rng.random_range(2..=4);
        let space = gen::gen_space(&mut rng, &field, dim, true);
        let want = rng.random_range(1..dim);
        let sub = gen::gen_subspace(&mut rng, &space, want).unwrap();
        let v = gen::gen_vector(&mut rng, &space);
        let res = distance(&v, &sub).unwrap();
        prop_assert!(sub.contains(&res.witness).unwrap());
        let gap = space.sub(&v, &res.witness).unwrap();
        prop_assert_eq!(&space.norm(&gap).unwrap(), &res.distance);
        prop_assert!(res.distance <= space.norm(&v).unwrap());
        // no sampled competitor does better
        let base = &sub.reduced().unwrap().base;
        for _ in 0..4 {
            let mut w = space.zero_vector();
            for b in base {
                let lambda = gen::gen_scalar(&mut rng, &field);
                w = space.add(&w, &space.scale(&lambda, b).unwrap()).unwrap();
            }
            prop_assert!(space.norm(&space.sub(&v, &w).unwrap()).unwrap() >= res.distance);
        }
    }

    #[test]
    fn operator_norms_are_attained_on_the_base(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let field = field_for(&mut rng, false);
        let dim = rng.random_range(1..=4);
        let domain = gen::gen_space(&mut rng, &field, dim, true);
        let codim = rng.random_range(dim..=dim + 2);
        let codomain = gen::gen_space(&mut rng, &field, codim, true);
        let span: Vec<Vector> = (0..dim).map(|i| domain.unit(i)).collect();
        let images: Vec<Vector> = (0..dim).map(|_| gen::gen_vector(&mut rng, &codomain)).collect();
        let map = LinearMap::new(domain.clone(), span, images, codomain.clone()).unwrap();
        let bound = map.operator_norm().unwrap();
        let mut attained = false;
        for b in map.domain_base() {
            let ratio = codomain
                .norm(&map.evaluate(b).unwrap())
                .unwrap()
                .mul(&domain.norm(b).unwrap().recip().unwrap());
            prop_assert!(ratio <= bound);
            attained |= ratio == bound;
        }
        prop_assert!(attained);
        for _ in 0..4 {
            let v = gen::gen_vector(&mut rng, &domain);
            let lhs = codomain.norm(&map.evaluate(&v).unwrap()).unwrap();
            prop_assert!(lhs <= bound.mul(&domain.norm(&v).unwrap()));
        }
    }

    #[test]
    fn extended_bases_keep_the_prefix_and_the_level(seed in any::<u64>(), hahn in any::<bool>()) {
        let mut rng = seeded(seed);
        let field = field_for(&mut rng, hahn);
        let dim = rng.random_range(2..=5);
        let space = gen::gen_space(&mut rng, &field, dim, true);
        let want = rng.random_range(1..dim);
        let sub = gen::gen_subspace(&mut rng, &space, want).unwrap();
        let f_base = sub.reduced().unwrap().base.clone();
        let ext = extend_base(&space, &f_base, None, &Magnitude::one()).unwrap();
        prop_assert_eq!(ext.prefix_len, f_base.len());
        prop_assert_eq!(&ext.vectors[..f_base.len()], &f_base[..]);
        prop_assert_eq!(ext.vectors.len(), dim);
        prop_assert!(ext.certificate.level >= ext.requested_level);
        prop_assert!(ext.certificate.level.is_one());
    }

    #[test]
    fn generated_isometries_preserve_every_norm(seed in any::<u64>(), hahn in any::<bool>()) {
        let mut rng = seeded(seed);
        let field = field_for(&mut rng, hahn);
        let dim = rng.random_range(1..=4);
        let space = gen::gen_space(&mut rng, &field, dim, false);
        let steps = rng.random_range(0..=6);
        let Ok(iso) = gen::gen_isometry(&mut rng, &space, steps) else {
            return Ok(());
        };
        for _ in 0..5 {
            let v = gen::gen_vector(&mut rng, &space);
            prop_assert_eq!(
                space.norm(&iso.evaluate(&v).unwrap()).unwrap(),
                space.norm(&v).unwrap()
            );
        }
    }

    #[test]
    fn malformed_scalars_are_parse_errors(seed in any::<u64>(), junk in "[ t^()*+0-9/]{0,12}") {
        let mut rng = seeded(seed);
        let hahn = rng.random_bool(0.5);
        let field = field_for(&mut rng, hahn);
        match field.parse_scalar(&junk) {
            Ok(s) => {
                // anything accepted must survive the round trip
                prop_assert_eq!(&field.parse_scalar(&s.to_string()).unwrap(), &s);
            }
            Err(Error::Parse { .. }) => {}
            Err(other) => panic!("unexpected error class: {other}"),
        }
    }
}
