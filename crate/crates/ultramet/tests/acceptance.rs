//! The release gate: nine criteria, each a named test producing one
//! pass/fail line, with wall-clock budgets asserted inside the test.
//!
//! Everything here is exact; "passes" always means equality or a decided
//! order on magnitudes, never a floating tolerance.

use std::time::{Duration, Instant};

use num::BigRational;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use ultramet::gurarii::{
    check_perturbation, epsilon_isometry, isometric_eq, nonexistence_certificate, patch_isometry,
    shrinking_balls, Ambient, GapOutcome, IsoEqOutcome, PerturbationVerdict,
};
use ultramet::magnitude::Magnitude;
use ultramet::scalar::FieldDescriptor;
use ultramet::space::{LinearMap, Subspace, Vector, WeightedSpace};
use ultramet::verify::generate::{
    gen_nonzero_vector, gen_space, gen_subspace, gen_vector, rat,
};
use ultramet::verify::{run_suite, SuiteReport};

fn assert_suite(name: &str, seed: u64, cases: u64, budget: Duration) -> (SuiteReport, Duration) {
    let t0 = Instant::now();
    let rep = run_suite(name, seed, cases).expect("known suite name");
    let dt = t0.elapsed();
    assert!(
        rep.all_passed(),
        "suite {name} (seed {seed}): {} of {} cases failed; first failure: {:?}",
        rep.failed,
        rep.cases,
        rep.failures.first()
    );
    assert!(dt < budget, "suite {name} took {dt:?}, budget {budget:?}");
    (rep, dt)
}

#[test]
fn c1_orthogonalization_soundness_1000_cases() {
    let (rep, dt) = assert_suite("orth", 101, 1000, Duration::from_secs(60));
    println!(
        "criterion 1 PASS: {} seeded subspaces over the 2-, 3- and 5-adics, \
         echelon defect exactly 1 and spans preserved ({} ms)",
        rep.cases,
        dt.as_millis()
    );
}

#[test]
fn c2_oracle_equivalence_300_cases() {
    let (rep, dt) = assert_suite("oracle", 102, 300, Duration::from_secs(120));
    println!(
        "criterion 2 PASS: {} in-cap instances, distance() equals the \
         exhaustive grid oracle exactly ({} ms)",
        rep.cases,
        dt.as_millis()
    );
}

#[test]
fn c3_perturbation_certificates_1000_instances() {
    let t0 = Instant::now();
    let mut certified = 0u64;
    for case in 0..1000u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(103);
        rng.set_stream(case);
        let p = [2u64, 3, 5][rng.random_range(0..3)];
        let field = FieldDescriptor::padic(p).unwrap();
        let dim = rng.random_range(2..=4);
        let space = gen_space(&mut rng, &field, dim, false);
        let want = rng.random_range(1..=dim);
        let xs = gen_subspace(&mut rng, &space, want)
            .unwrap()
            .reduced()
            .unwrap()
            .base
            .clone();
        let t = Magnitude::prime_pow(p, rat(-((case % 3) as i64), 1)).unwrap();
        // hypotheses enforced: every perturbation lands strictly below t||x||
        let mut zs = Vec::with_capacity(xs.len());
        for x in &xs {
            let drop = 1 + rng.random_range(0..=1i64);
            let target = t
                .mul(&space.norm(x).unwrap())
                .mul(&Magnitude::prime_pow(p, rat(-drop, 1)).unwrap());
            let u = gen_nonzero_vector(&mut rng, &space);
            let s = space
                .field()
                .scalar_with_abs(&target.div(&space.norm(&u).unwrap()).unwrap())
                .unwrap();
            let delta = space.scale(&s, &u).unwrap();
            zs.push(space.add(x, &delta).unwrap());
        }
        match check_perturbation(&space, &xs, &zs, &t).unwrap() {
            PerturbationVerdict::Certified { norms, defect } => {
                for (a, b) in &norms {
                    assert_eq!(a, b, "case {case}: a perturbed norm moved");
                }
                assert!(defect.level >= t, "case {case}: defect {} < t {t}", defect.level);
                certified += 1;
            }
            v => panic!("case {case}: hypothesis-satisfying instance not certified: {v:?}"),
        }
    }
    let dt = t0.elapsed();
    assert_eq!(certified, 1000);
    assert!(dt < Duration::from_secs(30), "criterion 3 took {dt:?}");
    println!(
        "criterion 3 PASS: 1000/1000 hypothesis-enforced perturbations certified, \
         norms preserved and defect >= t ({} ms)",
        dt.as_millis()
    );
}

#[test]
fn c4_eps_isometry_positive_direction_200_instances() {
    let (rep, dt) = assert_suite("th-aud-pos", 104, 200, Duration::from_secs(300));
    println!(
        "criterion 4 PASS: {} Hahn-backend instances with eps in {{1/2, 1/4, 1/10}}, \
         retraction exact and (1 +- eps) bounds exact on bases plus 500 random \
         vectors each ({} ms)",
        rep.cases,
        dt.as_millis()
    );
}

#[test]
fn c5_gap_certificate_and_dichotomy() {
    let t0 = Instant::now();
    let s1 = Magnitude::from_rational(&rat(3, 4)).unwrap();
    let eps = rat(1, 4);

    let field2 = FieldDescriptor::padic(2).unwrap();
    let e = WeightedSpace::standard(field2.clone(), 1);
    let cert = match nonexistence_certificate(&e, &s1, &eps).unwrap() {
        GapOutcome::Certificate(c) => c,
        GapOutcome::NoGap { blocking } => panic!("expected a gap, got blocking {blocking}"),
    };
    let half: Magnitude = "2^-1".parse().unwrap();
    assert_eq!(cert.gap, (half.clone(), Magnitude::one()));
    assert_eq!(
        cert.interval,
        (
            Magnitude::from_rational(&rat(9, 16)).unwrap(),
            Magnitude::from_rational(&rat(15, 16)).unwrap()
        )
    );
    assert!(cert.gap.0 < cert.interval.0 && cert.interval.1 < cert.gap.1);
    assert!(cert.reverify().unwrap());

    // 1000 adversarial candidates: a map out of the norm-3/4 line is pinned
    // by the image of its generator, so each candidate is an image vector in
    // a stage over the same field; all attained norms must be refuted
    let mut rng = ChaCha12Rng::seed_from_u64(105);
    for _ in 0..1000 {
        let dim = rng.random_range(1..=4);
        let space = gen_space(&mut rng, &field2, dim, false);
        let image = gen_vector(&mut rng, &space);
        let n = space.norm(&image).unwrap();
        assert!(
            cert.refutes_norm(&n),
            "candidate with attained norm {n} evaded the certificate"
        );
    }

    // dichotomy: the same request over a densely valued field succeeds
    let hahn = FieldDescriptor::hahn(2).unwrap();
    let eh = WeightedSpace::standard(hahn.clone(), 1);
    match nonexistence_certificate(&eh, &s1, &eps).unwrap() {
        GapOutcome::NoGap { blocking } => {
            assert!(blocking >= cert.interval.0 && blocking <= cert.interval.1);
        }
        GapOutcome::Certificate(_) => panic!("dense value set certified a gap"),
    }
    let mut a = Ambient::over(hahn.clone(), vec![Magnitude::one()]).unwrap();
    let stage = a.stage();
    let y = WeightedSpace::new(hahn.clone(), vec![Magnitude::one(), s1.clone()]).unwrap();
    let x = Subspace::new(stage.clone(), vec![stage.unit(0)]).unwrap();
    let mut inc = stage.unit(0).coords;
    inc.push(hahn.zero());
    let i_map =
        LinearMap::new(stage.clone(), vec![stage.unit(0)], vec![Vector::new(inc)], y.clone())
            .unwrap();
    let rep = epsilon_isometry(&mut a, &x, &i_map, &eps).unwrap();
    assert!(rep.retraction_verified);

    let dt = t0.elapsed();
    assert!(dt < Duration::from_secs(60), "criterion 5 took {dt:?}");
    println!(
        "criterion 5 PASS: gap (2^-1, 1) around [9/16, 15/16] certified and \
         reverified, 1000 adversarial candidates refuted, dense backend \
         constructs the map instead ({} ms)",
        dt.as_millis()
    );
}

#[test]
fn c6_patching_200_cases_and_the_worked_example() {
    let (rep, suite_dt) = assert_suite("pro-iso", 106, 200, Duration::from_secs(110));

    // the pinned 3-dimensional example over the 2-adics, reproduced bit-exactly
    let t0 = Instant::now();
    let field = FieldDescriptor::padic(2).unwrap();
    let g = WeightedSpace::standard(field.clone(), 3);
    let y = WeightedSpace::standard(field.clone(), 2);
    let fi = |a: i64, b: i64, c: i64| {
        Vector::new(vec![field.from_integer(a), field.from_integer(b), field.from_integer(c)])
    };
    let f = LinearMap::new(
        y.clone(),
        vec![y.unit(0), y.unit(1)],
        vec![fi(1, 2, 0), fi(0, 0, 1)],
        g.clone(),
    )
    .unwrap();
    let j = LinearMap::new(y.clone(), vec![y.unit(0)], vec![fi(1, 0, 0)], g.clone()).unwrap();
    let res = patch_isometry(&j, &f).unwrap();
    assert_eq!(res.t, "2^-1".parse().unwrap());
    assert_eq!(res.map.evaluate(&y.unit(0)).unwrap(), fi(1, 0, 0));
    assert_eq!(res.map.evaluate(&y.unit(1)).unwrap(), fi(0, 0, 1));
    // T(a, b) = (a, 0, b) on a non-base point
    let v = Vector::new(vec![field.from_integer(3), field.from_integer(5)]);
    assert_eq!(res.map.evaluate(&v).unwrap(), fi(3, 0, 5));
    for (a, b) in &res.certificate.base_norms {
        assert_eq!(a, b);
    }
    let dt = t0.elapsed() + suite_dt;
    assert!(dt < Duration::from_secs(120), "criterion 6 took {dt:?}");
    println!(
        "criterion 6 PASS: {} seeded patches certified with T = j on X, and the \
         pinned 3-dimensional example reproduces T(a,b) = (a,0,b) with \
         ||j - f|| = 2^-1 bit-exactly ({} ms)",
        rep.cases,
        dt.as_millis()
    );
}

#[test]
fn c7_disposition_chain_100_requests_both_backends() {
    let t0 = Instant::now();
    // each prop-ud case runs two disposition requests from a 1-dimensional
    // stage, so 50 cases are exactly 100 requests
    let (rep, _) = assert_suite("prop-ud", 107, 50, Duration::from_secs(150));
    // the approx-then-patch drift bound, including planted violations that
    // must be caught before any allocation
    let (rep2, _) = assert_suite("eh-approx", 1007, 100, Duration::from_secs(120));
    let dt = t0.elapsed();
    assert!(dt < Duration::from_secs(300), "criterion 7 took {dt:?}");
    println!(
        "criterion 7 PASS: {} two-round disposition chains (100 requests, mixed \
         cosets, both backends) stayed isometric end to end; {} approx-mode \
         runs verified the pre-patch drift bound exactly ({} ms)",
        rep.cases,
        rep2.cases,
        dt.as_millis()
    );
}

#[test]
fn c8_classification_obstruction_and_witnesses() {
    let t0 = Instant::now();
    let field = FieldDescriptor::padic(2).unwrap();
    let root2 = Magnitude::prime_pow(2, rat(1, 2)).unwrap();
    for n in 2..=6usize {
        let std_space = WeightedSpace::standard(field.clone(), n);
        let mut w = vec![Magnitude::one(); n];
        w[n / 2] = root2.clone();
        let off = WeightedSpace::new(field.clone(), w).unwrap();
        let all = |s: &WeightedSpace| -> Subspace {
            Subspace::new(s.clone(), (0..s.dim()).map(|i| s.unit(i)).collect()).unwrap()
        };
        match isometric_eq(&all(&off), &all(&std_space)).unwrap() {
            IsoEqOutcome::Distinct(ob) => {
                assert_eq!((ob.mult_left, ob.mult_right), (1, 0), "n = {n}");
            }
            IsoEqOutcome::Isometric { .. } => {
                panic!("n = {n}: the 2^(1/2) weight went unnoticed")
            }
        }
    }
    let (rep, _) = assert_suite("izo-classify", 108, 200, Duration::from_secs(50));
    let dt = t0.elapsed();
    assert!(dt < Duration::from_secs(60), "criterion 8 took {dt:?}");
    println!(
        "criterion 8 PASS: the 2^(1/2) weight separates all of n = 2..6 from the \
         standard space, and {} seeded pairs produced certified witnesses \
         whenever fingerprints agreed ({} ms)",
        rep.cases,
        dt.as_millis()
    );
}

#[test]
fn c9_shrinking_balls_n50() {
    let t0 = Instant::now();
    let field = FieldDescriptor::padic(2).unwrap();
    let mut a = Ambient::over(field, Vec::new()).unwrap();
    let rep = shrinking_balls(&mut a, None, 50).unwrap();
    assert!(rep.all_nested);
    assert_eq!(rep.checks.len(), 49);
    let floor = Magnitude::prime_pow(2, rat(-1, 2)).unwrap();
    for c in &rep.checks {
        assert!(c.contained && c.shrinks && c.nested, "check {} failed", c.n);
        assert!(c.radius > floor && c.radius <= Magnitude::one());
        assert!(c.next_radius > floor);
    }
    let dt = t0.elapsed();
    assert!(dt < Duration::from_secs(10), "criterion 9 took {dt:?}");
    println!(
        "criterion 9 PASS: 50 balls, 49 nesting checks, strict radius decrease, \
         all radii inside (2^(-1/2), 1] ({} ms)",
        dt.as_millis()
    );
}
