//! Named verification suites.
//!
//! Each suite replays one construction on seeded random instances and
//! recomputes its claims exactly: no tolerances, no sampling error budget.
//! Case k of a run derives its RNG from (seed, k), so reports are
//! reproducible under any rayon schedule; the merge is by case index.

use std::time::Instant;

use num::BigRational;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{self as gen, rat, InstanceSeed};
use super::oracle::{brute_force_distance, OracleConfig};
use crate::error::{Error, Result};
use crate::gurarii::{
    check_perturbation, classify, disposition_extend, embed_into_universal, epsilon_isometry,
    isometric_eq, maximal_orthogonal_split, nonexistence_certificate, patch_isometry,
    shrinking_balls, Ambient, DispositionMode, GapOutcome, IsoEqOutcome, PerturbationVerdict,
};
use crate::magnitude::{coset_of, Magnitude};
use crate::scalar::FieldDescriptor;
use crate::space::{
    distance, extend_base, t_defect, LinearMap, Subspace, Vector, WeightedSpace,
};

pub const SUITES: &[&str] = &[
    "lem1",
    "l-ort",
    "nowy",
    "th-aud-pos",
    "th-aud-neg",
    "t-char",
    "pro-iso",
    "p-univers",
    "prop-ud",
    "eh-approx",
    "ehh-balls",
    "izo-classify",
    "orth",
    "oracle",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseFailure {
    pub case: u64,
    pub message: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub artifact: serde_json::Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: u64,
    pub passed: u64,
    pub failed: u64,
    pub verdicts: Vec<bool>,
    pub failures: Vec<CaseFailure>,
    /// Wall-clock milliseconds; the one nondeterministic field.
    pub wall_ms: u64,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0 && self.passed == self.cases
    }

    /// Stable form for golden comparisons: identical runs serialize
    /// identically because only the timing field is zeroed.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.wall_ms = 0;
        serde_json::to_string_pretty(&c).expect("report serializes")
    }
}

struct Fail {
    message: String,
    artifact: serde_json::Value,
}

type CaseResult = std::result::Result<(), Fail>;

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail { message: e.to_string(), artifact: serde_json::Value::Null }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> CaseResult {
    if cond {
        Ok(())
    } else {
        Err(Fail { message: msg(), artifact: serde_json::Value::Null })
    }
}

/// Attaches the instance to whatever failure came out of the checks.
fn finish(r: CaseResult, instance: impl FnOnce() -> serde_json::Value) -> CaseResult {
    r.map_err(|mut f| {
        if f.artifact.is_null() {
            f.artifact = instance();
        }
        f
    })
}

pub fn run_suite(name: &str, seed: u64, cases: u64) -> Result<SuiteReport> {
    let f: fn(InstanceSeed) -> CaseResult = match name {
        "lem1" => case_lem1,
        "l-ort" => case_lort,
        "nowy" => case_nowy,
        "th-aud-pos" => case_thaud_pos,
        "th-aud-neg" => case_thaud_neg,
        "t-char" => case_tchar,
        "pro-iso" => case_proiso,
        "p-univers" => case_punivers,
        "prop-ud" => case_propud,
        "eh-approx" => case_ehapprox,
        "ehh-balls" => case_ehhballs,
        "izo-classify" => case_izoclassify,
        "orth" => case_orth,
        "oracle" => case_oracle,
        _ => {
            return Err(Error::Parse {
                what: "suite",
                input: name.to_string(),
                reason: format!("unknown suite; known: {}", SUITES.join(", ")),
            })
        }
    };
    Ok(run_cases(name, seed, cases, f))
}

pub fn run_all(seed: u64, cases: u64) -> Result<Vec<SuiteReport>> {
    SUITES.iter().map(|s| run_suite(s, seed, cases)).collect()
}

fn run_cases(
    suite: &str,
    seed: u64,
    cases: u64,
    f: impl Fn(InstanceSeed) -> CaseResult + Sync,
) -> SuiteReport {
    let start = Instant::now();
    let outcomes: Vec<Option<Fail>> = (0..cases)
        .into_par_iter()
        .map(|case| f(InstanceSeed { master: seed, case }).err())
        .collect();
    let mut verdicts = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            None => verdicts.push(true),
            Some(fail) => {
                verdicts.push(false);
                failures.push(CaseFailure {
                    case: i as u64,
                    message: fail.message,
                    artifact: fail.artifact,
                });
            }
        }
    }
    let failed = failures.len() as u64;
    SuiteReport {
        suite: suite.to_string(),
        seed,
        cases,
        passed: cases - failed,
        failed,
        verdicts,
        failures,
        wall_ms: start.elapsed().as_millis() as u64,
    }
}

fn padic_field(rng: &mut ChaCha12Rng) -> FieldDescriptor {
    FieldDescriptor::padic(gen::gen_prime(rng)).expect("prime base")
}

fn hahn_field(rng: &mut ChaCha12Rng) -> FieldDescriptor {
    FieldDescriptor::hahn(gen::gen_prime(rng)).expect("prime base")
}

fn whole(space: &WeightedSpace) -> Result<Subspace> {
    let units = (0..space.dim()).map(|i| space.unit(i)).collect();
    Subspace::new(space.clone(), units)
}

/// A random vector rescaled to hit `target` exactly. Valid whenever
/// target / ||v|| lies in the value group.
fn scaled_to_norm(
    rng: &mut ChaCha12Rng,
    space: &WeightedSpace,
    target: &Magnitude,
) -> Result<Vector> {
    let u = gen::gen_nonzero_vector(rng, space);
    let s = space.field().scalar_with_abs(&target.div(&space.norm(&u)?)?)?;
    space.scale(&s, &u)
}

fn scaled_unit_to_norm(
    rng: &mut ChaCha12Rng,
    space: &WeightedSpace,
    coord: usize,
    target: &Magnitude,
) -> Result<Vector> {
    let s = space.field().scalar_with_abs(&target.div(&space.weights()[coord])?)?;
    let s = space.field().mul(&s, &gen::gen_unit_scalar(rng, space.field()))?;
    space.scale(&s, &space.unit(coord))
}

// --- orth: forward-echelon output is exactly orthogonal and spans its input

fn case_orth(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = padic_field(&mut rng);
    let dim = rng.random_range(2..=6);
    let space = gen::gen_space(&mut rng, &field, dim, seed.case % 3 == 0);
    let want = rng.random_range(1..=dim);
    let mut vectors: Vec<Vector> =
        (0..want).map(|_| gen::gen_nonzero_vector(&mut rng, &space)).collect();
    if seed.case % 4 == 0 && vectors.len() >= 2 {
        // adjoin a dependent combination; it must reduce to zero, not pivot
        let extra = (|| -> Result<Vector> {
            let s = gen::gen_nonzero_scalar(&mut rng, &field);
            space.add(&space.scale(&s, &vectors[0])?, &vectors[1])
        })();
        match extra {
            Ok(v) if !v.is_zero() => vectors.push(v),
            _ => {}
        }
    }
    let r = (|| -> CaseResult {
        let sub = Subspace::new(space.clone(), vectors.clone())?;
        let red = sub.reduced()?;
        let cert = t_defect(&space, &red.base)?;
        ensure(cert.level.is_one(), || {
            format!("echelon base has defect {}, expected exactly 1", cert.level)
        })?;
        for v in &vectors {
            ensure(sub.contains(v)?, || format!("input vector {v} escaped its own span"))?;
        }
        // the max formula on random combinations of the echelon base
        for _ in 0..3 {
            let mut acc = space.zero_vector();
            let mut expected = Magnitude::Zero;
            for b in &red.base {
                let s = gen::gen_scalar(&mut rng, &field);
                let term = space.scale(&s, b)?;
                let n = space.norm(&term)?;
                if n > expected {
                    expected = n;
                }
                acc = space.add(&acc, &term)?;
            }
            let got = space.norm(&acc)?;
            ensure(got == expected, || {
                format!("||sum|| = {got} differs from max term {expected}")
            })?;
        }
        Ok(())
    })();
    finish(r, || serde_json::json!({ "space": space, "vectors": vectors }))
}

// --- lem1: base extension keeps the prefix and reaches the requested level

fn case_lem1(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = padic_field(&mut rng);
    let p = field.prime();
    let dim = rng.random_range(2..=5);
    let space = gen::gen_space(&mut rng, &field, dim, true);
    let want = rng.random_range(0..=dim);
    let f_base: Vec<Vector> = if want == 0 {
        Vec::new()
    } else {
        match gen::gen_subspace(&mut rng, &space, want) {
            Ok(sub) => match sub.reduced() {
                Ok(r) => r.base.clone(),
                Err(e) => return Err(e.into()),
            },
            Err(e) => return Err(e.into()),
        }
    };
    let t = Magnitude::prime_pow(p, rat(-((seed.case % 3) as i64), 1)).expect("prime base");
    let r = (|| -> CaseResult {
        let ext = extend_base(&space, &f_base, None, &t)?;
        ensure(ext.prefix_len == f_base.len(), || "prefix length drifted".into())?;
        ensure(ext.vectors[..ext.prefix_len] == f_base[..], || {
            "extension rewrote the input prefix".into()
        })?;
        ensure(ext.vectors.len() == dim, || {
            format!("extended list has {} vectors, expected {dim}", ext.vectors.len())
        })?;
        ensure(ext.certificate.level >= t, || {
            format!("level {} below request {t}", ext.certificate.level)
        })?;
        ensure(ext.certificate.level.is_one(), || {
            format!("complement-unit extension should be exactly orthogonal, got {}",
                ext.certificate.level)
        })?;
        let full = Subspace::new(space.clone(), ext.vectors.clone())?;
        for i in 0..dim {
            ensure(full.contains(&space.unit(i))?, || {
                format!("extended list misses unit {i}")
            })?;
        }
        Ok(())
    })();
    finish(r, || serde_json::json!({ "space": space, "prefix": f_base, "t": t }))
}

// --- l-ort: perturbations strictly below t preserve norms and t-orthogonality

fn case_lort(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = padic_field(&mut rng);
    let p = field.prime();
    let dim = rng.random_range(2..=4);
    let space = gen::gen_space(&mut rng, &field, dim, false);
    let r = (|| -> CaseResult {
        let want = rng.random_range(1..=dim);
        let xs = gen::gen_subspace(&mut rng, &space, want)?.reduced()?.base.clone();
        let t = Magnitude::prime_pow(p, rat(-((seed.case % 3) as i64), 1))?;
        let violate = seed.case % 5 == 4;
        let mut zs = Vec::with_capacity(xs.len());
        let mut violated_at = None;
        for (i, x) in xs.iter().enumerate() {
            let n = space.norm(x)?;
            let drop = if violate && i == 0 {
                violated_at = Some(i + 1);
                0 // ||delta|| = t ||x||: exactly at the bound, not below it
            } else {
                1 + (rng.random_range(0..=1i64))
            };
            let target = t.mul(&n).mul(&Magnitude::prime_pow(p, rat(-drop, 1))?);
            let delta = scaled_to_norm(&mut rng, &space, &target)?;
            zs.push(space.add(x, &delta)?);
        }
        let verdict = check_perturbation(&space, &xs, &zs, &t)?;
        match (violated_at, verdict) {
            (None, PerturbationVerdict::Certified { norms, defect }) => {
                for (i, (a, b)) in norms.iter().enumerate() {
                    ensure(a == b, || format!("norm pair {i} changed: {a} vs {b}"))?;
                }
                ensure(defect.level >= t, || {
                    format!("perturbed defect {} below t = {t}", defect.level)
                })
            }
            (None, v) => Err(Fail {
                message: format!("expected certification, got {v:?}"),
                artifact: serde_json::Value::Null,
            }),
            (Some(idx), PerturbationVerdict::HypothesisFailed { index, gap, bound }) => {
                ensure(index == idx, || format!("violation reported at {index}, planted at {idx}"))?;
                ensure(gap == bound, || {
                    format!("planted an exact-bound violation, got gap {gap} vs bound {bound}")
                })
            }
            (Some(_), v) => Err(Fail {
                message: format!("planted violation went undetected: {v:?}"),
                artifact: serde_json::Value::Null,
            }),
        }
    })();
    finish(r, || serde_json::json!({ "space": space, "case": seed.case }))
}

// --- nowy: maximal orthogonal splits put a complement orthogonal to X

fn case_nowy(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = padic_field(&mut rng);
    let dim = rng.random_range(2..=4);
    let space = gen::gen_space(&mut rng, &field, dim, true);
    let r = (|| -> CaseResult {
        let y = whole(&space)?;
        let want = rng.random_range(1..=dim - 1);
        let x = gen::gen_subspace(&mut rng, &space, want)?;
        let split = maximal_orthogonal_split(&y, &x)?;
        ensure(split.certificate.orthogonal, || {
            "complement certificate is not orthogonal".into()
        })?;
        ensure(split.u.len() == dim, || {
            format!("split base has {} vectors, expected {dim}", split.u.len())
        })?;
        ensure(split.prefix == x.dim()?, || "prefix is not a base of X".into())?;
        ensure(split.complement.dim()? == dim - x.dim()?, || {
            "complement dimension off".into()
        })?;
        ensure(t_defect(&space, &split.u)?.level.is_one(), || {
            "split base is not exactly orthogonal".into()
        })?;
        let prefix = Subspace::new(space.clone(), split.u[..split.prefix].to_vec())?;
        for v in x.span() {
            ensure(prefix.contains(v)?, || "prefix does not span X".into())?;
        }
        for b in &split.u[..split.prefix] {
            ensure(x.contains(b)?, || "prefix vector left X".into())?;
        }
        Ok(())
    })();
    finish(r, || serde_json::json!({ "space": space, "case": seed.case }))
}

// --- th-aud-pos: eps-isometries on densely valued stages, bounds recomputed

fn case_thaud_pos(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = hahn_field(&mut rng);
    let stage_dim = rng.random_range(1..=2);
    let stage_weights: Vec<Magnitude> =
        (0..stage_dim).map(|_| gen::gen_weight(&mut rng, &field, seed.case % 3 == 0)).collect();
    let eps = [rat(1, 2), rat(1, 4), rat(1, 10)][(seed.case % 3) as usize].clone();
    let r = (|| -> CaseResult {
        let mut a = Ambient::over(field.clone(), stage_weights.clone())?;
        let stage = a.stage();
        let want = rng.random_range(1..=stage_dim);
        let mut coords: Vec<usize> = (0..stage_dim).collect();
        coords.shuffle(&mut rng);
        let xs: Vec<Vector> = coords[..want]
            .iter()
            .map(|&c| stage.scale(&gen::gen_nonzero_scalar(&mut rng, &field), &stage.unit(c)))
            .collect::<Result<_>>()?;
        let x = Subspace::new(stage.clone(), xs.clone())?;

        let extra = rng.random_range(0..=2);
        let mut y_weights = stage_weights.clone();
        for _ in 0..extra {
            y_weights.push(gen::gen_weight(&mut rng, &field, false));
        }
        let y_space = WeightedSpace::new(field.clone(), y_weights)?;
        let pad = |v: &Vector| -> Vector {
            let mut c = v.coords.clone();
            c.resize(y_space.dim(), field.zero());
            Vector::new(c)
        };
        let i_map = LinearMap::new(
            stage.clone(),
            xs.clone(),
            xs.iter().map(&pad).collect(),
            y_space.clone(),
        )?;

        let rep = epsilon_isometry(&mut a, &x, &i_map, &eps)?;
        ensure(rep.retraction_verified, || "retraction failed on the X base".into())?;
        let final_stage = a.stage();

        // f(i(x)) = x beyond the base: random X combinations
        for _ in 0..100 {
            let mut xv = stage.zero_vector();
            for b in &xs {
                let s = gen::gen_scalar(&mut rng, &field);
                xv = stage.add(&xv, &stage.scale(&s, b)?)?;
            }
            let through = rep.map.evaluate(&i_map.evaluate(&xv)?)?;
            ensure(through == a.lift(&xv)?, || {
                format!("retraction broke on {xv}")
            })?;
        }

        // the (1 +- eps) bounds on random Y vectors, compared exactly
        let lo = Magnitude::from_rational(&(BigRational::from_integer(1.into()) - &eps))?;
        let hi = Magnitude::from_rational(&(BigRational::from_integer(1.into()) + &eps))?;
        for _ in 0..500 {
            let yv = gen::gen_vector(&mut rng, &y_space);
            let ny = y_space.norm(&yv)?;
            let nf = final_stage.norm(&rep.map.evaluate(&yv)?)?;
            ensure(nf >= lo.mul(&ny) && nf <= hi.mul(&ny), || {
                format!("||f(y)|| = {nf} outside [{}, {}]", lo.mul(&ny), hi.mul(&ny))
            })?;
        }
        ensure(rep.lower <= rep.upper, || "base ratio bounds inverted".into())?;
        Ok(())
    })();
    finish(r, || {
        serde_json::json!({ "weights": stage_weights, "eps": eps.to_string(), "case": seed.case })
    })
}

// --- th-aud-neg: discrete stages refuse off-ladder norms with a certificate

fn case_thaud_neg(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = padic_field(&mut rng);
    let p = field.prime();
    let dim = rng.random_range(1..=3);
    let weights: Vec<Magnitude> = (0..dim)
        .map(|_| Magnitude::prime_pow(p, rat(rng.random_range(-1..=1), 1)).expect("prime base"))
        .collect();
    let b = rng.random_range(3..=9i64);
    let a_lo = b / (p as i64) + 1;
    let a_num = rng.random_range(a_lo..=b - 1);
    let s1_q = rat(a_num, b);
    let eps = if seed.case % 2 == 0 { rat(1, 16) } else { rat(1, 32) };
    let r = (|| -> CaseResult {
        let space = WeightedSpace::new(field.clone(), weights.clone())?;
        let s1 = Magnitude::from_rational(&s1_q)?;
        let out = nonexistence_certificate(&space, &s1, &eps)?;
        let cert = match out {
            GapOutcome::Certificate(c) => c,
            GapOutcome::NoGap { blocking } => {
                return Err(Fail {
                    message: format!("expected a gap certificate, got blocking point {blocking}"),
                    artifact: serde_json::Value::Null,
                })
            }
        };
        // every weight lives on the ladder p^Z, so the gap around s1 is
        // exactly (p^-1, 1)
        ensure(cert.gap == (Magnitude::prime_pow(p, rat(-1, 1))?, Magnitude::one()), || {
            format!("gap ({}, {}) is not (p^-1, 1)", cert.gap.0, cert.gap.1)
        })?;
        ensure(cert.reverify()?, || "certificate failed its own reverification".into())?;
        // the gap endpoints are the nearest attainable norms; they and any
        // actually attained norm must be refuted
        let attained = space.norm(&gen::gen_vector(&mut rng, &space))?;
        for n in [&cert.gap.0, &cert.gap.1, &attained] {
            ensure(cert.refutes_norm(n), || {
                format!("candidate norm {n} evaded the certificate")
            })?;
        }
        Ok(())
    })();
    finish(r, || {
        serde_json::json!({ "weights": weights, "s1": s1_q.to_string(), "eps": eps.to_string() })
    })
}

// --- t-char: the density dichotomy on one pinned instance

fn case_tchar(_seed: InstanceSeed) -> CaseResult {
    let r = (|| -> CaseResult {
        let s1 = Magnitude::from_rational(&rat(3, 4))?;
        let eps = rat(1, 4);

        // discrete side: a certified gap
        let padic = FieldDescriptor::padic(2)?;
        let e = WeightedSpace::standard(padic, 1);
        let out = nonexistence_certificate(&e, &s1, &eps)?;
        let cert = match out {
            GapOutcome::Certificate(c) => c,
            GapOutcome::NoGap { blocking } => {
                return Err(Fail {
                    message: format!("2-adic line reported no gap (blocking {blocking})"),
                    artifact: serde_json::Value::Null,
                })
            }
        };
        ensure(cert.gap == ("2^-1".parse().unwrap(), Magnitude::one()), || {
            format!("gap is ({}, {})", cert.gap.0, cert.gap.1)
        })?;
        ensure(
            cert.interval
                == (Magnitude::from_rational(&rat(9, 16))?, Magnitude::from_rational(&rat(15, 16))?),
            || format!("interval is ({}, {})", cert.interval.0, cert.interval.1),
        )?;
        ensure(cert.reverify()?, || "reverification failed".into())?;
        ensure(cert.refutes_norm(&"2^-1".parse().unwrap()), || "2^-1 not refuted".into())?;
        ensure(cert.refutes_norm(&Magnitude::one()), || "1 not refuted".into())?;
        ensure(!cert.refutes_norm(&Magnitude::from_rational(&rat(5, 8))?), || {
            "5/8 lies inside the forbidden interval and cannot be refuted by it".into()
        })?;

        // dense side: the same request is blocked by a value-set point
        let hahn = FieldDescriptor::hahn(2)?;
        let eh = WeightedSpace::standard(hahn.clone(), 1);
        match nonexistence_certificate(&eh, &s1, &eps)? {
            GapOutcome::NoGap { blocking } => {
                ensure(
                    blocking >= Magnitude::from_rational(&rat(9, 16))?
                        && blocking <= Magnitude::from_rational(&rat(15, 16))?,
                    || format!("blocking point {blocking} outside the requested interval"),
                )?;
            }
            GapOutcome::Certificate(_) => {
                return Err(Fail {
                    message: "dense value set produced a gap certificate".into(),
                    artifact: serde_json::Value::Null,
                })
            }
        }

        // and the eps-isometry the dense side promises actually exists
        let mut a = Ambient::over(hahn.clone(), vec![Magnitude::one()])?;
        let stage = a.stage();
        let y = WeightedSpace::new(hahn, vec![Magnitude::one(), s1.clone()])?;
        let x = Subspace::new(stage.clone(), vec![stage.unit(0)])?;
        let mut inc = stage.unit(0).coords;
        inc.push(y.field().zero());
        let i_map =
            LinearMap::new(stage.clone(), vec![stage.unit(0)], vec![Vector::new(inc)], y.clone())?;
        let rep = epsilon_isometry(&mut a, &x, &i_map, &eps)?;
        ensure(rep.retraction_verified, || "dense-side retraction failed".into())?;
        let final_stage = a.stage();
        let nf = final_stage.norm(&rep.map.evaluate(&y.unit(1))?)?;
        let lo = s1.mul(&Magnitude::from_rational(&rat(3, 4))?);
        let hi = s1.mul(&Magnitude::from_rational(&rat(5, 4))?);
        ensure(nf >= lo && nf <= hi, || {
            format!("||f(0,1)|| = {nf} outside [{lo}, {hi}]")
        })?;
        Ok(())
    })();
    finish(r, || serde_json::json!({ "instance": "p=2, s1=3/4, eps=1/4" }))
}

// --- pro-iso: patching keeps the prescription on X and stays isometric

fn case_proiso(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = if seed.case % 2 == 0 { padic_field(&mut rng) } else { hahn_field(&mut rng) };
    let p = field.prime();
    let n_y = rng.random_range(2..=3);
    let r = (|| -> CaseResult {
        let y_space = gen::gen_space(&mut rng, &field, n_y, false);
        let mut coords: Vec<usize> = (0..n_y).collect();
        coords.shuffle(&mut rng);
        let y_base: Vec<Vector> = coords
            .iter()
            .map(|&c| y_space.scale(&gen::gen_nonzero_scalar(&mut rng, &field), &y_space.unit(c)))
            .collect::<Result<_>>()?;
        let norms: Vec<Magnitude> =
            y_base.iter().map(|v| y_space.norm(v)).collect::<Result<_>>()?;

        let mut g_weights = norms.clone();
        g_weights.push(gen::gen_group_magnitude(&mut rng, &field));
        let g_space = WeightedSpace::new(field.clone(), g_weights)?;
        let mut f_images: Vec<Vector> = (0..n_y)
            .map(|i| g_space.scale(&gen::gen_unit_scalar(&mut rng, &field), &g_space.unit(i)))
            .collect::<Result<_>>()?;
        if field.backend() == crate::scalar::Backend::Padic {
            let twist = gen::gen_isometry(&mut rng, &g_space, 4)?;
            f_images = f_images
                .iter()
                .map(|v| twist.evaluate(v))
                .collect::<Result<_>>()?;
        }
        let f = LinearMap::new(y_space.clone(), y_base.clone(), f_images.clone(), g_space.clone())?;

        let n_x = rng.random_range(1..=n_y - 1);
        let x = Subspace::new(y_space.clone(), y_base[..n_x].to_vec())?;
        let mut expected_t = Magnitude::Zero;
        let mut j_images = Vec::with_capacity(n_x);
        for i in 0..n_x {
            let drop = 1 + rng.random_range(0..=1i64);
            let ratio = Magnitude::prime_pow(p, rat(-drop, 1))?;
            if ratio > expected_t {
                expected_t = ratio.clone();
            }
            let target = norms[i].mul(&ratio);
            // over the Hahn backend the drift stays on the spare coordinate:
            // colliding with an image pivot would build a two-term pivot and
            // force inexact division during the defect check
            let c = if field.backend() == crate::scalar::Backend::Padic {
                rng.random_range(0..g_space.dim())
            } else {
                g_space.dim() - 1
            };
            let d = scaled_unit_to_norm(&mut rng, &g_space, c, &target)?;
            j_images.push(g_space.add(&f_images[i], &d)?);
        }
        let j = LinearMap::new(y_space.clone(), y_base[..n_x].to_vec(), j_images, g_space.clone())?;

        let res = patch_isometry(&j, &f)?;
        ensure(res.t == expected_t, || {
            format!("patch distance {} differs from the planted drift {expected_t}", res.t)
        })?;
        ensure(res.t < Magnitude::one(), || "patch hypothesis ||j - f|| < 1 violated".into())?;
        for b in x.span() {
            ensure(res.map.evaluate(b)? == j.evaluate(b)?, || {
                format!("patched map deviates from j on {b}")
            })?;
        }
        for (a_n, b_n) in &res.certificate.base_norms {
            ensure(a_n == b_n, || format!("patched map not isometric: {a_n} vs {b_n}"))?;
        }
        Ok(())
    })();
    finish(r, || serde_json::json!({ "backend": format!("{:?}", field.backend()), "case": seed.case }))
}

// --- p-univers: registry-driven embeddings are isometric and stay so

fn case_punivers(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = if seed.case % 2 == 0 { padic_field(&mut rng) } else { hahn_field(&mut rng) };
    let r = (|| -> CaseResult {
        let mut a = Ambient::universal(field.clone(), None)?;
        let mut first: Option<LinearMap> = None;
        let mut seen: Vec<usize> = Vec::new();
        for round in 0..2 {
            let dim = rng.random_range(1..=3);
            let e_space = gen::gen_space(&mut rng, &field, dim, true);
            let want = rng.random_range(1..=dim);
            let sub = gen::gen_subspace(&mut rng, &e_space, want)?;
            let res = embed_into_universal(&sub, &mut a)?;
            for (x, y) in &res.certificate.base_norms {
                ensure(x == y, || format!("embedding changed a norm: {x} vs {y}"))?;
            }
            let group = field.value_group();
            for step in &res.steps {
                ensure(
                    field.abs(&step.scale).mul(&step.representative) == step.norm,
                    || format!("step scale is off at source {}", step.source_index),
                )?;
                ensure(
                    coset_of(&step.norm, &group)? == coset_of(&step.representative, &group)?,
                    || "representative left its coset".into(),
                )?;
                ensure(!seen.contains(&step.index), || "coordinate allocated twice".into())?;
                seen.push(step.index);
            }
            // equal cosets must share their registry representative
            for s1 in &res.steps {
                for s2 in &res.steps {
                    if coset_of(&s1.norm, &group)? == coset_of(&s2.norm, &group)? {
                        ensure(s1.representative == s2.representative, || {
                            "one coset, two representatives".into()
                        })?;
                    }
                }
            }
            if round == 0 {
                first = Some(res.map);
            }
        }
        // the first embedding is still isometric in the final stage
        let m = first.expect("two rounds ran");
        let lifted: Vec<Vector> =
            m.base_images().iter().map(|v| a.lift(v)).collect::<Result<_>>()?;
        let relifted = LinearMap::new(
            m.domain_space().clone(),
            m.domain_base().to_vec(),
            lifted,
            a.stage(),
        )?;
        ensure(relifted.certify_isometry()?.is_certified(), || {
            "earlier embedding stopped being isometric after later allocations".into()
        })?;
        Ok(())
    })();
    finish(r, || serde_json::json!({ "backend": format!("{:?}", field.backend()), "case": seed.case }))
}

// --- prop-ud: repeated disposition extensions stay coherent along the chain

fn case_propud(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = if rng.random_bool(0.5) { padic_field(&mut rng) } else { hahn_field(&mut rng) };
    let p = field.prime();
    let approx = seed.case % 2 == 1;
    let r = (|| -> CaseResult {
        let w0 = gen::gen_group_magnitude(&mut rng, &field);
        let mut a = Ambient::over(field.clone(), vec![w0.clone()])?;
        let stage1 = a.stage();

        // round 1: a one-dimensional X inside a fresh Y, extended to all of Y
        let extras = rng.random_range(1..=2);
        let mut w1 = vec![w0.clone()];
        for _ in 0..extras {
            w1.push(if approx {
                gen::gen_group_magnitude(&mut rng, &field)
            } else {
                gen::gen_weight(&mut rng, &field, true)
            });
        }
        let y1 = WeightedSpace::new(field.clone(), w1)?;
        let c = gen::gen_nonzero_scalar(&mut rng, &field);
        let x_norm = field.abs(&c).mul(&w0);
        let x_vec = if approx {
            let tail = y1.dim() - 1;
            let target = x_norm.mul(&Magnitude::prime_pow(p, rat(-2, 1))?);
            let d = scaled_unit_to_norm(&mut rng, &y1, tail, &target)?;
            y1.add(&y1.scale(&c, &y1.unit(0))?, &d)?
        } else {
            y1.scale(&c, &y1.unit(0))?
        };
        let j1_image = stage1.scale(&c, &stage1.unit(0))?;
        let x1 = Subspace::new(y1.clone(), vec![x_vec.clone()])?;
        let j1 = LinearMap::new(y1.clone(), vec![x_vec.clone()], vec![j1_image], stage1)?;
        let mode1 = if approx {
            DispositionMode::ApproxThenPatch { substage_dim: 1, t: Magnitude::one() }
        } else {
            DispositionMode::Direct
        };
        let d1 = disposition_extend(&mut a, &x1, &j1, &mode1)?;
        ensure(d1.extends_verified, || "round 1 does not extend j".into())?;
        ensure(d1.allocated.len() == y1.dim() - 1, || "round 1 allocation count off".into())?;
        if approx {
            ensure(d1.patch.is_some(), || "approx mode skipped the patch".into())?;
            ensure(
                d1.perturbation.as_ref().map_or(false, |v| v.is_certified()),
                || "approx mode lost its perturbation certificate".into(),
            )?;
        }

        // round 2: re-embed the image of Y1 from inside a bigger Y2
        let stage2 = a.stage();
        let t1_images: Vec<Vector> = (0..y1.dim())
            .map(|k| d1.map.evaluate(&y1.unit(k)))
            .collect::<Result<_>>()?;
        let mut w2 = stage2.weights().to_vec();
        w2.push(gen::gen_weight(&mut rng, &field, true));
        let y2 = WeightedSpace::new(field.clone(), w2)?;
        let pad = |v: &Vector| -> Vector {
            let mut cs = v.coords.clone();
            cs.resize(y2.dim(), field.zero());
            Vector::new(cs)
        };
        let x2_span: Vec<Vector> = t1_images.iter().map(&pad).collect();
        let x2 = Subspace::new(y2.clone(), x2_span.clone())?;
        let j2 = LinearMap::new(y2.clone(), x2_span.clone(), t1_images.clone(), stage2)?;
        let d2 = disposition_extend(&mut a, &x2, &j2, &DispositionMode::Direct)?;
        ensure(d2.extends_verified, || "round 2 does not extend j".into())?;
        ensure(d2.allocated.len() == 1, || "round 2 allocation count off".into())?;

        // chain coherence: round 1 is still an isometry into the final stage,
        // and the copy of Y1 is mapped consistently
        let final_stage = a.stage();
        let lifted: Vec<Vector> =
            d1.map.base_images().iter().map(|v| a.lift(v)).collect::<Result<_>>()?;
        let relifted = LinearMap::new(
            d1.map.domain_space().clone(),
            d1.map.domain_base().to_vec(),
            lifted,
            final_stage,
        )?;
        ensure(relifted.certify_isometry()?.is_certified(), || {
            "round 1 embedding decayed in the final stage".into()
        })?;
        for (x2v, t1im) in x2_span.iter().zip(&t1_images) {
            ensure(d2.map.evaluate(x2v)? == a.lift(t1im)?, || {
                "round 2 moved the embedded copy of Y1".into()
            })?;
        }
        Ok(())
    })();
    finish(r, || serde_json::json!({ "backend": format!("{:?}", field.backend()), "approx": approx }))
}

// --- eh-approx: truncate-then-patch verifies its drift bound before patching

fn case_ehapprox(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = if seed.case % 2 == 0 { padic_field(&mut rng) } else { hahn_field(&mut rng) };
    let p = field.prime();
    let violate = seed.case % 4 == 3;
    let r = (|| -> CaseResult {
        let dim_y = rng.random_range(2..=3);
        let substage = dim_y - 1;
        let y_space = gen::gen_space(&mut rng, &field, dim_y, false);
        let n_x = rng.random_range(1..=substage);
        let mut pivots: Vec<usize> = (0..substage).collect();
        pivots.shuffle(&mut rng);
        let tail = dim_y - 1;
        let t = if seed.case % 2 == 0 {
            Magnitude::one()
        } else {
            Magnitude::from_rational(&rat(3, 4))?
        };
        let mut xs = Vec::with_capacity(n_x);
        let mut norms = Vec::with_capacity(n_x);
        for i in 0..n_x {
            let c = gen::gen_nonzero_scalar(&mut rng, &field);
            let body = y_space.scale(&c, &y_space.unit(pivots[i]))?;
            let n = y_space.norm(&body)?;
            let drift_exp = if violate && i == 0 { 0 } else { 2 };
            let target = n.mul(&Magnitude::prime_pow(p, rat(-drift_exp, 1))?);
            let d = scaled_unit_to_norm(&mut rng, &y_space, tail, &target)?;
            xs.push(y_space.add(&body, &d)?);
            norms.push(n);
        }
        let stage_space = WeightedSpace::new(field.clone(), norms.clone())?;
        let mut a = Ambient::over(field.clone(), norms.clone())?;
        let j_images: Vec<Vector> = (0..n_x).map(|i| stage_space.unit(i)).collect();
        let x = Subspace::new(y_space.clone(), xs.clone())?;
        let j = LinearMap::new(y_space.clone(), xs.clone(), j_images, stage_space)?;
        let mode = DispositionMode::ApproxThenPatch { substage_dim: substage, t: t.clone() };
        let before = a.dim();
        let out = disposition_extend(&mut a, &x, &j, &mode);
        if violate {
            return match out {
                Err(Error::HypothesisFailed { index, .. }) => {
                    ensure(index == 1, || format!("violation planted at 1, reported at {index}"))?;
                    ensure(a.dim() == before, || {
                        "failed extension leaked ambient coordinates".into()
                    })
                }
                Err(e) => Err(Fail {
                    message: format!("expected the drift-bound error, got {e}"),
                    artifact: serde_json::Value::Null,
                }),
                Ok(_) => Err(Fail {
                    message: "oversized drift was accepted".into(),
                    artifact: serde_json::Value::Null,
                }),
            };
        }
        let res = out.map_err(Fail::from)?;
        ensure(res.extends_verified, || "extension does not restrict to j".into())?;
        let patched = res.patch.as_ref().expect("approx mode always patches");
        ensure(patched.t == Magnitude::prime_pow(p, rat(-2, 1))?, || {
            format!("patch drift {} is not the planted p^-2", patched.t)
        })?;
        ensure(patched.t < Magnitude::one(), || "patch drift reached 1".into())?;
        ensure(patched.t < t, || "patch drift reached the request level".into())?;
        ensure(
            res.perturbation.as_ref().map_or(false, |v| v.is_certified()),
            || "perturbation verdict missing or refuted".into(),
        )?;
        Ok(())
    })();
    finish(r, || serde_json::json!({ "backend": format!("{:?}", field.backend()), "violate": violate }))
}

// --- ehh-balls: strictly shrinking nested balls with no common center escape

fn case_ehhballs(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = if seed.case % 2 == 0 { padic_field(&mut rng) } else { hahn_field(&mut rng) };
    let p = field.prime();
    let n = 2 + (seed.case % 9) as usize;
    let custom = seed.case % 4 == 3;
    let r = (|| -> CaseResult {
        let mut a = Ambient::over(field.clone(), Vec::new())?;
        let stream = if custom {
            let k = 2 * (n as i64 + 2);
            Some(
                (1..=n as i64 + 1)
                    .map(|i| Magnitude::from_rational(&rat(k - i, k)))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        let rep = shrinking_balls(&mut a, stream, n)?;
        ensure(rep.all_nested, || "chain is not nested".into())?;
        ensure(rep.checks.len() == n - 1, || {
            format!("{} checks for {n} balls", rep.checks.len())
        })?;
        ensure(a.dim() == n, || "ambient dimension should match the chain length".into())?;
        let half = Magnitude::prime_pow(2, rat(-1, 1))?;
        let floor = if custom {
            half
        } else {
            // the default stream stays above p^(-1/m), m the bit length of p
            Magnitude::prime_pow(p, rat(-1, (p.ilog2() + 1) as i64))?
        };
        for c in &rep.checks {
            ensure(c.radius > floor && c.radius <= Magnitude::one(), || {
                format!("radius {} left ({floor}, 1]", c.radius)
            })?;
            ensure(c.next_radius < c.radius, || "radii stopped shrinking".into())?;
        }
        if seed.case % 5 == 0 {
            let mut fresh = Ambient::over(field.clone(), Vec::new())?;
            let flat = vec![Magnitude::from_rational(&rat(3, 4))?; n + 1];
            match shrinking_balls(&mut fresh, Some(flat), n) {
                Err(Error::InvalidStream { index, .. }) => {
                    ensure(index == 2, || format!("flat stream flagged at {index}, not 2"))?;
                    ensure(fresh.dim() == 0, || "rejected stream still allocated".into())?;
                }
                other => {
                    return Err(Fail {
                        message: format!("flat stream accepted or misreported: {other:?}"),
                        artifact: serde_json::Value::Null,
                    })
                }
            }
        }
        Ok(())
    })();
    finish(r, || serde_json::json!({ "prime": p, "n": n, "custom": custom }))
}

// --- izo-classify: norm-coset fingerprints separate exactly the right pairs

fn case_izoclassify(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let n = 2 + (seed.case % 5) as usize;
    let hahn_round = seed.case % 3 == 2;
    let r = (|| -> CaseResult {
        let root2 = Magnitude::prime_pow(2, rat(1, 2))?;
        if hahn_round {
            // dense group: the 2^(1/2) weight is no obstruction
            let field = FieldDescriptor::hahn(2)?;
            let std_space = WeightedSpace::standard(field.clone(), n);
            let mut w = vec![Magnitude::one(); n];
            w[rng.random_range(0..n)] = root2.clone();
            let off_space = WeightedSpace::new(field, w)?;
            match isometric_eq(&whole(&off_space)?, &whole(&std_space)?)? {
                IsoEqOutcome::Isometric { witness, certificate } => {
                    ensure(witness.certify_isometry()?.is_certified(), || {
                        "witness does not certify".into()
                    })?;
                    for (x, y) in &certificate.base_norms {
                        ensure(x == y, || "witness norm pair differs".into())?;
                    }
                }
                IsoEqOutcome::Distinct(ob) => {
                    return Err(Fail {
                        message: format!(
                            "dense group separated isometric spaces at coset {:?}",
                            ob.coset
                        ),
                        artifact: serde_json::Value::Null,
                    })
                }
            }
            return Ok(());
        }

        let field = FieldDescriptor::padic(2)?;
        let std_space = WeightedSpace::standard(field.clone(), n);
        let mut w = vec![Magnitude::one(); n];
        w[rng.random_range(0..n)] = root2.clone();
        let off_space = WeightedSpace::new(field.clone(), w)?;
        match isometric_eq(&whole(&off_space)?, &whole(&std_space)?)? {
            IsoEqOutcome::Distinct(ob) => {
                let group = field.value_group();
                ensure(ob.coset == Some(coset_of(&root2, &group)?), || {
                    format!("obstruction coset {:?} is not the 2^(1/2) class", ob.coset)
                })?;
                ensure((ob.mult_left, ob.mult_right) == (1, 0), || {
                    format!("multiplicities ({}, {})", ob.mult_left, ob.mult_right)
                })?;
            }
            IsoEqOutcome::Isometric { .. } => {
                return Err(Fail {
                    message: "2^(1/2) weight went unnoticed over the 2-adics".into(),
                    artifact: serde_json::Value::Null,
                })
            }
        }

        // fingerprints are invariant under certified automorphisms
        let e_space = gen::gen_space(&mut rng, &field, n, true);
        let twist = gen::gen_isometry(&mut rng, &e_space, 4)?;
        let image = Subspace::new(e_space.clone(), twist.base_images().to_vec())?;
        let full = whole(&e_space)?;
        ensure(classify(&full)? == classify(&image)?, || {
            "fingerprint moved under an isometry".into()
        })?;
        match isometric_eq(&full, &image)? {
            IsoEqOutcome::Isometric { witness, .. } => {
                ensure(witness.certify_isometry()?.is_certified(), || {
                    "round-trip witness does not certify".into()
                })?;
            }
            IsoEqOutcome::Distinct(ob) => {
                return Err(Fail {
                    message: format!("isometric pair separated at {:?}", ob.coset),
                    artifact: serde_json::Value::Null,
                })
            }
        }
        Ok(())
    })();
    finish(r, || serde_json::json!({ "n": n, "hahn_round": hahn_round }))
}

// --- oracle: the reduction minimizer against the exhaustive grid
//
// Instance shape is constrained so that the optimal coefficients provably
// land in the oracle's default grid (digits <= 5 coprime to p, |exponent|
// <= 4): span coordinates carry unit part 1 and exponents in [-2, 2], probe
// coordinates carry one depth-5 unit and exponents in [-2, 2], so every
// projection coefficient is a quotient with digits <= 5 and exponent in
// [-4, 4].

fn grid_power(rng: &mut ChaCha12Rng, field: &FieldDescriptor) -> crate::scalar::Scalar {
    let sign = if rng.random_bool(0.5) { 1 } else { -1 };
    let k = rng.random_range(-2..=2);
    let pk = BigRational::from_integer(field.prime().into()).pow(k as i32);
    field.from_rational(rat(sign, 1) * pk)
}

fn grid_probe(rng: &mut ChaCha12Rng, field: &FieldDescriptor) -> crate::scalar::Scalar {
    let p = field.prime() as i64;
    let unit = loop {
        let a = rng.random_range(1..=5i64);
        let b = rng.random_range(1..=5i64);
        if a % p != 0 && b % p != 0 && num::integer::gcd(a, b) == 1 {
            break rat(a, b);
        }
    };
    let sign = if rng.random_bool(0.5) { 1 } else { -1 };
    let k = rng.random_range(-2..=2);
    let pk = BigRational::from_integer(field.prime().into()).pow(k as i32);
    field.from_rational(rat(sign, 1) * unit * pk)
}

fn case_oracle(seed: InstanceSeed) -> CaseResult {
    let mut rng = seed.rng();
    let field = padic_field(&mut rng);
    let p = field.prime();
    let dim = rng.random_range(2..=3);
    let weights: Vec<Magnitude> = (0..dim)
        .map(|_| Magnitude::prime_pow(p, rat(rng.random_range(-1..=1), 1)).expect("prime base"))
        .collect();
    let r = (|| -> CaseResult {
        let space = WeightedSpace::new(field.clone(), weights.clone())?;
        let count = rng.random_range(1..=2);
        let d: Vec<Vector> = if count == 1 {
            let mut coords: Vec<crate::scalar::Scalar> =
                (0..dim).map(|_| grid_power(&mut rng, &field)).collect();
            for c in coords.iter_mut().skip(1) {
                if rng.random_bool(0.4) {
                    *c = field.zero();
                }
            }
            vec![Vector::new(coords)]
        } else {
            let mut coords: Vec<usize> = (0..dim).collect();
            coords.shuffle(&mut rng);
            coords[..2]
                .iter()
                .map(|&c| space.scale(&grid_power(&mut rng, &field), &space.unit(c)))
                .collect::<Result<_>>()?
        };
        let in_span = seed.case % 3 == 0;
        let v = if in_span {
            let mut acc = space.zero_vector();
            for b in &d {
                acc = space.add(&acc, &space.scale(&grid_probe(&mut rng, &field), b)?)?;
            }
            acc
        } else {
            Vector::new(
                (0..dim)
                    .map(|_| {
                        if rng.random_bool(0.2) {
                            field.zero()
                        } else {
                            grid_probe(&mut rng, &field)
                        }
                    })
                    .collect(),
            )
        };
        let sub = Subspace::new(space.clone(), d.clone())?;
        let alg = distance(&v, &sub)?;
        let orc = brute_force_distance(&space, &v, &d, &OracleConfig::default())?;
        ensure(alg.distance == orc.distance, || {
            format!("minimizer found {}, oracle found {}", alg.distance, orc.distance)
        })?;
        ensure(space.norm(&space.sub(&v, &alg.witness)?)? == alg.distance, || {
            "witness does not attain the distance".into()
        })?;
        ensure(sub.contains(&alg.witness)?, || "witness escaped the subspace".into())?;
        if in_span {
            ensure(alg.distance.is_zero(), || "span member at positive distance".into())?;
        }
        Ok(())
    })();
    finish(r, || serde_json::json!({ "weights": weights, "case": seed.case }))
}
