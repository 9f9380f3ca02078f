//! Shrinking-ball chains over a stage with weights descending toward 1/2.

use num::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::magnitude::Magnitude;
use crate::space::Vector;

use super::Ambient;

/// Ball n of the chain: center x_n = e_1 + ... + e_n over the freshly
/// allocated coordinates, radius m_{n+1}.
#[derive(Clone, Debug, Serialize)]
pub struct BallStep {
    /// 1-based position in the chain.
    pub index: usize,
    /// Allocated stage coordinate.
    pub coordinate: usize,
    pub weight: Magnitude,
    pub center: Vector,
    pub radius: Magnitude,
}

#[derive(Clone, Debug, Serialize)]
pub struct NestingCheck {
    /// Checks ball n+1 against ball n.
    pub n: usize,
    pub center_distance: Magnitude,
    pub radius: Magnitude,
    pub next_radius: Magnitude,
    /// ||x_{n+1} - x_n|| <= radius_n.
    pub contained: bool,
    /// radius_{n+1} < radius_n, strictly.
    pub shrinks: bool,
    /// Ultrametric ball nesting: center distance and next radius both
    /// within radius_n.
    pub nested: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BallsReport {
    pub steps: Vec<BallStep>,
    pub checks: Vec<NestingCheck>,
    pub all_nested: bool,
    /// What this construction does not claim.
    pub note: String,
}

fn default_stream(prime: u64, count: usize) -> Result<Vec<Magnitude>> {
    // m_k = p^(-k/(m(k+1))) with m the bit length of p, so p < 2^m and the
    // stream decreases strictly from p^(-1/(2m)) toward p^(-1/m) > 1/2; for
    // p = 2 this is the k/(2(k+1)) schedule with radii inside (2^(-1/2), 1]
    let m = (prime.ilog2() + 1) as i64;
    (1..=count)
        .map(|k| {
            let k = k as i64;
            Magnitude::prime_pow(prime, BigRational::new((-k).into(), (m * (k + 1)).into()))
        })
        .collect()
}

/// Builds N balls B_n = B(x_n, m_{n+1}) with ||e_k|| = m_k and centers
/// x_n = e_1 + ... + e_n, then verifies the chain is strictly shrinking and
/// nested, all by exact magnitude comparison.
///
/// The stream must satisfy 1 >= m_1 > m_2 > ... > 1/2 and supply N+1 values
/// (the last is the final radius). When omitted it defaults to
/// p^(-k/(2(k+1))). Whether the full intersection of the chain is empty is
/// a statement about the completed space and is outside what a finite stage
/// can witness; the report says so rather than pretending otherwise.
pub fn shrinking_balls(
    a: &mut Ambient,
    stream: Option<Vec<Magnitude>>,
    n: usize,
) -> Result<BallsReport> {
    if n < 2 {
        return Err(Error::Unsupported { context: format!("need at least 2 balls, got {n}") });
    }
    let stream = match stream {
        Some(s) => s,
        None => default_stream(a.field().value_group().prime, n + 1)?,
    };
    if stream.len() < n + 1 {
        return Err(Error::InvalidStream {
            index: stream.len(),
            detail: format!("need {} magnitudes for {n} balls", n + 1),
        });
    }
    let one = Magnitude::one();
    let half = Magnitude::prime_pow(2, BigRational::new((-1).into(), 1.into()))?;
    for (i, m) in stream.iter().enumerate() {
        if *m > one {
            return Err(Error::InvalidStream { index: i + 1, detail: format!("{m} exceeds 1") });
        }
        if *m <= half {
            return Err(Error::InvalidStream {
                index: i + 1,
                detail: format!("{m} is not above 1/2"),
            });
        }
        if i > 0 && *m >= stream[i - 1] {
            return Err(Error::InvalidStream {
                index: i + 1,
                detail: format!("{m} does not strictly decrease below {}", stream[i - 1]),
            });
        }
    }
    if n > a.remaining_capacity() {
        return Err(Error::AllocatorExhausted);
    }

    let mut coords = Vec::with_capacity(n);
    for m in &stream[..n] {
        coords.push(a.alloc_with_weight(m.clone())?);
    }
    let stage = a.stage();
    let field = stage.field().clone();
    let mut steps: Vec<BallStep> = Vec::with_capacity(n);
    let mut center = stage.zero_vector();
    for (k, &c) in coords.iter().enumerate() {
        center.coords[c] = field.one();
        steps.push(BallStep {
            index: k + 1,
            coordinate: c,
            weight: stream[k].clone(),
            center: center.clone(),
            radius: stream[k + 1].clone(),
        });
    }

    let mut checks = Vec::with_capacity(n - 1);
    for w in steps.windows(2) {
        let (b, b_next) = (&w[0], &w[1]);
        let center_distance = stage.norm(&stage.sub(&b_next.center, &b.center)?)?;
        let contained = center_distance <= b.radius;
        let shrinks = b_next.radius < b.radius;
        let nested = contained && b_next.radius <= b.radius;
        checks.push(NestingCheck {
            n: b.index,
            center_distance,
            radius: b.radius.clone(),
            next_radius: b_next.radius.clone(),
            contained,
            shrinks,
            nested,
        });
    }
    let all_nested = checks.iter().all(|c| c.contained && c.shrinks && c.nested);
    Ok(BallsReport {
        steps,
        checks,
        all_nested,
        note: "finite stages witness the nesting only; emptiness of the full \
               intersection concerns the completed space and is not decided here"
            .to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FieldDescriptor;

    fn mag(s: &str) -> Magnitude {
        s.parse().unwrap()
    }

    #[test]
    fn two_ball_default_chain() {
        let f = FieldDescriptor::padic(2).unwrap();
        let mut a = Ambient::universal(f.clone(), None).unwrap();
        let r = shrinking_balls(&mut a, None, 2).unwrap();
        assert_eq!(r.steps.len(), 2);
        assert_eq!(r.steps[0].weight, mag("2^-1/4"));
        assert_eq!(r.steps[1].weight, mag("2^-1/3"));
        assert_eq!(r.steps[0].radius, mag("2^-1/3"));
        assert_eq!(r.steps[1].radius, mag("2^-3/8"));
        assert_eq!(r.checks.len(), 1);
        let c = &r.checks[0];
        // ||x_2 - x_1|| = ||e_2|| = m_2, exactly the first radius
        assert_eq!(c.center_distance, mag("2^-1/3"));
        assert!(c.contained && c.shrinks && c.nested);
        assert!(r.all_nested);
        assert_eq!(
            r.steps[1].center,
            Vector::new(vec![f.one(), f.one()])
        );
    }

    #[test]
    fn long_default_chain_stays_above_the_half_line() {
        let f = FieldDescriptor::hahn(3).unwrap();
        let mut a = Ambient::universal(f, None).unwrap();
        let r = shrinking_balls(&mut a, None, 50).unwrap();
        assert_eq!(r.checks.len(), 49);
        assert!(r.all_nested);
        let half = mag("2^-1");
        for s in &r.steps {
            assert!(s.radius > half && s.radius <= Magnitude::one());
            assert!(s.weight > half);
        }
        assert_eq!(a.dim(), 50);
    }

    #[test]
    fn default_chain_respects_the_half_line_for_larger_primes() {
        // p^(-k/(2(k+1))) would cross 1/2 at k = 7 for p = 5; the bit-length
        // denominator keeps the whole stream valid
        let f = FieldDescriptor::padic(5).unwrap();
        let mut a = Ambient::universal(f, None).unwrap();
        let r = shrinking_balls(&mut a, None, 50).unwrap();
        assert!(r.all_nested);
        let half = mag("2^-1");
        assert_eq!(r.steps[0].weight, mag("5^-1/6"));
        for s in &r.steps {
            assert!(s.weight > half && s.radius > half);
        }
    }

    #[test]
    fn stream_shape_is_validated_before_any_allocation() {
        let f = FieldDescriptor::padic(2).unwrap();
        let mut a = Ambient::universal(f, None).unwrap();
        let c = mag("2^-2*3^1");
        // constant stream: fails the strict decrease at position 2
        match shrinking_balls(&mut a, Some(vec![c.clone(), c.clone(), c.clone()]), 2) {
            Err(Error::InvalidStream { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected InvalidStream, got {other:?}"),
        }
        // too short for the requested count
        assert!(matches!(
            shrinking_balls(&mut a, Some(vec![c.clone(), mag("2^-1*3^1*5^-1")]), 2),
            Err(Error::InvalidStream { index: 2, .. })
        ));
        // leaves (1/2, 1]
        assert!(matches!(
            shrinking_balls(&mut a, Some(vec![mag("2^1"), c.clone(), c.clone()]), 2),
            Err(Error::InvalidStream { index: 1, .. })
        ));
        assert!(matches!(
            shrinking_balls(&mut a, Some(vec![c, mag("2^-1"), mag("2^-2")]), 2),
            Err(Error::InvalidStream { index: 2, .. })
        ));
        assert_eq!(a.dim(), 0);
        assert!(matches!(
            shrinking_balls(&mut a, None, 1),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn supplied_streams_drive_the_weights() {
        let f = FieldDescriptor::padic(2).unwrap();
        let mut a = Ambient::universal(f, None).unwrap();
        let stream = vec![Magnitude::one(), mag("2^-2*3^1"), mag("3^1*5^-1")];
        let r = shrinking_balls(&mut a, Some(stream), 2).unwrap();
        assert_eq!(r.steps[0].weight, Magnitude::one());
        assert_eq!(r.steps[0].radius, mag("2^-2*3^1"));
        assert!(r.all_nested);
    }
}
