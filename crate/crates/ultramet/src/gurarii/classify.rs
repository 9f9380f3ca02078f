//! Classification of representable spaces by dimension and norm cosets.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::magnitude::{coset_of, Coset};
use crate::space::{IsometryCertificate, IsometryOutcome, LinearMap, Subspace};

/// Isometry invariant: the dimension together with the multiset of
/// value-group cosets of reduced-base norms, sorted.
///
/// Scaling a base vector moves its norm within its coset and permutations
/// reorder the multiset, so the fingerprint is unchanged by both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub dim: usize,
    pub cosets: Vec<Coset>,
}

pub fn classify(e: &Subspace) -> Result<Fingerprint> {
    let group = e.space().field().value_group();
    let mut cosets = Vec::new();
    for b in &e.reduced()?.base {
        cosets.push(coset_of(&e.space().norm(b)?, &group)?);
    }
    cosets.sort();
    Ok(Fingerprint { dim: cosets.len(), cosets })
}

/// Why two fingerprints differ: a coset attained in one space's norm set
/// with a different multiplicity than in the other's (`coset: None` when
/// already the dimensions disagree, with the dimensions in the counts).
#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub left: Fingerprint,
    pub right: Fingerprint,
    pub coset: Option<Coset>,
    pub mult_left: usize,
    pub mult_right: usize,
}

#[derive(Clone, Debug, Serialize)]
pub enum IsoEqOutcome {
    Isometric { witness: LinearMap, certificate: IsometryCertificate },
    Distinct(ObstructionReport),
}

impl IsoEqOutcome {
    pub fn is_isometric(&self) -> bool {
        matches!(self, IsoEqOutcome::Isometric { .. })
    }
}

fn multiplicities(fp: &Fingerprint) -> BTreeMap<&Coset, usize> {
    let mut m = BTreeMap::new();
    for c in &fp.cosets {
        *m.entry(c).or_insert(0) += 1;
    }
    m
}

/// Decides isometric equivalence of two representable spaces.
///
/// Equal fingerprints: pair the reduced bases sorted by (coset, position)
/// and scale each pair by a scalar whose absolute value is the norm ratio;
/// the ratio lies in the value group exactly because the cosets agree. The
/// witness is then certified, not assumed. Unequal fingerprints: report a
/// coset witnessing the difference, preferring one attained in only one of
/// the two spaces.
pub fn isometric_eq(e: &Subspace, f: &Subspace) -> Result<IsoEqOutcome> {
    if e.space().field() != f.space().field() {
        return Err(Error::FieldMismatch {
            expected: e.space().field().to_string(),
            got: f.space().field().to_string(),
        });
    }
    let fp_e = classify(e)?;
    let fp_f = classify(f)?;
    if fp_e != fp_f {
        if fp_e.dim != fp_f.dim {
            return Ok(IsoEqOutcome::Distinct(ObstructionReport {
                mult_left: fp_e.dim,
                mult_right: fp_f.dim,
                left: fp_e,
                right: fp_f,
                coset: None,
            }));
        }
        let chosen = {
            let me = multiplicities(&fp_e);
            let mf = multiplicities(&fp_f);
            let mut one_sided = None;
            let mut any = None;
            for c in me.keys().chain(mf.keys()) {
                let l = me.get(c).copied().unwrap_or(0);
                let r = mf.get(c).copied().unwrap_or(0);
                if l == r {
                    continue;
                }
                if (l == 0 || r == 0) && one_sided.is_none() {
                    // attained in exactly one space: the sharpest obstruction
                    one_sided = Some(((*c).clone(), l, r));
                }
                if any.is_none() {
                    any = Some(((*c).clone(), l, r));
                }
            }
            one_sided.or(any).expect("unequal fingerprints differ somewhere")
        };
        let (c, l, r) = chosen;
        return Ok(IsoEqOutcome::Distinct(ObstructionReport {
            coset: Some(c),
            mult_left: l,
            mult_right: r,
            left: fp_e,
            right: fp_f,
        }));
    }

    let field = e.space().field().clone();
    let group = field.value_group();
    let sort_by_coset = |s: &Subspace| -> Result<Vec<crate::space::Vector>> {
        let mut keyed = Vec::new();
        for (k, b) in s.reduced()?.base.iter().enumerate() {
            keyed.push((coset_of(&s.space().norm(b)?, &group)?, k, b.clone()));
        }
        keyed.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
        Ok(keyed.into_iter().map(|(_, _, b)| b).collect())
    };
    let base_e = sort_by_coset(e)?;
    let base_f = sort_by_coset(f)?;
    let mut images = Vec::with_capacity(base_e.len());
    for (be, bf) in base_e.iter().zip(&base_f) {
        let ratio = e.space().norm(be)?.div(&f.space().norm(bf)?)?;
        let lambda = field.scalar_with_abs(&ratio)?;
        images.push(f.space().scale(&lambda, bf)?);
    }
    let witness = LinearMap::new(e.space().clone(), base_e, images, f.space().clone())?;
    match witness.certify_isometry()? {
        IsometryOutcome::Certified(certificate) => {
            Ok(IsoEqOutcome::Isometric { witness, certificate })
        }
        IsometryOutcome::Refuted(r) => Err(Error::Unsupported {
            context: format!("matched fingerprints but the witness failed at {}", r.witness),
        }),
    }
}
