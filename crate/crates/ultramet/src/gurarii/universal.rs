//! Isometric embeddings into an ambient stage and extension of such
//! embeddings from a subspace to its whole space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::magnitude::{coset_of, Magnitude};
use crate::scalar::Scalar;
use crate::space::{
    IsometryCertificate, IsometryOutcome, LinearMap, OrthogonalityAnswer, Subspace, Vector,
    WeightedSpace,
};

use super::patch::{
    check_perturbation, maximal_orthogonal_split, patch_isometry, PatchResult,
    PerturbationVerdict,
};
use super::Ambient;

/// One base vector routed to a fresh ambient coordinate.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingStep {
    /// Position in the reduced base of the embedded space.
    pub source_index: usize,
    pub norm: Magnitude,
    /// Registry representative of the norm's value-group coset.
    pub representative: Magnitude,
    /// Allocated ambient coordinate.
    pub index: usize,
    /// Scalar with |scale| * representative = norm.
    pub scale: Scalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingResult {
    pub map: LinearMap,
    pub steps: Vec<EmbeddingStep>,
    pub certificate: IsometryCertificate,
}

/// Embeds a finite-dimensional space isometrically into the ambient stage.
///
/// Every reduced-base vector is sent to a fresh coordinate whose weight is
/// the registry representative of its norm coset, scaled so the norm is
/// reproduced exactly. Fresh coordinates make the image base 1-orthogonal,
/// so the certificate is a matter of checking, not estimating.
pub fn embed_into_universal(e: &Subspace, a: &mut Ambient) -> Result<EmbeddingResult> {
    if e.space().field() != a.field() {
        return Err(Error::FieldMismatch {
            expected: a.field().to_string(),
            got: e.space().field().to_string(),
        });
    }
    let field = a.field().clone();
    let group = field.value_group();
    let base = e.reduced()?.base.clone();
    if base.len() > a.remaining_capacity() {
        return Err(Error::AllocatorExhausted);
    }
    let mut steps = Vec::with_capacity(base.len());
    for (k, b) in base.iter().enumerate() {
        let n = e.space().norm(b)?;
        let coset = coset_of(&n, &group)?;
        let (index, representative) = a.alloc_for_coset(&coset)?;
        let scale = field.scalar_with_abs(&n.div(&representative)?)?;
        steps.push(EmbeddingStep { source_index: k, norm: n, representative, index, scale });
    }
    let stage = a.stage();
    let images: Vec<Vector> = steps
        .iter()
        .map(|s| stage.scale(&s.scale, &stage.unit(s.index)))
        .collect::<Result<_>>()?;
    let map = LinearMap::new(e.space().clone(), base, images, stage)?;
    let certificate = match map.certify_isometry()? {
        IsometryOutcome::Certified(c) => c,
        IsometryOutcome::Refuted(r) => {
            return Err(Error::Unsupported {
                context: format!("embedding failed its own certificate at {}", r.witness),
            })
        }
    };
    Ok(EmbeddingResult { map, steps, certificate })
}

#[derive(Clone, Debug, Serialize)]
pub enum DispositionMode {
    /// Extend over an exact orthogonal complement of X in Y.
    Direct,
    /// Truncate a base of X to the first `substage_dim` coordinates, extend
    /// the truncated copy exactly, then patch the drift away. Requires
    /// ||x - x'|| < (t/2) ||x|| per base vector.
    ApproxThenPatch { substage_dim: usize, t: Magnitude },
}

#[derive(Clone, Debug, Serialize)]
pub struct DispositionResult {
    /// T: Y -> stage, an exact isometry with T = j on X.
    pub map: LinearMap,
    pub isometry: IsometryCertificate,
    /// Complement-orthogonal-to-X certificate from the splitting step.
    pub split: OrthogonalityAnswer,
    /// Fresh ambient coordinates, one per complement direction.
    pub allocated: Vec<usize>,
    /// T(b) = j(b) checked coordinate-exactly on the reduced base of X.
    pub extends_verified: bool,
    pub perturbation: Option<PerturbationVerdict>,
    pub patch: Option<PatchResult>,
}

fn validate_embedding(x: &Subspace, j: &LinearMap, stage: &WeightedSpace) -> Result<()> {
    if j.domain_space() != x.space() {
        return Err(Error::FieldMismatch {
            expected: "map domain equal to the subspace's ambient space".into(),
            got: "a different space".into(),
        });
    }
    if j.codomain_space() != stage {
        return Err(Error::FieldMismatch {
            expected: "map codomain equal to the current stage".into(),
            got: "a different space".into(),
        });
    }
    if !j.certify_isometry()?.is_certified() {
        return Err(Error::Unsupported { context: "j is not an isometry".into() });
    }
    for v in x.span() {
        j.coefficients(v)?;
    }
    for b in j.domain_base() {
        if !x.contains(b)? {
            return Err(Error::NotInDomain);
        }
    }
    Ok(())
}

fn whole_space(y: &WeightedSpace) -> Result<Subspace> {
    Subspace::new(y.clone(), (0..y.dim()).map(|i| y.unit(i)).collect())
}

/// Extends an isometric embedding j: X -> stage to all of Y = X's ambient
/// space, growing the stage by one norm-matched coordinate per complement
/// direction.
///
/// Direct mode pairs an exact orthogonal complement of X with fresh
/// coordinates. Approx mode first extends j along a truncated copy of X's
/// base (exact there by ultrametric absorption of the sub-(t/2) drift) and
/// then patches the two embeddings into one.
pub fn disposition_extend(
    a: &mut Ambient,
    x: &Subspace,
    j: &LinearMap,
    mode: &DispositionMode,
) -> Result<DispositionResult> {
    let stage = a.stage();
    validate_embedding(x, j, &stage)?;
    let y = x.space().clone();
    let field = a.field().clone();
    let group = field.value_group();
    let split = maximal_orthogonal_split(&whole_space(&y)?, x)?;

    match mode {
        DispositionMode::Direct => {
            let tail = &split.u[split.prefix..];
            if tail.len() > a.remaining_capacity() {
                return Err(Error::AllocatorExhausted);
            }
            let mut allocated = Vec::with_capacity(tail.len());
            let mut scales = Vec::with_capacity(tail.len());
            for u in tail {
                let n = y.norm(u)?;
                let coset = coset_of(&n, &group)?;
                let (idx, rep) = a.alloc_for_coset(&coset)?;
                scales.push(field.scalar_with_abs(&n.div(&rep)?)?);
                allocated.push(idx);
            }
            let final_stage = a.stage();
            let mut images: Vec<Vector> = Vec::with_capacity(split.u.len());
            for u in &split.u[..split.prefix] {
                images.push(a.lift(&j.evaluate(u)?)?);
            }
            for (idx, s) in allocated.iter().zip(&scales) {
                images.push(final_stage.scale(s, &final_stage.unit(*idx))?);
            }
            let map = LinearMap::new(y.clone(), split.u.clone(), images, final_stage)?;
            finish(a, x, j, map, split.certificate, allocated, None, None)
        }
        DispositionMode::ApproxThenPatch { substage_dim, t } => {
            if *substage_dim > y.dim() {
                return Err(Error::DimensionMismatch { expected: y.dim(), got: *substage_dim });
            }
            let zs = x.reduced()?.base.clone();
            let two = Magnitude::prime_pow(2, num::BigRational::from_integer(1.into()))?;
            let half_t = t.div(&two)?;
            let mut z_primes = Vec::with_capacity(zs.len());
            for (i, z) in zs.iter().enumerate() {
                let mut c = z.coords.clone();
                for slot in c.iter_mut().skip(*substage_dim) {
                    *slot = field.zero();
                }
                let zp = Vector::new(c);
                let gap = y.norm(&y.sub(z, &zp)?)?;
                let bound = half_t.mul(&y.norm(z)?);
                if gap >= bound {
                    return Err(Error::HypothesisFailed {
                        index: i + 1,
                        detail: format!("||x - x'|| = {gap} is not below (t/2) ||x|| = {bound}"),
                    });
                }
                z_primes.push(zp);
            }
            let verdict = check_perturbation(&y, &zs, &z_primes, t)?;
            if !verdict.is_certified() {
                return Err(Error::Unsupported {
                    context: "perturbation check failed under the (t/2) hypothesis".into(),
                });
            }

            // the truncated copy, extended exactly over its complement
            let x_trunc = Subspace::new(y.clone(), z_primes.clone())?;
            let trunc_split = maximal_orthogonal_split(&whole_space(&y)?, &x_trunc)?;
            let tail: Vec<Vector> = trunc_split.u[trunc_split.prefix..].to_vec();
            if tail.len() > a.remaining_capacity() {
                return Err(Error::AllocatorExhausted);
            }
            let mut allocated = Vec::with_capacity(tail.len());
            let mut scales = Vec::with_capacity(tail.len());
            for u in &tail {
                let n = y.norm(u)?;
                let coset = coset_of(&n, &group)?;
                let (idx, rep) = a.alloc_for_coset(&coset)?;
                scales.push(field.scalar_with_abs(&n.div(&rep)?)?);
                allocated.push(idx);
            }
            let final_stage = a.stage();
            let mut f_span = z_primes.clone();
            f_span.extend(tail.iter().cloned());
            let mut f_images: Vec<Vector> = Vec::with_capacity(f_span.len());
            for z in &zs {
                f_images.push(a.lift(&j.evaluate(z)?)?);
            }
            for (idx, s) in allocated.iter().zip(&scales) {
                f_images.push(final_stage.scale(s, &final_stage.unit(*idx))?);
            }
            let f = LinearMap::new(y.clone(), f_span, f_images, final_stage.clone())?;

            // j with the codomain lifted to the final stage, then patched
            // against f; the drift is below t/2 < 1 by the hypothesis.
            let j_images: Vec<Vector> =
                zs.iter().map(|z| a.lift(&j.evaluate(z)?)).collect::<Result<_>>()?;
            let j_hat = LinearMap::new(y.clone(), zs, j_images, final_stage)?;
            let patched = patch_isometry(&j_hat, &f)?;
            let map = patched.map.clone();
            finish(a, x, j, map, split.certificate, allocated, Some(verdict), Some(patched))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    a: &Ambient,
    x: &Subspace,
    j: &LinearMap,
    map: LinearMap,
    split: OrthogonalityAnswer,
    allocated: Vec<usize>,
    perturbation: Option<PerturbationVerdict>,
    patch: Option<PatchResult>,
) -> Result<DispositionResult> {
    let isometry = match map.certify_isometry()? {
        IsometryOutcome::Certified(c) => c,
        IsometryOutcome::Refuted(r) => {
            return Err(Error::Unsupported {
                context: format!("extension failed its own certificate at {}", r.witness),
            })
        }
    };
    let mut extends_verified = true;
    for b in &x.reduced()?.base {
        if map.evaluate(b)? != a.lift(&j.evaluate(b)?)? {
            extends_verified = false;
        }
    }
    if !extends_verified {
        return Err(Error::Unsupported { context: "extension disagrees with j on X".into() });
    }
    Ok(DispositionResult { map, isometry, split, allocated, extends_verified, perturbation, patch })
}
