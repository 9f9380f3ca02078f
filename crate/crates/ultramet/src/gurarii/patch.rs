//! Splitting a space over a subspace, perturbation stability of orthogonal
//! lists, patching two isometries that are close on a common subspace, and
//! the degenerate immediate-extension case.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::magnitude::Magnitude;
use crate::space::{
    subspaces_orthogonal, t_defect, IsometryCertificate, IsometryOutcome, LinearMap,
    OrthoCertificate, OrthogonalityAnswer, Subspace, Vector, WeightedSpace,
};

#[derive(Clone, Debug, Serialize)]
pub struct SplitResult {
    /// Maximal orthogonal list of Y whose first `prefix` entries are a
    /// maximal orthogonal list of X.
    pub u: Vec<Vector>,
    pub prefix: usize,
    /// Span of the tail; exactly orthogonal to X.
    pub complement: Subspace,
    pub certificate: OrthogonalityAnswer,
}

/// Orthogonal base of Y extending an orthogonal base of X, with a
/// certificate that the complementary part is orthogonal to X.
pub fn maximal_orthogonal_split(y: &Subspace, x: &Subspace) -> Result<SplitResult> {
    if y.space() != x.space() {
        return Err(Error::FieldMismatch {
            expected: "matching ambient space".into(),
            got: "a different ambient space".into(),
        });
    }
    let space = y.space();
    for v in x.span() {
        if !y.contains(v)? {
            return Err(Error::NotInDomain);
        }
    }
    let xr = x.reduced()?;
    let mut u = xr.base.clone();
    let mut pivots = xr.pivots.clone();
    let prefix = u.len();
    for v in &y.reduced()?.base {
        let mut r = v.clone();
        for (b, &p) in u.iter().zip(&pivots) {
            if !r.coords[p].is_zero() {
                let lam = space.field().div(&r.coords[p], &b.coords[p])?;
                r = space.sub(&r, &space.scale(&lam, b)?)?;
            }
        }
        if let Some(p) = space.pivot_of(&r)? {
            u.push(r);
            pivots.push(p);
        }
    }
    let complement = Subspace::new(space.clone(), u[prefix..].to_vec())?;
    let certificate = subspaces_orthogonal(&complement, x)?;
    debug_assert!(certificate.orthogonal);
    Ok(SplitResult { u, prefix, complement, certificate })
}

#[derive(Clone, Debug, Serialize)]
pub struct PatchResult {
    /// T agrees with j on X and with f on the complement; an exact isometry.
    pub map: LinearMap,
    /// Operator norm of (j - f) restricted to X.
    pub t: Magnitude,
    pub certificate: IsometryCertificate,
    /// Norm checks ||(j-f)(u_k)|| < ||u_k|| per prefix base vector.
    pub prefix_checks: Vec<(Magnitude, Magnitude)>,
}

/// Patches two isometries j: X -> G and f: Y -> G (X inside Y) that differ
/// by an operator of norm t < 1 on X into a single isometry T: Y -> G with
/// T = j on X.
///
/// T is j on an orthogonal base of X and f on the orthogonal complement
/// inside Y. For x = x0 + x1 split that way, Tx = f(x) + (j-f)(x0) and
/// ||(j-f)(x0)|| <= t ||x0|| <= t ||x|| < ||x|| = ||f(x)||, so the
/// perturbation is absorbed and ||Tx|| = ||x||. The certificate re-checks
/// that conclusion exactly rather than trusting the argument.
pub fn patch_isometry(j: &LinearMap, f: &LinearMap) -> Result<PatchResult> {
    for (m, name) in [(j, "j"), (f, "f")] {
        if !m.certify_isometry()?.is_certified() {
            return Err(Error::Unsupported { context: format!("{name} is not an isometry") });
        }
    }
    if j.codomain_space() != f.codomain_space() {
        return Err(Error::FieldMismatch {
            expected: j.codomain_space().field().to_string(),
            got: f.codomain_space().field().to_string(),
        });
    }
    let space = j.domain_space().clone();
    let x = j.domain_subspace()?;
    let y = f.domain_subspace()?;
    // X inside Y, and f must evaluate on all of X
    let diff = crate::space::difference_on_domain(j, f)?;
    let t = diff.operator_norm()?;
    if t >= Magnitude::one() {
        let witness = diff
            .domain_base()
            .iter()
            .zip(diff.base_images())
            .find(|(b, im)| {
                let nb = space.norm(b).expect("validated vector");
                let ni = diff.codomain_space().norm(im).expect("validated vector");
                ni >= nb
            })
            .map(|(b, _)| b.to_string())
            .unwrap_or_default();
        return Err(Error::OperatorNormNotBelowOne { norm: t.to_string(), witness });
    }
    if t.is_zero() {
        // j = f on X: f itself already patches
        let certificate = match f.certify_isometry()? {
            IsometryOutcome::Certified(c) => c,
            IsometryOutcome::Refuted(_) => unreachable!("certified above"),
        };
        return Ok(PatchResult { map: f.clone(), t, certificate, prefix_checks: Vec::new() });
    }
    let split = maximal_orthogonal_split(&y, &x)?;
    let mut images = Vec::with_capacity(split.u.len());
    let mut prefix_checks = Vec::with_capacity(split.prefix);
    for (k, u) in split.u.iter().enumerate() {
        if k < split.prefix {
            images.push(j.evaluate(u)?);
            let drift = diff.codomain_space().norm(&diff.evaluate(u)?)?;
            let nu = space.norm(u)?;
            debug_assert!(drift < nu);
            prefix_checks.push((drift, nu));
        } else {
            images.push(f.evaluate(u)?);
        }
    }
    let map = LinearMap::new(space.clone(), split.u.clone(), images, f.codomain_space().clone())?;
    let certificate = match map.certify_isometry()? {
        IsometryOutcome::Certified(c) => c,
        IsometryOutcome::Refuted(r) => {
            return Err(Error::Unsupported {
                context: format!(
                    "patched map fails isometry at {} ({} vs {})",
                    r.witness, r.norm_in, r.norm_out
                ),
            })
        }
    };
    // T = j on X exactly, checked on X's base
    for b in x.reduced()?.base.iter() {
        debug_assert_eq!(map.evaluate(b)?, j.evaluate(b)?);
    }
    Ok(PatchResult { map, t, certificate, prefix_checks })
}

#[derive(Clone, Debug, Serialize)]
pub enum PerturbationVerdict {
    /// Hypotheses hold; norms carry over pairwise and the perturbed list
    /// keeps the orthogonality level.
    Certified { norms: Vec<(Magnitude, Magnitude)>, defect: OrthoCertificate },
    /// The reference list is not t-orthogonal to begin with.
    ReferenceNotOrthogonal { level: Magnitude, needed: Magnitude },
    /// ||x_i - z_i|| < t ||x_i|| fails; `index` is 1-based.
    HypothesisFailed { index: usize, gap: Magnitude, bound: Magnitude },
}

impl PerturbationVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, PerturbationVerdict::Certified { .. })
    }
}

/// Stability of t-orthogonality under perturbation strictly below t: if
/// {x_i} is t-orthogonal and ||x_i - z_i|| < t ||x_i|| for all i, then
/// ||z_i|| = ||x_i|| (ultrametric absorption) and {z_i} is t-orthogonal:
/// sum lambda_i z_i differs from sum lambda_i x_i by strictly less than
/// t max ||lambda_i x_i||, which the x-side norm already dominates.
/// Both conclusions are recomputed exactly, not just derived.
pub fn check_perturbation(
    space: &WeightedSpace,
    xs: &[Vector],
    zs: &[Vector],
    t: &Magnitude,
) -> Result<PerturbationVerdict> {
    if xs.len() != zs.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: zs.len() });
    }
    if t.is_zero() || *t > Magnitude::one() {
        return Err(Error::Unsupported { context: format!("level {t} outside (0, 1]") });
    }
    let reference = t_defect(space, xs)?;
    if reference.level < *t {
        return Ok(PerturbationVerdict::ReferenceNotOrthogonal {
            level: reference.level,
            needed: t.clone(),
        });
    }
    for (i, (x, z)) in xs.iter().zip(zs).enumerate() {
        let gap = space.norm(&space.sub(x, z)?)?;
        let bound = t.mul(&space.norm(x)?);
        if gap >= bound {
            return Ok(PerturbationVerdict::HypothesisFailed { index: i + 1, gap, bound });
        }
    }
    let mut norms = Vec::with_capacity(xs.len());
    for (x, z) in xs.iter().zip(zs) {
        let nx = space.norm(x)?;
        let nz = space.norm(z)?;
        debug_assert_eq!(nx, nz);
        norms.push((nx, nz));
    }
    let defect = t_defect(space, zs)?;
    debug_assert!(defect.level >= *t);
    Ok(PerturbationVerdict::Certified { norms, defect })
}

/// Isometry extension along an immediate inclusion D inside E. In this
/// model every space has an orthogonal base, so an immediate extension
/// (trivial orthocomplement) forces D = E and the extension is T itself;
/// a nonzero complement vector is the witness that the inclusion is not
/// immediate, which is the generic outcome.
pub fn extend_isometry_immediate(d: &Subspace, t: &LinearMap) -> Result<LinearMap> {
    let comp = crate::space::orthocomplement(d)?;
    if let Some(w) = comp.span().first() {
        return Err(Error::NotImmediate { witness: w.to_string() });
    }
    if d.dim()? != d.space().dim() {
        // unreachable for representable inputs: an empty complement means
        // every coordinate is a pivot
        return Err(Error::Unsupported {
            context: "immediate proper extension is not representable".into(),
        });
    }
    Ok(t.clone())
}
