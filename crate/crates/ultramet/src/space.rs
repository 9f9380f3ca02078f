//! Weighted max-norm coordinate spaces and their exact linear algebra.
//!
//! A space is K^n with norm max_i w_i |v_i| for positive magnitude weights
//! w_i. Orthogonalization is ultrametric pivot elimination into forward
//! echelon form: each new vector is reduced to vanish at the pivots of the
//! vectors before it, and its own pivot is a coordinate where its norm is
//! attained. Such a list is exactly orthogonal: in any combination, look at
//! the earliest vector achieving the maximal term norm; at its pivot the
//! earlier contributions are strictly smaller and the later ones vanish, so
//! the strong triangle inequality turns into an equality.
//!
//! Distances to subspaces, orthogonality-defect certificates, complements,
//! base extension and isometry certificates are all built from that one
//! reduction, and every inequality they assert is decided exactly.

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::magnitude::Magnitude;
use crate::scalar::{FieldDescriptor, Scalar};

/// K^n with the weighted sup norm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightedSpace {
    field: FieldDescriptor,
    weights: Vec<Magnitude>,
}

impl WeightedSpace {
    pub fn new(field: FieldDescriptor, weights: Vec<Magnitude>) -> Result<Self> {
        if weights.iter().any(|w| w.is_zero()) {
            return Err(Error::ZeroMagnitude { context: "space weight" });
        }
        Ok(WeightedSpace { field, weights })
    }

    /// All weights 1.
    pub fn standard(field: FieldDescriptor, dim: usize) -> Self {
        WeightedSpace { field, weights: vec![Magnitude::one(); dim] }
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn weights(&self) -> &[Magnitude] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn zero_vector(&self) -> Vector {
        Vector { coords: vec![self.field.zero(); self.dim()] }
    }

    pub fn unit(&self, i: usize) -> Vector {
        let mut v = self.zero_vector();
        v.coords[i] = self.field.one();
        v
    }

    pub fn check_vector(&self, v: &Vector) -> Result<()> {
        if v.coords.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.coords.len() });
        }
        for c in &v.coords {
            self.field.check(c)?;
        }
        Ok(())
    }

    pub fn norm(&self, v: &Vector) -> Result<Magnitude> {
        self.check_vector(v)?;
        let mut best = Magnitude::Zero;
        for (w, c) in self.weights.iter().zip(&v.coords) {
            let m = w.mul(&self.field.abs(c));
            if m > best {
                best = m;
            }
        }
        Ok(best)
    }

    /// Coordinate index where the norm is attained, lowest on ties; None for zero.
    pub fn pivot_of(&self, v: &Vector) -> Result<Option<usize>> {
        self.check_vector(v)?;
        let mut best = Magnitude::Zero;
        let mut at = None;
        for (i, (w, c)) in self.weights.iter().zip(&v.coords).enumerate() {
            let m = w.mul(&self.field.abs(c));
            if m > best {
                best = m;
                at = Some(i);
            }
        }
        Ok(at)
    }

    pub fn add(&self, a: &Vector, b: &Vector) -> Result<Vector> {
        self.check_vector(a)?;
        self.check_vector(b)?;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| self.field.add(x, y))
            .collect::<Result<_>>()?;
        Ok(Vector { coords })
    }

    pub fn sub(&self, a: &Vector, b: &Vector) -> Result<Vector> {
        self.add(a, &self.neg(b)?)
    }

    pub fn neg(&self, a: &Vector) -> Result<Vector> {
        self.check_vector(a)?;
        let coords = a.coords.iter().map(|x| self.field.neg(x)).collect::<Result<_>>()?;
        Ok(Vector { coords })
    }

    pub fn scale(&self, lambda: &Scalar, a: &Vector) -> Result<Vector> {
        self.check_vector(a)?;
        let coords = a.coords.iter().map(|x| self.field.mul(lambda, x)).collect::<Result<_>>()?;
        Ok(Vector { coords })
    }

    /// v - lambda * b with a zero-coefficient fast path.
    fn scaled_sub(&self, v: &Vector, lambda: &Scalar, b: &Vector) -> Result<Vector> {
        if lambda.is_zero() {
            return Ok(v.clone());
        }
        self.sub(v, &self.scale(lambda, b)?)
    }
}

/// A coordinate vector. Belongs to a space only by agreement of dimension and
/// backend; spaces validate on every operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Vector {
    pub coords: Vec<Scalar>,
}

impl Vector {
    pub fn new(coords: Vec<Scalar>) -> Self {
        Vector { coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Result of pivot-echelon reduction of a vector list.
#[derive(Clone, Debug, Serialize)]
pub struct Orthogonalization {
    /// Echelon base: vector k vanishes at the pivots of vectors before it and
    /// attains its norm at its own pivot.
    pub base: Vec<Vector>,
    pub pivots: Vec<usize>,
    /// base[k] = sum_j expressions[k][j] * input[j].
    pub expressions: Vec<Vec<Scalar>>,
    /// Input vectors found dependent on their predecessors, with the
    /// combination of the base (as built so far) that reproduces them.
    pub dropped: Vec<Dependency>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Dependency {
    pub index: usize,
    pub combination: Vec<Scalar>,
}

/// Reduces v against an echelon base, returning the residual and the pivot
/// coefficients. The residual vanishes at every base pivot.
fn reduce_once(
    space: &WeightedSpace,
    base: &[Vector],
    pivots: &[usize],
    v: &Vector,
) -> Result<(Vector, Vec<Scalar>)> {
    let f = space.field();
    let mut r = v.clone();
    let mut coeffs = Vec::with_capacity(base.len());
    for (b, &p) in base.iter().zip(pivots) {
        let lam = if r.coords[p].is_zero() {
            f.zero()
        } else {
            f.div(&r.coords[p], &b.coords[p])?
        };
        r = space.scaled_sub(&r, &lam, b)?;
        coeffs.push(lam);
    }
    Ok((r, coeffs))
}

/// Ultrametric pivot elimination. Vectors are processed in the given order;
/// the pivot of each accepted residual is the coordinate maximizing w_j|v_j|
/// (lowest index on ties). Dependent inputs are dropped and reported.
pub fn orthogonalize(space: &WeightedSpace, vectors: &[Vector]) -> Result<Orthogonalization> {
    let f = space.field();
    let n = vectors.len();
    let mut out = Orthogonalization {
        base: Vec::new(),
        pivots: Vec::new(),
        expressions: Vec::new(),
        dropped: Vec::new(),
    };
    for (idx, v) in vectors.iter().enumerate() {
        space.check_vector(v)?;
        let (residual, coeffs) = reduce_once(space, &out.base, &out.pivots, v)?;
        match space.pivot_of(&residual)? {
            None => out.dropped.push(Dependency { index: idx, combination: coeffs }),
            Some(p) => {
                // expression over inputs: e_idx - sum_k coeffs[k] * expressions[k]
                let mut expr = vec![f.zero(); n];
                expr[idx] = f.one();
                for (k, lam) in coeffs.iter().enumerate() {
                    if !lam.is_zero() {
                        for j in 0..n {
                            let delta = f.mul(lam, &out.expressions[k][j])?;
                            expr[j] = f.sub(&expr[j], &delta)?;
                        }
                    }
                }
                out.base.push(residual);
                out.pivots.push(p);
                out.expressions.push(expr);
            }
        }
    }
    Ok(out)
}

/// A subspace given by spanning vectors, with its echelon base cached.
/// Serializes through its span only (the cache is derived data).
#[derive(Clone, Debug)]
pub struct Subspace {
    space: WeightedSpace,
    span: Vec<Vector>,
    reduced: OnceLock<Result<Orthogonalization>>,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Subspace", 1)?;
        st.serialize_field("span", self.span())?;
        st.end()
    }
}

impl Subspace {
    pub fn new(space: WeightedSpace, span: Vec<Vector>) -> Result<Self> {
        for v in &span {
            space.check_vector(v)?;
        }
        Ok(Subspace { space, span, reduced: OnceLock::new() })
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn span(&self) -> &[Vector] {
        &self.span
    }

    pub fn reduced(&self) -> Result<&Orthogonalization> {
        match self.reduced.get_or_init(|| orthogonalize(&self.space, &self.span)) {
            Ok(o) => Ok(o),
            Err(e) => Err(e.clone()),
        }
    }

    pub fn dim(&self) -> Result<usize> {
        Ok(self.reduced()?.base.len())
    }

    pub fn is_zero(&self) -> Result<bool> {
        Ok(self.dim()? == 0)
    }

    pub fn contains(&self, v: &Vector) -> Result<bool> {
        let red = self.reduced()?;
        let (r, _) = reduce_once(&self.space, &red.base, &red.pivots, v)?;
        Ok(r.is_zero())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceResult {
    pub distance: Magnitude,
    /// The minimizer inside the subspace; the residual v - witness attains
    /// the distance exactly.
    pub witness: Vector,
    pub residual: Vector,
}

/// Exact distance from v to a subspace, with an attaining minimizer.
///
/// The residual r of pivot reduction vanishes at every base pivot, so for any
/// d = sum mu_k b_k: if ||d|| differs from ||r|| the ultrametric gives
/// ||r - d|| = max of the two >= ||r||; if they tie, the earliest k with
/// maximal ||mu_k b_k|| has r zero at its pivot, so that coordinate alone
/// already has weighted size ||d|| = ||r||. Hence ||r|| is the minimum.
pub fn distance(v: &Vector, d: &Subspace) -> Result<DistanceResult> {
    let space = d.space();
    space.check_vector(v)?;
    let red = d.reduced()?;
    let (r, _) = reduce_once(space, &red.base, &red.pivots, v)?;
    let witness = space.sub(v, &r)?;
    Ok(DistanceResult { distance: space.norm(&r)?, witness, residual: r })
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectEntry {
    pub index: usize,
    pub distance: Magnitude,
    pub norm: Magnitude,
    pub ratio: Magnitude,
}

/// The combination certifying tightness: ||x_i - sum_j mu_j x_j|| equals
/// level * ||x_i|| with j ranging over the other input indices.
#[derive(Clone, Debug, Serialize)]
pub struct DefectWitness {
    pub index: usize,
    pub coefficients: Vec<(usize, Scalar)>,
}

/// Orthogonality-defect certificate: level t* = min_i dist(x_i, span of the
/// others) / ||x_i||. The universal inequality
/// ||sum lambda_i x_i|| >= t* max_i ||lambda_i x_i|| holds (reduce to the
/// argmax term and its distance), and the witness tuple achieves equality.
#[derive(Clone, Debug, Serialize)]
pub struct OrthoCertificate {
    pub vectors: Vec<Vector>,
    pub level: Magnitude,
    pub entries: Vec<DefectEntry>,
    pub witness: Option<DefectWitness>,
}

impl OrthoCertificate {
    pub fn is_orthogonal(&self) -> bool {
        self.level.is_one()
    }
}

/// Defect certificate for a finite vector list. Vectors must be nonzero.
/// Level 1 means exactly orthogonal; a single vector (or empty list) is
/// trivially at level 1.
pub fn t_defect(space: &WeightedSpace, vectors: &[Vector]) -> Result<OrthoCertificate> {
    let f = space.field();
    for v in vectors {
        space.check_vector(v)?;
        if v.is_zero() {
            return Err(Error::ZeroVector { context: "t_defect" });
        }
    }
    let n = vectors.len();
    let mut entries = Vec::with_capacity(n);
    let mut best: Option<(Magnitude, usize, Vec<(usize, Scalar)>)> = None;
    for i in 0..n {
        let other_idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let others: Vec<Vector> = other_idx.iter().map(|&j| vectors[j].clone()).collect();
        let red = orthogonalize(space, &others)?;
        let (r, coeffs) = reduce_once(space, &red.base, &red.pivots, &vectors[i])?;
        let dist = space.norm(&r)?;
        let norm = space.norm(&vectors[i])?;
        let ratio = dist.div(&norm)?;
        // witness coefficients over the other input vectors
        let mut over_inputs = vec![f.zero(); others.len()];
        for (k, lam) in coeffs.iter().enumerate() {
            if !lam.is_zero() {
                for j in 0..others.len() {
                    let delta = f.mul(lam, &red.expressions[k][j])?;
                    over_inputs[j] = f.add(&over_inputs[j], &delta)?;
                }
            }
        }
        let witness: Vec<(usize, Scalar)> = other_idx
            .iter()
            .zip(over_inputs)
            .map(|(&j, c)| (j, c))
            .collect();
        if best.as_ref().map_or(true, |(b, _, _)| ratio < *b) {
            best = Some((ratio.clone(), i, witness));
        }
        entries.push(DefectEntry { index: i, distance: dist, norm, ratio });
    }
    let (level, witness) = match best {
        None => (Magnitude::one(), None),
        Some((lvl, idx, coeffs)) => (lvl, Some(DefectWitness { index: idx, coefficients: coeffs })),
    };
    Ok(OrthoCertificate { vectors: vectors.to_vec(), level, entries, witness })
}

/// Orthocomplement of a subspace: the span of the coordinate units at the
/// non-pivot coordinates of its echelon base. Appending those units to the
/// base keeps the echelon property (units vanish at all pivots), so the sum
/// is direct and exactly orthogonal, and pivot counting gives the dimension.
pub fn orthocomplement(d: &Subspace) -> Result<Subspace> {
    let red = d.reduced()?;
    let space = d.space();
    let units: Vec<Vector> = (0..space.dim())
        .filter(|j| !red.pivots.contains(j))
        .map(|j| space.unit(j))
        .collect();
    Subspace::new(space.clone(), units)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairWitness {
    /// x = sum left_coeffs * base(D) and y = sum right_coeffs * base(D0)
    /// with ||x + y|| < max(||x||, ||y||).
    pub left_coeffs: Vec<Scalar>,
    pub right_coeffs: Vec<Scalar>,
    pub left: Vector,
    pub right: Vector,
    pub norm_sum: Magnitude,
    pub norm_max: Magnitude,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalityAnswer {
    pub orthogonal: bool,
    /// Defect certificate of base(D) followed by base(D0).
    pub certificate: OrthoCertificate,
    pub counterexample: Option<PairWitness>,
}

/// Whether two subspaces are orthogonal to each other, with either a level-1
/// certificate of the union of their echelon bases or explicit vectors from
/// the two sides violating the norm equality.
pub fn subspaces_orthogonal(d: &Subspace, d0: &Subspace) -> Result<OrthogonalityAnswer> {
    if d.space() != d0.space() {
        return Err(Error::FieldMismatch {
            expected: format!("ambient of dimension {}", d.space().dim()),
            got: "a different ambient space".into(),
        });
    }
    let space = d.space();
    let f = space.field();
    let left = d.reduced()?.base.clone();
    let right = d0.reduced()?.base.clone();
    let nl = left.len();
    let union: Vec<Vector> = left.iter().chain(right.iter()).cloned().collect();
    let certificate = t_defect(space, &union)?;
    if certificate.is_orthogonal() {
        return Ok(OrthogonalityAnswer { orthogonal: true, certificate, counterexample: None });
    }
    let w = certificate.witness.as_ref().expect("defect below 1 has a witness");
    let mut lc = vec![f.zero(); nl];
    let mut rc = vec![f.zero(); right.len()];
    let assign = |idx: usize, s: Scalar, lc: &mut Vec<Scalar>, rc: &mut Vec<Scalar>| {
        if idx < nl {
            lc[idx] = s;
        } else {
            rc[idx - nl] = s;
        }
    };
    assign(w.index, f.one(), &mut lc, &mut rc);
    for (j, mu) in &w.coefficients {
        assign(*j, f.neg(mu)?, &mut lc, &mut rc);
    }
    let combine = |coeffs: &[Scalar], base: &[Vector]| -> Result<Vector> {
        let mut acc = space.zero_vector();
        for (c, b) in coeffs.iter().zip(base) {
            acc = space.add(&acc, &space.scale(c, b)?)?;
        }
        Ok(acc)
    };
    let lv = combine(&lc, &left)?;
    let rv = combine(&rc, &right)?;
    let norm_sum = space.norm(&space.add(&lv, &rv)?)?;
    let norm_max = std::cmp::max(space.norm(&lv)?, space.norm(&rv)?);
    debug_assert!(norm_sum < norm_max);
    Ok(OrthogonalityAnswer {
        orthogonal: false,
        certificate,
        counterexample: Some(PairWitness {
            left_coeffs: lc,
            right_coeffs: rc,
            left: lv,
            right: rv,
            norm_sum,
            norm_max,
        }),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtendedBase {
    /// The input list verbatim, followed by the added vectors.
    pub vectors: Vec<Vector>,
    pub prefix_len: usize,
    pub requested_level: Magnitude,
    pub certificate: OrthoCertificate,
}

/// Extends a t0-orthogonal list (t0 >= sqrt(t)) to a base of the enclosing
/// space or subspace, keeping the input as a prefix.
///
/// Added vectors come from reduction against the prefix, so they are exactly
/// orthogonal to its span and to each other; splitting any combination into
/// its prefix part S1 and added part S2 gives
/// ||S1 + S2|| = max(||S1||, ||S2||) >= max(t0 max ||lambda_i f_i||, max ||mu_j n_j||),
/// so the output is t0-orthogonal, and t0 >= sqrt(t) >= t for t <= 1.
pub fn extend_base(
    space: &WeightedSpace,
    f_base: &[Vector],
    within: Option<&Subspace>,
    t: &Magnitude,
) -> Result<ExtendedBase> {
    if t.is_zero() || *t > Magnitude::one() {
        return Err(Error::Unsupported { context: format!("extension level {t} outside (0, 1]") });
    }
    let need = t.root(2)?;
    let cert = t_defect(space, f_base)?;
    if cert.level < need {
        return Err(Error::DefectBelowThreshold {
            defect: cert.level.to_string(),
            needed: need.to_string(),
        });
    }
    let prefix = orthogonalize(space, f_base)?;
    debug_assert!(prefix.dropped.is_empty(), "a positive-defect list is independent");
    let mut base = prefix.base.clone();
    let mut pivots = prefix.pivots.clone();
    let mut vectors = f_base.to_vec();
    match within {
        None => {
            for j in 0..space.dim() {
                if !pivots.contains(&j) {
                    let u = space.unit(j);
                    vectors.push(u.clone());
                    base.push(u);
                    pivots.push(j);
                }
            }
        }
        Some(sub) => {
            if sub.space() != space {
                return Err(Error::FieldMismatch {
                    expected: "matching ambient space".into(),
                    got: "a different ambient space".into(),
                });
            }
            for v in f_base {
                if !sub.contains(v)? {
                    return Err(Error::NotInDomain);
                }
            }
            for v in &sub.reduced()?.base {
                let (r, _) = reduce_once(space, &base, &pivots, v)?;
                if let Some(p) = space.pivot_of(&r)? {
                    vectors.push(r.clone());
                    base.push(r);
                    pivots.push(p);
                }
            }
        }
    }
    let certificate = t_defect(space, &vectors)?;
    debug_assert!(certificate.level >= *t);
    Ok(ExtendedBase {
        vectors,
        prefix_len: f_base.len(),
        requested_level: t.clone(),
        certificate,
    })
}

/// A linear map presented on spanning vectors and extended by linearity.
/// Construction orthogonalizes the domain span, reducing the image vectors in
/// lockstep, so the stored base is echelon and its images determine the map.
#[derive(Clone, Debug, Serialize)]
pub struct LinearMap {
    domain_space: WeightedSpace,
    codomain_space: WeightedSpace,
    base: Vec<Vector>,
    pivots: Vec<usize>,
    images: Vec<Vector>,
}

impl LinearMap {
    pub fn new(
        domain_space: WeightedSpace,
        span: Vec<Vector>,
        span_images: Vec<Vector>,
        codomain_space: WeightedSpace,
    ) -> Result<Self> {
        if domain_space.field() != codomain_space.field() {
            return Err(Error::FieldMismatch {
                expected: domain_space.field().to_string(),
                got: codomain_space.field().to_string(),
            });
        }
        if span.len() != span_images.len() {
            return Err(Error::DimensionMismatch { expected: span.len(), got: span_images.len() });
        }
        let f = domain_space.field();
        let mut base: Vec<Vector> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        let mut images: Vec<Vector> = Vec::new();
        for (idx, (v, im)) in span.iter().zip(&span_images).enumerate() {
            domain_space.check_vector(v)?;
            codomain_space.check_vector(im)?;
            let mut r = v.clone();
            let mut ri = im.clone();
            for ((b, &p), bi) in base.iter().zip(&pivots).zip(&images) {
                let lam = if r.coords[p].is_zero() {
                    f.zero()
                } else {
                    f.div(&r.coords[p], &b.coords[p])?
                };
                r = domain_space.scaled_sub(&r, &lam, b)?;
                ri = codomain_space.scaled_sub(&ri, &lam, bi)?;
            }
            match domain_space.pivot_of(&r)? {
                None => {
                    // dependent spanning vector: its image must agree with
                    // the linear extension already determined
                    if !ri.is_zero() {
                        return Err(Error::InconsistentImages { index: idx });
                    }
                }
                Some(p) => {
                    base.push(r);
                    pivots.push(p);
                    images.push(ri);
                }
            }
        }
        Ok(LinearMap { domain_space, codomain_space, base, pivots, images })
    }

    /// The identity on a whole space.
    pub fn identity(space: &WeightedSpace) -> Result<Self> {
        let units: Vec<Vector> = (0..space.dim()).map(|i| space.unit(i)).collect();
        LinearMap::new(space.clone(), units.clone(), units, space.clone())
    }

    pub fn domain_space(&self) -> &WeightedSpace {
        &self.domain_space
    }

    pub fn codomain_space(&self) -> &WeightedSpace {
        &self.codomain_space
    }

    /// Echelon base of the domain.
    pub fn domain_base(&self) -> &[Vector] {
        &self.base
    }

    pub fn base_images(&self) -> &[Vector] {
        &self.images
    }

    pub fn domain_dim(&self) -> usize {
        self.base.len()
    }

    pub fn domain_subspace(&self) -> Result<Subspace> {
        Subspace::new(self.domain_space.clone(), self.base.clone())
    }

    /// Coefficients of v over the domain base; NotInDomain if v is outside.
    pub fn coefficients(&self, v: &Vector) -> Result<Vec<Scalar>> {
        let (r, coeffs) = reduce_once(&self.domain_space, &self.base, &self.pivots, v)?;
        if !r.is_zero() {
            return Err(Error::NotInDomain);
        }
        Ok(coeffs)
    }

    pub fn evaluate(&self, v: &Vector) -> Result<Vector> {
        let coeffs = self.coefficients(v)?;
        let mut out = self.codomain_space.zero_vector();
        for (lam, im) in coeffs.iter().zip(&self.images) {
            out = self.codomain_space.add(&out, &self.codomain_space.scale(lam, im)?)?;
        }
        Ok(out)
    }

    /// max_i ||L b_i|| / ||b_i|| over the echelon base; with an orthogonal
    /// base this is the operator norm: for x = sum lambda_i b_i,
    /// ||Lx|| <= max ||lambda_i L b_i|| <= (max ratio) max ||lambda_i b_i|| = (max ratio) ||x||.
    pub fn operator_norm(&self) -> Result<Magnitude> {
        let mut best = Magnitude::Zero;
        for (b, im) in self.base.iter().zip(&self.images) {
            let nb = self.domain_space.norm(b)?;
            let ni = self.codomain_space.norm(im)?;
            let ratio = ni.div(&nb)?;
            if ratio > best {
                best = ratio;
            }
        }
        Ok(best)
    }

    /// The inverse defined on the image span. Requires injectivity.
    pub fn inverse_on_image(&self) -> Result<LinearMap> {
        let inv = LinearMap::new(
            self.codomain_space.clone(),
            self.images.clone(),
            self.base.clone(),
            self.domain_space.clone(),
        )?;
        if inv.domain_dim() != self.domain_dim() {
            return Err(Error::Unsupported { context: "inverse of a non-injective map".into() });
        }
        Ok(inv)
    }

    /// Isometry check, sound and complete on the whole domain span: norms
    /// must match on the echelon base and the images must be exactly
    /// orthogonal. If L is an isometry the images inherit orthogonality from
    /// the base (every combination's norm transports), so a defect below 1
    /// refutes, and the defect witness assembles a concrete vector whose norm
    /// the map changes.
    pub fn certify_isometry(&self) -> Result<IsometryOutcome> {
        let mut base_norms = Vec::with_capacity(self.base.len());
        for (b, im) in self.base.iter().zip(&self.images) {
            let nb = self.domain_space.norm(b)?;
            let ni = self.codomain_space.norm(im)?;
            if nb != ni {
                return Ok(IsometryOutcome::Refuted(IsometryRefutation {
                    witness: b.clone(),
                    norm_in: nb,
                    norm_out: ni,
                }));
            }
            base_norms.push((nb, ni));
        }
        let image_certificate = t_defect(&self.codomain_space, &self.images)?;
        if image_certificate.is_orthogonal() {
            return Ok(IsometryOutcome::Certified(IsometryCertificate {
                base_norms,
                image_certificate,
            }));
        }
        // assemble x = b_{i*} - sum mu_j b_j; its image norm is the defect
        // distance, strictly below ||b_{i*}|| <= ||x||
        let w = image_certificate.witness.as_ref().expect("defect below 1 has a witness");
        let mut x = self.base[w.index].clone();
        for (j, mu) in &w.coefficients {
            x = self.domain_space.scaled_sub(&x, mu, &self.base[*j])?;
        }
        let norm_in = self.domain_space.norm(&x)?;
        let norm_out = self.codomain_space.norm(&self.evaluate(&x)?)?;
        debug_assert!(norm_in != norm_out);
        Ok(IsometryOutcome::Refuted(IsometryRefutation { witness: x, norm_in, norm_out }))
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum IsometryOutcome {
    Certified(IsometryCertificate),
    Refuted(IsometryRefutation),
}

impl IsometryOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, IsometryOutcome::Certified(_))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IsometryCertificate {
    /// (domain norm, image norm) per base vector, equal pairwise.
    pub base_norms: Vec<(Magnitude, Magnitude)>,
    /// Level-1 defect certificate of the images.
    pub image_certificate: OrthoCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsometryRefutation {
    pub witness: Vector,
    pub norm_in: Magnitude,
    pub norm_out: Magnitude,
}

/// The map b_i -> L(b_i) - M(b_i) on L's domain base. M must be defined on
/// all of L's domain.
pub fn difference_on_domain(l: &LinearMap, m: &LinearMap) -> Result<LinearMap> {
    if l.codomain_space() != m.codomain_space() {
        return Err(Error::FieldMismatch {
            expected: l.codomain_space().field().to_string(),
            got: m.codomain_space().field().to_string(),
        });
    }
    let mut diffs = Vec::with_capacity(l.base.len());
    for (b, im) in l.base.iter().zip(&l.images) {
        let other = m.evaluate(b)?;
        diffs.push(l.codomain_space.sub(im, &other)?);
    }
    LinearMap::new(
        l.domain_space.clone(),
        l.base.clone(),
        diffs,
        l.codomain_space.clone(),
    )
}
