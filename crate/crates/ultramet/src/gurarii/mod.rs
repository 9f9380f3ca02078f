//! Theorem-level constructions over extensible ambient stages: density
//! dichotomies and gap certificates, ε-isometry synthesis, isometry patching
//! and perturbation checks, universal-space embeddings and extensions, the
//! coset fingerprint classification, and the shrinking-ball demonstration.
//!
//! Every operation either returns an object together with a certificate that
//! re-verifies by exact magnitude comparisons, or a refutation carrying a
//! concrete witness. Stage growth (coordinate allocation, registry insertion)
//! goes through `&mut Ambient` and is therefore single-writer; everything
//! else is pure, so committed stages can be read concurrently and identical
//! request sequences produce bit-identical stages.

mod ambient;
mod balls;
mod classify;
mod density;
mod epsiso;
mod patch;
mod universal;

pub use ambient::{Ambient, CosetRegistry, RegistryEntry};
pub use balls::{shrinking_balls, BallStep, BallsReport, NestingCheck};
pub use classify::{classify, isometric_eq, Fingerprint, IsoEqOutcome, ObstructionReport};
pub use density::{
    nonexistence_certificate, value_set_dense, value_set_dense_ambient, DensityAnswer,
    GapCertificate, GapOutcome, WeightNeighbors,
};
pub use epsiso::{epsilon_isometry, EpsIsometryReport};
pub use patch::{
    check_perturbation, extend_isometry_immediate, maximal_orthogonal_split, patch_isometry,
    PatchResult, PerturbationVerdict, SplitResult,
};
pub use universal::{
    disposition_extend, embed_into_universal, DispositionMode, DispositionResult, EmbeddingResult,
    EmbeddingStep,
};
