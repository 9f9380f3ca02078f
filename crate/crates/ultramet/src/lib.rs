//! Exact linear algebra over non-archimedean valued fields.
//!
//! Everything here is certificate-producing: norms, distances and
//! orthogonality defects are computed in an exactly ordered subgroup of the
//! positive reals (formal products of prime powers with rational exponents),
//! so every inequality an algorithm relies on is decided, not approximated.
//!
//! Layout:
//! - [`magnitude`]: the ordered value monoid and coset machinery.
//! - [`scalar`]: two field backends (rational p-adics, truncated Hahn series)
//!   with exact absolute values into magnitudes.
//! - [`space`]: weighted max-norm spaces, orthogonalization, distances,
//!   orthogonality-defect certificates, linear maps and isometry certificates.
//! - [`gurarii`]: the constructive universality toolkit built on top: growing
//!   ambient spaces, approximate-isometry synthesis, isometry patching,
//!   embeddings into the universal shape, gap certificates for the
//!   discretely-valued obstruction, isometric classification, ball chains.
//! - [`verify`]: seeded random instance generators, an independent
//!   brute-force distance oracle, and the named verification suites.
//! - [`io`]: the textual file formats shared by the CLI and the fuzz targets.

pub mod error;
pub mod magnitude;
pub mod scalar;
pub mod space;
pub mod gurarii;
pub mod verify;
pub mod io;

pub use error::{Error, Result};
