//! Structure constants, polynomial families, and module blueprints for the
//! subconstituent (Terwilliger) algebra of a bipartite distance-regular graph.
//!
//! Everything is driven by an intersection array `(b_0, ..., b_{D-1}; c_1, ..., c_D)`.
//! From the array alone this crate derives, in exact rational arithmetic:
//!
//! * valencies, intersection numbers, eigenvalues and multiplicities ([`arrays`], [`spectra`]);
//! * four families of orthogonal-style polynomials and a bivariate companion
//!   family, together with the identities relating them ([`polyfams`]);
//! * closed-form blueprints of the irreducible modules of endpoint 0, 1, and 2
//!   for the subconstituent algebra at a base vertex ([`modules`]).
//!
//! The [`oracle`] module builds small concrete graphs, constructs the actual
//! algebra as dense matrices, decomposes the standard module, and checks every
//! blueprint against ground truth. [`pipeline`] ties the two sides together.
//!
//! Core numeric code is generic over the scalar type through the [`scalar::Scalar`]
//! trait: `BigRational` for exact runs, `f64`/`f32` for sampled or
//! oracle-derived parameters. Concrete aliases live at the crate root.

pub mod arrays;
pub mod config;
pub mod mat;
pub mod modules;
pub mod oracle;
pub mod pipeline;
pub mod poly;
pub mod polyfams;
pub mod report;
mod roots;
pub mod scalar;
pub mod spectra;

pub use arrays::{IntersectionArray, IntersectionTensor, ValencyVector};
pub use config::Tolerances;
pub use report::{CheckLine, Report};
pub use scalar::{Rat, Scalar};

/// Exact-rational polynomial.
pub type RatPoly = poly::Poly<Rat>;
/// Double-precision polynomial.
pub type F64Poly = poly::Poly<f64>;
/// Exact-rational bivariate polynomial.
pub type RatBivar = poly::BivarPoly<Rat>;
/// Exact-rational spectrum.
pub type RatSpectrum = spectra::Spectrum<Rat>;
/// Double-precision spectrum.
pub type F64Spectrum = spectra::Spectrum<f64>;
/// Exact-rational module blueprint.
pub type RatBlueprint = modules::ModuleBlueprint<Rat>;
/// Double-precision module blueprint.
pub type F64Blueprint = modules::ModuleBlueprint<f64>;
