//! Primes of cyclic reduction for elliptic curves over the rationals.
//!
//! * [`modmath`]: word-sized modular arithmetic, sieving and factoring.
//! * [`curve`]: group law, point counting and group structure over `F_p`.
//! * [`census`]: classification of every prime up to a bound.
//! * [`density`]: exact rational and interval evaluation of the density
//!   `sum mu(m) / [K_m : K]` and its Euler-product factorizations.
//! * [`galois_image`]: 2-division degrees and a sampling certificate for
//!   surjective mod-`l` images.
//! * [`entangle`]: explicit subgroups of products of `GL_2(F_l)`.
//! * [`app`]: curve registry, profile and report files, degree ingestion.

pub mod app;
pub mod census;
pub mod curve;
pub mod density;
pub mod entangle;
pub mod galois_image;
pub mod modmath;

pub use curve::{CurveOverQ, GroupStructure, Point, ReducedCurve};
pub use density::{DegreeProfile, DensityReport, Interval, Rational, Vanishing};
