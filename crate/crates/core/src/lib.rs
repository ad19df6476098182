//! Continued-fraction Green's functions for complex tridiagonal Hamiltonians.
//!
//! The crate locates complex eigenvalues (resonance energies) and real singular
//! values of non-Hermitian tridiagonal operators of the Bose-Hubbard type. The
//! spectrum is read off from zeros of secular functions assembled from
//!
//! * a single downward continued fraction (one-sided chains, [`cfrac::one_sided_green`]),
//! * a doublet of continued fractions matched at an anchor row
//!   ([`cfrac::secular_two_sided`]),
//! * a doublet of 2×2 matrix continued fractions over the chirally doubled
//!   operator ([`hermitize::secular_block`], [`hermitize::singular_values`]).
//!
//! Everything is checked against the dense routines of [`oracle`], which never
//! touch the continued-fraction code paths.

pub mod cfrac;
pub mod error;
pub mod factor;
pub mod hermitize;
pub mod operator;
pub mod oracle;
pub mod roots;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);
