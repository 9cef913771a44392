//! Numerical toolkit for Carleson-type embedding conditions on Hardy and
//! weighted Bergman spaces of the right half-plane, and for their Laplace
//! transform counterparts on the positive half-line.
//!
//! The crate provides measures (radial, half-plane), doubling diagnostics,
//! an adapted dyadic decomposition of half-plane measures, Laplace transform
//! machinery with closed forms for the built-in test functions, balayage and
//! maximal function evaluation, embedding checks for the supported exponent
//! regimes, Hankel-symbol induced measures, and an admissibility verdict for
//! diagonal control systems. The `carleson-lab` binary exposes all of it.

pub mod error;
pub mod par;
pub mod quad;

pub mod admiss;
pub mod balayage;
pub mod cli;
pub mod dyadic;
pub mod embed;
pub mod hankel;
pub mod measure;
pub mod specfile;
pub mod transforms;

pub use cli::run;
pub use error::{Error, Result};
