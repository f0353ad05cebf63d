//! Tension and bitension fields of coordinate maps between warped-product
//! surfaces `dt² + w(t)² ds²`, with classification of linear maps between
//! tori and spheres, energy functionals and an atlas of worked examples.

// `!(x < tol)` is deliberate: NaN must fail a tolerance check. Index loops
// mirror the tensor contractions they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod atlas;
pub mod bitension;
pub mod classify;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod grid;
pub mod maps;
pub mod report;
pub mod sweep;
pub mod tension;
pub mod verify;

pub use classify::{classify_flat, classify_nonflat, CaseTag, ClassificationResult, Verdict};
pub use error::{Error, Result};
pub use geometry::{WarpFunction, WarpedSurface};
pub use grid::GridSpec;
pub use maps::{LinearMap, SmoothMap, SurfaceMap};
pub use report::VerifyReport;
