//! Translation of validated network data into [`crate::nlp::Nlp`] problems.
//!
//! [`expr`] provides the closed vocabulary of algebraic terms that covers
//! every function in the AC/DC OPF (quadratic costs, trigonometric power
//! flows, converter loss polynomials, squared-magnitude limits) together
//! with exact first and second derivatives. [`build`] assembles those
//! terms into the centralized problem and the per-region / MTDC
//! subproblems used by the distributed algorithms.

pub mod build;
pub mod expr;

pub use build::{build_ac_region, build_central, build_mtdc, OBJ_SCALE};
pub use build::{AcSubLayout, CentralLayout, MtdcSubLayout, RegionVarIds, StationCopy, StationVarIds};
