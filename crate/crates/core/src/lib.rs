//! Joint Brown measures, idempotent-valued spectral measures and spectral
//! subspaces of commuting tuples of complex matrices.
//!
//! The normalized trace `τ = tr / d` on `d x d` matrices plays the role of the
//! faithful tracial state. The central object is [`spectral::JointDecomposition`],
//! from which Riesz idempotents, spectral subspaces and the joint Brown measure
//! ([`measures::brown`]) are read off.

pub mod error;
pub mod idempotents;
pub mod linalg;
pub mod measures;
pub mod models;
pub mod potential;
pub mod regions;
pub mod report;
pub mod spectral;
pub mod suite;
pub mod tol;

pub use error::{Error, Result};
pub use idempotents::{Idempotent, TraceValue};
pub use linalg::{CMatrix, Subspace, C64};
pub use measures::{AtomicMeasure, MapDescriptor, Polynomial};
pub use regions::Region;
pub use report::Report;
pub use spectral::{CommutingTuple, JointDecomposition};
pub use tol::Tolerances;
