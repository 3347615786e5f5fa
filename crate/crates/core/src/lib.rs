//! Flat connections on cell 2-complexes: twisted cohomology, heat-kernel
//! regularized partition functions, divergence degrees and Reidemeister torsion.
//!
//! A foam is stored as a group presentation (edges are generators, faces are
//! relator words). Structure groups are SU(2) and U(1), with Haar measure
//! normalized to total mass one throughout.

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod connection;
pub mod error;
pub mod foam;
pub mod group;
pub mod linalg;
pub mod par;
pub mod partition;
pub mod torsion;
pub mod twisted;

pub use connection::{Connection, FlatSample};
pub use error::{Error, Result};
pub use foam::{CellularReport, FaceWord, Foam, Letter};
pub use group::{Group, GroupElement, Irrep, LieVector};
pub use partition::{ScalingFit, ZEstimate};
pub use torsion::TorsionValue;
pub use twisted::{CohomologyReport, TwistedComplex};

/// Library version embedded in machine-readable outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
