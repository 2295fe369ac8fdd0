//! Itinerary stratification of spaces of locally convex curves.
//!
//! The crate is split along the mathematical layers:
//!
//! - [`symgrp`]: permutations of `S_{n+1}`, reduced words, Bruhat order, multiplicity vectors.
//! - [`spinalg`]: even Clifford algebra, the lifted signed permutation group and the maps
//!   acute/grave/hat, the projection to `SO_{n+1}`.
//! - [`triang`]: the unit lower triangular group, total positivity, accessibility.
//! - [`curvelab`]: numeric frame curves, singular sets and itineraries.
//! - [`polysect`]: exact transversal sections and their stratum maps.
//! - [`poset`]: the partial order on itinerary words.

pub mod curvelab;
pub mod linalg;
pub mod poly;
pub mod polysect;
pub mod poset;
pub mod spinalg;
pub mod symgrp;
pub mod triang;

pub use curvelab::{CompactSubset, CurvatureSpec, FrameCurve, SingularEvent};
pub use poly::{MultiPoly, Rat, UniPoly};
pub use polysect::SectionFamily;
pub use poset::{PrecCertificate, Verdict};
pub use spinalg::{CliffordEven, Dyadic};
pub use symgrp::{Permutation, ReducedWord, Word};
pub use triang::{Quasiproduct, UniTriMatrix};

