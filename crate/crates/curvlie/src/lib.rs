//! curvlie: curvature of Lie groups with left-invariant metrics, computed
//! at the Lie-algebra level.
//!
//! The crate works entirely with structure constants: a Lie algebra 𝔤 with
//! an inner product determines a simply connected Lie group with a
//! left-invariant metric, and every curvature quantity of that group is a
//! polynomial in the structure constants of an orthonormal basis. The
//! modules provide:
//!
//! - [`algebra`] — structure-constant Lie algebras, derivations,
//!   automorphisms, eigenvalue sign tests;
//! - [`extension`] — rank-one solvable extensions 𝔫(D) of a nilpotent
//!   algebra by a derivation, the strict-negative-curvature test, and
//!   derivation equivalence;
//! - [`jordan`] — real Jordan normal forms with tolerance-aware
//!   eigenvalue clustering;
//! - [`geometry`] — Levi-Civita connection, Riemann and Ricci curvature,
//!   sectional curvature, Einstein and locally-symmetric detection, and a
//!   randomized search for positive sectional curvature;
//! - [`canonical`] — classification of derivations into the canonical
//!   families in dimensions four and five, with change-of-basis
//!   witnesses, plus the instantiable catalog of those families;
//! - [`doc`] — the JSON document format for algebras on the command line;
//! - [`verify`] — the self-check suite reported by `curvlie verify-paper`.

pub mod algebra;
pub mod canonical;
pub mod cli;
pub mod doc;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod verify;
pub mod jordan;
pub mod linalg;
pub mod tol;

pub use error::{CurvlieError, Result};
