//! Discrete vector bundles with connection over oriented simplicial complexes.
//!
//! A bundle puts a fiber `E_i` at every vertex and an invertible parallel
//! transport matrix on every edge. Everything else in this crate is built from
//! that data:
//!
//! - [`complex`]: simplicial complexes, permutation parity, simplicial maps,
//!   paths, spanning trees and elementary simple homotopies.
//! - [`bundle`]: bundles, transports, holonomy, gauge transformations, Whitney
//!   sums, pullbacks, bundle maps and fiber metrics.
//! - [`cochain`]: scalar, bundle-valued and Hom-valued cochains with cup and
//!   wedge products, `d`, `∇`, `d∇`, curvature and inner products.
//! - [`analysis`]: flatness, holonomy representation, trivialization,
//!   parallel sections and structure-group checks.
//! - [`fixtures`]: named complexes and seeded random data.
//!
//! # Index convention
//!
//! `U_ij` always denotes the transport `E_j → E_i`: the first index is the
//! target. A bundle stores exactly one matrix per edge `{i < j}`, namely `U_ij`
//! (towards the lower vertex), together with its inverse `U_ji` computed once at
//! construction. Cochain values on a simplex live in the fiber of its lowest
//! vertex.

pub mod analysis;
pub mod bundle;
pub mod cochain;
pub mod complex;
pub mod fixtures;
pub mod linalg;
pub mod tolerance;

pub use analysis::{
    holonomy_representation, is_flat, parallel_sections, trivial_subbundle_gauge, trivialize,
    verify_structure_group, AnalysisError, FlatnessReport, Obstruction, ObstructionKind,
    ParallelBasis, StructureGroup, TrivializationResult,
};
pub use bundle::{is_metric_compatible, Bundle, BundleError, BundleMap, GaugeTransform, Metric};
pub use cochain::{CochainError, CochainEval, HomCochain, ProductOrder, ScalarCochain, VBCochain};
pub use complex::{
    canonicalize, ComplexError, HomotopyMove, Parity, Path, SimplexKey, SimplicialComplex,
    SimplicialMap, SpanningTree, Vertex,
};
pub use tolerance::Tolerance;

/// Outcome of a structural check whose failure is an ordinary answer rather
/// than an error.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    /// The first offending simplex in canonical order, with the largest
    /// elementwise residual observed there (zero for purely combinatorial
    /// checks).
    Violation {
        at: SimplexKey,
        residual: f64,
    },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}
