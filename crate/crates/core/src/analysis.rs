//! Flatness, holonomy, trivialization, parallel sections and structure-group
//! checks. Everything that walks a spanning tree requires a connected complex.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::bundle::{is_metric_compatible, Bundle, BundleError, GaugeTransform, Metric};
use crate::cochain::{CochainError, VBCochain};
use crate::complex::{generator_loops, ComplexError, Path, SimplexKey, SpanningTree, Vertex};
use crate::linalg::{kernel, rank};
use crate::tolerance::{max_abs_diff, max_abs_diff_vec, Tolerance};
use crate::Verdict;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error("fiber dimensions are not uniform")]
    NonUniformRank,
    #[error("parallel basis is empty")]
    EmptyBasis,
    #[error("parallel sections are linearly dependent at vertex {0}")]
    DependentBasis(Vertex),
    #[error("block size {k} does not fit fiber dimension {n}")]
    InvalidBlock { k: usize, n: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessReport {
    pub flat: bool,
    /// Triangle with the largest `‖hol − I‖` when not flat.
    pub witness: Option<SimplexKey>,
    pub max_residual: f64,
}

/// Holonomy around the boundary `a → b → c → a` of a triangle `[a < b < c]`.
fn triangle_holonomy(bundle: &Bundle, t: &SimplexKey) -> DMatrix<f64> {
    let v = t.vertices();
    let u = |i, j| bundle.transport(i, j).expect("triangle edge");
    u(v[0], v[1]) * u(v[1], v[2]) * u(v[2], v[0])
}

fn identity_residual(m: &DMatrix<f64>) -> f64 {
    max_abs_diff(m, &DMatrix::identity(m.nrows(), m.ncols()))
}

/// Checks that the holonomy around every triangle is the identity.
pub fn is_flat(bundle: &Bundle, tol: &Tolerance) -> FlatnessReport {
    let mut flat = true;
    let mut worst: Option<(SimplexKey, f64)> = None;
    for t in bundle.complex().simplices(2) {
        let h = triangle_holonomy(bundle, t);
        let r = identity_residual(&h);
        if !tol.is_identity(&h) {
            flat = false;
        }
        if worst.as_ref().is_none_or(|(_, w)| r > *w) {
            worst = Some((t.clone(), r));
        }
    }
    let max_residual = worst.as_ref().map_or(0.0, |w| w.1);
    FlatnessReport {
        flat,
        witness: if flat { None } else { worst.map(|w| w.0) },
        max_residual,
    }
}

/// Holonomy of each generator loop of the BFS spanning tree, based at the root.
pub fn holonomy_representation(
    bundle: &Bundle,
    tree: &SpanningTree,
) -> Result<Vec<(Path, DMatrix<f64>)>, AnalysisError> {
    generator_loops(bundle.complex(), tree)
        .into_iter()
        .map(|l| {
            let h = bundle.holonomy(&l)?;
            Ok((l, h))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObstructionKind {
    NonFlat(SimplexKey),
    NontrivialHolonomy(Path),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Obstruction {
    pub kind: ObstructionKind,
    /// `max |hol − I|` on the offending triangle or loop.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrivializationResult {
    Gauge(GaugeTransform),
    Obstruction(Obstruction),
}

/// `P_v = transport along the tree path v → root`, a map `E_root → E_v`.
fn tree_frames(
    bundle: &Bundle,
    tree: &SpanningTree,
) -> Result<BTreeMap<Vertex, DMatrix<f64>>, AnalysisError> {
    let mut frames: BTreeMap<Vertex, DMatrix<f64>> = BTreeMap::new();
    for &v in tree.order() {
        let frame = match tree.parent(v) {
            None => DMatrix::identity(bundle.dim(v), bundle.dim(v)),
            Some(p) => bundle.transport(v, p)? * &frames[&p],
        };
        frames.insert(v, frame);
    }
    Ok(frames)
}

fn tree_for(bundle: &Bundle) -> Result<SpanningTree, AnalysisError> {
    let tree = SpanningTree::bfs(bundle.complex())?;
    if bundle.uniform_rank().is_none() {
        return Err(AnalysisError::NonUniformRank);
    }
    Ok(tree)
}

/// Gauge making every transport the identity, or the first obstruction:
/// non-flat triangles in canonical order first, then generator loops in
/// canonical order of their non-tree edge.
pub fn trivialize(bundle: &Bundle, tol: &Tolerance) -> Result<TrivializationResult, AnalysisError> {
    let tree = tree_for(bundle)?;
    for t in bundle.complex().simplices(2) {
        let h = triangle_holonomy(bundle, t);
        if !tol.is_identity(&h) {
            return Ok(TrivializationResult::Obstruction(Obstruction {
                kind: ObstructionKind::NonFlat(t.clone()),
                residual: identity_residual(&h),
            }));
        }
    }
    for (l, h) in holonomy_representation(bundle, &tree)? {
        if !tol.is_identity(&h) {
            return Ok(TrivializationResult::Obstruction(Obstruction {
                kind: ObstructionKind::NontrivialHolonomy(l),
                residual: identity_residual(&h),
            }));
        }
    }
    let frames = tree_frames(bundle, &tree)?;
    let g = frames
        .into_iter()
        .map(|(v, p)| {
            let inv = p
                .try_inverse()
                .ok_or_else(|| BundleError::Singular(format!("frame at vertex {v}")))?;
            Ok((v, inv))
        })
        .collect::<Result<_, AnalysisError>>()?;
    Ok(TrivializationResult::Gauge(GaugeTransform::new(g)?))
}

/// Linearly independent sections with `∇s = 0`.
#[derive(Clone, Debug)]
pub struct ParallelBasis {
    bundle: Arc<Bundle>,
    sections: Vec<VBCochain>,
}

impl ParallelBasis {
    /// Wraps caller-provided sections; independence is checked where it is used.
    pub fn new(bundle: Arc<Bundle>, sections: Vec<VBCochain>) -> Result<Self, AnalysisError> {
        for s in &sections {
            if s.degree() != 0 || **s.bundle() != *bundle {
                return Err(CochainError::Mismatch.into());
            }
            s.require_complete()?;
        }
        Ok(Self { bundle, sections })
    }

    pub fn bundle(&self) -> &Arc<Bundle> {
        &self.bundle
    }

    pub fn sections(&self) -> &[VBCochain] {
        &self.sections
    }

    pub fn dimension(&self) -> usize {
        self.sections.len()
    }

    /// Section values at `v` as the columns of a matrix.
    pub fn frame_at(&self, v: Vertex) -> DMatrix<f64> {
        let key = SimplexKey::vertex(v);
        let cols: Vec<DVector<f64>> = self.sections.iter().map(|s| s.value(&key)).collect();
        if cols.is_empty() {
            DMatrix::zeros(self.bundle.dim(v), 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }
}

/// Largest `|U_ij s_j − s_i|` over all edges.
fn parallel_residual(bundle: &Bundle, s: &VBCochain) -> f64 {
    bundle
        .stored_transports()
        .iter()
        .map(|(&(i, j), u)| {
            let sj = u * s.value(&SimplexKey::vertex(j));
            max_abs_diff_vec(&sj, &s.value(&SimplexKey::vertex(i)))
        })
        .fold(0.0, f64::max)
}

/// Fixed subspace of all generator holonomies at the root, spread over the
/// complex along the tree and re-verified on every edge.
pub fn parallel_sections(
    bundle: &Arc<Bundle>,
    tol: &Tolerance,
) -> Result<ParallelBasis, AnalysisError> {
    let tree = tree_for(bundle)?;
    let n = bundle.dim(tree.root());
    let reps = holonomy_representation(bundle, &tree)?;
    let mut stacked = DMatrix::zeros(n * reps.len(), n);
    for (idx, (_, h)) in reps.iter().enumerate() {
        stacked
            .rows_mut(idx * n, n)
            .copy_from(&(h - DMatrix::identity(n, n)));
    }
    let basis = kernel(&stacked, tol.abs);
    let frames = tree_frames(bundle, &tree)?;
    let mut sections = Vec::new();
    for b in basis.column_iter() {
        let b = b.into_owned();
        let s = VBCochain::from_fn(bundle.clone(), 0, |k| &frames[&k.lowest()] * &b)?;
        let ok = bundle.stored_transports().iter().all(|(&(i, j), u)| {
            tol.close_vec(
                &(u * s.value(&SimplexKey::vertex(j))),
                &s.value(&SimplexKey::vertex(i)),
            )
        });
        if ok {
            sections.push(s);
        }
    }
    ParallelBasis::new(bundle.clone(), sections)
}

/// Completes the columns of `s` (full column rank) to an invertible matrix
/// with standard basis vectors, choosing pivots by largest magnitude.
fn complete_basis(s: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = s.shape();
    let mut work = s.clone();
    let mut used = vec![false; n];
    for c in 0..k {
        let (r, _) = (0..n)
            .filter(|&r| !used[r])
            .map(|r| (r, work[(r, c)].abs()))
            .fold(
                (usize::MAX, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        used[r] = true;
        let pivot = work[(r, c)];
        for c2 in c + 1..k {
            let factor = work[(r, c2)] / pivot;
            for row in 0..n {
                work[(row, c2)] -= factor * work[(row, c)];
            }
        }
    }
    let mut out = DMatrix::zeros(n, n);
    out.columns_mut(0, k).copy_from(s);
    let mut c = k;
    for (r, &u) in used.iter().enumerate() {
        if !u {
            out[(r, c)] = 1.0;
            c += 1;
        }
    }
    out
}

/// Gauge whose inverse at each vertex starts with the section values, so
/// that every transport becomes `[[I_k, *], [0, *]]`.
pub fn trivial_subbundle_gauge(
    basis: &ParallelBasis,
    tol: &Tolerance,
) -> Result<GaugeTransform, AnalysisError> {
    let k = basis.dimension();
    if k == 0 {
        return Err(AnalysisError::EmptyBasis);
    }
    let bundle = basis.bundle();
    let mut g = BTreeMap::new();
    for v in bundle.complex().vertices() {
        let s = basis.frame_at(v);
        if rank(&s, tol.abs) < k {
            return Err(AnalysisError::DependentBasis(v));
        }
        let p = complete_basis(&s);
        let inv = p.try_inverse().ok_or(AnalysisError::DependentBasis(v))?;
        g.insert(v, inv);
    }
    Ok(GaugeTransform::new(g)?)
}

#[derive(Clone, Debug, PartialEq)]
pub enum StructureGroup {
    /// `[[A, 0], [0, B]]` with a `k × k` block `A`.
    BlockDiagonal(usize),
    /// `[[I_k, *], [0, *]]`.
    BlockUpperUnit(usize),
    /// Transports preserve the given fiber metric.
    Orthogonal(Metric),
}

/// First edge whose transport leaves the given subgroup.
pub fn verify_structure_group(
    bundle: &Bundle,
    group: &StructureGroup,
    tol: &Tolerance,
) -> Result<Verdict, AnalysisError> {
    let n = bundle.uniform_rank().ok_or(AnalysisError::NonUniformRank)?;
    let k = match group {
        StructureGroup::Orthogonal(m) => return Ok(is_metric_compatible(bundle, m, tol)?),
        StructureGroup::BlockDiagonal(k) | StructureGroup::BlockUpperUnit(k) => *k,
    };
    if k > n {
        return Err(AnalysisError::InvalidBlock { k, n });
    }
    for (&(i, j), u) in bundle.stored_transports() {
        let lower = u.view((k, 0), (n - k, k));
        let mut residual = lower.amax();
        match group {
            StructureGroup::BlockDiagonal(_) => {
                residual = residual.max(u.view((0, k), (k, n - k)).amax());
            }
            StructureGroup::BlockUpperUnit(_) => {
                let top = u.view((0, 0), (k, k)).into_owned();
                residual = residual.max(identity_residual(&top));
            }
            StructureGroup::Orthogonal(_) => unreachable!(),
        }
        if residual > tol.abs {
            return Ok(Verdict::Violation {
                at: SimplexKey::edge(i, j),
                residual,
            });
        }
    }
    Ok(Verdict::Pass)
}

/// Largest `|U_ij s_j − s_i|` for every section in the basis.
pub fn basis_residual(basis: &ParallelBasis) -> f64 {
    basis
        .sections()
        .iter()
        .map(|s| parallel_residual(basis.bundle(), s))
        .fold(0.0, f64::max)
}
