//! Discrete vector bundles with connection, gauge transformations, bundle maps
//! and fiber metrics.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::complex::{Path, SimplexKey, SimplicialComplex, SimplicialMap, Vertex};
use crate::linalg::is_invertible;
use crate::tolerance::{max_abs_diff, Tolerance};
use crate::Verdict;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BundleError {
    #[error("no fiber dimension for vertex {0}")]
    MissingFiber(Vertex),
    #[error("fiber at vertex {0} has dimension 0")]
    ZeroFiber(Vertex),
    #[error("fiber given for vertex {0}, which is not in the complex")]
    UnknownVertex(Vertex),
    #[error("no transport for edge [{0},{1}]")]
    MissingEdge(Vertex, Vertex),
    #[error("transport keyed [{0},{1}] is not an edge of the complex")]
    UnknownEdge(Vertex, Vertex),
    #[error("[{0},{1}] is not an edge")]
    NotAnEdge(Vertex, Vertex),
    #[error("matrix at {at} has shape {actual:?}, expected {expected:?}")]
    ShapeMismatch {
        at: String,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("matrix at {0} is singular")]
    Singular(String),
    #[error("path is not a loop: starts at {start}, ends at {end}")]
    NotALoop { start: Vertex, end: Vertex },
    #[error("bundles live over different complexes")]
    BaseMismatch,
    #[error("metric matrix at vertex {0} is not symmetric")]
    NotSymmetric(Vertex),
    #[error("metric matrix at vertex {0} is not positive definite")]
    NotPositiveDefinite(Vertex),
    #[error("bundle map is not valid on edge {0}")]
    InvalidBundleMap(SimplexKey),
}

/// Fiber dimension per vertex plus invertible transports per edge.
///
/// `forward[(i, j)]` with `i < j` holds `U_ij : E_j → E_i`; `backward[(i, j)]`
/// holds `U_ji`, its inverse, computed once.
#[derive(Clone, Debug, PartialEq)]
pub struct Bundle {
    complex: Arc<SimplicialComplex>,
    dims: BTreeMap<Vertex, usize>,
    forward: BTreeMap<(Vertex, Vertex), DMatrix<f64>>,
    backward: BTreeMap<(Vertex, Vertex), DMatrix<f64>>,
}

fn edge_name(i: Vertex, j: Vertex) -> String {
    format!("edge [{i},{j}]")
}

impl Bundle {
    /// Validates the data and precomputes inverses. `transports` is keyed by
    /// `(i, j)` with `i < j` and holds `U_ij` of shape `dim(i) × dim(j)`.
    pub fn new(
        complex: Arc<SimplicialComplex>,
        dims: BTreeMap<Vertex, usize>,
        transports: BTreeMap<(Vertex, Vertex), DMatrix<f64>>,
    ) -> Result<Self, BundleError> {
        for &v in dims.keys() {
            if !complex.has_vertex(v) {
                return Err(BundleError::UnknownVertex(v));
            }
        }
        for v in complex.vertices() {
            match dims.get(&v) {
                None => return Err(BundleError::MissingFiber(v)),
                Some(0) => return Err(BundleError::ZeroFiber(v)),
                Some(_) => {}
            }
        }
        for &(i, j) in transports.keys() {
            if i >= j || !complex.has_edge(i, j) {
                return Err(BundleError::UnknownEdge(i, j));
            }
        }
        let mut backward = BTreeMap::new();
        for (i, j) in complex.edges() {
            let u = transports
                .get(&(i, j))
                .ok_or(BundleError::MissingEdge(i, j))?;
            let expected = (dims[&i], dims[&j]);
            if u.shape() != expected {
                return Err(BundleError::ShapeMismatch {
                    at: edge_name(i, j),
                    expected,
                    actual: u.shape(),
                });
            }
            if !is_invertible(u) {
                return Err(BundleError::Singular(edge_name(i, j)));
            }
            let inv = u
                .clone()
                .try_inverse()
                .ok_or_else(|| BundleError::Singular(edge_name(i, j)))?;
            backward.insert((i, j), inv);
        }
        Ok(Self {
            complex,
            dims,
            forward: transports,
            backward,
        })
    }

    /// Rank-`n` bundle with identity transports.
    pub fn trivial(complex: Arc<SimplicialComplex>, n: usize) -> Self {
        let dims = complex.vertices().map(|v| (v, n)).collect();
        let forward: BTreeMap<_, _> = complex
            .edges()
            .map(|e| (e, DMatrix::identity(n, n)))
            .collect();
        let backward = forward.clone();
        Self {
            complex,
            dims,
            forward,
            backward,
        }
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn dim(&self, v: Vertex) -> usize {
        self.dims[&v]
    }

    pub fn dims(&self) -> &BTreeMap<Vertex, usize> {
        &self.dims
    }

    /// The common fiber dimension, if all fibers agree.
    pub fn uniform_rank(&self) -> Option<usize> {
        let mut it = self.dims.values();
        let first = *it.next()?;
        it.all(|&d| d == first).then_some(first)
    }

    /// Stored transports `U_ij` with `i < j`.
    pub fn stored_transports(&self) -> &BTreeMap<(Vertex, Vertex), DMatrix<f64>> {
        &self.forward
    }

    /// `U_ij : E_j → E_i` for an edge `{i, j}`.
    pub fn transport(&self, i: Vertex, j: Vertex) -> Result<&DMatrix<f64>, BundleError> {
        let found = if i < j {
            self.forward.get(&(i, j))
        } else {
            self.backward.get(&(j, i))
        };
        found.ok_or(BundleError::NotAnEdge(i, j))
    }

    /// Like [`Bundle::transport`] but returns the identity when `i == j`.
    pub fn transport_or_identity(&self, i: Vertex, j: Vertex) -> Result<DMatrix<f64>, BundleError> {
        if i == j {
            Ok(DMatrix::identity(self.dim(i), self.dim(i)))
        } else {
            self.transport(i, j).cloned()
        }
    }

    /// `U_ij · v`, or `v` itself when `i == j`.
    pub fn move_vector(
        &self,
        i: Vertex,
        j: Vertex,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>, BundleError> {
        if i == j {
            Ok(v.clone())
        } else {
            Ok(self.transport(i, j)? * v)
        }
    }

    /// `U_{v0 v1} ⋯ U_{v(k−1) vk}`: maps `E_{vk}` to `E_{v0}`.
    pub fn transport_along(&self, path: &Path) -> Result<DMatrix<f64>, BundleError> {
        let p = path.vertices();
        let mut acc = DMatrix::identity(self.dim(p[0]), self.dim(p[0]));
        for w in p.windows(2) {
            acc *= self.transport(w[0], w[1])?;
        }
        Ok(acc)
    }

    pub fn holonomy(&self, path: &Path) -> Result<DMatrix<f64>, BundleError> {
        if !path.is_loop() {
            return Err(BundleError::NotALoop {
                start: path.start(),
                end: path.end(),
            });
        }
        self.transport_along(path)
    }

    /// Applies `U_ij ↦ g_i U_ij g_j⁻¹` on every edge.
    pub fn apply_gauge(&self, g: &GaugeTransform) -> Result<Bundle, BundleError> {
        g.check_against(self)?;
        let mut forward = BTreeMap::new();
        let mut backward = BTreeMap::new();
        for (&(i, j), u) in &self.forward {
            forward.insert((i, j), &g.g[&i] * u * &g.inv[&j]);
            backward.insert((i, j), &g.g[&j] * &self.backward[&(i, j)] * &g.inv[&i]);
        }
        Ok(Bundle {
            complex: self.complex.clone(),
            dims: self.dims.clone(),
            forward,
            backward,
        })
    }

    /// Fiberwise direct sum with block-diagonal transports.
    pub fn whitney_sum(&self, other: &Bundle) -> Result<Bundle, BundleError> {
        if *self.complex != *other.complex {
            return Err(BundleError::BaseMismatch);
        }
        let dims = self
            .dims
            .iter()
            .map(|(&v, &d)| (v, d + other.dims[&v]))
            .collect();
        let join = |a: &BTreeMap<(Vertex, Vertex), DMatrix<f64>>,
                    b: &BTreeMap<(Vertex, Vertex), DMatrix<f64>>| {
            a.iter()
                .map(|(k, m)| (*k, crate::linalg::block_diag(m, &b[k])))
                .collect()
        };
        Ok(Bundle {
            complex: self.complex.clone(),
            dims,
            forward: join(&self.forward, &other.forward),
            backward: join(&self.backward, &other.backward),
        })
    }

    /// `f*E` over the domain of `f`: fiber `E_{f(i)}` at `i`, transport
    /// `U_{f(i) f(j)}` on `{i, j}`, identity on collapsed edges.
    pub fn pullback(&self, f: &SimplicialMap) -> Result<Bundle, BundleError> {
        if **f.codomain() != *self.complex {
            return Err(BundleError::BaseMismatch);
        }
        let domain = f.domain().clone();
        let dims = domain
            .vertices()
            .map(|v| (v, self.dim(f.apply(v))))
            .collect();
        let mut forward = BTreeMap::new();
        let mut backward = BTreeMap::new();
        for (i, j) in domain.edges() {
            let (a, b) = (f.apply(i), f.apply(j));
            forward.insert((i, j), self.transport_or_identity(a, b)?);
            backward.insert((i, j), self.transport_or_identity(b, a)?);
        }
        Ok(Bundle {
            complex: domain,
            dims,
            forward,
            backward,
        })
    }

    /// Largest elementwise difference between corresponding transports
    /// (infinite if the bundles are not comparable).
    pub fn transport_distance(&self, other: &Bundle) -> f64 {
        if *self.complex != *other.complex || self.dims != other.dims {
            return f64::INFINITY;
        }
        self.forward
            .iter()
            .map(|(k, m)| max_abs_diff(m, &other.forward[k]))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Bundle, tol: &Tolerance) -> bool {
        *self.complex == *other.complex
            && self.dims == other.dims
            && self
                .forward
                .iter()
                .all(|(k, m)| tol.close_mat(m, &other.forward[k]))
    }

    /// First edge whose stored transport and inverse fail `U_ij U_ji = I`.
    pub fn check_involution(&self, tol: &Tolerance) -> Verdict {
        for (&(i, j), u) in &self.forward {
            let prod = u * &self.backward[&(i, j)];
            if !tol.is_identity(&prod) {
                let residual = max_abs_diff(&prod, &DMatrix::identity(prod.nrows(), prod.ncols()));
                return Verdict::Violation {
                    at: SimplexKey::edge(i, j),
                    residual,
                };
            }
        }
        Verdict::Pass
    }
}

/// Invertible change of basis per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    g: BTreeMap<Vertex, DMatrix<f64>>,
    inv: BTreeMap<Vertex, DMatrix<f64>>,
}

impl GaugeTransform {
    pub fn new(g: BTreeMap<Vertex, DMatrix<f64>>) -> Result<Self, BundleError> {
        let mut inv = BTreeMap::new();
        for (&v, m) in &g {
            let at = format!("vertex {v}");
            if !m.is_square() {
                return Err(BundleError::ShapeMismatch {
                    at,
                    expected: (m.nrows(), m.nrows()),
                    actual: m.shape(),
                });
            }
            if !is_invertible(m) {
                return Err(BundleError::Singular(at));
            }
            inv.insert(v, m.clone().try_inverse().ok_or(BundleError::Singular(at))?);
        }
        Ok(Self { g, inv })
    }

    pub fn identity(bundle: &Bundle) -> Self {
        let g: BTreeMap<_, _> = bundle
            .dims()
            .iter()
            .map(|(&v, &d)| (v, DMatrix::identity(d, d)))
            .collect();
        Self { inv: g.clone(), g }
    }

    pub fn at(&self, v: Vertex) -> &DMatrix<f64> {
        &self.g[&v]
    }

    pub fn inverse_at(&self, v: Vertex) -> &DMatrix<f64> {
        &self.inv[&v]
    }

    pub fn matrices(&self) -> &BTreeMap<Vertex, DMatrix<f64>> {
        &self.g
    }

    pub fn inverse(&self) -> GaugeTransform {
        Self {
            g: self.inv.clone(),
            inv: self.g.clone(),
        }
    }

    /// Pointwise product `self · other`: acting by it equals acting by
    /// `other` first, then `self`.
    pub fn compose(&self, other: &GaugeTransform) -> GaugeTransform {
        let g = self.g.iter().map(|(v, m)| (*v, m * &other.g[v])).collect();
        let inv = self
            .inv
            .iter()
            .map(|(v, m)| (*v, &other.inv[v] * m))
            .collect();
        Self { g, inv }
    }

    fn check_against(&self, bundle: &Bundle) -> Result<(), BundleError> {
        for (&v, &d) in bundle.dims() {
            let m = self.g.get(&v).ok_or(BundleError::MissingFiber(v))?;
            if m.shape() != (d, d) {
                return Err(BundleError::ShapeMismatch {
                    at: format!("vertex {v}"),
                    expected: (d, d),
                    actual: m.shape(),
                });
            }
        }
        Ok(())
    }
}

/// Fiberwise linear maps `E_l → E'_{f(l)}` covering a simplicial map.
#[derive(Clone, Debug)]
pub struct BundleMap {
    f: SimplicialMap,
    source: Arc<Bundle>,
    target: Arc<Bundle>,
    maps: BTreeMap<Vertex, DMatrix<f64>>,
}

impl BundleMap {
    /// Checks shapes only; see [`BundleMap::check`] for the commuting condition.
    pub fn new(
        f: SimplicialMap,
        source: Arc<Bundle>,
        target: Arc<Bundle>,
        maps: BTreeMap<Vertex, DMatrix<f64>>,
    ) -> Result<Self, BundleError> {
        if **f.domain() != **source.complex() || **f.codomain() != **target.complex() {
            return Err(BundleError::BaseMismatch);
        }
        for v in f.domain().vertices() {
            let m = maps.get(&v).ok_or(BundleError::MissingFiber(v))?;
            let expected = (target.dim(f.apply(v)), source.dim(v));
            if m.shape() != expected {
                return Err(BundleError::ShapeMismatch {
                    at: format!("vertex {v}"),
                    expected,
                    actual: m.shape(),
                });
            }
        }
        Ok(Self {
            f,
            source,
            target,
            maps,
        })
    }

    /// A gauge transformation viewed as a map `E → g·E` over the identity.
    pub fn from_gauge(bundle: Arc<Bundle>, g: &GaugeTransform) -> Result<Self, BundleError> {
        let target = Arc::new(bundle.apply_gauge(g)?);
        let f = SimplicialMap::identity(bundle.complex().clone());
        Self::new(f, bundle, target, g.matrices().clone())
    }

    /// The canonical map `f*E → E` (identity on fibers).
    pub fn canonical_pullback(f: &SimplicialMap, bundle: Arc<Bundle>) -> Result<Self, BundleError> {
        let pulled = Arc::new(bundle.pullback(f)?);
        let maps = pulled
            .dims()
            .iter()
            .map(|(&v, &d)| (v, DMatrix::identity(d, d)))
            .collect();
        Self::new(f.clone(), pulled, bundle, maps)
    }

    pub fn simplicial_map(&self) -> &SimplicialMap {
        &self.f
    }

    pub fn source(&self) -> &Arc<Bundle> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Bundle> {
        &self.target
    }

    pub fn maps(&self) -> &BTreeMap<Vertex, DMatrix<f64>> {
        &self.maps
    }

    /// First domain edge `{i < j}` where `U'_{f(i) f(j)} f̃_j ≠ f̃_i U_ij`.
    pub fn check(&self, tol: &Tolerance) -> Verdict {
        for (i, j) in self.source.complex().edges() {
            let (a, b) = (self.f.apply(i), self.f.apply(j));
            let u_target = self
                .target
                .transport_or_identity(a, b)
                .expect("simplicial map sends edges to edges or vertices");
            let lhs = u_target * &self.maps[&j];
            let rhs = &self.maps[&i] * self.source.transport(i, j).expect("edge");
            if !tol.close_mat(&lhs, &rhs) {
                return Verdict::Violation {
                    at: SimplexKey::edge(i, j),
                    residual: max_abs_diff(&lhs, &rhs),
                };
            }
        }
        Verdict::Pass
    }

    /// `then ∘ self`, covering the composite simplicial map.
    pub fn then(&self, then: &BundleMap) -> Result<BundleMap, BundleError> {
        if *self.target != *then.source {
            return Err(BundleError::BaseMismatch);
        }
        let maps = self
            .maps
            .iter()
            .map(|(&v, m)| (v, &then.maps[&self.f.apply(v)] * m))
            .collect();
        BundleMap::new(
            self.f.then(&then.f),
            self.source.clone(),
            then.target.clone(),
            maps,
        )
    }

    /// The unique map over the identity into `f*E` through which `self`
    /// factors. Fails when `self` does not satisfy [`BundleMap::check`].
    pub fn factor_through_pullback(&self, tol: &Tolerance) -> Result<BundleMap, BundleError> {
        if let Verdict::Violation { at, .. } = self.check(tol) {
            return Err(BundleError::InvalidBundleMap(at));
        }
        let pulled = Arc::new(self.target.pullback(&self.f)?);
        let id = SimplicialMap::identity(self.source.complex().clone());
        BundleMap::new(id, self.source.clone(), pulled, self.maps.clone())
    }
}

/// Symmetric positive definite Gram matrix per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    gram: BTreeMap<Vertex, DMatrix<f64>>,
}

impl Metric {
    pub fn new(gram: BTreeMap<Vertex, DMatrix<f64>>, tol: &Tolerance) -> Result<Self, BundleError> {
        for (&v, g) in &gram {
            if !g.is_square() {
                return Err(BundleError::ShapeMismatch {
                    at: format!("vertex {v}"),
                    expected: (g.nrows(), g.nrows()),
                    actual: g.shape(),
                });
            }
            if !tol.close_mat(g, &g.transpose()) {
                return Err(BundleError::NotSymmetric(v));
            }
            if g.clone().cholesky().is_none() {
                return Err(BundleError::NotPositiveDefinite(v));
            }
        }
        Ok(Self { gram })
    }

    pub fn euclidean(bundle: &Bundle) -> Self {
        Self {
            gram: bundle
                .dims()
                .iter()
                .map(|(&v, &d)| (v, DMatrix::identity(d, d)))
                .collect(),
        }
    }

    pub fn at(&self, v: Vertex) -> &DMatrix<f64> {
        &self.gram[&v]
    }

    pub fn grams(&self) -> &BTreeMap<Vertex, DMatrix<f64>> {
        &self.gram
    }

    /// Errors unless every fiber of `bundle` has a Gram matrix of matching size.
    pub fn check_shapes(&self, bundle: &Bundle) -> Result<(), BundleError> {
        for (&v, &d) in bundle.dims() {
            let g = self.gram.get(&v).ok_or(BundleError::MissingFiber(v))?;
            if g.shape() != (d, d) {
                return Err(BundleError::ShapeMismatch {
                    at: format!("vertex {v}"),
                    expected: (d, d),
                    actual: g.shape(),
                });
            }
        }
        Ok(())
    }
}

/// First edge `{i < j}` where `U_ijᵀ G_i U_ij ≠ G_j`.
pub fn is_metric_compatible(
    bundle: &Bundle,
    metric: &Metric,
    tol: &Tolerance,
) -> Result<Verdict, BundleError> {
    metric.check_shapes(bundle)?;
    for (&(i, j), u) in bundle.stored_transports() {
        let pulled = u.transpose() * metric.at(i) * u;
        if !tol.close_mat(&pulled, metric.at(j)) {
            return Ok(Verdict::Violation {
                at: SimplexKey::edge(i, j),
                residual: max_abs_diff(&pulled, metric.at(j)),
            });
        }
    }
    Ok(Verdict::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation;

    fn circle() -> Arc<SimplicialComplex> {
        Arc::new(SimplicialComplex::from_cells([[0, 1], [1, 2], [0, 2]]).unwrap())
    }

    fn scalar(x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, x)
    }

    fn rank1(x: Arc<SimplicialComplex>, u: f64, v: f64, w: f64) -> Bundle {
        let dims = x.vertices().map(|i| (i, 1)).collect();
        let t = BTreeMap::from([
            ((0, 1), scalar(u)),
            ((1, 2), scalar(v)),
            ((0, 2), scalar(w)),
        ]);
        Bundle::new(x, dims, t).unwrap()
    }

    #[test]
    fn validation_errors() {
        let x = circle();
        let dims: BTreeMap<_, _> = x.vertices().map(|i| (i, 1)).collect();
        let mut t = BTreeMap::from([((0, 1), scalar(2.0)), ((1, 2), scalar(3.0))]);
        assert_eq!(
            Bundle::new(x.clone(), dims.clone(), t.clone()),
            Err(BundleError::MissingEdge(0, 2))
        );
        t.insert((0, 2), scalar(0.0));
        assert!(matches!(
            Bundle::new(x.clone(), dims.clone(), t.clone()),
            Err(BundleError::Singular(_))
        ));
        t.insert((0, 2), DMatrix::identity(2, 2));
        assert!(matches!(
            Bundle::new(x.clone(), dims.clone(), t.clone()),
            Err(BundleError::ShapeMismatch { .. })
        ));
        t.insert((0, 2), scalar(5.0));
        t.insert((2, 0), scalar(5.0));
        assert_eq!(Bundle::new(x, dims, t), Err(BundleError::UnknownEdge(2, 0)));
    }

    #[test]
    fn transport_and_inverse() {
        let e = rank1(circle(), 2.0, 3.0, 5.0);
        assert_eq!(e.transport(0, 1).unwrap()[(0, 0)], 2.0);
        assert_eq!(e.transport(1, 0).unwrap()[(0, 0)], 0.5);
        assert_eq!(e.transport(0, 0), Err(BundleError::NotAnEdge(0, 0)));
        let p = Path::new(e.complex(), vec![0, 1, 2, 0]).unwrap();
        assert!((e.transport_along(&p).unwrap()[(0, 0)] - 1.2).abs() < 1e-15);
        let single = Path::new(e.complex(), vec![1]).unwrap();
        assert_eq!(e.transport_along(&single).unwrap(), scalar(1.0));
    }

    #[test]
    fn holonomy_of_circle() {
        let e = rank1(circle(), 2.0, 3.0, 6.0);
        let p = Path::new(e.complex(), vec![0, 1, 2, 0]).unwrap();
        assert!((e.holonomy(&p).unwrap()[(0, 0)] - 1.0).abs() < 1e-15);
        let open = Path::new(e.complex(), vec![0, 1]).unwrap();
        assert_eq!(
            e.holonomy(&open),
            Err(BundleError::NotALoop { start: 0, end: 1 })
        );
    }

    #[test]
    fn scalar_gauge_example() {
        let e = rank1(circle(), 2.0, 3.0, 5.0);
        let g = GaugeTransform::new(BTreeMap::from([
            (0, scalar(10.0)),
            (1, scalar(1.0)),
            (2, scalar(1.0)),
        ]))
        .unwrap();
        let h = e.apply_gauge(&g).unwrap();
        assert_eq!(h.transport(0, 1).unwrap()[(0, 0)], 20.0);
        let back = h.apply_gauge(&g.inverse()).unwrap();
        assert!(back.approx_eq(&e, &Tolerance::default()));
        assert!(e.apply_gauge(&GaugeTransform::identity(&e)).unwrap() == e);
    }

    #[test]
    fn whitney_sum_blocks() {
        let a = rank1(circle(), 2.0, 2.0, 2.0);
        let b = rank1(circle(), 3.0, 3.0, 3.0);
        let s = a.whitney_sum(&b).unwrap();
        assert_eq!(
            s.transport(0, 1).unwrap(),
            &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0])
        );
        let t = Bundle::trivial(circle(), 1)
            .whitney_sum(&Bundle::trivial(circle(), 2))
            .unwrap();
        assert_eq!(t, Bundle::trivial(circle(), 3));
    }

    #[test]
    fn pullback_example_circle_to_edge() {
        let edge = Arc::new(SimplicialComplex::from_cells([[0, 1]]).unwrap());
        let dims = BTreeMap::from([(0, 1), (1, 1)]);
        let e = Bundle::new(edge.clone(), dims, BTreeMap::from([((0, 1), scalar(2.0))])).unwrap();
        let f =
            SimplicialMap::new(circle(), edge, BTreeMap::from([(0, 0), (1, 1), (2, 0)])).unwrap();
        let p = e.pullback(&f).unwrap();
        // u0u1 -> v0v1, u1u2 -> v1v0, u0u2 collapsed
        assert_eq!(p.transport(0, 1).unwrap()[(0, 0)], 2.0);
        assert_eq!(p.transport(1, 2).unwrap()[(0, 0)], 0.5);
        assert_eq!(p.transport(0, 2).unwrap()[(0, 0)], 1.0);
        assert!(p.check_involution(&Tolerance::default()).is_pass());
    }

    #[test]
    fn bundle_maps() {
        let tol = Tolerance::default();
        let e = Arc::new(rank1(circle(), 2.0, 3.0, 5.0));
        let g = GaugeTransform::new(BTreeMap::from([
            (0, scalar(10.0)),
            (1, scalar(-1.0)),
            (2, scalar(0.5)),
        ]))
        .unwrap();
        let m = BundleMap::from_gauge(e.clone(), &g).unwrap();
        assert!(m.check(&tol).is_pass());

        let mut maps = m.maps().clone();
        maps.insert(1, scalar(-1.001));
        let bad = BundleMap::new(
            m.simplicial_map().clone(),
            e.clone(),
            m.target().clone(),
            maps,
        )
        .unwrap();
        assert!(matches!(bad.check(&tol), Verdict::Violation { .. }));
        assert!(bad.factor_through_pullback(&tol).is_err());

        let id = SimplicialMap::identity(e.complex().clone());
        let c = BundleMap::canonical_pullback(&id, e.clone()).unwrap();
        assert!(c.check(&tol).is_pass());
        let factored = c.factor_through_pullback(&tol).unwrap();
        assert!(factored.maps().values().all(|m| tol.is_identity(m)));
    }

    #[test]
    fn metric_compatibility() {
        let tol = Tolerance::default();
        let x = circle();
        let triv = Bundle::trivial(x.clone(), 2);
        assert!(is_metric_compatible(&triv, &Metric::euclidean(&triv), &tol)
            .unwrap()
            .is_pass());
        let e = rank1(x.clone(), 2.0, 1.0, 1.0);
        assert_eq!(
            is_metric_compatible(&e, &Metric::euclidean(&e), &tol).unwrap(),
            Verdict::Violation {
                at: SimplexKey::edge(0, 1),
                residual: 3.0
            }
        );
        let dims = x.vertices().map(|i| (i, 2)).collect();
        let t = BTreeMap::from([
            ((0, 1), rotation(0.3)),
            ((1, 2), rotation(-1.1)),
            ((0, 2), rotation(2.0)),
        ]);
        let r = Bundle::new(x, dims, t).unwrap();
        assert!(is_metric_compatible(&r, &Metric::euclidean(&r), &tol)
            .unwrap()
            .is_pass());
    }

    #[test]
    fn metric_validation() {
        let tol = Tolerance::default();
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert_eq!(
            Metric::new(BTreeMap::from([(0, asym)]), &tol),
            Err(BundleError::NotSymmetric(0))
        );
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(
            Metric::new(BTreeMap::from([(0, indef)]), &tol),
            Err(BundleError::NotPositiveDefinite(0))
        );
    }
}
