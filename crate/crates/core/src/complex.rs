//! Oriented abstract simplicial complexes and the combinatorics built on them.
//!
//! Simplices are stored by their strictly increasing vertex list
//! ([`SimplexKey`]). Any other ordering of the same vertices is an oriented
//! simplex that differs from the canonical one by the parity of the sorting
//! permutation, see [`canonicalize`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::Verdict;

pub type Vertex = usize;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("cell {cell:?} repeats a vertex")]
    DuplicateVertex { cell: Vec<Vertex> },
    #[error("empty cell")]
    EmptyCell,
    #[error("vertex list {0:?} is not strictly increasing")]
    NotIncreasing(Vec<Vertex>),
    #[error("ordering {0:?} repeats a vertex")]
    DegenerateOrdering(Vec<Vertex>),
    #[error("vertex {0} is not in the complex")]
    UnknownVertex(Vertex),
    #[error("[{0},{1}] is not an edge of the complex")]
    NotAnEdge(Vertex, Vertex),
    #[error("{0} is not a simplex of the complex")]
    NotASimplex(SimplexKey),
    #[error("complex is disconnected: vertices {a} and {b} lie in different components")]
    Disconnected { a: Vertex, b: Vertex },
    #[error("complex has no vertices")]
    Empty,
    #[error("invalid elementary homotopy: {0}")]
    InvalidMove(String),
    #[error("vertex map sends {simplex} onto a non-simplex")]
    NotSimplicial { simplex: SimplexKey },
    #[error("vertex map does not cover domain vertex {0}")]
    IncompleteVertexMap(Vertex),
    #[error("paths do not meet: {0} != {1}")]
    PathMismatch(Vertex, Vertex),
}

/// Canonical (strictly increasing) vertex list of a simplex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimplexKey(Vec<Vertex>);

impl SimplexKey {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self, ComplexError> {
        if vertices.is_empty() {
            return Err(ComplexError::EmptyCell);
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ComplexError::NotIncreasing(vertices));
        }
        Ok(Self(vertices))
    }

    pub fn vertex(v: Vertex) -> Self {
        Self(vec![v])
    }

    pub fn edge(a: Vertex, b: Vertex) -> Self {
        assert_ne!(a, b, "degenerate edge");
        Self(vec![a.min(b), a.max(b)])
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn lowest(&self) -> Vertex {
        self.0[0]
    }

    pub fn highest(&self) -> Vertex {
        self.0[self.0.len() - 1]
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// The facet obtained by dropping the vertex at position `i`.
    pub fn facet(&self, i: usize) -> SimplexKey {
        let mut v = self.0.clone();
        v.remove(i);
        SimplexKey(v)
    }

    /// Contiguous face `[v_from … v_to]` (inclusive positions).
    pub fn slice(&self, from: usize, to: usize) -> SimplexKey {
        SimplexKey(self.0[from..=to].to_vec())
    }

    /// All faces of dimension `k`, in canonical order.
    pub fn faces(&self, k: usize) -> Vec<SimplexKey> {
        let mut out = Vec::new();
        let n = self.0.len();
        if k + 1 > n {
            return out;
        }
        let mut idx: Vec<usize> = (0..=k).collect();
        loop {
            out.push(SimplexKey(idx.iter().map(|&i| self.0[i]).collect()));
            // next combination
            let mut i = k as isize;
            while i >= 0 && idx[i as usize] == n - (k + 1) + i as usize {
                i -= 1;
            }
            if i < 0 {
                return out;
            }
            idx[i as usize] += 1;
            for j in (i as usize + 1)..=k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
}

impl fmt::Display for SimplexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn compose(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Parity of the permutation sorting `seq` (counts inversions).
    pub fn of_sequence<T: Ord>(seq: &[T]) -> Parity {
        let mut inversions = 0usize;
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                if seq[i] > seq[j] {
                    inversions += 1;
                }
            }
        }
        if inversions.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Sorts an ordering into its canonical key and reports the parity of the
/// sorting permutation.
pub fn canonicalize(ordering: &[Vertex]) -> Result<(SimplexKey, Parity), ComplexError> {
    if ordering.is_empty() {
        return Err(ComplexError::EmptyCell);
    }
    let mut sorted = ordering.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(ComplexError::DegenerateOrdering(ordering.to_vec()));
    }
    Ok((SimplexKey(sorted), Parity::of_sequence(ordering)))
}

/// Finite abstract simplicial complex, closed under taking faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertices: BTreeSet<Vertex>,
    simplices: Vec<BTreeSet<SimplexKey>>,
    adjacency: BTreeMap<Vertex, BTreeSet<Vertex>>,
}

impl SimplicialComplex {
    /// Closure of the given cells under taking faces.
    pub fn from_cells<I, C>(cells: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = C>,
        C: AsRef<[Vertex]>,
    {
        let mut simplices: Vec<BTreeSet<SimplexKey>> = Vec::new();
        for cell in cells {
            let cell = cell.as_ref();
            let (key, _) = canonicalize(cell).map_err(|e| match e {
                ComplexError::DegenerateOrdering(_) => ComplexError::DuplicateVertex {
                    cell: cell.to_vec(),
                },
                other => other,
            })?;
            if simplices.len() <= key.dim() {
                simplices.resize_with(key.dim() + 1, BTreeSet::new);
            }
            if simplices[key.dim()].contains(&key) {
                continue;
            }
            for (k, level) in simplices.iter_mut().enumerate().take(key.dim() + 1) {
                level.extend(key.faces(k));
            }
        }
        let vertices: BTreeSet<Vertex> = simplices
            .first()
            .map(|s| s.iter().map(|k| k.lowest()).collect())
            .unwrap_or_default();
        let mut adjacency: BTreeMap<Vertex, BTreeSet<Vertex>> =
            vertices.iter().map(|&v| (v, BTreeSet::new())).collect();
        if let Some(edges) = simplices.get(1) {
            for e in edges {
                let (a, b) = (e.lowest(), e.highest());
                adjacency.entry(a).or_default().insert(b);
                adjacency.entry(b).or_default().insert(a);
            }
        }
        Ok(Self {
            vertices,
            simplices,
            adjacency,
        })
    }

    /// The full simplex on `n` vertices `0..n`.
    pub fn full_simplex(n: usize) -> Self {
        Self::from_cells([(0..n).collect::<Vec<_>>()]).expect("distinct vertices")
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.vertices.iter().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn has_vertex(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Largest simplex dimension (0 for an empty complex).
    pub fn dimension(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    pub fn simplices(&self, k: usize) -> impl Iterator<Item = &SimplexKey> + '_ {
        self.simplices.get(k).into_iter().flatten()
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, BTreeSet::len)
    }

    pub fn total_count(&self) -> usize {
        self.simplices.iter().map(BTreeSet::len).sum()
    }

    pub fn contains(&self, key: &SimplexKey) -> bool {
        self.simplices
            .get(key.dim())
            .is_some_and(|s| s.contains(key))
    }

    /// Whether the (unordered) vertex set spans a simplex.
    pub fn spans_simplex(&self, vertices: &[Vertex]) -> bool {
        match canonicalize(vertices) {
            Ok((key, _)) => self.contains(&key),
            Err(_) => false,
        }
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        a != b && self.adjacency.get(&a).is_some_and(|n| n.contains(&b))
    }

    /// Edges `(i, j)` with `i < j`, in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.simplices(1).map(|e| (e.lowest(), e.highest()))
    }

    /// Neighbours of `v` in ascending order.
    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adjacency.get(&v).into_iter().flatten().copied()
    }

    /// Simplices that are not a proper face of another simplex.
    pub fn maximal_simplices(&self) -> Vec<SimplexKey> {
        let mut out = Vec::new();
        for k in 0..self.simplices.len() {
            for s in &self.simplices[k] {
                let covered = self.simplices.get(k + 1).is_some_and(|up| {
                    up.iter()
                        .any(|t| s.vertices().iter().all(|&v| t.contains(v)))
                });
                if !covered {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    /// Connected components of the 1-skeleton, each sorted, ordered by their
    /// smallest vertex.
    pub fn components(&self) -> Vec<BTreeSet<Vertex>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in &self.vertices {
            if seen.contains(&start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(v) = queue.pop_front() {
                comp.insert(v);
                for w in self.neighbors(v) {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Errors unless the complex is non-empty and connected.
    pub fn require_connected(&self) -> Result<(), ComplexError> {
        let comps = self.components();
        match comps.len() {
            0 => Err(ComplexError::Empty),
            1 => Ok(()),
            _ => Err(ComplexError::Disconnected {
                a: *comps[0].first().unwrap(),
                b: *comps[1].first().unwrap(),
            }),
        }
    }

    /// The subcomplex of simplices of dimension at most `k`.
    pub fn skeleton(&self, k: usize) -> SimplicialComplex {
        let cells: Vec<Vec<Vertex>> = (0..=k.min(self.dimension()))
            .flat_map(|d| self.simplices(d).map(|s| s.vertices().to_vec()))
            .collect();
        SimplicialComplex::from_cells(cells).expect("faces of a valid complex")
    }
}

/// Vertex map between two complexes that sends simplices onto simplices
/// (collapses allowed).
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialMap {
    domain: Arc<SimplicialComplex>,
    codomain: Arc<SimplicialComplex>,
    vertex_map: BTreeMap<Vertex, Vertex>,
}

impl SimplicialMap {
    /// Validates totality and image vertices but not the simplex condition;
    /// see [`SimplicialMap::check`].
    pub fn from_parts(
        domain: Arc<SimplicialComplex>,
        codomain: Arc<SimplicialComplex>,
        vertex_map: BTreeMap<Vertex, Vertex>,
    ) -> Result<Self, ComplexError> {
        for v in domain.vertices() {
            let image = *vertex_map
                .get(&v)
                .ok_or(ComplexError::IncompleteVertexMap(v))?;
            if !codomain.has_vertex(image) {
                return Err(ComplexError::UnknownVertex(image));
            }
        }
        Ok(Self {
            domain,
            codomain,
            vertex_map,
        })
    }

    /// A validated simplicial map.
    pub fn new(
        domain: Arc<SimplicialComplex>,
        codomain: Arc<SimplicialComplex>,
        vertex_map: BTreeMap<Vertex, Vertex>,
    ) -> Result<Self, ComplexError> {
        let f = Self::from_parts(domain, codomain, vertex_map)?;
        match f.check() {
            Verdict::Pass => Ok(f),
            Verdict::Violation { at, .. } => Err(ComplexError::NotSimplicial { simplex: at }),
        }
    }

    pub fn identity(x: Arc<SimplicialComplex>) -> Self {
        let vertex_map = x.vertices().map(|v| (v, v)).collect();
        Self {
            domain: x.clone(),
            codomain: x,
            vertex_map,
        }
    }

    /// Finds the first domain simplex (by dimension, then canonical order)
    /// whose image vertex set is not a codomain simplex.
    pub fn check(&self) -> Verdict {
        for k in 0..=self.domain.dimension() {
            for s in self.domain.simplices(k) {
                let mut image = self.image(s.vertices());
                image.sort_unstable();
                image.dedup();
                if !self.codomain.spans_simplex(&image) {
                    return Verdict::Violation {
                        at: s.clone(),
                        residual: 0.0,
                    };
                }
            }
        }
        Verdict::Pass
    }

    pub fn domain(&self) -> &Arc<SimplicialComplex> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<SimplicialComplex> {
        &self.codomain
    }

    pub fn vertex_map(&self) -> &BTreeMap<Vertex, Vertex> {
        &self.vertex_map
    }

    /// Image of a domain vertex. Panics on vertices outside the domain.
    pub fn apply(&self, v: Vertex) -> Vertex {
        self.vertex_map[&v]
    }

    /// Image of an ordering, position by position (may repeat vertices).
    pub fn image(&self, ordering: &[Vertex]) -> Vec<Vertex> {
        ordering.iter().map(|&v| self.apply(v)).collect()
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &SimplicialMap) -> SimplicialMap {
        let vertex_map = self
            .vertex_map
            .iter()
            .map(|(&v, &w)| (v, then.apply(w)))
            .collect();
        SimplicialMap {
            domain: self.domain.clone(),
            codomain: then.codomain.clone(),
            vertex_map,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.domain == self.codomain && self.vertex_map.iter().all(|(a, b)| a == b)
    }
}

/// Edge path `v_0, …, v_k`; a single vertex is the constant path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path(Vec<Vertex>);

impl Path {
    pub fn new(x: &SimplicialComplex, vertices: Vec<Vertex>) -> Result<Self, ComplexError> {
        let first = *vertices.first().ok_or(ComplexError::EmptyCell)?;
        if !x.has_vertex(first) {
            return Err(ComplexError::UnknownVertex(first));
        }
        for w in vertices.windows(2) {
            if !x.has_edge(w[0], w[1]) {
                return Err(ComplexError::NotAnEdge(w[0], w[1]));
            }
        }
        Ok(Self(vertices))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn start(&self) -> Vertex {
        self.0[0]
    }

    pub fn end(&self) -> Vertex {
        self.0[self.0.len() - 1]
    }

    pub fn num_edges(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_loop(&self) -> bool {
        self.start() == self.end()
    }

    /// `self` followed by `other`; the end of `self` must be the start of `other`.
    pub fn concat(&self, other: &Path) -> Result<Path, ComplexError> {
        if self.end() != other.start() {
            return Err(ComplexError::PathMismatch(self.end(), other.start()));
        }
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0[1..]);
        Ok(Path(v))
    }

    pub fn reversed(&self) -> Path {
        Path(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("→"))
    }
}

/// Rooted spanning tree of the 1-skeleton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    root: Vertex,
    parent: BTreeMap<Vertex, Option<Vertex>>,
    /// Vertices in discovery order.
    order: Vec<Vertex>,
}

impl SpanningTree {
    /// Breadth-first tree from the smallest vertex id, visiting neighbours in
    /// ascending order.
    pub fn bfs(x: &SimplicialComplex) -> Result<Self, ComplexError> {
        x.require_connected()?;
        let root = x.vertices().next().expect("non-empty");
        let mut parent = BTreeMap::from([(root, None)]);
        let mut order = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for w in x.neighbors(v) {
                if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(w) {
                    e.insert(Some(v));
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        Ok(Self {
            root,
            parent,
            order,
        })
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent.get(&v).copied().flatten()
    }

    pub fn parents(&self) -> &BTreeMap<Vertex, Option<Vertex>> {
        &self.parent
    }

    /// Vertices in BFS discovery order (root first); every vertex appears
    /// after its parent.
    pub fn order(&self) -> &[Vertex] {
        &self.order
    }

    pub fn is_tree_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.parent(a) == Some(b) || self.parent(b) == Some(a)
    }

    /// Tree edges `(child, parent)` in discovery order.
    pub fn tree_edges(&self) -> Vec<(Vertex, Vertex)> {
        self.order
            .iter()
            .filter_map(|&v| self.parent(v).map(|p| (v, p)))
            .collect()
    }

    /// Edges `(i < j)` of `x` outside the tree, in canonical order.
    pub fn non_tree_edges(&self, x: &SimplicialComplex) -> Vec<(Vertex, Vertex)> {
        x.edges()
            .filter(|&(a, b)| !self.is_tree_edge(a, b))
            .collect()
    }

    /// Vertex sequence `root, …, v` along the tree.
    pub fn path_from_root(&self, v: Vertex) -> Vec<Vertex> {
        let mut p = vec![v];
        let mut cur = v;
        while let Some(up) = self.parent(cur) {
            p.push(up);
            cur = up;
        }
        p.reverse();
        p
    }
}

/// Spanning tree by BFS from the smallest vertex; see [`SpanningTree::bfs`].
pub fn spanning_tree(x: &SimplicialComplex) -> Result<SpanningTree, ComplexError> {
    SpanningTree::bfs(x)
}

/// One loop per non-tree edge `{u < v}`: tree path root→u, the edge u→v, then
/// the tree path v→root.
pub fn generator_loops(x: &SimplicialComplex, tree: &SpanningTree) -> Vec<Path> {
    tree.non_tree_edges(x)
        .into_iter()
        .map(|(u, v)| {
            let mut p = tree.path_from_root(u);
            let mut back = tree.path_from_root(v);
            back.reverse();
            p.extend(back);
            Path(p)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomotopyMove {
    /// Insert the vertex between positions `i − 1` and `i`.
    Insert(Vertex),
    /// Remove the vertex at position `i`.
    Delete,
}

/// Elementary simple homotopy across a 2-simplex. Endpoints never move.
pub fn apply_elementary_homotopy(
    x: &SimplicialComplex,
    path: &Path,
    i: usize,
    mv: HomotopyMove,
) -> Result<Path, ComplexError> {
    let p = path.vertices();
    let (a, mid, b) = match mv {
        HomotopyMove::Delete => {
            if i == 0 || i + 1 >= p.len() {
                return Err(ComplexError::InvalidMove(format!(
                    "cannot delete position {i} of a path with {} vertices",
                    p.len()
                )));
            }
            (p[i - 1], p[i], p[i + 1])
        }
        HomotopyMove::Insert(v) => {
            if i == 0 || i >= p.len() {
                return Err(ComplexError::InvalidMove(format!(
                    "cannot insert at position {i} of a path with {} vertices",
                    p.len()
                )));
            }
            (p[i - 1], v, p[i])
        }
    };
    if a == mid || mid == b || a == b || !x.spans_simplex(&[a, mid, b]) {
        return Err(ComplexError::InvalidMove(format!(
            "{a},{mid},{b} do not span a 2-simplex"
        )));
    }
    let mut v = p.to_vec();
    match mv {
        HomotopyMove::Delete => {
            v.remove(i);
        }
        HomotopyMove::Insert(w) => v.insert(i, w),
    }
    Ok(Path(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle() -> SimplicialComplex {
        SimplicialComplex::from_cells([[0, 1], [1, 2], [0, 2]]).unwrap()
    }

    fn triangle() -> SimplicialComplex {
        SimplicialComplex::from_cells([[0, 1, 2]]).unwrap()
    }

    fn tetra_skeleton() -> SimplicialComplex {
        SimplicialComplex::from_cells([[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]).unwrap()
    }

    fn keys(x: &SimplicialComplex) -> Vec<Vec<Vertex>> {
        (0..=x.dimension())
            .flat_map(|k| x.simplices(k).map(|s| s.vertices().to_vec()))
            .collect()
    }

    #[test]
    fn closure_of_triangle() {
        assert_eq!(
            keys(&triangle()),
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
    }

    #[test]
    fn circle_has_no_triangles() {
        let c = circle();
        assert_eq!(c.dimension(), 1);
        assert_eq!(c.count(1), 3);
        assert_eq!(c.count(2), 0);
    }

    #[test]
    fn tetrahedron_has_fifteen_simplices() {
        let t = SimplicialComplex::from_cells([[0, 1, 2, 3]]).unwrap();
        assert_eq!(t.total_count(), (1 << 4) - 1);
    }

    #[test]
    fn duplicate_vertex_rejected() {
        assert_eq!(
            SimplicialComplex::from_cells([[0, 1, 1]]),
            Err(ComplexError::DuplicateVertex {
                cell: vec![0, 1, 1]
            })
        );
    }

    #[test]
    fn cells_are_sorted() {
        let x = SimplicialComplex::from_cells([[2, 0, 1]]).unwrap();
        assert!(x.contains(&SimplexKey::new(vec![0, 1, 2]).unwrap()));
    }

    #[test]
    fn canonicalize_examples() {
        let k = SimplexKey::new(vec![0, 1, 2]).unwrap();
        assert_eq!(canonicalize(&[0, 1, 2]).unwrap(), (k.clone(), Parity::Even));
        assert_eq!(canonicalize(&[1, 0, 2]).unwrap(), (k.clone(), Parity::Odd));
        assert_eq!(canonicalize(&[2, 0, 1]).unwrap(), (k, Parity::Even));
        assert!(matches!(
            canonicalize(&[1, 1]),
            Err(ComplexError::DegenerateOrdering(_))
        ));
    }

    // Parity by counting cycles of the permutation, independent of inversion counting.
    fn parity_by_cycles(perm: &[usize]) -> Parity {
        let mut seen = vec![false; perm.len()];
        let mut transpositions = 0;
        for i in 0..perm.len() {
            if seen[i] {
                continue;
            }
            let mut len = 0;
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                j = perm[j];
                len += 1;
            }
            transpositions += len - 1;
        }
        if transpositions % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn canonicalize_parity_exhaustive_up_to_dim_3() {
        let base = [3usize, 7, 10, 42];
        for n in 1..=4 {
            for perm in permutations(n) {
                let ordering: Vec<Vertex> = perm.iter().map(|&i| base[i]).collect();
                let (key, parity) = canonicalize(&ordering).unwrap();
                assert_eq!(key.vertices(), &base[..n]);
                assert_eq!(parity, parity_by_cycles(&perm), "{ordering:?}");
            }
        }
    }

    #[test]
    fn simplicial_map_checks() {
        let tet = Arc::new(SimplicialComplex::from_cells([[0, 1, 2, 3]]).unwrap());
        let tri = Arc::new(triangle());
        let f = SimplicialMap::new(
            tet.clone(),
            tri.clone(),
            BTreeMap::from([(0, 0), (1, 1), (2, 2), (3, 0)]),
        );
        assert!(f.is_ok());
        assert!(SimplicialMap::identity(tet).check().is_pass());

        // circle onto two disjoint vertices: {f(0), f(1)} is not an edge
        let two_points = Arc::new(SimplicialComplex::from_cells([[0], [1]]).unwrap());
        let g = SimplicialMap::from_parts(
            Arc::new(circle()),
            two_points,
            BTreeMap::from([(0, 0), (1, 1), (2, 0)]),
        )
        .unwrap();
        assert_eq!(
            g.check(),
            Verdict::Violation {
                at: SimplexKey::edge(0, 1),
                residual: 0.0
            }
        );
    }

    #[test]
    fn incomplete_vertex_map() {
        let c = Arc::new(circle());
        let err = SimplicialMap::from_parts(c.clone(), c, BTreeMap::from([(0, 0)]));
        assert_eq!(err, Err(ComplexError::IncompleteVertexMap(1)));
    }

    #[test]
    fn bfs_tree_on_circle() {
        let c = circle();
        let t = spanning_tree(&c).unwrap();
        assert_eq!(t.root(), 0);
        assert_eq!(t.parent(1), Some(0));
        assert_eq!(t.parent(2), Some(0));
        assert_eq!(t.non_tree_edges(&c), vec![(1, 2)]);
        let loops = generator_loops(&c, &t);
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].vertices(), &[0, 1, 2, 0]);
    }

    #[test]
    fn single_edge_tree() {
        let x = SimplicialComplex::from_cells([[0, 1]]).unwrap();
        let t = spanning_tree(&x).unwrap();
        assert_eq!(t.parent(1), Some(0));
        assert!(t.non_tree_edges(&x).is_empty());
        assert!(generator_loops(&x, &t).is_empty());
    }

    #[test]
    fn tetra_skeleton_loops() {
        let x = tetra_skeleton();
        let t = spanning_tree(&x).unwrap();
        assert_eq!(t.tree_edges().len(), 3);
        assert_eq!(t.non_tree_edges(&x).len(), 3);
        let loops = generator_loops(&x, &t);
        assert_eq!(loops.len(), 3);
        for l in &loops {
            assert!(l.is_loop());
            assert!(l.vertices().len() <= 4);
            assert!(Path::new(&x, l.vertices().to_vec()).is_ok());
        }
    }

    #[test]
    fn disconnected_tree_error() {
        let x = SimplicialComplex::from_cells([vec![0, 1], vec![5, 6]]).unwrap();
        assert_eq!(
            spanning_tree(&x),
            Err(ComplexError::Disconnected { a: 0, b: 5 })
        );
    }

    #[test]
    fn homotopy_moves() {
        let x = triangle();
        let p = Path::new(&x, vec![0, 1, 2]).unwrap();
        let q = apply_elementary_homotopy(&x, &p, 1, HomotopyMove::Delete).unwrap();
        assert_eq!(q.vertices(), &[0, 2]);
        let r = apply_elementary_homotopy(&x, &q, 1, HomotopyMove::Insert(1)).unwrap();
        assert_eq!(r, p);

        let c = circle();
        let p = Path::new(&c, vec![0, 1, 2]).unwrap();
        assert!(matches!(
            apply_elementary_homotopy(&c, &p, 1, HomotopyMove::Delete),
            Err(ComplexError::InvalidMove(_))
        ));
        // endpoints are never removed
        let p = Path::new(&x, vec![0, 1, 2]).unwrap();
        assert!(apply_elementary_homotopy(&x, &p, 0, HomotopyMove::Delete).is_err());
    }

    #[test]
    fn path_validation() {
        let c = circle();
        assert!(Path::new(&c, vec![0, 1, 2, 0]).unwrap().is_loop());
        assert_eq!(
            Path::new(&c, vec![0, 0]),
            Err(ComplexError::NotAnEdge(0, 0))
        );
        assert_eq!(Path::new(&c, vec![9]), Err(ComplexError::UnknownVertex(9)));
    }

    #[test]
    fn maximal_simplices_of_mixed_complex() {
        let x = SimplicialComplex::from_cells([vec![0, 1, 2], vec![2, 3], vec![4]]).unwrap();
        let m: Vec<Vec<Vertex>> = x
            .maximal_simplices()
            .into_iter()
            .map(|k| k.vertices().to_vec())
            .collect();
        assert_eq!(m, vec![vec![4], vec![2, 3], vec![0, 1, 2]]);
    }

    proptest! {
        #[test]
        fn downward_closed(cells in proptest::collection::vec(
            proptest::collection::btree_set(0usize..7, 1..5), 1..5)) {
            let cells: Vec<Vec<Vertex>> = cells.into_iter().map(|s| s.into_iter().collect()).collect();
            let x = SimplicialComplex::from_cells(&cells).unwrap();
            for k in 1..=x.dimension() {
                for s in x.simplices(k) {
                    for i in 0..=k {
                        prop_assert!(x.contains(&s.facet(i)));
                    }
                }
            }
        }

        #[test]
        fn loop_count_is_cycle_rank(cells in proptest::collection::vec(
            proptest::collection::btree_set(0usize..6, 2..4), 1..8)) {
            let cells: Vec<Vec<Vertex>> = cells.into_iter().map(|s| s.into_iter().collect()).collect();
            let x = SimplicialComplex::from_cells(&cells).unwrap();
            prop_assume!(x.is_connected());
            let t = spanning_tree(&x).unwrap();
            prop_assert_eq!(t.clone(), spanning_tree(&x).unwrap());
            let loops = generator_loops(&x, &t);
            prop_assert_eq!(loops.len(), x.count(1) + 1 - x.count(0));
        }

        #[test]
        fn insert_then_delete_is_identity(v in 0usize..4, seq in proptest::collection::vec(0usize..4, 1..6)) {
            let x = SimplicialComplex::full_simplex(4);
            // build a valid path from seq by dropping repeats
            let mut p: Vec<Vertex> = Vec::new();
            for s in seq {
                if p.last() != Some(&s) {
                    p.push(s);
                }
            }
            prop_assume!(p.len() >= 2);
            let path = Path::new(&x, p).unwrap();
            for i in 1..path.vertices().len() {
                if let Ok(q) = apply_elementary_homotopy(&x, &path, i, HomotopyMove::Insert(v)) {
                    let back = apply_elementary_homotopy(&x, &q, i, HomotopyMove::Delete).unwrap();
                    prop_assert_eq!(&back, &path);
                    prop_assert_eq!(q.start(), path.start());
                    prop_assert_eq!(q.end(), path.end());
                }
            }
        }
    }
}
