//! Named complexes, named example bundles and seeded random data.
//!
//! Random data comes from ChaCha8 seeded with `seed_from_u64`, so equal seeds
//! give bit-identical fixtures within this implementation. Entries are
//! uniform in `[−1, 1]`; transports and gauges are `I + 0.5·N` with `N`
//! uniform in `[−1, 1]`, resampled while the smallest singular value is below
//! `0.1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bundle::{Bundle, BundleError, GaugeTransform};
use crate::cochain::{HomCochain, ScalarCochain, VBCochain};
use crate::complex::{ComplexError, SimplicialComplex, SimplicialMap, Vertex};
use crate::linalg::{rotation, singular_values};

pub type Seed = u64;

/// Smallest singular value accepted for sampled transports and gauges.
pub const SIGMA_MIN_FLOOR: f64 = 0.1;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FixtureError {
    #[error("unknown complex name {0:?}")]
    UnknownName(String),
    #[error("degree {degree} exceeds the complex dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("fiber dimension must be positive")]
    ZeroRank,
    #[error("split {k} exceeds rank {n}")]
    BadSplit { k: usize, n: usize },
    #[error("codomain has no vertices")]
    EmptyCodomain,
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CanonicalComplex {
    /// Three vertices, three edges, no triangle.
    Circle,
    FilledTriangle,
    Tetrahedron,
    /// The four triangles of a tetrahedron.
    TetraBoundary,
    /// The six edges of a tetrahedron.
    TetraSkeleton,
    /// The five tetrahedra bounding a 4-simplex.
    Simplex4Boundary,
}

impl CanonicalComplex {
    pub const ALL: [CanonicalComplex; 6] = [
        CanonicalComplex::Circle,
        CanonicalComplex::FilledTriangle,
        CanonicalComplex::Tetrahedron,
        CanonicalComplex::TetraBoundary,
        CanonicalComplex::TetraSkeleton,
        CanonicalComplex::Simplex4Boundary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CanonicalComplex::Circle => "circle",
            CanonicalComplex::FilledTriangle => "filled_triangle",
            CanonicalComplex::Tetrahedron => "tetrahedron",
            CanonicalComplex::TetraBoundary => "tetra_boundary",
            CanonicalComplex::TetraSkeleton => "tetra_skeleton",
            CanonicalComplex::Simplex4Boundary => "simplex4_boundary",
        }
    }

    pub fn build(self) -> SimplicialComplex {
        let faces_of = |n: usize, k: usize| -> Vec<Vec<Vertex>> {
            crate::complex::SimplexKey::new((0..n).collect())
                .expect("increasing")
                .faces(k)
                .into_iter()
                .map(|f| f.vertices().to_vec())
                .collect()
        };
        let cells = match self {
            CanonicalComplex::Circle => faces_of(3, 1),
            CanonicalComplex::FilledTriangle => faces_of(3, 2),
            CanonicalComplex::Tetrahedron => faces_of(4, 3),
            CanonicalComplex::TetraBoundary => faces_of(4, 2),
            CanonicalComplex::TetraSkeleton => faces_of(4, 1),
            CanonicalComplex::Simplex4Boundary => faces_of(5, 3),
        };
        SimplicialComplex::from_cells(cells).expect("distinct vertices")
    }
}

impl fmt::Display for CanonicalComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CanonicalComplex {
    type Err = FixtureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| FixtureError::UnknownName(s.to_string()))
    }
}

pub fn canonical_complex(name: &str) -> Result<Arc<SimplicialComplex>, FixtureError> {
    Ok(Arc::new(name.parse::<CanonicalComplex>()?.build()))
}

fn rng(seed: Seed) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0..=1.0)
}

/// `I + 0.5·N`, resampled until the smallest singular value is at least `0.1`.
fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    loop {
        let m = DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| 0.5 * uniform(rng));
        let sv = singular_values(&m);
        if sv[sv.len() - 1] >= SIGMA_MIN_FLOOR {
            return m;
        }
    }
}

/// Rank-`n` bundle with sampled transports on every edge, in canonical order.
pub fn random_bundle(
    x: Arc<SimplicialComplex>,
    n: usize,
    seed: Seed,
) -> Result<Bundle, FixtureError> {
    if n == 0 {
        return Err(FixtureError::ZeroRank);
    }
    let mut r = rng(seed);
    let dims = x.vertices().map(|v| (v, n)).collect();
    let t = x
        .edges()
        .collect::<Vec<_>>()
        .into_iter()
        .map(|e| (e, well_conditioned(&mut r, n)))
        .collect();
    Ok(Bundle::new(x, dims, t)?)
}

/// Rank-`n` bundle with orthogonal transports (QR factors of sampled matrices).
pub fn random_orthogonal_bundle(
    x: Arc<SimplicialComplex>,
    n: usize,
    seed: Seed,
) -> Result<Bundle, FixtureError> {
    if n == 0 {
        return Err(FixtureError::ZeroRank);
    }
    let mut r = rng(seed);
    let dims = x.vertices().map(|v| (v, n)).collect();
    let t = x
        .edges()
        .collect::<Vec<_>>()
        .into_iter()
        .map(|e| (e, well_conditioned(&mut r, n).qr().q()))
        .collect();
    Ok(Bundle::new(x, dims, t)?)
}

/// Per-vertex gauge sampled like bundle transports.
pub fn random_gauge(bundle: &Bundle, seed: Seed) -> GaugeTransform {
    let mut r = rng(seed);
    let g = bundle
        .dims()
        .iter()
        .map(|(&v, &d)| (v, well_conditioned(&mut r, d)))
        .collect();
    GaugeTransform::new(g).expect("sampled above the singular-value floor")
}

/// The trivial rank-`n` bundle seen through a random gauge.
pub fn gauged_trivial(
    x: Arc<SimplicialComplex>,
    n: usize,
    seed: Seed,
) -> Result<Bundle, FixtureError> {
    let triv = Bundle::trivial(x, n);
    let g = random_gauge(&triv, seed);
    Ok(triv.apply_gauge(&g)?)
}

/// `trivial_k ⊕ random_{n−k}` seen through a random gauge.
pub fn with_trivial_summand(
    x: Arc<SimplicialComplex>,
    n: usize,
    k: usize,
    seed: Seed,
) -> Result<Bundle, FixtureError> {
    if k > n {
        return Err(FixtureError::BadSplit { k, n });
    }
    if n == 0 {
        return Err(FixtureError::ZeroRank);
    }
    let sum = if k == n {
        Bundle::trivial(x, n)
    } else if k == 0 {
        random_bundle(x, n, seed)?
    } else {
        Bundle::trivial(x.clone(), k).whitney_sum(&random_bundle(x, n - k, seed)?)?
    };
    let g = random_gauge(&sum, seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    Ok(sum.apply_gauge(&g)?)
}

fn check_degree(x: &SimplicialComplex, k: usize) -> Result<(), FixtureError> {
    if k > x.dimension() {
        return Err(FixtureError::DegreeOverflow {
            degree: k,
            dim: x.dimension(),
        });
    }
    Ok(())
}

pub fn random_cochain(
    bundle: &Arc<Bundle>,
    k: usize,
    seed: Seed,
) -> Result<VBCochain, FixtureError> {
    check_degree(bundle.complex(), k)?;
    let mut r = rng(seed);
    Ok(VBCochain::from_fn(bundle.clone(), k, |s| {
        DVector::from_fn(bundle.dim(s.lowest()), |_, _| uniform(&mut r))
    })
    .expect("shapes follow from the bundle"))
}

pub fn random_scalar_cochain(
    x: &Arc<SimplicialComplex>,
    k: usize,
    seed: Seed,
) -> Result<ScalarCochain, FixtureError> {
    check_degree(x, k)?;
    let mut r = rng(seed);
    Ok(ScalarCochain::from_fn(x.clone(), k, |_| uniform(&mut r)))
}

pub fn random_hom_cochain(
    bundle: &Arc<Bundle>,
    k: usize,
    seed: Seed,
) -> Result<HomCochain, FixtureError> {
    check_degree(bundle.complex(), k)?;
    let mut r = rng(seed);
    Ok(HomCochain::from_fn(bundle.clone(), k, |s| {
        DMatrix::from_fn(bundle.dim(s.lowest()), bundle.dim(s.highest()), |_, _| {
            uniform(&mut r)
        })
    })
    .expect("shapes follow from the bundle"))
}

/// Uniformly random vertex map, resampled until it is simplicial.
pub fn random_simplicial_map(
    domain: Arc<SimplicialComplex>,
    codomain: Arc<SimplicialComplex>,
    seed: Seed,
) -> Result<SimplicialMap, FixtureError> {
    sample_map(domain, codomain, seed, false)
}

/// Random order-preserving (non-decreasing) simplicial map.
pub fn random_monotone_map(
    domain: Arc<SimplicialComplex>,
    codomain: Arc<SimplicialComplex>,
    seed: Seed,
) -> Result<SimplicialMap, FixtureError> {
    sample_map(domain, codomain, seed, true)
}

fn sample_map(
    domain: Arc<SimplicialComplex>,
    codomain: Arc<SimplicialComplex>,
    seed: Seed,
    monotone: bool,
) -> Result<SimplicialMap, FixtureError> {
    let targets: Vec<Vertex> = codomain.vertices().collect();
    if targets.is_empty() {
        return Err(FixtureError::EmptyCodomain);
    }
    let sources: Vec<Vertex> = domain.vertices().collect();
    let mut r = rng(seed);
    loop {
        let mut images: Vec<Vertex> = sources
            .iter()
            .map(|_| targets[r.random_range(0..targets.len())])
            .collect();
        if monotone {
            images.sort_unstable();
        }
        let vertex_map: BTreeMap<_, _> = sources.iter().copied().zip(images).collect();
        let f = SimplicialMap::from_parts(domain.clone(), codomain.clone(), vertex_map)?;
        if f.check().is_pass() {
            return Ok(f);
        }
    }
}

fn scalar(x: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, x)
}

fn three_edge_bundle(
    x: SimplicialComplex,
    n: usize,
    t01: DMatrix<f64>,
    t12: DMatrix<f64>,
    t02: DMatrix<f64>,
) -> Bundle {
    let x = Arc::new(x);
    let dims = x.vertices().map(|v| (v, n)).collect();
    Bundle::new(
        x,
        dims,
        BTreeMap::from([((0, 1), t01), ((1, 2), t12), ((0, 2), t02)]),
    )
    .expect("invertible fixture data")
}

/// Rank-2 bundle over the circle: identity on `{0,1}` and `{0,2}`, rotation
/// by `theta` on `{1,2}`.
pub fn rotation_bundle_circle(theta: f64) -> Bundle {
    let i = DMatrix::identity(2, 2);
    three_edge_bundle(
        CanonicalComplex::Circle.build(),
        2,
        i.clone(),
        rotation(theta),
        i,
    )
}

/// Rank-1 bundle over the circle with `U01 = u`, `U12 = v`, `U02 = w`.
/// Panics if a scalar is zero.
pub fn rank1_circle(u: f64, v: f64, w: f64) -> Bundle {
    three_edge_bundle(
        CanonicalComplex::Circle.build(),
        1,
        scalar(u),
        scalar(v),
        scalar(w),
    )
}

/// Rank-1 bundle over the filled triangle with `U01 = u`, `U12 = v`, `U02 = w`.
/// Panics if a scalar is zero.
pub fn rank1_filled_triangle(u: f64, v: f64, w: f64) -> Bundle {
    three_edge_bundle(
        CanonicalComplex::FilledTriangle.build(),
        1,
        scalar(u),
        scalar(v),
        scalar(w),
    )
}

/// Tetrahedron → filled triangle, `u_i ↦ v_i` for `i ≤ 2` and `u_3 ↦ v_0`.
pub fn tetrahedron_collapse() -> SimplicialMap {
    SimplicialMap::new(
        Arc::new(CanonicalComplex::Tetrahedron.build()),
        Arc::new(CanonicalComplex::FilledTriangle.build()),
        BTreeMap::from([(0, 0), (1, 1), (2, 2), (3, 0)]),
    )
    .expect("simplicial")
}

/// Circle → single edge, `u_0, u_2 ↦ v_0` and `u_1 ↦ v_1`.
pub fn circle_to_edge() -> SimplicialMap {
    SimplicialMap::new(
        Arc::new(CanonicalComplex::Circle.build()),
        Arc::new(SimplicialComplex::from_cells([[0, 1]]).expect("edge")),
        BTreeMap::from([(0, 0), (1, 1), (2, 0)]),
    )
    .expect("simplicial")
}
