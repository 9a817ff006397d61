//! Hom-valued cochains, curvature and their covariant derivative.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{check_degree_fits, CochainError, VBCochain};
use crate::bundle::Bundle;
use crate::complex::{canonicalize, SimplexKey, Vertex};

/// Hom-valued `k`-cochain: on `[v0 < … < vk]` a matrix `E_{vk} → E_{v0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomCochain {
    bundle: Arc<Bundle>,
    degree: usize,
    values: BTreeMap<SimplexKey, DMatrix<f64>>,
}

impl HomCochain {
    /// Validates keys and shapes; absent simplices count as zero.
    pub fn new(
        bundle: Arc<Bundle>,
        degree: usize,
        values: BTreeMap<SimplexKey, DMatrix<f64>>,
    ) -> Result<Self, CochainError> {
        for (key, m) in &values {
            if key.dim() != degree {
                return Err(CochainError::WrongDegree {
                    expected: degree,
                    actual: key.dim(),
                });
            }
            if !bundle.complex().contains(key) {
                return Err(CochainError::NotASimplex(key.clone()));
            }
            let expected = (bundle.dim(key.lowest()), bundle.dim(key.highest()));
            if m.shape() != expected {
                return Err(CochainError::Shape {
                    at: key.clone(),
                    expected,
                    actual: m.shape(),
                });
            }
        }
        Ok(Self {
            bundle,
            degree,
            values,
        })
    }

    pub fn from_fn(
        bundle: Arc<Bundle>,
        degree: usize,
        mut f: impl FnMut(&SimplexKey) -> DMatrix<f64>,
    ) -> Result<Self, CochainError> {
        let values = bundle
            .complex()
            .simplices(degree)
            .map(|k| (k.clone(), f(k)))
            .collect();
        Self::new(bundle, degree, values)
    }

    /// The 0-cochain whose value at every vertex is the identity.
    pub fn identity(bundle: Arc<Bundle>) -> Self {
        let values = bundle
            .dims()
            .iter()
            .map(|(&v, &d)| (SimplexKey::vertex(v), DMatrix::identity(d, d)))
            .collect();
        Self {
            bundle,
            degree: 0,
            values,
        }
    }

    pub fn bundle(&self) -> &Arc<Bundle> {
        &self.bundle
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &BTreeMap<SimplexKey, DMatrix<f64>> {
        &self.values
    }

    /// Stored value, or zero when absent.
    pub fn value(&self, key: &SimplexKey) -> DMatrix<f64> {
        self.values.get(key).cloned().unwrap_or_else(|| {
            DMatrix::zeros(
                self.bundle.dim(key.lowest()),
                self.bundle.dim(key.highest()),
            )
        })
    }

    pub fn require_complete(&self) -> Result<(), CochainError> {
        match self
            .bundle
            .complex()
            .simplices(self.degree)
            .find(|k| !self.values.contains_key(*k))
        {
            Some(k) => Err(CochainError::MissingValue(k.clone())),
            None => Ok(()),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.values().map(|m| m.amax()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &HomCochain) -> f64 {
        if self.degree != other.degree || self.bundle.dims() != other.bundle.dims() {
            return f64::INFINITY;
        }
        self.bundle
            .complex()
            .simplices(self.degree)
            .map(|k| (self.value(k) - other.value(k)).amax())
            .fold(0.0, f64::max)
    }
}

/// `F[012] = U01 U12 − U02` on every triangle.
pub fn curvature(bundle: &Arc<Bundle>) -> HomCochain {
    HomCochain::from_fn(bundle.clone(), 2, |t| {
        let [a, b, c] = [t.vertices()[0], t.vertices()[1], t.vertices()[2]];
        let u = |i, j| bundle.transport(i, j).expect("triangle edge");
        u(a, b) * u(b, c) - u(a, c)
    })
    .expect("shapes follow from the bundle")
}

/// Curvature on a reordering `(o0, o1, o2)` of a triangle, as a matrix
/// `E_{o2} → E_{o0}`, via closed forms in `F = F[abc]`, `a < b < c`.
pub fn curvature_permuted(
    bundle: &Bundle,
    ordering: &[Vertex],
) -> Result<DMatrix<f64>, CochainError> {
    if ordering.len() != 3 {
        return Err(CochainError::WrongDegree {
            expected: 2,
            actual: ordering.len().saturating_sub(1),
        });
    }
    let (key, _) = canonicalize(ordering)?;
    if !bundle.complex().contains(&key) {
        return Err(CochainError::NotASimplex(key));
    }
    let [a, b, c] = [key.vertices()[0], key.vertices()[1], key.vertices()[2]];
    let u = |i, j| bundle.transport(i, j);
    let f = u(a, b)? * u(b, c)? - u(a, c)?;
    let pos: Vec<usize> = ordering
        .iter()
        .map(|v| {
            key.vertices()
                .iter()
                .position(|x| x == v)
                .expect("same vertex set")
        })
        .collect();
    Ok(match pos.as_slice() {
        [0, 1, 2] => f,
        [0, 2, 1] => -(f * u(c, b)?),
        [1, 0, 2] => -(u(b, a)? * f),
        [1, 2, 0] => u(b, a)? * f * u(c, a)?,
        [2, 0, 1] => u(c, a)? * f * u(c, b)?,
        [2, 1, 0] => -(u(c, a)? * f * u(c, b)? * u(b, a)?),
        _ => unreachable!("permutation of three positions"),
    })
}

/// `⟨A α⟩[0…k+l] = A[0…k] · α[k…k+l]`.
pub fn hom_action(a: &HomCochain, alpha: &VBCochain) -> Result<VBCochain, CochainError> {
    if *a.bundle != **alpha.bundle() {
        return Err(CochainError::Mismatch);
    }
    let (k, l) = (a.degree, alpha.degree());
    check_degree_fits(alpha.complex(), k + l)?;
    VBCochain::from_fn(alpha.bundle().clone(), k + l, |s| {
        a.value(&s.slice(0, k)) * alpha.value(&s.slice(k, k + l))
    })
}

/// `U01 A[1…k+1] + Σ_{1≤i≤k} (−1)^i A[0…î…k+1] + (−1)^{k+1} A[0…k] U_{k,k+1}`.
/// Every `k`-simplex must carry a value.
pub fn d_nabla_hom(a: &HomCochain) -> Result<HomCochain, CochainError> {
    a.require_complete()?;
    let k = a.degree;
    let bundle = &a.bundle;
    HomCochain::from_fn(bundle.clone(), k + 1, |s| {
        let v = s.vertices();
        let u = |i, j| bundle.transport(i, j).expect("simplex edge");
        let mut acc = u(v[0], v[1]) * a.value(&s.facet(0));
        for i in 1..=k {
            let term = a.value(&s.facet(i));
            if i % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let last = a.value(&s.facet(k + 1)) * u(v[k], v[k + 1]);
        if (k + 1).is_multiple_of(2) {
            acc + last
        } else {
            acc - last
        }
    })
}
