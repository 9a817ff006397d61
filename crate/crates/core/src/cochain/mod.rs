//! Scalar, bundle-valued and Hom-valued cochains and the operators on them.
//!
//! Bundle-valued values on a simplex are stored in the fiber of its lowest
//! vertex. Evaluating on another ordering multiplies by the parity of the
//! sorting permutation, and evaluating at another vertex of the simplex moves
//! the value along the direct edge. Missing entries evaluate to zero.
//!
//! Constructed cochains (`d∇α`, `α ∧ w`, …) are available both as stored
//! [`VBCochain`]s and as lazy expressions implementing [`CochainEval`]. The
//! lazy form re-evaluates the defining formula on an arbitrary ordering, which
//! is what pullbacks of constructed cochains use.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DVector;
use thiserror::Error;

use crate::bundle::{Bundle, BundleError};
use crate::complex::{canonicalize, ComplexError, SimplexKey, SimplicialComplex, Vertex};

mod hom;
mod metric;
mod ops;
mod pullback;
mod wedge;

pub use hom::{curvature, curvature_permuted, d_nabla_hom, hom_action, HomCochain};
pub use metric::{dot_cochain1_section, dot_sections};
pub use ops::{cup, d_nabla, d_scalar, nabla, Cup, DNabla};
pub use pullback::{pullback_cochain, pullback_scalar};
pub use wedge::{scalar_wedge, wedge, wedge_averaged, AveragingMode, Wedge};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CochainError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("{0} is not a simplex of the complex")]
    NotASimplex(SimplexKey),
    #[error("expected a degree-{expected} simplex, got {actual}")]
    WrongDegree { expected: usize, actual: usize },
    #[error("degree {degree} exceeds the complex dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("base vertex {base} does not span a simplex with {ordering:?}")]
    BaseOutsideSimplex { base: Vertex, ordering: Vec<Vertex> },
    #[error("value at {at} has shape {actual:?}, expected {expected:?}")]
    Shape {
        at: SimplexKey,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("no value on {0}")]
    MissingValue(SimplexKey),
    #[error("operands live over different complexes or bundles")]
    Mismatch,
}

/// Order of the factors in a product of a bundle-valued and a scalar cochain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductOrder {
    /// `α ⌣ w`: `α` on the front face, `w` on the back face.
    AlphaFirst,
    /// `w ⌣ α`: `w` on the front face, `α` on the back face.
    WFirst,
}

/// Anything that can be evaluated on an ordered simplex as a vector in the
/// fiber of a chosen vertex of that simplex.
pub trait CochainEval {
    fn bundle(&self) -> &Arc<Bundle>;
    fn degree(&self) -> usize;
    /// Value on `ordering` (distinct vertices spanning a simplex) as a vector
    /// in `E_base`.
    fn eval_at(&self, ordering: &[Vertex], base: Vertex) -> Result<DVector<f64>, CochainError>;
}

fn check_ordering(
    complex: &SimplicialComplex,
    degree: usize,
    ordering: &[Vertex],
) -> Result<(SimplexKey, f64), CochainError> {
    if ordering.len() != degree + 1 {
        return Err(CochainError::WrongDegree {
            expected: degree,
            actual: ordering.len().saturating_sub(1),
        });
    }
    let (key, parity) = canonicalize(ordering)?;
    if !complex.contains(&key) {
        return Err(CochainError::NotASimplex(key));
    }
    Ok((key, parity.sign()))
}

/// `base` must lie in `ordering` or span a simplex together with it.
fn check_base(
    complex: &SimplicialComplex,
    ordering: &[Vertex],
    base: Vertex,
) -> Result<(), CochainError> {
    let spans = ordering.contains(&base) || {
        let mut all = ordering.to_vec();
        all.push(base);
        complex.spans_simplex(&all)
    };
    if spans {
        Ok(())
    } else {
        Err(CochainError::BaseOutsideSimplex {
            base,
            ordering: ordering.to_vec(),
        })
    }
}

fn check_degree_fits(complex: &SimplicialComplex, degree: usize) -> Result<(), CochainError> {
    if degree > complex.dimension() {
        return Err(CochainError::DegreeOverflow {
            degree,
            dim: complex.dimension(),
        });
    }
    Ok(())
}

/// Bundle-valued `k`-cochain; the value on `[v0 < … < vk]` lives in `E_{v0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct VBCochain {
    bundle: Arc<Bundle>,
    degree: usize,
    values: BTreeMap<SimplexKey, DVector<f64>>,
}

impl VBCochain {
    /// Validates keys and vector lengths. Absent simplices count as zero.
    pub fn new(
        bundle: Arc<Bundle>,
        degree: usize,
        values: BTreeMap<SimplexKey, DVector<f64>>,
    ) -> Result<Self, CochainError> {
        for (key, v) in &values {
            if key.dim() != degree {
                return Err(CochainError::WrongDegree {
                    expected: degree,
                    actual: key.dim(),
                });
            }
            if !bundle.complex().contains(key) {
                return Err(CochainError::NotASimplex(key.clone()));
            }
            let n = bundle.dim(key.lowest());
            if v.len() != n {
                return Err(CochainError::Shape {
                    at: key.clone(),
                    expected: (n, 1),
                    actual: (v.len(), 1),
                });
            }
        }
        Ok(Self {
            bundle,
            degree,
            values,
        })
    }

    /// Fills every `degree`-simplex from `f`, which must return vectors of
    /// the right length.
    pub fn from_fn(
        bundle: Arc<Bundle>,
        degree: usize,
        mut f: impl FnMut(&SimplexKey) -> DVector<f64>,
    ) -> Result<Self, CochainError> {
        let values = bundle
            .complex()
            .simplices(degree)
            .map(|k| (k.clone(), f(k)))
            .collect();
        Self::new(bundle, degree, values)
    }

    pub fn zero(bundle: Arc<Bundle>, degree: usize) -> Self {
        let values = bundle
            .complex()
            .simplices(degree)
            .map(|k| (k.clone(), DVector::zeros(bundle.dim(k.lowest()))))
            .collect();
        Self {
            bundle,
            degree,
            values,
        }
    }

    /// Section (0-cochain) from per-vertex vectors.
    pub fn section(
        bundle: Arc<Bundle>,
        values: BTreeMap<Vertex, DVector<f64>>,
    ) -> Result<Self, CochainError> {
        let values = values
            .into_iter()
            .map(|(v, x)| (SimplexKey::vertex(v), x))
            .collect();
        Self::new(bundle, 0, values)
    }

    /// Stores every value of `expr` on canonical orderings at the lowest vertex.
    pub fn materialize(expr: &dyn CochainEval) -> Result<Self, CochainError> {
        let bundle = expr.bundle().clone();
        let degree = expr.degree();
        let mut values = BTreeMap::new();
        for key in bundle.complex().simplices(degree) {
            values.insert(key.clone(), expr.eval_at(key.vertices(), key.lowest())?);
        }
        Ok(Self {
            bundle,
            degree,
            values,
        })
    }

    pub fn bundle(&self) -> &Arc<Bundle> {
        &self.bundle
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        self.bundle.complex()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &BTreeMap<SimplexKey, DVector<f64>> {
        &self.values
    }

    pub fn get(&self, key: &SimplexKey) -> Option<&DVector<f64>> {
        self.values.get(key)
    }

    /// Stored value, or zero when absent.
    pub fn value(&self, key: &SimplexKey) -> DVector<f64> {
        self.values
            .get(key)
            .cloned()
            .unwrap_or_else(|| DVector::zeros(self.bundle.dim(key.lowest())))
    }

    /// First `degree`-simplex without a stored value.
    pub fn first_missing(&self) -> Option<SimplexKey> {
        self.complex()
            .simplices(self.degree)
            .find(|k| !self.values.contains_key(*k))
            .cloned()
    }

    pub fn require_complete(&self) -> Result<(), CochainError> {
        match self.first_missing() {
            Some(k) => Err(CochainError::MissingValue(k)),
            None => Ok(()),
        }
    }

    /// `parity · U_{base, lowest} · stored` for an ordering of a stored simplex.
    pub fn eval(&self, ordering: &[Vertex], base: Vertex) -> Result<DVector<f64>, CochainError> {
        let (key, sign) = check_ordering(self.complex(), self.degree, ordering)?;
        check_base(self.complex(), ordering, base)?;
        let stored = self.value(&key);
        Ok(self.bundle.move_vector(base, key.lowest(), &stored)? * sign)
    }

    /// `a · self + b · other`.
    pub fn combine(&self, a: f64, other: &VBCochain, b: f64) -> Result<VBCochain, CochainError> {
        if self.degree != other.degree || *self.bundle != *other.bundle {
            return Err(CochainError::Mismatch);
        }
        VBCochain::from_fn(self.bundle.clone(), self.degree, |k| {
            self.value(k) * a + other.value(k) * b
        })
    }

    /// Largest elementwise difference over all simplices (infinite when the
    /// cochains are not comparable).
    pub fn distance(&self, other: &VBCochain) -> f64 {
        if self.degree != other.degree || self.bundle.dims() != other.bundle.dims() {
            return f64::INFINITY;
        }
        self.complex()
            .simplices(self.degree)
            .map(|k| (self.value(k) - other.value(k)).amax())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.values().map(|v| v.amax()).fold(0.0, f64::max)
    }
}

impl CochainEval for VBCochain {
    fn bundle(&self) -> &Arc<Bundle> {
        &self.bundle
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn eval_at(&self, ordering: &[Vertex], base: Vertex) -> Result<DVector<f64>, CochainError> {
        self.eval(ordering, base)
    }
}

/// Real-valued `k`-cochain.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarCochain {
    complex: Arc<SimplicialComplex>,
    degree: usize,
    values: BTreeMap<SimplexKey, f64>,
}

impl ScalarCochain {
    pub fn new(
        complex: Arc<SimplicialComplex>,
        degree: usize,
        values: BTreeMap<SimplexKey, f64>,
    ) -> Result<Self, CochainError> {
        for key in values.keys() {
            if key.dim() != degree {
                return Err(CochainError::WrongDegree {
                    expected: degree,
                    actual: key.dim(),
                });
            }
            if !complex.contains(key) {
                return Err(CochainError::NotASimplex(key.clone()));
            }
        }
        Ok(Self {
            complex,
            degree,
            values,
        })
    }

    pub fn from_fn(
        complex: Arc<SimplicialComplex>,
        degree: usize,
        mut f: impl FnMut(&SimplexKey) -> f64,
    ) -> Self {
        let values = complex
            .simplices(degree)
            .map(|k| (k.clone(), f(k)))
            .collect();
        Self {
            complex,
            degree,
            values,
        }
    }

    pub fn constant(complex: Arc<SimplicialComplex>, c: f64) -> Self {
        Self::from_fn(complex, 0, |_| c)
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &BTreeMap<SimplexKey, f64> {
        &self.values
    }

    pub fn value(&self, key: &SimplexKey) -> f64 {
        self.values.get(key).copied().unwrap_or(0.0)
    }

    /// Parity-signed value on an ordering of a stored simplex.
    pub fn eval(&self, ordering: &[Vertex]) -> Result<f64, CochainError> {
        let (key, sign) = check_ordering(&self.complex, self.degree, ordering)?;
        Ok(sign * self.value(&key))
    }

    /// `a · self + b · other`.
    pub fn combine(
        &self,
        a: f64,
        other: &ScalarCochain,
        b: f64,
    ) -> Result<ScalarCochain, CochainError> {
        if self.degree != other.degree || *self.complex != *other.complex {
            return Err(CochainError::Mismatch);
        }
        Ok(ScalarCochain::from_fn(
            self.complex.clone(),
            self.degree,
            |k| a * self.value(k) + b * other.value(k),
        ))
    }

    pub fn distance(&self, other: &ScalarCochain) -> f64 {
        if self.degree != other.degree || *self.complex != *other.complex {
            return f64::INFINITY;
        }
        self.complex
            .simplices(self.degree)
            .map(|k| (self.value(k) - other.value(k)).abs())
            .fold(0.0, f64::max)
    }
}

/// Permutations of `0..n` with their signs, in lexicographic order.
pub(crate) fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push((p.clone(), crate::complex::Parity::of_sequence(&p).sign()));
        // next lexicographic permutation
        let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..p.len())
            .rev()
            .find(|&j| p[j] > p[i - 1])
            .expect("pivot");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}
