//! Coboundaries, the connection and the cup product.

use std::sync::Arc;

use nalgebra::DVector;

use super::{
    check_base, check_degree_fits, check_ordering, CochainError, CochainEval, ProductOrder,
    ScalarCochain, VBCochain,
};
use crate::bundle::Bundle;
use crate::complex::Vertex;

/// Lazy `d∇` of a cochain expression.
///
/// On an ordering `(o0, …, ok+1)` the value at `o0` is
/// `U_{o0 o1} ⟨α⟩(o1…ok+1)_{o1} + Σ_{i≥1} (−1)^i ⟨α⟩(o0…ôi…ok+1)_{o0}`.
pub struct DNabla<'a> {
    inner: &'a dyn CochainEval,
}

impl<'a> DNabla<'a> {
    pub fn new(inner: &'a dyn CochainEval) -> Self {
        Self { inner }
    }
}

impl CochainEval for DNabla<'_> {
    fn bundle(&self) -> &Arc<Bundle> {
        self.inner.bundle()
    }

    fn degree(&self) -> usize {
        self.inner.degree() + 1
    }

    fn eval_at(&self, o: &[Vertex], base: Vertex) -> Result<DVector<f64>, CochainError> {
        let bundle = self.inner.bundle();
        check_ordering(bundle.complex(), self.degree(), o)?;
        check_base(self.bundle().complex(), o, base)?;
        let head = self.inner.eval_at(&o[1..], o[1])?;
        let mut acc = bundle.transport(o[0], o[1])? * head;
        let mut face = Vec::with_capacity(o.len() - 1);
        for i in 1..o.len() {
            face.clear();
            face.extend(
                o.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &v)| v),
            );
            let term = self.inner.eval_at(&face, o[0])?;
            if i % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        Ok(bundle.move_vector(base, o[0], &acc)?)
    }
}

/// Lazy cup product of a bundle-valued expression with a scalar cochain.
pub struct Cup<'a> {
    alpha: &'a dyn CochainEval,
    w: &'a ScalarCochain,
    order: ProductOrder,
}

impl<'a> Cup<'a> {
    pub fn new(
        alpha: &'a dyn CochainEval,
        w: &'a ScalarCochain,
        order: ProductOrder,
    ) -> Result<Self, CochainError> {
        if **alpha.bundle().complex() != **w.complex() {
            return Err(CochainError::Mismatch);
        }
        check_degree_fits(w.complex(), alpha.degree() + w.degree())?;
        Ok(Self { alpha, w, order })
    }
}

/// Cup product on one ordering, with the bundle part moved to `base`.
pub(super) fn cup_at(
    alpha: &dyn CochainEval,
    w: &ScalarCochain,
    order: ProductOrder,
    o: &[Vertex],
    base: Vertex,
) -> Result<DVector<f64>, CochainError> {
    let (k, l) = (alpha.degree(), w.degree());
    Ok(match order {
        ProductOrder::AlphaFirst => alpha.eval_at(&o[..=k], base)? * w.eval(&o[k..])?,
        ProductOrder::WFirst => alpha.eval_at(&o[l..], base)? * w.eval(&o[..=l])?,
    })
}

impl CochainEval for Cup<'_> {
    fn bundle(&self) -> &Arc<Bundle> {
        self.alpha.bundle()
    }

    fn degree(&self) -> usize {
        self.alpha.degree() + self.w.degree()
    }

    fn eval_at(&self, o: &[Vertex], base: Vertex) -> Result<DVector<f64>, CochainError> {
        check_ordering(self.w.complex(), self.degree(), o)?;
        check_base(self.bundle().complex(), o, base)?;
        cup_at(self.alpha, self.w, self.order, o, base)
    }
}

/// `∇s`: the value on `[i < j]` is `U_ij s_j − s_i`.
pub fn nabla(s: &VBCochain) -> Result<VBCochain, CochainError> {
    if s.degree() != 0 {
        return Err(CochainError::WrongDegree {
            expected: 0,
            actual: s.degree(),
        });
    }
    d_nabla(s)
}

/// Exterior covariant derivative of a stored cochain. Every `k`-simplex
/// must carry a value.
pub fn d_nabla(alpha: &VBCochain) -> Result<VBCochain, CochainError> {
    alpha.require_complete()?;
    VBCochain::materialize(&DNabla::new(alpha))
}

/// Simplicial coboundary: alternating sum over facets.
pub fn d_scalar(w: &ScalarCochain) -> ScalarCochain {
    ScalarCochain::from_fn(w.complex().clone(), w.degree() + 1, |key| {
        (0..=key.dim())
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * w.value(&key.facet(i))
            })
            .sum()
    })
}

/// Cup product `α ⌣ w` or `w ⌣ α`.
pub fn cup(
    alpha: &VBCochain,
    w: &ScalarCochain,
    order: ProductOrder,
) -> Result<VBCochain, CochainError> {
    VBCochain::materialize(&Cup::new(alpha, w, order)?)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use nalgebra::DMatrix;

    use super::*;
    use crate::complex::{SimplexKey, SimplicialComplex};

    fn s(x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, x)
    }

    fn v(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    fn rank1_triangle(u: f64, vv: f64, w: f64) -> Arc<Bundle> {
        let x = Arc::new(SimplicialComplex::from_cells([[0, 1, 2]]).unwrap());
        let dims = x.vertices().map(|i| (i, 1)).collect();
        Arc::new(
            Bundle::new(
                x,
                dims,
                BTreeMap::from([((0, 1), s(u)), ((1, 2), s(vv)), ((0, 2), s(w))]),
            )
            .unwrap(),
        )
    }

    #[test]
    fn nabla_scalar_example() {
        let e = rank1_triangle(2.0, 3.0, 5.0);
        let sec =
            VBCochain::section(e, BTreeMap::from([(0, v(1.0)), (1, v(4.0)), (2, v(0.0))])).unwrap();
        let ds = nabla(&sec).unwrap();
        assert_eq!(ds.value(&SimplexKey::edge(0, 1)), v(7.0));
    }

    #[test]
    fn nabla_requires_all_vertices() {
        let e = rank1_triangle(2.0, 3.0, 5.0);
        let sec = VBCochain::section(e, BTreeMap::from([(0, v(1.0))])).unwrap();
        assert_eq!(
            nabla(&sec),
            Err(CochainError::MissingValue(SimplexKey::vertex(1)))
        );
    }

    #[test]
    fn constant_section_on_trivial_bundle() {
        let x = Arc::new(SimplicialComplex::from_cells([[0, 1, 2]]).unwrap());
        let e = Arc::new(Bundle::trivial(x, 2));
        let c = DVector::from_vec(vec![1.5, -2.0]);
        let sec = VBCochain::from_fn(e, 0, |_| c.clone()).unwrap();
        assert_eq!(nabla(&sec).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn d_nabla_squared_on_sections() {
        // ⟨d∇d∇s⟩[012] = (U01 U12 − U02) s2
        let e = rank1_triangle(2.0, 3.0, 5.0);
        let sec = VBCochain::section(e, BTreeMap::from([(0, v(0.3)), (1, v(-1.0)), (2, v(2.5))]))
            .unwrap();
        let dd = d_nabla(&d_nabla(&sec).unwrap()).unwrap();
        assert!((dd.value(&SimplexKey::new(vec![0, 1, 2]).unwrap())[0] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn scalar_coboundary() {
        let x = Arc::new(SimplicialComplex::full_simplex(4));
        let f = ScalarCochain::from_fn(x.clone(), 0, |k| (k.lowest() * k.lowest()) as f64);
        let df = d_scalar(&f);
        assert_eq!(df.value(&SimplexKey::edge(1, 3)), 9.0 - 1.0);
        assert_eq!(
            d_scalar(&ScalarCochain::constant(x.clone(), 4.0)).distance(&ScalarCochain::from_fn(
                x.clone(),
                1,
                |_| 0.0
            )),
            0.0
        );
        let w = ScalarCochain::from_fn(x, 1, |k| (k.lowest() as f64).sin() + k.highest() as f64);
        assert!(d_scalar(&d_scalar(&w))
            .values()
            .values()
            .all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn cup_examples() {
        let e = rank1_triangle(2.0, 3.0, 5.0);
        let x = e.complex().clone();
        let a = VBCochain::from_fn(e.clone(), 1, |k| {
            v(10.0 * k.lowest() as f64 + k.highest() as f64)
        })
        .unwrap();
        let w = ScalarCochain::from_fn(x.clone(), 1, |k| 0.5 + k.highest() as f64);
        let c = cup(&a, &w, ProductOrder::AlphaFirst).unwrap();
        // α01 · w12
        assert_eq!(
            c.value(&SimplexKey::new(vec![0, 1, 2]).unwrap()),
            v(1.0 * 2.5)
        );
        // w01 · U02 α12
        let c = cup(&a, &w, ProductOrder::WFirst).unwrap();
        assert_eq!(
            c.value(&SimplexKey::new(vec![0, 1, 2]).unwrap()),
            v(1.5 * 2.0 * 12.0)
        );
        let one = ScalarCochain::constant(x, 1.0);
        assert_eq!(cup(&a, &one, ProductOrder::WFirst).unwrap(), a);
        let too_big = ScalarCochain::from_fn(e.complex().clone(), 2, |_| 1.0);
        assert!(matches!(
            cup(&a, &too_big, ProductOrder::AlphaFirst),
            Err(CochainError::DegreeOverflow { degree: 3, dim: 2 })
        ));
    }
}
