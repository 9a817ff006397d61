//! Wedge product as an antisymmetrized cup product, plus the equivalent
//! averaging forms.

use std::sync::Arc;

use nalgebra::DVector;

use super::ops::cup_at;
use super::{
    binomial, check_base, check_degree_fits, check_ordering, factorial, signed_permutations,
    CochainError, CochainEval, ProductOrder, ScalarCochain, VBCochain,
};
use crate::bundle::Bundle;
use crate::complex::{Parity, SimplexKey, Vertex};

/// Lazy wedge product.
///
/// On an ordering `o` of a `(k+l)`-simplex the value at `base` is
/// `1/(k+l+1)! Σ_τ sgn(τ) ⟨α ⌣ w⟩(τ(o))_base`, where every bundle value is
/// moved from its face's lowest vertex to `base` along the direct edge.
pub struct Wedge<'a> {
    alpha: &'a dyn CochainEval,
    w: &'a ScalarCochain,
    order: ProductOrder,
    perms: Vec<(Vec<usize>, f64)>,
}

impl<'a> Wedge<'a> {
    pub fn new(
        alpha: &'a dyn CochainEval,
        w: &'a ScalarCochain,
        order: ProductOrder,
    ) -> Result<Self, CochainError> {
        if **alpha.bundle().complex() != **w.complex() {
            return Err(CochainError::Mismatch);
        }
        let n = alpha.degree() + w.degree();
        check_degree_fits(w.complex(), n)?;
        Ok(Self {
            alpha,
            w,
            order,
            perms: signed_permutations(n + 1),
        })
    }
}

impl CochainEval for Wedge<'_> {
    fn bundle(&self) -> &Arc<Bundle> {
        self.alpha.bundle()
    }

    fn degree(&self) -> usize {
        self.alpha.degree() + self.w.degree()
    }

    fn eval_at(&self, o: &[Vertex], base: Vertex) -> Result<DVector<f64>, CochainError> {
        check_ordering(self.w.complex(), self.degree(), o)?;
        check_base(self.w.complex(), o, base)?;
        let mut acc = DVector::zeros(self.bundle().dim(base));
        let mut permuted = vec![0; o.len()];
        for (p, sign) in &self.perms {
            for (slot, &i) in permuted.iter_mut().zip(p) {
                *slot = o[i];
            }
            acc += cup_at(self.alpha, self.w, self.order, &permuted, base)? * *sign;
        }
        Ok(acc / factorial(o.len()))
    }
}

/// Wedge product `α ∧ w` (or `w ∧ α`).
pub fn wedge(
    alpha: &VBCochain,
    w: &ScalarCochain,
    order: ProductOrder,
) -> Result<VBCochain, CochainError> {
    VBCochain::materialize(&Wedge::new(alpha, w, order)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AveragingMode {
    /// Average over `k`-faces `f` of `α`, each weighted by the mean of `w`
    /// over the `l`-faces `v ∗ (σ ∖ f)`, `v ∈ f`.
    OuterAlpha,
    /// Average over `l`-faces `f` of `w`, each weighted by the mean of `α`
    /// over the `k`-faces `(σ ∖ f) ∗ v`, `v ∈ f`.
    OuterW,
}

/// `α ∧ w` computed as a double average over faces instead of a sum over
/// permutations. Each term uses an ordering `(front, v, back)` of `σ` and
/// carries that ordering's sign, so the face orientations chosen for `α` and
/// `w` do not matter.
pub fn wedge_averaged(
    alpha: &VBCochain,
    w: &ScalarCochain,
    mode: AveragingMode,
) -> Result<VBCochain, CochainError> {
    if **alpha.complex() != **w.complex() {
        return Err(CochainError::Mismatch);
    }
    let (k, l) = (alpha.degree(), w.degree());
    check_degree_fits(w.complex(), k + l)?;
    VBCochain::from_fn(alpha.bundle().clone(), k + l, |sigma| {
        averaged_at(alpha, w, mode, sigma).expect("faces of a stored simplex")
    })
}

fn averaged_at(
    alpha: &VBCochain,
    w: &ScalarCochain,
    mode: AveragingMode,
    sigma: &SimplexKey,
) -> Result<DVector<f64>, CochainError> {
    let (k, l) = (alpha.degree(), w.degree());
    let n = k + l + 1;
    let base = sigma.lowest();
    // outer face has `outer + 1` vertices
    let outer = match mode {
        AveragingMode::OuterAlpha => k,
        AveragingMode::OuterW => l,
    };
    let mut acc = DVector::zeros(alpha.bundle().dim(base));
    for f in sigma.faces(outer) {
        let rest: Vec<Vertex> = sigma
            .vertices()
            .iter()
            .copied()
            .filter(|&x| !f.contains(x))
            .collect();
        for &v in f.vertices() {
            let others: Vec<Vertex> = f.vertices().iter().copied().filter(|&x| x != v).collect();
            // ordering (α part ending in v, w part starting at v)
            let ordering: Vec<Vertex> = match mode {
                AveragingMode::OuterAlpha => {
                    others.iter().chain([&v]).chain(&rest).copied().collect()
                }
                AveragingMode::OuterW => rest.iter().chain([&v]).chain(&others).copied().collect(),
            };
            let sign = Parity::of_sequence(&ordering).sign();
            let a = alpha.eval(&ordering[..=k], base)?;
            let b = w.eval(&ordering[k..])?;
            acc += a * (sign * b);
        }
    }
    Ok(acc / (binomial(n, outer + 1) * (outer + 1) as f64))
}

/// Wedge of two scalar cochains: `1/(k+l+1)! Σ_τ sgn(τ) a(τ front) b(τ back)`.
pub fn scalar_wedge(a: &ScalarCochain, b: &ScalarCochain) -> Result<ScalarCochain, CochainError> {
    if **a.complex() != **b.complex() {
        return Err(CochainError::Mismatch);
    }
    let (k, l) = (a.degree(), b.degree());
    check_degree_fits(a.complex(), k + l)?;
    let perms = signed_permutations(k + l + 1);
    let norm = factorial(k + l + 1);
    let mut err = None;
    let out = ScalarCochain::from_fn(a.complex().clone(), k + l, |sigma| {
        let s = sigma.vertices();
        let mut total = 0.0;
        for (p, sign) in &perms {
            let o: Vec<Vertex> = p.iter().map(|&i| s[i]).collect();
            match (a.eval(&o[..=k]), b.eval(&o[k..])) {
                (Ok(x), Ok(y)) => total += sign * x * y,
                (Err(e), _) | (_, Err(e)) => err = Some(e),
            }
        }
        total / norm
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::complex::SimplicialComplex;

    fn key(v: &[Vertex]) -> SimplexKey {
        SimplexKey::new(v.to_vec()).unwrap()
    }

    /// Rank-2 bundle over the full simplex with explicit non-commuting transports.
    fn bundle(n: usize) -> Arc<Bundle> {
        let x = Arc::new(SimplicialComplex::full_simplex(n));
        let dims = x.vertices().map(|v| (v, 2)).collect();
        let t = x
            .edges()
            .map(|(i, j)| {
                let a = (i + 2 * j) as f64;
                (
                    (i, j),
                    DMatrix::from_row_slice(2, 2, &[1.0 + 0.1 * a, 0.2, -0.3 * a.sin(), 0.9]),
                )
            })
            .collect();
        Arc::new(Bundle::new(x, dims, t).unwrap())
    }

    fn alpha(e: &Arc<Bundle>, k: usize) -> VBCochain {
        VBCochain::from_fn(e.clone(), k, |s| {
            let h: f64 = s.vertices().iter().map(|&v| (v + 1) as f64).product();
            DVector::from_vec(vec![h.cos(), (0.7 * h).sin()])
        })
        .unwrap()
    }

    fn scal(e: &Arc<Bundle>, l: usize) -> ScalarCochain {
        ScalarCochain::from_fn(e.complex().clone(), l, |s| {
            s.vertices()
                .iter()
                .map(|&v| (v as f64 + 0.5).ln())
                .sum::<f64>()
                - 0.3
        })
    }

    #[test]
    fn one_form_times_function() {
        // ⟨α ∧ w⟩[01] = α01 (w0 + w1)/2
        let e = bundle(2);
        let a = alpha(&e, 1);
        let w = scal(&e, 0);
        let out = wedge(&a, &w, ProductOrder::AlphaFirst).unwrap();
        let expect = a.value(&key(&[0, 1])) * ((w.value(&key(&[0])) + w.value(&key(&[1]))) / 2.0);
        assert!((out.value(&key(&[0, 1])) - &expect).amax() < 1e-15);
        // ⟨f ∧ α⟩[01] = (f0 + f1)/2 α01
        let out = wedge(&a, &w, ProductOrder::WFirst).unwrap();
        assert!((out.value(&key(&[0, 1])) - expect).amax() < 1e-15);
    }

    #[test]
    fn six_term_expansion_on_triangle() {
        let e = bundle(3);
        let a = alpha(&e, 1);
        let w = scal(&e, 1);
        let u01 = e.transport(0, 1).unwrap();
        let al = |i: usize, j: usize| a.value(&key(&[i, j]));
        let wl = |i: usize, j: usize| w.value(&key(&[i, j]));
        // α01 w12 − α02 w21 − α10 w02 + U01 α12 w20 + α20 w01 − U01 α21 w10
        let expect = (al(0, 1) * wl(1, 2) + al(0, 2) * wl(1, 2) + al(0, 1) * wl(0, 2)
            - u01 * al(1, 2) * wl(0, 2)
            - al(0, 2) * wl(0, 1)
            - u01 * al(1, 2) * wl(0, 1))
            / 6.0;
        let out = wedge(&a, &w, ProductOrder::AlphaFirst).unwrap();
        assert!((out.value(&key(&[0, 1, 2])) - expect).amax() < 1e-14);
    }

    #[test]
    fn averaging_modes_agree_with_permutation_sum() {
        for dim in 1..=3 {
            let e = bundle(dim + 1);
            for k in 0..=dim {
                for l in 0..=dim - k {
                    let a = alpha(&e, k);
                    let w = scal(&e, l);
                    let reference = wedge(&a, &w, ProductOrder::AlphaFirst).unwrap();
                    for mode in [AveragingMode::OuterAlpha, AveragingMode::OuterW] {
                        let avg = wedge_averaged(&a, &w, mode).unwrap();
                        assert!(avg.distance(&reference) < 1e-13, "k={k} l={l} {mode:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn scalar_anticommutativity() {
        let x = Arc::new(SimplicialComplex::full_simplex(4));
        for k in 0..=3 {
            for l in 0..=3 - k {
                let a = ScalarCochain::from_fn(x.clone(), k, |s| {
                    s.vertices().iter().sum::<usize>() as f64 - 1.3
                });
                let b = ScalarCochain::from_fn(x.clone(), l, |s| {
                    (s.lowest() as f64 * 0.7).cos() - s.highest() as f64
                });
                let ab = scalar_wedge(&a, &b).unwrap();
                let ba = scalar_wedge(&b, &a).unwrap();
                let sign = if (k * l) % 2 == 0 { 1.0 } else { -1.0 };
                assert!(ab.distance(&ba.combine(sign, &ba, 0.0).unwrap()) < 1e-14);
            }
        }
    }

    #[test]
    fn overflow_is_rejected() {
        let e = bundle(3);
        let a = alpha(&e, 2);
        let w = scal(&e, 1);
        assert!(matches!(
            wedge(&a, &w, ProductOrder::AlphaFirst),
            Err(CochainError::DegreeOverflow { .. })
        ));
    }
}
