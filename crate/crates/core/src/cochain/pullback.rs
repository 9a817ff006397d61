//! Pullback of cochains along simplicial maps.

use std::sync::Arc;

use nalgebra::DVector;

use super::{CochainError, CochainEval, ScalarCochain, VBCochain};
use crate::bundle::Bundle;
use crate::complex::SimplicialMap;

fn distinct(o: &[usize]) -> bool {
    o.iter().enumerate().all(|(i, v)| !o[..i].contains(v))
}

/// `f*α` as a cochain in `pulled = f*E`. On `[u0 < … < uk]` the value is `α`
/// evaluated on the image ordering `(f(u0), …, f(uk))` at `f(u0)`, or zero
/// when the image is degenerate.
pub fn pullback_cochain(
    f: &SimplicialMap,
    alpha: &dyn CochainEval,
    pulled: &Arc<Bundle>,
) -> Result<VBCochain, CochainError> {
    if **alpha.bundle().complex() != **f.codomain() || **pulled.complex() != **f.domain() {
        return Err(CochainError::Mismatch);
    }
    for v in f.domain().vertices() {
        if pulled.dim(v) != alpha.bundle().dim(f.apply(v)) {
            return Err(CochainError::Mismatch);
        }
    }
    let k = alpha.degree();
    let mut values = std::collections::BTreeMap::new();
    for key in f.domain().simplices(k) {
        let image = f.image(key.vertices());
        let value = if distinct(&image) {
            alpha.eval_at(&image, image[0])?
        } else {
            DVector::zeros(pulled.dim(key.lowest()))
        };
        values.insert(key.clone(), value);
    }
    VBCochain::new(pulled.clone(), k, values)
}

/// `f*w`: parity-signed value on the image simplex, zero when degenerate.
pub fn pullback_scalar(
    f: &SimplicialMap,
    w: &ScalarCochain,
) -> Result<ScalarCochain, CochainError> {
    if **w.complex() != **f.codomain() {
        return Err(CochainError::Mismatch);
    }
    let mut err = None;
    let out = ScalarCochain::from_fn(f.domain().clone(), w.degree(), |key| {
        let image = f.image(key.vertices());
        if !distinct(&image) {
            return 0.0;
        }
        w.eval(&image).unwrap_or_else(|e| {
            err = Some(e);
            0.0
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
