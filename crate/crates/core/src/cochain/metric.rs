//! Fiber inner products of sections and 1-cochains.

use super::{CochainError, ScalarCochain, VBCochain};
use crate::bundle::Metric;
use crate::complex::SimplexKey;

fn check(
    metric: &Metric,
    a: &VBCochain,
    b: &VBCochain,
    degrees: (usize, usize),
) -> Result<(), CochainError> {
    if (a.degree(), b.degree()) != degrees {
        return Err(CochainError::WrongDegree {
            expected: degrees.0,
            actual: a.degree(),
        });
    }
    if *a.bundle() != *b.bundle() {
        return Err(CochainError::Mismatch);
    }
    metric.check_shapes(a.bundle())?;
    Ok(())
}

/// `(s · s')_i = s_iᵀ G_i s'_i`.
pub fn dot_sections(
    s: &VBCochain,
    t: &VBCochain,
    metric: &Metric,
) -> Result<ScalarCochain, CochainError> {
    check(metric, s, t, (0, 0))?;
    Ok(ScalarCochain::from_fn(s.complex().clone(), 0, |k| {
        let v = k.lowest();
        s.value(k).dot(&(metric.at(v) * t.value(k)))
    }))
}

/// `(α · s)[01] = α01ᵀ G_0 (s_0 + U01 s_1) / 2`.
pub fn dot_cochain1_section(
    alpha: &VBCochain,
    s: &VBCochain,
    metric: &Metric,
) -> Result<ScalarCochain, CochainError> {
    check(metric, alpha, s, (1, 0))?;
    let bundle = alpha.bundle();
    let mut err = None;
    let out = ScalarCochain::from_fn(alpha.complex().clone(), 1, |k| {
        let (i, j) = (k.lowest(), k.highest());
        let sj = bundle.move_vector(i, j, &s.value(&SimplexKey::vertex(j)));
        match sj {
            Ok(sj) => {
                let avg = (s.value(&SimplexKey::vertex(i)) + sj) / 2.0;
                alpha.value(k).dot(&(metric.at(i) * avg))
            }
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    });
    match err {
        Some(e) => Err(e.into()),
        None => Ok(out),
    }
}
