use nalgebra::{DMatrix, DVector};

/// Mixed absolute/relative comparison: `|a − b| ≤ abs + rel · max(|a|, |b|)`,
/// applied elementwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-9,
            rel: 1e-9,
        }
    }
}

impl Tolerance {
    /// Returns `None` unless both components are finite and non-negative.
    pub fn new(abs: f64, rel: f64) -> Option<Self> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        (ok(abs) && ok(rel)).then_some(Self { abs, rel })
    }

    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.abs + self.rel * a.abs().max(b.abs())
    }

    pub fn close_vec(&self, a: &DVector<f64>, b: &DVector<f64>) -> bool {
        a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| self.close(*x, *y))
    }

    pub fn close_mat(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
        a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| self.close(*x, *y))
    }

    pub fn is_identity(&self, m: &DMatrix<f64>) -> bool {
        m.is_square() && self.close_mat(m, &DMatrix::identity(m.nrows(), m.ncols()))
    }
}

/// Largest elementwise absolute difference; infinite on shape mismatch.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
