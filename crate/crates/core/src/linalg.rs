//! Small dense routines shared by the bundle and analysis code.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value floor below which a matrix counts as rank deficient.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Singular values in descending order. Handles wide matrices by transposing.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Zero cutoff for singular values: `max(RANK_THRESHOLD · σ_max, abs_floor)`.
fn cutoff(sv: &[f64], abs_floor: f64) -> f64 {
    let lead = sv.first().copied().unwrap_or(0.0);
    (RANK_THRESHOLD * lead).max(abs_floor)
}

pub fn rank(m: &DMatrix<f64>, abs_floor: f64) -> usize {
    let sv = singular_values(m);
    let c = cutoff(&sv, abs_floor);
    sv.iter().filter(|&&s| s > c).count()
}

/// True iff `m` is square and its smallest singular value exceeds
/// `RANK_THRESHOLD` times the largest.
pub fn is_invertible(m: &DMatrix<f64>) -> bool {
    if !m.is_square() || m.nrows() == 0 {
        return false;
    }
    let sv = singular_values(m);
    let (hi, lo) = (sv[0], sv[sv.len() - 1]);
    hi > 0.0 && lo.is_finite() && lo > RANK_THRESHOLD * hi
}

/// Orthonormal basis of the kernel of `m`, one column per basis vector.
pub fn kernel(m: &DMatrix<f64>, abs_floor: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad with zero rows so the thin SVD carries a full set of right singular vectors
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let lead = sv.iter().copied().fold(0.0, f64::max);
    let c = (RANK_THRESHOLD * lead).max(abs_floor);
    let cols: Vec<DVector<f64>> = sv
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= c)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Block-diagonal concatenation `a ⊕ b`.
pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Planar rotation by `theta`.
pub fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_rotation_minus_identity() {
        let k = kernel(&(rotation(0.7) - DMatrix::identity(2, 2)), 1e-9);
        assert_eq!(k.ncols(), 0);
        let k = kernel(&(rotation(0.0) - DMatrix::identity(2, 2)), 1e-9);
        assert_eq!(k.ncols(), 2);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = kernel(&m, 1e-12);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).amax() < 1e-12);
    }

    #[test]
    fn invertibility_threshold() {
        assert!(is_invertible(&DMatrix::identity(3, 3)));
        assert!(!is_invertible(&DMatrix::zeros(2, 2)));
        assert!(!is_invertible(&DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 0.0, 0.0, 1e-10]
        )));
        assert!(!is_invertible(&DMatrix::zeros(2, 3)));
    }

    #[test]
    fn rank_counts() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(rank(&m, 1e-12), 1);
    }
}
