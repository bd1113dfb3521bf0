//! Small dense symmetric matrix helpers. Every matrix in this crate is at
//! most 3x3, so these routines favour stability over speed.

use nalgebra::DMatrix;

/// Determinants at or below this value are reported as singular.
pub const SINGULAR_DET: f64 = 1e-300;

/// Relative pivot threshold of the LDLᵀ factorization.
const PIVOT_RTOL: f64 = 1e-13;

/// Natural log of the determinant of a symmetric nonnegative-definite matrix.
///
/// Uses an LDLᵀ factorization with symmetric (diagonal) pivoting. Returns
/// `f64::NEG_INFINITY` when a pivot is nonpositive relative to the largest
/// diagonal entry, or when the determinant underflows [`SINGULAR_DET`].
pub fn log_det_sym(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    if n == 0 {
        return 0.0;
    }
    let mut a = m.clone();
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return f64::NEG_INFINITY;
    }
    let mut log_det = 0.0;
    for k in 0..n {
        // bring the largest remaining diagonal entry to position k
        let piv = (k..n)
            .max_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]))
            .unwrap_or(k);
        if piv != k {
            a.swap_rows(k, piv);
            a.swap_columns(k, piv);
        }
        let d = a[(k, k)];
        if d <= PIVOT_RTOL * scale {
            return f64::NEG_INFINITY;
        }
        log_det += d.ln();
        for i in (k + 1)..n {
            let l = a[(i, k)] / d;
            for j in (k + 1)..=i {
                let v = a[(i, j)] - l * a[(j, k)];
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
    }
    if log_det <= SINGULAR_DET.ln() {
        f64::NEG_INFINITY
    } else {
        log_det
    }
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let inv = m.clone().cholesky()?.inverse();
    inv.iter().all(|v| v.is_finite()).then_some(inv)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = m.clone().symmetric_eigen();
    let lo = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Determinant of a square matrix given column by column.
pub fn det_columns(cols: &[&[f64]]) -> f64 {
    match cols.len() {
        0 => 1.0,
        1 => cols[0][0],
        2 => cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1],
        3 => {
            let (a, b, c) = (cols[0], cols[1], cols[2]);
            a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1])
                + c[0] * (a[1] * b[2] - a[2] * b[1])
        }
        n => DMatrix::from_fn(n, n, |i, j| cols[j][i]).determinant(),
    }
}

/// Solves `a x = b` for a small dense system; `None` when singular.
pub fn solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    let x = a.clone().lu().solve(&rhs)?;
    x.iter()
        .all(|v| v.is_finite())
        .then(|| x.iter().copied().collect())
}
