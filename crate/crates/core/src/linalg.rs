//! Small dense helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

/// Lower-triangular Cholesky factor, or the 1-based index of the first
/// leading principal minor that fails to be positive.
pub(crate) fn cholesky_lower(a: &DMatrix<f64>) -> Result<DMatrix<f64>, usize> {
    let n = a.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.is_nan() || d <= 0.0 || d.is_infinite() {
            return Err(j + 1);
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Inverse of an SPD matrix from its Cholesky factor, symmetrized exactly.
pub(crate) fn spd_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::<f64>::identity(n, n);
    // L Lᵀ X = I, column by column.
    for c in 0..n {
        let mut y = DVector::<f64>::zeros(n);
        for i in 0..n {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * inv[(k, c)];
            }
            inv[(i, c)] = s / l[(i, i)];
        }
    }
    symmetrize(&inv)
}

/// `(A + Aᵀ)/2`; exact symmetry since floating-point addition commutes.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

pub fn outer(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    a * b.transpose()
}

/// Signed determinant through a partially pivoted LU factorization.
pub fn determinant(a: &DMatrix<f64>) -> f64 {
    a.clone().lu().determinant()
}

/// `trace(A B)` without forming the product.
pub fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

pub fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &DVector<f64>) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Orthonormal basis of the complement of `normal` (N−1 columns).
pub fn orthogonal_complement(normal: &DVector<f64>) -> DMatrix<f64> {
    let n = normal.len();
    let unit = normal / normal.norm();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    // Gram-Schmidt over the coordinate axes, least aligned first.
    let mut axes: Vec<usize> = (0..n).collect();
    axes.sort_by(|&i, &j| unit[i].abs().total_cmp(&unit[j].abs()));
    for &axis in &axes {
        if basis.len() == n - 1 {
            break;
        }
        let mut v = DVector::<f64>::zeros(n);
        v[axis] = 1.0;
        // Two passes keep the basis orthogonal to rounding level.
        for _ in 0..2 {
            v -= &unit * unit.dot(&v);
            for b in &basis {
                v -= b * b.dot(&v);
            }
        }
        let len = v.norm();
        if len > 1e-8 {
            basis.push(v / len);
        }
    }
    DMatrix::from_columns(&basis)
}
