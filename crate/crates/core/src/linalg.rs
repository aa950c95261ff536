//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{ComplexField, DMatrix, DVector};

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order; column `i` of the returned matrix belongs to value `i`.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen_desc(m);
    let scaled = DMatrix::from_fn(vecs.nrows(), vecs.ncols(), |i, j| vecs[(i, j)] * f(vals[j]));
    &scaled * vecs.transpose()
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `‖M − Mᵀ‖_F / ‖M‖_F` (zero for the zero matrix).
pub fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (m - m.transpose()).norm() / norm
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    let norm = m
        .column_iter()
        .map(|c| c.iter().map(|x| x.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m.scale(scale);
    let mut result = DMatrix::<T>::identity(n, n);
    let mut term = DMatrix::<T>::identity(n, n);
    for k in 1..=24 {
        term = (&term * &a).unscale(k as f64);
        result += &term;
        if term.norm() < 1e-18 * result.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Single-linkage clustering of a descending sequence: consecutive values
/// whose gap is at most `tol · max(1, |value|)` share a cluster. Returns the
/// index ranges of the clusters.
pub fn cluster_sorted_desc(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let gap = values[i - 1] - values[i];
            gap > tol * values[i - 1].abs().max(1.0)
        };
        if split {
            clusters.push(start..i);
            start = i;
        }
    }
    clusters
}
