use std::ops::Range;

use nalgebra::{DMatrix, DVector};

/// Residual norm below which a cluster counts as exhausted.
const EXHAUSTED: f64 = 1e-3;

/// Assembles `pairs` orthonormal pairs `(v, partner(v))` from the columns of
/// `vectors`, visiting clusters in the given order.
///
/// Within a cluster the column with the largest component outside the span
/// already chosen is taken next, so degenerate eigenspaces are split into
/// invariant pairs regardless of how the eigensolver rotated them. Returns a
/// matrix whose columns are `v₁, w₁, v₂, w₂, …`.
pub(super) fn paired_basis(
    vectors: &DMatrix<f64>,
    clusters: &[Range<usize>],
    partner: impl Fn(&DVector<f64>) -> DVector<f64>,
    pairs: usize,
) -> DMatrix<f64> {
    let dim = vectors.nrows();
    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(2 * pairs);
    // a final sweep over every column covers clusters split by round-off
    let sweep = std::iter::once(0..vectors.ncols());
    'clusters: for cluster in clusters.iter().cloned().chain(sweep) {
        loop {
            if chosen.len() == 2 * pairs {
                break 'clusters;
            }
            let best = cluster
                .clone()
                .map(|c| {
                    let res = project_out(&vectors.column(c).into_owned(), &chosen);
                    let norm = res.norm();
                    (norm, res)
                })
                .max_by(|a, b| a.0.total_cmp(&b.0));
            let Some((norm, res)) = best else { break };
            if norm < EXHAUSTED {
                break;
            }
            let v = res / norm;
            let w = project_out(&project_out(&partner(&v), &chosen), std::slice::from_ref(&v));
            let w = &w / w.norm();
            chosen.push(v);
            chosen.push(w);
        }
    }
    assert_eq!(chosen.len(), 2 * pairs, "paired basis incomplete");
    let mut out = DMatrix::zeros(dim, 2 * pairs);
    for (i, c) in chosen.iter().enumerate() {
        out.set_column(i, c);
    }
    out
}

fn project_out(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut r = v.clone();
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&r);
            r.axpy(-c, b, 1.0);
        }
    }
    r
}
