//! Small dense-matrix helpers shared by the cocycle and spectrum kernels.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// QR factorization with the sign convention that makes the diagonal of `R`
/// strictly positive (the unique Iwasawa-compatible choice).
pub fn qr_positive(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    let n = r.nrows().min(r.ncols());
    for k in 0..n {
        let d = r[(k, k)];
        if d == 0.0 || !d.is_finite() {
            return Err(Error::RankLoss(format!("zero diagonal in QR at column {k}")));
        }
        if d < 0.0 {
            for c in 0..r.ncols() {
                r[(k, c)] = -r[(k, c)];
            }
            for rw in 0..q.nrows() {
                q[(rw, k)] = -q[(rw, k)];
            }
        }
    }
    Ok((q, r))
}

pub fn is_orthogonal(q: &DMatrix<f64>, tol: f64) -> bool {
    let n = q.nrows();
    let gram = q.transpose() * q;
    let id = DMatrix::<f64>::identity(n, n);
    (gram - id).abs().max() <= tol
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order and columns of the returned matrix matching that order.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let se = nalgebra::SymmetricEigen::new(m.clone());
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let vals = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// The `k`-th exterior power of `a` in the lexicographic wedge basis: entry
/// `(S, T)` is the minor of `a` with rows `S` and columns `T`.
pub fn exterior_power(a: &DMatrix<f64>, subsets: &[Vec<usize>]) -> DMatrix<f64> {
    let m = subsets.len();
    let mut out = DMatrix::zeros(m, m);
    for (ri, rows) in subsets.iter().enumerate() {
        for (ci, cols) in subsets.iter().enumerate() {
            out[(ri, ci)] = minor(a, rows, cols);
        }
    }
    out
}

fn minor(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    match k {
        0 => 1.0,
        1 => a[(rows[0], cols[0])],
        2 => {
            a[(rows[0], cols[0])] * a[(rows[1], cols[1])]
                - a[(rows[0], cols[1])] * a[(rows[1], cols[0])]
        }
        _ => {
            let mut sub = DMatrix::zeros(k, k);
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    sub[(i, j)] = a[(r, c)];
                }
            }
            sub.determinant()
        }
    }
}
