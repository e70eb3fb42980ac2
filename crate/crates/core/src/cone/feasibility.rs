//! Small dense feasibility kernel.
//!
//! Everything the cone module needs reduces to two problems:
//!
//! * non-negative least squares `min ||A x - b||, x >= 0` (Lawson-Hanson
//!   active set), which answers generator-form membership with an explicit
//!   residual;
//! * least distance programming `min ||y|| s.t. G y >= h`, solved through the
//!   classical NNLS dual. It produces strictly positive functionals and
//!   envelope witnesses.
//!
//! Matrices are passed as slices of rows. Sizes stay tiny (a few dozen rows at
//! most), so the least-squares subproblems go through a dense SVD.

use nalgebra::{DMatrix, DVector};

/// Result of a non-negative least-squares solve.
#[derive(Debug, Clone)]
pub struct Nnls {
    pub x: Vec<f64>,
    /// Euclidean norm of `A x - b`.
    pub residual: f64,
}

fn column_matrix(columns: &[&[f64]], rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

/// Solves `min ||sum_j x_j c_j - b||_2` over `x >= 0`, where `c_j` are the
/// columns.
pub fn nnls(columns: &[&[f64]], b: &[f64]) -> Nnls {
    let m = b.len();
    let n = columns.len();
    let mut x = vec![0.0; n];
    if n == 0 {
        return Nnls { x, residual: norm2(b) };
    }
    let scale = columns
        .iter()
        .map(|c| norm2(c))
        .fold(norm2(b), f64::max)
        .max(1.0);
    let tol = 1e-13 * scale * scale * (m.max(n) as f64);

    let mut passive = vec![false; n];
    let residual_of = |x: &[f64]| -> Vec<f64> {
        let mut r = b.to_vec();
        for (j, c) in columns.iter().enumerate() {
            if x[j] != 0.0 {
                for i in 0..m {
                    r[i] -= x[j] * c[i];
                }
            }
        }
        r
    };

    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        let r = residual_of(&x);
        let w: Vec<f64> = columns.iter().map(|c| dot(c, &r)).collect();
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = candidate else { break };
        if w[j] <= tol {
            break;
        }
        passive[j] = true;

        for _ in 0..(3 * n + 10) {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub: Vec<&[f64]> = idx.iter().map(|&j| columns[j]).collect();
            let s = least_squares(&sub, b, m);
            if s.iter().all(|&v| v > 0.0) {
                x.iter_mut().for_each(|v| *v = 0.0);
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = s[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if s[k] <= 0.0 {
                    let denom = x[j] - s[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            let alpha = if alpha.is_finite() { alpha } else { 0.0 };
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (s[k] - x[j]);
                if x[j] <= 1e-15 * scale {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    let residual = norm2(&residual_of(&x));
    Nnls { x, residual }
}

fn least_squares(columns: &[&[f64]], b: &[f64], rows: usize) -> Vec<f64> {
    let a = column_matrix(columns, rows);
    let rhs = DVector::from_column_slice(b);
    let svd = a.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max().max(1.0);
    match svd.solve(&rhs, eps) {
        Ok(sol) => sol.iter().copied().collect(),
        Err(_) => vec![0.0; columns.len()],
    }
}

/// Least distance programming: the minimum Euclidean norm `y` with
/// `g_i . y >= h_i` for every row. Returns `None` when the system is
/// infeasible.
pub fn least_distance(rows: &[&[f64]], h: &[f64]) -> Option<Vec<f64>> {
    let n = rows.first().map(|r| r.len())?;
    // Columns of E = [G^T; h^T], target e_{n+1}.
    let cols: Vec<Vec<f64>> = rows
        .iter()
        .zip(h)
        .map(|(g, &hi)| {
            let mut c = g.to_vec();
            c.push(hi);
            c
        })
        .collect();
    let col_refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    let mut target = vec![0.0; n + 1];
    target[n] = 1.0;
    let sol = nnls(&col_refs, &target);
    // r = E u - f
    let mut r: Vec<f64> = target.iter().map(|t| -t).collect();
    for (j, c) in cols.iter().enumerate() {
        for i in 0..=n {
            r[i] += sol.x[j] * c[i];
        }
    }
    if norm2(&r) <= 1e-10 || r[n].abs() <= 1e-12 {
        return None;
    }
    let y: Vec<f64> = r[..n].iter().map(|v| -v / r[n]).collect();
    let feasible = rows.iter().zip(h).all(|(g, &hi)| {
        let scale = 1.0 + hi.abs() + norm2(g) * norm2(&y);
        dot(g, &y) >= hi - 1e-9 * scale
    });
    feasible.then_some(y)
}

/// Numerical rank of the matrix whose rows are given.
pub fn rank(rows: &[&[f64]], dim: usize) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    let svd = m.svd(false, false);
    let smax = svd.singular_values.max();
    let tol = 1e-10 * smax.max(1.0) * (rows.len().max(dim) as f64);
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis of the vectors orthogonal to every row.
pub fn null_space(rows: &[&[f64]], dim: usize) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return (0..dim)
            .map(|i| {
                let mut v = vec![0.0; dim];
                v[i] = 1.0;
                v
            })
            .collect();
    }
    let r = rows.len().max(dim);
    // Pad with zero rows so that V^T is square.
    let m = DMatrix::from_fn(r, dim, |i, j| if i < rows.len() { rows[i][j] } else { 0.0 });
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let tol = 1e-10 * smax.max(1.0) * (r as f64);
    (0..v_t.nrows())
        .filter(|&i| svd.singular_values[i] <= tol)
        .map(|i| v_t.row(i).iter().copied().collect())
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
