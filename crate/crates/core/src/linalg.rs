//! Gaussian elimination over [`Scalar`] rows: rank, span membership,
//! particular solutions, nullspaces and inversion.
//!
//! Rational rows eliminate exactly with first-nonzero pivoting; float rows
//! pivot on the largest magnitude and treat entries at or below `tol` as
//! zero. Just enough machinery for the code model, nothing more.

use crate::scalar::Scalar;

/// A matrix in row-echelon form together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub rows: Vec<Vec<Scalar>>,
    pub pivots: Vec<usize>,
}

fn is_zero(s: &Scalar, tol: f64) -> bool {
    s.is_zero_within(tol)
}

/// Reduces `rows` to echelon form with normalized pivots.
pub fn echelon(mut rows: Vec<Vec<Scalar>>, tol: f64) -> Echelon {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        // Exact entries take the first nonzero pivot; float entries pivot on
        // the largest magnitude. An exact pivot is preferred when available.
        let mut best: Option<usize> = None;
        for i in r..nrows {
            if is_zero(&rows[i][c], tol) {
                continue;
            }
            if rows[i][c].is_exact() {
                best = Some(i);
                break;
            }
            match best {
                None => best = Some(i),
                Some(b) => {
                    if rows[i][c].magnitude() > rows[b][c].magnitude() {
                        best = Some(i);
                    }
                }
            }
        }
        let Some(pivot_row) = best else { continue };
        rows.swap(r, pivot_row);
        let inv = rows[r][c].recip();
        for e in rows[r].iter_mut() {
            *e = &*e * &inv;
        }
        for i in 0..nrows {
            if i != r && !is_zero(&rows[i][c], tol) {
                let factor = rows[i][c].clone();
                for j in 0..ncols {
                    let delta = &factor * &rows[r][j];
                    rows[i][j] = &rows[i][j] - &delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(pivots.len());
    Echelon { rows, pivots }
}

pub fn rank(rows: &[Vec<Scalar>], tol: f64) -> usize {
    echelon(rows.to_vec(), tol).pivots.len()
}

/// Residual of `v` after elimination against an echelon basis.
pub fn reduce_against(ech: &Echelon, v: &[Scalar], tol: f64) -> Vec<Scalar> {
    let mut v = v.to_vec();
    for (row, &c) in ech.rows.iter().zip(&ech.pivots) {
        if !is_zero(&v[c], tol) {
            let factor = v[c].clone();
            for j in 0..v.len() {
                let delta = &factor * &row[j];
                v[j] = &v[j] - &delta;
            }
        }
    }
    v
}

/// True when `v` lies in the row span. Exact rows decide exactly; float rows
/// accept a residual of norm at most `tol`.
pub fn in_span(rows: &[Vec<Scalar>], v: &[Scalar], tol: f64) -> bool {
    let ech = echelon(rows.to_vec(), tol);
    let residual = reduce_against(&ech, v, tol);
    let exact = residual.iter().all(|s| s.is_exact());
    if exact {
        residual.iter().all(|s| s.is_zero_within(0.0))
    } else {
        let norm2: f64 = residual.iter().map(|s| s.to_f64().powi(2)).sum();
        norm2.sqrt() <= tol
    }
}

/// One solution of `A x = b` with free variables set to zero, or `None` when
/// the system is inconsistent.
pub fn solve_particular(a: &[Vec<Scalar>], b: &[Scalar], tol: f64) -> Option<Vec<Scalar>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<Scalar>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    if aug.is_empty() {
        return Some(vec![Scalar::zero(); ncols]);
    }
    let ech = echelon(std::mem::take(&mut aug), tol);
    let mut x = vec![Scalar::zero(); ncols];
    for (row, &c) in ech.rows.iter().zip(&ech.pivots) {
        if c == ncols {
            return None; // pivot in the RHS column: inconsistent
        }
        x[c] = row[ncols].clone();
    }
    Some(x)
}

/// Basis of `{x : A x = 0}` from the echelon form, one vector per free
/// column, in increasing column order. `ncols` fixes the ambient dimension
/// even when `a` has no rows.
pub fn nullspace(a: &[Vec<Scalar>], ncols: usize, tol: f64) -> Vec<Vec<Scalar>> {
    if a.is_empty() {
        return (0..ncols)
            .map(|j| {
                let mut v = vec![Scalar::zero(); ncols];
                v[j] = Scalar::one();
                v
            })
            .collect();
    }
    debug_assert!(a.iter().all(|r| r.len() == ncols));
    let ech = echelon(a.to_vec(), tol);
    let mut basis = Vec::new();
    for j in 0..ncols {
        if ech.pivots.contains(&j) {
            continue;
        }
        let mut v = vec![Scalar::zero(); ncols];
        v[j] = Scalar::one();
        for (row, &c) in ech.rows.iter().zip(&ech.pivots) {
            v[c] = -&row[j];
        }
        basis.push(v);
    }
    basis
}

/// Inverse of a square matrix, or `None` when singular.
pub fn invert(a: &[Vec<Scalar>], tol: f64) -> Option<Vec<Vec<Scalar>>> {
    let n = a.len();
    let mut aug: Vec<Vec<Scalar>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            for j in 0..n {
                r.push(if i == j {
                    Scalar::one()
                } else {
                    Scalar::zero()
                });
            }
            r
        })
        .collect();
    let ech = echelon(std::mem::take(&mut aug), tol);
    if ech.pivots.len() != n || ech.pivots.iter().enumerate().any(|(i, &c)| i != c) {
        return None;
    }
    Some(ech.rows.iter().map(|r| r[n..].to_vec()).collect())
}

/// `A B` for dense Scalar matrices.
pub fn matmul(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = a.len();
    let inner = b.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![Scalar::zero(); m]; n];
    for i in 0..n {
        for k in 0..inner {
            if a[i][k].is_zero_within(0.0) && a[i][k].is_exact() {
                continue;
            }
            for j in 0..m {
                let delta = &a[i][k] * &b[k][j];
                out[i][j] = &out[i][j] + &delta;
            }
        }
    }
    out
}
