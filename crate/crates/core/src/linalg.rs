//! Dense complex linear algebra at working precision.

use crate::error::{Error, Result};
use crate::mp::Cx;

/// Solves `a·x = b` by LU with partial pivoting.
pub fn lu_solve(mut a: Vec<Vec<Cx>>, mut b: Vec<Cx>) -> Result<Vec<Cx>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::SingularMatrix);
    }
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| {
                a[i][k]
                    .norm_sqr()
                    .partial_cmp(&a[j][k].norm_sqr())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[piv][k].is_zero() {
            return Err(Error::SingularMatrix);
        }
        a.swap(k, piv);
        b.swap(k, piv);
        let inv = a[k][k].recip();
        for i in k + 1..n {
            let f = &a[i][k] * &inv;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= &t;
            }
            let t = &f * &b[k];
            b[i] -= &t;
        }
    }
    let mut x = b;
    for k in (0..n).rev() {
        let mut s = x[k].clone();
        for j in k + 1..n {
            s -= &(&a[k][j] * &x[j]);
        }
        x[k] = &s / &a[k][k];
    }
    Ok(x)
}

/// Least-squares solution of an overdetermined system via modified
/// Gram–Schmidt QR. Returns the solution and the largest absolute residual
/// `|a·x − b|_∞`.
pub fn least_squares(a: &[Vec<Cx>], b: &[Cx]) -> Result<(Vec<Cx>, f64)> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m < n || b.len() != m {
        return Err(Error::SingularMatrix);
    }
    let prec = b.first().map_or(64, Cx::prec);
    let mut q: Vec<Vec<Cx>> = (0..n).map(|j| (0..m).map(|i| a[i][j].clone()).collect()).collect();
    let mut r = vec![vec![Cx::zero(prec); n]; n];
    for j in 0..n {
        for k in 0..j {
            let mut d = Cx::zero(prec);
            for i in 0..m {
                d += &(&q[k][i].conj() * &q[j][i]);
            }
            for i in 0..m {
                let t = &d * &q[k][i];
                q[j][i] -= &t;
            }
            r[k][j] += &d;
        }
        let norm = q[j].iter().map(Cx::norm_sqr).fold(rug::Float::new(prec), |s, x| s + x).sqrt();
        if norm.is_zero() {
            return Err(Error::SingularMatrix);
        }
        for v in q[j].iter_mut() {
            *v = v.scale(&norm.clone().recip());
        }
        r[j][j] = Cx::from_real(&norm);
    }
    let mut x: Vec<Cx> = (0..n)
        .map(|k| {
            let mut d = Cx::zero(prec);
            for i in 0..m {
                d += &(&q[k][i].conj() * &b[i]);
            }
            d
        })
        .collect();
    for k in (0..n).rev() {
        let mut s = x[k].clone();
        for j in k + 1..n {
            s -= &(&r[k][j] * &x[j]);
        }
        x[k] = &s / &r[k][k];
    }
    let mut res = 0.0f64;
    for i in 0..m {
        let mut s = -&b[i];
        for j in 0..n {
            s += &(&a[i][j] * &x[j]);
        }
        res = res.max(s.abs_f64());
    }
    Ok((x, res))
}
