//! Dense symmetric and generalized symmetric-definite eigensolvers.
//!
//! Householder tridiagonalization followed by implicit QL, as in EISPACK's
//! `tred2`/`tql2`. Transformations are stored column-major so the inner
//! loops run over contiguous memory.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Eigen-decomposition of a dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct DenseEigen {
    pub n: usize,
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvector `j` occupies `vectors[j*n .. (j+1)*n]`.
    pub vectors: Option<Vec<f64>>,
}

impl DenseEigen {
    pub fn vector(&self, j: usize) -> Option<&[f64]> {
        self.vectors.as_ref().map(|v| &v[j * self.n..(j + 1) * self.n])
    }
}

/// Eigenvalues (and optionally eigenvectors) of a symmetric row-major matrix.
pub fn symmetric_eigen(mut a: Vec<f64>, n: usize, want_vectors: bool) -> Result<DenseEigen> {
    if a.len() != n * n {
        return Err(Error::InvalidArgument(format!("matrix has {} entries, expected {}", a.len(), n * n)));
    }
    if n == 0 {
        return Ok(DenseEigen { n, values: Vec::new(), vectors: want_vectors.then(Vec::new) });
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut a, &mut d, &mut e, want_vectors);
    tql2(n, &mut a, &mut d, &mut e, want_vectors)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values = idx.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| {
        let mut out = Vec::with_capacity(n * n);
        for &i in &idx {
            out.extend_from_slice(&a[i * n..(i + 1) * n]);
        }
        out
    });
    Ok(DenseEigen { n, values, vectors })
}

/// In-place lower Cholesky factor of a row-major SPD matrix.
pub fn cholesky(a: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) {
            return Err(Error::FactorizationBreakdown { shift: 0.0, pivot: j });
        }
        let ljj = diag.sqrt();
        a[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            let (ri, rj) = (i * n, j * n);
            for k in 0..j {
                s -= a[ri + k] * a[rj + k];
            }
            a[i * n + j] = s / ljj;
        }
        for i in 0..j {
            a[i * n + j] = 0.0;
        }
    }
    Ok(())
}

/// Solve `L x = b` for lower-triangular row-major `L`.
fn forward(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        let row = &l[i * n..i * n + i];
        for (k, lk) in row.iter().enumerate() {
            s -= lk * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solve `Lᵀ x = b`.
fn backward(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let x = b[i] / l[i * n + i];
        b[i] = x;
        let row = &l[i * n..i * n + i];
        for (k, lk) in row.iter().enumerate() {
            b[k] -= lk * x;
        }
    }
}

/// Generalized problem `A x = λ M x` with `M` SPD; eigenvectors M-orthonormal.
pub fn generalized_eigen(a: &[f64], m: &[f64], n: usize, want_vectors: bool) -> Result<DenseEigen> {
    let mut l = m.to_vec();
    cholesky(&mut l, n)?;
    // Rows of the symmetric A are its columns: row i becomes column i of L⁻¹A.
    let mut x = a.to_vec();
    for i in 0..n {
        forward(&l, n, &mut x[i * n..(i + 1) * n]);
    }
    transpose(&mut x, n);
    // Row i is now row i of L⁻¹A, and L⁻¹ of it is column i of C = L⁻¹AL⁻ᵀ.
    for i in 0..n {
        forward(&l, n, &mut x[i * n..(i + 1) * n]);
    }
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (x[i * n + j] + x[j * n + i]);
            x[i * n + j] = v;
            x[j * n + i] = v;
        }
    }
    let mut eig = symmetric_eigen(x, n, want_vectors)?;
    if let Some(v) = eig.vectors.as_mut() {
        for j in 0..n {
            backward(&l, n, &mut v[j * n..(j + 1) * n]);
        }
    }
    Ok(eig)
}

fn transpose(x: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            x.swap(i * n + j, j * n + i);
        }
    }
}

// `w` holds V column-major: V[k][j] = w[j*n + k].
fn tred2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    macro_rules! v {
        ($r:expr, $c:expr) => {
            w[($c) * n + ($r)]
        };
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
                v!(j, i) = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v!(j, i) = f;
                g = e[j] + v!(j, j) * f;
                let col = j * n;
                for k in j + 1..i {
                    let vkj = w[col + k];
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = j * n;
                for k in j..i {
                    w[col + k] -= f * e[k] + g * d[k];
                }
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
            }
        }
        d[i] = h;
    }
    if !accumulate {
        for j in 0..n {
            d[j] = v!(j, j);
        }
        e[0] = 0.0;
        return;
    }
    for i in 0..n - 1 {
        v!(n - 1, i) = v!(i, i);
        v!(i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v!(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                let (cj, ci) = (j * n, (i + 1) * n);
                for k in 0..=i {
                    g += w[ci + k] * w[cj + k];
                }
                for k in 0..=i {
                    w[cj + k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v!(k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
        v!(n - 1, j) = 0.0;
    }
    v!(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

fn tql2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64], vectors: bool) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::InvalidArgument(format!("QL iteration did not converge at index {l}")));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        let (lo, hi) = w.split_at_mut((i + 1) * n);
                        let vi = &mut lo[i * n..];
                        let vi1 = &mut hi[..n];
                        for k in 0..n {
                            let hk = vi1[k];
                            vi1[k] = s * vi[k] + c * hk;
                            vi[k] = c * vi[k] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn tridiagonal_toeplitz_spectrum() {
        // Eigenvalues of tridiag(−1, 2, −1): 2 − 2cos(kπ/(n+1)).
        let n = 40;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 2.0;
            if i + 1 < n {
                a[i * n + i + 1] = -1.0;
                a[(i + 1) * n + i] = -1.0;
            }
        }
        let eig = symmetric_eigen(a.clone(), n, true).unwrap();
        for (k, &v) in eig.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12);
        }
        let vals_only = symmetric_eigen(a.clone(), n, false).unwrap();
        for (x, y) in vals_only.values.iter().zip(&eig.values) {
            assert!((x - y).abs() < 1e-12);
        }
        for j in [0, 7, 39] {
            let v = eig.vector(j).unwrap();
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a[i * n + k] * v[k]).sum();
                assert!((av - eig.values[j] * v[i]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn generalized_against_diagonal_mass() {
        let n = 3;
        let a = [2.0, 0.0, 0.0, 0.0, 6.0, 0.0, 0.0, 0.0, 12.0];
        let m = [1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0];
        let eig = generalized_eigen(&a, &m, n, true).unwrap();
        for (v, exact) in eig.values.iter().zip([2.0, 3.0, 4.0]) {
            assert!((v - exact).abs() < 1e-13);
        }
        let x = eig.vector(1).unwrap();
        let norm: f64 = (0..n).map(|i| m[i * n + i] * x[i] * x[i]).sum();
        assert!((norm - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = [1.0, 2.0, 2.0, 1.0];
        assert!(cholesky(&mut a, 2).is_err());
    }
}
