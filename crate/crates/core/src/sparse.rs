//! Compressed sparse symmetric matrices and an `LDLᵀ` factorization
//! without pivoting, ordered by geometric nested dissection.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Square sparse matrix in compressed-row form (full symmetric pattern).
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Sum duplicate triplets into a matrix; the column indices of each row are sorted.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_unstable_by_key(|e| e.0);
            for &(c, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, xi) in x.iter().enumerate().take(self.n) {
            let mut row = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.values[k] * y[self.col_idx[k]];
            }
            acc += xi * row;
        }
        acc
    }

    /// `a·self + b·other`; both matrices must share a sparsity pattern.
    pub fn combine(&self, a: f64, other: &CsrMatrix, b: f64) -> CsrMatrix {
        assert!(self.row_ptr == other.row_ptr && self.col_idx == other.col_idx, "patterns differ");
        CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> CsrMatrix {
        CsrMatrix { values: self.values.iter().map(|v| c * v).collect(), ..self.clone() }
    }

    /// Largest `|A_ij − A_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i * self.n + j] = v;
            }
        }
        d
    }

    /// Principal submatrix on the kept indices (in the given order).
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for (j, v) in self.row(old_i) {
                if map[j] != usize::MAX {
                    triplets.push((new_i, map[j], v));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), &triplets)
    }
}

/// Fill-reducing ordering by recursive coordinate bisection: each part is
/// split at the median of its wider coordinate and the nodes of one side
/// adjacent to the other form a separator numbered after both halves.
pub fn nested_dissection(pattern: &CsrMatrix, coords: &[[f64; 2]]) -> Vec<usize> {
    const LEAF: usize = 48;
    let n = pattern.n;
    let mut order = Vec::with_capacity(n);
    let mut side = vec![0u8; n];
    // Explicit stack; a separator is emitted after both of its halves.
    enum Task {
        Split(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Task::Split((0..n).collect())];
    while let Some(task) = stack.pop() {
        let mut part = match task {
            Task::Emit(sep) => {
                order.extend(sep);
                continue;
            }
            Task::Split(part) => part,
        };
        if part.len() <= LEAF {
            order.extend(part);
            continue;
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for &v in &part {
            for d in 0..2 {
                lo[d] = lo[d].min(coords[v][d]);
                hi[d] = hi[d].max(coords[v][d]);
            }
        }
        let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
        part.sort_unstable_by(|a, b| coords[*a][axis].partial_cmp(&coords[*b][axis]).unwrap().then(a.cmp(b)));
        let mid = part.len() / 2;
        for (k, &v) in part.iter().enumerate() {
            side[v] = if k < mid { 1 } else { 2 };
        }
        let mut left = Vec::with_capacity(mid);
        let mut right = Vec::with_capacity(part.len() - mid);
        let mut sep = Vec::new();
        for &v in &part[..mid] {
            if pattern.row(v).any(|(j, _)| side[j] == 2) {
                sep.push(v);
            } else {
                left.push(v);
            }
        }
        right.extend_from_slice(&part[mid..]);
        for &v in &part {
            side[v] = 0;
        }
        if left.is_empty() || right.is_empty() {
            order.extend(part);
            continue;
        }
        stack.push(Task::Emit(sep));
        stack.push(Task::Split(right));
        stack.push(Task::Split(left));
    }
    order
}

/// Sparse `LDLᵀ` factorization `P A Pᵀ = L D Lᵀ` without pivoting.
#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

/// Pivots with `|d| ≤ PIVOT_TOLERANCE · max|A_ii|` count as breakdown.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Elimination tree and column counts of `L` for a permuted pattern.
#[derive(Debug, Clone)]
pub struct Symbolic {
    perm: Vec<usize>,
    pinv: Vec<usize>,
    parent: Vec<usize>,
    lp: Vec<usize>,
}

impl Symbolic {
    pub fn new(a: &CsrMatrix, perm: Vec<usize>) -> Self {
        let n = a.n;
        let mut pinv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }
        let none = usize::MAX;
        let mut parent = vec![none; n];
        let mut flag = vec![none; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for (j, _) in a.row(perm[k]) {
                let mut i = pinv[j];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == none {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        Self { perm, pinv, parent, lp }
    }

    pub fn fill(&self) -> usize {
        *self.lp.last().unwrap_or(&0)
    }
}

impl Ldl {
    /// Numeric factorization of `a` on a precomputed symbolic structure.
    pub fn factor(a: &CsrMatrix, sym: &Symbolic) -> Result<Ldl> {
        let n = a.n;
        let none = usize::MAX;
        let scale = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let tol = PIVOT_TOLERANCE * scale;
        let mut li = vec![0usize; sym.fill()];
        let mut lx = vec![0.0; sym.fill()];
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![none; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for (j, v) in a.row(sym.perm[k]) {
                let mut i = sym.pinv[j];
                if i <= k {
                    y[i] += v;
                    let mut len = 0;
                    while flag[i] != k {
                        pattern[len] = i;
                        len += 1;
                        flag[i] = k;
                        i = sym.parent[i];
                    }
                    while len > 0 {
                        top -= 1;
                        len -= 1;
                        pattern[top] = pattern[len];
                    }
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            while top < n {
                let i = pattern[top];
                top += 1;
                let yi = y[i];
                y[i] = 0.0;
                let p2 = sym.lp[i] + lnz[i];
                for p in sym.lp[i]..p2 {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[p2] = k;
                lx[p2] = l_ki;
                lnz[i] += 1;
            }
            if !(d[k].abs() > tol) {
                return Err(Error::FactorizationBreakdown { shift: f64::NAN, pivot: k });
            }
        }
        Ok(Ldl { n, perm: sym.perm.clone(), lp: sym.lp.clone(), li, lx, d })
    }

    /// Number of negative pivots (Sylvester inertia).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let mut x: Vec<f64> = (0..n).map(|k| b[self.perm[k]]).collect();
        for j in 0..n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for (xj, dj) in x.iter_mut().zip(&self.d) {
            *xj /= dj;
        }
        for j in (0..n).rev() {
            let mut acc = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                acc -= self.lx[p] * x[self.li[p]];
            }
            x[j] = acc;
        }
        for k in 0..n {
            b[self.perm[k]] = x[k];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Symbolic analysis plus numeric factorization in one call.
pub fn factor_with_ordering(a: &CsrMatrix, coords: &[[f64; 2]]) -> Result<Ldl> {
    if coords.len() != a.n {
        return Err(Error::InvalidArgument(format!("{} coordinates for a matrix of order {}", coords.len(), a.n)));
    }
    let sym = Symbolic::new(a, nested_dissection(a, coords));
    Ldl::factor(a, &sym)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_2d(m: usize) -> (CsrMatrix, Vec<[f64; 2]>) {
        let id = |i: usize, j: usize| i * m + j;
        let mut t = Vec::new();
        let mut coords = Vec::new();
        for i in 0..m {
            for j in 0..m {
                coords.push([i as f64, j as f64]);
                t.push((id(i, j), id(i, j), 4.0));
                if i > 0 {
                    t.push((id(i, j), id(i - 1, j), -1.0));
                }
                if i + 1 < m {
                    t.push((id(i, j), id(i + 1, j), -1.0));
                }
                if j > 0 {
                    t.push((id(i, j), id(i, j - 1), -1.0));
                }
                if j + 1 < m {
                    t.push((id(i, j), id(i, j + 1), -1.0));
                }
            }
        }
        (CsrMatrix::from_triplets(m * m, &t), coords)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0), (0, 1, 4.0)]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn ordering_is_a_permutation() {
        let (a, coords) = laplacian_2d(30);
        let mut p = nested_dissection(&a, &coords);
        p.sort_unstable();
        assert!(p.iter().enumerate().all(|(k, &v)| k == v));
    }

    #[test]
    fn ldl_solves_and_counts() {
        let (a, coords) = laplacian_2d(25);
        let f = factor_with_ordering(&a, &coords).unwrap();
        assert_eq!(f.negative_pivots(), 0);
        let b: Vec<f64> = (0..a.n).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = f.solve(&b);
        let r = a.apply(&x);
        let err = r.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        // Eigenvalues of the 5-point Laplacian: 4 − 2cos(iπ/(m+1)) − 2cos(jπ/(m+1)).
        let m = 25;
        let shift = 1.3;
        let oracle = (1..=m)
            .flat_map(|i| (1..=m).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let t = core::f64::consts::PI / (m + 1) as f64;
                4.0 - 2.0 * (i as f64 * t).cos() - 2.0 * (j as f64 * t).cos() < shift
            })
            .count();
        let mut t = Vec::new();
        for i in 0..a.n {
            for (j, v) in a.row(i) {
                t.push((i, j, if i == j { v - shift } else { v }));
            }
        }
        let s = CsrMatrix::from_triplets(a.n, &t);
        let f = factor_with_ordering(&s, &coords).unwrap();
        assert_eq!(f.negative_pivots(), oracle);
    }

    #[test]
    fn singular_pivot_reported() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let err = factor_with_ordering(&a, &[[0.0, 0.0], [1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::FactorizationBreakdown { .. }));
    }

    #[test]
    fn nested_dissection_limits_fill() {
        let (a, coords) = laplacian_2d(60);
        let natural = Symbolic::new(&a, (0..a.n).collect());
        let nd = Symbolic::new(&a, nested_dissection(&a, &coords));
        assert!(nd.fill() < natural.fill());
    }
}
