//! Lowest Dirichlet eigenpairs, inertia counts and counting functions.
//!
//! Small problems go through a dense generalized solver. Larger ones are
//! sliced: inertia counts of `A − σM` fix how many eigenvalues lie in each
//! slice, and shift-invert Lanczos with locking finds exactly that many, so
//! completeness is certified rather than inferred from convergence.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::assemble::DiscreteOperator;
use crate::dense::{generalized_eigen, symmetric_eigen};
use crate::error::{Error, Result};
use crate::geometry::{Shape, SpaceSpec};
use crate::sparse::{nested_dissection, CsrMatrix, Ldl, Symbolic};
use crate::special::bessel_zeros;

/// Free-node count up to which the dense solver is used.
pub const DENSE_LIMIT: usize = 600;
/// Relative gap below which eigenvalues are reported as one cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Dense,
    ShiftInvert,
}

/// Computed eigenpairs, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `‖Av − λMv‖ / (|λ| ‖Mv‖)` per pair.
    pub residuals: Vec<f64>,
    /// Nodal values of each M-orthonormal eigenfunction (zero on the boundary).
    pub eigenfunctions: Option<Vec<Vec<f64>>>,
    pub tolerance: f64,
    pub method: SolveMethod,
    /// Completeness below the last eigenvalue verified by inertia.
    pub certified: bool,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `(value, multiplicity)` groups of eigenvalues within relative `CLUSTER_TOLERANCE`.
    pub fn clusters(&self) -> Vec<(f64, usize)> {
        cluster(&self.eigenvalues, CLUSTER_TOLERANCE)
    }

    pub fn counting(&self) -> CountingFunction {
        CountingFunction::from_eigenvalues(self.eigenvalues.clone(), CountingSource::SpectrumList)
    }

    /// Largest nodal magnitude of eigenfunction `j`.
    pub fn sup_norm(&self, j: usize) -> Option<f64> {
        self.eigenfunctions
            .as_ref()
            .map(|f| f[j].iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }
}

/// Group sorted values whose relative gap is below `tol`.
pub fn cluster(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || (values[i] - values[i - 1]).abs() > tol * values[i].abs().max(values[i - 1].abs());
        if split {
            let group = &values[start..i];
            out.push((group.iter().sum::<f64>() / group.len() as f64, group.len()));
            start = i;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountingSource {
    SpectrumList,
    Inertia,
    AnalyticOracle,
}

/// A step function `λ ↦ #{λ_j ≤ λ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingFunction {
    pub source: CountingSource,
    /// Either the eigenvalues themselves (ascending) …
    pub eigenvalues: Option<Vec<f64>>,
    /// … or a tabulation `(λ, N(λ))` on an ascending grid.
    pub table: Vec<(f64, usize)>,
    /// Known completeness bound beyond the last eigenvalue, if any.
    pub complete_to: Option<f64>,
}

impl CountingFunction {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, source: CountingSource) -> Self {
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self { source, eigenvalues: Some(eigenvalues), table: Vec::new(), complete_to: None }
    }

    pub fn from_table(table: Vec<(f64, usize)>, source: CountingSource) -> Self {
        Self { source, eigenvalues: None, table, complete_to: None }
    }

    /// `N(λ)`; a tabulation answers with the value at the largest grid point ≤ λ.
    pub fn eval(&self, lambda: f64) -> usize {
        match &self.eigenvalues {
            Some(ev) => ev.partition_point(|&v| v <= lambda),
            None => {
                let k = self.table.partition_point(|&(l, _)| l <= lambda);
                if k == 0 {
                    0
                } else {
                    self.table[k - 1].1
                }
            }
        }
    }

    /// Largest λ where the function is known exactly.
    pub fn cutoff(&self) -> f64 {
        match &self.eigenvalues {
            Some(ev) => self.complete_to.unwrap_or(0.0).max(ev.last().copied().unwrap_or(0.0)),
            None => self.table.last().map_or(0.0, |t| t.0),
        }
    }
}

/// Tuning of the eigensolver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub dense_limit: usize,
    pub want_vectors: bool,
    /// Seed of the Lanczos start vectors.
    pub seed: u64,
    /// Largest number of eigenvalues handled by one shift.
    pub slice_capacity: usize,
    pub max_restarts: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { dense_limit: DENSE_LIMIT, want_vectors: true, seed: 0x5eed, slice_capacity: 40, max_restarts: 12 }
    }
}

/// Lowest `m` eigenpairs of `(A, M)`.
pub fn lowest_eigs(op: &DiscreteOperator, m: usize, tol: f64) -> Result<Spectrum> {
    lowest_eigs_with(op, m, tol, &EigenOptions::default())
}

pub fn lowest_eigs_with(op: &DiscreteOperator, m: usize, tol: f64, opts: &EigenOptions) -> Result<Spectrum> {
    let n = op.free_count();
    if m > n {
        return Err(Error::InvalidArgument(format!("requested {m} eigenpairs of a problem with {n} unknowns")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if m == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            residuals: Vec::new(),
            eigenfunctions: opts.want_vectors.then(Vec::new),
            tolerance: tol,
            method: SolveMethod::Dense,
            certified: true,
        });
    }
    if n <= opts.dense_limit {
        dense_lowest(op, m, tol, opts.want_vectors)
    } else {
        sparse_lowest(op, m, tol, opts)
    }
}

/// Every eigenvalue of a dense-sized problem, without eigenvectors.
pub fn all_eigenvalues(op: &DiscreteOperator) -> Result<Vec<f64>> {
    let n = op.free_count();
    Ok(generalized_eigen(&op.stiffness.to_dense(), &op.mass.to_dense(), n, false)?.values)
}

fn dense_lowest(op: &DiscreteOperator, m: usize, tol: f64, want_vectors: bool) -> Result<Spectrum> {
    let n = op.free_count();
    let eig = generalized_eigen(&op.stiffness.to_dense(), &op.mass.to_dense(), n, true)?;
    let mut residuals = Vec::with_capacity(m);
    let mut functions = Vec::new();
    for j in 0..m {
        let v = eig.vector(j).unwrap();
        residuals.push(residual(op, eig.values[j], v));
        if want_vectors {
            functions.push(op.expand(v));
        }
    }
    Ok(Spectrum {
        eigenvalues: eig.values[..m].to_vec(),
        residuals,
        eigenfunctions: want_vectors.then_some(functions),
        tolerance: tol,
        method: SolveMethod::Dense,
        certified: true,
    })
}

/// Relative residual `‖Av − λMv‖ / (|λ| ‖Mv‖)`.
pub fn residual(op: &DiscreteOperator, lambda: f64, v: &[f64]) -> f64 {
    let av = op.stiffness.apply(v);
    let mv = op.mass.apply(v);
    let r: f64 = av.iter().zip(&mv).map(|(a, m)| (a - lambda * m).powi(2)).sum::<f64>().sqrt();
    let s: f64 = mv.iter().map(|x| x * x).sum::<f64>().sqrt();
    r / (lambda.abs() * s).max(f64::MIN_POSITIVE)
}

/// Factorizations of `A − σM` sharing one ordering and symbolic analysis.
#[derive(Debug, Clone)]
pub struct ShiftFactory<'a> {
    op: &'a DiscreteOperator,
    symbolic: Symbolic,
}

/// Result of an inertia evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inertia {
    /// Number of eigenvalues below `shift`.
    pub count: usize,
    /// The shift actually factored.
    pub shift: f64,
    /// True when the requested shift hit a (numerically) singular pivot.
    pub perturbed: bool,
}

impl<'a> ShiftFactory<'a> {
    pub fn new(op: &'a DiscreteOperator) -> Self {
        let coords = op.coordinates();
        let perm = if op.mesh.dimension() == 1 {
            (0..op.free_count()).collect()
        } else {
            nested_dissection(&op.stiffness, &coords)
        };
        Self { op, symbolic: Symbolic::new(&op.stiffness, perm) }
    }

    fn shifted(&self, sigma: f64) -> CsrMatrix {
        self.op.stiffness.combine(1.0, &self.op.mass, -sigma)
    }

    /// Factor at σ, nudging the shift by `1e−8·σ` steps when a pivot vanishes.
    pub fn factor(&self, sigma: f64) -> Result<(Ldl, f64, bool)> {
        let mut shift = sigma;
        let mut last = None;
        for attempt in 0..4 {
            match Ldl::factor(&self.shifted(shift), &self.symbolic) {
                Ok(f) => return Ok((f, shift, attempt > 0)),
                Err(Error::FactorizationBreakdown { pivot, .. }) => {
                    last = Some(pivot);
                    let step = if sigma != 0.0 { 1e-8 * sigma.abs() } else { 1e-8 };
                    shift = sigma + step * (1u64 << attempt) as f64;
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::FactorizationBreakdown { shift, pivot: last.unwrap_or(0) })
    }

    pub fn inertia(&self, sigma: f64) -> Result<Inertia> {
        let (f, shift, perturbed) = self.factor(sigma)?;
        Ok(Inertia { count: f.negative_pivots(), shift, perturbed })
    }
}

/// Number of generalized eigenvalues below λ (Sylvester inertia of `A − λM`).
pub fn inertia_count(op: &DiscreteOperator, lambda: f64) -> Result<usize> {
    Ok(ShiftFactory::new(op).inertia(lambda)?.count)
}

/// Tabulate inertia counts over an ascending grid.
pub fn counting_function(op: &DiscreteOperator, grid: &[f64]) -> Result<CountingFunction> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("counting grid must be ascending".into()));
    }
    let factory = ShiftFactory::new(op);
    let mut table = Vec::with_capacity(grid.len());
    for &l in grid {
        table.push((l, factory.inertia(l)?.count));
    }
    Ok(CountingFunction::from_table(table, CountingSource::Inertia))
}

/// Range of eigenvalues trusted for asymptotic fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliableBand {
    /// Largest eigenvalue of the discrete problem (power-iteration estimate).
    pub spectral_radius: f64,
    /// Indices `m ≤ index_limit` are reliable…
    pub index_limit: usize,
    /// … provided also `λ_m ≤ lambda_limit`.
    pub lambda_limit: f64,
}

impl ReliableBand {
    /// How many of the given ascending eigenvalues fall in the band.
    pub fn count_in(&self, eigenvalues: &[f64]) -> usize {
        eigenvalues
            .iter()
            .take(self.index_limit)
            .take_while(|&&l| l <= self.lambda_limit)
            .count()
    }
}

/// Band `m ≤ n/10` and `λ ≤ 0.01 ρ(M⁻¹A)`, whichever is tighter.
pub fn reliable_band(op: &DiscreteOperator) -> Result<ReliableBand> {
    let rho = spectral_radius(op)?;
    Ok(ReliableBand { spectral_radius: rho, index_limit: op.free_count() / 10, lambda_limit: 0.01 * rho })
}

/// Largest eigenvalue of `(A, M)` by power iteration on `M⁻¹A`.
pub fn spectral_radius(op: &DiscreteOperator) -> Result<f64> {
    let n = op.free_count();
    if n == 0 {
        return Ok(0.0);
    }
    let factory = ShiftFactory::new(op);
    let mf = Ldl::factor(&op.mass, &factory.symbolic)?;
    let mut x: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -0.7 } + 0.01 * (i as f64).sin()).collect();
    let mut rq = 0.0;
    for _ in 0..300 {
        let ax = op.stiffness.apply(&x);
        let num: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let den = op.mass.inner(&x, &x);
        let next = num / den;
        let mut y = mf.solve(&ax);
        let norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in y.iter_mut() {
            *v /= norm;
        }
        x = y;
        if (next - rq).abs() <= 1e-7 * next {
            rq = next;
            break;
        }
        rq = next;
    }
    Ok(rq)
}

struct Locked {
    lambda: f64,
    vector: Vec<f64>,
    mvector: Vec<f64>,
    residual: f64,
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sparse_lowest(op: &DiscreteOperator, m: usize, tol: f64, opts: &EigenOptions) -> Result<Spectrum> {
    let factory = ShiftFactory::new(op);
    let dim = op.mesh.dimension() as f64;
    // Bracket λ_m from above by inertia.
    let guess = lambda1_estimate(op, &factory)?;
    let mut lo = 0.0;
    let mut hi = 1.5 * guess;
    let mut c_hi = factory.inertia(hi)?.count;
    let mut guard = 0;
    while c_hi < m {
        guard += 1;
        if guard > 200 {
            return Err(Error::InvalidArgument("could not bracket the requested eigenvalues".into()));
        }
        lo = hi;
        let grow = if c_hi == 0 { 4.0 } else { ((m as f64 / c_hi as f64).powf(2.0 / dim) * 1.2).max(1.25) };
        hi *= grow;
        c_hi = factory.inertia(hi)?.count;
    }
    let slack = (m / 20).max(4);
    for _ in 0..40 {
        if c_hi <= m + slack {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let c = factory.inertia(mid)?.count;
        if c >= m {
            hi = mid;
            c_hi = c;
        } else {
            lo = mid;
        }
    }
    // Slice boundaries: Chebyshev points of [0, hi], split until each slice is small.
    let pieces = c_hi.div_ceil(opts.slice_capacity).max(1);
    let mut bounds: Vec<(f64, usize)> = (0..=pieces)
        .map(|i| 0.5 * hi * (1.0 - (i as f64 * PI / pieces as f64).cos()))
        .map(|x| (x, 0))
        .collect();
    for b in bounds.iter_mut() {
        b.1 = if b.0 == 0.0 { 0 } else if b.0 == hi { c_hi } else { factory.inertia(b.0)?.count };
    }
    let mut i = 0;
    while i + 1 < bounds.len() {
        let (a, ca) = bounds[i];
        let (b, cb) = bounds[i + 1];
        if cb - ca > opts.slice_capacity && b - a > 1e-9 * b {
            let mid = 0.5 * (a + b);
            let c = factory.inertia(mid)?.count;
            bounds.insert(i + 1, (mid, c));
        } else {
            i += 1;
        }
    }
    let mut all: Vec<Locked> = Vec::new();
    for (slice, w) in bounds.windows(2).enumerate() {
        let (a, ca) = w[0];
        let (b, cb) = w[1];
        if cb == ca {
            continue;
        }
        let found = solve_slice(op, &factory, a, b, cb - ca, tol, opts.seed ^ (slice as u64).wrapping_mul(0x9e37_79b9), opts)?;
        all.extend(found);
    }
    all.sort_by(|x, y| x.lambda.partial_cmp(&y.lambda).unwrap());
    all.truncate(m);
    let certified = all.len() == m;
    if !certified {
        let partial = Spectrum {
            eigenvalues: all.iter().map(|l| l.lambda).collect(),
            residuals: all.iter().map(|l| l.residual).collect(),
            eigenfunctions: None,
            tolerance: tol,
            method: SolveMethod::ShiftInvert,
            certified: false,
        };
        return Err(Error::NoConvergence { requested: m, partial: alloc::boxed::Box::new(partial) });
    }
    Ok(Spectrum {
        eigenvalues: all.iter().map(|l| l.lambda).collect(),
        residuals: all.iter().map(|l| l.residual).collect(),
        eigenfunctions: opts.want_vectors.then(|| all.iter().map(|l| op.expand(&l.vector)).collect()),
        tolerance: tol,
        method: SolveMethod::ShiftInvert,
        certified,
    })
}

/// A few steps of inverse iteration give an upper estimate of λ₁.
fn lambda1_estimate(op: &DiscreteOperator, factory: &ShiftFactory<'_>) -> Result<f64> {
    let (f, _, _) = factory.factor(0.0)?;
    let n = op.free_count();
    let mut x = vec![1.0; n];
    let mut rq = 0.0;
    for _ in 0..8 {
        let mx = op.mass.apply(&x);
        x = f.solve(&mx);
        let s = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        x.iter_mut().for_each(|v| *v /= s);
        rq = op.stiffness.inner(&x, &x) / op.mass.inner(&x, &x);
    }
    Ok(rq)
}

/// Find all `expected` eigenpairs in `[a, b)` with a shift at the midpoint.
#[allow(clippy::too_many_arguments)]
fn solve_slice(
    op: &DiscreteOperator,
    factory: &ShiftFactory<'_>,
    a: f64,
    b: f64,
    expected: usize,
    tol: f64,
    seed: u64,
    opts: &EigenOptions,
) -> Result<Vec<Locked>> {
    let n = op.free_count();
    let sigma0 = 0.5 * (a + b);
    let (f, sigma, _) = factory.factor(sigma0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locked: Vec<Locked> = Vec::new();
    let ritz_tol = (1e-3 * tol).max(1e-13);
    let floor = residual_floor(op);
    let mut restarts = 0;
    while locked.len() < expected {
        if restarts > opts.max_restarts {
            let partial = Spectrum {
                eigenvalues: locked.iter().map(|l| l.lambda).collect(),
                residuals: locked.iter().map(|l| l.residual).collect(),
                eigenfunctions: None,
                tolerance: tol,
                method: SolveMethod::ShiftInvert,
                certified: false,
            };
            return Err(Error::NoConvergence { requested: expected, partial: alloc::boxed::Box::new(partial) });
        }
        restarts += 1;
        let missing = expected - locked.len();
        let kmax = (3 * missing + 40).min(n - locked.len());
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
        let mut mq: Vec<Vec<f64>> = Vec::with_capacity(kmax + 1);
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut start = random_vector(&mut rng, n);
        let mut mstart = op.mass.apply(&start);
        orthogonalize(&mut start, &mut mstart, locked.iter().map(|l| (&l.vector[..], &l.mvector[..])));
        let norm = dot(&start, &mstart).sqrt();
        start.iter_mut().for_each(|v| *v /= norm);
        mstart.iter_mut().for_each(|v| *v /= norm);
        q.push(start);
        mq.push(mstart);
        let mut ritz: Vec<(f64, Vec<f64>)> = Vec::new();
        for j in 0..kmax {
            let mut w = f.solve(&mq[j]);
            let aj = dot(&mq[j], &w);
            for (k, v) in w.iter_mut().enumerate() {
                *v -= aj * q[j][k];
                if j > 0 {
                    *v -= beta[j - 1] * q[j - 1][k];
                }
            }
            alpha.push(aj);
            let mut mw = op.mass.apply(&w);
            for _ in 0..2 {
                orthogonalize(
                    &mut w,
                    &mut mw,
                    locked.iter().map(|l| (&l.vector[..], &l.mvector[..])).chain(q.iter().zip(&mq).map(|(x, y)| (&x[..], &y[..]))),
                );
            }
            let bj = dot(&w, &mw).max(0.0).sqrt();
            beta.push(bj);
            let last = j + 1 == kmax;
            let exhausted = bj <= 1e-12 * aj.abs().max(1e-300);
            if (j + 1) % 5 == 0 || last || exhausted {
                ritz = converged_ritz(&alpha, &beta, sigma, ritz_tol, a, b, exhausted);
                if ritz.len() >= missing || last || exhausted {
                    break;
                }
            }
            w.iter_mut().for_each(|v| *v /= bj);
            mw.iter_mut().for_each(|v| *v /= bj);
            q.push(w);
            mq.push(mw);
        }
        let k = alpha.len();
        for (_, s) in ritz {
            let mut y = vec![0.0; n];
            let mut my = vec![0.0; n];
            for i in 0..k {
                let c = s[i];
                for (t, (yv, myv)) in y.iter_mut().zip(my.iter_mut()).enumerate() {
                    *yv += c * q[i][t];
                    *myv += c * mq[i][t];
                }
            }
            // Re-orthogonalize against pairs locked earlier in this slice.
            orthogonalize(&mut y, &mut my, locked.iter().map(|l| (&l.vector[..], &l.mvector[..])));
            let nrm = dot(&y, &my).sqrt();
            if !(nrm > 0.5) {
                continue;
            }
            y.iter_mut().for_each(|v| *v /= nrm);
            my.iter_mut().for_each(|v| *v /= nrm);
            let ay = op.stiffness.apply(&y);
            let lam = dot(&y, &ay);
            let res = residual(op, lam, &y);
            if res <= tol.max(floor / lam) && lam >= a && lam < b && locked.len() < expected {
                locked.push(Locked { lambda: lam, vector: y, mvector: my, residual: res });
            }
        }
    }
    Ok(locked)
}

/// Rounding floor of `λ·residual`: `‖Av‖` carries an error of order
/// `ε·max_i(A_ii/M_ii)·‖Mv‖`, so tighter residuals cannot be certified.
fn residual_floor(op: &DiscreteOperator) -> f64 {
    let a = op.stiffness.diagonal();
    let m = op.mass.diagonal();
    16.0 * f64::EPSILON * a.iter().zip(&m).map(|(x, y)| x / y).fold(0.0, f64::max)
}

/// M-orthogonalize `(w, Mw)` against M-orthonormal pairs `(q, Mq)`.
fn orthogonalize<'b, I: Iterator<Item = (&'b [f64], &'b [f64])>>(w: &mut [f64], mw: &mut [f64], basis: I) {
    for (q, mq) in basis {
        let c = dot(mq, w);
        if c != 0.0 {
            for ((wv, mwv), (qv, mqv)) in w.iter_mut().zip(mw.iter_mut()).zip(q.iter().zip(mq)) {
                *wv -= c * qv;
                *mwv -= c * mqv;
            }
        }
    }
}

/// Converged Ritz pairs of the Lanczos tridiagonal whose eigenvalue lies in `[a, b)`.
fn converged_ritz(alpha: &[f64], beta: &[f64], sigma: f64, tol: f64, a: f64, b: f64, exact: bool) -> Vec<(f64, Vec<f64>)> {
    let k = alpha.len();
    let mut t = vec![0.0; k * k];
    for i in 0..k {
        t[i * k + i] = alpha[i];
        if i + 1 < k {
            t[i * k + i + 1] = beta[i];
            t[(i + 1) * k + i] = beta[i];
        }
    }
    let Ok(eig) = symmetric_eigen(t, k, true) else {
        return Vec::new();
    };
    let bk = beta[k - 1];
    let mut out = Vec::new();
    for (i, &nu) in eig.values.iter().enumerate() {
        if nu == 0.0 {
            continue;
        }
        let s = eig.vector(i).unwrap();
        let est = (bk * s[k - 1]).abs() / nu.abs();
        let lambda = sigma + 1.0 / nu;
        if (exact || est <= tol) && lambda >= a && lambda < b {
            out.push((lambda, s.to_vec()));
        }
    }
    out
}

/// Squared Bessel zeros of orders `2π|k|/θ` on a sector ball, as a list.
pub fn bessel_spectrum(angle: f64, radius: f64, cutoff: f64) -> Vec<f64> {
    let x_max = radius * cutoff.max(0.0).sqrt();
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let nu = 2.0 * PI * k as f64 / angle;
        if nu >= x_max {
            break;
        }
        let mult = if k == 0 { 1 } else { 2 };
        for z in bessel_zeros(nu, x_max) {
            let l = (z / radius).powi(2);
            if l <= cutoff {
                for _ in 0..mult {
                    out.push(l);
                }
            }
        }
        k += 1;
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Exact Dirichlet eigenvalues `≤ cutoff` of a unit-weight model space.
pub fn analytic_spectrum(space: &SpaceSpec, cutoff: f64) -> Result<CountingFunction> {
    if !space.weight.is_unit() {
        return Err(Error::UnsupportedSpace("analytic spectra exist only for unit weight".into()));
    }
    let values = match space.shape {
        Shape::Interval { length } => {
            let top = (length * cutoff.max(0.0).sqrt() / PI).floor() as usize;
            (1..=top).map(|m| (m as f64 * PI / length).powi(2)).filter(|&l| l <= cutoff).collect()
        }
        Shape::Rectangle { width, height } => {
            let mut v = Vec::new();
            let mmax = (width * cutoff.max(0.0).sqrt() / PI).floor() as usize;
            for i in 1..=mmax {
                let base = (i as f64 / width).powi(2);
                let mut j = 1;
                loop {
                    let l = PI * PI * (base + (j as f64 / height).powi(2));
                    if l > cutoff {
                        break;
                    }
                    v.push(l);
                    j += 1;
                }
            }
            v
        }
        Shape::Disk { radius } => bessel_spectrum(2.0 * PI, radius, cutoff),
        Shape::Cone { radius, angle } => bessel_spectrum(angle, radius, cutoff),
    };
    let mut count = CountingFunction::from_eigenvalues(values, CountingSource::AnalyticOracle);
    count.complete_to = Some(cutoff);
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::discretize;
    use crate::geometry::Domain;

    #[test]
    fn interval_dense() {
        let space = SpaceSpec::interval(1.0).unwrap();
        let op = discretize(&space, Domain::Whole, 1.0 / 512.0).unwrap();
        let spec = lowest_eigs(&op, 5, 1e-8).unwrap();
        for (m, l) in spec.eigenvalues.iter().enumerate() {
            let exact = ((m + 1) as f64 * PI).powi(2);
            assert!((l / exact - 1.0).abs() < 1e-3);
        }
        assert!(spec.residuals.iter().all(|&r| r < 1e-8));
    }

    #[test]
    fn sparse_matches_dense() {
        let space = SpaceSpec::rectangle(1.0, 1.0).unwrap();
        let op = discretize(&space, Domain::Whole, 1.0 / 24.0).unwrap();
        let dense = lowest_eigs(&op, 30, 1e-8).unwrap();
        let opts = EigenOptions { dense_limit: 10, slice_capacity: 12, ..Default::default() };
        let sparse = lowest_eigs_with(&op, 30, 1e-8, &opts).unwrap();
        assert_eq!(sparse.method, SolveMethod::ShiftInvert);
        for (x, y) in dense.eigenvalues.iter().zip(&sparse.eigenvalues) {
            assert!((x - y).abs() < 1e-8 * x, "{x} {y}");
        }
        let f = sparse.eigenfunctions.as_ref().unwrap();
        let r0 = op.restrict(&f[1]);
        let r1 = op.restrict(&f[2]);
        assert!(op.mass.inner(&r0, &r1).abs() < 1e-8);
        assert!((op.mass.inner(&r0, &r0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn inertia_examples() {
        let space = SpaceSpec::interval(1.0).unwrap();
        let op = discretize(&space, Domain::Whole, 1.0 / 256.0).unwrap();
        assert_eq!(inertia_count(&op, 50.0).unwrap(), 2);
        assert_eq!(inertia_count(&op, 0.0).unwrap(), 0);
    }

    #[test]
    fn analytic_examples() {
        let interval = SpaceSpec::interval(PI).unwrap();
        let n = analytic_spectrum(&interval, 10.0).unwrap();
        assert_eq!(n.eigenvalues.as_deref().unwrap(), &[1.0, 4.0, 9.0]);
        let unit = SpaceSpec::interval(1.0).unwrap();
        assert_eq!(analytic_spectrum(&unit, 1000.0).unwrap().eval(1000.0), 10);
        let square = SpaceSpec::rectangle(1.0, 1.0).unwrap();
        assert_eq!(analytic_spectrum(&square, 100.0).unwrap().eval(100.0), 6);
        let disk = SpaceSpec::disk(1.0).unwrap();
        let d = analytic_spectrum(&disk, 40.0).unwrap();
        let first = d.eigenvalues.as_ref().unwrap()[0];
        assert!((first - 2.404_825_557_695_773f64.powi(2)).abs() < 1e-10);
        let weighted = unit.with_weight(crate::geometry::WeightSpec::constant(2.0)).unwrap();
        assert!(matches!(analytic_spectrum(&weighted, 10.0), Err(Error::UnsupportedSpace(_))));
    }

    #[test]
    fn clusters_group_degenerate_values() {
        let c = cluster(&[1.0, 2.0, 2.0 + 1e-9, 3.0], CLUSTER_TOLERANCE);
        assert_eq!(c.len(), 3);
        assert_eq!(c[1].1, 2);
    }
}
