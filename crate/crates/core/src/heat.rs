//! Heat traces and diagonal heat kernels from spectral expansions.
//!
//! A trace is reported as a bracket: the partial sum over the computed
//! eigenvalues, and that sum plus the tail predicted by a power-law growth
//! model `N̂(λ) = Cλ^e` beyond the last eigenvalue.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::assemble::DiscreteOperator;
use crate::eigensolve::{lowest_eigs_with, EigenOptions, Spectrum};
use crate::error::{Error, Result};
use crate::geometry::{Point, Shape, SpaceSpec};
use crate::quad::integrate;
use crate::sparse::{Ldl, Symbolic};
use crate::special::{bessel_j, bessel_zeros, upper_gamma};

/// Relative truncation error a trace without tail model may carry.
pub const UNMODELLED_TAIL_LIMIT: f64 = 1e-6;
/// Relative truncation bound required of a kernel diagonal.
pub const KERNEL_TRUNCATION_LIMIT: f64 = 1e-4;
/// Relative bracket width below which a trace value is usable for limits.
pub const ADMISSIBLE_BRACKET: f64 = 1e-3;

/// Growth model `N̂(λ) = constant · λ^exponent` for the unseen spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub constant: f64,
    pub exponent: f64,
}

impl TailModel {
    /// `∫_{λ_m}^∞ e^{−λt} dN̂(λ) = C·e·t^{−e}·Γ(e, λ_m t)`.
    pub fn tail(&self, lambda_m: f64, t: f64) -> f64 {
        let e = self.exponent;
        self.constant * e * t.powf(-e) * upper_gamma(e, lambda_m * t)
    }
}

/// `Z(t) = Σ e^{−λ_j t}` on a set of times, with a truncation bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatTrace {
    pub times: Vec<f64>,
    /// Partial sums over the computed eigenvalues; also the lower bracket.
    pub partial: Vec<f64>,
    pub upper: Vec<f64>,
    /// Number of eigenvalues summed.
    pub truncation: usize,
}

impl HeatTrace {
    pub fn lower(&self) -> &[f64] {
        &self.partial
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.partial[i] + self.upper[i])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.partial[i]
    }

    pub fn relative_width(&self, i: usize) -> f64 {
        self.width(i) / self.partial[i]
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("heat times must be positive and finite".into()));
    }
    Ok(())
}

/// Heat trace of an ascending eigenvalue list complete below its last entry.
pub fn heat_trace(eigenvalues: &[f64], times: &[f64], tail: Option<TailModel>) -> Result<HeatTrace> {
    check_times(times)?;
    if eigenvalues.is_empty() {
        return Err(Error::InvalidArgument("heat trace of an empty spectrum".into()));
    }
    let m = eigenvalues.len();
    let top = eigenvalues[m - 1];
    let partial: Vec<f64> = times.iter().map(|&t| eigenvalues.iter().map(|&l| (-l * t).exp()).sum()).collect();
    let upper = match tail {
        Some(model) => times.iter().zip(&partial).map(|(&t, &z)| z + model.tail(top, t)).collect(),
        None => {
            let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
            let z = eigenvalues.iter().map(|&l| (-l * t_min).exp()).sum::<f64>();
            let estimate = m as f64 * (-top * t_min).exp() / z;
            if estimate > UNMODELLED_TAIL_LIMIT {
                return Err(Error::TailModelMissing { relative_truncation: estimate });
            }
            partial.clone()
        }
    };
    Ok(HeatTrace { times: times.to_vec(), partial, upper, truncation: m })
}

/// Smallest time at which the trace bracket is within `relative` of the value.
pub fn min_admissible_time(eigenvalues: &[f64], tail: TailModel, relative: f64) -> f64 {
    let top = *eigenvalues.last().expect("nonempty spectrum");
    let width = |t: f64| {
        let z: f64 = eigenvalues.iter().map(|&l| (-l * t).exp()).sum();
        tail.tail(top, t) / z
    };
    let mut hi = 1.0 / top;
    while width(hi) > relative {
        hi *= 2.0;
    }
    let mut lo = hi;
    while width(lo) <= relative && lo > 1e-300 {
        lo *= 0.5;
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if width(mid) > relative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Sampled complete-monotonicity checks on a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceShapeReport {
    pub positive: bool,
    pub nonincreasing: bool,
    pub log_convex: bool,
    /// Times at which a check failed.
    pub violations: Vec<f64>,
}

impl TraceShapeReport {
    pub fn holds(&self) -> bool {
        self.positive && self.nonincreasing && self.log_convex
    }
}

/// Positivity, monotonicity and log-convexity over consecutive sampled
/// times, each judged against the bracket so truncation cannot trip it.
pub fn check_trace_shape(trace: &HeatTrace) -> TraceShapeReport {
    let mut order: Vec<usize> = (0..trace.times.len()).collect();
    order.sort_by(|&a, &b| trace.times[a].partial_cmp(&trace.times[b]).unwrap());
    let t: Vec<f64> = order.iter().map(|&i| trace.times[i]).collect();
    let lo: Vec<f64> = order.iter().map(|&i| trace.partial[i]).collect();
    let hi: Vec<f64> = order.iter().map(|&i| trace.upper[i]).collect();
    let mut report = TraceShapeReport { positive: true, nonincreasing: true, log_convex: true, violations: Vec::new() };
    for i in 0..t.len() {
        if !(lo[i] > 0.0) {
            report.positive = false;
            report.violations.push(t[i]);
        }
    }
    for i in 1..t.len() {
        if lo[i] > hi[i - 1] * (1.0 + 1e-12) {
            report.nonincreasing = false;
            report.violations.push(t[i]);
        }
    }
    for i in 1..t.len().saturating_sub(1) {
        let w = (t[i] - t[i - 1]) / (t[i + 1] - t[i - 1]);
        let chord = (1.0 - w) * hi[i - 1].ln() + w * hi[i + 1].ln();
        if lo[i].ln() > chord + 1e-12 {
            report.log_convex = false;
            report.violations.push(t[i]);
        }
    }
    report
}

/// `H(p, p, t)` on a set of times with a truncation bound per time.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDiagonal {
    /// Mesh node of `p`, when the values come from a discrete expansion.
    pub node: Option<usize>,
    pub point: Point,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub truncation_error: Vec<f64>,
    /// Number of modes summed.
    pub truncation: usize,
}

/// Diagonal kernel at a mesh node from M-orthonormal eigenfunctions.
///
/// The discrete eigenvectors are complete, so `Σ_j φ_j(p)² = (M⁻¹)_pp`; the
/// unsummed modes therefore contribute at most
/// `e^{−λ_m t}·((M⁻¹)_pp − Σ_{j≤m} φ_j(p)²)`.
pub fn kernel_diagonal(op: &DiscreteOperator, spectrum: &Spectrum, node: usize, times: &[f64]) -> Result<KernelDiagonal> {
    check_times(times)?;
    let functions = spectrum
        .eigenfunctions
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("kernel diagonal needs eigenfunctions".into()))?;
    let dof = op
        .free
        .iter()
        .position(|&n| n == node)
        .ok_or_else(|| Error::InvalidArgument(format!("node {node} is constrained")))?;
    let sq: Vec<f64> = functions.iter().map(|f| f[node] * f[node]).collect();
    let n = op.free_count();
    let sym = Symbolic::new(&op.mass, (0..n).collect());
    let mf = Ldl::factor(&op.mass, &sym)?;
    let mut e = vec![0.0; n];
    e[dof] = 1.0;
    let minv = mf.solve(&e)[dof];
    let remaining = (minv - sq.iter().sum::<f64>()).max(0.0);
    let top = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
    let complete = spectrum.len() == n;
    let mut values = Vec::with_capacity(times.len());
    let mut errors = Vec::with_capacity(times.len());
    for &t in times {
        let v: f64 = spectrum.eigenvalues.iter().zip(&sq).map(|(&l, &s)| (-l * t).exp() * s).sum();
        let bound = if complete { 0.0 } else { (-top * t).exp() * remaining };
        if bound > KERNEL_TRUNCATION_LIMIT * v {
            return Err(Error::TimeTooSmall { time: t, relative_truncation: bound / v });
        }
        values.push(v);
        errors.push(bound);
    }
    let point = op.mesh.nodes[node];
    Ok(KernelDiagonal { node: Some(node), point, times: times.to_vec(), values, truncation_error: errors, truncation: spectrum.len() })
}

/// Diagonal kernel at the center of a sector ball of opening `angle` (the
/// whole disk for `2π`, the vertex ball of a cone otherwise). Only the
/// radial modes `J_0(j_{0,k} r/R)` are nonzero there, with
/// `φ_k(0)² = 2/(θR²J_1(j_{0,k})²)`.
pub fn sector_center_kernel(angle: f64, radius: f64, times: &[f64]) -> Result<KernelDiagonal> {
    check_times(times)?;
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    // e^{−x² t/R²} ≤ e^{−46} beyond the last zero.
    let x_max = radius * (46.0 / t_min).sqrt() + 10.0;
    let zeros = bessel_zeros(0.0, x_max);
    let weights: Vec<f64> = zeros
        .iter()
        .map(|&z| 2.0 / (angle * radius * radius * bessel_j(1.0, z).powi(2)))
        .collect();
    let mut values = Vec::with_capacity(times.len());
    let mut errors = Vec::with_capacity(times.len());
    for &t in times {
        let v: f64 = zeros
            .iter()
            .zip(&weights)
            .map(|(&z, &w)| w * (-(z / radius).powi(2) * t).exp())
            .sum();
        // Remaining modes: spacing π, φ(0)² ≈ πx/(θR²) at zero x.
        let bound = (-(x_max / radius).powi(2) * t).exp() / (2.0 * angle * t);
        values.push(v);
        errors.push(bound);
    }
    Ok(KernelDiagonal {
        node: None,
        point: Point::new(0.0, 0.0),
        times: times.to_vec(),
        values,
        truncation_error: errors,
        truncation: zeros.len(),
    })
}

fn gaussian(z: f64, t: f64) -> f64 {
    (-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// Image-sum range covering every term above `e^{−60}`.
fn image_range(length: f64, t: f64) -> i64 {
    ((4.0 * (60.0 * t).sqrt()) / (2.0 * length)).ceil() as i64 + 1
}

/// Dirichlet heat kernel `H(x, y, t)` of `(0, L)` by the method of images.
pub fn interval_kernel(length: f64, x: f64, y: f64, t: f64) -> f64 {
    if t > length * length {
        let mut sum = 0.0;
        for m in 1..2000 {
            let k = m as f64 * PI / length;
            let term = (-k * k * t).exp();
            sum += 2.0 / length * (k * x).sin() * (k * y).sin() * term;
            if term < 1e-30 {
                break;
            }
        }
        return sum;
    }
    let n = image_range(length, t);
    (-n..=n)
        .map(|j| {
            let c = 2.0 * j as f64 * length;
            gaussian(x - y + c, t) - gaussian(x + y + c, t)
        })
        .sum()
}

/// `∫_a^b` of the unit Gaussian density centred at 0 with variance `2t`,
/// without cancellation in the tails.
fn gaussian_mass(a: f64, b: f64, t: f64) -> f64 {
    let s = 2.0 * t.sqrt();
    let (a, b) = (a / s, b / s);
    if a >= 0.0 {
        0.5 * (libm::erfc(a) - libm::erfc(b))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b) - libm::erfc(-a))
    } else {
        1.0 - 0.5 * (libm::erfc(-a) + libm::erfc(b))
    }
}

/// `∫_a^b H(x, y, t) dx` for the interval `(0, L)`.
pub fn interval_kernel_mass(length: f64, y: f64, a: f64, b: f64, t: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = image_range(length, t).max(2);
    (-n..=n)
        .map(|j| {
            let c = 2.0 * j as f64 * length;
            gaussian_mass(a - y + c, b - y + c, t) - gaussian_mass(a + y + c, b + y + c, t)
        })
        .sum()
}

/// Diagonal kernel of an interval or rectangle from the exact 1-D kernels.
pub fn box_kernel_diagonal(shape: Shape, p: Point, times: &[f64]) -> Result<KernelDiagonal> {
    check_times(times)?;
    let values: Vec<f64> = match shape {
        Shape::Interval { length } => times.iter().map(|&t| interval_kernel(length, p.x, p.x, t)).collect(),
        Shape::Rectangle { width, height } => times
            .iter()
            .map(|&t| interval_kernel(width, p.x, p.x, t) * interval_kernel(height, p.y, p.y, t))
            .collect(),
        _ => return Err(Error::UnsupportedSpace("product kernels exist for intervals and rectangles".into())),
    };
    Ok(KernelDiagonal {
        node: None,
        point: p,
        times: times.to_vec(),
        truncation_error: vec![0.0; values.len()],
        values,
        truncation: 0,
    })
}

/// Outcome of comparing kernels on nested domains.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub times: Vec<f64>,
    pub inner: Vec<f64>,
    pub outer: Vec<f64>,
    /// `(t, H_inner − H_outer)` wherever that exceeds the tolerance.
    pub violations: Vec<(f64, f64)>,
    pub max_excess: f64,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `H^Ω(p,p,t) ≤ H^{Ω′}(p,p,t) + tolerance` at every shared time.
pub fn check_kernel_monotonicity(inner: &KernelDiagonal, outer: &KernelDiagonal, tolerance: f64) -> Result<MonotonicityReport> {
    if inner.times.len() != outer.times.len()
        || inner.times.iter().zip(&outer.times).any(|(a, b)| (a - b).abs() > 1e-15 * a.abs())
    {
        return Err(Error::InvalidArgument("kernels must be sampled at the same times".into()));
    }
    let mut report = MonotonicityReport {
        times: inner.times.clone(),
        inner: inner.values.clone(),
        outer: outer.values.clone(),
        violations: Vec::new(),
        max_excess: f64::NEG_INFINITY,
    };
    for i in 0..inner.times.len() {
        let excess = inner.values[i] - outer.values[i];
        report.max_excess = report.max_excess.max(excess);
        if excess > tolerance {
            report.violations.push((inner.times[i], excess));
        }
    }
    Ok(report)
}

/// Both sides of `H_{α,β}(p,p,t) = β⁻¹ H(p,p,t/α²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescalingReport {
    pub alpha: f64,
    pub beta: f64,
    pub time: f64,
    /// Kernel of the rescaled operator at `t`.
    pub lhs: f64,
    /// `H(p, p, t/α²)/β` from the original operator.
    pub rhs: f64,
    pub relative_error: f64,
}

impl RescalingReport {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.relative_error <= tolerance
    }
}

fn truncated_kernel(spectrum: &Spectrum, node: usize, t: f64) -> f64 {
    let f = spectrum.eigenfunctions.as_ref().expect("eigenfunctions requested");
    spectrum.eigenvalues.iter().zip(f).map(|(&l, v)| (-l * t).exp() * v[node] * v[node]).sum()
}

/// Scale distances by α and the measure by β: discretely `A′ = (β/α²)A`,
/// `M′ = βM`. Both operators are solved independently for their lowest
/// `modes` pairs and the truncated kernels compared.
pub fn check_rescaling_identity(
    op: &DiscreteOperator,
    alpha: f64,
    beta: f64,
    node: usize,
    t: f64,
    modes: usize,
) -> Result<RescalingReport> {
    if !(alpha > 0.0 && beta > 0.0 && t > 0.0) {
        return Err(Error::InvalidArgument("α, β and t must be positive".into()));
    }
    if !op.free.contains(&node) {
        return Err(Error::InvalidArgument(format!("node {node} is constrained")));
    }
    let opts = EigenOptions::default();
    let base = lowest_eigs_with(op, modes, 1e-12, &opts)?;
    let scaled_op = op.rescaled(beta / (alpha * alpha), beta);
    let scaled = lowest_eigs_with(&scaled_op, modes, 1e-12, &opts)?;
    let lhs = truncated_kernel(&scaled, node, t);
    let rhs = truncated_kernel(&base, node, t / (alpha * alpha)) / beta;
    Ok(RescalingReport { alpha, beta, time: t, lhs, rhs, relative_error: (lhs - rhs).abs() / rhs.abs() })
}

/// `Σ_i H(x_i, x_i, t)·(M1)_i`, the lumped integral of the diagonal.
pub fn lumped_diagonal_integral(op: &DiscreteOperator, spectrum: &Spectrum, t: f64) -> Result<f64> {
    let functions = spectrum
        .eigenfunctions
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("diagonal integral needs eigenfunctions".into()))?;
    let lumped = op.mass.apply(&vec![1.0; op.free_count()]);
    let mut total = 0.0;
    for (k, &node) in op.free.iter().enumerate() {
        let h: f64 = spectrum
            .eigenvalues
            .iter()
            .zip(functions)
            .map(|(&l, f)| (-l * t).exp() * f[node] * f[node])
            .sum();
        total += h * lumped[k];
    }
    Ok(total)
}

/// Kernel mass outside balls `B_R(p)` and its exponential decay rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TailDecayReport {
    pub time: f64,
    pub radii: Vec<f64>,
    /// `∫_{X∖B_R(p)} H(x, p, t) dμ` per radius.
    pub masses: Vec<f64>,
    /// `max{5t, √(5Nt/2)}`; the slope uses radii at or beyond it.
    pub r0: f64,
    /// Least-squares slope of `ln mass` against `R`.
    pub slope: f64,
    pub monotone: bool,
}

impl TailDecayReport {
    pub fn holds(&self) -> bool {
        self.monotone && self.slope <= -1.0
    }
}

fn rectangle_outside_mass(width: f64, height: f64, p: Point, r: f64, t: f64) -> f64 {
    let row = |y: f64| {
        let dy = y - p.y;
        let mass_x = if dy.abs() >= r {
            interval_kernel_mass(width, p.x, 0.0, width, t)
        } else {
            let w = (r * r - dy * dy).sqrt();
            interval_kernel_mass(width, p.x, 0.0, (p.x - w).max(0.0), t)
                + interval_kernel_mass(width, p.x, (p.x + w).min(width), width, t)
        };
        interval_kernel(height, y, p.y, t) * mass_x
    };
    let mut breaks = vec![0.0, height];
    for y in [p.y - r, p.y, p.y + r] {
        if y > 0.0 && y < height {
            breaks.push(y);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.windows(2).map(|w| integrate(row, w[0], w[1], 1e-300, 1e-10).value).sum()
}

/// Decay of the kernel mass outside growing balls, on an interval or
/// rectangle host where the Dirichlet kernel is known exactly.
pub fn check_tail_decay(space: &SpaceSpec, p: Point, t: f64, radii: &[f64]) -> Result<TailDecayReport> {
    if !space.weight.is_unit() {
        return Err(Error::UnsupportedSpace("tail decay needs a unit-weight host".into()));
    }
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) || !(t > 0.0) {
        return Err(Error::InvalidArgument("need a positive time and at least two increasing radii".into()));
    }
    let host = space.radius_limit(p);
    let r_max = *radii.last().unwrap();
    if r_max >= host {
        return Err(Error::DomainTooSmall { radius: r_max, host_radius: host });
    }
    let masses: Vec<f64> = match space.shape {
        Shape::Interval { length } => radii
            .iter()
            .map(|&r| interval_kernel_mass(length, p.x, 0.0, p.x - r, t) + interval_kernel_mass(length, p.x, p.x + r, length, t))
            .collect(),
        Shape::Rectangle { width, height } => radii.iter().map(|&r| rectangle_outside_mass(width, height, p, r, t)).collect(),
        _ => return Err(Error::UnsupportedSpace("tail decay hosts are intervals and rectangles".into())),
    };
    let n = space.dimension() as f64;
    let r0 = (5.0 * t).max((2.5 * n * t).sqrt());
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(&masses)
        .filter(|(&r, &m)| r >= r0 && m > 0.0)
        .map(|(&r, &m)| (r, m.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument(format!("need two radii beyond R0 = {r0} with positive mass")));
    }
    let slope = least_squares_slope(&pts);
    let monotone = masses.windows(2).all(|w| w[1] <= w[0]);
    Ok(TailDecayReport { time: t, radii: radii.to_vec(), masses, r0, slope, monotone })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
