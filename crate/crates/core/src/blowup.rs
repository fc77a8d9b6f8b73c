//! Blow-ups `(X, d/r, μ/b(p,r), p)` at shrinking scales and local spectral
//! convergence, including a family whose balls lose their boundary.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::assemble::{assemble, assemble_unconstrained, discretize};
use crate::asymptotics::{LimitEstimate, LimitQuantity, SMOOTH_ORDERS};
use crate::dense::generalized_eigen;
use crate::eigensolve::{lowest_eigs, lowest_eigs_with, EigenOptions, Spectrum};
use crate::error::{Error, Result};
use crate::extrapolate::richardson;
use crate::geometry::{ball_moments, Domain, Point, Shape, SpaceSpec, WeightSpec};
use crate::heat::{interval_kernel, least_squares_slope, sector_center_kernel};
use crate::mesh::build_mesh;
use crate::special::unit_ball_volume;

/// How a blow-up spectrum is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupMethod {
    /// The ball is a scaled copy of one reference ball: solve once, rescale.
    ExactRescaling,
    /// Mesh `B_{rR}(p)` afresh at each scale.
    Remesh,
}

/// One scale of a blow-up ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupRung {
    pub scale: f64,
    /// Radius `rR` of the corresponding ball in the base space.
    pub base_radius: f64,
    /// `b(p, r)`.
    pub b: f64,
    /// Dirichlet eigenvalues of `B_R(p)` in the rescaled space.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupLadder {
    pub point: Point,
    pub radius: f64,
    pub method: BlowupMethod,
    pub rungs: Vec<BlowupRung>,
}

/// Relative mesh width used by blow-up solves, in units of the ball radius.
pub const DEFAULT_RELATIVE_H: f64 = 0.02;

fn constant_weight(space: &SpaceSpec) -> Option<f64> {
    space.weight.constant_value()
}

/// Exact self-similarity holds at a cone vertex and on intervals, provided
/// the weight is constant.
pub fn blowup_method(space: &SpaceSpec, p: Point) -> BlowupMethod {
    match (space.shape, constant_weight(space)) {
        (Shape::Cone { .. }, Some(_)) if p.x == 0.0 => BlowupMethod::ExactRescaling,
        (Shape::Interval { .. }, Some(_)) => BlowupMethod::ExactRescaling,
        _ => BlowupMethod::Remesh,
    }
}

/// The reference ball `B_R(p)` as a space of its own, for exact rescaling.
fn reference_ball(space: &SpaceSpec, radius: f64) -> Result<(SpaceSpec, Domain)> {
    let w = space.weight.clone();
    match space.shape {
        Shape::Cone { angle, .. } => Ok((SpaceSpec::cone(radius, angle)?.with_weight(w)?, Domain::Whole)),
        Shape::Interval { .. } => Ok((SpaceSpec::interval(2.0 * radius)?.with_weight(w)?, Domain::Whole)),
        _ => Err(Error::UnsupportedSpace("exact rescaling needs a self-similar ball".into())),
    }
}

fn check_scale(space: &SpaceSpec, p: Point, r: f64, radius: f64) -> Result<()> {
    if !(r > 0.0 && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("scale {r} and radius {radius} must be positive")));
    }
    let limit = space.radius_limit(p);
    if r * radius > limit * (1.0 + 1e-12) {
        return Err(Error::RadiusOutOfDomain { radius: r * radius, limit });
    }
    Ok(())
}

/// Lowest `m` Dirichlet eigenvalues of `B_R(p)` in `(X, d/r, μ/b(p,r))`.
///
/// Eigenvalues do not see the measure normalization (A and M share it),
/// so they equal `r²` times those of `B_{rR}(p)` in `(X, d)`.
pub fn blowup_spectrum(space: &SpaceSpec, p: Point, r: f64, radius: f64, m: usize, h_rel: f64) -> Result<Spectrum> {
    check_scale(space, p, r, radius)?;
    let opts = EigenOptions { want_vectors: false, ..EigenOptions::default() };
    let mut spec = match blowup_method(space, p) {
        BlowupMethod::ExactRescaling => {
            let (reference, domain) = reference_ball(space, radius)?;
            let base = discretize(&reference, domain, h_rel * radius)?;
            // B_{rR}(p) under d is the reference ball with lengths scaled by r:
            // A_r = r^{k−2}A, M_r = r^k M. Dividing d by r and μ by b(p,r)
            // turns both into (r^k/b)·(A, M).
            let k = space.dimension() as i32;
            let f = r.powi(k) / ball_moments(space, p, r)?.b;
            lowest_eigs_with(&base.rescaled(f, f), m, 1e-12, &opts)?
        }
        BlowupMethod::Remesh => {
            let op = discretize(space, Domain::Ball { center: p, radius: r * radius }, h_rel * r * radius)?;
            let mut spec = lowest_eigs_with(&op, m, 1e-10, &opts)?;
            spec.eigenvalues.iter_mut().for_each(|l| *l *= r * r);
            spec
        }
    };
    spec.eigenfunctions = None;
    Ok(spec)
}

/// Blow-up spectra over a ladder of scales.
pub fn blowup_ladder(space: &SpaceSpec, p: Point, radius: f64, scales: &[f64], m: usize, h_rel: f64) -> Result<BlowupLadder> {
    let mut rungs = Vec::with_capacity(scales.len());
    for &r in scales {
        let spec = blowup_spectrum(space, p, r, radius, m, h_rel)?;
        rungs.push(BlowupRung { scale: r, base_radius: r * radius, b: ball_moments(space, p, r)?.b, eigenvalues: spec.eigenvalues });
    }
    Ok(BlowupLadder { point: p, radius, method: blowup_method(space, p), rungs })
}

/// `H^{(ρ)}(p, p, τ)` of the ball `B_ρ(p)` from its exact modal series.
fn centered_ball_kernel(space: &SpaceSpec, p: Point, rho: f64, tau: f64) -> Result<f64> {
    let c = constant_weight(space)
        .ok_or_else(|| Error::UnsupportedSpace("series kernels need a constant weight".into()))?;
    let flat = |angle: f64| -> Result<f64> { Ok(sector_center_kernel(angle, rho, &[tau])?.values[0]) };
    let h = match space.shape {
        Shape::Interval { .. } => interval_kernel(2.0 * rho, rho, rho, tau),
        Shape::Rectangle { .. } | Shape::Disk { .. } => flat(2.0 * PI)?,
        Shape::Cone { angle, .. } if p.x == 0.0 => flat(angle)?,
        Shape::Cone { angle, .. } => {
            if rho > p.x * (0.5 * angle).min(0.5 * PI).sin() {
                return Err(Error::UnsupportedDomain(format!("B_{rho} around an off-vertex point is not a flat disk")));
            }
            flat(2.0 * PI)?
        }
    };
    Ok(h / c)
}

/// `H^{(rR)}(p, p, r²t)·b(p, r)` along a ladder, compared with
/// `ω_k/((k+1)(4π)^{k/2})`. The ball radius `R` must be large against
/// `√t` for the Dirichlet wall to be invisible.
pub fn blowup_kernel_limit(space: &SpaceSpec, p: Point, radius: f64, scales: &[f64], t: f64) -> Result<LimitEstimate> {
    if scales.len() < 3 {
        return Err(Error::InvalidArgument("a kernel ladder needs at least three scales".into()));
    }
    let mut rungs = Vec::with_capacity(scales.len());
    for &r in scales {
        check_scale(space, p, r, radius)?;
        let h = centered_ball_kernel(space, p, r * radius, r * r * t)?;
        rungs.push((r, h * ball_moments(space, p, r)?.b));
    }
    rungs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let ratio = rungs[0].0 / rungs[1].0;
    if rungs.windows(2).any(|w| ((w[0].0 / w[1].0) / ratio - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidArgument("scales must be geometric".into()));
    }
    let values: Vec<f64> = rungs.iter().map(|x| x.1).collect();
    let ex = richardson(&values, ratio, &SMOOTH_ORDERS);
    let k = space.dimension() as f64;
    Ok(LimitEstimate {
        quantity: LimitQuantity::DiagonalLimit,
        ladder: rungs,
        limit: ex.value,
        residual: ex.residual,
        noise: 0.0,
        target: unit_ball_volume(k) / ((k + 1.0) * (4.0 * PI).powf(0.5 * k)),
    })
}

/// The shrinking-interval family and its Dirichlet limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkingIntervalReport {
    pub j: usize,
    /// Lowest eigenvalue on `X_j = [−1+1/j, 1−1/j]`, no constraint applied.
    pub lambda_no_boundary: f64,
    /// Largest relative deviation of its eigenvector from a constant.
    pub constant_deviation: f64,
    /// Lowest Dirichlet eigenvalue of the limit ball `(−1, 1)`.
    pub lambda_dirichlet_limit: f64,
    /// Nodal sup-norm distance of the limit eigenfunction to `cos(πt/2)`.
    pub eigenfunction_error: f64,
}

/// `B_1(0)` is all of `X_j`, whose boundary is empty, so constants are
/// admissible and `λ_{1,j} = 0`; the limit ball `(−1, 1)` carries Dirichlet
/// conditions and `λ_{1,∞} = π²/4`.
pub fn shrinking_interval_example(j: usize, h_family: f64, h_limit: f64) -> Result<ShrinkingIntervalReport> {
    if j < 2 {
        return Err(Error::InvalidArgument(format!("the family starts at j = 2, got {j}")));
    }
    let length = 2.0 - 2.0 / j as f64;
    let space = SpaceSpec::interval(length)?;
    let mesh = build_mesh(&space, Domain::Whole, h_family)?;
    let op = assemble_unconstrained(&mesh, &WeightSpec::Unit)?;
    let n = op.free_count();
    let eig = generalized_eigen(&op.stiffness.to_dense(), &op.mass.to_dense(), n, true)?;
    let v = eig.vector(0).unwrap();
    let mean = v.iter().sum::<f64>() / n as f64;
    let constant_deviation = v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / mean.abs();

    let limit = SpaceSpec::interval(2.0)?;
    let lop = discretize(&limit, Domain::Whole, h_limit)?;
    let spec = lowest_eigs(&lop, 1, 1e-12)?;
    let phi = &spec.eigenfunctions.as_ref().unwrap()[0];
    let sign = if phi.iter().sum::<f64>() >= 0.0 { 1.0 } else { -1.0 };
    let eigenfunction_error = lop
        .mesh
        .nodes
        .iter()
        .zip(phi)
        .map(|(x, v)| (sign * v - (0.5 * PI * (x.x - 1.0)).cos()).abs())
        .fold(0.0, f64::max);
    Ok(ShrinkingIntervalReport {
        j,
        lambda_no_boundary: eig.values[0],
        constant_deviation,
        lambda_dirichlet_limit: spec.eigenvalues[0],
        eigenfunction_error,
    })
}

/// `(j, λ_{1,j})` for the shrinking-interval family.
pub fn shrinking_interval_family(js: &[usize], h: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    js.iter()
        .map(|&j| {
            let space = SpaceSpec::interval(2.0 - 2.0 / j as f64)?;
            let mesh = build_mesh(&space, Domain::Whole, h)?;
            let op = assemble_unconstrained(&mesh, &WeightSpec::Unit)?;
            let n = op.free_count();
            let eig = generalized_eigen(&op.stiffness.to_dense(), &op.mass.to_dense(), n, false)?;
            Ok((j as f64, vec![eig.values[0]]))
        })
        .collect()
}

/// Lowest `m` Dirichlet eigenvalues of `B_R(p)` (or the whole space).
pub fn ball_spectrum(space: &SpaceSpec, domain: Domain, m: usize, h: f64) -> Result<Vec<f64>> {
    let mesh = build_mesh(space, domain, h)?;
    let op = assemble(&mesh, &space.weight)?;
    let opts = EigenOptions { want_vectors: false, ..EigenOptions::default() };
    Ok(lowest_eigs_with(&op, m, 1e-10, &opts)?.eigenvalues)
}

/// Convergence of a family of ball spectra toward a limit spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Family parameter `j` of each member.
    pub params: Vec<f64>,
    pub spectra: Vec<Vec<f64>>,
    pub limit: Vec<f64>,
    /// Largest relative eigenvalue error per member.
    pub errors: Vec<f64>,
    /// Least-squares exponent `q` in `error ∝ j^{−q}`.
    pub rate: f64,
    pub converged: bool,
    /// Whether `∂B_R(p_∞) = ∂(X_∞ ∖ closure)` holds; supplied analytically.
    pub boundary_condition: bool,
    /// Non-convergence traced to a violated boundary condition.
    pub boundary_violation_flagged: bool,
}

pub fn local_spectral_convergence(
    family: &[(f64, Vec<f64>)],
    limit: &[f64],
    boundary_condition: bool,
    tolerance: f64,
) -> Result<ConvergenceReport> {
    if family.len() < 2 || limit.is_empty() {
        return Err(Error::InvalidArgument("need two family members and a limit spectrum".into()));
    }
    let mut errors = Vec::with_capacity(family.len());
    for (j, spec) in family {
        if spec.len() < limit.len() {
            return Err(Error::InvalidArgument(format!("member {j} has fewer eigenvalues than the limit")));
        }
        let e = limit.iter().zip(spec).map(|(l, s)| (s - l).abs() / l.abs()).fold(0.0, f64::max);
        errors.push(e);
    }
    let pts: Vec<(f64, f64)> = family.iter().zip(&errors).filter(|(_, &e)| e > 0.0).map(|((j, _), &e)| (j.ln(), e.ln())).collect();
    let rate = if pts.len() >= 2 { -least_squares_slope(&pts) } else { f64::INFINITY };
    let last = *errors.last().unwrap();
    let converged = last <= tolerance && last <= errors[0];
    Ok(ConvergenceReport {
        params: family.iter().map(|f| f.0).collect(),
        spectra: family.iter().map(|f| f.1.clone()).collect(),
        limit: limit.to_vec(),
        errors,
        rate,
        converged,
        boundary_condition,
        boundary_violation_flagged: !converged && !boundary_condition,
    })
}
