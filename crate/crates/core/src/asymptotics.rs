//! Weyl constants, small-time limits and their Tauberian consistency.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::assemble::discretize;
use crate::eigensolve::{inertia_count, lowest_eigs_with, CountingFunction, EigenOptions};
use crate::error::{Error, Result};
use crate::extrapolate::richardson;
use crate::geometry::{domain_measure, Domain, SpaceSpec, VolumeProfile, WeightSpec};
use crate::heat::{least_squares_slope, HeatTrace, KernelDiagonal};
use crate::special::{gamma, unit_ball_volume};

/// Fewest sample points a Weyl fit accepts.
pub const MIN_FIT_POINTS: usize = 20;
/// Error orders (in t) removed from trace ladders: boundary, corner, next.
pub const TRACE_ORDERS: [f64; 3] = [0.5, 1.0, 1.5];
/// Orders removed from diagonal ladders at smooth points.
pub const SMOOTH_ORDERS: [f64; 3] = [1.0, 2.0, 3.0];
/// Orders removed from diagonal ladders at a cone vertex.
pub const VERTEX_ORDERS: [f64; 3] = [0.5, 1.0, 1.5];

/// `ω_k/(2π)^k`, the Weyl constant per unit of `H^k`.
pub fn weyl_factor(k: usize) -> f64 {
    unit_ball_volume(k as f64) / (2.0 * PI).powi(k as i32)
}

/// The same constant written as `Γ(k/2+1)⁻¹ (4π)^{−k/2}`.
pub fn weyl_factor_gamma(k: usize) -> f64 {
    1.0 / (gamma(0.5 * k as f64 + 1.0) * (4.0 * PI).powf(0.5 * k as f64))
}

/// Predicted `lim N_Ω(λ)/λ^{k/2} = ω_k H^k(Ω)/(2π)^k`.
pub fn weyl_predict(space: &SpaceSpec, domain: Domain, k: usize) -> Result<f64> {
    if k != space.dimension() {
        return Err(Error::UnsupportedDomain(format!(
            "H^{k} of a {}-dimensional domain is not finite and positive",
            space.dimension()
        )));
    }
    let measure = domain_measure(space, domain)?;
    let value = weyl_factor(k) * measure;
    let other = weyl_factor_gamma(k) * measure;
    debug_assert!((value - other).abs() <= 1e-12 * value);
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    PlateauMedian,
    LogLogRegression,
}

/// `N(λ) ≈ Ĉ λ^e` read off a counting function over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylFit {
    pub exponent: f64,
    pub constant: f64,
    pub window: (f64, f64),
    /// RMS deviation of `ln N` from the fitted law.
    pub residual: f64,
    pub method: FitMethod,
    pub points: usize,
}

impl WeylFit {
    pub fn relative_error(&self, predicted: f64) -> f64 {
        (self.constant - predicted).abs() / predicted.abs()
    }
}

/// Sample points `(λ, N(λ))` of a counting function inside a window.
///
/// An eigenvalue list is sampled at its own eigenvalues, where the step
/// function is known exactly; a tabulation at its grid points.
pub fn window_samples(count: &CountingFunction, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("invalid fit window [{lo}, {hi}]")));
    }
    if hi > count.cutoff() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "fit window ends at {hi} beyond the known spectrum ({})",
            count.cutoff()
        )));
    }
    let pts: Vec<(f64, f64)> = match &count.eigenvalues {
        Some(ev) => {
            let mut out: Vec<(f64, f64)> = Vec::new();
            for (j, &l) in ev.iter().enumerate() {
                if l < lo || l > hi {
                    continue;
                }
                // Repeated eigenvalues collapse to one sample carrying the full count.
                match out.last_mut() {
                    Some(last) if last.0 == l => last.1 = (j + 1) as f64,
                    _ => out.push((l, (j + 1) as f64)),
                }
            }
            out
        }
        None => count
            .table
            .iter()
            .filter(|(l, n)| *l >= lo && *l <= hi && *n > 0)
            .map(|&(l, n)| (l, n as f64))
            .collect(),
    };
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::WindowTooNarrow { points: pts.len(), required: MIN_FIT_POINTS });
    }
    Ok(pts)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Plateau median of `N(λ)/λ^e` for a known exponent, log-log least squares otherwise.
pub fn weyl_fit(count: &CountingFunction, window: (f64, f64), fixed_exponent: Option<f64>) -> Result<WeylFit> {
    let pts = window_samples(count, window)?;
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(l, n)| (l.ln(), n.ln())).collect();
    let (exponent, constant, method) = match fixed_exponent {
        Some(e) => {
            if !(e > 0.0) {
                return Err(Error::InvalidArgument(format!("exponent must be positive, got {e}")));
            }
            let c = median(pts.iter().map(|&(l, n)| n / l.powf(e)).collect());
            (e, c, FitMethod::PlateauMedian)
        }
        None => {
            let e = least_squares_slope(&logs);
            let n = logs.len() as f64;
            let intercept = logs.iter().map(|p| p.1 - e * p.0).sum::<f64>() / n;
            (e, intercept.exp(), FitMethod::LogLogRegression)
        }
    };
    let ln_c = constant.ln();
    let residual = (logs.iter().map(|p| (p.1 - exponent * p.0 - ln_c).powi(2)).sum::<f64>() / logs.len() as f64).sqrt();
    Ok(WeylFit { exponent, constant, window, residual, method, points: pts.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitQuantity {
    TraceLimit,
    DiagonalLimit,
    BLimit,
}

/// Ladder values and their extrapolated limit.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub quantity: LimitQuantity,
    /// `(parameter, value)`, parameter decreasing toward 0.
    pub ladder: Vec<(f64, f64)>,
    pub limit: f64,
    /// Gap between the last two entries of the final Richardson column.
    pub residual: f64,
    /// Largest truncation uncertainty carried by a rung.
    pub noise: f64,
    /// Closed-form value the limit is compared with.
    pub target: f64,
}

impl LimitEstimate {
    pub fn relative_error(&self) -> f64 {
        (self.limit - self.target).abs() / self.target.abs()
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual / self.target.abs()
    }
}

/// `(parameter, value, uncertainty)`.
type Rung = (f64, f64, f64);

/// Sort a ladder by decreasing parameter and verify a common ratio.
fn geometric_ladder(mut rungs: Vec<Rung>) -> Result<(Vec<Rung>, f64)> {
    if rungs.len() < 3 {
        return Err(Error::InvalidArgument("a limit ladder needs at least three rungs".into()));
    }
    rungs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let ratio = rungs[0].0 / rungs[1].0;
    if !(ratio > 1.0) || rungs.windows(2).any(|w| ((w[0].0 / w[1].0) / ratio - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidArgument("ladder parameters must be strictly geometric".into()));
    }
    Ok((rungs, ratio))
}

/// Extrapolate `(parameter, value, uncertainty)` rungs to parameter → 0.
fn extrapolate_ladder(
    quantity: LimitQuantity,
    rungs: Vec<Rung>,
    ratio_power: f64,
    orders: &[f64],
    target: f64,
) -> Result<LimitEstimate> {
    let (rungs, ratio) = geometric_ladder(rungs)?;
    let values: Vec<f64> = rungs.iter().map(|r| r.1).collect();
    let noise = rungs.iter().map(|r| r.2).fold(0.0, f64::max);
    let spread = values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    if noise > spread && noise > 1e-12 * values[0].abs() {
        return Err(Error::UnresolvedLimit { residual: spread, noise });
    }
    let ex = richardson(&values, ratio.powf(ratio_power), orders);
    Ok(LimitEstimate {
        quantity,
        ladder: rungs.iter().map(|r| (r.0, r.1)).collect(),
        limit: ex.value,
        residual: ex.residual,
        noise,
        target,
    })
}

/// `H^k(Ω)/(4π)^{k/2}`, the small-time limit of `t^{k/2} Z(t)`.
pub fn trace_target(measure: f64, k: usize) -> f64 {
    measure / (4.0 * PI).powf(0.5 * k as f64)
}

/// `lim_{t→0} t^{k/2} Z(t)` over the trace's times, which must form a
/// geometric ladder. Rungs use the model-completed upper bracket; the
/// bracket width is the rung uncertainty.
pub fn trace_limit(trace: &HeatTrace, k: usize, target: f64) -> Result<LimitEstimate> {
    let e = 0.5 * k as f64;
    let rungs = (0..trace.times.len())
        .map(|i| {
            let t = trace.times[i];
            (t, t.powf(e) * trace.upper[i], t.powf(e) * trace.width(i))
        })
        .collect();
    extrapolate_ladder(LimitQuantity::TraceLimit, rungs, 1.0, &TRACE_ORDERS, target)
}

/// `lim_{t→0} t^{k/2} H(p,p,t)` compared with `1/(θ_k(p)(4π)^{k/2})`.
pub fn diagonal_limit(diag: &KernelDiagonal, k: usize, theta_k: f64, vertex: bool) -> Result<LimitEstimate> {
    let e = 0.5 * k as f64;
    let rungs = (0..diag.times.len())
        .map(|i| {
            let t = diag.times[i];
            (t, t.powf(e) * diag.values[i], t.powf(e) * diag.truncation_error[i])
        })
        .collect();
    let target = 1.0 / (theta_k * (4.0 * PI).powf(e));
    let orders: &[f64] = if vertex { &VERTEX_ORDERS } else { &SMOOTH_ORDERS };
    extrapolate_ladder(LimitQuantity::DiagonalLimit, rungs, 1.0, orders, target)
}

/// `lim_{r→0} b(p,r)/r^k` compared with `θ_k(p) ω_k/(k+1)`.
pub fn b_limit(profile: &VolumeProfile, k: usize, theta_k: f64) -> Result<LimitEstimate> {
    let rungs = profile
        .radii
        .iter()
        .zip(&profile.b_values)
        .map(|(&r, &b)| (r, b / r.powi(k as i32), 0.0))
        .collect();
    let target = theta_k * unit_ball_volume(k as f64) / (k as f64 + 1.0);
    extrapolate_ladder(LimitQuantity::BLimit, rungs, 1.0, &SMOOTH_ORDERS, target)
}

/// `t_i = t_0·4^{−i}`.
pub fn time_ladder(t0: f64, rungs: usize) -> Vec<f64> {
    (0..rungs).map(|i| t0 * 0.25f64.powi(i as i32)).collect()
}

/// Tauberian comparison of a trace limit `A` with a fitted Weyl constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaramataReport {
    pub trace_constant: f64,
    /// `A/Γ(k/2+1)`.
    pub predicted: f64,
    pub fitted: f64,
    pub relative_error: f64,
    pub tolerance: f64,
}

impl KaramataReport {
    pub fn holds(&self) -> bool {
        self.relative_error <= self.tolerance
    }
}

pub fn karamata_check(trace_constant: f64, fitted: f64, k: usize, tolerance: f64) -> KaramataReport {
    let predicted = trace_constant / gamma(0.5 * k as f64 + 1.0);
    KaramataReport {
        trace_constant,
        predicted,
        fitted,
        relative_error: (fitted - predicted).abs() / predicted.abs(),
        tolerance,
    }
}

/// Weyl constants of one space under several measures.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureIndependenceReport {
    /// Unit-weight prediction.
    pub predicted: f64,
    pub fits: Vec<WeylFit>,
    pub relative_errors: Vec<f64>,
    pub tolerance: f64,
}

impl MeasureIndependenceReport {
    pub fn holds(&self) -> bool {
        self.relative_errors.iter().all(|&e| e <= self.tolerance)
    }
}

/// Solve each weighted problem on a mesh of width `h`, fit the Weyl
/// constant with the exponent fixed at k/2 and compare with the
/// unit-weight prediction.
pub fn measure_independence_experiment(
    base: &SpaceSpec,
    weights: &[WeightSpec],
    h: f64,
    window: (f64, f64),
    tolerance: f64,
) -> Result<MeasureIndependenceReport> {
    let k = base.dimension();
    let unit = base.with_weight(WeightSpec::Unit)?;
    let predicted = weyl_predict(&unit, Domain::Whole, k)?;
    let opts = EigenOptions { want_vectors: false, ..EigenOptions::default() };
    let mut fits = Vec::with_capacity(weights.len());
    for w in weights {
        let space = base.with_weight(w.clone())?;
        let op = discretize(&space, Domain::Whole, h)?;
        let m = inertia_count(&op, window.1 * (1.0 + 1e-9))?;
        let spec = lowest_eigs_with(&op, m, 1e-10, &opts)?;
        // Complete up to the window's end by inertia; the last eigenvalue bounds the usable window.
        let top = spec.eigenvalues.last().copied().unwrap_or(window.0);
        fits.push(weyl_fit(&spec.counting(), (window.0, window.1.min(top)), Some(0.5 * k as f64))?);
    }
    let relative_errors = fits.iter().map(|f| f.relative_error(predicted)).collect();
    Ok(MeasureIndependenceReport { predicted, fits, relative_errors, tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::CountingSource;
    use crate::geometry::{ball_moments, volume_profile, Point};
    use crate::heat::{heat_trace, sector_center_kernel, TailModel};

    #[test]
    fn forms_agree() {
        for k in 1..=3 {
            assert!((weyl_factor(k) - weyl_factor_gamma(k)).abs() < 1e-12 * weyl_factor(k));
        }
    }

    #[test]
    fn predictions() {
        let sq = SpaceSpec::rectangle(1.0, 1.0).unwrap();
        assert!((weyl_predict(&sq, Domain::Whole, 2).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-12);
        let iv = SpaceSpec::interval(2.5).unwrap();
        assert!((weyl_predict(&iv, Domain::Whole, 1).unwrap() - 2.5 / PI).abs() < 1e-12);
        let cone = SpaceSpec::cone(1.0, PI).unwrap();
        let c = weyl_predict(&cone, Domain::Ball { center: Point::new(0.0, 0.0), radius: 1.0 }, 2).unwrap();
        assert!((c - 0.125).abs() < 1e-9);
        assert!(matches!(weyl_predict(&sq, Domain::Whole, 1), Err(Error::UnsupportedDomain(_))));
    }

    fn interval_oracle(length: f64, top: usize) -> CountingFunction {
        CountingFunction::from_eigenvalues(
            (1..=top).map(|m| (m as f64 * PI / length).powi(2)).collect(),
            CountingSource::AnalyticOracle,
        )
    }

    #[test]
    fn interval_plateau() {
        let c = interval_oracle(1.0, 40);
        let fit = weyl_fit(&c, (1e3, 1e4), Some(0.5)).unwrap();
        assert!((fit.constant * PI - 1.0).abs() < 0.02);
        assert_eq!(fit.method, FitMethod::PlateauMedian);
    }

    #[test]
    fn free_exponent_power_law() {
        // N(λ) = λ^{3/2} exactly at λ_j = j^{2/3}.
        let ev: Vec<f64> = (1..=4000).map(|j| (j as f64).powf(2.0 / 3.0)).collect();
        let c = CountingFunction::from_eigenvalues(ev, CountingSource::AnalyticOracle);
        let fit = weyl_fit(&c, (20.0, 250.0), None).unwrap();
        assert!((fit.exponent - 1.5).abs() < 0.01);
        assert!((fit.constant - 1.0).abs() < 0.02);
    }

    #[test]
    fn narrow_window_rejected() {
        let c = interval_oracle(1.0, 40);
        assert!(matches!(weyl_fit(&c, (10.0, 100.0), Some(0.5)), Err(Error::WindowTooNarrow { .. })));
    }

    #[test]
    fn exponent_recovery_on_oracles() {
        let iv = interval_oracle(1.0, 2000);
        let fit = weyl_fit(&iv, (1e4, 3e7), None).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.02);
        let sq = crate::eigensolve::analytic_spectrum(&SpaceSpec::rectangle(1.0, 1.0).unwrap(), 4e4).unwrap();
        let fit = weyl_fit(&sq, (4e3, 4e4), None).unwrap();
        assert!((fit.exponent - 1.0).abs() < 0.02, "{}", fit.exponent);
    }

    #[test]
    fn interval_trace_limit() {
        let ev: Vec<f64> = (1..=3000).map(|m| (m * m) as f64).collect();
        let tail = TailModel { constant: 1.0, exponent: 0.5 };
        let tr = heat_trace(&ev, &time_ladder(0.1, 5), Some(tail)).unwrap();
        let est = trace_limit(&tr, 1, PI.sqrt() / 2.0).unwrap();
        assert!(est.relative_error() < 1e-8, "{est:?}");
    }

    #[test]
    fn synthetic_trace_limit() {
        let ev: Vec<f64> = (1..=200_000).map(|j| j as f64).collect();
        let tail = TailModel { constant: 1.0, exponent: 1.0 };
        let tr = heat_trace(&ev, &time_ladder(0.01, 5), Some(tail)).unwrap();
        let est = trace_limit(&tr, 2, 1.0).unwrap();
        assert!(est.relative_error() < 1e-6, "{est:?}");
    }

    #[test]
    fn unresolved_when_bracket_dominates() {
        let ev: Vec<f64> = (1..=50).map(|j| j as f64).collect();
        let tail = TailModel { constant: 1.0, exponent: 1.0 };
        let tr = heat_trace(&ev, &time_ladder(0.01, 5), Some(tail)).unwrap();
        assert!(matches!(trace_limit(&tr, 2, 1.0), Err(Error::UnresolvedLimit { .. })));
    }

    #[test]
    fn disk_and_vertex_diagonal_limits() {
        let times = time_ladder(0.01, 5);
        let disk = sector_center_kernel(2.0 * PI, 1.0, &times).unwrap();
        let est = diagonal_limit(&disk, 2, 1.0, false).unwrap();
        assert!(est.relative_error() < 1e-6, "{est:?}");
        let vertex = sector_center_kernel(PI, 1.0, &times).unwrap();
        let est = diagonal_limit(&vertex, 2, 0.5, true).unwrap();
        assert!((est.target - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(est.relative_error() < 1e-6, "{est:?}");
    }

    #[test]
    fn b_limits() {
        let radii: Vec<f64> = (0..5).map(|i| 0.05 * 0.5f64.powi(4 - i)).collect();
        let plane = SpaceSpec::rectangle(1.0, 1.0).unwrap();
        let est = b_limit(&volume_profile(&plane, Point::new(0.5, 0.5), &radii).unwrap(), 2, 1.0).unwrap();
        assert!((est.limit - PI / 3.0).abs() < 1e-6 * PI);
        let cone = SpaceSpec::cone(1.0, PI).unwrap();
        let est = b_limit(&volume_profile(&cone, Point::new(0.0, 0.0), &radii).unwrap(), 2, 0.5).unwrap();
        assert!((est.limit - PI / 6.0).abs() < 1e-6);
        let iv = SpaceSpec::interval(1.0).unwrap();
        let est = b_limit(&volume_profile(&iv, Point::on_line(0.5), &radii).unwrap(), 1, 1.0).unwrap();
        assert!((est.limit - 1.0).abs() < 1e-9);
        // Independent: b(p,r) = ∫_{−r}^{r}(1 − |s|/r) ds = r on the line.
        assert!((ball_moments(&iv, Point::on_line(0.5), 0.1).unwrap().b - 0.1).abs() < 1e-12);
    }

    #[test]
    fn karamata_closed_forms() {
        assert!(karamata_check(1.0, 1.0, 2, 0.01).holds());
        let rep = karamata_check(PI.sqrt() / 2.0, 1.0, 1, 1e-12);
        assert!(rep.holds(), "{rep:?}");
        assert!(karamata_check(1.0 / (4.0 * PI), 1.0 / (4.0 * PI), 2, 1e-12).holds());
    }

    #[test]
    fn constant_weight_is_invisible() {
        let base = SpaceSpec::interval(PI).unwrap();
        let rep = measure_independence_experiment(&base, &[WeightSpec::Unit, WeightSpec::constant(3.0)], PI / 800.0, (25.0, 900.0), 0.05)
            .unwrap();
        assert!((rep.fits[0].constant - rep.fits[1].constant).abs() < 1e-9);
        assert!(rep.holds(), "{rep:?}");
    }
}
