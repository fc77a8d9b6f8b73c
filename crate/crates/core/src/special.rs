//! Special functions: Gamma, incomplete Gamma, unit-ball volumes, Bessel
//! functions of real order and their positive zeros.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::quad::{brent, composite_gauss};

/// Γ(x).
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Upper incomplete Gamma function Γ(s, x) (not regularized), s > 0, x ≥ 0.
pub fn upper_gamma(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return gamma(s);
    }
    let log_prefactor = s * x.ln() - x;
    if x < s + 1.0 {
        // Series for the lower function, then complement.
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut a = s;
        for _ in 0..500 {
            a += 1.0;
            term *= x / a;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (gamma(s) - sum * log_prefactor.exp()).max(0.0)
    } else {
        // Modified Lentz continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        log_prefactor.exp() * h
    }
}

/// Lebesgue volume ω_k of the unit ball in ℝ^k.
pub fn unit_ball_volume(k: f64) -> f64 {
    PI.powf(0.5 * k) / gamma(0.5 * k + 1.0)
}

/// Bessel function of the first kind J_ν(x) for real ν ≥ 0 and x ≥ 0.
///
/// Power series where it does not cancel, otherwise the Schläfli integral
/// representation evaluated by composite Gauss–Legendre quadrature.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0 && x >= 0.0, "bessel_j needs nu >= 0 and x >= 0");
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= 6.0 || x * x <= 2.0 * (nu + 1.0) {
        bessel_j_series(nu, x)
    } else {
        bessel_j_integral(nu, x)
    }
}

fn bessel_j_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let log_lead = nu * (0.5 * x).ln() - libm::lgamma(nu + 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..300 {
        let mf = m as f64;
        term *= -q / (mf * (mf + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum * log_lead.exp()
}

fn bessel_j_integral(nu: f64, x: f64) -> f64 {
    let panels = ((x + nu) * PI / 6.0).ceil() as usize + 2;
    let oscillatory = composite_gauss(|t| (nu * t - x * t.sin()).cos(), 0.0, PI, panels) / PI;
    let frac = nu - nu.floor();
    if frac == 0.0 {
        return oscillatory;
    }
    // Tail term vanishes for integer orders.
    let mut upper = 1.0;
    while x * upper.sinh() + nu * upper < 45.0 {
        upper *= 1.5;
    }
    let tail = composite_gauss(|t| (-x * t.sinh() - nu * t).exp(), 0.0, upper, 24);
    oscillatory - (nu * PI).sin() / PI * tail
}

/// All positive zeros of J_ν below `x_max`, ascending.
pub fn bessel_zeros(nu: f64, x_max: f64) -> Vec<f64> {
    let mut zeros = Vec::new();
    // j_{ν,1} > ν, and consecutive zeros are at least ~2.4 apart.
    let step = 0.4;
    let mut a = if nu > 0.0 { nu } else { 1e-3 };
    let mut fa = bessel_j(nu, a);
    while a < x_max {
        let b = (a + step).min(x_max);
        let fb = bessel_j(nu, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            if let Some(z) = brent(|t| bessel_j(nu, t), a, b, 1e-14) {
                zeros.push(z);
            }
        }
        a = b;
        fa = fb;
    }
    zeros
}

/// The first `count` positive zeros of J_ν.
pub fn bessel_zeros_n(nu: f64, count: usize) -> Vec<f64> {
    // McMahon: j_{ν,m} ≈ (m + ν/2 − 1/4)π; pad the scan window generously.
    let mut x_max = (count as f64 + 0.5 * nu + 1.0) * PI + 5.0;
    loop {
        let mut z = bessel_zeros(nu, x_max);
        if z.len() >= count {
            z.truncate(count);
            return z;
        }
        x_max *= 1.25;
    }
}
