//! One-dimensional quadrature and bracketed root finding.

use alloc::vec::Vec;

pub(crate) const GL6_NODES: [f64; 6] = [
    -0.932469514203152,
    -0.6612093864662645,
    -0.23861918608319693,
    0.23861918608319693,
    0.6612093864662645,
    0.932469514203152,
];
pub(crate) const GL6_WEIGHTS: [f64; 6] = [
    0.17132449237916975,
    0.36076157304813894,
    0.46791393457269137,
    0.46791393457269137,
    0.36076157304813894,
    0.17132449237916975,
];
pub(crate) const GL20_NODES: [f64; 20] = [
    -0.9931285991850949,
    -0.9639719272779138,
    -0.9122344282513258,
    -0.8391169718222188,
    -0.7463319064601508,
    -0.636053680726515,
    -0.5108670019508271,
    -0.37370608871541955,
    -0.2277858511416451,
    -0.07652652113349734,
    0.07652652113349734,
    0.2277858511416451,
    0.37370608871541955,
    0.5108670019508271,
    0.636053680726515,
    0.7463319064601508,
    0.8391169718222188,
    0.9122344282513258,
    0.9639719272779138,
    0.9931285991850949,
];
pub(crate) const GL20_WEIGHTS: [f64; 20] = [
    0.017614007139153273,
    0.04060142980038622,
    0.06267204833410944,
    0.08327674157670467,
    0.10193011981724026,
    0.11819453196151825,
    0.13168863844917653,
    0.14209610931838187,
    0.14917298647260366,
    0.15275338713072578,
    0.15275338713072578,
    0.14917298647260366,
    0.14209610931838187,
    0.13168863844917653,
    0.11819453196151825,
    0.10193011981724026,
    0.08327674157670467,
    0.06267204833410944,
    0.04060142980038622,
    0.017614007139153273,
];

// Kronrod 15-point extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Fixed 20-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss20<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GL20_NODES.iter().zip(GL20_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite 20-point Gauss–Legendre rule with `panels` equal panels.
pub fn composite_gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + width * i as f64;
            gauss20(&mut f, lo, lo + width)
        })
        .sum()
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK15[7] * fc;
    let mut gauss = WG7[3] * fc;
    for (j, (&x, &w)) in XGK15.iter().zip(WGK15.iter()).take(7).enumerate() {
        let f1 = f(mid - half * x);
        let f2 = f(mid + half * x);
        kronrod += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG7[j / 2] * (f1 + f2);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    /// False when the interval budget ran out before the tolerance was met.
    pub converged: bool,
}

/// Adaptive Gauss–Kronrod (7/15) integration with global bisection.
///
/// Refines the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0, converged: true };
    }
    const MAX_INTERVALS: usize = 2000;
    let (v0, e0) = kronrod15(&mut f, a, b);
    let mut parts: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, v0, e0)];
    let mut value = v0;
    let mut error = e0;
    while error > abs_tol.max(rel_tol * value.abs()) {
        if parts.len() >= MAX_INTERVALS {
            return Integral { value, error, converged: false };
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, v, e) = parts.swap_remove(worst);
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            // Interval collapsed to floating-point resolution.
            parts.push((lo, hi, v, 0.0));
            error -= e;
            continue;
        }
        let (v1, e1) = kronrod15(&mut f, lo, m);
        let (v2, e2) = kronrod15(&mut f, m, hi);
        value += v1 + v2 - v;
        error += e1 + e2 - e;
        parts.push((lo, m, v1, e1));
        parts.push((m, hi, v2, e2));
    }
    // Re-sum to shed accumulated update round-off.
    let value = parts.iter().map(|p| p.2).sum();
    let error = parts.iter().map(|p| p.3).sum();
    Integral { value, error, converged: true }
}

/// Adaptive integration over consecutive breakpoints (sorted, duplicates allowed).
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> Integral {
    let pieces = breaks.len().saturating_sub(1).max(1);
    let mut out = Integral { value: 0.0, error: 0.0, converged: true };
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let part = integrate(&mut f, w[0], w[1], abs_tol / pieces as f64, rel_tol);
        out.value += part.value;
        out.error += part.error;
        out.converged &= part.converged;
    }
    out
}

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Returns `None` when `f(a)` and `f(b)` have the same strict sign.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Some(b)
}
