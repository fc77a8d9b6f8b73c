//! Model metric measure spaces and their exact volume quantities.
//!
//! Coordinates are per shape: an interval is `(0, L)` with the point in
//! `x`; a rectangle is `(0, a) × (0, b)`; a disk is centered at the
//! origin; a cone point is polar `(s, φ)` with `φ ∈ [0, θ)` and the vertex
//! at `s = 0`. Balls are metric balls of the space; the comparison
//! quantities follow the curvature-dimension pair carried by the space.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::extrapolate::richardson;
use crate::quad::{integrate, integrate_pieces};
use crate::special::unit_ball_volume;

/// A point in the coordinates of its space (see module docs).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// A point of a one-dimensional space.
    pub const fn on_line(x: f64) -> Self {
        Self { x, y: 0.0 }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Interval,
    Rectangle,
    Disk,
    Cone,
}

/// Geometry of a model space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Interval { length: f64 },
    Rectangle { width: f64, height: f64 },
    Disk { radius: f64 },
    /// Flat cone of total angle `angle ∈ (0, 2π]`, truncated at `radius`.
    Cone { radius: f64, angle: f64 },
}

impl Shape {
    pub fn kind(&self) -> SpaceKind {
        match self {
            Shape::Interval { .. } => SpaceKind::Interval,
            Shape::Rectangle { .. } => SpaceKind::Rectangle,
            Shape::Disk { .. } => SpaceKind::Disk,
            Shape::Cone { .. } => SpaceKind::Cone,
        }
    }

    /// Geometric (Hausdorff) dimension.
    pub fn dimension(&self) -> usize {
        match self {
            Shape::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Hausdorff measure of the whole shape.
    pub fn hausdorff_measure(&self) -> f64 {
        match *self {
            Shape::Interval { length } => length,
            Shape::Rectangle { width, height } => width * height,
            Shape::Disk { radius } => PI * radius * radius,
            Shape::Cone { radius, angle } => 0.5 * angle * radius * radius,
        }
    }

    /// The same shape with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Shape {
        match *self {
            Shape::Interval { length } => Shape::Interval { length: length * factor },
            Shape::Rectangle { width, height } => Shape::Rectangle {
                width: width * factor,
                height: height * factor,
            },
            Shape::Disk { radius } => Shape::Disk { radius: radius * factor },
            Shape::Cone { radius, angle } => Shape::Cone { radius: radius * factor, angle },
        }
    }
}

/// Density of the reference measure with respect to Hausdorff measure.
#[derive(Clone)]
pub enum WeightSpec {
    Unit,
    /// `constant + slope · (x, y)`.
    Affine { constant: f64, slope: [f64; 2] },
    /// `base + amplitude · sin(frequency · x + phase)`.
    Sinusoidal { base: f64, amplitude: f64, frequency: f64, phase: f64 },
    /// An arbitrary evaluator with declared bounds `0 < lower ≤ f ≤ upper`.
    Custom {
        eval: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
        lower: f64,
        upper: f64,
    },
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Unit => write!(f, "Unit"),
            WeightSpec::Affine { constant, slope } => {
                write!(f, "Affine {{ constant: {constant}, slope: {slope:?} }}")
            }
            WeightSpec::Sinusoidal { base, amplitude, frequency, phase } => write!(
                f,
                "Sinusoidal {{ base: {base}, amplitude: {amplitude}, frequency: {frequency}, phase: {phase} }}"
            ),
            WeightSpec::Custom { lower, upper, .. } => {
                write!(f, "Custom {{ lower: {lower}, upper: {upper} }}")
            }
        }
    }
}

impl WeightSpec {
    pub fn constant(c: f64) -> Self {
        WeightSpec::Affine { constant: c, slope: [0.0, 0.0] }
    }

    pub fn eval(&self, p: Point) -> f64 {
        match self {
            WeightSpec::Unit => 1.0,
            WeightSpec::Affine { constant, slope } => constant + slope[0] * p.x + slope[1] * p.y,
            WeightSpec::Sinusoidal { base, amplitude, frequency, phase } => {
                base + amplitude * (frequency * p.x + phase).sin()
            }
            WeightSpec::Custom { eval, .. } => eval(p),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, WeightSpec::Unit)
    }

    /// Constant value, if the weight is constant.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            WeightSpec::Unit => Some(1.0),
            WeightSpec::Affine { constant, slope } if slope[0] == 0.0 && slope[1] == 0.0 => Some(*constant),
            WeightSpec::Sinusoidal { base, amplitude, .. } if *amplitude == 0.0 => Some(*base),
            _ => None,
        }
    }

    /// `c · f`.
    pub fn scaled(&self, c: f64) -> WeightSpec {
        match self {
            WeightSpec::Unit => WeightSpec::constant(c),
            WeightSpec::Affine { constant, slope } => WeightSpec::Affine {
                constant: c * constant,
                slope: [c * slope[0], c * slope[1]],
            },
            WeightSpec::Sinusoidal { base, amplitude, frequency, phase } => WeightSpec::Sinusoidal {
                base: c * base,
                amplitude: c * amplitude,
                frequency: *frequency,
                phase: *phase,
            },
            WeightSpec::Custom { eval, lower, upper } => {
                let inner = eval.clone();
                WeightSpec::Custom {
                    eval: Arc::new(move |p| c * inner(p)),
                    lower: c * lower,
                    upper: c * upper,
                }
            }
        }
    }

    /// Bounds `[lower, upper]` of the weight over `shape`.
    pub fn bounds(&self, shape: &Shape) -> (f64, f64) {
        match self {
            WeightSpec::Unit => (1.0, 1.0),
            WeightSpec::Affine { constant, slope } => {
                let corners: Vec<Point> = match *shape {
                    Shape::Interval { length } => alloc::vec![Point::on_line(0.0), Point::on_line(length)],
                    Shape::Rectangle { width, height } => alloc::vec![
                        Point::new(0.0, 0.0),
                        Point::new(width, 0.0),
                        Point::new(0.0, height),
                        Point::new(width, height),
                    ],
                    Shape::Disk { radius } => {
                        let g = (slope[0] * slope[0] + slope[1] * slope[1]).sqrt() * radius;
                        return (constant - g, constant + g);
                    }
                    // Polar coordinates (s, φ) range over a coordinate rectangle.
                    Shape::Cone { radius, angle } => alloc::vec![
                        Point::new(0.0, 0.0),
                        Point::new(radius, 0.0),
                        Point::new(0.0, angle),
                        Point::new(radius, angle),
                    ],
                };
                let vals = corners.iter().map(|&p| self.eval(p));
                vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
            }
            WeightSpec::Sinusoidal { base, amplitude, .. } => (base - amplitude.abs(), base + amplitude.abs()),
            WeightSpec::Custom { lower, upper, .. } => (*lower, *upper),
        }
    }
}

/// Curvature-dimension pair `(K, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureDimension {
    pub k: f64,
    pub n: f64,
}

/// Analytic description of a model metric measure space.
#[derive(Debug, Clone)]
pub struct SpaceSpec {
    pub shape: Shape,
    pub weight: WeightSpec,
    pub cd: CurvatureDimension,
}

impl SpaceSpec {
    pub fn new(shape: Shape, weight: WeightSpec, cd: CurvatureDimension) -> Result<Self> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpace(format!("{what} must be positive, got {v}")))
            }
        };
        match shape {
            Shape::Interval { length } => positive(length, "interval length")?,
            Shape::Rectangle { width, height } => {
                positive(width, "rectangle width")?;
                positive(height, "rectangle height")?;
            }
            Shape::Disk { radius } => positive(radius, "disk radius")?,
            Shape::Cone { radius, angle } => {
                positive(radius, "cone radius")?;
                if !(angle > 0.0 && angle <= 2.0 * PI * (1.0 + 1e-15)) {
                    return Err(Error::InvalidSpace(format!("cone angle must lie in (0, 2π], got {angle}")));
                }
            }
        }
        if !(cd.n >= 1.0) || !cd.k.is_finite() {
            return Err(Error::InvalidSpace(format!("need N >= 1 and finite K, got ({}, {})", cd.k, cd.n)));
        }
        let (lo, hi) = weight.bounds(&shape);
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(Error::InvalidSpace(format!("weight must be bounded and positive, bounds [{lo}, {hi}]")));
        }
        Ok(Self { shape, weight, cd })
    }

    /// Unit-weight space with the curvature-dimension pair of its flat geometry.
    pub fn flat(shape: Shape) -> Result<Self> {
        let n = shape.dimension() as f64;
        Self::new(shape, WeightSpec::Unit, CurvatureDimension { k: 0.0, n })
    }

    pub fn interval(length: f64) -> Result<Self> {
        Self::flat(Shape::Interval { length })
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        Self::flat(Shape::Rectangle { width, height })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::flat(Shape::Disk { radius })
    }

    pub fn cone(radius: f64, angle: f64) -> Result<Self> {
        Self::flat(Shape::Cone { radius, angle })
    }

    pub fn with_weight(&self, weight: WeightSpec) -> Result<Self> {
        Self::new(self.shape, weight, self.cd)
    }

    pub fn with_cd(&self, k: f64, n: f64) -> Result<Self> {
        Self::new(self.shape, self.weight.clone(), CurvatureDimension { k, n })
    }

    pub fn kind(&self) -> SpaceKind {
        self.shape.kind()
    }

    pub fn dimension(&self) -> usize {
        self.shape.dimension()
    }

    /// Metric distance between two points of the space.
    pub fn distance(&self, a: Point, b: Point) -> f64 {
        match self.shape {
            Shape::Interval { .. } => (a.x - b.x).abs(),
            Shape::Rectangle { .. } | Shape::Disk { .. } => (a.x - b.x).hypot(a.y - b.y),
            Shape::Cone { angle, .. } => cone_distance(a, b, angle),
        }
    }

    /// Largest `r` with `B_r(p)` inside the space (distance to the boundary).
    pub fn radius_limit(&self, p: Point) -> f64 {
        match self.shape {
            Shape::Interval { length } => p.x.min(length - p.x),
            Shape::Rectangle { width, height } => p.x.min(width - p.x).min(p.y).min(height - p.y),
            Shape::Disk { radius } => radius - p.x.hypot(p.y),
            Shape::Cone { radius, .. } => radius - p.x,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self.shape {
            Shape::Cone { angle, .. } => p.x >= 0.0 && self.radius_limit(p) >= 0.0 && p.y >= 0.0 && p.y < angle + 1e-12,
            _ => self.radius_limit(p) >= 0.0,
        }
    }

    fn is_cone_vertex(&self, p: Point) -> bool {
        matches!(self.shape, Shape::Cone { .. }) && p.x == 0.0
    }
}

fn wrap_angle(delta: f64, period: f64) -> f64 {
    let mut d = delta % period;
    if d > 0.5 * period {
        d -= period;
    } else if d <= -0.5 * period {
        d += period;
    }
    d
}

/// Euclidean remainder in `[0, p)`.
pub(crate) trait Modulo {
    fn rem_euclid_by(self, p: f64) -> f64;
}

impl Modulo for f64 {
    fn rem_euclid_by(self, p: f64) -> f64 {
        let r = self % p;
        if r < 0.0 {
            r + p
        } else {
            r
        }
    }
}

pub(crate) fn cone_distance(a: Point, b: Point, angle: f64) -> f64 {
    let delta = wrap_angle(a.y - b.y, angle).abs();
    if delta >= PI {
        return a.x + b.x;
    }
    (a.x * a.x + b.x * b.x - 2.0 * a.x * b.x * delta.cos()).max(0.0).sqrt()
}

/// Domain selector: the whole space or a metric ball in it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Whole,
    Ball { center: Point, radius: f64 },
}

/// `s_k(τ)`: the generalized sine of curvature `k`.
pub fn s_k(k: f64, tau: f64) -> f64 {
    if k > 0.0 {
        let q = k.sqrt();
        (q * tau).sin() / q
    } else if k < 0.0 {
        let q = (-k).sqrt();
        (q * tau).sinh() / q
    } else {
        tau
    }
}

/// Distortion coefficient σ_k^{(t)}(θ); `+∞` when `kθ² ≥ π²`.
pub fn sigma_kt(k: f64, t: f64, theta: f64) -> f64 {
    let kt2 = k * theta * theta;
    if kt2 >= PI * PI {
        f64::INFINITY
    } else if kt2 > 0.0 {
        let q = k.sqrt();
        (q * t * theta).sin() / (q * theta).sin()
    } else if kt2 == 0.0 {
        t
    } else {
        let q = (-k).sqrt();
        (q * t * theta).sinh() / (q * theta).sinh()
    }
}

const QUAD_TOL: f64 = 1e-11;

/// Ball mass `μ(B_r(p))` and `b(p, r) = ∫_{B_r(p)} (1 − d(p,x)/r) dμ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMoments {
    pub measure: f64,
    pub b: f64,
    /// True when both come from closed forms.
    pub exact: bool,
}

/// `μ(B_r(p))` and `b(p, r)` for a ball inside the space.
pub fn ball_moments(space: &SpaceSpec, p: Point, r: f64) -> Result<BallMoments> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("ball radius must be positive, got {r}")));
    }
    let limit = space.radius_limit(p);
    if r > limit * (1.0 + 1e-12) {
        return Err(Error::RadiusOutOfDomain { radius: r, limit });
    }
    Ok(ball_moments_clipped(space, p, r))
}

/// Ball moments of `B_r(p) ∩ X`, balls allowed to leave the space.
pub fn ball_moments_clipped(space: &SpaceSpec, p: Point, r: f64) -> BallMoments {
    let inside = r <= space.radius_limit(p) * (1.0 + 1e-12);
    let unit = space.weight.constant_value();
    match space.shape {
        Shape::Interval { length } => {
            if let (Some(c), true) = (unit, inside) {
                return BallMoments { measure: 2.0 * r * c, b: r * c, exact: true };
            }
            let lo = (p.x - r).max(0.0);
            let hi = (p.x + r).min(length);
            let f = |x: f64| space.weight.eval(Point::on_line(x));
            let m = integrate_pieces(f, &[lo, p.x.clamp(lo, hi), hi], QUAD_TOL, QUAD_TOL).value;
            let g = |x: f64| f(x) * (1.0 - (x - p.x).abs() / r);
            let b = integrate_pieces(g, &[lo, p.x.clamp(lo, hi), hi], QUAD_TOL, QUAD_TOL).value;
            BallMoments { measure: m, b, exact: false }
        }
        Shape::Rectangle { .. } | Shape::Disk { .. } => {
            if inside {
                if let Some(c) = unit {
                    return BallMoments { measure: PI * r * r * c, b: PI * r * r * c / 3.0, exact: true };
                }
                let (m, b) = planar_polar_moments(&space.weight, p, r, None);
                return BallMoments { measure: m, b, exact: false };
            }
            let exit = |phi: f64| planar_exit_distance(&space.shape, p, phi);
            let (m, b) = planar_polar_moments(&space.weight, p, r, Some(&exit));
            BallMoments { measure: m, b, exact: false }
        }
        Shape::Cone { radius, angle } => {
            if space.is_cone_vertex(p) {
                let rr = r.min(radius);
                if let Some(c) = unit {
                    if inside {
                        return BallMoments {
                            measure: 0.5 * angle * r * r * c,
                            b: angle * r * r * c / 6.0,
                            exact: true,
                        };
                    }
                    let m = 0.5 * angle * rr * rr * c;
                    let b = c * angle * (0.5 * rr * rr - rr * rr * rr / (3.0 * r));
                    return BallMoments { measure: m, b, exact: true };
                }
                let ring = |s: f64| {
                    let n = 64;
                    let h = angle / n as f64;
                    (0..n).map(|i| space.weight.eval(Point::new(s, h * i as f64))).sum::<f64>() * h
                };
                let m = integrate(|s| s * ring(s), 0.0, rr, QUAD_TOL, QUAD_TOL).value;
                let b = integrate(|s| s * (1.0 - s / r) * ring(s), 0.0, rr, QUAD_TOL, QUAD_TOL).value;
                return BallMoments { measure: m, b, exact: false };
            }
            let d = p.x;
            let flat_disk = inside && (r <= d * (0.5 * angle).min(0.5 * PI).sin());
            if flat_disk {
                if let Some(c) = unit {
                    return BallMoments { measure: PI * r * r * c, b: PI * r * r * c / 3.0, exact: true };
                }
            }
            let (m, b) = cone_offvertex_moments(&space.weight, p, r, radius, angle);
            BallMoments { measure: m, b, exact: false }
        }
    }
}

/// Distance from `p` to the boundary along direction `phi` (planar shapes).
fn planar_exit_distance(shape: &Shape, p: Point, phi: f64) -> f64 {
    let (c, s) = (phi.cos(), phi.sin());
    match *shape {
        Shape::Rectangle { width, height } => {
            let mut t = f64::INFINITY;
            if c > 1e-15 {
                t = t.min((width - p.x) / c);
            } else if c < -1e-15 {
                t = t.min(-p.x / c);
            }
            if s > 1e-15 {
                t = t.min((height - p.y) / s);
            } else if s < -1e-15 {
                t = t.min(-p.y / s);
            }
            t.max(0.0)
        }
        Shape::Disk { radius } => {
            let pd = p.x * c + p.y * s;
            let q = p.x * p.x + p.y * p.y - radius * radius;
            (-pd + (pd * pd - q).max(0.0).sqrt()).max(0.0)
        }
        _ => f64::INFINITY,
    }
}

/// Polar-coordinate moments about `p`; the optional `exit` clips each ray.
fn planar_polar_moments(weight: &WeightSpec, p: Point, r: f64, exit: Option<&dyn Fn(f64) -> f64>) -> (f64, f64) {
    let unit = weight.constant_value();
    let ray = |phi: f64, with_b: bool| -> f64 {
        let reach = exit.map_or(r, |e| e(phi).min(r));
        if reach <= 0.0 {
            return 0.0;
        }
        if let Some(c) = unit {
            return if with_b {
                c * (0.5 * reach * reach - reach * reach * reach / (3.0 * r))
            } else {
                0.5 * c * reach * reach
            };
        }
        let (cs, sn) = (phi.cos(), phi.sin());
        let g = |rho: f64| {
            let w = weight.eval(Point::new(p.x + rho * cs, p.y + rho * sn));
            let k = if with_b { 1.0 - rho / r } else { 1.0 };
            rho * w * k
        };
        integrate(g, 0.0, reach, QUAD_TOL * 1e-2, QUAD_TOL).value
    };
    if exit.is_none() {
        // Smooth periodic integrand in φ: the trapezoid rule converges geometrically.
        let trap = |with_b: bool| {
            let mut n = 32;
            let mut prev = f64::NAN;
            loop {
                let h = 2.0 * PI / n as f64;
                let v: f64 = (0..n).map(|i| ray(h * i as f64, with_b)).sum::<f64>() * h;
                if (v - prev).abs() <= 1e-13 * v.abs() || n >= 4096 {
                    return v;
                }
                prev = v;
                n *= 2;
            }
        };
        (trap(false), trap(true))
    } else {
        let m = integrate(|phi| ray(phi, false), 0.0, 2.0 * PI, QUAD_TOL, QUAD_TOL).value;
        let b = integrate(|phi| ray(phi, true), 0.0, 2.0 * PI, QUAD_TOL, QUAD_TOL).value;
        (m, b)
    }
}

/// Moments of a cone ball around an off-vertex point, computed on the
/// unrolled sector: at radius `s` the ball covers relative angles
/// `|α| ≤ ψ(s) = min(θ/2, arccos((s² + d² − r²)/(2sd)))`.
fn cone_offvertex_moments(weight: &WeightSpec, p: Point, r: f64, radius: f64, angle: f64) -> (f64, f64) {
    let d = p.x;
    let half = 0.5 * angle;
    let psi = |s: f64| -> f64 {
        if s <= 0.0 {
            return if d < r { half } else { 0.0 };
        }
        let c = (s * s + d * d - r * r) / (2.0 * s * d);
        if c <= -1.0 {
            half
        } else if c >= 1.0 {
            0.0
        } else {
            c.acos().min(half)
        }
    };
    let s_lo = (d - r).max(0.0);
    let s_hi = (d + r).min(radius);
    let mut breaks = alloc::vec![s_lo, s_hi];
    for cand in [r - d, d - r, d + r] {
        if cand > s_lo && cand < s_hi {
            breaks.push(cand);
        }
    }
    let disc = r * r - d * d * half.sin().powi(2);
    if half < PI && disc >= 0.0 {
        for sign in [-1.0, 1.0] {
            let cand = d * half.cos() + sign * disc.sqrt();
            if cand > s_lo && cand < s_hi {
                breaks.push(cand);
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let unit = weight.constant_value();
    let dist = |s: f64, a: f64| (s * s + d * d - 2.0 * s * d * a.cos()).max(0.0).sqrt();
    let inner = |s: f64, with_b: bool| -> f64 {
        let w = psi(s);
        if w <= 0.0 {
            return 0.0;
        }
        let g = |a: f64| {
            let f = match unit {
                Some(c) => c,
                None => weight.eval(Point::new(s, (p.y + a).rem_euclid_by(angle))),
            };
            if with_b {
                f * (1.0 - dist(s, a) / r).max(0.0)
            } else {
                f
            }
        };
        if !with_b {
            if let Some(c) = unit {
                return 2.0 * w * c;
            }
        }
        integrate(g, -w, w, QUAD_TOL * 1e-2, QUAD_TOL).value
    };
    let m = integrate_pieces(|s| s * inner(s, false), &breaks, QUAD_TOL, QUAD_TOL).value;
    let b = integrate_pieces(|s| s * inner(s, true), &breaks, QUAD_TOL, QUAD_TOL).value;
    (m, b)
}

/// Ball masses and `b(p, r)` along a radius ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeProfile {
    pub center: Point,
    pub radii: Vec<f64>,
    pub ball_volumes: Vec<f64>,
    pub b_values: Vec<f64>,
    pub exact: bool,
}

pub fn volume_profile(space: &SpaceSpec, p: Point, radii: &[f64]) -> Result<VolumeProfile> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
    }
    let mut profile = VolumeProfile {
        center: p,
        radii: radii.to_vec(),
        ball_volumes: Vec::with_capacity(radii.len()),
        b_values: Vec::with_capacity(radii.len()),
        exact: true,
    };
    for &r in radii {
        let m = ball_moments(space, p, r)?;
        profile.ball_volumes.push(m.measure);
        profile.b_values.push(m.b);
        profile.exact &= m.exact;
    }
    Ok(profile)
}

/// Estimate of the `k`-dimensional density θ_k(p).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub k: usize,
    pub theta: f64,
    /// Extrapolation residual; for analytic cases, the gap between the
    /// extrapolated ladder and the closed form.
    pub residual: f64,
    pub exact: bool,
    pub ladder: Vec<(f64, f64)>,
}

/// Relative residual above which a density ladder is rejected.
pub const DENSITY_RESIDUAL_THRESHOLD: f64 = 1e-6;

pub fn density_estimate(space: &SpaceSpec, p: Point, k: usize) -> Result<DensityEstimate> {
    if !(1..=2).contains(&k) {
        return Err(Error::InvalidArgument(format!("density dimension must be 1 or 2, got {k}")));
    }
    if !space.contains(p) || space.radius_limit(p) <= 0.0 {
        return Err(Error::InvalidArgument(format!("point {p} is not interior")));
    }
    let omega = unit_ball_volume(k as f64);
    let r_top = 0.5 * space.radius_limit(p);
    let rungs = 7;
    let ladder: Vec<(f64, f64)> = (0..rungs)
        .map(|i| {
            let r = r_top / 2f64.powi(i);
            let m = ball_moments(space, p, r).map(|m| m.measure)?;
            Ok((r, m / (omega * r.powi(k as i32))))
        })
        .collect::<Result<_>>()?;
    let vertex = space.is_cone_vertex(p);
    // Symmetric balls about smooth points have even expansions in r.
    let orders: &[f64] = if vertex { &[1.0, 2.0, 3.0, 4.0] } else { &[2.0, 4.0, 6.0] };
    let values: Vec<f64> = ladder.iter().map(|l| l.1).collect();
    let ex = richardson(&values, 2.0, orders);
    let analytic = if k == space.dimension() {
        match space.shape {
            Shape::Cone { angle, .. } if vertex => {
                let n = 64;
                let mean = (0..n)
                    .map(|i| space.weight.eval(Point::new(0.0, angle * i as f64 / n as f64)))
                    .sum::<f64>()
                    / n as f64;
                Some(angle / (2.0 * PI) * mean)
            }
            _ => Some(space.weight.eval(p)),
        }
    } else {
        None
    };
    let (theta, residual, exact) = match analytic {
        Some(t) => (t, (ex.value - t).abs(), true),
        None => (ex.value, ex.residual, false),
    };
    if !(residual <= DENSITY_RESIDUAL_THRESHOLD * theta.abs().max(1e-300)) || !theta.is_finite() {
        return Err(Error::NonconvergentDensity { residual });
    }
    Ok(DensityEstimate { k, theta, residual, exact, ladder })
}

/// Outcome of a comparison-geometry inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub holds: bool,
    pub exact: bool,
}

/// Relative tolerance on closed-form comparisons.
pub const EXACT_TOLERANCE: f64 = 1e-6;
/// Relative tolerance on quadrature comparisons.
pub const QUADRATURE_TOLERANCE: f64 = 1e-4;

fn comparison(lhs: f64, rhs: f64, exact: bool) -> ComparisonReport {
    let tolerance = if exact { EXACT_TOLERANCE } else { QUADRATURE_TOLERANCE };
    ComparisonReport { lhs, rhs, tolerance, holds: lhs <= rhs * (1.0 + tolerance), exact }
}

/// `∫_0^ρ s_{K/(N−1)}(τ)^{N−1} dτ`, the model-space ball volume up to a constant.
pub fn model_volume(cd: CurvatureDimension, rho: f64) -> f64 {
    let exponent = cd.n - 1.0;
    if exponent <= 0.0 {
        return rho;
    }
    if cd.k == 0.0 {
        return rho.powf(cd.n) / cd.n;
    }
    let kk = cd.k / exponent;
    let upper = if kk > 0.0 { rho.min(PI / kk.sqrt()) } else { rho };
    integrate(|t| s_k(kk, t).max(0.0).powf(exponent), 0.0, upper, 1e-14, 1e-13).value
}

/// Normalized ratio `μ(B_ρ(p)) / ∫_0^ρ s^{N−1}`.
pub fn bishop_gromov_ratio(space: &SpaceSpec, p: Point, rho: f64) -> Result<(f64, bool)> {
    let m = ball_moments(space, p, rho)?;
    Ok((m.measure / model_volume(space.cd, rho), m.exact))
}

/// Bishop–Gromov: the normalized ratio at `big` must not exceed the one at `small`.
pub fn check_bishop_gromov(space: &SpaceSpec, p: Point, small: f64, big: f64) -> Result<ComparisonReport> {
    if !(0.0 < small && small < big) {
        return Err(Error::InvalidArgument(format!("need 0 < r < R, got r={small}, R={big}")));
    }
    let (q_small, e1) = bishop_gromov_ratio(space, p, small)?;
    let (q_big, e2) = bishop_gromov_ratio(space, p, big)?;
    Ok(comparison(q_big, q_small, e1 && e2))
}

/// Doubling: `μ(B_R)/μ(B_r) ≤ (R/r)^N exp(√((N−1)|K∧0|) R)`.
pub fn check_doubling(space: &SpaceSpec, p: Point, small: f64, big: f64) -> Result<ComparisonReport> {
    if !(0.0 < small && small < big) {
        return Err(Error::InvalidArgument(format!("need 0 < r < R, got r={small}, R={big}")));
    }
    let a = ball_moments(space, p, small)?;
    let b = ball_moments(space, p, big)?;
    let CurvatureDimension { k, n } = space.cd;
    let bound = (big / small).powf(n) * (((n - 1.0) * k.min(0.0).abs()).sqrt() * big).exp();
    Ok(comparison(b.measure / a.measure, bound, a.exact && b.exact))
}

/// Sample points with the Hausdorff measure of the cell each one represents.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub points: Vec<Point>,
    pub volumes: Vec<f64>,
}

impl SamplingPlan {
    /// Cell-centered grid over `region` with about `n` cells per unit direction
    /// (`n` cells along an interval, `n × n` or `n` rings × `4n` sectors in 2-D).
    pub fn grid(space: &SpaceSpec, region: Domain, n: usize) -> Self {
        let n = n.max(1);
        let mut points = Vec::new();
        let mut volumes = Vec::new();
        let mut push = |p: Point, v: f64| {
            let keep = match region {
                Domain::Whole => true,
                Domain::Ball { center, radius } => space.distance(center, p) < radius,
            };
            if keep {
                points.push(p);
                volumes.push(v);
            }
        };
        match space.shape {
            Shape::Interval { length } => {
                let h = length / n as f64;
                for i in 0..n {
                    push(Point::on_line((i as f64 + 0.5) * h), h);
                }
            }
            Shape::Rectangle { width, height } => {
                let (hx, hy) = (width / n as f64, height / n as f64);
                for i in 0..n {
                    for j in 0..n {
                        push(Point::new((i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy), hx * hy);
                    }
                }
            }
            Shape::Disk { radius } | Shape::Cone { radius, .. } => {
                let period = match space.shape {
                    Shape::Cone { angle, .. } => angle,
                    _ => 2.0 * PI,
                };
                let sectors = 4 * n;
                let (hr, ha) = (radius / n as f64, period / sectors as f64);
                for i in 0..n {
                    let (r0, r1) = (i as f64 * hr, (i + 1) as f64 * hr);
                    let rc = 0.5 * (r0 + r1);
                    for j in 0..sectors {
                        let a = (j as f64 + 0.5) * ha;
                        let v = 0.5 * (r1 * r1 - r0 * r0) * ha;
                        let p = if matches!(space.shape, Shape::Disk { .. }) {
                            Point::new(rc * a.cos(), rc * a.sin())
                        } else {
                            Point::new(rc, a)
                        };
                        push(p, v);
                    }
                }
            }
        }
        Self { points, volumes }
    }
}

/// Noncollapsing modulus table.
#[derive(Debug, Clone, PartialEq)]
pub struct NoncollapsingReport {
    pub k0: f64,
    pub r0: f64,
    /// `(δ, ε(δ))`: worst `∫_E r^{k0}/μ(B_r(x)) dμ` over sampled `E`, `μ(E) ≤ δ`,
    /// maximized over the sampled radii.
    pub modulus: Vec<(f64, f64)>,
    /// Largest pointwise value of `r^{k0}/μ(B_r(x))`.
    pub sup_integrand: f64,
    pub region_measure: f64,
}

/// Uniform-integrability diagnostic for `x ↦ r^{k0}/μ(B_r(x))` on a region.
pub fn check_noncollapsing(
    space: &SpaceSpec,
    plan: &SamplingPlan,
    k0: f64,
    r0: f64,
    deltas: &[f64],
    radius_samples: usize,
) -> Result<NoncollapsingReport> {
    if !(k0 > 0.0) || !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InvalidArgument(format!("need k0 > 0 and r0 in (0,1), got {k0}, {r0}")));
    }
    let masses: Vec<f64> = plan
        .points
        .iter()
        .zip(&plan.volumes)
        .map(|(&p, &v)| space.weight.eval(p) * v)
        .collect();
    let region_measure: f64 = masses.iter().sum();
    let mut modulus: Vec<(f64, f64)> = deltas.iter().map(|&d| (d, 0.0)).collect();
    let mut sup_integrand = 0.0f64;
    let samples = radius_samples.max(1);
    for j in 0..samples {
        // Geometric radii in (0, r0), r0 itself excluded.
        let r = r0 * 0.5f64.powf(j as f64 + 0.5);
        let mut vals: Vec<(f64, f64)> = plan
            .points
            .iter()
            .zip(&masses)
            .map(|(&p, &mass)| (r.powf(k0) / ball_moments_clipped(space, p, r).measure, mass))
            .collect();
        vals.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        sup_integrand = sup_integrand.max(vals.first().map_or(0.0, |v| v.0));
        for entry in modulus.iter_mut() {
            let mut remaining = entry.0;
            let mut acc = 0.0;
            for &(g, mass) in &vals {
                if remaining <= 0.0 {
                    break;
                }
                let take = mass.min(remaining);
                acc += g * take;
                remaining -= take;
            }
            entry.1 = entry.1.max(acc);
        }
    }
    Ok(NoncollapsingReport { k0, r0, modulus, sup_integrand, region_measure })
}

/// Hausdorff measure of a domain.
pub fn domain_measure(space: &SpaceSpec, domain: Domain) -> Result<f64> {
    match domain {
        Domain::Whole => Ok(space.shape.hausdorff_measure()),
        Domain::Ball { center, radius } => {
            let unit = SpaceSpec::new(space.shape, WeightSpec::Unit, space.cd)?;
            Ok(ball_moments(&unit, center, radius)?.measure)
        }
    }
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<SpaceSpec>();
    check::<Box<WeightSpec>>();
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sinh_series(x: f64) -> f64 {
        // Independent oracle: odd Taylor series of sinh.
        let mut term = x;
        let mut sum = x;
        for n in 1..40 {
            term *= x * x / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn s_k_examples() {
        assert_eq!(s_k(0.0, 2.5), 2.5);
        assert!((s_k(1.0, PI / 2.0) - 1.0).abs() < 1e-15);
        let oracle = sinh_series(1.0);
        assert!((oracle - 1.175_201).abs() < 1e-5);
        assert!((s_k(-1.0, 1.0) - oracle).abs() < 1e-14);
    }

    #[test]
    fn sigma_branches() {
        assert_eq!(sigma_kt(0.0, 0.7, 3.0), 0.7);
        assert_eq!(sigma_kt(1.0, 0.3, 4.0), f64::INFINITY);
        let oracle = (PI / 4.0).sin() / (PI / 2.0).sin();
        assert!((oracle - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((sigma_kt(1.0, 0.5, PI / 2.0) - oracle).abs() < 1e-15);
        // sinh branch against the series oracle.
        let v = sigma_kt(-1.0, 0.5, 2.0);
        assert!((v - sinh_series(1.0) / sinh_series(2.0)).abs() < 1e-14);
    }

    #[test]
    fn disk_center_moments() {
        let disk = SpaceSpec::disk(1.0).unwrap();
        let m = ball_moments(&disk, Point::new(0.0, 0.0), 0.5).unwrap();
        assert!(m.exact);
        assert!((m.measure - PI / 4.0).abs() < 1e-15);
        assert!((m.b - PI * 0.25 / 3.0).abs() < 1e-15);
        assert!((m.b - 0.261_80).abs() < 1e-5);
    }

    #[test]
    fn cone_vertex_ball() {
        let cone = SpaceSpec::cone(2.0, PI).unwrap();
        let m = ball_moments(&cone, Point::new(0.0, 0.0), 1.0).unwrap();
        assert!((m.measure - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn radius_out_of_domain() {
        let disk = SpaceSpec::disk(1.0).unwrap();
        let err = ball_moments(&disk, Point::new(0.5, 0.0), 0.6).unwrap_err();
        assert!(matches!(err, Error::RadiusOutOfDomain { .. }));
    }

    #[test]
    fn quadrature_agrees_with_closed_forms() {
        // Constant weight 2 routed through quadrature via a custom evaluator.
        let two = WeightSpec::Custom { eval: Arc::new(|_| 2.0), lower: 2.0, upper: 2.0 };
        let rect = SpaceSpec::rectangle(1.0, 1.0).unwrap().with_weight(two.clone()).unwrap();
        let m = ball_moments(&rect, Point::new(0.4, 0.55), 0.3).unwrap();
        assert!(!m.exact);
        assert!((m.measure - 2.0 * PI * 0.09).abs() < 1e-10);
        assert!((m.b - 2.0 * PI * 0.09 / 3.0).abs() < 1e-10);
        // Off-vertex cone ball that does not wrap is a flat disk.
        let cone = SpaceSpec::cone(3.0, PI).unwrap().with_weight(two).unwrap();
        let m = ball_moments(&cone, Point::new(1.5, 0.7), 0.4).unwrap();
        assert!((m.measure - 2.0 * PI * 0.16).abs() < 1e-9, "{}", m.measure);
        assert!((m.b - 2.0 * PI * 0.16 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn wrapped_cone_ball_by_brute_force() {
        // Cone angle π, point at distance 0.5 from the vertex, r = 0.8: the
        // ball wraps around the vertex. Oracle: midpoint rule on the sector.
        let cone = SpaceSpec::cone(2.0, PI).unwrap();
        let p = Point::new(0.5, 1.0);
        let r = 0.8;
        let m = ball_moments(&cone, p, r).unwrap();
        let (ns, na) = (1500, 1500);
        let mut area = 0.0;
        let mut b = 0.0;
        for i in 0..ns {
            let s = (i as f64 + 0.5) * 1.3 / ns as f64;
            for j in 0..na {
                let a = (j as f64 + 0.5) * PI / na as f64;
                let dist = cone.distance(p, Point::new(s, a));
                if dist < r {
                    let dv = s * (1.3 / ns as f64) * (PI / na as f64);
                    area += dv;
                    b += dv * (1.0 - dist / r);
                }
            }
        }
        assert!((m.measure - area).abs() < 2e-4, "{} vs {}", m.measure, area);
        assert!((m.b - b).abs() < 2e-4, "{} vs {}", m.b, b);
        assert!(m.measure < PI * r * r);
    }

    #[test]
    fn density_examples() {
        let disk = SpaceSpec::disk(1.0).unwrap();
        let d = density_estimate(&disk, Point::new(0.0, 0.0), 2).unwrap();
        assert!((d.theta - 1.0).abs() < 1e-15);
        let cone = SpaceSpec::cone(1.0, PI).unwrap();
        let d = density_estimate(&cone, Point::new(0.0, 0.0), 2).unwrap();
        assert!((d.theta - 0.5).abs() < 1e-15);
        let interval = SpaceSpec::interval(1.0).unwrap().with_weight(WeightSpec::constant(2.0)).unwrap();
        let d = density_estimate(&interval, Point::on_line(0.5), 1).unwrap();
        assert!((d.theta - 2.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_density_ladder_converges() {
        let interval = SpaceSpec::interval(PI)
            .unwrap()
            .with_weight(WeightSpec::Sinusoidal { base: 1.0, amplitude: 0.5, frequency: 1.0, phase: 0.0 })
            .unwrap();
        let d = density_estimate(&interval, Point::on_line(1.0), 1).unwrap();
        assert!((d.theta - (1.0 + 0.5 * 1.0f64.sin())).abs() < 1e-15);
        assert!(d.residual < 1e-8);
    }

    #[test]
    fn bishop_gromov_examples() {
        let cone = SpaceSpec::cone(1.0, PI).unwrap();
        let rep = check_bishop_gromov(&cone, Point::new(0.0, 0.0), 0.3, 0.8).unwrap();
        assert!(rep.holds && rep.exact);
        // With ∫_0^ρ τ dτ = ρ²/2 the vertex ratio is θ.
        assert!((rep.lhs - PI).abs() < 1e-13 && (rep.rhs - PI).abs() < 1e-13);
        let disk = SpaceSpec::disk(1.0).unwrap();
        let rep = check_bishop_gromov(&disk, Point::new(0.0, 0.0), 0.2, 0.5).unwrap();
        assert!(rep.holds);
        assert!((rep.lhs - 2.0 * PI).abs() < 1e-13);
        let cone = SpaceSpec::cone(2.0, PI).unwrap();
        let rep = check_bishop_gromov(&cone, Point::new(0.5, 0.0), 0.1, 0.45).unwrap();
        assert!(rep.holds);
        // 0.45 < 0.5 = d, so both balls are flat disks.
        assert!((rep.lhs - rep.rhs).abs() < 1e-9);
        let rep = check_bishop_gromov(&cone, Point::new(0.5, 0.0), 0.1, 1.2).unwrap();
        assert!(rep.holds && rep.lhs < rep.rhs * (1.0 - 1e-3));
    }

    #[test]
    fn doubling_examples() {
        let disk = SpaceSpec::disk(1.0).unwrap();
        let rep = check_doubling(&disk, Point::new(0.0, 0.0), 0.25, 0.5).unwrap();
        assert!(rep.holds && (rep.lhs - 4.0).abs() < 1e-14 && (rep.rhs - 4.0).abs() < 1e-14);
        let cone = SpaceSpec::cone(1.0, PI).unwrap();
        let rep = check_doubling(&cone, Point::new(0.0, 0.0), 0.25, 0.5).unwrap();
        assert!(rep.holds && (rep.lhs - 4.0).abs() < 1e-14);
        let weighted = SpaceSpec::interval(PI)
            .unwrap()
            .with_weight(WeightSpec::Sinusoidal { base: 1.0, amplitude: 0.5, frequency: 1.0, phase: 0.0 })
            .unwrap()
            .with_cd(0.0, 1.0)
            .unwrap();
        let rep = check_doubling(&weighted, Point::on_line(PI / 2.0), 0.1, 0.2).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!((rep.lhs - 2.0).abs() < 0.01 && rep.rhs == 2.0);
    }

    #[test]
    fn noncollapsing_disk_interior() {
        let disk = SpaceSpec::disk(1.0).unwrap();
        let region = Domain::Ball { center: Point::new(0.0, 0.0), radius: 0.5 };
        let plan = SamplingPlan::grid(&disk, region, 20);
        let deltas = [0.01, 0.05, 0.1];
        let rep = check_noncollapsing(&disk, &plan, 2.0, 0.4, &deltas, 4).unwrap();
        for &(delta, eps) in &rep.modulus {
            assert!(eps <= delta / PI * (1.0 + 1e-9), "{delta} {eps}");
        }
        assert!((rep.sup_integrand - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn noncollapsing_interval_modulus_decreases() {
        let interval = SpaceSpec::interval(1.0).unwrap();
        let plan = SamplingPlan::grid(&interval, Domain::Whole, 200);
        let deltas = [0.2, 0.1, 0.05, 0.01, 0.001];
        let rep = check_noncollapsing(&interval, &plan, 1.0, 0.5, &deltas, 5).unwrap();
        let eps: Vec<f64> = rep.modulus.iter().map(|m| m.1).collect();
        assert!(eps.windows(2).all(|w| w[1] < w[0]));
        assert!(eps[4] < 2e-3);
    }

    #[test]
    fn noncollapsing_cone_vertex_bounded() {
        let cone = SpaceSpec::cone(1.0, PI).unwrap();
        let region = Domain::Ball { center: Point::new(0.0, 0.0), radius: 0.5 };
        let plan = SamplingPlan::grid(&cone, region, 16);
        let rep = check_noncollapsing(&cone, &plan, 2.0, 0.4, &[0.05, 0.01], 4).unwrap();
        // Density θ/(2π) = 1/2 at the vertex bounds r²/μ(B_r) by 1/(θ/2) = 2/π.
        assert!(rep.sup_integrand <= 2.0 / PI * (1.0 + 1e-9));
        assert!(rep.modulus[1].1 <= 0.01 * 2.0 / PI * (1.0 + 1e-9));
    }

    proptest! {
        #[test]
        fn s_k_tends_to_identity(k in -1.0f64..1.0, tau in 0.0f64..1.0) {
            prop_assert!((s_k(k, tau) - tau).abs() <= k.abs() * tau.powi(3) / 6.0 * 1.2 + 1e-15);
        }

        #[test]
        fn ball_measure_monotone_and_b_below(r1 in 0.01f64..0.3, dr in 0.001f64..0.1, px in 0.45f64..0.55) {
            let w = WeightSpec::Affine { constant: 1.0, slope: [0.3, -0.2] };
            let rect = SpaceSpec::rectangle(1.0, 1.0).unwrap().with_weight(w).unwrap();
            let p = Point::new(px, 0.5);
            let a = ball_moments(&rect, p, r1).unwrap();
            let b = ball_moments(&rect, p, r1 + dr).unwrap();
            prop_assert!(b.measure > a.measure);
            prop_assert!(a.b <= a.measure && b.b <= b.measure);
        }
    }

    #[test]
    fn b_over_r_squared_near_pi_over_three() {
        let rect = SpaceSpec::rectangle(1.0, 1.0).unwrap();
        for &r in &[0.05, 0.02, 0.01] {
            let m = ball_moments(&rect, Point::new(0.5, 0.5), r).unwrap();
            assert!((m.b / (r * r) / (PI / 3.0) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn bishop_gromov_ratio_nonincreasing_on_model_spaces() {
        let spaces = [
            (SpaceSpec::interval(2.0).unwrap(), Point::on_line(1.0)),
            (SpaceSpec::rectangle(1.0, 1.0).unwrap(), Point::new(0.5, 0.5)),
            (SpaceSpec::disk(1.0).unwrap(), Point::new(0.2, -0.1)),
            (SpaceSpec::cone(2.0, PI).unwrap(), Point::new(0.0, 0.0)),
            (SpaceSpec::cone(2.0, PI).unwrap(), Point::new(0.6, 0.3)),
            (SpaceSpec::cone(3.0, 0.6 * PI).unwrap(), Point::new(0.8, 0.3)),
        ];
        for (space, p) in spaces.iter() {
            let limit = space.radius_limit(*p);
            let grid: Vec<f64> = (1..=12).map(|i| limit * i as f64 / 12.0).collect();
            let ratios: Vec<(f64, bool)> = grid.iter().map(|&r| bishop_gromov_ratio(space, *p, r).unwrap()).collect();
            for w in ratios.windows(2) {
                let tol = if w[0].1 && w[1].1 { EXACT_TOLERANCE } else { QUADRATURE_TOLERANCE };
                assert!(w[1].0 <= w[0].0 * (1.0 + tol), "{:?} {:?}", space.shape, w);
            }
        }
    }
}
