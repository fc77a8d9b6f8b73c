//! Structured meshes for the model domains.
//!
//! Intervals and whole rectangles use affine elements. Balls in the plane
//! and all cone domains use a polar chart `(u, α) ↦ (σ(u, α), α)` around a
//! center: the chart is exact, so element measures sum to the domain
//! measure and refinement preserves it. Basis functions are piecewise
//! affine in the chart parameters; the cells touching the center are
//! collapsed quadrilaterals fanned around a single hub node.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{cone_distance, Modulo, Domain, Point, Shape, SpaceSpec};
use crate::quad::{integrate, GL6_NODES, GL6_WEIGHTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Segment,
    Triangle,
    /// Triangle in chart parameters.
    ChartTriangle,
    /// Collapsed cell `[0, u₁] × [α_j, α_j + Δ]` at the hub.
    HubSector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub kind: ElementKind,
    /// Node indices; segments use the first two. Hub sectors list the hub first.
    pub nodes: [usize; 3],
    pub measure: f64,
    /// Chart parameters `(u, α)` of the vertices (chart elements only).
    pub param: [[f64; 2]; 3],
}

impl Element {
    pub fn node_count(&self) -> usize {
        if self.kind == ElementKind::Segment {
            2
        } else {
            3
        }
    }

    pub fn node_slice(&self) -> &[usize] {
        &self.nodes[..self.node_count()]
    }
}

/// How chart radii and angles land in the space's coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Embedding {
    /// Cartesian plane around `center`.
    Plane { center: Point },
    /// Cone of angle `angle`, centered at the vertex; α measured from `offset`.
    ConeVertex { angle: f64, offset: f64 },
    /// A flat disk on the cone around the off-vertex point `(s, φ)`.
    ConeFlat { angle: f64, s: f64, phi: f64 },
}

/// Radial extent of the chart as a function of α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `σ = u R`.
    Round { radius: f64 },
    /// Cone ball of radius `radius` around a point at distance `d` from the
    /// vertex, containing the vertex: `σ = u S(α)`.
    Shifted { d: f64, radius: f64 },
    /// Cone ball wrapping around the vertex without containing it:
    /// `σ = s₋(α) + u (s₊(α) − s₋(α))`.
    Annulus { d: f64, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarChart {
    pub embedding: Embedding,
    pub profile: Profile,
}

impl PolarChart {
    /// Angular period Θ of the chart.
    pub fn period(&self) -> f64 {
        match self.embedding {
            Embedding::ConeVertex { angle, .. } => angle,
            _ => 2.0 * PI,
        }
    }

    /// Start of the angular range; the seam sits where the profile may kink.
    pub fn alpha0(&self) -> f64 {
        match self.profile {
            Profile::Round { .. } => 0.0,
            _ => -0.5 * self.period(),
        }
    }

    fn has_hub(&self) -> bool {
        !matches!(self.profile, Profile::Annulus { .. })
    }

    /// `(σ, ∂σ/∂u, ∂σ/∂α)`.
    pub fn sigma(&self, u: f64, a: f64) -> (f64, f64, f64) {
        match self.profile {
            Profile::Round { radius } => (u * radius, radius, 0.0),
            Profile::Shifted { d, radius } => {
                let (sn, cs) = a.sin_cos();
                let q = (radius * radius - d * d * sn * sn).max(0.0).sqrt();
                let s = d * cs + q;
                let ds = -d * sn - d * d * sn * cs / q;
                (u * s, s, u * ds)
            }
            Profile::Annulus { d, radius } => {
                let (sn, cs) = a.sin_cos();
                let q = (radius * radius - d * d * sn * sn).max(0.0).sqrt();
                let dq = -d * d * sn * cs / q;
                let lo = d * cs - q;
                let dlo = -d * sn - dq;
                (lo + 2.0 * u * q, 2.0 * q, dlo + 2.0 * u * dq)
            }
        }
    }

    /// Largest outer radius over α, and largest radial width.
    fn extents(&self) -> (f64, f64) {
        match self.profile {
            Profile::Round { radius } => (radius, radius),
            Profile::Shifted { d, radius } => (d + radius, d + radius),
            Profile::Annulus { d, radius } => (d + radius, 2.0 * radius),
        }
    }

    fn inradius(&self) -> f64 {
        match self.profile {
            Profile::Round { radius } | Profile::Shifted { radius, .. } => radius,
            Profile::Annulus { d, radius } => {
                let half = 0.5 * self.period();
                (radius * radius - d * d * half.sin().powi(2)).max(0.0).sqrt()
            }
        }
    }

    /// Space coordinates of the chart point with radius σ at angle α.
    pub fn place(&self, sigma: f64, a: f64) -> Point {
        match self.embedding {
            Embedding::Plane { center } => Point::new(center.x + sigma * a.cos(), center.y + sigma * a.sin()),
            Embedding::ConeVertex { angle, offset } => {
                if sigma == 0.0 {
                    Point::new(0.0, 0.0)
                } else {
                    Point::new(sigma, (offset + a).rem_euclid_by(angle))
                }
            }
            Embedding::ConeFlat { angle, s, phi } => {
                let x = s + sigma * a.cos();
                let y = sigma * a.sin();
                Point::new(x.hypot(y), (phi + y.atan2(x)).rem_euclid_by(angle))
            }
        }
    }

    /// Inverse of [`place`](Self::place): `(σ, α)` with α in the chart range.
    pub fn unplace(&self, p: Point) -> (f64, f64) {
        let (sigma, a) = match self.embedding {
            Embedding::Plane { center } => {
                let (x, y) = (p.x - center.x, p.y - center.y);
                (x.hypot(y), y.atan2(x))
            }
            Embedding::ConeVertex { offset, .. } => (p.x, p.y - offset),
            Embedding::ConeFlat { angle, s, phi } => {
                let mut delta = (p.y - phi) % angle;
                if delta > 0.5 * angle {
                    delta -= angle;
                } else if delta <= -0.5 * angle {
                    delta += angle;
                }
                let x = p.x * delta.cos() - s;
                let y = p.x * delta.sin();
                (x.hypot(y), y.atan2(x))
            }
        };
        let period = self.period();
        let a0 = self.alpha0();
        (sigma, a0 + (a - a0).rem_euclid_by(period))
    }

    /// Chart parameter `u` of radius σ at angle α.
    pub fn u_of(&self, sigma: f64, a: f64) -> f64 {
        let (s1, su, _) = self.sigma(1.0, a);
        let s0 = s1 - su;
        (sigma - s0) / su
    }

    /// Exact measure of the chart image.
    pub fn area(&self) -> f64 {
        let period = self.period();
        match self.profile {
            Profile::Round { radius } => 0.5 * period * radius * radius,
            _ => {
                let a0 = self.alpha0();
                let f = |a: f64| {
                    let (s1, su, _) = self.sigma(1.0, a);
                    let s0 = s1 - su;
                    0.5 * (s1 * s1 - s0 * s0)
                };
                integrate(f, a0, a0 + period, 1e-14, 1e-14).value
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Grid {
    Line { x0: f64, x1: f64, n: usize },
    Structured { width: f64, height: f64, nx: usize, ny: usize },
    Polar { chart: PolarChart, n_r: usize, n_phi: usize },
}

/// A conforming mesh of a domain of a model space.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub shape: Shape,
    pub domain: Domain,
    /// Node positions in space coordinates (cone nodes as `(s, φ mod θ)`).
    pub nodes: Vec<Point>,
    /// Planar positions used only for orderings and plots.
    pub layout: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    pub boundary_mask: Vec<bool>,
    /// Resolution: target element diameter used to build the mesh.
    pub h: f64,
    pub(crate) grid: Grid,
}

fn cells(len: f64, h: f64) -> usize {
    ((len / h) - 1e-9).ceil().max(1.0) as usize
}

fn tri_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Build a mesh of `domain` with resolution `h`.
pub fn build_mesh(space: &SpaceSpec, domain: Domain, h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("mesh resolution must be positive, got {h}")));
    }
    if let Domain::Ball { center, radius } = domain {
        if !space.contains(center) {
            return Err(Error::InvalidArgument(format!("ball center {center} is outside the space")));
        }
        let limit = space.radius_limit(center);
        if !(radius > 0.0) || radius > limit * (1.0 + 1e-12) {
            return Err(Error::RadiusOutOfDomain { radius, limit });
        }
    }
    let grid = match (space.shape, domain) {
        (Shape::Interval { length }, Domain::Whole) => Grid::Line { x0: 0.0, x1: length, n: 0 },
        (Shape::Interval { .. }, Domain::Ball { center, radius }) => Grid::Line {
            x0: center.x - radius,
            x1: center.x + radius,
            n: 0,
        },
        (Shape::Rectangle { width, height }, Domain::Whole) => Grid::Structured { width, height, nx: 0, ny: 0 },
        (Shape::Disk { radius }, Domain::Whole) => Grid::Polar {
            chart: PolarChart { embedding: Embedding::Plane { center: Point::new(0.0, 0.0) }, profile: Profile::Round { radius } },
            n_r: 0,
            n_phi: 0,
        },
        (Shape::Rectangle { .. } | Shape::Disk { .. }, Domain::Ball { center, radius }) => Grid::Polar {
            chart: PolarChart { embedding: Embedding::Plane { center }, profile: Profile::Round { radius } },
            n_r: 0,
            n_phi: 0,
        },
        (Shape::Cone { radius, angle }, Domain::Whole) => Grid::Polar {
            chart: PolarChart { embedding: Embedding::ConeVertex { angle, offset: 0.0 }, profile: Profile::Round { radius } },
            n_r: 0,
            n_phi: 0,
        },
        (Shape::Cone { angle, .. }, Domain::Ball { center, radius }) => {
            let d = center.x;
            let chart = if d == 0.0 {
                PolarChart { embedding: Embedding::ConeVertex { angle, offset: 0.0 }, profile: Profile::Round { radius } }
            } else if radius <= d * (0.5 * angle).min(0.5 * PI).sin() {
                PolarChart {
                    embedding: Embedding::ConeFlat { angle, s: d, phi: center.y },
                    profile: Profile::Round { radius },
                }
            } else if radius >= d {
                PolarChart {
                    embedding: Embedding::ConeVertex { angle, offset: center.y },
                    profile: Profile::Shifted { d, radius },
                }
            } else {
                PolarChart {
                    embedding: Embedding::ConeVertex { angle, offset: center.y },
                    profile: Profile::Annulus { d, radius },
                }
            };
            Grid::Polar { chart, n_r: 0, n_phi: 0 }
        }
    };
    let (inradius, grid) = match grid {
        Grid::Line { x0, x1, .. } => (0.5 * (x1 - x0), Grid::Line { x0, x1, n: cells(x1 - x0, h) }),
        Grid::Structured { width, height, .. } => (
            0.5 * width.min(height),
            Grid::Structured { width, height, nx: cells(width, h), ny: cells(height, h) },
        ),
        Grid::Polar { chart, .. } => {
            let (outer, width) = chart.extents();
            let n_r = cells(width, h).max(if chart.has_hub() { 1 } else { 2 });
            let n_phi = cells(chart.period() * outer, h).max(6);
            (chart.inradius(), Grid::Polar { chart, n_r, n_phi })
        }
    };
    if h > inradius * (1.0 + 1e-12) {
        return Err(Error::ResolutionTooCoarse { h, limit: inradius });
    }
    Mesh::from_grid(space.shape, domain, h, grid)
}

impl Mesh {
    fn from_grid(shape: Shape, domain: Domain, h: f64, grid: Grid) -> Result<Self> {
        let mut mesh = Mesh {
            shape,
            domain,
            nodes: Vec::new(),
            layout: Vec::new(),
            elements: Vec::new(),
            boundary_mask: Vec::new(),
            h,
            grid,
        };
        match grid {
            Grid::Line { x0, x1, n } => {
                let dx = (x1 - x0) / n as f64;
                for i in 0..=n {
                    let x = if i == n { x1 } else { x0 + i as f64 * dx };
                    mesh.nodes.push(Point::on_line(x));
                    mesh.layout.push([x, 0.0]);
                    mesh.boundary_mask.push(i == 0 || i == n);
                }
                for i in 0..n {
                    let measure = mesh.nodes[i + 1].x - mesh.nodes[i].x;
                    mesh.elements.push(Element {
                        kind: ElementKind::Segment,
                        nodes: [i, i + 1, usize::MAX],
                        measure,
                        param: [[0.0; 2]; 3],
                    });
                }
            }
            Grid::Structured { width, height, nx, ny } => {
                let id = |i: usize, j: usize| j * (nx + 1) + i;
                for j in 0..=ny {
                    for i in 0..=nx {
                        let p = Point::new(width * i as f64 / nx as f64, height * j as f64 / ny as f64);
                        mesh.nodes.push(p);
                        mesh.layout.push([p.x, p.y]);
                        mesh.boundary_mask.push(i == 0 || j == 0 || i == nx || j == ny);
                    }
                }
                for j in 0..ny {
                    for i in 0..nx {
                        for tri in [[id(i, j), id(i + 1, j), id(i + 1, j + 1)], [id(i, j), id(i + 1, j + 1), id(i, j + 1)]] {
                            let c = tri.map(|k| mesh.layout[k]);
                            mesh.elements.push(Element {
                                kind: ElementKind::Triangle,
                                nodes: tri,
                                measure: tri_area(c[0], c[1], c[2]),
                                param: [[0.0; 2]; 3],
                            });
                        }
                    }
                }
            }
            Grid::Polar { chart, n_r, n_phi } => mesh.fill_polar(&chart, n_r, n_phi),
        }
        if let Some(bad) = mesh.elements.iter().position(|e| !(e.measure > 0.0)) {
            return Err(Error::SingularElement { element: bad });
        }
        Ok(mesh)
    }

    fn fill_polar(&mut self, chart: &PolarChart, n_r: usize, n_phi: usize) {
        let hub = chart.has_hub();
        let period = chart.period();
        let a0 = chart.alpha0();
        let da = period / n_phi as f64;
        let alpha = |j: usize| a0 + j as f64 * da;
        let u_of = |i: usize| i as f64 / n_r as f64;
        let first_ring = if hub { 1 } else { 0 };
        let id = |i: usize, j: usize| -> usize {
            if hub {
                if i == 0 {
                    0
                } else {
                    1 + (i - 1) * n_phi + j % n_phi
                }
            } else {
                i * n_phi + j % n_phi
            }
        };
        let push_node = |mesh: &mut Mesh, u: f64, a: f64, boundary: bool| {
            let (s, _, _) = chart.sigma(u, a);
            mesh.nodes.push(chart.place(s, a));
            let t = 2.0 * PI * (a - a0) / period;
            mesh.layout.push([s * t.cos(), s * t.sin()]);
            mesh.boundary_mask.push(boundary);
        };
        if hub {
            push_node(self, 0.0, 0.0, false);
        }
        for i in first_ring..=n_r {
            let boundary = i == n_r || (!hub && i == 0);
            for j in 0..n_phi {
                push_node(self, u_of(i), alpha(j), boundary);
            }
        }
        for j in 0..n_phi {
            let (aj, aj1) = (alpha(j), alpha(j) + da);
            if hub {
                let mut e = Element {
                    kind: ElementKind::HubSector,
                    nodes: [0, id(1, j), id(1, j + 1)],
                    measure: 0.0,
                    param: [[0.0, aj], [u_of(1), aj], [u_of(1), aj1]],
                };
                e.measure = chart_measure(chart, &e);
                self.elements.push(e);
            }
            for i in first_ring..n_r {
                let (ui, ui1) = (u_of(i), u_of(i + 1));
                let tris = [
                    ([id(i, j), id(i + 1, j), id(i + 1, j + 1)], [[ui, aj], [ui1, aj], [ui1, aj1]]),
                    ([id(i, j), id(i + 1, j + 1), id(i, j + 1)], [[ui, aj], [ui1, aj1], [ui, aj1]]),
                ];
                for (nodes, param) in tris {
                    let mut e = Element { kind: ElementKind::ChartTriangle, nodes, measure: 0.0, param };
                    e.measure = chart_measure(chart, &e);
                    self.elements.push(e);
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Geometric dimension of the mesh.
    pub fn dimension(&self) -> usize {
        self.shape.dimension()
    }

    pub fn total_measure(&self) -> f64 {
        self.elements.iter().map(|e| e.measure).sum()
    }

    /// Hausdorff measure of the meshed domain, from closed forms or 1-D quadrature.
    pub fn analytic_measure(&self) -> f64 {
        match self.grid {
            Grid::Line { x0, x1, .. } => x1 - x0,
            Grid::Structured { width, height, .. } => width * height,
            Grid::Polar { chart, .. } => chart.area(),
        }
    }

    /// The polar chart, for polar meshes.
    pub fn chart(&self) -> Option<&PolarChart> {
        match &self.grid {
            Grid::Polar { chart, .. } => Some(chart),
            _ => None,
        }
    }

    /// Number of radial rings around the hub (polar meshes).
    pub fn rings(&self) -> Option<usize> {
        match self.grid {
            Grid::Polar { n_r, .. } => Some(n_r),
            _ => None,
        }
    }

    /// Number of angular divisions (polar meshes).
    pub fn sectors(&self) -> Option<usize> {
        match self.grid {
            Grid::Polar { n_phi, .. } => Some(n_phi),
            _ => None,
        }
    }

    /// Uniform subdivision: every cell split in two along each chart direction.
    pub fn refine(&self) -> Mesh {
        let grid = match self.grid {
            Grid::Line { x0, x1, n } => Grid::Line { x0, x1, n: 2 * n },
            Grid::Structured { width, height, nx, ny } => Grid::Structured { width, height, nx: 2 * nx, ny: 2 * ny },
            Grid::Polar { chart, n_r, n_phi } => Grid::Polar { chart, n_r: 2 * n_r, n_phi: 2 * n_phi },
        };
        Mesh::from_grid(self.shape, self.domain, 0.5 * self.h, grid).expect("refinement of a valid mesh")
    }

    /// Space coordinates of the barycenter of an element (image of the
    /// parameter barycenter for chart elements).
    pub fn barycenter(&self, e: &Element) -> Point {
        match (e.kind, &self.grid) {
            (ElementKind::Segment, _) => Point::on_line(0.5 * (self.nodes[e.nodes[0]].x + self.nodes[e.nodes[1]].x)),
            (ElementKind::Triangle, _) => {
                let p = e.nodes.map(|k| self.nodes[k]);
                Point::new((p[0].x + p[1].x + p[2].x) / 3.0, (p[0].y + p[1].y + p[2].y) / 3.0)
            }
            (ElementKind::ChartTriangle | ElementKind::HubSector, Grid::Polar { chart, .. }) => {
                let (u, a) = if e.kind == ElementKind::HubSector {
                    (2.0 / 3.0 * e.param[1][0], 0.5 * (e.param[1][1] + e.param[2][1]))
                } else {
                    (
                        (e.param[0][0] + e.param[1][0] + e.param[2][0]) / 3.0,
                        (e.param[0][1] + e.param[1][1] + e.param[2][1]) / 3.0,
                    )
                };
                let (s, _, _) = chart.sigma(u, a);
                chart.place(s, a)
            }
            _ => unreachable!("chart element outside a polar mesh"),
        }
    }

    /// Element stiffness and mass matrices for unit weight.
    pub fn element_matrices(&self, e: &Element) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
        match e.kind {
            ElementKind::Segment => {
                let l = e.measure;
                let k = [[1.0 / l, -1.0 / l, 0.0], [-1.0 / l, 1.0 / l, 0.0], [0.0; 3]];
                let m = [[l / 3.0, l / 6.0, 0.0], [l / 6.0, l / 3.0, 0.0], [0.0; 3]];
                (k, m)
            }
            ElementKind::Triangle => {
                let c = e.nodes.map(|k| self.layout[k]);
                let area = e.measure;
                let b = [c[1][1] - c[2][1], c[2][1] - c[0][1], c[0][1] - c[1][1]];
                let g = [c[2][0] - c[1][0], c[0][0] - c[2][0], c[1][0] - c[0][0]];
                let mut k = [[0.0; 3]; 3];
                let mut m = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        k[i][j] = (b[i] * b[j] + g[i] * g[j]) / (4.0 * area);
                        m[i][j] = if i == j { area / 6.0 } else { area / 12.0 };
                    }
                }
                (k, m)
            }
            ElementKind::ChartTriangle | ElementKind::HubSector => {
                let Grid::Polar { chart, .. } = &self.grid else {
                    unreachable!("chart element outside a polar mesh")
                };
                let mut k = [[0.0; 3]; 3];
                let mut m = [[0.0; 3]; 3];
                for_each_chart_point(e, |u, a, w, val, grad| {
                    let (s, su, sa) = chart.sigma(u, a);
                    let dens = su * s;
                    let inv = 1.0 / dens;
                    for i in 0..3 {
                        for j in 0..3 {
                            let form = (sa * sa + s * s) * grad[i][0] * grad[j][0]
                                - su * sa * (grad[i][0] * grad[j][1] + grad[i][1] * grad[j][0])
                                + su * su * grad[i][1] * grad[j][1];
                            k[i][j] += w * inv * form;
                            m[i][j] += w * dens * val[i] * val[j];
                        }
                    }
                });
                (k, m)
            }
        }
    }

    /// Interpolate nodal values at a point of the meshed domain.
    pub fn interpolate(&self, values: &[f64], p: Point) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} nodal values, got {}",
                self.nodes.len(),
                values.len()
            )));
        }
        let outside = || Error::InvalidArgument(format!("point {p} lies outside the mesh"));
        let tol = 1e-12;
        match self.grid {
            Grid::Line { x0, x1, n } => {
                let t = (p.x - x0) / (x1 - x0) * n as f64;
                if t < -tol * n as f64 || t > n as f64 * (1.0 + tol) {
                    return Err(outside());
                }
                let i = (t.floor().max(0.0) as usize).min(n - 1);
                let xi = t - i as f64;
                Ok(values[i] * (1.0 - xi) + values[i + 1] * xi)
            }
            Grid::Structured { width, height, nx, ny } => {
                let tx = p.x / width * nx as f64;
                let ty = p.y / height * ny as f64;
                if tx < -tol || ty < -tol || tx > nx as f64 * (1.0 + tol) || ty > ny as f64 * (1.0 + tol) {
                    return Err(outside());
                }
                let i = (tx.floor().max(0.0) as usize).min(nx - 1);
                let j = (ty.floor().max(0.0) as usize).min(ny - 1);
                let id = |i: usize, j: usize| values[j * (nx + 1) + i];
                Ok(quad_interp(tx - i as f64, ty - j as f64, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)))
            }
            Grid::Polar { chart, n_r, n_phi } => {
                let (sigma, a) = chart.unplace(p);
                let u = chart.u_of(sigma, a);
                if !(-tol..=1.0 + tol).contains(&u) {
                    return Err(outside());
                }
                let hub = chart.has_hub();
                let da = chart.period() / n_phi as f64;
                let ta = (a - chart.alpha0()) / da;
                let j = (ta.floor().max(0.0) as usize).min(n_phi - 1);
                let eta = ta - j as f64;
                let tu = u * n_r as f64;
                let i = (tu.floor().max(0.0) as usize).min(n_r - 1);
                let xi = tu - i as f64;
                let id = |i: usize, j: usize| -> f64 {
                    let k = if hub {
                        if i == 0 {
                            0
                        } else {
                            1 + (i - 1) * n_phi + j % n_phi
                        }
                    } else {
                        i * n_phi + j % n_phi
                    };
                    values[k]
                };
                if hub && i == 0 {
                    let ring = id(1, j) * (1.0 - eta) + id(1, j + 1) * eta;
                    return Ok(id(0, 0) * (1.0 - xi) + ring * xi);
                }
                Ok(quad_interp(xi, eta, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)))
            }
        }
    }

    /// Index of the node at `p`, if one sits there.
    pub fn node_at(&self, p: Point, tol: f64) -> Option<usize> {
        let probe = |q: Point| match self.shape {
            Shape::Cone { angle, .. } => cone_distance(p, q, angle),
            _ => (p.x - q.x).hypot(p.y - q.y),
        };
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, &q)| (i, probe(q)))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .map(|(i, _)| i)
    }

    /// Largest elementwise gradient norm of a nodal function.
    pub fn max_gradient(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for e in &self.elements {
            let (k, _) = self.element_matrices(e);
            let n = e.node_count();
            let mut energy = 0.0;
            for i in 0..n {
                for j in 0..n {
                    energy += values[e.nodes[i]] * k[i][j] * values[e.nodes[j]];
                }
            }
            worst = worst.max((energy.max(0.0) / e.measure).sqrt());
        }
        worst
    }
}

/// Interpolation on a cell split along the diagonal `(0,0)–(1,1)`.
fn quad_interp(xi: f64, eta: f64, v00: f64, v10: f64, v11: f64, v01: f64) -> f64 {
    if eta <= xi {
        v00 + xi * (v10 - v00) + eta * (v11 - v10)
    } else {
        v00 + xi * (v11 - v01) + eta * (v01 - v00)
    }
}

/// Visit Gauss points of a chart element with weights (including the
/// parameter Jacobian), basis values, and parameter gradients `(∂_u, ∂_α)`.
fn for_each_chart_point<F: FnMut(f64, f64, f64, [f64; 3], [[f64; 2]; 3])>(e: &Element, mut visit: F) {
    let [p0, p1, p2] = e.param;
    match e.kind {
        ElementKind::HubSector => {
            let u1 = p1[0];
            let (a0, a1) = (p1[1], p2[1]);
            let da = a1 - a0;
            for (xu, wu) in GL6_NODES.iter().zip(GL6_WEIGHTS.iter()) {
                let u = 0.5 * u1 * (1.0 + xu);
                for (xa, wa) in GL6_NODES.iter().zip(GL6_WEIGHTS.iter()) {
                    let t = 0.5 * (1.0 + xa);
                    let a = a0 + t * da;
                    let w = 0.25 * u1 * da * wu * wa;
                    let r = u / u1;
                    let val = [1.0 - r, r * (1.0 - t), r * t];
                    let grad = [[-1.0 / u1, 0.0], [(1.0 - t) / u1, -r / da], [t / u1, r / da]];
                    visit(u, a, w, val, grad);
                }
            }
        }
        ElementKind::ChartTriangle => {
            let d1 = [p1[0] - p0[0], p1[1] - p0[1]];
            let d2 = [p2[0] - p0[0], p2[1] - p0[1]];
            let det = d1[0] * d2[1] - d2[0] * d1[1];
            // Rows of the inverse of [d1 d2] are the gradients of λ1, λ2.
            let g1 = [d2[1] / det, -d2[0] / det];
            let g2 = [-d1[1] / det, d1[0] / det];
            let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
            for (xa, wa) in GL6_NODES.iter().zip(GL6_WEIGHTS.iter()) {
                let a = 0.5 * (1.0 + xa);
                for (xb, wb) in GL6_NODES.iter().zip(GL6_WEIGHTS.iter()) {
                    let b = 0.5 * (1.0 + xb);
                    // Collapsed square: λ1 = a(1 − b), λ2 = ab.
                    let (l1, l2) = (a * (1.0 - b), a * b);
                    let u = p0[0] + l1 * d1[0] + l2 * d2[0];
                    let al = p0[1] + l1 * d1[1] + l2 * d2[1];
                    let w = 0.25 * wa * wb * a * det.abs();
                    visit(u, al, w, [1.0 - l1 - l2, l1, l2], [g0, g1, g2]);
                }
            }
        }
        _ => {}
    }
}

fn chart_measure(chart: &PolarChart, e: &Element) -> f64 {
    let mut total = 0.0;
    for_each_chart_point(e, |u, a, w, _, _| {
        let (s, su, _) = chart.sigma(u, a);
        total += w * su * s;
    });
    total
}
