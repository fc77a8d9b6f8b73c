//! Experiment configuration files (TOML).
//!
//! Unknown keys are rejected. After parsing, every parameter is checked
//! against the model-space invariants and the first offending field is
//! reported by its dotted path.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use weyl_core::{Domain, Point, Shape, SpaceSpec, WeightSpec};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Solve,
    Count,
    Trace,
    Weyl,
    Blowup,
    Converge,
    Geom,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Count => "count",
            ExperimentKind::Trace => "trace",
            ExperimentKind::Weyl => "weyl",
            ExperimentKind::Blowup => "blowup",
            ExperimentKind::Converge => "converge",
            ExperimentKind::Geom => "geom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when given.
    pub kind: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub space: SpaceConfig,
    pub domain: Option<BallConfig>,
    pub mesh: Option<MeshConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub fit: Option<FitConfig>,
    pub trace: Option<TraceConfig>,
    pub blowup: Option<BlowupConfig>,
    pub converge: Option<ConvergeConfig>,
    pub geom: Option<GeomConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Interval,
    Rectangle,
    Disk,
    Cone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub shape: ShapeKind,
    pub length: Option<f64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub radius: Option<f64>,
    /// Cone angle in radians.
    pub angle: Option<f64>,
    /// Cone angle as a multiple of π; an alternative to `angle`.
    pub angle_over_pi: Option<f64>,
    pub weight: Option<WeightConfig>,
    pub cd: Option<CdConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightConfig {
    Unit,
    Constant { value: f64 },
    Affine { constant: f64, slope: [f64; 2] },
    Sinusoidal { base: f64, amplitude: f64, frequency: f64, #[serde(default)] phase: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdConfig {
    pub k: f64,
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub h: f64,
    /// Extra halvings of `h` for convergence ladders.
    #[serde(default)]
    pub refinements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_dense_limit")]
    pub dense_limit: usize,
    /// Relative agreement with the analytic spectrum to assert, if any.
    pub oracle_tolerance: Option<f64>,
}

fn default_count() -> usize {
    10
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_dense_limit() -> usize {
    weyl_core::eigensolve::DENSE_LIMIT
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { count: default_count(), tolerance: default_tolerance(), dense_limit: default_dense_limit(), oracle_tolerance: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountSource {
    /// Eigenvalues from the eigensolver.
    Spectrum,
    /// Inertia counts on a grid.
    Inertia,
    /// Closed-form or Bessel-zero spectrum.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub window: [f64; 2],
    /// Fix `k/2`; omitted means a free log-log fit.
    pub exponent: Option<f64>,
    #[serde(default = "default_fit_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_source")]
    pub source: CountSource,
    /// Grid size for inertia counting.
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    /// Clip the window to the reliable band of the discrete problem.
    #[serde(default = "default_true")]
    pub reliable_band: bool,
}

fn default_fit_tolerance() -> f64 {
    0.05
}
fn default_source() -> CountSource {
    CountSource::Spectrum
}
fn default_grid() -> usize {
    64
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub t0: f64,
    #[serde(default = "default_rungs")]
    pub rungs: usize,
    #[serde(default = "default_trace_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_source")]
    pub source: CountSource,
    /// Largest eigenvalue of an oracle spectrum.
    pub cutoff: Option<f64>,
}

fn default_rungs() -> usize {
    5
}
fn default_trace_tolerance() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupConfig {
    pub point: [f64; 2],
    pub radius: f64,
    pub scales: Vec<f64>,
    #[serde(default = "default_blowup_count")]
    pub count: usize,
    #[serde(default = "default_h_rel")]
    pub h_rel: f64,
    /// Relative agreement of the smallest scale with the tangent-cone spectrum.
    #[serde(default = "default_fit_tolerance")]
    pub tolerance: f64,
    /// Time for the kernel ladder; omitted skips it.
    pub kernel_time: Option<f64>,
    /// Ball radius used by the kernel ladder.
    pub kernel_radius: Option<f64>,
    /// Geometric scales of the kernel ladder; defaults to `scales`.
    pub kernel_scales: Option<Vec<f64>>,
}

fn default_blowup_count() -> usize {
    3
}
fn default_h_rel() -> f64 {
    weyl_core::blowup::DEFAULT_RELATIVE_H
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Cone balls with angles `params` converging to the space's angle.
    ConeAngle,
    /// Weights `1 + (amplitude/j) sin x` on the space's interval.
    WeightAmplitude,
    /// `X_j = [−1+1/j, 1−1/j]` without boundary against `(−1, 1)`.
    ShrinkingInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub family: FamilyKind,
    pub params: Vec<f64>,
    #[serde(default = "default_blowup_count")]
    pub count: usize,
    #[serde(default = "default_fit_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Whether the family is expected to converge.
    #[serde(default = "default_true")]
    pub expect_convergence: bool,
}

fn default_amplitude() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeomConfig {
    pub point: [f64; 2],
    pub radii: Vec<f64>,
    /// Density dimension; defaults to the space dimension.
    pub k: Option<usize>,
    /// Expected density θ_k(p), for the b-limit assertion.
    pub theta: Option<f64>,
    #[serde(default = "default_b_tolerance")]
    pub tolerance: f64,
}

fn default_b_tolerance() -> f64 {
    0.01
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Write the mesh as plain text next to the results.
    #[serde(default)]
    pub mesh: bool,
}

fn invalid(field: &str, message: impl Into<String>) -> LabError {
    LabError::Config { field: field.to_string(), message: message.into() }
}

fn positive(field: &str, v: f64) -> Result<f64, LabError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn required(field: &str, v: Option<f64>) -> Result<f64, LabError> {
    positive(field, v.ok_or_else(|| invalid(field, "is required for this shape"))?)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config { field: String::new(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config {
            field: String::new(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_toml(&text)
    }

    /// Build the model space, reporting the first invalid field.
    pub fn space(&self) -> Result<SpaceSpec, LabError> {
        let s = &self.space;
        let shape = match s.shape {
            ShapeKind::Interval => Shape::Interval { length: required("space.length", s.length)? },
            ShapeKind::Rectangle => Shape::Rectangle {
                width: required("space.width", s.width)?,
                height: required("space.height", s.height)?,
            },
            ShapeKind::Disk => Shape::Disk { radius: required("space.radius", s.radius)? },
            ShapeKind::Cone => {
                let angle = match (s.angle, s.angle_over_pi) {
                    (Some(a), None) => positive("space.angle", a)?,
                    (None, Some(q)) => PI * positive("space.angle_over_pi", q)?,
                    (Some(_), Some(_)) => return Err(invalid("space.angle", "give either angle or angle_over_pi")),
                    (None, None) => return Err(invalid("space.angle", "is required for a cone")),
                };
                if angle > 2.0 * PI * (1.0 + 1e-12) {
                    return Err(invalid("space.angle", format!("cone angles above 2π are not supported, got {angle}")));
                }
                Shape::Cone { radius: required("space.radius", s.radius)?, angle }
            }
        };
        let weight = match &s.weight {
            None | Some(WeightConfig::Unit) => WeightSpec::Unit,
            Some(WeightConfig::Constant { value }) => WeightSpec::constant(positive("space.weight.value", *value)?),
            Some(WeightConfig::Affine { constant, slope }) => WeightSpec::Affine { constant: *constant, slope: *slope },
            Some(WeightConfig::Sinusoidal { base, amplitude, frequency, phase }) => {
                WeightSpec::Sinusoidal { base: *base, amplitude: *amplitude, frequency: *frequency, phase: *phase }
            }
        };
        let mut space = SpaceSpec::flat(shape)
            .and_then(|sp| sp.with_weight(weight))
            .map_err(|e| invalid("space.weight", e.to_string()))?;
        if let Some(cd) = s.cd {
            space = space.with_cd(cd.k, cd.n).map_err(|e| invalid("space.cd", e.to_string()))?;
        }
        Ok(space)
    }

    pub fn domain(&self, space: &SpaceSpec) -> Result<Domain, LabError> {
        match self.domain {
            None => Ok(Domain::Whole),
            Some(b) => {
                let radius = positive("domain.radius", b.radius)?;
                let center = Point::new(b.center[0], b.center[1]);
                if !space.contains(center) {
                    return Err(invalid("domain.center", format!("{center} is outside the space")));
                }
                let limit = space.radius_limit(center);
                if radius > limit * (1.0 + 1e-12) {
                    return Err(invalid("domain.radius", format!("{radius} leaves the space (limit {limit})")));
                }
                Ok(Domain::Ball { center, radius })
            }
        }
    }

    pub fn mesh_width(&self) -> Result<f64, LabError> {
        let m = self.mesh.as_ref().ok_or_else(|| invalid("mesh", "section is required"))?;
        positive("mesh.h", m.h)
    }

    /// Check everything the given experiment kind will read.
    pub fn validate(&self, kind: ExperimentKind) -> Result<(), LabError> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(invalid("kind", format!("config is for `{}` but the command is `{}`", k.name(), kind.name())));
            }
        }
        let space = self.space()?;
        self.domain(&space)?;
        if self.solver.count == 0 {
            return Err(invalid("solver.count", "must be at least 1"));
        }
        positive("solver.tolerance", self.solver.tolerance)?;
        if let Some(t) = self.solver.oracle_tolerance {
            positive("solver.oracle_tolerance", t)?;
        }
        match kind {
            ExperimentKind::Solve | ExperimentKind::Count => {
                self.mesh_width()?;
                if kind == ExperimentKind::Count {
                    self.fit_config()?;
                }
            }
            ExperimentKind::Weyl => {
                let fit = self.fit_config()?;
                if fit.source != CountSource::Oracle {
                    self.mesh_width()?;
                }
            }
            ExperimentKind::Trace => {
                let tr = self.trace.as_ref().ok_or_else(|| invalid("trace", "section is required"))?;
                positive("trace.t0", tr.t0)?;
                positive("trace.tolerance", tr.tolerance)?;
                if tr.rungs < 3 {
                    return Err(invalid("trace.rungs", "a ladder needs at least 3 rungs"));
                }
                match tr.source {
                    CountSource::Oracle => {
                        required("trace.cutoff", tr.cutoff)?;
                    }
                    _ => {
                        self.mesh_width()?;
                    }
                }
            }
            ExperimentKind::Blowup => {
                let b = self.blowup.as_ref().ok_or_else(|| invalid("blowup", "section is required"))?;
                positive("blowup.radius", b.radius)?;
                positive("blowup.h_rel", b.h_rel)?;
                positive("blowup.tolerance", b.tolerance)?;
                if b.scales.is_empty() {
                    return Err(invalid("blowup.scales", "needs at least one scale"));
                }
                let p = Point::new(b.point[0], b.point[1]);
                if !space.contains(p) {
                    return Err(invalid("blowup.point", format!("{p} is outside the space")));
                }
                for (i, &r) in b.scales.iter().enumerate() {
                    positive(&format!("blowup.scales[{i}]"), r)?;
                }
                if let Some(t) = b.kernel_time {
                    positive("blowup.kernel_time", t)?;
                    if b.kernel_scales().len() < 3 {
                        return Err(invalid("blowup.kernel_scales", "the kernel ladder needs at least 3 scales"));
                    }
                    for (i, &r) in b.kernel_scales().iter().enumerate() {
                        positive(&format!("blowup.kernel_scales[{i}]"), r)?;
                    }
                }
            }
            ExperimentKind::Converge => {
                let c = self.converge.as_ref().ok_or_else(|| invalid("converge", "section is required"))?;
                if c.params.len() < 2 {
                    return Err(invalid("converge.params", "needs at least two family members"));
                }
                positive("converge.tolerance", c.tolerance)?;
                match c.family {
                    FamilyKind::ConeAngle => {
                        for (i, &a) in c.params.iter().enumerate() {
                            let a = positive(&format!("converge.params[{i}]"), a)?;
                            if a > 2.0 * PI {
                                return Err(invalid(&format!("converge.params[{i}]"), "cone angles must not exceed 2π"));
                            }
                        }
                    }
                    FamilyKind::WeightAmplitude | FamilyKind::ShrinkingInterval => {
                        for (i, &j) in c.params.iter().enumerate() {
                            if !(j >= 1.0 && j.fract() == 0.0) {
                                return Err(invalid(&format!("converge.params[{i}]"), "family indices are integers ≥ 1"));
                            }
                        }
                    }
                }
                self.mesh_width()?;
            }
            ExperimentKind::Geom => {
                let g = self.geom.as_ref().ok_or_else(|| invalid("geom", "section is required"))?;
                if g.radii.len() < 2 {
                    return Err(invalid("geom.radii", "needs at least two radii"));
                }
                for (i, &r) in g.radii.iter().enumerate() {
                    positive(&format!("geom.radii[{i}]"), r)?;
                }
                let p = Point::new(g.point[0], g.point[1]);
                if !space.contains(p) {
                    return Err(invalid("geom.point", format!("{p} is outside the space")));
                }
                let limit = space.radius_limit(p);
                if let Some(&r) = g.radii.iter().find(|&&r| r > limit * (1.0 + 1e-12)) {
                    return Err(invalid("geom.radii", format!("radius {r} leaves the space (limit {limit})")));
                }
            }
        }
        Ok(())
    }

    pub fn fit_config(&self) -> Result<&FitConfig, LabError> {
        let fit = self.fit.as_ref().ok_or_else(|| invalid("fit", "section is required"))?;
        positive("fit.window[0]", fit.window[0])?;
        if !(fit.window[1] > fit.window[0]) {
            return Err(invalid("fit.window", "upper end must exceed the lower"));
        }
        positive("fit.tolerance", fit.tolerance)?;
        if let Some(e) = fit.exponent {
            positive("fit.exponent", e)?;
        }
        if fit.grid_points < 2 {
            return Err(invalid("fit.grid_points", "needs at least 2 points"));
        }
        Ok(fit)
    }
}

impl BlowupConfig {
    pub fn kernel_scales(&self) -> &[f64] {
        self.kernel_scales.as_deref().unwrap_or(&self.scales)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"
kind = "weyl"
seed = 3

[space]
shape = "rectangle"
width = 1.0
height = 1.0

[mesh]
h = 0.05

[fit]
window = [400.0, 4000.0]
exponent = 1.0
source = "oracle"
"#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_toml(SQUARE).unwrap();
        assert_eq!(cfg.kind, Some(ExperimentKind::Weyl));
        cfg.validate(ExperimentKind::Weyl).unwrap();
        assert!(matches!(cfg.validate(ExperimentKind::Trace), Err(LabError::Config { .. })));
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = SQUARE.replace("height = 1.0", "height = 1.0\nheigth = 2.0");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("heigth"), "{err}");
        let text = SQUARE.replace("[mesh]", "[space.weight]\nkind = \"constant\"\nvalue = 2.0\nslope = 1.0\n[mesh]");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn negative_radius_names_the_field() {
        let text = "[space]\nshape = \"disk\"\nradius = -1.0\n[mesh]\nh = 0.1\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        match cfg.validate(ExperimentKind::Solve) {
            Err(LabError::Config { field, .. }) => assert_eq!(field, "space.radius"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cone_angle_forms() {
        let text = "[space]\nshape = \"cone\"\nradius = 1.0\nangle_over_pi = 1.0\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        match cfg.space().unwrap().shape {
            Shape::Cone { angle, .. } => assert!((angle - PI).abs() < 1e-15),
            s => panic!("{s:?}"),
        }
    }
}
