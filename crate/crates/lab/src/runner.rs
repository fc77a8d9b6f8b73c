//! Executes one experiment and records a manifest.
//!
//! Each run lands in `out/<kind>-<digest>` where the digest is the SHA-256
//! of the effective configuration as canonical JSON. Result tables hold no
//! timings, so rerunning a config reproduces them byte for byte; timings go
//! in `manifest.json` only.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use weyl_core::asymptotics::{
    b_limit, karamata_check, time_ladder, trace_limit, trace_target, weyl_fit, weyl_predict, LimitEstimate,
};
use weyl_core::blowup::{
    ball_spectrum, blowup_kernel_limit, blowup_ladder, local_spectral_convergence, shrinking_interval_family,
};
use weyl_core::eigensolve::{bessel_spectrum, reliable_band, EigenOptions};
use weyl_core::geometry::{check_bishop_gromov, density_estimate, domain_measure, volume_profile};
use weyl_core::heat::{check_trace_shape, heat_trace, TailModel};
use weyl_core::{
    analytic_spectrum, build_mesh, counting_function, inertia_count, lowest_eigs_with, CountingFunction, Domain, Point,
    Shape, SpaceSpec, WeightSpec,
};

use crate::config::{CountSource, ExperimentConfig, ExperimentKind, FamilyKind};
use crate::error::LabError;
use crate::output::{svg_plot, OutputDir, Series};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Overrides the config's seed.
    pub seed: Option<u64>,
    pub plots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: ExperimentKind,
    pub tool_version: String,
    pub config_digest: String,
    pub seed: u64,
    pub status: RunStatus,
    pub directory: String,
    pub files: Vec<String>,
    pub stages: Vec<StageTiming>,
    pub assertions: Vec<Assertion>,
    /// Headline numbers of the run.
    pub summary: BTreeMap<String, f64>,
    pub error: Option<StageError>,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Pass => 0,
            RunStatus::Fail => 1,
            RunStatus::Error => 3,
        }
    }
}

pub const DEFAULT_SEED: u64 = 0x5eed;

/// SHA-256 of the canonical JSON form (struct field order is fixed).
pub fn config_digest(config: &ExperimentConfig) -> String {
    let json = serde_json::to_string(config).expect("configs serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// Effective config: command kind and seed filled in.
pub fn effective_config(config: &ExperimentConfig, kind: ExperimentKind, seed: Option<u64>) -> ExperimentConfig {
    let mut c = config.clone();
    c.kind = Some(kind);
    c.seed = Some(seed.or(config.seed).unwrap_or(DEFAULT_SEED));
    c
}

pub fn run_directory(out: &Path, kind: ExperimentKind, digest: &str) -> PathBuf {
    out.join(format!("{}-{}", kind.name(), &digest[..12]))
}

struct Context {
    dir: OutputDir,
    stages: Vec<StageTiming>,
    assertions: Vec<Assertion>,
    summary: BTreeMap<String, f64>,
    current: String,
    plots: bool,
    seed: u64,
}

impl Context {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T, LabError>) -> Result<T, LabError> {
        self.current = name.to_string();
        let start = Instant::now();
        let out = f(self);
        self.stages.push(StageTiming { stage: name.to_string(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    fn numeric<T>(&self, r: weyl_core::Result<T>) -> Result<T, LabError> {
        r.map_err(|source| LabError::Numeric { stage: self.current.clone(), source })
    }

    fn assert_within(&mut self, name: &str, measured: f64, expected: f64, tolerance: f64) {
        let passed = (measured - expected).abs() <= tolerance * expected.abs();
        self.assertions.push(Assertion { name: name.into(), measured, expected, tolerance, passed });
    }

    fn assert_at_most(&mut self, name: &str, measured: f64, bound: f64) {
        self.assertions.push(Assertion {
            name: name.into(),
            measured,
            expected: bound,
            tolerance: 0.0,
            passed: measured <= bound,
        });
    }

    fn assert_flag(&mut self, name: &str, value: bool, expected: bool) {
        self.assertions.push(Assertion {
            name: name.into(),
            measured: f64::from(u8::from(value)),
            expected: f64::from(u8::from(expected)),
            tolerance: 0.0,
            passed: value == expected,
        });
    }

    fn eigen_options(&self, config: &ExperimentConfig, vectors: bool) -> EigenOptions {
        EigenOptions {
            dense_limit: config.solver.dense_limit,
            want_vectors: vectors,
            seed: self.seed,
            ..EigenOptions::default()
        }
    }

    fn plot(&mut self, name: &str, title: &str, axes: (&str, &str), series: &[Series], log_log: bool) -> Result<(), LabError> {
        if self.plots {
            self.dir.text(name, &svg_plot(title, axes.0, axes.1, series, log_log))?;
        }
        Ok(())
    }
}

/// Validate, run and write the manifest. Config errors return `Err` before
/// anything touches the disk; runtime failures still produce a manifest.
pub fn run(config: &ExperimentConfig, kind: ExperimentKind, opts: &RunOptions) -> Result<RunManifest, LabError> {
    config.validate(kind)?;
    let config = effective_config(config, kind, opts.seed);
    let digest = config_digest(&config);
    let root = run_directory(&opts.out, kind, &digest);
    let mut dir = OutputDir::create(&root)?;
    dir.json("config.json", &config)?;
    let mut ctx = Context {
        dir,
        stages: Vec::new(),
        assertions: Vec::new(),
        summary: BTreeMap::new(),
        current: "setup".into(),
        plots: opts.plots,
        seed: config.seed.unwrap_or(DEFAULT_SEED),
    };
    let outcome = match kind {
        ExperimentKind::Solve => run_solve(&config, &mut ctx),
        ExperimentKind::Count | ExperimentKind::Weyl => run_weyl(&config, kind, &mut ctx),
        ExperimentKind::Trace => run_trace(&config, &mut ctx),
        ExperimentKind::Blowup => run_blowup(&config, &mut ctx),
        ExperimentKind::Converge => run_converge(&config, &mut ctx),
        ExperimentKind::Geom => run_geom(&config, &mut ctx),
    };
    let error = outcome.err().map(|e| StageError { stage: ctx.current.clone(), message: e.to_string() });
    let status = if error.is_some() {
        RunStatus::Error
    } else if ctx.assertions.iter().all(|a| a.passed) {
        RunStatus::Pass
    } else {
        RunStatus::Fail
    };
    let mut files = ctx.dir.files().to_vec();
    files.push("manifest.json".into());
    let manifest = RunManifest {
        kind,
        tool_version: TOOL_VERSION.into(),
        config_digest: digest,
        seed: ctx.seed,
        status,
        directory: root.display().to_string(),
        files,
        stages: ctx.stages,
        assertions: ctx.assertions,
        summary: ctx.summary,
        error,
    };
    ctx.dir.json("manifest.json", &manifest)?;
    Ok(manifest)
}

fn space_and_domain(config: &ExperimentConfig) -> Result<(SpaceSpec, Domain), LabError> {
    let space = config.space()?;
    let domain = config.domain(&space)?;
    Ok((space, domain))
}

fn mesh_width(config: &ExperimentConfig) -> Result<f64, LabError> {
    let h = config.mesh_width()?;
    let r = config.mesh.as_ref().map_or(0, |m| m.refinements);
    Ok(h * 0.5f64.powi(r as i32))
}

/// Oracle eigenvalues of a unit-weight whole space, at least `m` of them.
fn oracle_eigenvalues(space: &SpaceSpec, m: usize, hint: f64) -> weyl_core::Result<Vec<f64>> {
    let mut cutoff = hint.max(1.0);
    loop {
        let c = analytic_spectrum(space, cutoff)?;
        let ev = c.eigenvalues.unwrap_or_default();
        if ev.len() >= m {
            return Ok(ev[..m].to_vec());
        }
        cutoff *= 2.0;
    }
}

fn run_solve(config: &ExperimentConfig, ctx: &mut Context) -> Result<(), LabError> {
    let (space, domain) = space_and_domain(config)?;
    let h = mesh_width(config)?;
    let mesh = ctx.stage("mesh", |c| c.numeric(build_mesh(&space, domain, h)))?;
    if config.output.mesh {
        ctx.dir.mesh("mesh.txt", &mesh)?;
    }
    let op = ctx.stage("assemble", |c| c.numeric(weyl_core::assemble(&mesh, &space.weight)))?;
    let opts = ctx.eigen_options(config, false);
    let spec = ctx.stage("eigensolve", |c| c.numeric(lowest_eigs_with(&op, config.solver.count, config.solver.tolerance, &opts)))?;
    ctx.summary.insert("unknowns".into(), op.free_count() as f64);
    ctx.summary.insert("lambda_1".into(), spec.eigenvalues[0]);
    let rows: Vec<Vec<f64>> = spec
        .eigenvalues
        .iter()
        .zip(&spec.residuals)
        .enumerate()
        .map(|(i, (&l, &r))| vec![(i + 1) as f64, l, r])
        .collect();
    ctx.dir.csv("eigenvalues.csv", &["index", "eigenvalue", "residual"], &rows)?;
    let max_res = spec.residuals.iter().copied().fold(0.0, f64::max);
    ctx.assert_at_most("max_residual", max_res, config.solver.tolerance);
    if let Some(tol) = config.solver.oracle_tolerance {
        if domain != Domain::Whole {
            return Err(LabError::Config { field: "solver.oracle_tolerance".into(), message: "oracles exist only for the whole space".into() });
        }
        let exact = ctx.stage("oracle", |c| {
            c.numeric(oracle_eigenvalues(&space, spec.len(), *spec.eigenvalues.last().unwrap()))
        })?;
        let worst = spec
            .eigenvalues
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs() / b)
            .fold(0.0, f64::max);
        let rows: Vec<Vec<f64>> = exact
            .iter()
            .zip(&spec.eigenvalues)
            .enumerate()
            .map(|(i, (&e, &a))| vec![(i + 1) as f64, e, a, (a - e) / e])
            .collect();
        ctx.dir.csv("oracle.csv", &["index", "exact", "discrete", "relative_error"], &rows)?;
        ctx.summary.insert("max_relative_error".into(), worst);
        ctx.assert_at_most("oracle_relative_error", worst, tol);
    }
    Ok(())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn run_weyl(config: &ExperimentConfig, kind: ExperimentKind, ctx: &mut Context) -> Result<(), LabError> {
    let (space, domain) = space_and_domain(config)?;
    let fit = config.fit_config()?.clone();
    let k = space.dimension();
    let (mut lo, mut hi) = (fit.window[0], fit.window[1]);
    let count: CountingFunction = match fit.source {
        CountSource::Oracle => {
            if domain != Domain::Whole {
                return Err(LabError::Config { field: "fit.source".into(), message: "oracles exist only for the whole space".into() });
            }
            ctx.stage("oracle", |c| c.numeric(analytic_spectrum(&space, hi)))?
        }
        source => {
            let h = mesh_width(config)?;
            let op = ctx.stage("discretize", |c| c.numeric(weyl_core::discretize(&space, domain, h)))?;
            ctx.summary.insert("unknowns".into(), op.free_count() as f64);
            if fit.reliable_band {
                let band = ctx.stage("band", |c| c.numeric(reliable_band(&op)))?;
                hi = hi.min(band.lambda_limit);
                ctx.summary.insert("band_lambda_limit".into(), band.lambda_limit);
                ctx.summary.insert("band_index_limit".into(), band.index_limit as f64);
                if source == CountSource::Spectrum {
                    let top = ctx.stage("inertia", |c| c.numeric(inertia_count(&op, hi)))?;
                    if top > band.index_limit {
                        let opts = ctx.eigen_options(config, false);
                        let s = ctx.stage("eigensolve", |c| c.numeric(lowest_eigs_with(&op, band.index_limit, 1e-10, &opts)))?;
                        hi = hi.min(*s.eigenvalues.last().unwrap());
                    }
                }
                if !(hi > lo) {
                    return Err(LabError::Numeric {
                        stage: "band".into(),
                        source: weyl_core::Error::InvalidArgument(format!(
                            "fit window [{lo}, {}] lies above the reliable band ({hi})",
                            fit.window[1]
                        )),
                    });
                }
            }
            match source {
                CountSource::Inertia => {
                    let grid = log_grid(lo, hi, fit.grid_points);
                    ctx.stage("count", |c| c.numeric(counting_function(&op, &grid)))?
                }
                _ => {
                    let m = ctx.stage("inertia", |c| c.numeric(inertia_count(&op, hi * (1.0 + 1e-9))))?;
                    let opts = ctx.eigen_options(config, false);
                    let spec = ctx.stage("eigensolve", |c| c.numeric(lowest_eigs_with(&op, m, 1e-10, &opts)))?;
                    let mut cf = spec.counting();
                    cf.complete_to = Some(hi);
                    cf
                }
            }
        }
    };
    let predicted = ctx.stage("predict", |c| c.numeric(weyl_predict(&space, domain, k)))?;
    let table: Vec<Vec<f64>> = match &count.eigenvalues {
        Some(ev) => ev.iter().enumerate().map(|(j, &l)| vec![l, (j + 1) as f64, predicted * l.powf(0.5 * k as f64)]).collect(),
        None => count.table.iter().map(|&(l, n)| vec![l, n as f64, predicted * l.powf(0.5 * k as f64)]).collect(),
    };
    ctx.dir.csv("counting.csv", &["lambda", "count", "weyl"], &table)?;
    ctx.plot(
        "counting.svg",
        "Counting function",
        ("lambda", "N(lambda)"),
        &[
            Series { label: "N", points: table.iter().map(|r| (r[0], r[1])).collect() },
            Series { label: "Weyl", points: table.iter().map(|r| (r[0], r[2])).collect() },
        ],
        true,
    )?;
    if kind == ExperimentKind::Count {
        ctx.summary.insert("count_at_window_end".into(), count.eval(hi) as f64);
        return Ok(());
    }
    lo = lo.min(hi);
    let fitted = ctx.stage("fit", |c| c.numeric(weyl_fit(&count, (lo, hi), fit.exponent)))?;
    #[derive(Serialize)]
    struct FitOut {
        exponent: f64,
        constant: f64,
        predicted: f64,
        relative_error: f64,
        window: (f64, f64),
        residual: f64,
        points: usize,
        method: String,
    }
    let rel = fitted.relative_error(predicted);
    ctx.dir.json(
        "fit.json",
        &FitOut {
            exponent: fitted.exponent,
            constant: fitted.constant,
            predicted,
            relative_error: rel,
            window: fitted.window,
            residual: fitted.residual,
            points: fitted.points,
            method: format!("{:?}", fitted.method),
        },
    )?;
    ctx.summary.insert("weyl_constant".into(), fitted.constant);
    ctx.summary.insert("weyl_predicted".into(), predicted);
    ctx.summary.insert("exponent".into(), fitted.exponent);
    ctx.assert_within("weyl_constant", fitted.constant, predicted, fit.tolerance);
    if fit.exponent.is_none() {
        ctx.assert_within("weyl_exponent", fitted.exponent, 0.5 * k as f64, fit.tolerance);
    }
    Ok(())
}

fn limit_rows(est: &LimitEstimate) -> Vec<Vec<f64>> {
    est.ladder.iter().map(|&(p, v)| vec![p, v]).collect()
}

fn run_trace(config: &ExperimentConfig, ctx: &mut Context) -> Result<(), LabError> {
    let (space, domain) = space_and_domain(config)?;
    let tr = config.trace.clone().expect("validated");
    let k = space.dimension();
    let constant = ctx.stage("predict", |c| c.numeric(weyl_predict(&space, domain, k)))?;
    let tail = TailModel { constant, exponent: 0.5 * k as f64 };
    let eigenvalues = match tr.source {
        CountSource::Oracle => {
            if domain != Domain::Whole {
                return Err(LabError::Config { field: "trace.source".into(), message: "oracles exist only for the whole space".into() });
            }
            let cutoff = tr.cutoff.expect("validated");
            ctx.stage("oracle", |c| c.numeric(analytic_spectrum(&space, cutoff)))?.eigenvalues.unwrap_or_default()
        }
        _ => {
            let h = mesh_width(config)?;
            let op = ctx.stage("discretize", |c| c.numeric(weyl_core::discretize(&space, domain, h)))?;
            let band = ctx.stage("band", |c| c.numeric(reliable_band(&op)))?;
            let m = ctx.stage("inertia", |c| c.numeric(inertia_count(&op, band.lambda_limit)))?.min(band.index_limit).max(1);
            let opts = ctx.eigen_options(config, false);
            ctx.stage("eigensolve", |c| c.numeric(lowest_eigs_with(&op, m, 1e-10, &opts)))?.eigenvalues
        }
    };
    ctx.summary.insert("eigenvalues".into(), eigenvalues.len() as f64);
    let times = time_ladder(tr.t0, tr.rungs);
    let trace = ctx.stage("trace", |c| c.numeric(heat_trace(&eigenvalues, &times, Some(tail))))?;
    let e = 0.5 * k as f64;
    let rows: Vec<Vec<f64>> = (0..times.len())
        .map(|i| {
            let t = times[i];
            vec![t, trace.partial[i], trace.upper[i], t.powf(e) * trace.upper[i], trace.relative_width(i)]
        })
        .collect();
    ctx.dir.csv("trace.csv", &["t", "partial", "upper", "scaled", "relative_width"], &rows)?;
    ctx.plot(
        "trace.svg",
        "Scaled heat trace",
        ("t", "t^{k/2} Z(t)"),
        &[Series { label: "t^{k/2} Z", points: rows.iter().map(|r| (r[0], r[3])).collect() }],
        true,
    )?;
    let shape = check_trace_shape(&trace);
    ctx.assert_flag("trace_shape", shape.holds(), true);
    let measure = ctx.stage("measure", |c| c.numeric(domain_measure(&space, domain)))?;
    let est = ctx.stage("extrapolate", |c| c.numeric(trace_limit(&trace, k, trace_target(measure, k))))?;
    ctx.dir.csv("ladder.csv", &["t", "scaled_trace"], &limit_rows(&est))?;
    ctx.summary.insert("trace_limit".into(), est.limit);
    ctx.summary.insert("trace_target".into(), est.target);
    ctx.summary.insert("extrapolation_residual".into(), est.relative_residual());
    ctx.assert_within("trace_limit", est.limit, est.target, tr.tolerance);
    let karamata = karamata_check(est.limit, constant, k, tr.tolerance);
    ctx.summary.insert("karamata_predicted".into(), karamata.predicted);
    ctx.assert_within("karamata", karamata.predicted, karamata.fitted, tr.tolerance);
    Ok(())
}

/// Spectrum of the tangent cone's ball `B_R(o)`, when it has a closed form.
fn tangent_spectrum(space: &SpaceSpec, p: Point, radius: f64, m: usize) -> Option<Vec<f64>> {
    if space.radius_limit(p) <= 0.0 {
        return None;
    }
    let grow = |f: &dyn Fn(f64) -> Vec<f64>| {
        let mut cutoff = (10.0 / radius).powi(2);
        loop {
            let v = f(cutoff);
            if v.len() >= m {
                return v[..m].to_vec();
            }
            cutoff *= 2.0;
        }
    };
    match space.shape {
        Shape::Interval { .. } => Some((1..=m).map(|j| (j as f64 * PI / (2.0 * radius)).powi(2)).collect()),
        Shape::Cone { angle, .. } if p.x == 0.0 => Some(grow(&|c| bessel_spectrum(angle, radius, c))),
        _ => Some(grow(&|c| bessel_spectrum(2.0 * PI, radius, c))),
    }
}

fn run_blowup(config: &ExperimentConfig, ctx: &mut Context) -> Result<(), LabError> {
    let space = config.space()?;
    let b = config.blowup.clone().expect("validated");
    let p = Point::new(b.point[0], b.point[1]);
    let ladder = ctx.stage("ladder", |c| c.numeric(blowup_ladder(&space, p, b.radius, &b.scales, b.count, b.h_rel)))?;
    let mut rows = Vec::new();
    for rung in &ladder.rungs {
        for (i, &l) in rung.eigenvalues.iter().enumerate() {
            rows.push(vec![rung.scale, (i + 1) as f64, l, rung.b]);
        }
    }
    ctx.dir.csv("blowup.csv", &["scale", "index", "eigenvalue", "b"], &rows)?;
    ctx.summary.insert("exact_rescaling".into(), f64::from(u8::from(ladder.method == weyl_core::blowup::BlowupMethod::ExactRescaling)));
    if let Some(tangent) = tangent_spectrum(&space, p, b.radius, b.count) {
        let finest = ladder
            .rungs
            .iter()
            .min_by(|x, y| x.scale.partial_cmp(&y.scale).unwrap())
            .expect("at least one scale");
        let worst = finest
            .eigenvalues
            .iter()
            .zip(&tangent)
            .map(|(a, t)| (a - t).abs() / t)
            .fold(0.0, f64::max);
        let rows: Vec<Vec<f64>> = tangent.iter().enumerate().map(|(i, &t)| vec![(i + 1) as f64, t]).collect();
        ctx.dir.csv("tangent.csv", &["index", "eigenvalue"], &rows)?;
        ctx.summary.insert("tangent_relative_error".into(), worst);
        ctx.assert_at_most("tangent_spectrum", worst, b.tolerance);
    }
    if let Some(t) = b.kernel_time {
        let radius = b.kernel_radius.unwrap_or(b.radius);
        let est = ctx.stage("kernel", |c| c.numeric(blowup_kernel_limit(&space, p, radius, b.kernel_scales(), t)))?;
        ctx.dir.csv("kernel_ladder.csv", &["scale", "value"], &limit_rows(&est))?;
        ctx.summary.insert("kernel_limit".into(), est.limit);
        ctx.summary.insert("kernel_target".into(), est.target);
        ctx.assert_within("kernel_limit", est.limit, est.target, b.tolerance);
    }
    Ok(())
}

fn run_converge(config: &ExperimentConfig, ctx: &mut Context) -> Result<(), LabError> {
    let space = config.space()?;
    let c = config.converge.clone().expect("validated");
    let h = mesh_width(config)?;
    let (family, limit, boundary_condition) = ctx.stage("family", |cx| {
        let wrong = |what: &str| LabError::Config { field: "converge.family".into(), message: format!("needs {what}") };
        match c.family {
            FamilyKind::ConeAngle => {
                let Shape::Cone { radius, angle } = space.shape else { return Err(wrong("a cone space")) };
                let mut fam = Vec::new();
                for &a in &c.params {
                    let member = cx.numeric(SpaceSpec::cone(radius, a).and_then(|s| s.with_weight(space.weight.clone())))?;
                    let j = 1.0 / (a - angle).abs().max(1e-300);
                    fam.push((j, cx.numeric(ball_spectrum(&member, Domain::Whole, c.count, h))?));
                }
                let limit = tangent_spectrum(&SpaceSpec::cone(radius, angle).map_err(|e| wrong(&e.to_string()))?, Point::new(0.0, 0.0), radius, c.count)
                    .expect("vertex has a closed form");
                Ok((fam, limit, true))
            }
            FamilyKind::WeightAmplitude => {
                let Shape::Interval { .. } = space.shape else { return Err(wrong("an interval space")) };
                let mut fam = Vec::new();
                for &j in &c.params {
                    let w = WeightSpec::Sinusoidal { base: 1.0, amplitude: c.amplitude / j, frequency: 1.0, phase: 0.0 };
                    let member = cx.numeric(space.with_weight(w))?;
                    fam.push((j, cx.numeric(ball_spectrum(&member, Domain::Whole, c.count, h))?));
                }
                let unit = cx.numeric(space.with_weight(WeightSpec::Unit))?;
                let limit = cx.numeric(oracle_eigenvalues(&unit, c.count, 1.0))?;
                Ok((fam, limit, true))
            }
            FamilyKind::ShrinkingInterval => {
                let js: Vec<usize> = c.params.iter().map(|&j| j as usize).collect();
                let fam = cx.numeric(shrinking_interval_family(&js, h))?;
                Ok((fam, vec![PI * PI / 4.0], false))
            }
        }
    })?;
    let rep = ctx.stage("compare", |cx| cx.numeric(local_spectral_convergence(&family, &limit, boundary_condition, c.tolerance)))?;
    let rows: Vec<Vec<f64>> = rep.params.iter().zip(&rep.errors).map(|(&j, &e)| vec![j, e]).collect();
    ctx.dir.csv("convergence.csv", &["param", "max_relative_error"], &rows)?;
    ctx.summary.insert("rate".into(), rep.rate);
    ctx.summary.insert("final_error".into(), *rep.errors.last().unwrap());
    ctx.assert_flag("converged", rep.converged, c.expect_convergence);
    if !c.expect_convergence {
        ctx.assert_flag("boundary_violation_flagged", rep.boundary_violation_flagged, true);
    }
    Ok(())
}

fn run_geom(config: &ExperimentConfig, ctx: &mut Context) -> Result<(), LabError> {
    let space = config.space()?;
    let g = config.geom.clone().expect("validated");
    let p = Point::new(g.point[0], g.point[1]);
    let k = g.k.unwrap_or(space.dimension());
    let mut radii = g.radii.clone();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let profile = ctx.stage("profile", |c| c.numeric(volume_profile(&space, p, &radii)))?;
    let rows: Vec<Vec<f64>> = (0..radii.len())
        .map(|i| vec![radii[i], profile.ball_volumes[i], profile.b_values[i], profile.b_values[i] / radii[i].powi(k as i32)])
        .collect();
    ctx.dir.csv("profile.csv", &["r", "volume", "b", "b_over_rk"], &rows)?;
    for w in radii.windows(2) {
        let rep = ctx.stage("bishop-gromov", |c| c.numeric(check_bishop_gromov(&space, p, w[0], w[1])))?;
        ctx.assert_at_most(&format!("bishop_gromov[{}]", w[1]), rep.lhs, rep.rhs * (1.0 + rep.tolerance));
    }
    let theta = match g.theta {
        Some(t) => t,
        None => ctx.stage("density", |c| c.numeric(density_estimate(&space, p, k)))?.theta,
    };
    ctx.summary.insert("theta".into(), theta);
    if radii.len() >= 3 {
        let est = ctx.stage("b-limit", |c| c.numeric(b_limit(&profile, k, theta)))?;
        ctx.summary.insert("b_limit".into(), est.limit);
        ctx.summary.insert("b_target".into(), est.target);
        ctx.assert_within("b_limit", est.limit, est.target, g.tolerance);
    }
    Ok(())
}
