//! Cross-module invariances: scaling, measure normalization, trace/diagonal
//! consistency and exponent recovery.

use std::f64::consts::PI;

use weyl_core::asymptotics::{weyl_fit, weyl_predict};
use weyl_core::eigensolve::{all_eigenvalues, EigenOptions};
use weyl_core::heat::{heat_trace, kernel_diagonal, lumped_diagonal_integral, sector_center_kernel};
use weyl_core::{
    analytic_spectrum, discretize, inertia_count, lowest_eigs, lowest_eigs_with, Domain, Point, SpaceSpec, WeightSpec,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn doubling_lengths_quarters_eigenvalues() {
    // P1 on a mesh scaled by 2 is the same algebraic problem up to
    // A → 2^{k−2}A, M → 2^k M.
    for (small, big, h) in [
        (SpaceSpec::interval(1.0).unwrap(), SpaceSpec::interval(2.0).unwrap(), 1.0 / 64.0),
        (SpaceSpec::rectangle(1.0, 0.5).unwrap(), SpaceSpec::rectangle(2.0, 1.0).unwrap(), 1.0 / 16.0),
        (SpaceSpec::cone(1.0, 0.7 * PI).unwrap(), SpaceSpec::cone(2.0, 0.7 * PI).unwrap(), 0.1),
    ] {
        let a = lowest_eigs(&discretize(&small, Domain::Whole, h).unwrap(), 8, 1e-12).unwrap().eigenvalues;
        let b = lowest_eigs(&discretize(&big, Domain::Whole, 2.0 * h).unwrap(), 8, 1e-12).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            assert!(rel(4.0 * y, *x) < 1e-9, "{x} vs 4·{y}");
        }
    }
}

#[test]
fn weyl_constant_scales_by_two_to_the_k() {
    for (small, big) in [
        (SpaceSpec::interval(1.0).unwrap(), SpaceSpec::interval(2.0).unwrap()),
        (SpaceSpec::disk(1.0).unwrap(), SpaceSpec::disk(2.0).unwrap()),
        (SpaceSpec::cone(1.0, PI).unwrap(), SpaceSpec::cone(2.0, PI).unwrap()),
    ] {
        let k = small.dimension();
        let a = weyl_predict(&small, Domain::Whole, k).unwrap();
        let b = weyl_predict(&big, Domain::Whole, k).unwrap();
        assert!(rel(b, a * 2f64.powi(k as i32)) < 1e-12);
        // The oracle counting functions agree: N_{2Ω}(λ) = N_Ω(4λ).
        let ca = analytic_spectrum(&small, 4000.0).unwrap();
        let cb = analytic_spectrum(&big, 1000.0).unwrap();
        for lam in [37.0, 211.0, 640.5, 999.0] {
            assert_eq!(cb.eval(lam), ca.eval(4.0 * lam), "λ={lam}");
        }
    }
}

#[test]
fn free_fit_recovers_the_exponent() {
    for (space, window) in [
        (SpaceSpec::interval(PI).unwrap(), (1e3, 1e6)),
        (SpaceSpec::disk(1.0).unwrap(), (2e3, 4e4)),
        (SpaceSpec::cone(1.0, 0.5 * PI).unwrap(), (4e3, 8e4)),
    ] {
        let count = analytic_spectrum(&space, window.1).unwrap();
        let fit = weyl_fit(&count, window, None).unwrap();
        let k = space.dimension() as f64;
        assert!((fit.exponent - 0.5 * k).abs() < 0.03, "{fit:?}");
    }
}

#[test]
fn constant_weight_leaves_eigenvalues_and_scales_the_kernel() {
    let disk = SpaceSpec::disk(1.0).unwrap();
    let c = 3.5;
    let heavy = disk.with_weight(WeightSpec::constant(c)).unwrap();
    let a = discretize(&disk, Domain::Whole, 0.15).unwrap();
    let b = discretize(&heavy, Domain::Whole, 0.15).unwrap();
    let sa = lowest_eigs(&a, a.free_count(), 1e-12).unwrap();
    let sb = lowest_eigs(&b, b.free_count(), 1e-12).unwrap();
    for (x, y) in sa.eigenvalues.iter().zip(&sb.eigenvalues) {
        assert!(rel(*y, *x) < 1e-10);
    }
    let node = a.mesh.node_at(Point::new(0.0, 0.0), 1e-12).unwrap();
    let times = [0.02, 0.05, 0.1];
    let ka = kernel_diagonal(&a, &sa, node, &times).unwrap();
    let kb = kernel_diagonal(&b, &sb, node, &times).unwrap();
    for (x, y) in ka.values.iter().zip(&kb.values) {
        assert!(rel(c * y, *x) < 1e-9, "{x} vs {c}·{y}");
    }
}

#[test]
fn diagonal_integrates_to_the_trace() {
    let disk = SpaceSpec::disk(1.0).unwrap();
    let op = discretize(&disk, Domain::Whole, 0.1).unwrap();
    let spec = lowest_eigs(&op, op.free_count(), 1e-12).unwrap();
    for t in [0.02, 0.1] {
        let z = heat_trace(&spec.eigenvalues, &[t], None).unwrap().partial[0];
        let integral = lumped_diagonal_integral(&op, &spec, t).unwrap();
        // Lumping is an O(h²) quadrature of ∫H(x,x,t)dx.
        assert!(rel(integral, z) < 0.05, "t={t}: {integral} vs {z}");
    }
    // Pointwise, the FEM diagonal matches the Bessel series once √t spans a few cells.
    let node = op.mesh.node_at(Point::new(0.0, 0.0), 1e-12).unwrap();
    let fem = kernel_diagonal(&op, &spec, node, &[0.1, 0.2]).unwrap();
    let exact = sector_center_kernel(2.0 * PI, 1.0, &[0.1, 0.2]).unwrap();
    for (x, y) in fem.values.iter().zip(&exact.values) {
        assert!(rel(*x, *y) < 0.03, "{x} vs {y}");
    }
}

#[test]
fn inertia_matches_both_solver_paths() {
    let cone = SpaceSpec::cone(1.0, 1.3 * PI).unwrap();
    let op = discretize(&cone, Domain::Whole, 0.07).unwrap();
    let dense = all_eigenvalues(&op).unwrap();
    let sparse = lowest_eigs_with(&op, 60, 1e-10, &EigenOptions { dense_limit: 0, want_vectors: false, ..EigenOptions::default() })
        .unwrap()
        .eigenvalues;
    for (j, (d, s)) in dense.iter().zip(&sparse).enumerate() {
        assert!(rel(*s, *d) < 1e-8, "λ_{j}: {s} vs {d}");
    }
    for w in sparse.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-6)) {
        let mid = 0.5 * (w[0] + w[1]);
        assert_eq!(inertia_count(&op, mid).unwrap(), dense.iter().filter(|&&l| l <= mid).count());
    }
}
