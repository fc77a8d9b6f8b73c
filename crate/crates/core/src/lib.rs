//! Dirichlet spectra, heat traces and Weyl asymptotics on model metric
//! measure spaces: weighted intervals, rectangles, disks and flat cones.
//!
//! The crate is `no_std` with `alloc`. File formats, configuration and the
//! command-line runner live in the companion `weyl-lab` crate.
//!
//! Float math goes through `num_traits::Float` (backed by `libm`); when std
//! is linked elsewhere in the build its inherent methods take over, hence
//! the `allow(unused_imports)` on those imports.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assemble;
pub mod asymptotics;
pub mod blowup;
pub mod dense;
pub mod eigensolve;
pub mod error;
pub mod extrapolate;
pub mod geometry;
pub mod heat;
pub mod mesh;
pub mod quad;
pub mod sparse;
pub mod special;

pub use assemble::{assemble, discretize, DiscreteOperator};
pub use eigensolve::{
    analytic_spectrum, counting_function, inertia_count, lowest_eigs, lowest_eigs_with, CountingFunction, CountingSource,
    EigenOptions, Spectrum,
};
pub use error::{Error, Result};
pub use geometry::{CurvatureDimension, Domain, Point, Shape, SpaceSpec, WeightSpec};
pub use heat::{heat_trace, HeatTrace, KernelDiagonal, TailModel};
pub use mesh::{build_mesh, Mesh};
