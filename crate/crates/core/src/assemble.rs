//! Weighted stiffness and mass matrices with Dirichlet elimination.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{SpaceSpec, WeightSpec};
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;

/// Discrete Dirichlet form on the free (non-boundary) nodes of a mesh.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Mesh node of each degree of freedom.
    pub free: Vec<usize>,
    pub mesh: Arc<Mesh>,
    pub weight: WeightSpec,
}

impl DiscreteOperator {
    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    /// Nodal values with zeros on constrained nodes.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh.node_count()];
        for (k, &node) in self.free.iter().enumerate() {
            out[node] = x[k];
        }
        out
    }

    /// Values on the free nodes.
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&node| nodal[node]).collect()
    }

    /// Layout positions of the free nodes, for orderings.
    pub fn coordinates(&self) -> Vec<[f64; 2]> {
        self.free.iter().map(|&node| self.mesh.layout[node]).collect()
    }

    /// The operator with additional nodes constrained to zero.
    pub fn constrain(&self, extra: &[usize]) -> DiscreteOperator {
        let mut drop = vec![false; self.mesh.node_count()];
        for &node in extra {
            drop[node] = true;
        }
        let keep: Vec<usize> = (0..self.free.len()).filter(|&k| !drop[self.free[k]]).collect();
        DiscreteOperator {
            stiffness: self.stiffness.submatrix(&keep),
            mass: self.mass.submatrix(&keep),
            free: keep.iter().map(|&k| self.free[k]).collect(),
            mesh: self.mesh.clone(),
            weight: self.weight.clone(),
        }
    }

    /// The same operator with `A' = a·A`, `M' = m·M`.
    pub fn rescaled(&self, a: f64, m: f64) -> DiscreteOperator {
        DiscreteOperator {
            stiffness: self.stiffness.scaled(a),
            mass: self.mass.scaled(m),
            free: self.free.clone(),
            mesh: self.mesh.clone(),
            weight: self.weight.scaled(m),
        }
    }
}

/// Assemble the weighted P1 forms; the weight enters through its value at
/// each element barycenter.
pub fn assemble(mesh: &Mesh, weight: &WeightSpec) -> Result<DiscreteOperator> {
    assemble_shared(Arc::new(mesh.clone()), weight)
}

pub fn assemble_shared(mesh: Arc<Mesh>, weight: &WeightSpec) -> Result<DiscreteOperator> {
    let mask = mesh.boundary_mask.clone();
    assemble_masked(mesh, weight, &mask)
}

/// Assembly with every node free: the form of a space whose ball has no
/// boundary, so constants are admissible.
pub fn assemble_unconstrained(mesh: &Mesh, weight: &WeightSpec) -> Result<DiscreteOperator> {
    let mask = vec![false; mesh.node_count()];
    assemble_masked(Arc::new(mesh.clone()), weight, &mask)
}

fn assemble_masked(mesh: Arc<Mesh>, weight: &WeightSpec, constrained: &[bool]) -> Result<DiscreteOperator> {
    let mut dof = vec![usize::MAX; mesh.node_count()];
    let mut free = Vec::new();
    for (node, &b) in constrained.iter().enumerate() {
        if !b {
            dof[node] = free.len();
            free.push(node);
        }
    }
    let mut ka = Vec::new();
    let mut km = Vec::new();
    for (idx, e) in mesh.elements.iter().enumerate() {
        if !(e.measure > 0.0) {
            return Err(Error::SingularElement { element: idx });
        }
        let f = weight.eval(mesh.barycenter(e));
        let (k, m) = mesh.element_matrices(e);
        let nodes = e.node_slice();
        for (i, &ni) in nodes.iter().enumerate() {
            if dof[ni] == usize::MAX {
                continue;
            }
            for (j, &nj) in nodes.iter().enumerate() {
                if dof[nj] == usize::MAX {
                    continue;
                }
                ka.push((dof[ni], dof[nj], f * k[i][j]));
                km.push((dof[ni], dof[nj], f * m[i][j]));
            }
        }
    }
    let n = free.len();
    Ok(DiscreteOperator {
        stiffness: CsrMatrix::from_triplets(n, &ka),
        mass: CsrMatrix::from_triplets(n, &km),
        free,
        mesh,
        weight: weight.clone(),
    })
}

/// Sum of all mass-matrix entries before constraint elimination.
pub fn total_mass(mesh: &Mesh, weight: &WeightSpec) -> f64 {
    mesh.elements
        .iter()
        .map(|e| {
            let f = weight.eval(mesh.barycenter(e));
            let (_, m) = mesh.element_matrices(e);
            f * m.iter().flatten().sum::<f64>()
        })
        .sum()
}

/// Build and assemble in one step, the space supplying the weight.
pub fn discretize(space: &SpaceSpec, domain: crate::geometry::Domain, h: f64) -> Result<DiscreteOperator> {
    let mesh = crate::mesh::build_mesh(space, domain, h)?;
    assemble_shared(Arc::new(mesh), &space.weight)
}
