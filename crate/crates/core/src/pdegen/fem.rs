//! Linear (P1) finite elements for -K lap(u) = f on the triangle mesh
//! with Dirichlet boundary data, solved by conjugate gradients after
//! eliminating the boundary rows.

use crate::error::{Error, Result};
use crate::pdegen::linalg::{conjugate_gradient, SparseRows};
use crate::pdegen::mesh::TriangleMesh;

/// Stiffness over interior unknowns plus the load vector with the
/// Dirichlet contribution moved to the right-hand side. `full_bc`
/// holds boundary values at their node ids (ignored for interior).
pub(crate) fn assemble(
    mesh: &TriangleMesh,
    full_bc: &[f64],
    k_coef: f64,
    f: f64,
) -> (SparseRows, Vec<f64>, Vec<isize>) {
    let n = mesh.node_count();
    // Interior dof numbering.
    let mut dof = vec![-1isize; n];
    let mut n_int = 0usize;
    for node in 0..n {
        if !mesh.is_boundary(node) {
            dof[node] = n_int as isize;
            n_int += 1;
        }
    }
    let mut a = SparseRows::new(n_int);
    let mut rhs = vec![0.0; n_int];

    for t in 0..mesh.triangles.len() {
        let tri = mesh.triangles[t];
        let p: Vec<[f64; 2]> = tri.iter().map(|&v| mesh.vertices[v]).collect();
        let area = mesh.triangle_area(t);
        // Gradient of the linear basis at local node i is
        // (b_i, c_i) / (2 area), with b, c from the opposite edge.
        let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
        let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
        for li in 0..3 {
            let gi = tri[li];
            if dof[gi] < 0 {
                continue;
            }
            let row = dof[gi] as usize;
            rhs[row] += f * area / 3.0;
            for lj in 0..3 {
                let gj = tri[lj];
                let k_entry = k_coef * (b[li] * b[lj] + c[li] * c[lj]) / (4.0 * area);
                if dof[gj] >= 0 {
                    a.add(row, dof[gj] as usize, k_entry);
                } else {
                    rhs[row] -= k_entry * full_bc[gj];
                }
            }
        }
    }
    (a, rhs, dof)
}

/// Nodal solution at every mesh node; `bc` is aligned with
/// `mesh.boundary` order.
pub fn solve_poisson_fem(mesh: &TriangleMesh, bc: &[f64], k_coef: f64, f: f64) -> Result<Vec<f64>> {
    if bc.len() != mesh.boundary.len() {
        return Err(Error::shape(
            "solve_poisson_fem",
            format!("{} boundary values for {} boundary nodes", bc.len(), mesh.boundary.len()),
        ));
    }
    if !(k_coef > 0.0) {
        return Err(Error::InvalidArg("diffusion coefficient must be positive".into()));
    }
    let n = mesh.node_count();
    let mut full = vec![0.0; n];
    for (slot, &node) in mesh.boundary.iter().enumerate() {
        full[node] = bc[slot];
    }
    let (a, rhs, dof) = assemble(mesh, &full, k_coef, f);
    let interior = conjugate_gradient(&a, &rhs, 1e-12, 20 * (a.n + 10))?;
    for node in 0..n {
        if dof[node] >= 0 {
            full[node] = interior[dof[node] as usize];
        }
    }
    if full.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("solve_poisson_fem", "non-finite nodal values"));
    }
    Ok(full)
}
