//! Structured triangulation of the triangle with vertices (0,0),
//! (0,1), (0.5, sqrt(3/2)).
//!
//! Level L subdivides each edge into L segments, giving L^2 congruent
//! positively oriented sub-triangles and (L+1)(L+2)/2 nodes. Boundary
//! nodes are listed counterclockwise starting from (0,0), each with
//! its normalized arc-length parameter in [0, 1).

use crate::error::{Error, Result};

pub const V0: [f64; 2] = [0.0, 0.0];
pub const V1: [f64; 2] = [0.0, 1.0];
// sqrt(3/2)
pub const V2: [f64; 2] = [0.5, 1.224744871391589];

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Perimeter node ids, counterclockwise from (0,0).
    pub boundary: Vec<usize>,
    /// Normalized arc-length parameter of each boundary node.
    pub boundary_param: Vec<f64>,
    pub perimeter: f64,
    pub level: usize,
    is_boundary: Vec<bool>,
}

impl TriangleMesh {
    pub fn node_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.is_boundary[node]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }
}

pub fn build_triangle_mesh(level: usize) -> Result<TriangleMesh> {
    if level < 1 {
        return Err(Error::InvalidArg("mesh level must be at least 1".into()));
    }
    let l = level;
    // Node (i, j), i + j <= L, at V0 + (i/L)(V1-V0) + (j/L)(V2-V0).
    // Row i holds L+1-i nodes, so its offset is i(L+1) - i(i-1)/2.
    let offset = |i: usize| i * (l + 1) - i * i.saturating_sub(1) / 2;
    let id = |i: usize, j: usize| offset(i) + j;
    let mut vertices = Vec::with_capacity((l + 1) * (l + 2) / 2);
    for i in 0..=l {
        for j in 0..=(l - i) {
            let (s, t) = (i as f64 / l as f64, j as f64 / l as f64);
            vertices.push([
                V0[0] + s * (V1[0] - V0[0]) + t * (V2[0] - V0[0]),
                V0[1] + s * (V1[1] - V0[1]) + t * (V2[1] - V0[1]),
            ]);
        }
    }

    let mut triangles = Vec::with_capacity(l * l);
    for i in 0..l {
        for j in 0..l - i {
            // Up triangle; (V2-V0) x (V1-V0) > 0 makes this CCW.
            triangles.push([id(i, j), id(i, j + 1), id(i + 1, j)]);
            if i + j < l - 1 {
                triangles.push([id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)]);
            }
        }
    }

    // Counterclockwise perimeter: V0 -> V2 (i = 0), V2 -> V1 (the
    // i + j = L diagonal), V1 -> V0 (j = 0).
    let mut boundary = Vec::with_capacity(3 * l);
    for j in 0..l {
        boundary.push(id(0, j));
    }
    for i in 0..l {
        boundary.push(id(i, l - i));
    }
    for i in (1..=l).rev() {
        boundary.push(id(i, 0));
    }

    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let mut cum = Vec::with_capacity(boundary.len());
    let mut acc = 0.0;
    for k in 0..boundary.len() {
        cum.push(acc);
        let here = vertices[boundary[k]];
        let next = vertices[boundary[(k + 1) % boundary.len()]];
        acc += dist(here, next);
    }
    let perimeter = acc;
    let boundary_param: Vec<f64> = cum.into_iter().map(|c| c / perimeter).collect();

    let mut is_boundary = vec![false; vertices.len()];
    for &b in &boundary {
        is_boundary[b] = true;
    }

    Ok(TriangleMesh {
        vertices,
        triangles,
        boundary,
        boundary_param,
        perimeter,
        level,
        is_boundary,
    })
}

/// Map values given at sorted parameters in [0, 1] (a closed curve, so
/// position 1 wraps to position 0) onto arbitrary query parameters by
/// linear interpolation.
pub fn interp_closed_curve(params: &[f64], values: &[f64], query: f64) -> f64 {
    debug_assert_eq!(params.len(), values.len());
    let n = params.len();
    let q = query.rem_euclid(1.0);
    // Find the segment [params[k], params[k+1]) containing q; the last
    // segment closes back to params[0] + 1.
    let mut k = match params.binary_search_by(|p| p.total_cmp(&q)) {
        Ok(i) => return values[i],
        Err(i) => i.saturating_sub(1),
    };
    if q < params[0] {
        k = n - 1;
    }
    let (p0, v0) = (params[k], values[k]);
    let (p1, v1) = if k + 1 < n {
        (params[k + 1], values[k + 1])
    } else {
        (params[0] + 1.0, values[0])
    };
    let w = if p1 > p0 { (q - p0 + if q < p0 { 1.0 } else { 0.0 }) / (p1 - p0) } else { 0.0 };
    v0 + w * (v1 - v0)
}
