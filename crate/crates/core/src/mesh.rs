//! Structured triangulations of a single triangle.
//!
//! At level `k` each side is split into `n = 2^k` segments and the nodes are
//! the barycentric lattice `v0 + (i/n)(v1 - v0) + (j/n)(v2 - v0)` for
//! `i, j >= 0, i + j <= n`, numbered row by row (`j` outer, `i` inner).
//! Every element is similar to the parent triangle, and every boundary edge
//! belongs to an "upward" element whose third vertex plays the role of the
//! vertex opposite that side.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{SideLabel, Triangle, Vec2};

pub const MAX_LEVEL: u32 = 12;

/// A boundary edge, stored in counterclockwise traversal order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub side: SideLabel,
    /// The unique element containing this edge.
    pub element: usize,
}

/// Boundary edge with its derived geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeGeometry {
    pub edge: BoundaryEdge,
    pub midpoint: Vec2,
    pub length: f64,
    pub normal: Vec2,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub triangle: Triangle,
    pub level: u32,
    pub nodes: Vec<Vec2>,
    /// Counterclockwise node triples.
    pub elements: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub interior_node_mask: Vec<bool>,
    pub h_min: f64,
    pub h_max: f64,
    areas: Vec<f64>,
    // gradients of the three barycentric basis functions on each element
    basis_gradients: Vec<[Vec2; 3]>,
}

/// Index of lattice node `(i, j)` at subdivision `n`.
fn lattice_index(n: usize, i: usize, j: usize) -> usize {
    j * (n + 1) - j * j.saturating_sub(1) / 2 + i
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_area(&self, e: usize) -> f64 {
        self.areas[e]
    }

    pub fn basis_gradients(&self, e: usize) -> &[Vec2; 3] {
        &self.basis_gradients[e]
    }

    pub fn element_centroid(&self, e: usize) -> Vec2 {
        let [a, b, c] = self.elements[e];
        (self.nodes[a] + self.nodes[b] + self.nodes[c]) * (1.0 / 3.0)
    }

    /// Gradient of the P1 function with nodal values `full` on element `e`.
    pub fn element_gradient(&self, e: usize, full: &[f64]) -> Vec2 {
        let [a, b, c] = self.elements[e];
        let g = &self.basis_gradients[e];
        g[0] * full[a] + g[1] * full[b] + g[2] * full[c]
    }

    /// Global indices of the interior nodes, ascending.
    pub fn interior_nodes(&self) -> Vec<usize> {
        self.interior_node_mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    pub fn num_interior(&self) -> usize {
        self.interior_node_mask.iter().filter(|&&m| m).count()
    }

    /// Edges of `side` in traversal order, with lengths and outward normals.
    pub fn boundary_restriction(&self, side: SideLabel) -> Vec<EdgeGeometry> {
        self.boundary_edges
            .iter()
            .filter(|e| e.side == side)
            .map(|&edge| {
                let a = self.nodes[edge.nodes[0]];
                let b = self.nodes[edge.nodes[1]];
                let t = b - a;
                let length = t.norm();
                EdgeGeometry {
                    edge,
                    midpoint: a.lerp(b, 0.5),
                    length,
                    normal: Vec2::new(t.y, -t.x) * (1.0 / length),
                }
            })
            .collect()
    }

    /// Text dump: a `nodes` table (`index x y interior`), an `elements`
    /// table (`index n0 n1 n2`) and a `boundary` table
    /// (`index n0 n1 side element`), each preceded by a header line
    /// `<name> <row count>`.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# level {}", self.level)?;
        writeln!(w, "nodes {}", self.nodes.len())?;
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(
                w,
                "{i} {:.17e} {:.17e} {}",
                p.x,
                p.y,
                u8::from(self.interior_node_mask[i])
            )?;
        }
        writeln!(w, "elements {}", self.elements.len())?;
        for (i, [a, b, c]) in self.elements.iter().enumerate() {
            writeln!(w, "{i} {a} {b} {c}")?;
        }
        writeln!(w, "boundary {}", self.boundary_edges.len())?;
        for (i, e) in self.boundary_edges.iter().enumerate() {
            writeln!(
                w,
                "{i} {} {} {} {}",
                e.nodes[0], e.nodes[1], e.side, e.element
            )?;
        }
        Ok(())
    }
}

/// Uniform 4-way refinement of `tri`, `level` times.
pub fn refine_uniform(tri: &Triangle, level: u32) -> Result<Mesh> {
    if level > MAX_LEVEL {
        return Err(Error::LevelTooLarge {
            level,
            max: MAX_LEVEL,
        });
    }
    let n = 1usize << level;
    let [v0, v1, v2] = *tri.vertices();
    let (e1, e2) = (v1 - v0, v2 - v0);
    let inv = 1.0 / n as f64;

    let num_nodes = (n + 1) * (n + 2) / 2;
    let mut nodes = Vec::with_capacity(num_nodes);
    let mut interior_node_mask = Vec::with_capacity(num_nodes);
    for j in 0..=n {
        for i in 0..=(n - j) {
            debug_assert_eq!(lattice_index(n, i, j), nodes.len());
            nodes.push(v0 + e1 * (i as f64 * inv) + e2 * (j as f64 * inv));
            interior_node_mask.push(i > 0 && j > 0 && i + j < n);
        }
    }

    let idx = |i: usize, j: usize| lattice_index(n, i, j);
    let mut elements = Vec::with_capacity(n * n);
    // upward element (i, j) -> its position in `elements`
    let mut upward = vec![0usize; num_nodes];
    for j in 0..n {
        for i in 0..(n - j) {
            upward[idx(i, j)] = elements.len();
            elements.push([idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
            if i + j + 1 < n {
                elements.push([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
    }

    let side = |v: usize| SideLabel::opposite(v).expect("vertex index < 3");
    let mut boundary_edges = Vec::with_capacity(3 * n);
    // side 2: v0 -> v1 along j = 0
    for i in 0..n {
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(i, 0), idx(i + 1, 0)],
            side: side(2),
            element: upward[idx(i, 0)],
        });
    }
    // side 0: v1 -> v2 along i + j = n
    for j in 0..n {
        let i = n - j;
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(i, j), idx(i - 1, j + 1)],
            side: side(0),
            element: upward[idx(i - 1, j)],
        });
    }
    // side 1: v2 -> v0 along i = 0
    for j in (0..n).rev() {
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(0, j + 1), idx(0, j)],
            side: side(1),
            element: upward[idx(0, j)],
        });
    }

    let mut areas = Vec::with_capacity(elements.len());
    let mut basis_gradients = Vec::with_capacity(elements.len());
    let (mut h_min, mut h_max) = (f64::INFINITY, 0.0f64);
    for el in &elements {
        let p = [nodes[el[0]], nodes[el[1]], nodes[el[2]]];
        let twice_area = (p[1] - p[0]).cross(p[2] - p[0]);
        areas.push(0.5 * twice_area);
        // grad of barycentric k: inward normal of the opposite edge over the height
        let mut g = [Vec2::ZERO; 3];
        for k in 0..3 {
            let a = p[(k + 1) % 3];
            let b = p[(k + 2) % 3];
            let t = b - a;
            g[k] = t.perp() * (1.0 / twice_area);
            let len = t.norm();
            h_min = h_min.min(len);
            h_max = h_max.max(len);
        }
        basis_gradients.push(g);
    }

    Ok(Mesh {
        triangle: *tri,
        level,
        nodes,
        elements,
        boundary_edges,
        interior_node_mask,
        h_min,
        h_max,
        areas,
        basis_gradients,
    })
}
