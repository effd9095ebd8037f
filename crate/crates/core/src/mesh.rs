//! Structured partitions of the unit square and the L-shaped domain.
//!
//! Rectangle meshes are uniform grids; triangle meshes split each grid square
//! along the diagonal from its lower-left to its upper-right corner. Nodes and
//! edges are numbered lexicographically by `(y, x)` so that every run produces
//! the same numbering.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::elements::{DofLayout, ElementKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainKind {
    /// `(0,1)²`
    UnitSquare,
    /// `(-1,1)² \ (-1,0]²`
    LShape,
}

impl DomainKind {
    pub fn area(self) -> f64 {
        match self {
            DomainKind::UnitSquare => 1.0,
            DomainKind::LShape => 3.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::UnitSquare => "square",
            DomainKind::LShape => "lshape",
        }
    }

    /// True when `p` lies in the closure of the domain.
    pub fn contains(self, p: [f64; 2]) -> bool {
        let [x, y] = p;
        match self {
            DomainKind::UnitSquare => (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y),
            DomainKind::LShape => {
                (-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y) && !(x < 0.0 && y < 0.0)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Triangle,
    Rectangle,
}

impl CellKind {
    pub fn vertices(self) -> usize {
        match self {
            CellKind::Triangle => 3,
            CellKind::Rectangle => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Triangle => "triangle",
            CellKind::Rectangle => "rectangle",
        }
    }
}

/// A mesh edge. Traversing `a -> b` keeps `left` on the left-hand side, so
/// `a -> b` is counterclockwise with respect to `left`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub left: usize,
    pub right: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    domain: DomainKind,
    cell_kind: CellKind,
    n: usize,
    h: f64,
    nodes: Vec<[f64; 2]>,
    cells: Vec<usize>,
    edges: Vec<Edge>,
    cell_edges: Vec<usize>,
    boundary_node: Vec<bool>,
}

/// Builds the structured mesh with `n` subdivisions per unit length.
pub fn build_mesh(domain: DomainKind, cell_kind: CellKind, n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::ZeroSubdivisions);
    }
    let (origin, cells_per_side) = match domain {
        DomainKind::UnitSquare => (0.0, n),
        DomainKind::LShape => (-1.0, 2 * n),
    };
    let removed = |i: usize, j: usize| domain == DomainKind::LShape && i < n && j < n;

    // lattice node (i, j) -> index, assigned in (j, i) order
    let side = cells_per_side + 1;
    let mut used = vec![false; side * side];
    for j in 0..cells_per_side {
        for i in 0..cells_per_side {
            if removed(i, j) {
                continue;
            }
            for (di, dj) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                used[(j + dj) * side + i + di] = true;
            }
        }
    }
    let mut index = vec![usize::MAX; side * side];
    let mut nodes = Vec::new();
    for j in 0..side {
        for i in 0..side {
            if used[j * side + i] {
                index[j * side + i] = nodes.len();
                nodes.push([origin + i as f64 / n as f64, origin + j as f64 / n as f64]);
            }
        }
    }

    let id = |i: usize, j: usize| index[j * side + i];
    let mut cells = Vec::new();
    for j in 0..cells_per_side {
        for i in 0..cells_per_side {
            if removed(i, j) {
                continue;
            }
            let (p00, p10, p11, p01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            match cell_kind {
                CellKind::Rectangle => cells.extend([p00, p10, p11, p01]),
                CellKind::Triangle => cells.extend([p00, p10, p11, p00, p11, p01]),
            }
        }
    }
    Mesh::from_parts(domain, cell_kind, n, nodes, cells)
}

/// Splits every cell into four congruent children through its edge midpoints.
///
/// Node indices of `mesh` are kept as a prefix of the refined node list,
/// followed by edge midpoints (in edge order) and, for rectangles, cell centers.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let mut nodes = mesh.nodes.clone();
    let mid_base = nodes.len();
    for e in &mesh.edges {
        let (pa, pb) = (mesh.nodes[e.a], mesh.nodes[e.b]);
        nodes.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
    }
    let center_base = nodes.len();
    if mesh.cell_kind == CellKind::Rectangle {
        for c in 0..mesh.num_cells() {
            nodes.push(mesh.cell_center(c));
        }
    }

    let mut cells = Vec::with_capacity(4 * mesh.cells.len());
    for c in 0..mesh.num_cells() {
        let v = mesh.cell(c);
        let m: Vec<usize> = mesh.cell_edge_ids(c).iter().map(|&e| mid_base + e).collect();
        match mesh.cell_kind {
            CellKind::Triangle => {
                cells.extend([v[0], m[0], m[2]]);
                cells.extend([m[0], v[1], m[1]]);
                cells.extend([m[2], m[1], v[2]]);
                cells.extend([m[0], m[1], m[2]]);
            }
            CellKind::Rectangle => {
                let z = center_base + c;
                cells.extend([v[0], m[0], z, m[3]]);
                cells.extend([m[0], v[1], m[1], z]);
                cells.extend([z, m[1], v[2], m[2]]);
                cells.extend([m[3], z, m[2], v[3]]);
            }
        }
    }
    Mesh::from_parts(mesh.domain, mesh.cell_kind, 2 * mesh.n, nodes, cells)
        .expect("refinement of a valid mesh is valid")
}

/// Global DOFs fixed by the homogeneous Dirichlet condition, ascending.
pub fn boundary_dofs(mesh: &Mesh, kind: ElementKind) -> Result<Vec<usize>> {
    let layout = DofLayout::new(mesh, kind)?;
    let mut out = Vec::new();
    if layout.has_node_dofs() {
        out.extend((0..mesh.num_nodes()).filter(|&v| mesh.boundary_node[v]));
    }
    if let Some(base) = layout.edge_base() {
        out.extend(
            (0..mesh.num_edges())
                .filter(|&e| mesh.edges[e].is_boundary())
                .map(|e| base + e),
        );
    }
    Ok(out)
}

impl Mesh {
    /// Assembles a mesh from nodes and a flat counterclockwise cell list and
    /// derives the edge table.
    pub fn from_parts(
        domain: DomainKind,
        cell_kind: CellKind,
        n: usize,
        nodes: Vec<[f64; 2]>,
        cells: Vec<usize>,
    ) -> Result<Mesh> {
        let nv = cell_kind.vertices();
        if !cells.len().is_multiple_of(nv) {
            return Err(Error::DimensionMismatch {
                expected: cells.len() / nv * nv,
                found: cells.len(),
            });
        }
        let num_cells = cells.len() / nv;

        // (min, max) -> (a, b, left, right)
        type EdgeEntry = (usize, usize, usize, Option<usize>);
        let mut table: HashMap<(usize, usize), EdgeEntry> = HashMap::new();
        for c in 0..num_cells {
            let v = &cells[c * nv..(c + 1) * nv];
            for k in 0..nv {
                let (a, b) = (v[k], v[(k + 1) % nv]);
                table
                    .entry((a.min(b), a.max(b)))
                    .and_modify(|entry| entry.3 = Some(c))
                    .or_insert((a, b, c, None));
            }
        }
        let mut edges: Vec<Edge> = table
            .into_values()
            .map(|(a, b, left, right)| Edge { a, b, left, right })
            .collect();
        let midpoint = |e: &Edge| {
            let (pa, pb) = (nodes[e.a], nodes[e.b]);
            (0.5 * (pa[1] + pb[1]), 0.5 * (pa[0] + pb[0]))
        };
        edges.sort_by(|e, f| {
            let (ey, ex) = midpoint(e);
            let (fy, fx) = midpoint(f);
            ey.total_cmp(&fy).then(ex.total_cmp(&fx))
        });

        let lookup: HashMap<(usize, usize), usize> = edges
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.a.min(e.b), e.a.max(e.b)), i))
            .collect();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for c in 0..num_cells {
            let v = &cells[c * nv..(c + 1) * nv];
            for k in 0..nv {
                let (a, b) = (v[k], v[(k + 1) % nv]);
                cell_edges.push(lookup[&(a.min(b), a.max(b))]);
            }
        }

        let mut boundary_node = vec![false; nodes.len()];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_node[e.a] = true;
            boundary_node[e.b] = true;
        }

        let mut mesh = Mesh {
            domain,
            cell_kind,
            n,
            h: 0.0,
            nodes,
            cells,
            edges,
            cell_edges,
            boundary_node,
        };
        for c in 0..num_cells {
            if mesh.cell_area(c) <= 0.0 {
                return Err(Error::DegenerateCell(c));
            }
        }
        mesh.h = (0..num_cells).map(|c| mesh.cell_diameter(c)).fold(0.0, f64::max);
        Ok(mesh)
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    pub fn cell_kind(&self) -> CellKind {
        self.cell_kind
    }

    /// Subdivisions per unit length.
    pub fn subdivisions(&self) -> usize {
        self.n
    }

    /// Mesh size: the cell side for rectangles, the diagonal for triangles.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / self.cell_kind.vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> [f64; 2] {
        self.nodes[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Vertex indices of cell `c`, counterclockwise.
    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.cell_kind.vertices();
        &self.cells[c * nv..(c + 1) * nv]
    }

    /// Edge indices of cell `c`; local side `k` joins local vertices `k` and `k+1`.
    pub fn cell_edge_ids(&self, c: usize) -> &[usize] {
        let nv = self.cell_kind.vertices();
        &self.cell_edges[c * nv..(c + 1) * nv]
    }

    pub fn boundary_edge_flags(&self) -> Vec<bool> {
        self.edges.iter().map(Edge::is_boundary).collect()
    }

    pub fn is_boundary_node(&self, v: usize) -> bool {
        self.boundary_node[v]
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    pub fn cell_vertices(&self, c: usize) -> Vec<[f64; 2]> {
        self.cell(c).iter().map(|&v| self.nodes[v]).collect()
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let vs = self.cell_vertices(c);
        let k = vs.len() as f64;
        let (sx, sy) = vs.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        [sx / k, sy / k]
    }

    /// Signed area by the shoelace formula (positive for counterclockwise cells).
    pub fn cell_area(&self, c: usize) -> f64 {
        let vs = self.cell_vertices(c);
        let k = vs.len();
        0.5 * (0..k)
            .map(|i| {
                let (p, q) = (vs[i], vs[(i + 1) % k]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum::<f64>()
    }

    fn cell_diameter(&self, c: usize) -> f64 {
        let vs = self.cell_vertices(c);
        match self.cell_kind {
            // axis-aligned: report the side length
            CellKind::Rectangle => {
                let w = (vs[1][0] - vs[0][0]).abs();
                let h = (vs[3][1] - vs[0][1]).abs();
                w.max(h)
            }
            CellKind::Triangle => {
                let mut d: f64 = 0.0;
                for i in 0..3 {
                    let (p, q) = (vs[i], vs[(i + 1) % 3]);
                    d = d.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                }
                d
            }
        }
    }

    /// Writes the plain-text dump: `v x y`, `c i j k [l]`, `e a b left right`
    /// (`right` is `-1` on the boundary).
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_text().as_bytes())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.nodes {
            let _ = writeln!(s, "v {} {}", p[0], p[1]);
        }
        for c in 0..self.num_cells() {
            s.push('c');
            for v in self.cell(c) {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        for e in &self.edges {
            let right = e.right.map_or(-1, |r| r as i64);
            let _ = writeln!(s, "e {} {} {} {}", e.a, e.b, e.left, right);
        }
        s
    }
}
