//! Local spaces, degrees of freedom and element matrices.
//!
//! Every basis is built per cell in scaled physical coordinates
//! `((x - xc)/d, (y - yc)/d)` by inverting the matrix of DOF functionals
//! applied to a monomial basis of the local space. This keeps `x² + y²`
//! (ECR) a physical quantity on arbitrary triangles and makes unisolvence a
//! checkable property rather than a hand derivation.
//!
//! Edge means are orientation independent, so shared edge DOFs need no sign
//! convention.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{CellKind, Mesh};
use crate::quadrature::{gauss_legendre, high_order_rule, rule_for, CellGeometry, QuadratureRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    /// Enriched Crouzeix-Raviart: span{1,x,y,x²+y²}, 3 edge means + cell mean.
    Ecr,
    /// span{1,x,y,x²,y²}, 4 edge means + cell mean.
    Eq1Rot,
    P1,
    Q1,
    P2,
    Q2,
    /// ECR space with point values at the edge midpoints and the centroid.
    EcrMidpoint,
    /// EQ1rot space with point values at the edge midpoints and the center.
    Eq1RotMidpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DofKind {
    NodeValue,
    EdgeMean,
    CellMean,
    EdgeMidpointValue,
    CellCenterValue,
}

pub const ALL_KINDS: [ElementKind; 8] = [
    ElementKind::Ecr,
    ElementKind::Eq1Rot,
    ElementKind::P1,
    ElementKind::Q1,
    ElementKind::P2,
    ElementKind::Q2,
    ElementKind::EcrMidpoint,
    ElementKind::Eq1RotMidpoint,
];

impl ElementKind {
    pub fn cell_kind(self) -> CellKind {
        use ElementKind::*;
        match self {
            Ecr | P1 | P2 | EcrMidpoint => CellKind::Triangle,
            Eq1Rot | Q1 | Q2 | Eq1RotMidpoint => CellKind::Rectangle,
        }
    }

    pub fn local_dim(self) -> usize {
        use ElementKind::*;
        match self {
            P1 => 3,
            Ecr | Q1 | EcrMidpoint => 4,
            Eq1Rot | Eq1RotMidpoint => 5,
            P2 => 6,
            Q2 => 9,
        }
    }

    pub fn is_conforming(self) -> bool {
        matches!(self, ElementKind::P1 | ElementKind::Q1 | ElementKind::P2 | ElementKind::Q2)
    }

    pub fn is_nonconforming(self) -> bool {
        !self.is_conforming()
    }

    /// Local DOF kinds in local order.
    pub fn dof_kinds(self) -> Vec<DofKind> {
        use DofKind::*;
        use ElementKind::*;
        let nv = self.cell_kind().vertices();
        let mut out = Vec::with_capacity(self.local_dim());
        match self {
            P1 | Q1 => out.extend(std::iter::repeat_n(NodeValue, nv)),
            P2 | Q2 => {
                out.extend(std::iter::repeat_n(NodeValue, nv));
                out.extend(std::iter::repeat_n(EdgeMidpointValue, nv));
                if self == Q2 {
                    out.push(CellCenterValue);
                }
            }
            Ecr | Eq1Rot => {
                out.extend(std::iter::repeat_n(EdgeMean, nv));
                out.push(CellMean);
            }
            EcrMidpoint | Eq1RotMidpoint => {
                out.extend(std::iter::repeat_n(EdgeMidpointValue, nv));
                out.push(CellCenterValue);
            }
        }
        out
    }

    pub fn name(self) -> &'static str {
        use ElementKind::*;
        match self {
            Ecr => "ecr",
            Eq1Rot => "eq1rot",
            P1 => "p1",
            Q1 => "q1",
            P2 => "p2",
            Q2 => "q2",
            EcrMidpoint => "ecr-mid",
            Eq1RotMidpoint => "eq1rot-mid",
        }
    }

    pub fn parse(s: &str) -> Option<ElementKind> {
        ALL_KINDS.iter().copied().find(|k| k.name().eq_ignore_ascii_case(s))
    }

    /// Lowest-order conforming companion on the same cell shape.
    pub fn lowest_conforming(self) -> ElementKind {
        match self.cell_kind() {
            CellKind::Triangle => ElementKind::P1,
            CellKind::Rectangle => ElementKind::Q1,
        }
    }

    /// Quadratic conforming companion on the same cell shape.
    pub fn higher_conforming(self) -> ElementKind {
        match self.cell_kind() {
            CellKind::Triangle => ElementKind::P2,
            CellKind::Rectangle => ElementKind::Q2,
        }
    }

    fn check(self, cell_kind: CellKind) -> Result<()> {
        if self.cell_kind() == cell_kind {
            Ok(())
        } else {
            Err(Error::KindMismatch { kind: self, cell_kind })
        }
    }

    // The local space as combinations of monomials s^a t^b.
    fn space(self) -> Vec<Vec<(f64, i32, i32)>> {
        use ElementKind::*;
        let mono = |list: &[(i32, i32)]| list.iter().map(|&(a, b)| vec![(1.0, a, b)]).collect::<Vec<_>>();
        match self {
            P1 => mono(&[(0, 0), (1, 0), (0, 1)]),
            Q1 => mono(&[(0, 0), (1, 0), (0, 1), (1, 1)]),
            P2 => mono(&[(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]),
            Q2 => mono(&[
                (0, 0),
                (1, 0),
                (0, 1),
                (2, 0),
                (1, 1),
                (0, 2),
                (2, 1),
                (1, 2),
                (2, 2),
            ]),
            Ecr | EcrMidpoint => {
                let mut s = mono(&[(0, 0), (1, 0), (0, 1)]);
                s.push(vec![(1.0, 2, 0), (1.0, 0, 2)]);
                s
            }
            Eq1Rot | Eq1RotMidpoint => mono(&[(0, 0), (1, 0), (0, 1), (2, 0), (0, 2)]),
        }
    }
}

impl std::fmt::Display for ElementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Global numbering of mesh entities for one element kind.
///
/// Conforming kinds: nodes, then edges (P2/Q2), then cells (Q2).
/// Nonconforming kinds: edges, then cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofLayout {
    pub kind: ElementKind,
    num_nodes: usize,
    num_edges: usize,
    num_cells: usize,
}

impl DofLayout {
    pub fn new(mesh: &Mesh, kind: ElementKind) -> Result<DofLayout> {
        kind.check(mesh.cell_kind())?;
        Ok(DofLayout {
            kind,
            num_nodes: mesh.num_nodes(),
            num_edges: mesh.num_edges(),
            num_cells: mesh.num_cells(),
        })
    }

    pub fn has_node_dofs(&self) -> bool {
        self.kind.is_conforming()
    }

    pub fn edge_base(&self) -> Option<usize> {
        use ElementKind::*;
        match self.kind {
            P1 | Q1 => None,
            P2 | Q2 => Some(self.num_nodes),
            _ => Some(0),
        }
    }

    pub fn cell_base(&self) -> Option<usize> {
        use ElementKind::*;
        match self.kind {
            P1 | Q1 | P2 => None,
            Q2 => Some(self.num_nodes + self.num_edges),
            _ => Some(self.num_edges),
        }
    }

    pub fn total(&self) -> usize {
        use ElementKind::*;
        match self.kind {
            P1 | Q1 => self.num_nodes,
            P2 => self.num_nodes + self.num_edges,
            Q2 => self.num_nodes + self.num_edges + self.num_cells,
            _ => self.num_edges + self.num_cells,
        }
    }

    /// Global DOF indices of cell `c` in local DOF order.
    pub fn dof_map(&self, mesh: &Mesh, c: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.kind.local_dim());
        if self.has_node_dofs() {
            out.extend_from_slice(mesh.cell(c));
        }
        if let Some(base) = self.edge_base() {
            out.extend(mesh.cell_edge_ids(c).iter().map(|&e| base + e));
        }
        if let Some(base) = self.cell_base() {
            out.push(base + c);
        }
        out
    }
}

pub fn dof_map(kind: ElementKind, mesh: &Mesh, c: usize) -> Result<Vec<usize>> {
    Ok(DofLayout::new(mesh, kind)?.dof_map(mesh, c))
}

/// A discrete space with its Dirichlet DOFs removed.
#[derive(Clone, Debug)]
pub struct FeSpace {
    layout: DofLayout,
    free: Vec<usize>,
    free_of: Vec<Option<usize>>,
}

impl FeSpace {
    pub fn new(mesh: &Mesh, kind: ElementKind) -> Result<FeSpace> {
        let layout = DofLayout::new(mesh, kind)?;
        let mut fixed = vec![false; layout.total()];
        for d in crate::mesh::boundary_dofs(mesh, kind)? {
            fixed[d] = true;
        }
        let free: Vec<usize> = (0..layout.total()).filter(|&d| !fixed[d]).collect();
        if free.is_empty() {
            return Err(Error::EmptyFreeSpace);
        }
        let mut free_of = vec![None; layout.total()];
        for (i, &d) in free.iter().enumerate() {
            free_of[d] = Some(i);
        }
        Ok(FeSpace { layout, free, free_of })
    }

    pub fn kind(&self) -> ElementKind {
        self.layout.kind
    }

    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn num_total(&self) -> usize {
        self.layout.total()
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn free_index(&self, global: usize) -> Option<usize> {
        self.free_of[global]
    }

    /// Free coefficients to a global vector with zeros on the boundary.
    pub fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.num_total()];
        for (&d, &v) in self.free.iter().zip(coeffs) {
            g[d] = v;
        }
        g
    }

    pub fn restrict(&self, global: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| global[d]).collect()
    }

    pub fn check(&self, field: &FieldVector) -> Result<()> {
        if field.kind != self.kind() {
            return Err(Error::InvalidConfig(format!(
                "field of kind {} used with space of kind {}",
                field.kind,
                self.kind()
            )));
        }
        if field.coeffs.len() != self.num_free() {
            return Err(Error::DimensionMismatch {
                expected: self.num_free(),
                found: field.coeffs.len(),
            });
        }
        Ok(())
    }
}

/// Coefficients over the free DOFs of a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    pub kind: ElementKind,
    pub coeffs: Vec<f64>,
}

impl FieldVector {
    pub fn new(kind: ElementKind, coeffs: Vec<f64>) -> FieldVector {
        FieldVector { kind, coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scaled(&self, c: f64) -> FieldVector {
        FieldVector::new(self.kind, self.coeffs.iter().map(|v| c * v).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DofFunctional {
    Point([f64; 2]),
    EdgeMean([f64; 2], [f64; 2]),
    CellMean,
}

fn mid(p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
}

/// DOF functionals of `kind` on the cell with the given counterclockwise vertices.
pub fn cell_functionals(kind: ElementKind, vertices: &[[f64; 2]]) -> Vec<DofFunctional> {
    let nv = vertices.len();
    let center = {
        let (sx, sy) = vertices.iter().fold((0.0, 0.0), |a, p| (a.0 + p[0], a.1 + p[1]));
        [sx / nv as f64, sy / nv as f64]
    };
    let side = |k: usize| (vertices[k], vertices[(k + 1) % nv]);
    kind.dof_kinds()
        .iter()
        .scan((0usize, 0usize), |(iv, ie), dk| {
            Some(match dk {
                DofKind::NodeValue => {
                    *iv += 1;
                    DofFunctional::Point(vertices[*iv - 1])
                }
                DofKind::EdgeMean => {
                    *ie += 1;
                    let (p, q) = side(*ie - 1);
                    DofFunctional::EdgeMean(p, q)
                }
                DofKind::EdgeMidpointValue => {
                    *ie += 1;
                    let (p, q) = side(*ie - 1);
                    DofFunctional::Point(mid(p, q))
                }
                DofKind::CellMean => DofFunctional::CellMean,
                DofKind::CellCenterValue => DofFunctional::Point(center),
            })
        })
        .collect()
}

/// Quadrature used to apply mean functionals.
#[derive(Clone, Debug)]
pub struct FunctionalQuadrature {
    edge: (Vec<f64>, Vec<f64>),
    cell: QuadratureRule,
}

impl FunctionalQuadrature {
    /// Exact for the polynomial local spaces.
    pub fn exact(cell_kind: CellKind) -> FunctionalQuadrature {
        let cell = match cell_kind {
            CellKind::Triangle => rule_for(cell_kind, 4),
            CellKind::Rectangle => rule_for(cell_kind, 5),
        }
        .expect("fixed rule");
        FunctionalQuadrature { edge: gauss_legendre(3), cell }
    }

    /// For smooth non-polynomial functions.
    pub fn fine(cell_kind: CellKind) -> FunctionalQuadrature {
        FunctionalQuadrature {
            edge: gauss_legendre(10),
            cell: high_order_rule(cell_kind, 18),
        }
    }

    pub fn apply<F: FnMut([f64; 2]) -> f64>(&self, dof: &DofFunctional, geom: &CellGeometry, mut f: F) -> f64 {
        match *dof {
            DofFunctional::Point(p) => f(p),
            DofFunctional::EdgeMean(p, q) => {
                let (xs, ws) = &self.edge;
                xs.iter()
                    .zip(ws)
                    .map(|(&s, &w)| w * f([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]))
                    .sum()
            }
            DofFunctional::CellMean => {
                let total: f64 = self.cell.iter().map(|(xi, w)| w * f(geom.map(xi))).sum();
                total * geom.det / geom.measure()
            }
        }
    }
}

/// The nodal (DOF-dual) basis of one cell.
#[derive(Clone, Debug)]
pub struct CellBasis {
    kind: ElementKind,
    geom: CellGeometry,
    center: [f64; 2],
    scale: f64,
    terms: Vec<Vec<(f64, i32, i32)>>,
    // coef[k * dim + j]: weight of space polynomial k in basis function j
    coef: Vec<f64>,
}

impl CellBasis {
    pub fn new(kind: ElementKind, vertices: &[[f64; 2]]) -> Result<CellBasis> {
        let geom = CellGeometry::new(kind.cell_kind(), vertices)?;
        let nv = vertices.len() as f64;
        let center = [
            vertices.iter().map(|p| p[0]).sum::<f64>() / nv,
            vertices.iter().map(|p| p[1]).sum::<f64>() / nv,
        ];
        let scale = vertices
            .iter()
            .map(|p| ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        let terms = kind.space();
        let dim = terms.len();
        let mut basis = CellBasis {
            kind,
            geom,
            center,
            scale,
            terms,
            coef: Vec::new(),
        };
        let funcs = cell_functionals(kind, vertices);
        let fq = FunctionalQuadrature::exact(kind.cell_kind());
        let d = Mat::from_fn(dim, dim, |i, k| fq.apply(&funcs[i], &geom, |p| basis.poly(k, p)));
        let inv = d.partial_piv_lu().inverse();
        basis.coef = (0..dim)
            .flat_map(|k| (0..dim).map(move |j| (k, j)))
            .map(|(k, j)| inv[(k, j)])
            .collect();
        if basis.coef.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateCell(0));
        }
        Ok(basis)
    }

    pub fn of_cell(mesh: &Mesh, kind: ElementKind, c: usize) -> Result<CellBasis> {
        kind.check(mesh.cell_kind())?;
        CellBasis::new(kind, &mesh.cell_vertices(c)).map_err(|_| Error::DegenerateCell(c))
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn geometry(&self) -> &CellGeometry {
        &self.geom
    }

    fn local(&self, p: [f64; 2]) -> (f64, f64) {
        ((p[0] - self.center[0]) / self.scale, (p[1] - self.center[1]) / self.scale)
    }

    fn poly(&self, k: usize, p: [f64; 2]) -> f64 {
        let (s, t) = self.local(p);
        self.terms[k].iter().map(|&(c, a, b)| c * s.powi(a) * t.powi(b)).sum()
    }

    /// Basis values at the physical point `p`.
    pub fn values(&self, p: [f64; 2], out: &mut [f64]) {
        let dim = self.dim();
        let (s, t) = self.local(p);
        out[..dim].fill(0.0);
        for (k, term) in self.terms.iter().enumerate() {
            let v: f64 = term.iter().map(|&(c, a, b)| c * s.powi(a) * t.powi(b)).sum();
            for (o, c) in out[..dim].iter_mut().zip(&self.coef[k * dim..(k + 1) * dim]) {
                *o += c * v;
            }
        }
    }

    /// Basis values and physical gradients at `p`.
    pub fn eval(&self, p: [f64; 2], vals: &mut [f64], grads: &mut [[f64; 2]]) {
        let dim = self.dim();
        let (s, t) = self.local(p);
        vals[..dim].fill(0.0);
        grads[..dim].fill([0.0, 0.0]);
        let pw = |x: f64, e: i32| if e < 0 { 0.0 } else { x.powi(e) };
        for (k, term) in self.terms.iter().enumerate() {
            let (mut v, mut gs, mut gt) = (0.0, 0.0, 0.0);
            for &(c, a, b) in term {
                v += c * pw(s, a) * pw(t, b);
                gs += c * a as f64 * pw(s, a - 1) * pw(t, b);
                gt += c * b as f64 * pw(s, a) * pw(t, b - 1);
            }
            let (gx, gy) = (gs / self.scale, gt / self.scale);
            for j in 0..dim {
                let w = self.coef[k * dim + j];
                vals[j] += w * v;
                grads[j][0] += w * gx;
                grads[j][1] += w * gy;
            }
        }
    }

    /// Largest `|dof_i(φ_j) - δ_ij|`.
    pub fn unisolvence_error(&self, vertices: &[[f64; 2]]) -> f64 {
        let funcs = cell_functionals(self.kind, vertices);
        let fq = FunctionalQuadrature::exact(self.kind.cell_kind());
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        let mut buf = vec![0.0; dim];
        for (i, f) in funcs.iter().enumerate() {
            for j in 0..dim {
                let v = fq.apply(f, &self.geom, |p| {
                    self.values(p, &mut buf);
                    buf[j]
                });
                worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}

pub fn reference_vertices(cell_kind: CellKind) -> Vec<[f64; 2]> {
    match cell_kind {
        CellKind::Triangle => vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        CellKind::Rectangle => vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
    }
}

/// Basis values and gradients on the reference cell.
pub fn shape_eval(kind: ElementKind, ref_point: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let basis = CellBasis::new(kind, &reference_vertices(kind.cell_kind())).expect("reference cell");
    let mut vals = vec![0.0; basis.dim()];
    let mut grads = vec![[0.0; 2]; basis.dim()];
    basis.eval(ref_point, &mut vals, &mut grads);
    (vals, grads)
}

/// Row-major dense local matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMatrices {
    pub dim: usize,
    pub stiffness: Vec<f64>,
    pub mass: Vec<f64>,
}

/// Rule exact for every product of two local functions on `cell_kind`.
pub fn matrix_rule(cell_kind: CellKind) -> QuadratureRule {
    match cell_kind {
        CellKind::Triangle => rule_for(cell_kind, 4),
        // 4x4 Gauss: bidegree (4,4) products of Q2 with margin
        CellKind::Rectangle => rule_for(cell_kind, 7),
    }
    .expect("fixed rule")
}

pub fn local_matrices_of(basis: &CellBasis) -> LocalMatrices {
    let dim = basis.dim();
    let geom = basis.geometry();
    let rule = matrix_rule(geom.kind);
    let mut stiffness = vec![0.0; dim * dim];
    let mut mass = vec![0.0; dim * dim];
    let mut vals = vec![0.0; dim];
    let mut grads = vec![[0.0; 2]; dim];
    for (xi, w) in rule.iter() {
        basis.eval(geom.map(xi), &mut vals, &mut grads);
        let w = w * geom.det;
        for i in 0..dim {
            for j in i..dim {
                stiffness[i * dim + j] += w * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                mass[i * dim + j] += w * vals[i] * vals[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            stiffness[i * dim + j] = stiffness[j * dim + i];
            mass[i * dim + j] = mass[j * dim + i];
        }
    }
    LocalMatrices { dim, stiffness, mass }
}

pub fn local_matrices(kind: ElementKind, vertices: &[[f64; 2]]) -> Result<LocalMatrices> {
    Ok(local_matrices_of(&CellBasis::new(kind, vertices)?))
}

/// `∫_K φ_i ψ_j` for two bases on the same cell, row-major `rows.dim() × cols.dim()`.
pub fn local_mixed_mass(rows: &CellBasis, cols: &CellBasis) -> Vec<f64> {
    let (nr, nc) = (rows.dim(), cols.dim());
    let geom = rows.geometry();
    let rule = matrix_rule(geom.kind);
    let mut out = vec![0.0; nr * nc];
    let (mut vr, mut vc) = (vec![0.0; nr], vec![0.0; nc]);
    for (xi, w) in rule.iter() {
        let p = geom.map(xi);
        rows.values(p, &mut vr);
        cols.values(p, &mut vc);
        let w = w * geom.det;
        for i in 0..nr {
            for j in 0..nc {
                out[i * nc + j] += w * vr[i] * vc[j];
            }
        }
    }
    out
}

/// Bases of every cell, in cell order.
pub fn cell_bases(mesh: &Mesh, kind: ElementKind) -> Result<Vec<CellBasis>> {
    use rayon::prelude::*;
    kind.check(mesh.cell_kind())?;
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| CellBasis::of_cell(mesh, kind, c))
        .collect()
}

/// Applies every global DOF functional of `kind` to `u` (no boundary
/// constraint). Means use high-order quadrature.
pub fn interpolate_global<F: Fn([f64; 2]) -> f64>(mesh: &Mesh, kind: ElementKind, u: F) -> Result<Vec<f64>> {
    let layout = DofLayout::new(mesh, kind)?;
    let fq = FunctionalQuadrature::fine(mesh.cell_kind());
    let mut out = vec![0.0; layout.total()];
    for c in 0..mesh.num_cells() {
        let verts = mesh.cell_vertices(c);
        let geom = CellGeometry::of_cell(mesh, c)?;
        let funcs = cell_functionals(kind, &verts);
        for (f, g) in funcs.iter().zip(layout.dof_map(mesh, c)) {
            out[g] = fq.apply(f, &geom, &u);
        }
    }
    Ok(out)
}

/// Interpolant over the free DOFs; boundary functionals are dropped, which is
/// exact when `u` vanishes on the boundary.
pub fn interpolate<F: Fn([f64; 2]) -> f64>(mesh: &Mesh, kind: ElementKind, u: F) -> Result<FieldVector> {
    let space = FeSpace::new(mesh, kind)?;
    let g = interpolate_global(mesh, kind, u)?;
    Ok(FieldVector::new(kind, space.restrict(&g)))
}

/// The nonconforming interpolation operator: edge means and cell means.
pub fn interpolate_nc<F: Fn([f64; 2]) -> f64>(kind: ElementKind, mesh: &Mesh, u: F) -> Result<FieldVector> {
    if kind.is_conforming() {
        return Err(Error::InvalidConfig(format!("{kind} is not a nonconforming element")));
    }
    interpolate(mesh, kind, u)
}
