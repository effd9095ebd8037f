//! Lower bounds from nonconforming eigenpairs, conforming postprocessed upper
//! bounds, enclosures and the diagnostic identities.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, assemble_mixed_mass, dot, Assembled};
use crate::elements::{cell_bases, interpolate_global, CellBasis, DofLayout, ElementKind, FeSpace, FieldVector};
use crate::error::{Error, Result};
use crate::mesh::{DomainKind, Mesh};
use crate::quadrature::high_order_rule;
use crate::solve::{dense_gen_eig, eigs_smallest_with, CholeskyFactor, EigOptions, EigenResult};

/// Quadrature degree for integrals involving analytic functions.
pub const DIAGNOSTIC_DEGREE: usize = 16;

/// A smooth function with its gradient.
pub trait ScalarField: Sync {
    fn value(&self, p: [f64; 2]) -> f64;
    fn gradient(&self, p: [f64; 2]) -> [f64; 2];
}

/// Closure pair `(u, ∇u)`.
pub struct SmoothFn<F, G>(pub F, pub G);

impl<F, G> ScalarField for SmoothFn<F, G>
where
    F: Fn([f64; 2]) -> f64 + Sync,
    G: Fn([f64; 2]) -> [f64; 2] + Sync,
{
    fn value(&self, p: [f64; 2]) -> f64 {
        (self.0)(p)
    }

    fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        (self.1)(p)
    }
}

/// `λ = (p²+q²)π²`, `u = 2 sin(pπx) sin(qπy)` on the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub p: u32,
    pub q: u32,
    pub eigenvalue: f64,
}

impl ExactSolution {
    pub fn square(p: u32, q: u32) -> ExactSolution {
        ExactSolution {
            p,
            q,
            eigenvalue: f64::from(p * p + q * q) * PI * PI,
        }
    }

    /// The `j`-th (0-based) eigenpair of the domain, ordered by eigenvalue
    /// with ties broken by `p`.
    pub fn nth(domain: DomainKind, j: usize) -> Result<ExactSolution> {
        match domain {
            DomainKind::UnitSquare => Ok(square_modes(j + 1)[j]),
            DomainKind::LShape => Err(Error::ExactUnavailable),
        }
    }

    pub fn available(domain: DomainKind) -> bool {
        domain == DomainKind::UnitSquare
    }
}

impl ScalarField for ExactSolution {
    fn value(&self, x: [f64; 2]) -> f64 {
        let (a, b) = (f64::from(self.p) * PI, f64::from(self.q) * PI);
        2.0 * (a * x[0]).sin() * (b * x[1]).sin()
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let (a, b) = (f64::from(self.p) * PI, f64::from(self.q) * PI);
        [
            2.0 * a * (a * x[0]).cos() * (b * x[1]).sin(),
            2.0 * b * (a * x[0]).sin() * (b * x[1]).cos(),
        ]
    }
}

/// The `count` smallest modes of the unit square.
pub fn square_modes(count: usize) -> Vec<ExactSolution> {
    let k = (count as f64).sqrt().ceil() as u32 + 2;
    let mut all: Vec<ExactSolution> = (1..=k)
        .flat_map(|p| (1..=k).map(move |q| ExactSolution::square(p, q)))
        .collect();
    all.sort_by_key(|e| (e.p * e.p + e.q * e.q, e.p));
    all.truncate(count);
    all
}

pub fn exact_eigenvalues(domain: DomainKind, m: usize) -> Option<Vec<f64>> {
    match domain {
        DomainKind::UnitSquare => Some(square_modes(m).iter().map(|e| e.eigenvalue).collect()),
        DomainKind::LShape => None,
    }
}

/// The `m` smallest eigenpairs of the nonconforming discretization; their
/// eigenvalues are the lower bounds.
pub fn lower_bounds(mesh: &Mesh, nc_kind: ElementKind, m: usize, opts: &EigOptions) -> Result<EigenResult> {
    if nc_kind.is_conforming() {
        return Err(Error::InvalidConfig(format!("{nc_kind} is not a nonconforming element")));
    }
    discrete_eigenpairs(mesh, nc_kind, m, opts)
}

/// Smallest eigenpairs of any discretization, tagged with its kind.
pub fn discrete_eigenpairs(mesh: &Mesh, kind: ElementKind, m: usize, opts: &EigOptions) -> Result<EigenResult> {
    let asm = assemble(mesh, kind)?;
    let mut res = eigs_smallest_with(&asm.a, &asm.b, m, opts)?;
    res.kind = Some(kind);
    Ok(res)
}

/// Postprocessed values with the conforming fields that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBounds {
    pub kind: ElementKind,
    pub values: Vec<f64>,
    pub fields: Vec<FieldVector>,
    /// Dimension of the postprocessing subspace actually used (higher-order
    /// scheme only; equals the number of source solves unless directions
    /// were dropped).
    pub reduced_dim: usize,
}

fn nc_kind_of(nc: &EigenResult) -> Result<ElementKind> {
    nc.kind
        .ok_or_else(|| Error::InvalidConfig("eigenpairs carry no element kind".into()))
}

// Solves a(û_j, v) = λ_j b(u_j, v) for each requested pair.
fn source_solves(nc: &EigenResult, count: usize, asm: &Assembled, mesh: &Mesh) -> Result<Vec<Vec<f64>>> {
    let nc_kind = nc_kind_of(nc)?;
    if count > nc.len() {
        return Err(Error::TooManyEigenpairs {
            requested: count,
            dim: nc.len(),
        });
    }
    let mm = assemble_mixed_mass(mesh, asm.kind(), nc_kind)?;
    if mm.ncols() != nc.eigenvectors.first().map_or(0, Vec::len) {
        return Err(Error::DimensionMismatch {
            expected: mm.ncols(),
            found: nc.eigenvectors[0].len(),
        });
    }
    let chol = CholeskyFactor::new(&asm.a)?;
    Ok((0..count)
        .into_par_iter()
        .map(|j| {
            let rhs: Vec<f64> = mm
                .matvec(&nc.eigenvectors[j])
                .into_iter()
                .map(|v| nc.eigenvalues[j] * v)
                .collect();
            chol.solve(&rhs)
        })
        .collect())
}

/// Lowest-order postprocessing: one conforming source solve per pair, then
/// the Rayleigh quotient of the solution.
pub fn upper_bound_lowest(nc: &EigenResult, c_kind: ElementKind, mesh: &Mesh) -> Result<UpperBounds> {
    if !c_kind.is_conforming() {
        return Err(Error::InvalidConfig(format!("{c_kind} is not a conforming element")));
    }
    let asm = assemble(mesh, c_kind)?;
    let sols = source_solves(nc, nc.len(), &asm, mesh)?;
    let mut values = Vec::with_capacity(sols.len());
    for u in &sols {
        let bb = asm.b.quad_form(u);
        if bb <= 0.0 {
            return Err(Error::ZeroField);
        }
        values.push(asm.a.quad_form(u) / bb);
    }
    Ok(UpperBounds {
        kind: c_kind,
        values,
        reduced_dim: sols.len(),
        fields: sols.into_iter().map(|u| FieldVector::new(c_kind, u)).collect(),
    })
}

/// Higher-order postprocessing: `m` source solves in the conforming space,
/// then the `m × m` eigenproblem in their span.
pub fn upper_bound_higher(nc: &EigenResult, hc_kind: ElementKind, mesh: &Mesh, m: usize) -> Result<UpperBounds> {
    if !hc_kind.is_conforming() {
        return Err(Error::InvalidConfig(format!("{hc_kind} is not a conforming element")));
    }
    if m == 0 {
        return Err(Error::InvalidConfig("subspace dimension must be at least 1".into()));
    }
    let asm = assemble(mesh, hc_kind)?;
    let sols = source_solves(nc, m, &asm, mesh)?;
    let au: Vec<Vec<f64>> = sols.par_iter().map(|u| asm.a.matvec(u)).collect();
    let bu: Vec<Vec<f64>> = sols.par_iter().map(|u| asm.b.matvec(u)).collect();
    let mut at = vec![0.0; m * m];
    let mut bt = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            at[i * m + j] = dot(&sols[i], &au[j]);
            bt[i * m + j] = dot(&sols[i], &bu[j]);
        }
    }
    let small = dense_gen_eig(&at, &bt, m)?;
    let n = asm.space.num_free();
    let fields = small
        .vectors
        .iter()
        .map(|y| {
            let mut u = vec![0.0; n];
            for (s, &c) in sols.iter().zip(y) {
                u.iter_mut().zip(s).for_each(|(a, b)| *a += c * b);
            }
            FieldVector::new(hc_kind, u)
        })
        .collect();
    Ok(UpperBounds {
        kind: hc_kind,
        values: small.values,
        fields,
        reduced_dim: small.reduced_dim,
    })
}

/// `a(w,w) / b(w,w)` from the assembled forms.
pub fn rayleigh_quotient(field: &FieldVector, mesh: &Mesh) -> Result<f64> {
    let asm = assemble(mesh, field.kind)?;
    asm.space.check(field)?;
    let bb = asm.b.quad_form(&field.coeffs);
    if bb <= 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(asm.a.quad_form(&field.coeffs) / bb)
}

/// Rayleigh quotient of an analytic function by composite quadrature.
pub fn rayleigh_quotient_fn(f: &dyn ScalarField, mesh: &Mesh) -> Result<f64> {
    let (aa, bb) = integrate_cells(mesh, |_, p| {
        let g = f.gradient(p);
        let v = f.value(p);
        [g[0] * g[0] + g[1] * g[1], v * v]
    })?;
    if bb <= 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(aa / bb)
}

// Σ_K ∫_K f over the mesh with the diagnostic rule; `f` gets the cell index.
fn integrate_cells<F>(mesh: &Mesh, f: F) -> Result<(f64, f64)>
where
    F: Fn(usize, [f64; 2]) -> [f64; 2] + Sync,
{
    let rule = high_order_rule(mesh.cell_kind(), DIAGNOSTIC_DEGREE);
    let parts: Result<Vec<[f64; 2]>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let g = crate::quadrature::CellGeometry::of_cell(mesh, c)?;
            let mut acc = [0.0; 2];
            for (xi, w) in rule.iter() {
                let v = f(c, g.map(xi));
                acc[0] += w * v[0];
                acc[1] += w * v[1];
            }
            Ok([acc[0] * g.det, acc[1] * g.det])
        })
        .collect();
    Ok(parts?.iter().fold((0.0, 0.0), |a, v| (a.0 + v[0], a.1 + v[1])))
}

/// A discrete field ready for pointwise evaluation.
pub struct DiscreteField {
    layout: DofLayout,
    bases: Vec<CellBasis>,
    global: Vec<f64>,
    dofs: Vec<Vec<usize>>,
}

impl DiscreteField {
    /// From coefficients over free DOFs.
    pub fn new(mesh: &Mesh, field: &FieldVector) -> Result<DiscreteField> {
        let space = FeSpace::new(mesh, field.kind)?;
        space.check(field)?;
        DiscreteField::from_global(mesh, field.kind, space.expand(&field.coeffs))
    }

    /// From coefficients over all DOFs.
    pub fn from_global(mesh: &Mesh, kind: ElementKind, global: Vec<f64>) -> Result<DiscreteField> {
        let layout = DofLayout::new(mesh, kind)?;
        if global.len() != layout.total() {
            return Err(Error::DimensionMismatch {
                expected: layout.total(),
                found: global.len(),
            });
        }
        let dofs = (0..mesh.num_cells()).map(|c| layout.dof_map(mesh, c)).collect();
        Ok(DiscreteField {
            layout,
            bases: cell_bases(mesh, kind)?,
            global,
            dofs,
        })
    }

    pub fn kind(&self) -> ElementKind {
        self.layout.kind
    }

    /// Value and gradient at `p`, which must lie in cell `c`.
    pub fn eval(&self, c: usize, p: [f64; 2]) -> (f64, [f64; 2]) {
        let b = &self.bases[c];
        let d = b.dim();
        let mut vals = [0.0; 9];
        let mut grads = [[0.0; 2]; 9];
        b.eval(p, &mut vals[..d], &mut grads[..d]);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (k, &dof) in self.dofs[c].iter().enumerate() {
            let u = self.global[dof];
            v += u * vals[k];
            g[0] += u * grads[k][0];
            g[1] += u * grads[k][1];
        }
        (v, g)
    }
}

/// `‖u − w‖²_{a,h}` and `‖u − w‖²_b` by composite quadrature.
pub fn broken_errors(mesh: &Mesh, u: &dyn ScalarField, w: &DiscreteField) -> Result<(f64, f64)> {
    integrate_cells(mesh, |c, p| {
        let (v, g) = w.eval(c, p);
        let gu = u.gradient(p);
        let (dx, dy) = (gu[0] - g[0], gu[1] - g[1]);
        let e = u.value(p) - v;
        [dx * dx + dy * dy, e * e]
    })
}

/// `(a_h(u, w), b(u, w))` by composite quadrature.
pub fn broken_products(mesh: &Mesh, u: &dyn ScalarField, w: &DiscreteField) -> Result<(f64, f64)> {
    integrate_cells(mesh, |c, p| {
        let (v, g) = w.eval(c, p);
        let gu = u.gradient(p);
        [gu[0] * g[0] + gu[1] * g[1], u.value(p) * v]
    })
}

/// `|LHS − RHS|` of
/// `λ − λ_h = ‖u−u_h‖²_{a,h} − λ_h‖v_h−u_h‖²_b + λ_h(‖v_h‖²_b − ‖u‖²_b) + 2a_h(u−v_h, u_h)`
/// for the pair `j` of `nc`. The sign of `u_h` is chosen so that `b(u, u_h) ≥ 0`.
pub fn expansion_residual(
    exact: &ExactSolution,
    nc: &EigenResult,
    j: usize,
    v_h: &FieldVector,
    mesh: &Mesh,
) -> Result<f64> {
    let kind = nc_kind_of(nc)?;
    let asm = assemble(mesh, kind)?;
    asm.space.check(v_h)?;
    let lh = nc.eigenvalues[j];
    let mut uh = nc.eigenvectors[j].clone();
    let uh_field = DiscreteField::new(mesh, &FieldVector::new(kind, uh.clone()))?;
    let (_, bu_uh) = broken_products(mesh, exact, &uh_field)?;
    let uh_field = if bu_uh < 0.0 {
        uh.iter_mut().for_each(|v| *v = -*v);
        DiscreteField::new(mesh, &FieldVector::new(kind, uh.clone()))?
    } else {
        uh_field
    };
    let (err_a, _) = broken_errors(mesh, exact, &uh_field)?;
    let (au_uh, _) = broken_products(mesh, exact, &uh_field)?;
    let (_, uu) = integrate_cells(mesh, |_, p| {
        let v = exact.value(p);
        [0.0, v * v]
    })?;
    let diff: Vec<f64> = v_h.coeffs.iter().zip(&uh).map(|(a, b)| a - b).collect();
    let vv = asm.b.quad_form(&v_h.coeffs);
    let av_uh = asm.a.bilinear(&v_h.coeffs, &uh);
    let lhs = exact.eigenvalue - lh;
    let rhs = err_a - lh * asm.b.quad_form(&diff) + lh * (vv - uu) + 2.0 * (au_uh - av_uh);
    Ok((lhs - rhs).abs())
}

/// `|LHS − RHS|` of `R(w) − λ = ‖w−u‖²_a/‖w‖²_b − λ‖w−u‖²_b/‖w‖²_b` for a
/// conforming field `w`.
pub fn rayleigh_identity_residual(w: &FieldVector, exact: &ExactSolution, mesh: &Mesh) -> Result<f64> {
    if !w.kind.is_conforming() {
        return Err(Error::InvalidConfig(format!("{} is not a conforming element", w.kind)));
    }
    let asm = assemble(mesh, w.kind)?;
    asm.space.check(w)?;
    let ww = asm.b.quad_form(&w.coeffs);
    if ww <= 0.0 {
        return Err(Error::ZeroField);
    }
    let r = asm.a.quad_form(&w.coeffs) / ww;
    let field = DiscreteField::new(mesh, w)?;
    let (ea, eb) = broken_errors(mesh, exact, &field)?;
    let lambda = exact.eigenvalue;
    Ok(((r - lambda) - (ea / ww - lambda * eb / ww)).abs())
}

/// `a_h(u − Π_h u, Π_h u)` with the unconstrained interpolant.
pub fn interpolation_orthogonality(mesh: &Mesh, kind: ElementKind, u: &dyn ScalarField) -> Result<f64> {
    let g = interpolate_global(mesh, kind, |p| u.value(p))?;
    let pi = DiscreteField::from_global(mesh, kind, g)?;
    let (v, _) = integrate_cells(mesh, |c, p| {
        let (_, gp) = pi.eval(c, p);
        let gu = u.gradient(p);
        [(gu[0] - gp[0]) * gp[0] + (gu[1] - gp[1]) * gp[1], 0.0]
    })?;
    Ok(v)
}

/// `‖u − Π_h u‖_b` with the unconstrained interpolant.
pub fn interpolation_error_b(mesh: &Mesh, kind: ElementKind, u: &dyn ScalarField) -> Result<f64> {
    let g = interpolate_global(mesh, kind, |p| u.value(p))?;
    let pi = DiscreteField::from_global(mesh, kind, g)?;
    Ok(broken_errors(mesh, u, &pi)?.1.sqrt())
}

/// `‖u − u_h‖_{a,h}` for pair `j`, sign-aligned to the exact eigenfunction.
pub fn energy_error(exact: &ExactSolution, nc: &EigenResult, j: usize, mesh: &Mesh) -> Result<f64> {
    let kind = nc_kind_of(nc)?;
    let mut uh = nc.eigenvectors[j].clone();
    let f = DiscreteField::new(mesh, &FieldVector::new(kind, uh.clone()))?;
    let (_, s) = broken_products(mesh, exact, &f)?;
    let f = if s < 0.0 {
        uh.iter_mut().for_each(|v| *v = -*v);
        DiscreteField::new(mesh, &FieldVector::new(kind, uh))?
    } else {
        f
    };
    Ok(broken_errors(mesh, exact, &f)?.0.sqrt())
}

/// Bounds for one eigenvalue index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    /// 1-based.
    pub j: usize,
    pub lower: f64,
    pub upper_lowest: Option<f64>,
    pub upper_higher: Option<f64>,
    /// Sharpest available upper bound minus the lower bound.
    pub width: Option<f64>,
}

impl BoundRow {
    pub fn upper(&self) -> Option<f64> {
        match (self.upper_lowest, self.upper_higher) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Slack allowed before an upper bound below a lower bound counts as inverted.
pub const INVERSION_SLACK: f64 = 1e-9;

/// Pairs lower and upper bounds index by index without checking them.
pub fn pair_bounds(lower: &[f64], upper_lowest: Option<&[f64]>, upper_higher: Option<&[f64]>) -> Vec<BoundRow> {
    lower
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let mut row = BoundRow {
                j: i + 1,
                lower: l,
                upper_lowest: upper_lowest.and_then(|u| u.get(i).copied()),
                upper_higher: upper_higher.and_then(|u| u.get(i).copied()),
                width: None,
            };
            row.width = row.upper().map(|u| u - l);
            row
        })
        .collect()
}

/// First index where an upper bound falls below the lower bound.
pub fn find_inversion(rows: &[BoundRow]) -> Option<Error> {
    rows.iter().find_map(|r| {
        [r.upper_lowest, r.upper_higher]
            .into_iter()
            .flatten()
            .find(|&u| u < r.lower - INVERSION_SLACK)
            .map(|u| Error::BoundInversion {
                j: r.j,
                lower: r.lower,
                upper: u,
            })
    })
}

/// Pairs the bounds and fails on any inversion.
pub fn enclosure(lower: &EigenResult, upper_lowest: Option<&[f64]>, upper_higher: Option<&[f64]>) -> Result<Vec<BoundRow>> {
    let rows = pair_bounds(&lower.eigenvalues, upper_lowest, upper_higher);
    match find_inversion(&rows) {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}

/// Bounds at one mesh level with the settings that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnclosureReport {
    pub domain: DomainKind,
    pub n: usize,
    pub h: f64,
    pub nc_kind: ElementKind,
    pub lowest_kind: Option<ElementKind>,
    pub higher_kind: Option<ElementKind>,
    /// Source solves used by the higher-order scheme.
    pub subspace: Option<usize>,
    pub reduced_dim: Option<usize>,
    pub tol: f64,
    pub seed: u64,
    pub solver_iterations: usize,
    pub max_residual: f64,
    pub rows: Vec<BoundRow>,
    pub exact: Option<Vec<f64>>,
}

impl EnclosureReport {
    pub fn verify(&self) -> std::result::Result<(), Error> {
        match find_inversion(&self.rows) {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Indices (1-based) whose bounds fail to contain the known eigenvalue.
    pub fn direction_violations(&self) -> Vec<usize> {
        let Some(exact) = &self.exact else { return Vec::new() };
        self.rows
            .iter()
            .zip(exact)
            .filter(|(r, &l)| {
                r.lower > l + INVERSION_SLACK
                    || [r.upper_lowest, r.upper_higher]
                        .into_iter()
                        .flatten()
                        .any(|u| u < l - INVERSION_SLACK)
            })
            .map(|(r, _)| r.j)
            .collect()
    }
}
