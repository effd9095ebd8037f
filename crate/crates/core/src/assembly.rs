//! Global stiffness and mass matrices over the free DOFs, and the mixed mass
//! matrix coupling two spaces on the same mesh.

use std::io::Write;

use rayon::prelude::*;

use crate::elements::{cell_bases, local_matrices_of, local_mixed_mass, DofLayout, ElementKind, FeSpace};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Symmetric matrix storing the upper triangle (diagonal included) in
/// compressed rows with ascending column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SymSparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymSparseMatrix {
    /// Builds from `(row, col, value)` triplets in any triangle; duplicates are
    /// summed in input order after a stable sort.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> SymSparseMatrix {
        let mut t: Vec<(usize, usize, f64)> = triplets
            .iter()
            .map(|&(i, j, v)| if i <= j { (i, j, v) } else { (j, i, v) })
            .collect();
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (i, j, v) in t {
            assert!(j < n, "triplet index out of range");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SymSparseMatrix { n, row_ptr, col_idx, values }
    }

    pub fn from_dense(n: usize, dense: &[f64]) -> SymSparseMatrix {
        let t: Vec<_> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .filter(|&(i, j)| dense[i * n + j] != 0.0)
            .map(|(i, j)| (i, j, dense[i * n + j]))
            .collect();
        SymSparseMatrix::from_triplets(n, &t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored (upper) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Upper-triangle entries `(i, j, v)` with `i <= j`, row by row.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (j, v) = (self.col_idx[k], self.values[k]);
                acc += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
            y[i] += acc;
        }
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for (i, j, v) in self.upper_entries() {
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
        d
    }

    /// Coordinate dump of the full symmetric matrix, one `row col value` line
    /// per entry with 17 significant digits, 0-based indices.
    pub fn write_coo<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "% {} {} {}", self.n, self.n, 2 * self.nnz() - self.diagonal_nnz())?;
        for (i, j, v) in self.upper_entries() {
            writeln!(w, "{i} {j} {v:.16e}")?;
            if i != j {
                writeln!(w, "{j} {i} {v:.16e}")?;
            }
        }
        Ok(())
    }

    fn diagonal_nnz(&self) -> usize {
        self.upper_entries().filter(|&(i, j, _)| i == j).count()
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Stiffness and mass over the free DOFs of a space.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub space: FeSpace,
    pub a: SymSparseMatrix,
    pub b: SymSparseMatrix,
}

impl Assembled {
    pub fn kind(&self) -> ElementKind {
        self.space.kind()
    }
}

pub fn assemble(mesh: &Mesh, kind: ElementKind) -> Result<Assembled> {
    let order: Vec<usize> = (0..mesh.num_cells()).collect();
    assemble_in_order(mesh, kind, &order)
}

/// As [`assemble`] with cell contributions accumulated in the given order.
pub fn assemble_in_order(mesh: &Mesh, kind: ElementKind, order: &[usize]) -> Result<Assembled> {
    let space = FeSpace::new(mesh, kind)?;
    let index = |g: usize| space.free_index(g);
    let (a, b) = assemble_with(mesh, kind, order, index, space.num_free())?;
    Ok(Assembled { space, a, b })
}

/// Stiffness and mass over all DOFs, boundary included.
pub fn assemble_unconstrained(mesh: &Mesh, kind: ElementKind) -> Result<(SymSparseMatrix, SymSparseMatrix)> {
    let layout = DofLayout::new(mesh, kind)?;
    let order: Vec<usize> = (0..mesh.num_cells()).collect();
    assemble_with(mesh, kind, &order, Some, layout.total())
}

fn assemble_with<F: Fn(usize) -> Option<usize>>(
    mesh: &Mesh,
    kind: ElementKind,
    order: &[usize],
    index: F,
    n: usize,
) -> Result<(SymSparseMatrix, SymSparseMatrix)> {
    let layout = DofLayout::new(mesh, kind)?;
    let bases = cell_bases(mesh, kind)?;
    let locals: Vec<_> = order
        .par_iter()
        .map(|&c| (layout.dof_map(mesh, c), local_matrices_of(&bases[c])))
        .collect();
    let mut ta = Vec::new();
    let mut tb = Vec::new();
    for (dofs, lm) in &locals {
        let d = lm.dim;
        for (i, &gi) in dofs.iter().enumerate() {
            let Some(fi) = index(gi) else { continue };
            for (j, &gj) in dofs.iter().enumerate() {
                let Some(fj) = index(gj) else { continue };
                if fi <= fj {
                    ta.push((fi, fj, lm.stiffness[i * d + j]));
                    tb.push((fi, fj, lm.mass[i * d + j]));
                }
            }
        }
    }
    Ok((SymSparseMatrix::from_triplets(n, &ta), SymSparseMatrix::from_triplets(n, &tb)))
}

/// Rectangular matrix `M[i][j] = b(φ_i, ψ_j)` between the free DOFs of a row
/// space and a column space, in compressed rows.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedMass {
    pub row_kind: ElementKind,
    pub col_kind: ElementKind,
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl MixedMass {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.values[k] * x[self.col_idx[k]])
                    .sum()
            })
            .collect()
    }

    pub fn transpose_matvec(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.ncols];
        for (i, yi) in y.iter().enumerate().take(self.nrows) {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                x[self.col_idx[k]] += self.values[k] * yi;
            }
        }
        x
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[i * self.ncols + self.col_idx[k]] = self.values[k];
            }
        }
        d
    }
}

/// Mixed mass between the free DOFs of `c_kind` (rows) and `nc_kind` (columns).
/// Products are integrated cellwise, so either space may be discontinuous.
pub fn assemble_mixed_mass(mesh: &Mesh, c_kind: ElementKind, nc_kind: ElementKind) -> Result<MixedMass> {
    let rs = FeSpace::new(mesh, c_kind)?;
    let cs = FeSpace::new(mesh, nc_kind)?;
    mixed_with(mesh, c_kind, nc_kind, |g| rs.free_index(g), |g| cs.free_index(g), rs.num_free(), cs.num_free())
}

/// Mixed mass over all DOFs of both spaces, boundary included.
pub fn assemble_mixed_mass_unconstrained(
    mesh: &Mesh,
    c_kind: ElementKind,
    nc_kind: ElementKind,
) -> Result<MixedMass> {
    let nr = DofLayout::new(mesh, c_kind)?.total();
    let nc = DofLayout::new(mesh, nc_kind)?.total();
    mixed_with(mesh, c_kind, nc_kind, Some, Some, nr, nc)
}

fn mixed_with<R, C>(
    mesh: &Mesh,
    row_kind: ElementKind,
    col_kind: ElementKind,
    rindex: R,
    cindex: C,
    nrows: usize,
    ncols: usize,
) -> Result<MixedMass>
where
    R: Fn(usize) -> Option<usize>,
    C: Fn(usize) -> Option<usize>,
{
    if row_kind.cell_kind() != col_kind.cell_kind() {
        return Err(Error::KindMismatch {
            kind: col_kind,
            cell_kind: row_kind.cell_kind(),
        });
    }
    let rl = DofLayout::new(mesh, row_kind)?;
    let cl = DofLayout::new(mesh, col_kind)?;
    let rb = cell_bases(mesh, row_kind)?;
    let cb = cell_bases(mesh, col_kind)?;
    let locals: Vec<_> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| (rl.dof_map(mesh, c), cl.dof_map(mesh, c), local_mixed_mass(&rb[c], &cb[c])))
        .collect();
    let mut t = Vec::new();
    for (rd, cd, m) in &locals {
        let w = cd.len();
        for (i, &gi) in rd.iter().enumerate() {
            let Some(fi) = rindex(gi) else { continue };
            for (j, &gj) in cd.iter().enumerate() {
                let Some(fj) = cindex(gj) else { continue };
                t.push((fi, fj, m[i * w + j]));
            }
        }
    }
    t.sort_by_key(|&(i, j, _)| (i, j));
    let mut row_ptr = vec![0; nrows + 1];
    let mut col_idx = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut last = None;
    for (i, j, v) in t {
        if last == Some((i, j)) {
            *values.last_mut().unwrap() += v;
        } else {
            col_idx.push(j);
            values.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j));
        }
    }
    for i in 0..nrows {
        row_ptr[i + 1] += row_ptr[i];
    }
    Ok(MixedMass {
        row_kind,
        col_kind,
        nrows,
        ncols,
        row_ptr,
        col_idx,
        values,
    })
}
