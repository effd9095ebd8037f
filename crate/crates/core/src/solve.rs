//! Sparse Cholesky solves, the smallest eigenpairs of a sparse SPD pencil,
//! and small dense generalized eigenproblems.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{dot, SymSparseMatrix};
use crate::elements::{ElementKind, FieldVector};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 42;

/// Sparse `LLᵀ` factor of an SPD matrix, kept with the matrix for iterative
/// refinement.
pub struct CholeskyFactor {
    a: SymSparseMatrix,
    llt: Llt<usize, f64>,
}

impl std::fmt::Debug for CholeskyFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CholeskyFactor").field("dim", &self.a.dim()).finish()
    }
}

impl CholeskyFactor {
    pub fn new(a: &SymSparseMatrix) -> Result<CholeskyFactor> {
        let n = a.dim();
        let t: Vec<_> = a.upper_entries().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let sp = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let llt = sp.sp_cholesky(Side::Upper).map_err(|e| match e {
            faer::sparse::linalg::LltError::Numeric(
                faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index },
            ) => Error::NotPositiveDefinite { pivot: index },
            other => Error::Factorization(format!("{other:?}")),
        })?;
        Ok(CholeskyFactor { a: a.clone(), llt })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    fn raw_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = self.llt.solve(&b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solves `A x = rhs`, refining until the relative residual stops improving.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = self.raw_solve(rhs);
        let bn = norm(rhs);
        if bn == 0.0 {
            return x;
        }
        let mut res = residual(&self.a, &x, rhs);
        let mut rn = norm(&res);
        for _ in 0..3 {
            if rn <= 1e-14 * bn {
                break;
            }
            let dx = self.raw_solve(&res);
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let tres = residual(&self.a, &trial, rhs);
            let tn = norm(&tres);
            if tn >= rn {
                break;
            }
            x = trial;
            res = tres;
            rn = tn;
        }
        x
    }
}

fn residual(a: &SymSparseMatrix, x: &[f64], rhs: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x);
    rhs.iter().zip(&ax).map(|(b, v)| b - v).collect()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn solve_spd(a: &SymSparseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: rhs.len(),
        });
    }
    Ok(CholeskyFactor::new(a)?.solve(rhs))
}

/// Smallest eigenpairs of `A x = λ B x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    /// Set when the vectors are coefficients over the free DOFs of a space.
    pub kind: Option<ElementKind>,
    pub eigenvalues: Vec<f64>,
    /// B-orthonormal, largest-magnitude component positive.
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn field(&self, j: usize) -> Option<FieldVector> {
        self.kind.map(|k| FieldVector::new(k, self.eigenvectors[j].clone()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigOptions {
    pub tol: f64,
    pub seed: u64,
    /// Block size; defaults to `m + 2`.
    pub block: Option<usize>,
    /// Cap on block expansion steps.
    pub max_steps: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
            block: None,
            max_steps: 400,
        }
    }
}

pub fn eigs_smallest(a: &SymSparseMatrix, b: &SymSparseMatrix, m: usize, tol: f64) -> Result<EigenResult> {
    eigs_smallest_with(
        a,
        b,
        m,
        &EigOptions {
            tol,
            ..EigOptions::default()
        },
    )
}

/// Block shift-invert Lanczos at shift zero with full B-orthogonalization and
/// restarts on the best Ritz vectors.
pub fn eigs_smallest_with(a: &SymSparseMatrix, b: &SymSparseMatrix, m: usize, opts: &EigOptions) -> Result<EigenResult> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.dim(),
        });
    }
    if m == 0 || m > n {
        return Err(Error::TooManyEigenpairs { requested: m, dim: n });
    }
    let chol = CholeskyFactor::new(a)?;
    let p = opts.block.unwrap_or(m + 2).clamp(1, n);
    let max_basis = n.min((6 * p).max(40)).max(m + p).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis = Basis::new(n);

    let mut block = random_block(&mut rng, n, p);
    block = basis.extend(a, b, block);
    let mut steps = 0;
    let mut best: Vec<f64> = vec![f64::INFINITY; m];
    loop {
        let ritz = basis.rayleigh_ritz(m.min(basis.len()))?;
        if ritz.values.len() >= m {
            best = ritz.residuals.clone();
            let done = ritz.residuals.iter().all(|&r| r <= opts.tol) || basis.len() == n;
            if done {
                return Ok(finish(ritz, steps, opts.seed));
            }
        }
        if steps >= opts.max_steps {
            return Err(Error::NoConvergence {
                iterations: steps,
                residuals: best,
            });
        }
        steps += 1;
        if basis.len() + p > max_basis {
            let keep = (m + p).min(basis.len());
            let full = basis.rayleigh_ritz(keep)?;
            basis.replace(&full.coords);
            block = basis.q[..p.min(basis.len())].to_vec();
        }
        block = block.iter().map(|v| chol.solve(&b.matvec(v))).collect();
        block = basis.extend(a, b, block);
        if block.is_empty() {
            // invariant subspace: continue from fresh random directions
            let fresh = random_block(&mut rng, n, p.min(n - basis.len()));
            block = basis.extend(a, b, fresh);
        }
    }
}

fn random_block(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..p).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

struct Ritz {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    // coordinates of the Ritz vectors in the basis
    coords: Vec<Vec<f64>>,
}

fn finish(ritz: Ritz, iterations: usize, seed: u64) -> EigenResult {
    let vectors = ritz.vectors.into_iter().map(normalize_sign).collect();
    EigenResult {
        kind: None,
        eigenvalues: ritz.values,
        eigenvectors: vectors,
        residuals: ritz.residuals,
        iterations,
        seed,
    }
}

/// Flips `x` so that its first component of largest magnitude is positive.
pub fn normalize_sign(mut x: Vec<f64>) -> Vec<f64> {
    let mut k = 0;
    for i in 0..x.len() {
        if x[i].abs() > x[k].abs() {
            k = i;
        }
    }
    if x.get(k).is_some_and(|&v| v < 0.0) {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    x
}

// B-orthonormal basis with cached A·q and B·q.
struct Basis {
    n: usize,
    q: Vec<Vec<f64>>,
    aq: Vec<Vec<f64>>,
    bq: Vec<Vec<f64>>,
}

impl Basis {
    fn new(n: usize) -> Basis {
        Basis {
            n,
            q: Vec::new(),
            aq: Vec::new(),
            bq: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.q.len()
    }

    /// B-orthogonalizes the block against the basis and itself, appends the
    /// surviving directions and returns them.
    fn extend(&mut self, a: &SymSparseMatrix, b: &SymSparseMatrix, block: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let mut added = Vec::new();
        for mut w in block {
            if self.len() == self.n {
                break;
            }
            let mut bw = b.matvec(&w);
            let start = dot(&w, &bw).max(0.0).sqrt();
            if start == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for k in 0..self.q.len() {
                    let c = dot(&self.bq[k], &w);
                    axpy(-c, &self.q[k], &mut w);
                }
                bw = b.matvec(&w);
            }
            let nrm = dot(&w, &bw).max(0.0).sqrt();
            if nrm <= 1e-10 * start {
                continue;
            }
            w.iter_mut().for_each(|v| *v /= nrm);
            bw.iter_mut().for_each(|v| *v /= nrm);
            self.aq.push(a.matvec(&w));
            self.bq.push(bw);
            self.q.push(w.clone());
            added.push(w);
        }
        added
    }

    fn combine(vs: &[Vec<f64>], y: &[f64], n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (v, &c) in vs.iter().zip(y) {
            axpy(c, v, &mut x);
        }
        x
    }

    /// Smallest `k` Ritz pairs of the projected problem.
    fn rayleigh_ritz(&self, k: usize) -> Result<Ritz> {
        let d = self.len();
        let h = Mat::from_fn(d, d, |i, j| 0.5 * (dot(&self.q[i], &self.aq[j]) + dot(&self.q[j], &self.aq[i])));
        let evd = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let (s, u) = (evd.S(), evd.U());
        let mut out = Ritz {
            values: Vec::new(),
            vectors: Vec::new(),
            residuals: Vec::new(),
            coords: Vec::new(),
        };
        for j in 0..k.min(d) {
            let theta = s[j];
            let y: Vec<f64> = (0..d).map(|i| u[(i, j)]).collect();
            let x = Basis::combine(&self.q, &y, self.n);
            let ax = Basis::combine(&self.aq, &y, self.n);
            let bx = Basis::combine(&self.bq, &y, self.n);
            let r: Vec<f64> = ax.iter().zip(&bx).map(|(p, q)| p - theta * q).collect();
            out.residuals.push(norm(&r) / norm(&x));
            out.values.push(theta);
            out.vectors.push(x);
            out.coords.push(y);
        }
        Ok(out)
    }

    /// Replaces the basis by the given combinations of its vectors.
    fn replace(&mut self, coords: &[Vec<f64>]) {
        let q = coords.iter().map(|y| Basis::combine(&self.q, y, self.n)).collect();
        let aq = coords.iter().map(|y| Basis::combine(&self.aq, y, self.n)).collect();
        let bq = coords.iter().map(|y| Basis::combine(&self.bq, y, self.n)).collect();
        self.q = q;
        self.aq = aq;
        self.bq = bq;
    }
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

/// All eigenpairs of a small dense pencil.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseEig {
    pub values: Vec<f64>,
    /// B-orthonormal, one per value.
    pub vectors: Vec<Vec<f64>>,
    /// Number of directions kept after dropping the near-null space of B.
    pub reduced_dim: usize,
}

/// Solves `A x = λ B x` for dense symmetric row-major `dim × dim` matrices.
/// Directions where `B` has eigenvalues below `1e-12 · max` are dropped.
pub fn dense_gen_eig(a: &[f64], b: &[f64], dim: usize) -> Result<DenseEig> {
    if a.len() != dim * dim || b.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: a.len().min(b.len()),
        });
    }
    let bm = Mat::from_fn(dim, dim, |i, j| 0.5 * (b[i * dim + j] + b[j * dim + i]));
    let be = bm
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let smax = (0..dim).map(|i| be.S()[i]).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..dim).filter(|&i| be.S()[i] > 1e-12 * smax).collect();
    let r = keep.len();
    if r == 0 {
        return Err(Error::ZeroField);
    }
    // W = U_keep S^{-1/2}
    let w = Mat::from_fn(dim, r, |i, k| be.U()[(i, keep[k])] / be.S()[keep[k]].sqrt());
    let am = Mat::from_fn(dim, dim, |i, j| 0.5 * (a[i * dim + j] + a[j * dim + i]));
    let c = w.transpose() * &am * &w;
    let c = Mat::from_fn(r, r, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let ce = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let x = &w * ce.U();
    Ok(DenseEig {
        values: (0..r).map(|k| ce.S()[k]).collect(),
        vectors: (0..r)
            .map(|k| normalize_sign((0..dim).map(|i| x[(i, k)]).collect()))
            .collect(),
        reduced_dim: r,
    })
}
