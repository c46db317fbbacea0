//! Dense complex linear algebra used by every other module.
//!
//! [`CMatrix`] is a square, row-major, double-precision complex matrix.
//! Products and eigendecompositions are delegated to `faer` through
//! zero-copy views; everything else is plain loops over the storage.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par, Side};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Maximum tolerated `|A - A^dagger|` entry before decomposition.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Square complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = *v;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries, rejecting non-square or
    /// non-finite input.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("entries must be finite".into()));
        }
        Ok(Self { dim, data })
    }

    /// Convenience constructor from nested rows, used mostly in tests.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidMatrix("rows must form a square matrix".into()));
        }
        Self::from_row_major(dim, rows.concat())
    }

    pub fn from_faer(m: MatRef<'_, C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "CMatrix must be square");
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_faer(&self) -> MatRef<'_, C64> {
        MatRef::from_row_major_slice(&self.data, self.dim, self.dim)
    }

    pub fn as_faer_mut(&mut self) -> MatMut<'_, C64> {
        MatMut::from_row_major_slice_mut(&mut self.data, self.dim, self.dim)
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.dim);
        matmul(
            out.as_faer_mut(),
            Accum::Replace,
            self.as_faer(),
            rhs.as_faer(),
            ONE,
            Par::rayon(0),
        );
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A^dagger|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `Tr[self * other]` without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> C64 {
        assert_eq!(self.dim, other.dim, "trace_product dimension mismatch");
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.data[i * n + j] * other.data[j * n + i];
            }
        }
        acc
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> CMatrix {
        assert_eq!(self.dim, other.dim, "elementwise dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.dim && j < self.dim, "index out of bounds");
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.dim && j < self.dim, "index out of bounds");
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product; entry `(i*n + k, j*n + l)` is `a[i,j] * b[k,l]`
/// with `n = dim(b)`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (m, n) = (a.dim, b.dim);
    let dim = m * n;
    let mut out = CMatrix::zeros(dim);
    for i in 0..m {
        for j in 0..m {
            let aij = a.data[i * m + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..n {
                let row = (i * n + k) * dim + j * n;
                for l in 0..n {
                    out.data[row + l] = aij * b.data[k * n + l];
                }
            }
        }
    }
    out
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    &a.matmul(b) - &b.matmul(a)
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and
/// orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Q diag(lambda) Q^dagger`.
    pub fn reconstruct(&self) -> CMatrix {
        spectral_function(self, |l| C64::new(l, 0.0))
    }

    /// `max |Q^dagger Q - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let q = &self.eigenvectors;
        let mut gram = CMatrix::zeros(q.dim);
        matmul(
            gram.as_faer_mut(),
            Accum::Replace,
            q.as_faer().adjoint(),
            q.as_faer(),
            ONE,
            Par::rayon(0),
        );
        gram.max_abs_diff(&CMatrix::identity(q.dim))
    }
}

/// One invariant block of a Hermitian matrix together with its eigenpairs.
///
/// `vectors` has one column per eigenvalue, expressed in the coordinates
/// `indices` of the full space.
#[derive(Clone, Debug)]
pub struct EigenBlock {
    pub indices: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub vectors: Mat<C64>,
}

impl EigenBlock {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Eigendecomposition split along the connected components of the
/// matrix's sparsity graph.
///
/// Components are ordered by their smallest basis index; eigenvalues are
/// ascending within each block.
#[derive(Clone, Debug)]
pub struct BlockEigen {
    dim: usize,
    blocks: Vec<EigenBlock>,
}

impl BlockEigen {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[EigenBlock] {
        &self.blocks
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// Flattens into a dense [`HermitianEigen`] with globally sorted
    /// eigenvalues.
    pub fn to_dense(&self) -> HermitianEigen {
        let mut pairs: Vec<(f64, usize, usize)> = self
            .blocks
            .iter()
            .enumerate()
            .flat_map(|(b, blk)| blk.eigenvalues.iter().enumerate().map(move |(c, &l)| (l, b, c)))
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

        let mut q = CMatrix::zeros(self.dim);
        for (col, &(_, b, c)) in pairs.iter().enumerate() {
            let blk = &self.blocks[b];
            for (r, &row) in blk.indices.iter().enumerate() {
                q[(row, col)] = blk.vectors[(r, c)];
            }
        }
        HermitianEigen {
            eigenvalues: pairs.iter().map(|p| p.0).collect(),
            eigenvectors: q,
        }
    }
}

fn check_hermitian(a: &CMatrix) -> Result<()> {
    let deviation = a.hermiticity_defect();
    if deviation > HERMITIAN_TOL || !deviation.is_finite() {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Connected components of the graph with an edge wherever `a[i,j] != 0`.
fn invariant_blocks(a: &CMatrix) -> Vec<Vec<usize>> {
    let n = a.dim;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if a.data[i * n + j] != ZERO || a.data[j * n + i] != ZERO {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        if label[root] == usize::MAX {
            label[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[label[root]].push(i);
    }
    blocks
}

/// Eigendecomposes `a` block by block.
///
/// The matrix is symmetrized as `(A + A^dagger)/2` first. Fails with
/// [`Error::NotHermitian`] if `max |A - A^dagger| > 1e-10`.
pub fn block_eigendecompose(a: &CMatrix) -> Result<BlockEigen> {
    check_hermitian(a)?;
    let n = a.dim;
    let sym = CMatrix::from_fn(n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let blocks = invariant_blocks(&sym)
        .into_iter()
        .map(|indices| {
            let sub = Mat::<C64>::from_fn(indices.len(), indices.len(), |r, c| {
                sym[(indices[r], indices[c])]
            });
            let evd = sub
                .self_adjoint_eigen(Side::Lower)
                .map_err(|_| Error::EigenFailed)?;
            let s = evd.S();
            let mut order: Vec<usize> = (0..indices.len()).collect();
            order.sort_by(|&x, &y| s[x].re.total_cmp(&s[y].re));
            let u = evd.U();
            let vectors = Mat::<C64>::from_fn(indices.len(), indices.len(), |r, c| u[(r, order[c])]);
            let eigenvalues = order.iter().map(|&c| s[c].re).collect();
            Ok(EigenBlock {
                indices,
                eigenvalues,
                vectors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockEigen { dim: n, blocks })
}

/// Dense Hermitian eigendecomposition with ascending eigenvalues.
///
/// Invariant blocks of the sparsity pattern are diagonalized separately,
/// which is exact and much cheaper for symmetry-sectored Hamiltonians.
pub fn hermitian_eigendecompose(a: &CMatrix) -> Result<HermitianEigen> {
    Ok(block_eigendecompose(a)?.to_dense())
}

/// `Q diag(f(lambda)) Q^dagger`.
pub fn spectral_function(e: &HermitianEigen, f: impl Fn(f64) -> C64) -> CMatrix {
    let q = &e.eigenvectors;
    let n = q.dim;
    let weights: Vec<C64> = e.eigenvalues.iter().map(|&l| f(l)).collect();
    let scaled = CMatrix::from_fn(n, |i, j| q[(i, j)] * weights[j]);
    let mut out = CMatrix::zeros(n);
    matmul(
        out.as_faer_mut(),
        Accum::Replace,
        scaled.as_faer(),
        q.as_faer().adjoint(),
        ONE,
        Par::rayon(0),
    );
    out
}
