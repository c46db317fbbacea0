//! Scrambling evaluation in the Hamiltonian's eigenbasis.
//!
//! The spin-star Hamiltonian conserves total `S_z`, so its eigenvectors
//! split into invariant blocks. Operators are rotated into this block basis
//! once; afterwards `W(t)` is an entrywise phase rotation
//! `W(t)_ij = exp(i (l_i - l_j) t) W_ij` of the stored blocks.
//!
//! With Hermitian `W`, `V` and `P = V W(t)` we have `A = P` and `B = P^dagger`.
//! Thermal states are diagonal in this basis, so one block-sparse product
//! per time point gives every moment. Pure states only need four block
//! matrix-vector products.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use crate::error::{Error, Result};
use crate::scrambling::MomentSet;
use crate::states::{boltzmann_weights, polarized_index, StatePrep};
use crate::tensor::{block_eigendecompose, BlockEigen, CMatrix, C64, HERMITIAN_TOL, ONE, ZERO};

/// Block eigendecomposition of a Hamiltonian with eigenvalues laid out in
/// block order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigen: BlockEigen,
    offsets: Vec<usize>,
    energies: Vec<f64>,
}

impl Spectrum {
    pub fn new(h: &CMatrix) -> Result<Self> {
        Ok(Self::from_blocks(block_eigendecompose(h)?))
    }

    pub fn from_blocks(eigen: BlockEigen) -> Self {
        let mut offsets = vec![0];
        let mut energies = Vec::with_capacity(eigen.dim());
        for b in eigen.blocks() {
            offsets.push(offsets.last().unwrap() + b.len());
            energies.extend_from_slice(&b.eigenvalues);
        }
        Self {
            eigen,
            offsets,
            energies,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    pub fn n_blocks(&self) -> usize {
        self.eigen.blocks().len()
    }

    pub fn block_eigen(&self) -> &BlockEigen {
        &self.eigen
    }

    /// Eigenvalues in block order (ascending within each block only).
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        self.offsets[b]..self.offsets[b + 1]
    }

    /// `Q^dagger o Q`, keeping only block pairs where `o` is nonzero.
    pub fn rotate(&self, o: &CMatrix) -> Result<BlockOperator> {
        if o.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: o.dim(),
            });
        }
        let blocks = self.eigen.blocks();
        let mut entries = Vec::new();
        for (r, br) in blocks.iter().enumerate() {
            for (c, bc) in blocks.iter().enumerate() {
                let sub = Mat::<C64>::from_fn(br.len(), bc.len(), |i, j| o[(br.indices[i], bc.indices[j])]);
                if !sub.col_iter().any(|col| col.iter().any(|z| *z != ZERO)) {
                    continue;
                }
                let mut tmp = Mat::<C64>::zeros(br.len(), bc.len());
                matmul(tmp.as_mut(), Accum::Replace, br.vectors.adjoint(), sub.as_ref(), ONE, Par::rayon(0));
                let mut data = Mat::<C64>::zeros(br.len(), bc.len());
                matmul(data.as_mut(), Accum::Replace, tmp.as_ref(), bc.vectors.as_ref(), ONE, Par::rayon(0));
                entries.push(OpBlock { row: r, col: c, data });
            }
        }
        Ok(BlockOperator { entries })
    }

    /// `Q^dagger psi` in block order.
    pub fn rotate_vector(&self, psi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        let mut out = vec![ZERO; self.dim()];
        for (b, blk) in self.eigen.blocks().iter().enumerate() {
            let off = self.offsets[b];
            for col in 0..blk.len() {
                let mut acc = ZERO;
                for (r, &row) in blk.indices.iter().enumerate() {
                    acc += blk.vectors[(r, col)].conj() * psi[row];
                }
                out[off + col] = acc;
            }
        }
        Ok(out)
    }

    /// Largest `|U_b^dagger U_b - I|` over the blocks of `exp(-iHt)`.
    pub fn propagator_unitarity_defect(&self, t: f64) -> f64 {
        let mut worst = 0.0f64;
        for blk in self.eigen.blocks() {
            let n = blk.len();
            let scaled = Mat::<C64>::from_fn(n, n, |i, j| {
                blk.vectors[(i, j)] * C64::from_polar(1.0, -blk.eigenvalues[j] * t)
            });
            let mut u = Mat::<C64>::zeros(n, n);
            matmul(u.as_mut(), Accum::Replace, scaled.as_ref(), blk.vectors.adjoint(), ONE, Par::rayon(0));
            let mut gram = Mat::<C64>::zeros(n, n);
            matmul(gram.as_mut(), Accum::Replace, u.adjoint(), u.as_ref(), ONE, Par::rayon(0));
            for j in 0..n {
                for i in 0..n {
                    let target = if i == j { ONE } else { ZERO };
                    worst = worst.max((gram[(i, j)] - target).norm());
                }
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
struct OpBlock {
    row: usize,
    col: usize,
    data: Mat<C64>,
}

/// An operator in the block eigenbasis, stored as its nonzero block pairs.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    entries: Vec<OpBlock>,
}

impl BlockOperator {
    pub fn n_entries(&self) -> usize {
        self.entries.len()
    }

    /// Stored complex entries.
    pub fn nnz(&self) -> usize {
        self.entries.iter().map(|e| e.data.nrows() * e.data.ncols()).sum()
    }

    /// `y = M x` on block-ordered vectors; blocks of `x` that are entirely
    /// zero are skipped.
    fn apply(&self, sp: &Spectrum, x: &[C64], y: &mut [C64]) {
        y.fill(ZERO);
        for e in &self.entries {
            let xs = &x[sp.block_range(e.col)];
            if xs.iter().all(|z| *z == ZERO) {
                continue;
            }
            let ys = &mut y[sp.block_range(e.row)];
            for (j, &xj) in xs.iter().enumerate() {
                if xj == ZERO {
                    continue;
                }
                let col = e.data.col(j);
                for (yi, &m) in ys.iter_mut().zip(col.iter()) {
                    *yi += m * xj;
                }
            }
        }
    }
}

/// Moments and both scrambling values at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointEval {
    pub t: f64,
    pub moments: MomentSet,
    /// `Tr[rho K^dagger K]` from the commutator itself.
    pub c_commutator: f64,
    /// `<A^dag A> + <B^dag B> - 2 Re <A^dag B>`.
    pub c_moments: f64,
    /// `<A A>` with `A = V W(t)`.
    pub otoc: C64,
}

#[derive(Clone, Debug)]
enum StateRep {
    Diagonal(Vec<f64>),
    Vector(Vec<C64>),
}

/// One output block of `P = V W(t)` and the `(v, w)` entry pairs summed
/// into it.
#[derive(Clone, Debug)]
struct ProductBlock {
    row: usize,
    col: usize,
    terms: Vec<(usize, usize)>,
}

/// Evaluates the scrambling moments of a fixed `(W, V, rho)` at any time.
#[derive(Clone, Debug)]
pub struct ScramblingEngine<'a> {
    spectrum: &'a Spectrum,
    w: BlockOperator,
    v: BlockOperator,
    state: StateRep,
    plan: Vec<ProductBlock>,
    /// For each block `k`, the blocks `c` with `P[c,k]` or `P[k,c]` nonzero.
    partners: Vec<Vec<usize>>,
}

fn check_operator(o: &CMatrix) -> Result<()> {
    let deviation = o.hermiticity_defect();
    if deviation > HERMITIAN_TOL || !deviation.is_finite() {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

impl<'a> ScramblingEngine<'a> {
    /// `w0` and `v0` must be Hermitian.
    pub fn new(spectrum: &'a Spectrum, prep: &StatePrep, w0: &CMatrix, v0: &CMatrix) -> Result<Self> {
        prep.validate()?;
        let state = match *prep {
            StatePrep::Pure => {
                let d = spectrum.dim();
                if !d.is_power_of_two() || d < 4 {
                    return Err(Error::InvalidState(format!("dimension {d} is not a spin-star space")));
                }
                let mut psi = vec![ZERO; d];
                psi[polarized_index(d.trailing_zeros() as usize - 1)] = ONE;
                StateRep::Vector(spectrum.rotate_vector(&psi)?)
            }
            StatePrep::Thermal { beta } => StateRep::Diagonal(boltzmann_weights(spectrum.energies(), beta)),
        };
        Self::build(spectrum, state, w0, v0)
    }

    /// Engine for the pure state `|psi>` (normalized by the caller).
    pub fn with_state_vector(spectrum: &'a Spectrum, psi: &[C64], w0: &CMatrix, v0: &CMatrix) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state norm^2 is {norm}")));
        }
        let x = spectrum.rotate_vector(psi)?;
        Self::build(spectrum, StateRep::Vector(x), w0, v0)
    }

    fn build(spectrum: &'a Spectrum, state: StateRep, w0: &CMatrix, v0: &CMatrix) -> Result<Self> {
        check_operator(w0)?;
        check_operator(v0)?;
        let w = spectrum.rotate(w0)?;
        let v = spectrum.rotate(v0)?;
        let nb = spectrum.n_blocks();

        let mut plan: Vec<ProductBlock> = Vec::new();
        for (vi, ve) in v.entries.iter().enumerate() {
            for (wi, we) in w.entries.iter().enumerate() {
                if ve.col != we.row {
                    continue;
                }
                match plan.iter_mut().find(|p| p.row == ve.row && p.col == we.col) {
                    Some(p) => p.terms.push((vi, wi)),
                    None => plan.push(ProductBlock {
                        row: ve.row,
                        col: we.col,
                        terms: vec![(vi, wi)],
                    }),
                }
            }
        }
        plan.sort_by_key(|p| (p.col, p.row));

        let mut linked = vec![vec![false; nb]; nb];
        for p in &plan {
            linked[p.row][p.col] = true;
            linked[p.col][p.row] = true;
        }
        let partners = (0..nb)
            .map(|k| (0..nb).filter(|&c| linked[k][c]).collect())
            .collect();

        Ok(Self {
            spectrum,
            w,
            v,
            state,
            plan,
            partners,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
    }

    fn phases(&self, t: f64) -> Vec<C64> {
        self.spectrum
            .energies
            .iter()
            .map(|&l| C64::from_polar(1.0, l * t))
            .collect()
    }

    pub fn evaluate(&self, t: f64) -> PointEval {
        let f = self.phases(t);
        match &self.state {
            StateRep::Vector(x) => self.evaluate_vector(t, &f, x),
            StateRep::Diagonal(p) => self.evaluate_diagonal(t, &f, p),
        }
    }

    /// `f ⊙ (W (conj(f) ⊙ x))`, which is `W(t) x`.
    fn apply_wt(&self, f: &[C64], x: &[C64], scratch: &mut [C64], out: &mut [C64]) {
        let g: Vec<C64> = x.iter().zip(f).map(|(xi, fi)| fi.conj() * xi).collect();
        self.w.apply(self.spectrum, &g, scratch);
        for ((o, s), fi) in out.iter_mut().zip(scratch.iter()).zip(f) {
            *o = fi * s;
        }
    }

    fn evaluate_vector(&self, t: f64, f: &[C64], x: &[C64]) -> PointEval {
        let d = x.len();
        let mut scratch = vec![ZERO; d];
        let mut wt_x = vec![ZERO; d];
        self.apply_wt(f, x, &mut scratch, &mut wt_x);
        let mut a = vec![ZERO; d];
        self.v.apply(self.spectrum, &wt_x, &mut a);

        let mut v_x = vec![ZERO; d];
        self.v.apply(self.spectrum, x, &mut v_x);
        let mut b = vec![ZERO; d];
        self.apply_wt(f, &v_x, &mut scratch, &mut b);

        let dot = |u: &[C64], w: &[C64]| -> C64 { u.iter().zip(w).map(|(ui, wi)| ui.conj() * wi).sum() };
        let mean_a = dot(x, &a);
        let mean_b = dot(x, &b);
        let mean_amb = mean_a - mean_b;

        let (mut norm2_a, mut norm2_b, mut comm) = (0.0, 0.0, 0.0);
        let (mut da, mut db, mut dab) = (0.0, 0.0, 0.0);
        for i in 0..d {
            norm2_a += a[i].norm_sqr();
            norm2_b += b[i].norm_sqr();
            comm += (b[i] - a[i]).norm_sqr();
            da += (a[i] - mean_a * x[i]).norm_sqr();
            db += (b[i] - mean_b * x[i]).norm_sqr();
            dab += (a[i] - b[i] - mean_amb * x[i]).norm_sqr();
        }
        let cross = dot(&a, &b);
        let otoc = dot(&b, &a);
        self.assemble(t, mean_a, mean_b, norm2_a, norm2_b, cross, da, db, dab, comm, otoc)
    }

    fn evaluate_diagonal(&self, t: f64, f: &[C64], p: &[f64]) -> PointEval {
        let sp = self.spectrum;
        let d = sp.dim();
        let wt: Vec<Mat<C64>> = self
            .w
            .entries
            .iter()
            .map(|e| {
                let (fr, fc) = (&f[sp.block_range(e.row)], &f[sp.block_range(e.col)]);
                Mat::<C64>::from_fn(e.data.nrows(), e.data.ncols(), |i, j| fr[i] * e.data[(i, j)] * fc[j].conj())
            })
            .collect();

        let mut prod = Mat::<C64>::zeros(d, d);
        for pb in &self.plan {
            let (r, c) = (sp.block_range(pb.row), sp.block_range(pb.col));
            let mut dst = prod.as_mut().submatrix_mut(r.start, c.start, r.len(), c.len());
            for (n, &(vi, wi)) in pb.terms.iter().enumerate() {
                let accum = if n == 0 { Accum::Replace } else { Accum::Add };
                matmul(dst.as_mut(), accum, self.v.entries[vi].data.as_ref(), wt[wi].as_ref(), ONE, Par::Seq);
            }
        }
        let pm: MatRef<'_, C64> = prod.as_ref();

        let mean_a: C64 = (0..d).map(|k| pm[(k, k)] * p[k]).sum();
        let mean_b = mean_a.conj();
        let mean_amb = mean_a - mean_b;

        let (mut norm2_a, mut norm2_b, mut comm) = (0.0, 0.0, 0.0);
        let (mut da, mut db, mut dab) = (0.0, 0.0, 0.0);
        let mut otoc = ZERO;
        for bk in 0..sp.n_blocks() {
            for k in sp.block_range(bk) {
                let pk = p[k];
                if pk == 0.0 {
                    continue;
                }
                let (mut s_na, mut s_nb, mut s_comm) = (0.0, 0.0, 0.0);
                let (mut s_da, mut s_db, mut s_dab) = (0.0, 0.0, 0.0);
                let mut s_otoc = ZERO;
                for &bc in &self.partners[bk] {
                    for c in sp.block_range(bc) {
                        let x = pm[(c, k)];
                        let y = pm[(k, c)];
                        let o = x - y.conj();
                        s_na += x.norm_sqr();
                        s_nb += y.norm_sqr();
                        s_comm += o.norm_sqr();
                        s_otoc += x * y;
                        if c == k {
                            s_da += (x - mean_a).norm_sqr();
                            s_db += (y - mean_a).norm_sqr();
                            s_dab += (o - mean_amb).norm_sqr();
                        } else {
                            s_da += x.norm_sqr();
                            s_db += y.norm_sqr();
                            s_dab += o.norm_sqr();
                        }
                    }
                }
                // Columns with no structural partners still carry the
                // diagonal mean correction.
                if !self.partners[bk].contains(&bk) {
                    s_da += mean_a.norm_sqr();
                    s_db += mean_a.norm_sqr();
                    s_dab += mean_amb.norm_sqr();
                }
                norm2_a += pk * s_na;
                norm2_b += pk * s_nb;
                comm += pk * s_comm;
                otoc += s_otoc * pk;
                da += pk * s_da;
                db += pk * s_db;
                dab += pk * s_dab;
            }
        }
        self.assemble(t, mean_a, mean_b, norm2_a, norm2_b, otoc.conj(), da, db, dab, comm, otoc)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        &self,
        t: f64,
        mean_a: C64,
        mean_b: C64,
        norm2_a: f64,
        norm2_b: f64,
        cross: C64,
        var_a: f64,
        var_b: f64,
        var_amb: f64,
        comm: f64,
        otoc: C64,
    ) -> PointEval {
        let moments = MomentSet {
            mean_a,
            mean_b,
            norm2_a,
            norm2_b,
            cross,
            delta_a: var_a.max(0.0).sqrt(),
            delta_b: var_b.max(0.0).sqrt(),
            delta_amb: var_amb.max(0.0).sqrt(),
        };
        PointEval {
            t,
            moments,
            c_commutator: comm,
            c_moments: norm2_a + norm2_b - 2.0 * cross.re,
            otoc,
        }
    }
}
