//! Heisenberg-picture evolution `W(t) = U(t)^dagger W U(t)`, `U(t) = exp(-iHt)`.

use faer::linalg::matmul::matmul;
use faer::{Accum, Par};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{hermitian_eigendecompose, spectral_function, CMatrix, HermitianEigen, C64, ONE};

/// Eigendecomposition of a time-independent Hamiltonian, reused for every
/// propagator.
#[derive(Clone, Debug)]
pub struct EvolutionCache {
    eigen: HermitianEigen,
}

impl EvolutionCache {
    pub fn new(h: &CMatrix) -> Result<Self> {
        Ok(Self {
            eigen: hermitian_eigendecompose(h)?,
        })
    }

    pub fn from_eigen(eigen: HermitianEigen) -> Self {
        Self { eigen }
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    /// `exp(-iHt)`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        spectral_function(&self.eigen, |l| C64::from_polar(1.0, -l * t))
    }

    /// `w0` rotated into the eigenbasis: `Q^dagger w0 Q`.
    fn to_eigenbasis(&self, w0: &CMatrix) -> CMatrix {
        let q = self.eigen.eigenvectors();
        let mut tmp = CMatrix::zeros(q.dim());
        matmul(tmp.as_faer_mut(), Accum::Replace, q.as_faer().adjoint(), w0.as_faer(), ONE, Par::rayon(0));
        let mut out = CMatrix::zeros(q.dim());
        matmul(out.as_faer_mut(), Accum::Replace, tmp.as_faer(), q.as_faer(), ONE, Par::rayon(0));
        out
    }

    /// `Q (E^dagger w_eig E) Q^dagger` with `E = diag(exp(-i lambda t))`.
    fn from_eigenbasis_at(&self, w_eig: &CMatrix, t: f64) -> CMatrix {
        let q = self.eigen.eigenvectors();
        let phases: Vec<C64> = self
            .eigen
            .eigenvalues()
            .iter()
            .map(|&l| C64::from_polar(1.0, l * t))
            .collect();
        let rotated = CMatrix::from_fn(q.dim(), |i, j| phases[i] * w_eig[(i, j)] * phases[j].conj());
        let mut tmp = CMatrix::zeros(q.dim());
        matmul(tmp.as_faer_mut(), Accum::Replace, q.as_faer(), rotated.as_faer(), ONE, Par::rayon(0));
        let mut out = CMatrix::zeros(q.dim());
        matmul(out.as_faer_mut(), Accum::Replace, tmp.as_faer(), q.as_faer().adjoint(), ONE, Par::rayon(0));
        out
    }

    fn check_dim(&self, w0: &CMatrix) -> Result<()> {
        if w0.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: w0.dim(),
            });
        }
        Ok(())
    }
}

/// `exp(-iHt)` from the cached decomposition.
pub fn propagator(cache: &EvolutionCache, t: f64) -> CMatrix {
    cache.propagator(t)
}

/// `U(t)^dagger w0 U(t)`. At `t = 0` the input is returned unchanged.
pub fn heisenberg_evolve(cache: &EvolutionCache, w0: &CMatrix, t: f64) -> Result<CMatrix> {
    cache.check_dim(w0)?;
    if t == 0.0 {
        return Ok(w0.clone());
    }
    let u = cache.propagator(t);
    Ok(u.adjoint().matmul(w0).matmul(&u))
}

/// Uniform time grid including both end points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        let g = Self { start, stop, points };
        g.validate()?;
        Ok(g)
    }

    /// 401 points on `[0, 2 pi]`.
    pub fn standard() -> Self {
        Self {
            start: 0.0,
            stop: 2.0 * std::f64::consts::PI,
            points: 401,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || self.start < 0.0 {
            return Err(Error::param("grid.start", "must be finite and >= 0"));
        }
        if !self.stop.is_finite() || self.stop <= self.start {
            return Err(Error::param("grid.stop", "must be finite and > grid.start"));
        }
        if self.points < 2 {
            return Err(Error::param("grid.points", "must be at least 2"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }
}

/// `W(t)` at every grid point, in grid order.
///
/// Points are evaluated independently (in parallel when a rayon pool is
/// available), so the output does not depend on scheduling.
pub fn evolve_series(cache: &EvolutionCache, w0: &CMatrix, grid: &TimeGrid) -> Result<Vec<(f64, CMatrix)>> {
    cache.check_dim(w0)?;
    grid.validate()?;
    let w_eig = cache.to_eigenbasis(w0);
    Ok(grid
        .times()
        .into_par_iter()
        .map(|t| {
            let w = if t == 0.0 { w0.clone() } else { cache.from_eigenbasis_at(&w_eig, t) };
            (t, w)
        })
        .collect())
}
