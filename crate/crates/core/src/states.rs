//! Reference states: the polarized product state and the Gibbs state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{hermitian_eigendecompose, spectral_function, CMatrix, HermitianEigen, C64};

/// Tolerance for the trace, Hermiticity and positivity checks.
pub const STATE_TOL: f64 = 1e-10;

/// How the reference state is prepared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StatePrep {
    /// `|up>_a (x) |down>^N`.
    Pure,
    /// `exp(-beta H) / Tr exp(-beta H)`.
    Thermal { beta: f64 },
}

impl StatePrep {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StatePrep::Pure => Ok(()),
            StatePrep::Thermal { beta } if beta.is_finite() && beta > 0.0 => Ok(()),
            StatePrep::Thermal { beta } => Err(Error::param(
                "beta",
                format!("must be finite and > 0, got {beta}"),
            )),
        }
    }

    pub fn label(&self) -> String {
        match self {
            StatePrep::Pure => "pure".to_string(),
            StatePrep::Thermal { beta } => format!("thermal(beta={beta})"),
        }
    }
}

/// Basis index of `|up>_a (x) |down>^N`: ancilla bit 0, every outer bit 1.
pub fn polarized_index(n_outer: usize) -> usize {
    (1usize << n_outer) - 1
}

/// Normalized Boltzmann weights `exp(-beta (l - l_min)) / Z`.
pub fn boltzmann_weights(energies: &[f64], beta: f64) -> Vec<f64> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = energies.iter().map(|&l| (-beta * (l - e0)).exp()).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / z).collect()
}

/// A validated density matrix.
#[derive(Clone, Debug)]
pub struct DensityState {
    rho: CMatrix,
}

impl DensityState {
    /// Wraps `rho` after checking unit trace, Hermiticity and
    /// `lambda_min >= -1e-10`.
    pub fn new(rho: CMatrix) -> Result<Self> {
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let herm = rho.hermiticity_defect();
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {herm:e}")));
        }
        let lmin = hermitian_eigendecompose(&rho)?.eigenvalues()[0];
        if lmin < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lmin:e}")));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `Tr[rho^2]`, with roundoff-negative eigenvalues clamped to zero.
    pub fn purity(&self) -> f64 {
        let e = hermitian_eigendecompose(&self.rho).expect("validated Hermitian");
        e.eigenvalues().iter().map(|&l| l.max(0.0).powi(2)).sum()
    }
}

/// Rank-one projector onto the polarized product state.
pub fn pure_product_state(n_outer: usize) -> DensityState {
    let dim = 1usize << (n_outer + 1);
    let mut rho = CMatrix::zeros(dim);
    let k = polarized_index(n_outer);
    rho[(k, k)] = C64::new(1.0, 0.0);
    DensityState { rho }
}

/// Gibbs state from the Hamiltonian's eigendecomposition.
///
/// Energies are shifted by the ground-state energy before exponentiating,
/// so large `beta * ||H||` cannot overflow.
pub fn gibbs_state(h_eigen: &HermitianEigen, beta: f64) -> Result<DensityState> {
    StatePrep::Thermal { beta }.validate()?;
    let energies = h_eigen.eigenvalues();
    let e0 = energies[0];
    let z: f64 = energies.iter().map(|&l| (-beta * (l - e0)).exp()).sum();
    let rho = spectral_function(h_eigen, |l| C64::new((-beta * (l - e0)).exp() / z, 0.0));
    Ok(DensityState { rho })
}
