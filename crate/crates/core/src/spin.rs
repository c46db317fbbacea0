//! Pauli operators on the spin-star register and the model Hamiltonian.
//!
//! Site 0 is the central ancilla and sites `1..=n_outer` are the outer
//! qubits. The ancilla is the leftmost tensor factor, so basis index
//! `b = sum_k q_k 2^(N-k)` with `q = 0` meaning spin up (`sigma_z = +1`).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{CMatrix, C64, ONE, ZERO};

/// Largest Hilbert-space dimension the dense kernels accept.
pub const MAX_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::param("axis", format!("expected x, y or z, got {other:?}"))),
        }
    }
}

/// A single-site Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteAxis {
    pub site: usize,
    pub axis: Axis,
}

impl SiteAxis {
    pub fn new(site: usize, axis: Axis) -> Self {
        Self { site, axis }
    }
}

impl fmt::Display for SiteAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.axis, self.site)
    }
}

/// Unit-weight sum of single-site Pauli terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SiteAxis>", into = "Vec<SiteAxis>")]
pub struct OperatorSpec {
    terms: Vec<SiteAxis>,
}

impl OperatorSpec {
    pub fn new(terms: Vec<SiteAxis>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptyOperator);
        }
        let mut seen = BTreeSet::new();
        for t in &terms {
            if !seen.insert(*t) {
                return Err(Error::DuplicateTerm {
                    site: t.site,
                    axis: t.axis,
                });
            }
        }
        Ok(Self { terms })
    }

    pub fn single(site: usize, axis: Axis) -> Self {
        Self {
            terms: vec![SiteAxis::new(site, axis)],
        }
    }

    /// `sum_{site in sites} sigma_axis^site`.
    pub fn block(sites: impl IntoIterator<Item = usize>, axis: Axis) -> Result<Self> {
        Self::new(sites.into_iter().map(|s| SiteAxis::new(s, axis)).collect())
    }

    pub fn terms(&self) -> &[SiteAxis] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_single_term(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn sites(&self) -> BTreeSet<usize> {
        self.terms.iter().map(|t| t.site).collect()
    }

    pub fn validate_for(&self, n_outer: usize) -> Result<()> {
        match self.terms.iter().find(|t| t.site > n_outer) {
            Some(t) => Err(Error::SiteOutOfRange {
                site: t.site,
                n_outer,
            }),
            None => Ok(()),
        }
    }

    /// First site shared with `other`, if any.
    pub fn shared_site(&self, other: &OperatorSpec) -> Option<usize> {
        self.sites().intersection(&other.sites()).next().copied()
    }
}

impl TryFrom<Vec<SiteAxis>> for OperatorSpec {
    type Error = Error;
    fn try_from(terms: Vec<SiteAxis>) -> Result<Self> {
        Self::new(terms)
    }
}

impl From<OperatorSpec> for Vec<SiteAxis> {
    fn from(spec: OperatorSpec) -> Self {
        spec.terms
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Spin-star model parameters (hbar = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinStarParams {
    pub n_outer: usize,
    pub omega_a: f64,
    pub omega_s: f64,
    pub j1: f64,
    pub j2: f64,
}

impl SpinStarParams {
    /// Resonant model, `omega_a = omega_s = omega`.
    pub fn resonant(n_outer: usize, omega: f64, j1: f64, j2: f64) -> Self {
        Self {
            n_outer,
            omega_a: omega,
            omega_s: omega,
            j1,
            j2,
        }
    }

    /// The couplings used throughout the figure presets: `omega = 1`,
    /// `J1 = 1`, `J2 = 0.5`.
    pub fn standard(n_outer: usize) -> Self {
        Self::resonant(n_outer, 1.0, 1.0, 0.5)
    }

    pub fn with_n_outer(self, n_outer: usize) -> Self {
        Self { n_outer, ..self }
    }

    pub fn dim(&self) -> usize {
        1usize << (self.n_outer + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_outer == 0 {
            return Err(Error::param("n_outer", "must be at least 1"));
        }
        if self.n_outer + 1 > MAX_DIM.trailing_zeros() as usize {
            return Err(Error::param(
                "n_outer",
                format!("dimension 2^{} exceeds the limit {MAX_DIM}", self.n_outer + 1),
            ));
        }
        for (name, v) in [
            ("omega_a", self.omega_a),
            ("omega_s", self.omega_s),
            ("j1", self.j1),
            ("j2", self.j2),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Standard 2x2 Pauli matrix.
pub fn pauli(axis: Axis) -> CMatrix {
    let i = C64::new(0.0, 1.0);
    let rows = match axis {
        Axis::X => [[ZERO, ONE], [ONE, ZERO]],
        Axis::Y => [[ZERO, -i], [i, ZERO]],
        Axis::Z => [[ONE, ZERO], [ZERO, -ONE]],
    };
    CMatrix::from_fn(2, |r, c| rows[r][c])
}

/// Image of basis state `b` under a product of Pauli factors on distinct
/// sites: returns `(b', phase)` with `P|b> = phase |b'>`.
fn pauli_string_action(factors: &[SiteAxis], n_outer: usize, b: usize) -> (usize, C64) {
    let mut out = b;
    let mut phase = ONE;
    for f in factors {
        let bit = 1usize << (n_outer - f.site);
        let down = b & bit != 0;
        match f.axis {
            Axis::X => out ^= bit,
            Axis::Y => {
                out ^= bit;
                // sigma_y |up> = i|down>, sigma_y |down> = -i|up>
                phase *= if down { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) };
            }
            Axis::Z => {
                if down {
                    phase = -phase;
                }
            }
        }
    }
    (out, phase)
}

/// Adds `coeff * prod(factors)` into `m`. Factors must sit on distinct sites.
fn add_pauli_string(m: &mut CMatrix, factors: &[SiteAxis], n_outer: usize, coeff: f64) {
    for b in 0..m.dim() {
        let (row, phase) = pauli_string_action(factors, n_outer, b);
        m[(row, b)] += phase * coeff;
    }
}

fn check_site(sa: SiteAxis, n_outer: usize) -> Result<()> {
    if sa.site > n_outer {
        return Err(Error::SiteOutOfRange {
            site: sa.site,
            n_outer,
        });
    }
    Ok(())
}

/// `I^(site) (x) sigma_axis (x) I^(n_outer - site)` on the full register.
pub fn embed_site(sa: SiteAxis, n_outer: usize) -> Result<CMatrix> {
    check_site(sa, n_outer)?;
    let mut m = CMatrix::zeros(1 << (n_outer + 1));
    add_pauli_string(&mut m, &[sa], n_outer, 1.0);
    Ok(m)
}

/// Sum of the embedded terms of `spec`.
pub fn realize_operator(spec: &OperatorSpec, n_outer: usize) -> Result<CMatrix> {
    spec.validate_for(n_outer)?;
    let mut m = CMatrix::zeros(1 << (n_outer + 1));
    for t in spec.terms() {
        add_pauli_string(&mut m, &[*t], n_outer, 1.0);
    }
    Ok(m)
}

/// `sum over all sites (ancilla included) of sigma_axis`.
pub fn total_spin(axis: Axis, n_outer: usize) -> CMatrix {
    let spec = OperatorSpec::block(0..=n_outer, axis).expect("distinct sites");
    realize_operator(&spec, n_outer).expect("sites in range")
}

fn add_heisenberg_bond(m: &mut CMatrix, a: usize, b: usize, n_outer: usize, coupling: f64) {
    for axis in Axis::ALL {
        add_pauli_string(m, &[SiteAxis::new(a, axis), SiteAxis::new(b, axis)], n_outer, coupling);
    }
}

/// The spin-star Hamiltonian.
///
/// `H = wa Z_a + ws sum_i Z_i + J1 sum_i S_a.S_i + J2 sum_{i=1..N} S_i.S_{i+1}`
/// with `S_{N+1} = S_1`. For `N = 1` the ring term is dropped (it would be
/// the constant `3 J2`); for `N = 2` the periodic sum visits the single
/// bond twice and is kept that way.
pub fn build_hamiltonian(p: &SpinStarParams) -> Result<CMatrix> {
    p.validate()?;
    let n = p.n_outer;
    let mut h = CMatrix::zeros(p.dim());
    add_pauli_string(&mut h, &[SiteAxis::new(0, Axis::Z)], n, p.omega_a);
    for i in 1..=n {
        add_pauli_string(&mut h, &[SiteAxis::new(i, Axis::Z)], n, p.omega_s);
        add_heisenberg_bond(&mut h, 0, i, n, p.j1);
    }
    if n >= 2 {
        for i in 1..=n {
            let next = if i == n { 1 } else { i + 1 };
            add_heisenberg_bond(&mut h, i, next, n, p.j2);
        }
    }
    Ok(h)
}
