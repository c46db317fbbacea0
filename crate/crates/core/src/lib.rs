//! Operator scrambling in the spin-star model.
//!
//! A central ancilla qubit couples to a ring of `N` outer spins. For a pair
//! of observables `W`, `V` the crate evaluates the scrambling measure
//! `C(t) = Tr[rho [W(t), V]^dagger [W(t), V]]` along with norm-inequality
//! lower and upper bounds, for pure and thermal reference states.

pub mod dynamics;
pub mod engine;
pub mod error;
pub mod scenarios;
pub mod scrambling;
pub mod spin;
pub mod states;
pub mod tensor;

pub use dynamics::{heisenberg_evolve, propagator, EvolutionCache, TimeGrid};
pub use engine::{PointEval, ScramblingEngine, Spectrum};
pub use error::{Error, Result};
pub use scenarios::{builtin_scenarios, find_scenario, ResultRow, ResultTable, ScenarioConfig, Sweep};
pub use scrambling::{MomentSet, ScramblingRecord};
pub use spin::{Axis, OperatorSpec, SiteAxis, SpinStarParams};
pub use states::{DensityState, StatePrep};
pub use tensor::{CMatrix, C64};
