//! Stochastic series expansion of `exp(-beta H)` for the transverse-field
//! Ising model.
//!
//! The Hamiltonian is rewritten as a sum of non-negative operators:
//!
//! * `Constant(i)`: `g` times the identity,
//! * `Field(i)`: `g s^x_i`,
//! * `Ising(b)`: `|J_b| - J_b s^z_i s^z_j`, i.e. `2|J_b|` on an unfrustrated
//!   bond and 0 on a frustrated one.
//!
//! A configuration is a stored spin state plus an operator string of
//! length `L` padded with `Null` slots; its weight is
//! `beta^n (L-n)!/L! * prod(matrix elements)`.

mod links;
mod run;
mod state;

use serde::{Deserialize, Serialize};

pub use links::{LinkedVertexList, FREE};
pub use run::{run_simulation, run_with, BinRecord, Estimate, RunResult};
pub use state::{SseState, Violation, ViolationKind, WeightKey, INITIAL_CUTOFF};

/// One slot of the operator string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum OperatorSlot {
    #[default]
    Null,
    Constant(usize),
    Field(usize),
    Ising(usize),
}

impl OperatorSlot {
    #[inline]
    pub fn is_null(self) -> bool {
        matches!(self, OperatorSlot::Null)
    }

    /// Site of a `Constant` or `Field` slot.
    #[inline]
    pub fn site(self) -> Option<usize> {
        match self {
            OperatorSlot::Constant(i) | OperatorSlot::Field(i) => Some(i),
            _ => None,
        }
    }
}
