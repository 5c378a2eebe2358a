//! Exact references for small systems. Everything here works in `f64`.
//!
//! * [`exact_thermal`]: dense diagonalisation of the full Hamiltonian.
//! * [`classical_enumerate`]: Boltzmann sums and the ground manifold at
//!   `g = 0` by visiting all `2^n` states in Gray-code order.
//! * [`ground_states_dp`]: exact `g = 0` ground states of a honeycomb
//!   lattice by a row transfer matrix with periodic closure.

mod classical;
mod ground;
mod thermal;

use serde::{Deserialize, Serialize};

pub use classical::{classical_enumerate, ClassicalThermal, MAX_CLASSICAL_SITES};
pub use ground::{ground_states_dp, MAX_ROW_WIDTH};
pub use thermal::{exact_thermal, ThermalReport, MAX_ED_SITES};

use crate::config::MsNorm;
use crate::graph::SpinGraph;
use crate::lattice::SpinConfig;
use crate::observables::{primary_order_parameter, secondary_order_parameter};
use crate::Real;

/// A ground configuration with its order parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundConfig {
    /// One `+`/`-` per site.
    pub spins: String,
    /// `[re, im]` of `m_H`, when the graph is annotated.
    pub m_h: Option<[f64; 2]>,
    pub psi_h: Option<[f64; 2]>,
    /// Edge position 1..6 when every tracked unit is frustrated on that
    /// edge and nowhere else.
    pub uniform_position: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport {
    pub n: usize,
    /// Total classical energy in units of J.
    pub energy: f64,
    pub energy_per_site: f64,
    /// Exact number of ground configurations.
    pub degeneracy: u128,
    /// Whether `configs` lists the whole manifold.
    pub complete: bool,
    pub configs: Vec<GroundConfig>,
    /// Indices into `configs` of the uniform states.
    pub uniform: Vec<usize>,
}

impl GroundStateReport {
    pub fn uniform_configs(&self) -> impl Iterator<Item = &GroundConfig> {
        self.uniform.iter().map(|&k| &self.configs[k])
    }
}

fn describe<T: Real>(graph: &SpinGraph<T>, spins: &SpinConfig, norm: MsNorm) -> GroundConfig {
    let pair = |z: crate::ComplexValue<T>| [z.re.to_f64_lossy(), z.im.to_f64_lossy()];
    let (m_h, psi_h, uniform_position) = match graph.geometry() {
        Some(geo) => {
            let s = spins.values();
            let mut position = None;
            let mut uniform = !geo.units().is_empty();
            for unit in geo.units() {
                let hits: Vec<usize> = (0..6)
                    .filter(|&k| graph.is_frustrated(s, unit.bonds[k]))
                    .collect();
                if hits.len() != 1 || position.is_some_and(|p| p != hits[0]) {
                    uniform = false;
                    break;
                }
                position = Some(hits[0]);
            }
            (
                Some(pair(primary_order_parameter(geo, s, norm))),
                Some(pair(secondary_order_parameter(graph, geo, s))),
                position.filter(|_| uniform).map(|k| k as u8 + 1),
            )
        }
        None => (None, None, None),
    };
    GroundConfig {
        spins: spins.to_pm_string(),
        m_h,
        psi_h,
        uniform_position,
    }
}

fn report<T: Real>(
    graph: &SpinGraph<T>,
    energy: f64,
    degeneracy: u128,
    listed: Vec<SpinConfig>,
    norm: MsNorm,
) -> GroundStateReport {
    let configs: Vec<GroundConfig> = listed.iter().map(|s| describe(graph, s, norm)).collect();
    let uniform = configs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.uniform_position.is_some())
        .map(|(k, _)| k)
        .collect();
    GroundStateReport {
        n: graph.n(),
        energy,
        energy_per_site: energy / graph.n() as f64,
        degeneracy,
        complete: configs.len() as u128 == degeneracy,
        configs,
        uniform,
    }
}
