use serde::{Deserialize, Serialize};

use super::{report, GroundStateReport};
use crate::config::MsNorm;
use crate::error::{Error, Result};
use crate::graph::SpinGraph;
use crate::lattice::SpinConfig;
use crate::observables::OrderTracker;
use crate::Real;

/// Largest graph accepted by [`classical_enumerate`].
pub const MAX_CLASSICAL_SITES: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalThermal {
    pub n: usize,
    pub beta: f64,
    pub energy_density: f64,
    pub abs_m: Option<f64>,
    pub abs_psi: Option<f64>,
}

/// Visits every state in Gray-code order, calling `visit(spins, energy,
/// tracker)` after each single-spin step.
fn gray_scan<T: Real>(
    graph: &SpinGraph<T>,
    norm: MsNorm,
    mut visit: impl FnMut(&[i8], f64, Option<&OrderTracker<'_, T>>),
) {
    let n = graph.n();
    let mut spins = vec![-1i8; n];
    let mut energy = graph.classical_energy(&spins).to_f64_lossy();
    let mut tracker = graph
        .geometry()
        .map(|geo| OrderTracker::new(graph, geo, &spins, norm));
    let couplings: Vec<f64> = graph
        .bonds()
        .iter()
        .map(|b| b.coupling.to_f64_lossy())
        .collect();
    visit(&spins, energy, tracker.as_ref());
    for t in 1u64..(1u64 << n) {
        let k = t.trailing_zeros() as usize;
        for &b in graph.incident(k) {
            let bond = graph.bond(b);
            energy -= 2.0 * couplings[b] * (spins[bond.i] * spins[bond.j]) as f64;
        }
        spins[k] = -spins[k];
        if let Some(tr) = tracker.as_mut() {
            tr.flip(k);
        }
        visit(&spins, energy, tracker.as_ref());
    }
}

/// Exact `g = 0` Boltzmann averages and ground manifold. At most
/// `max_listed` ground configurations are listed.
pub fn classical_enumerate<T: Real>(
    graph: &SpinGraph<T>,
    beta: f64,
    norm: MsNorm,
    max_listed: usize,
) -> Result<(ClassicalThermal, GroundStateReport)> {
    let n = graph.n();
    if n > MAX_CLASSICAL_SITES {
        return Err(Error::Capacity {
            what: "classical enumeration site count",
            got: n,
            limit: MAX_CLASSICAL_SITES,
        });
    }
    let mut e0 = f64::INFINITY;
    gray_scan(graph, norm, |_, e, _| e0 = e0.min(e));
    let tol = 1e-9 * e0.abs().max(1.0);

    let (mut z, mut e_sum, mut m_sum, mut p_sum) = (0.0, 0.0, 0.0, 0.0);
    let mut degeneracy = 0u128;
    let mut listed = Vec::new();
    gray_scan(graph, norm, |spins, e, tracker| {
        let w = (-beta * (e - e0)).exp();
        z += w;
        e_sum += w * e;
        if let Some(tr) = tracker {
            m_sum += w * tr.m_h().norm().to_f64_lossy();
            p_sum += w * tr.psi_h().norm().to_f64_lossy();
        }
        if (e - e0).abs() <= tol {
            degeneracy += 1;
            if listed.len() < max_listed {
                listed.push(SpinConfig::new(spins.to_vec()).expect("spins are +-1"));
            }
        }
    });
    let annotated = graph.geometry().is_some();
    let thermal = ClassicalThermal {
        n,
        beta,
        energy_density: e_sum / z / n as f64,
        abs_m: annotated.then(|| m_sum / z),
        abs_psi: annotated.then(|| p_sum / z),
    };
    Ok((thermal, report(graph, e0, degeneracy, listed, norm)))
}
