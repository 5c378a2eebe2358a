use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::config::MsNorm;
use crate::error::{Error, Result};
use crate::graph::SpinGraph;
use crate::observables::{primary_order_parameter, secondary_order_parameter};
use crate::Real;

/// Largest graph accepted by [`exact_thermal`].
pub const MAX_ED_SITES: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalReport {
    pub n: usize,
    pub beta: f64,
    pub g: f64,
    /// `<H>/n`.
    pub energy_density: f64,
    pub ground_energy: f64,
    /// Thermal `<|m_H|>` and `<|psi_H|>` in the z basis, when annotated.
    pub abs_m: Option<f64>,
    pub abs_psi: Option<f64>,
}

/// Basis state `s` has site `k` up iff bit `k` of `s` is set.
fn spins_of(n: usize, s: usize) -> Vec<i8> {
    (0..n)
        .map(|k| if s >> k & 1 == 1 { 1 } else { -1 })
        .collect()
}

/// Thermal averages of `H = sum J s^z s^z + g sum s^x` by full
/// diagonalisation.
pub fn exact_thermal<T: Real>(
    graph: &SpinGraph<T>,
    beta: f64,
    norm: MsNorm,
) -> Result<ThermalReport> {
    let n = graph.n();
    if n > MAX_ED_SITES {
        return Err(Error::Capacity {
            what: "exact diagonalisation site count",
            got: n,
            limit: MAX_ED_SITES,
        });
    }
    let dim = 1usize << n;
    let g = graph.g().to_f64_lossy();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let mut diag_obs = Vec::with_capacity(dim);
    for s in 0..dim {
        let spins = spins_of(n, s);
        h[(s, s)] = graph.classical_energy(&spins).to_f64_lossy();
        for k in 0..n {
            h[(s ^ (1 << k), s)] += g;
        }
        diag_obs.push(graph.geometry().map(|geo| {
            (
                primary_order_parameter::<f64>(geo, &spins, norm).norm(),
                secondary_order_parameter(graph, geo, &spins)
                    .norm()
                    .to_f64_lossy(),
            )
        }));
    }
    let eig = SymmetricEigen::new(h);
    let e0 = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let (mut z, mut e_sum, mut m_sum, mut p_sum) = (0.0, 0.0, 0.0, 0.0);
    for (k, &ek) in eig.eigenvalues.iter().enumerate() {
        let w = (-beta * (ek - e0)).exp();
        z += w;
        e_sum += w * ek;
        if graph.geometry().is_some() {
            let v = eig.eigenvectors.column(k);
            for (s, obs) in diag_obs.iter().enumerate() {
                let (m, p) = obs.expect("annotated graph");
                let amp = v[s] * v[s];
                m_sum += w * amp * m;
                p_sum += w * amp * p;
            }
        }
    }
    let annotated = graph.geometry().is_some();
    Ok(ThermalReport {
        n,
        beta,
        g,
        energy_density: e_sum / z / n as f64,
        ground_energy: e0,
        abs_m: annotated.then(|| m_sum / z),
        abs_psi: annotated.then(|| p_sum / z),
    })
}
