use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::SseState;
use crate::config::RunConfig;
use crate::error::Result;
use crate::graph::SpinGraph;
use crate::lattice::Lattice;
use crate::observables::{
    bin_statistics, energy_density, slice_measure, MeasurementAccumulator, StreamSample,
};
use crate::rng::{stream, ChainRng};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub mean: T,
    pub err: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinRecord<T> {
    pub sweeps: usize,
    pub n_mean: T,
    pub energy: T,
    pub abs_m: Option<T>,
    pub abs_m_sliceavg: Option<T>,
    pub abs_psi: Option<T>,
    pub abs_psi_sliceavg: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult<T> {
    /// Rendered configuration of the run.
    pub config: String,
    pub beta: T,
    pub g: T,
    pub nn: usize,
    pub bins: Vec<BinRecord<T>>,
    pub energy: Estimate<T>,
    pub n_mean: Estimate<T>,
    pub abs_m: Option<Estimate<T>>,
    pub abs_m_sliceavg: Option<Estimate<T>>,
    pub abs_psi: Option<Estimate<T>>,
    pub abs_psi_sliceavg: Option<Estimate<T>>,
    pub samples: Vec<StreamSample<T>>,
    pub cutoff: usize,
    pub max_nh: usize,
    /// Measurement-stage insertions that filled the operator string.
    pub saturation: u64,
    pub valid: bool,
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Builds the lattice named by `config` and runs a chain on stream 0 of
/// `config.seed`.
pub fn run_simulation<T: Real>(config: &RunConfig<T>) -> Result<RunResult<T>> {
    config.validate()?;
    let lattice = Lattice::build(config.lx, config.ly, config.pattern)?;
    let graph = Arc::new(SpinGraph::from_lattice(&lattice, config.g)?);
    run_with(graph, config, stream(config.seed, 0))
}

/// Thermalises for `isteps` sweeps with cutoff growth, then measures
/// `nbins` bins of `mstep` sweeps at fixed cutoff. `config.beta` is used;
/// the field is taken from `graph`.
pub fn run_with<T: Real>(
    graph: Arc<SpinGraph<T>>,
    config: &RunConfig<T>,
    rng: ChainRng,
) -> Result<RunResult<T>> {
    config.validate()?;
    let started = Instant::now();
    let mut state = SseState::init(Arc::clone(&graph), config, rng)?;
    for _ in 0..config.isteps {
        state.mc_sweep(true);
    }
    state.reset_counters();

    let mut acc = MeasurementAccumulator::new(config.thin);
    for _ in 0..config.nbins {
        for _ in 0..config.mstep {
            state.mc_sweep(false);
            acc.push(&slice_measure(&state, config.msnorm));
        }
        acc.finish_bin()?;
    }
    let (bins, samples) = acc.into_parts();

    let bins: Vec<BinRecord<T>> = bins
        .into_iter()
        .map(|b| BinRecord {
            sweeps: b.sweeps,
            n_mean: b.n_mean,
            energy: energy_density(b.n_mean, config.beta, &graph),
            abs_m: b.abs_m,
            abs_m_sliceavg: b.abs_m_sliceavg,
            abs_psi: b.abs_psi,
            abs_psi_sliceavg: b.abs_psi_sliceavg,
        })
        .collect();
    let estimate = |values: Vec<T>| -> Result<Estimate<T>> {
        let (mean, err) = bin_statistics(&values)?;
        Ok(Estimate { mean, err })
    };
    let optional = |pick: fn(&BinRecord<T>) -> Option<T>| -> Result<Option<Estimate<T>>> {
        bins.iter()
            .map(pick)
            .collect::<Option<Vec<T>>>()
            .map(estimate)
            .transpose()
    };

    let saturation = state.saturation_count();
    let valid = saturation == 0;
    Ok(RunResult {
        config: config.render(),
        beta: config.beta,
        g: graph.g(),
        nn: graph.n(),
        energy: estimate(bins.iter().map(|b| b.energy).collect())?,
        n_mean: estimate(bins.iter().map(|b| b.n_mean).collect())?,
        abs_m: optional(|b| b.abs_m)?,
        abs_m_sliceavg: optional(|b| b.abs_m_sliceavg)?,
        abs_psi: optional(|b| b.abs_psi)?,
        abs_psi_sliceavg: optional(|b| b.abs_psi_sliceavg)?,
        bins,
        samples,
        cutoff: state.cutoff(),
        max_nh: state.max_nh(),
        saturation,
        valid,
        diagnostic: (!valid).then(|| {
            format!(
                "operator string saturated {saturation} time(s) during measurement \
                 (cutoff {}); increase isteps",
                state.cutoff()
            )
        }),
        wall_time: started.elapsed(),
    })
}
