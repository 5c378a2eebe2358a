//! Diagonal observables: energy density, sublattice magnetisations and the
//! complex order parameters `m_H` and `psi_H`, with bin statistics.
//!
//! `m_H = (1/a) sum_s exp(i(2s-1)pi/12) m_s` with `a = sqrt 2 + sqrt 6`, and
//! `psi_H = sum_k exp(ik pi/3) psi_k` where `psi_k` is the number of tracked
//! units frustrated on edge `k`, divided by the site count.

use serde::{Deserialize, Serialize};

use crate::config::MsNorm;
use crate::error::{Error, Result};
use crate::graph::{OrderGeometry, SpinGraph};
use crate::sse::{OperatorSlot, SseState};
use crate::{ComplexValue, Real};

/// `exp(i(2s-1)pi/12)` for `s = 1..6`.
pub fn magnetization_phases<T: Real>() -> [ComplexValue<T>; 6] {
    std::array::from_fn(|k| {
        ComplexValue::from_polar(
            T::one(),
            T::lit((2 * k + 1) as f64) * T::PI() / T::lit(12.0),
        )
    })
}

/// `exp(ik pi/3)` for `k = 1..6`.
pub fn frustration_phases<T: Real>() -> [ComplexValue<T>; 6] {
    std::array::from_fn(|k| {
        ComplexValue::from_polar(T::one(), T::lit((k + 1) as f64) * T::PI() / T::lit(3.0))
    })
}

/// `sqrt 2 + sqrt 6`, the modulus of the summed magnetisation phases.
pub fn phase_norm<T: Real>() -> T {
    T::lit(2.0).sqrt() + T::lit(6.0).sqrt()
}

fn norm_denominators(geo: &OrderGeometry, n: usize, norm: MsNorm) -> [usize; 6] {
    match norm {
        MsNorm::PerSublattice => geo.sublattice_size(),
        MsNorm::Literal => [n; 6],
    }
}

pub fn sublattice_magnetizations<T: Real>(
    geo: &OrderGeometry,
    spins: &[i8],
    norm: MsNorm,
) -> [T; 6] {
    let mut sums = [0i64; 6];
    for (i, &s) in spins.iter().enumerate() {
        sums[geo.sublattice(i)] += s as i64;
    }
    let den = norm_denominators(geo, spins.len(), norm);
    std::array::from_fn(|s| {
        if den[s] == 0 {
            T::zero()
        } else {
            T::lit(sums[s] as f64) / T::from_count(den[s])
        }
    })
}

pub fn primary_order_parameter<T: Real>(
    geo: &OrderGeometry,
    spins: &[i8],
    norm: MsNorm,
) -> ComplexValue<T> {
    let m = sublattice_magnetizations::<T>(geo, spins, norm);
    let sum = magnetization_phases::<T>()
        .iter()
        .zip(m)
        .fold(ComplexValue::new(T::zero(), T::zero()), |acc, (ph, ms)| {
            acc + ph * ms
        });
    sum / phase_norm::<T>()
}

/// Number of tracked units frustrated at each edge position.
pub fn unit_edge_counts<T: Real>(
    graph: &SpinGraph<T>,
    geo: &OrderGeometry,
    spins: &[i8],
) -> [usize; 6] {
    let mut counts = [0usize; 6];
    for unit in geo.units() {
        for (k, &b) in unit.bonds.iter().enumerate() {
            if graph.is_frustrated(spins, b) {
                counts[k] += 1;
            }
        }
    }
    counts
}

pub fn secondary_order_parameter<T: Real>(
    graph: &SpinGraph<T>,
    geo: &OrderGeometry,
    spins: &[i8],
) -> ComplexValue<T> {
    let counts = unit_edge_counts(graph, geo, spins);
    let n = T::from_count(spins.len());
    frustration_phases::<T>()
        .iter()
        .zip(counts)
        .fold(ComplexValue::new(T::zero(), T::zero()), |acc, (ph, c)| {
            acc + ph * (T::from_count(c) / n)
        })
}

/// `-<n>/(beta N) + g + sum|J|/N`.
pub fn energy_density<T: Real>(n_mean: T, beta: T, graph: &SpinGraph<T>) -> T {
    let n = T::from_count(graph.n());
    -n_mean / (beta * n) + graph.g() + graph.abs_coupling_sum() / n
}

/// `m_H` and `psi_H` maintained under single-spin flips.
#[derive(Debug, Clone)]
pub struct OrderTracker<'a, T> {
    graph: &'a SpinGraph<T>,
    geo: &'a OrderGeometry,
    spins: Vec<i8>,
    sublattice_sum: [i64; 6],
    edge_count: [i64; 6],
    m_coef: [ComplexValue<T>; 6],
    psi_coef: [ComplexValue<T>; 6],
}

impl<'a, T: Real> OrderTracker<'a, T> {
    pub fn new(
        graph: &'a SpinGraph<T>,
        geo: &'a OrderGeometry,
        spins: &[i8],
        norm: MsNorm,
    ) -> Self {
        let mut sublattice_sum = [0i64; 6];
        for (i, &s) in spins.iter().enumerate() {
            sublattice_sum[geo.sublattice(i)] += s as i64;
        }
        let counts = unit_edge_counts(graph, geo, spins);
        let den = norm_denominators(geo, spins.len(), norm);
        let a = phase_norm::<T>();
        let mph = magnetization_phases::<T>();
        let m_coef = std::array::from_fn(|s| {
            if den[s] == 0 {
                ComplexValue::new(T::zero(), T::zero())
            } else {
                mph[s] / (a * T::from_count(den[s]))
            }
        });
        let n = T::from_count(spins.len());
        let psi_coef = frustration_phases::<T>().map(|p| p / n);
        OrderTracker {
            graph,
            geo,
            spins: spins.to_vec(),
            sublattice_sum,
            edge_count: counts.map(|c| c as i64),
            m_coef,
            psi_coef,
        }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn flip(&mut self, site: usize) {
        let old = self.spins[site];
        self.sublattice_sum[self.geo.sublattice(site)] -= 2 * old as i64;
        for &b in self.graph.incident(site) {
            if let Some((_, k)) = self.geo.bond_slot(b) {
                let before = self.graph.is_frustrated(&self.spins, b);
                // flipping one endpoint always toggles the bond's frustration
                self.edge_count[k as usize] += if before { -1 } else { 1 };
            }
        }
        self.spins[site] = -old;
    }

    pub fn m_h(&self) -> ComplexValue<T> {
        self.m_coef
            .iter()
            .zip(self.sublattice_sum)
            .fold(ComplexValue::new(T::zero(), T::zero()), |acc, (c, s)| {
                acc + c * T::lit(s as f64)
            })
    }

    pub fn psi_h(&self) -> ComplexValue<T> {
        self.psi_coef
            .iter()
            .zip(self.edge_count)
            .fold(ComplexValue::new(T::zero(), T::zero()), |acc, (c, k)| {
                acc + c * T::lit(k as f64)
            })
    }
}

/// Slice averages of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderSample<T> {
    /// Slice-averaged complex `m_H`.
    pub m: ComplexValue<T>,
    /// Slice average of `|m_H|`.
    pub abs_m: T,
    pub psi: ComplexValue<T>,
    pub abs_psi: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSample<T> {
    pub n_h: usize,
    pub order: Option<OrderSample<T>>,
}

/// Averages the order parameters over all propagated states
/// `a_0 .. a_{L-1}` of `state`.
pub fn slice_measure<T: Real>(state: &SseState<T>, norm: MsNorm) -> SweepSample<T> {
    let graph = state.graph();
    let order = graph.geometry().map(|geo| {
        let mut tracker = OrderTracker::new(graph, geo, state.spins(), norm);
        let zero = ComplexValue::new(T::zero(), T::zero());
        let (mut m, mut abs_m, mut psi, mut abs_psi) = (zero, T::zero(), zero, T::zero());
        let mut run = 0usize;
        let mut flush = |tracker: &OrderTracker<T>, run: usize| {
            if run == 0 {
                return;
            }
            let w = T::from_count(run);
            let (mh, ph) = (tracker.m_h(), tracker.psi_h());
            m = m + mh * w;
            abs_m = abs_m + mh.norm() * w;
            psi = psi + ph * w;
            abs_psi = abs_psi + ph.norm() * w;
        };
        for op in state.ops() {
            run += 1;
            if let OperatorSlot::Field(i) = *op {
                flush(&tracker, run);
                run = 0;
                tracker.flip(i);
            }
        }
        flush(&tracker, run);
        let l = T::from_count(state.cutoff());
        OrderSample {
            m: m / l,
            abs_m: abs_m / l,
            psi: psi / l,
            abs_psi: abs_psi / l,
        }
    });
    SweepSample {
        n_h: state.n_h(),
        order,
    }
}

/// Means of one measurement bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinMeans<T> {
    pub sweeps: usize,
    pub n_mean: T,
    /// Mean over sweeps of the slice average of `|m_H|`.
    pub abs_m: Option<T>,
    /// Mean over sweeps of `|slice-averaged m_H|`.
    pub abs_m_sliceavg: Option<T>,
    pub abs_psi: Option<T>,
    pub abs_psi_sliceavg: Option<T>,
}

/// Thinned stream entry: sweep index and slice-averaged order parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamSample<T> {
    pub sweep: usize,
    pub m: ComplexValue<T>,
    pub psi: ComplexValue<T>,
}

/// Per-bin running sums plus the thinned sample stream.
#[derive(Debug, Clone)]
pub struct MeasurementAccumulator<T> {
    thin: usize,
    sweeps: usize,
    in_bin: usize,
    n_sum: T,
    ordered: bool,
    sums: [T; 4],
    bins: Vec<BinMeans<T>>,
    stream: Vec<StreamSample<T>>,
}

impl<T: Real> MeasurementAccumulator<T> {
    pub fn new(thin: usize) -> Self {
        MeasurementAccumulator {
            thin: thin.max(1),
            sweeps: 0,
            in_bin: 0,
            n_sum: T::zero(),
            ordered: false,
            sums: [T::zero(); 4],
            bins: Vec::new(),
            stream: Vec::new(),
        }
    }

    pub fn push(&mut self, sample: &SweepSample<T>) {
        self.n_sum = self.n_sum + T::from_count(sample.n_h);
        if let Some(o) = &sample.order {
            self.ordered = true;
            let vals = [o.abs_m, o.m.norm(), o.abs_psi, o.psi.norm()];
            for (s, v) in self.sums.iter_mut().zip(vals) {
                *s = *s + v;
            }
            if (self.sweeps + 1) % self.thin == 0 {
                self.stream.push(StreamSample {
                    sweep: self.sweeps,
                    m: o.m,
                    psi: o.psi,
                });
            }
        }
        self.sweeps += 1;
        self.in_bin += 1;
    }

    /// Closes the current bin and resets the bin sums.
    pub fn finish_bin(&mut self) -> Result<BinMeans<T>> {
        if self.in_bin == 0 {
            return Err(Error::Statistics("empty bin".into()));
        }
        let k = T::from_count(self.in_bin);
        let avg = |s: T| self.ordered.then(|| s / k);
        let bin = BinMeans {
            sweeps: self.in_bin,
            n_mean: self.n_sum / k,
            abs_m: avg(self.sums[0]),
            abs_m_sliceavg: avg(self.sums[1]),
            abs_psi: avg(self.sums[2]),
            abs_psi_sliceavg: avg(self.sums[3]),
        };
        self.bins.push(bin);
        self.in_bin = 0;
        self.n_sum = T::zero();
        self.sums = [T::zero(); 4];
        Ok(bin)
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn bins(&self) -> &[BinMeans<T>] {
        &self.bins
    }

    pub fn stream(&self) -> &[StreamSample<T>] {
        &self.stream
    }

    pub fn into_parts(self) -> (Vec<BinMeans<T>>, Vec<StreamSample<T>>) {
        (self.bins, self.stream)
    }
}

/// Mean of the bin means and its standard error
/// (sample standard deviation over `sqrt(nbins)`).
pub fn bin_statistics<T: Real>(bins: &[T]) -> Result<(T, T)> {
    if bins.len() < 2 {
        return Err(Error::Statistics(format!(
            "{} bin(s); at least 2 are needed",
            bins.len()
        )));
    }
    let k = T::from_count(bins.len());
    let mean = bins.iter().fold(T::zero(), |a, &b| a + b) / k;
    let var = bins
        .iter()
        .fold(T::zero(), |a, &b| a + (b - mean) * (b - mean))
        / (k - T::one());
    Ok((mean, (var / k).sqrt()))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lattice::{CouplingPattern, Lattice};
    use crate::rng::stream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn l1(g: f64) -> (Lattice, SpinGraph<f64>) {
        let lat = Lattice::build(5, 2, CouplingPattern::Default).unwrap();
        let graph = SpinGraph::from_lattice(&lat, g).unwrap();
        (lat, graph)
    }

    #[test]
    fn phases_sum_to_a_times_i() {
        let s = magnetization_phases::<f64>()
            .iter()
            .sum::<ComplexValue<f64>>();
        assert_relative_eq!(s.re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(s.im, phase_norm::<f64>(), epsilon = 1e-14);
    }

    #[test]
    fn polarised_states() {
        let (_, graph) = l1(0.0);
        let geo = graph.geometry().unwrap();
        let up = vec![1i8; 36];
        let down = vec![-1i8; 36];
        assert_eq!(
            sublattice_magnetizations::<f64>(geo, &up, MsNorm::PerSublattice),
            [1.0; 6]
        );
        assert_eq!(
            sublattice_magnetizations::<f64>(geo, &down, MsNorm::PerSublattice),
            [-1.0; 6]
        );
        let m = primary_order_parameter::<f64>(geo, &up, MsNorm::PerSublattice);
        assert_relative_eq!(m.re, 0.0, epsilon = 1e-14);
        assert_relative_eq!(m.im, 1.0, epsilon = 1e-14);
        let m = primary_order_parameter::<f64>(geo, &down, MsNorm::PerSublattice);
        assert_relative_eq!(m.im, -1.0, epsilon = 1e-14);
        let lit = primary_order_parameter::<f64>(geo, &up, MsNorm::Literal);
        assert_relative_eq!(lit.im, 1.0 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn ferro_all_up_has_no_bond_order() {
        let lat = Lattice::build(5, 2, CouplingPattern::Ferro).unwrap();
        let graph = SpinGraph::<f64>::from_lattice(&lat, 0.0).unwrap();
        let psi = secondary_order_parameter(&graph, graph.geometry().unwrap(), &[1; 36]);
        assert_eq!(psi, ComplexValue::new(0.0, 0.0));
    }

    #[test]
    fn single_position_frustration_gives_one_sixth() {
        let (_, graph) = l1(0.0);
        let geo = graph.geometry().unwrap();
        let up = vec![1i8; 36];
        let counts = unit_edge_counts(&graph, geo, &up);
        let k = counts
            .iter()
            .position(|&c| c == 6)
            .expect("all units aligned");
        let psi = secondary_order_parameter(&graph, geo, &up);
        let expect = frustration_phases::<f64>()[k] / 6.0;
        assert_relative_eq!(psi.re, expect.re, epsilon = 1e-14);
        assert_relative_eq!(psi.im, expect.im, epsilon = 1e-14);
    }

    #[test]
    fn energy_density_formula() {
        let (_, graph) = l1(0.0);
        assert_eq!(energy_density(0.0, 3.3, &graph), 1.5);
    }

    #[test]
    fn bin_statistics_cases() {
        assert_eq!(bin_statistics(&[1.0, 1.0, 1.0, 1.0]).unwrap(), (1.0, 0.0));
        let (m, e) = bin_statistics(&[0.0, 2.0]).unwrap();
        assert_relative_eq!(m, 1.0);
        assert_relative_eq!(e, 1.0, epsilon = 1e-15);
        assert!(bin_statistics(&[1.0]).is_err());
    }

    #[test]
    fn empty_string_measures_static_value() {
        let (_, graph) = l1(0.5);
        let graph = Arc::new(graph);
        let state = SseState::random(graph.clone(), 1.0, stream(2, 0)).unwrap();
        let geo = graph.geometry().unwrap();
        let sample = slice_measure(&state, MsNorm::PerSublattice).order.unwrap();
        let m = primary_order_parameter::<f64>(geo, state.spins(), MsNorm::PerSublattice);
        assert_relative_eq!(sample.m.re, m.re, epsilon = 1e-14);
        assert_relative_eq!(sample.abs_m, m.norm(), epsilon = 1e-14);
    }

    #[test]
    fn field_pair_mixes_two_static_values() {
        let (_, graph) = l1(0.5);
        let graph = Arc::new(graph);
        let geo = graph.geometry().unwrap();
        let mut ops = vec![OperatorSlot::Null; 40];
        let (p1, p2, site) = (7, 19, 11);
        ops[p1] = OperatorSlot::Field(site);
        ops[p2] = OperatorSlot::Field(site);
        let spins = vec![1i8; 36];
        let state = SseState::new(graph.clone(), 1.0, spins.clone(), stream(1, 0))
            .unwrap()
            .with_operators(ops);
        let mut flipped = spins.clone();
        flipped[site] = -1;
        let a = primary_order_parameter::<f64>(geo, &spins, MsNorm::PerSublattice);
        let b = primary_order_parameter::<f64>(geo, &flipped, MsNorm::PerSublattice);
        let w = (p2 - p1) as f64 / 40.0;
        let expect = a * (1.0 - w) + b * w;
        let got = slice_measure(&state, MsNorm::PerSublattice).order.unwrap();
        assert_relative_eq!(got.m.re, expect.re, epsilon = 1e-14);
        assert_relative_eq!(got.m.im, expect.im, epsilon = 1e-14);
        assert_relative_eq!(
            got.abs_m,
            a.norm() * (1.0 - w) + b.norm() * w,
            epsilon = 1e-14
        );
    }

    #[test]
    fn stream_length_is_sweeps_over_thin() {
        let mut acc = MeasurementAccumulator::<f64>::new(3);
        let s = SweepSample {
            n_h: 4,
            order: Some(OrderSample {
                m: ComplexValue::new(0.0, 1.0),
                abs_m: 1.0,
                psi: ComplexValue::new(0.0, 0.0),
                abs_psi: 0.0,
            }),
        };
        for _ in 0..10 {
            acc.push(&s);
        }
        assert_eq!(acc.stream().len(), 10 / 3);
        let bin = acc.finish_bin().unwrap();
        assert_eq!(bin.sweeps, 10);
        assert_eq!(bin.n_mean, 4.0);
        assert!(acc.finish_bin().is_err());
    }

    proptest! {
        #[test]
        fn flip_symmetries(bits in any::<u64>()) {
            let (_, graph) = l1(0.0);
            let geo = graph.geometry().unwrap();
            let spins: Vec<i8> = (0..36).map(|k| if bits >> k & 1 == 1 { 1 } else { -1 }).collect();
            let neg: Vec<i8> = spins.iter().map(|s| -s).collect();
            let m = primary_order_parameter::<f64>(geo, &spins, MsNorm::PerSublattice);
            let mn = primary_order_parameter::<f64>(geo, &neg, MsNorm::PerSublattice);
            prop_assert!((m + mn).norm() < 1e-12);
            let p = secondary_order_parameter(&graph, geo, &spins);
            let pn = secondary_order_parameter(&graph, geo, &neg);
            prop_assert!((p - pn).norm() < 1e-12);
            let counts = unit_edge_counts(&graph, geo, &spins);
            let direct = geo.units().iter().flat_map(|u| u.bonds).filter(|&b| graph.is_frustrated(&spins, b)).count();
            prop_assert_eq!(counts.iter().sum::<usize>(), direct);
        }

        #[test]
        fn sublattice_sums_match_brute_force(bits in any::<u64>()) {
            let (lat, graph) = l1(0.0);
            let geo = graph.geometry().unwrap();
            let spins: Vec<i8> = (0..36).map(|k| if bits >> k & 1 == 1 { 1 } else { -1 }).collect();
            let m = sublattice_magnetizations::<f64>(geo, &spins, MsNorm::PerSublattice);
            for s in 1..=6u8 {
                let (sum, count) = lat.sites().iter().filter(|x| x.sublattice == Some(s))
                    .fold((0i32, 0usize), |(a, c), x| (a + spins[x.id] as i32, c + 1));
                prop_assert_eq!(count, 6);
                prop_assert!((m[s as usize - 1] - sum as f64 / 6.0).abs() < 1e-15);
            }
        }

        #[test]
        fn incremental_tracker_matches_recompute(seed in any::<u64>()) {
            let (_, graph) = l1(0.0);
            let geo = graph.geometry().unwrap();
            let mut rng = stream(seed, 0);
            let spins: Vec<i8> = (0..36).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            let mut tracker = OrderTracker::new(&graph, geo, &spins, MsNorm::PerSublattice);
            for _ in 0..50 {
                tracker.flip(rng.gen_range(0..36));
                let m = primary_order_parameter::<f64>(geo, tracker.spins(), MsNorm::PerSublattice);
                let p = secondary_order_parameter(&graph, geo, tracker.spins());
                prop_assert!((tracker.m_h() - m).norm() < 1e-12);
                prop_assert!((tracker.psi_h() - p).norm() < 1e-12);
            }
        }
    }
}
