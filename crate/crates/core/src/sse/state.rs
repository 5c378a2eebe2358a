use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::links::LinkedVertexList;
use super::OperatorSlot;
use crate::config::{InitMode, RunConfig};
use crate::error::{Error, Result};
use crate::graph::SpinGraph;
use crate::lattice::SpinConfig;
use crate::rng::ChainRng;
use crate::Real;

/// Operator-string length of a fresh state.
pub const INITIAL_CUTOFF: usize = 20;

/// The Markov-chain configuration: stored spins, operator string and the
/// chain's random stream.
#[derive(Debug, Clone)]
pub struct SseState<T> {
    graph: Arc<SpinGraph<T>>,
    beta: T,
    spins: Vec<i8>,
    ops: Vec<OperatorSlot>,
    n_h: usize,
    margin: T,
    rng: ChainRng,
    saturation: u64,
    max_nh: usize,
    /// Cumulative `|J|` for bond selection; `None` when all `|J|` are equal.
    bond_cdf: Option<Vec<T>>,
    links: LinkedVertexList,
    marks: Vec<u8>,
    stack: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// Recorded `n_h` differs from the scanned count.
    Count { recorded: usize, actual: usize },
    /// A slot names a site or bond the graph does not have.
    BadIndex,
    /// Site hosts an odd number of `Field` slots.
    FieldParity { site: usize },
    /// `Ising` slot on a bond frustrated in its slice.
    ZeroWeight { bond: usize },
    /// Propagating through all slots does not return the stored state.
    Closure { site: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub slice: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slice {
            Some(p) => write!(f, "slice {p}: {:?}", self.kind),
            None => write!(f, "{:?}", self.kind),
        }
    }
}

/// Exact fingerprint of a configuration weight: expansion order, number of
/// site operators (each contributing `g`) and per-bond `Ising` multiplicity
/// (each contributing `2|J_b|`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightKey {
    pub cutoff: usize,
    pub n_h: usize,
    pub site_ops: usize,
    pub ising_per_bond: Vec<usize>,
}

impl<T: Real> SseState<T> {
    /// Fresh state: the given spins and [`INITIAL_CUTOFF`] null slots.
    pub fn new(graph: Arc<SpinGraph<T>>, beta: T, spins: Vec<i8>, rng: ChainRng) -> Result<Self> {
        if spins.len() != graph.n() {
            return Err(Error::Config(format!(
                "initial state has {} spins, graph has {} sites",
                spins.len(),
                graph.n()
            )));
        }
        let spins = SpinConfig::new(spins)?.into_inner();
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(Error::Config(format!(
                "beta = {beta} must be finite and > 0"
            )));
        }
        let margin = match graph.cells() {
            Some((lx, ly)) => T::from_count((lx * ly).pow(2)) / T::lit(100.0),
            None => T::one(),
        };
        let first = graph.bonds().first().map(|b| b.coupling.abs());
        let uniform = graph
            .bonds()
            .iter()
            .all(|b| Some(b.coupling.abs()) == first);
        let bond_cdf = (!uniform).then(|| {
            let mut acc = T::zero();
            graph
                .bonds()
                .iter()
                .map(|b| {
                    acc = acc + b.coupling.abs();
                    acc
                })
                .collect()
        });
        Ok(SseState {
            graph,
            beta,
            spins,
            ops: vec![OperatorSlot::Null; INITIAL_CUTOFF],
            n_h: 0,
            margin,
            rng,
            saturation: 0,
            max_nh: 0,
            bond_cdf,
            links: LinkedVertexList::default(),
            marks: Vec::new(),
            stack: Vec::new(),
        })
    }

    /// Fresh state with independent uniformly random spins drawn from `rng`.
    pub fn random(graph: Arc<SpinGraph<T>>, beta: T, mut rng: ChainRng) -> Result<Self> {
        let spins = (0..graph.n())
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        Self::new(graph, beta, spins, rng)
    }

    /// Initial state as selected by `config.init`.
    pub fn init(graph: Arc<SpinGraph<T>>, config: &RunConfig<T>, rng: ChainRng) -> Result<Self> {
        match &config.init {
            InitMode::Random => Self::random(graph, config.beta, rng),
            InitMode::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let spins: SpinConfig = text.parse()?;
                Self::new(graph, config.beta, spins.into_inner(), rng)
            }
        }
    }

    /// Replaces the operator string; no validity check is made.
    pub fn with_operators(mut self, ops: Vec<OperatorSlot>) -> Self {
        self.n_h = ops.iter().filter(|o| !o.is_null()).count();
        self.ops = ops;
        self
    }

    /// Overrides the additive term of the cutoff rule.
    pub fn with_cutoff_margin(mut self, margin: T) -> Self {
        self.margin = margin;
        self
    }

    pub fn graph(&self) -> &SpinGraph<T> {
        &self.graph
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Stored state `|a_0>`.
    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn ops(&self) -> &[OperatorSlot] {
        &self.ops
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn cutoff(&self) -> usize {
        self.ops.len()
    }

    /// Insertions that left no null slot since the last counter reset.
    pub fn saturation_count(&self) -> u64 {
        self.saturation
    }

    /// Largest `n_h` seen since the last counter reset.
    pub fn max_nh(&self) -> usize {
        self.max_nh
    }

    pub fn reset_counters(&mut self) {
        self.saturation = 0;
        self.max_nh = self.n_h;
    }

    pub fn rng_mut(&mut self) -> &mut ChainRng {
        &mut self.rng
    }

    /// `g n + sum 2|J_b|`, the total insertion weight.
    fn insertion_norm(&self) -> T {
        self.graph.g() * T::from_count(self.graph.n()) + T::lit(2.0) * self.graph.abs_coupling_sum()
    }

    fn pick_bond(&mut self) -> usize {
        let nb = self.graph.nb();
        match &self.bond_cdf {
            None => self.rng.gen_range(0..nb),
            Some(cdf) => {
                let r = T::unit(&mut self.rng) * cdf[nb - 1];
                cdf.partition_point(|&c| c <= r).min(nb - 1)
            }
        }
    }

    /// One pass over all slices inserting and removing diagonal operators
    /// while propagating the spins through `Field` slots.
    pub fn diagonal_update(&mut self) {
        let c = self.insertion_norm();
        if !(c > T::zero()) {
            for op in &self.ops {
                if let OperatorSlot::Field(i) = *op {
                    self.spins[i] = -self.spins[i];
                }
            }
            return;
        }
        let n = self.graph.n();
        let nb = self.graph.nb();
        let p_const = self.graph.g() * T::from_count(n) / c;
        let beta_c = self.beta * c;
        let cutoff = self.ops.len();

        for p in 0..cutoff {
            match self.ops[p] {
                OperatorSlot::Null => {
                    let proposal = if T::unit(&mut self.rng) < p_const || nb == 0 {
                        OperatorSlot::Constant(self.rng.gen_range(0..n))
                    } else {
                        let b = self.pick_bond();
                        if self.graph.is_frustrated(&self.spins, b) {
                            continue;
                        }
                        OperatorSlot::Ising(b)
                    };
                    let ratio = beta_c / T::from_count(cutoff - self.n_h);
                    if ratio >= T::one() || T::unit(&mut self.rng) < ratio {
                        self.ops[p] = proposal;
                        self.n_h += 1;
                        self.max_nh = self.max_nh.max(self.n_h);
                        if self.n_h == cutoff {
                            self.saturation += 1;
                        }
                    }
                }
                OperatorSlot::Constant(_) | OperatorSlot::Ising(_) => {
                    let ratio = T::from_count(cutoff - self.n_h + 1) / beta_c;
                    if ratio >= T::one() || T::unit(&mut self.rng) < ratio {
                        self.ops[p] = OperatorSlot::Null;
                        self.n_h -= 1;
                    }
                }
                OperatorSlot::Field(i) => self.spins[i] = -self.spins[i],
            }
        }
    }

    /// Fresh leg linkage for the current operator string.
    pub fn build_links(&self) -> LinkedVertexList {
        LinkedVertexList::build(self)
    }

    /// Flips every cluster with probability 1/2. `links` must have been
    /// built for the current operator string.
    pub fn cluster_update(&mut self, links: &LinkedVertexList) {
        let legs = 4 * self.ops.len();
        debug_assert_eq!(links.legs(), legs);
        self.marks.clear();
        self.marks.resize(legs, 0);
        let mut stack = std::mem::take(&mut self.stack);

        for start in 0..legs {
            if self.marks[start] != 0 || links.link(start) == super::FREE {
                continue;
            }
            let mark = if self.rng.gen::<bool>() { 2 } else { 1 };
            stack.clear();
            stack.push(start);
            while let Some(leg) = stack.pop() {
                if self.marks[leg] != 0 {
                    continue;
                }
                let p = leg / 4;
                if let OperatorSlot::Ising(_) = self.ops[p] {
                    for w in 4 * p..4 * p + 4 {
                        if self.marks[w] == 0 {
                            self.marks[w] = mark;
                            let to = links.link(w);
                            if self.marks[to] == 0 {
                                stack.push(to);
                            }
                        }
                    }
                } else {
                    self.marks[leg] = mark;
                    let to = links.link(leg);
                    if self.marks[to] == 0 {
                        stack.push(to);
                    }
                }
            }
        }
        self.stack = stack;

        for p in 0..self.ops.len() {
            let flips = u8::from(self.marks[4 * p] == 2) + u8::from(self.marks[4 * p + 2] == 2);
            if flips == 1 {
                self.ops[p] = match self.ops[p] {
                    OperatorSlot::Constant(i) => OperatorSlot::Field(i),
                    OperatorSlot::Field(i) => OperatorSlot::Constant(i),
                    other => other,
                };
            }
        }
        for site in 0..self.spins.len() {
            let first = links.first(site);
            let flip = if first == super::FREE {
                self.rng.gen::<bool>()
            } else {
                self.marks[first] == 2
            };
            if flip {
                self.spins[site] = -self.spins[site];
            }
        }
    }

    /// Grows the string to `ceil(10/9 n_h + margin)` slots if that exceeds
    /// the current cutoff, appending null slots.
    pub fn adjust_cutoff(&mut self) -> bool {
        let target = (T::lit(10.0 / 9.0) * T::from_count(self.n_h) + self.margin)
            .ceil()
            .to_usize()
            .unwrap_or(0);
        if target > self.ops.len() {
            self.ops.resize(target, OperatorSlot::Null);
            true
        } else {
            false
        }
    }

    /// Diagonal update, linking, cluster flips and optionally cutoff growth.
    /// Returns whether the cutoff grew.
    pub fn mc_sweep(&mut self, adjust: bool) -> bool {
        self.diagonal_update();
        let mut links = std::mem::take(&mut self.links);
        let graph = Arc::clone(&self.graph);
        links.rebuild(graph.n(), &self.ops, |b| {
            let bond = graph.bond(b);
            (bond.i, bond.j)
        });
        self.cluster_update(&links);
        self.links = links;
        adjust && self.adjust_cutoff()
    }

    /// Re-derives every configuration invariant; reports the first failure.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let n = self.graph.n();
        let nb = self.graph.nb();
        let fail = |slice, kind| Err(Violation { slice, kind });

        let actual = self.ops.iter().filter(|o| !o.is_null()).count();
        if actual != self.n_h {
            return fail(
                None,
                ViolationKind::Count {
                    recorded: self.n_h,
                    actual,
                },
            );
        }
        let mut parity = vec![false; n];
        for (p, op) in self.ops.iter().enumerate() {
            let ok = match *op {
                OperatorSlot::Null => true,
                OperatorSlot::Constant(i) => i < n,
                OperatorSlot::Field(i) => {
                    if i < n {
                        parity[i] = !parity[i];
                    }
                    i < n
                }
                OperatorSlot::Ising(b) => b < nb,
            };
            if !ok {
                return fail(Some(p), ViolationKind::BadIndex);
            }
        }
        if let Some(site) = parity.iter().position(|&odd| odd) {
            return fail(None, ViolationKind::FieldParity { site });
        }
        let mut spins = self.spins.clone();
        for (p, op) in self.ops.iter().enumerate() {
            match *op {
                OperatorSlot::Field(i) => spins[i] = -spins[i],
                OperatorSlot::Ising(b) if self.graph.is_frustrated(&spins, b) => {
                    return fail(Some(p), ViolationKind::ZeroWeight { bond: b });
                }
                _ => {}
            }
        }
        if let Some(site) = (0..n).find(|&i| spins[i] != self.spins[i]) {
            return fail(None, ViolationKind::Closure { site });
        }
        Ok(())
    }

    /// Weight fingerprint, `None` when the configuration has zero weight.
    pub fn weight_key(&self) -> Option<WeightKey> {
        self.validate().ok()?;
        let mut ising_per_bond = vec![0; self.graph.nb()];
        let mut site_ops = 0;
        for op in &self.ops {
            match *op {
                OperatorSlot::Ising(b) => ising_per_bond[b] += 1,
                OperatorSlot::Constant(_) | OperatorSlot::Field(_) => site_ops += 1,
                OperatorSlot::Null => {}
            }
        }
        Some(WeightKey {
            cutoff: self.ops.len(),
            n_h: self.n_h,
            site_ops,
            ising_per_bond,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBond;
    use crate::rng::stream;

    fn ring(n: usize, g: f64) -> Arc<SpinGraph<f64>> {
        let bonds = (0..n)
            .map(|k| GraphBond {
                i: k,
                j: (k + 1) % n,
                coupling: if k == 0 { 1.0 } else { -1.0 },
            })
            .collect();
        Arc::new(SpinGraph::new(n, bonds, g).unwrap())
    }

    #[test]
    fn fresh_state_is_valid() {
        let s = SseState::random(ring(6, 0.5), 3.3, stream(1, 0)).unwrap();
        assert_eq!(s.cutoff(), INITIAL_CUTOFF);
        assert_eq!(s.n_h(), 0);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn random_init_is_deterministic() {
        let a = SseState::random(ring(6, 0.5), 1.0, stream(9, 0)).unwrap();
        let b = SseState::random(ring(6, 0.5), 1.0, stream(9, 0)).unwrap();
        assert_eq!(a.spins(), b.spins());
    }

    #[test]
    fn wrong_length_spins_are_rejected() {
        assert!(SseState::new(ring(6, 0.5), 1.0, vec![1; 5], stream(1, 0)).is_err());
    }

    #[test]
    fn lone_field_is_a_parity_violation() {
        let s = SseState::new(ring(6, 0.5), 1.0, vec![1; 6], stream(1, 0))
            .unwrap()
            .with_operators(vec![
                OperatorSlot::Null,
                OperatorSlot::Field(3),
                OperatorSlot::Null,
            ]);
        let v = s.validate().unwrap_err();
        assert_eq!(v.kind, ViolationKind::FieldParity { site: 3 });
    }

    #[test]
    fn frustrated_ising_is_zero_weight() {
        // bond 0 is antiferromagnetic, so aligned spins frustrate it
        let s = SseState::new(ring(6, 0.5), 1.0, vec![1; 6], stream(1, 0))
            .unwrap()
            .with_operators(vec![OperatorSlot::Null, OperatorSlot::Ising(0)]);
        let v = s.validate().unwrap_err();
        assert_eq!(v.slice, Some(1));
        assert_eq!(v.kind, ViolationKind::ZeroWeight { bond: 0 });
    }

    #[test]
    fn zero_field_never_inserts_site_operators() {
        let mut s = SseState::random(ring(6, 0.0), 3.3, stream(4, 0)).unwrap();
        for _ in 0..500 {
            s.mc_sweep(true);
            assert!(s.ops().iter().all(|o| o.site().is_none()));
        }
    }

    #[test]
    fn cutoff_rule_for_l1_lattice() {
        use crate::lattice::{CouplingPattern, Lattice};
        let lat = Lattice::build(5, 2, CouplingPattern::Default).unwrap();
        let graph = Arc::new(SpinGraph::from_lattice(&lat, 0.5).unwrap());
        let ops: Vec<_> = (0..90).map(|_| OperatorSlot::Constant(0)).collect();
        let mut s = SseState::new(graph.clone(), 3.3, vec![1; 36], stream(1, 0))
            .unwrap()
            .with_operators(ops);
        assert!(s.adjust_cutoff());
        assert_eq!(s.cutoff(), 101);
        assert_eq!(s.n_h(), 90);
        assert!(s.validate().is_ok());

        let mut empty = SseState::new(graph, 3.3, vec![1; 36], stream(1, 0)).unwrap();
        assert!(!empty.adjust_cutoff());
        assert_eq!(empty.cutoff(), INITIAL_CUTOFF);
    }

    #[test]
    fn lone_ising_cluster_flips_both_lines_or_neither() {
        let graph = ring(6, 0.5);
        let base = SseState::new(graph, 1.0, vec![1, -1, 1, 1, 1, 1], stream(3, 0))
            .unwrap()
            .with_operators(vec![
                OperatorSlot::Null,
                OperatorSlot::Ising(0),
                OperatorSlot::Null,
            ]);
        for k in 0..20 {
            let mut s = base.clone();
            *s.rng_mut() = stream(3, k);
            let links = s.build_links();
            s.cluster_update(&links);
            assert_eq!(s.spins()[0] * s.spins()[1], -1);
            assert_eq!(s.weight_key(), base.weight_key());
        }
    }
}
