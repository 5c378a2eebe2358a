//! Hamiltonian view shared by the engine and the exact oracles:
//! `H = sum J_ij s_i s_j + g sum s^x_i` on an arbitrary bond list.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SpinConfig};
use crate::Real;

/// Edge ids of one tracked hexagon, `bonds[k - 1]` being edge position `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitEdges {
    pub bonds: [usize; 6],
}

/// Sublattice labels and tracked units needed by the order parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderGeometry {
    /// Zero-based sublattice label (0..6) per site.
    sublattice: Vec<u8>,
    sublattice_size: [usize; 6],
    units: Vec<UnitEdges>,
    /// `(unit, zero-based edge position)` for bonds that are unit edges.
    bond_slot: Vec<Option<(usize, u8)>>,
}

impl OrderGeometry {
    pub fn new(
        n: usize,
        edges: &[(usize, usize)],
        sublattice: Vec<u8>,
        units: Vec<UnitEdges>,
    ) -> Result<Self> {
        if sublattice.len() != n {
            return Err(Error::Document(format!(
                "{} sublattice labels for {n} sites",
                sublattice.len()
            )));
        }
        let mut sublattice_size = [0usize; 6];
        for &s in &sublattice {
            if s >= 6 {
                return Err(Error::Document(format!(
                    "sublattice label {} out of 1..6",
                    s + 1
                )));
            }
            sublattice_size[s as usize] += 1;
        }
        let mut bond_slot = vec![None; edges.len()];
        for (u, unit) in units.iter().enumerate() {
            for (k, &b) in unit.bonds.iter().enumerate() {
                let slot = bond_slot.get_mut(b).ok_or_else(|| {
                    Error::Document(format!("unit {u} references missing bond {b}"))
                })?;
                if slot.replace((u, k as u8)).is_some() {
                    return Err(Error::Document(format!("bond {b} is an edge of two units")));
                }
            }
        }
        Ok(OrderGeometry {
            sublattice,
            sublattice_size,
            units,
            bond_slot,
        })
    }

    /// Zero-based label of site `i`.
    pub fn sublattice(&self, i: usize) -> usize {
        self.sublattice[i] as usize
    }

    pub fn sublattice_size(&self) -> [usize; 6] {
        self.sublattice_size
    }

    pub fn units(&self) -> &[UnitEdges] {
        &self.units
    }

    pub fn bond_slot(&self, b: usize) -> Option<(usize, u8)> {
        self.bond_slot[b]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphBond<T> {
    pub i: usize,
    pub j: usize,
    pub coupling: T,
}

/// Sites, signed couplings and the transverse field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinGraph<T> {
    n: usize,
    bonds: Vec<GraphBond<T>>,
    g: T,
    adjacency: Vec<Vec<usize>>,
    geometry: Option<OrderGeometry>,
    /// `(lx, ly)` when built from a honeycomb lattice.
    cells: Option<(usize, usize)>,
}

/// Wire form of a toy graph.
#[derive(Debug, Serialize, Deserialize)]
struct GraphDoc {
    n: usize,
    g: f64,
    bonds: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sublattice: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    units: Option<Vec<[usize; 6]>>,
}

impl<T: Real> SpinGraph<T> {
    pub fn new(n: usize, bonds: Vec<GraphBond<T>>, g: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::Document("graph has no sites".into()));
        }
        if !(g >= T::zero()) || !g.is_finite() {
            return Err(Error::Config(format!("g = {g} must be finite and >= 0")));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for (id, b) in bonds.iter().enumerate() {
            if b.i >= n || b.j >= n || b.i == b.j {
                return Err(Error::Document(format!(
                    "bond {id} ({}, {}) has invalid endpoints",
                    b.i, b.j
                )));
            }
            if !b.coupling.is_finite() {
                return Err(Error::Document(format!(
                    "bond {id} has non-finite coupling"
                )));
            }
            if !seen.insert((b.i.min(b.j), b.i.max(b.j))) {
                return Err(Error::Document(format!(
                    "bond {id} duplicates another bond"
                )));
            }
            adjacency[b.i].push(id);
            adjacency[b.j].push(id);
        }
        Ok(SpinGraph {
            n,
            bonds,
            g,
            adjacency,
            geometry: None,
            cells: None,
        })
    }

    pub fn from_lattice(lattice: &Lattice, g: T) -> Result<Self> {
        let bonds = lattice
            .bonds()
            .iter()
            .map(|b| GraphBond {
                i: b.i,
                j: b.j,
                coupling: T::lit(b.coupling as f64),
            })
            .collect();
        let mut graph = Self::new(lattice.nn(), bonds, g)?;
        graph.geometry = lattice.order_geometry();
        graph.cells = Some((lattice.lx(), lattice.ly()));
        Ok(graph)
    }

    pub fn with_geometry(mut self, geometry: OrderGeometry) -> Result<Self> {
        if geometry.sublattice.len() != self.n || geometry.bond_slot.len() != self.bonds.len() {
            return Err(Error::Document(
                "order annotations do not fit the graph".into(),
            ));
        }
        self.geometry = Some(geometry);
        Ok(self)
    }

    pub fn with_g(mut self, g: T) -> Result<Self> {
        if !(g >= T::zero()) || !g.is_finite() {
            return Err(Error::Config(format!("g = {g} must be finite and >= 0")));
        }
        self.g = g;
        Ok(self)
    }

    /// Parses `{n, g, bonds: [[i, j, J], ...]}` with optional `sublattice`
    /// (labels 1..6) and `units` (six bond ids each).
    pub fn parse(text: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        let bonds = doc
            .bonds
            .iter()
            .map(|&(i, j, c)| GraphBond {
                i,
                j,
                coupling: T::lit(c),
            })
            .collect();
        let graph = Self::new(doc.n, bonds, T::lit(doc.g))?;
        match (doc.sublattice, doc.units) {
            (None, None) => Ok(graph),
            (Some(labels), Some(units)) => {
                if labels.iter().any(|&l| !(1..=6).contains(&l)) {
                    return Err(Error::Document("sublattice labels must be 1..6".into()));
                }
                let geometry = OrderGeometry::new(
                    graph.n,
                    &graph.edge_list(),
                    labels.iter().map(|l| l - 1).collect(),
                    units.into_iter().map(|bonds| UnitEdges { bonds }).collect(),
                )?;
                graph.with_geometry(geometry)
            }
            _ => Err(Error::Document(
                "sublattice and units must be given together".into(),
            )),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let doc = GraphDoc {
            n: self.n,
            g: self.g.to_f64_lossy(),
            bonds: self
                .bonds
                .iter()
                .map(|b| (b.i, b.j, b.coupling.to_f64_lossy()))
                .collect(),
            sublattice: self
                .geometry
                .as_ref()
                .map(|geo| geo.sublattice.iter().map(|s| s + 1).collect()),
            units: self
                .geometry
                .as_ref()
                .map(|geo| geo.units.iter().map(|u| u.bonds).collect()),
        };
        serde_json::to_string_pretty(&doc).expect("graph serialises")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nb(&self) -> usize {
        self.bonds.len()
    }

    pub fn g(&self) -> T {
        self.g
    }

    pub fn bonds(&self) -> &[GraphBond<T>] {
        &self.bonds
    }

    pub fn bond(&self, b: usize) -> &GraphBond<T> {
        &self.bonds[b]
    }

    /// Bond ids incident on site `i`.
    pub fn incident(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn geometry(&self) -> Option<&OrderGeometry> {
        self.geometry.as_ref()
    }

    pub fn cells(&self) -> Option<(usize, usize)> {
        self.cells
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.bonds.iter().map(|b| (b.i, b.j)).collect()
    }

    /// `sum_b |J_b|`.
    pub fn abs_coupling_sum(&self) -> T {
        self.bonds
            .iter()
            .fold(T::zero(), |acc, b| acc + b.coupling.abs())
    }

    /// Whether bond `b` has positive energy `J s_i s_j` in `spins`.
    #[inline]
    pub fn is_frustrated(&self, spins: &[i8], b: usize) -> bool {
        let bond = &self.bonds[b];
        let prod = spins[bond.i] * spins[bond.j];
        (bond.coupling > T::zero() && prod > 0) || (bond.coupling < T::zero() && prod < 0)
    }

    /// Classical energy `sum J s_i s_j`.
    pub fn classical_energy(&self, spins: &[i8]) -> T {
        self.bonds.iter().fold(T::zero(), |acc, b| {
            acc + b.coupling * T::lit((spins[b.i] * spins[b.j]) as f64)
        })
    }

    pub fn classical_energy_of(&self, spins: &SpinConfig) -> T {
        self.classical_energy(spins.values())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CouplingPattern;

    #[test]
    fn toy_document_round_trip() {
        let text = r#"{"n": 3, "g": 0.5, "bonds": [[0, 1, 1.0], [1, 2, -1.0], [2, 0, 0.5]]}"#;
        let g = SpinGraph::<f64>::parse(text).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.incident(1), &[0, 1]);
        let back = SpinGraph::<f64>::parse(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert_eq!(g.abs_coupling_sum(), 2.5);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(SpinGraph::<f64>::parse(r#"{"n": 2, "g": 0, "bonds": [[0, 2, 1]]}"#).is_err());
        assert!(SpinGraph::<f64>::parse(r#"{"n": 2, "g": 0, "bonds": [[0, 0, 1]]}"#).is_err());
        assert!(
            SpinGraph::<f64>::parse(r#"{"n": 2, "g": 0, "bonds": [[0, 1, 1], [1, 0, 1]]}"#)
                .is_err()
        );
        assert!(SpinGraph::<f64>::parse(r#"{"n": 2, "g": -1, "bonds": []}"#).is_err());
    }

    #[test]
    fn lattice_graph_keeps_annotations() {
        let lat = Lattice::build(5, 2, CouplingPattern::Default).unwrap();
        let g = SpinGraph::<f64>::from_lattice(&lat, 0.3).unwrap();
        let geo = g.geometry().unwrap();
        assert_eq!(geo.sublattice_size(), [6; 6]);
        assert_eq!(geo.units().len(), 6);
        let text = g.to_json();
        let back = SpinGraph::<f64>::parse(&text).unwrap();
        assert_eq!(back.geometry(), g.geometry());
        let up = SpinConfig::uniform(36, 1);
        assert_eq!(g.classical_energy_of(&up), lat.classical_energy(&up) as f64);
    }
}
