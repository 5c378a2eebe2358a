//! Periodic honeycomb geometry in brick-wall coordinates.
//!
//! Sites live on an `nx` x `ny` grid. Every site has horizontal bonds to
//! `(x +- 1, y)` and one vertical bond: upward when `x + y` is even,
//! downward otherwise. Wrapping past the top row shifts `x` by `twist`,
//! which is zero for every lattice the default coupling pattern accepts.
//!
//! Elementary hexagons are anchored at the sites with `x + y` even and list
//! their sites counter-clockwise from the anchor:
//!
//! ```text
//!   (x,y+1) -- (x+1,y+1) -- (x+2,y+1)
//!      |                        |
//!   (x,y)  --  (x+1,y)   --  (x+2,y)
//! ```
//!
//! Tracked units are the hexagons anchored at `x = 0 (mod 6)` on even rows
//! (type A) and `x = 3 (mod 6)` on odd rows (type B). They partition the
//! sites. Type A numbers its sites 1..6 starting at `(x+1, y)`, type B is the
//! same pattern rotated by half a turn and starts at `(x+1, y+1)`. The
//! number of a site inside its unit is its sublattice label, and unit edge
//! `k` joins sites `k` and `k + 1 (mod 6)`.
//!
//! The default coupling pattern makes the horizontal bonds `(x,y)-(x+1,y)`
//! with even `x` and even `y` antiferromagnetic, which puts exactly one
//! antiferromagnetic bond on every hexagon.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{OrderGeometry, UnitEdges};

/// Coupling sign assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingPattern {
    /// One antiferromagnetic bond per hexagon.
    #[default]
    Default,
    /// Every bond ferromagnetic.
    Ferro,
}

impl fmt::Display for CouplingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingPattern::Default => f.write_str("default"),
            CouplingPattern::Ferro => f.write_str("ferro"),
        }
    }
}

impl FromStr for CouplingPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "default" => Ok(CouplingPattern::Default),
            "ferro" => Ok(CouplingPattern::Ferro),
            other => Err(Error::Config(format!(
                "unknown coupling pattern `{other}` (expected default or ferro)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: usize,
    pub x: usize,
    pub y: usize,
    /// Label 1..6, absent when the geometry cannot host tracked units.
    pub sublattice: Option<u8>,
    /// Planar embedding with unit bond length, for plotting only.
    pub pos: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub id: usize,
    pub i: usize,
    pub j: usize,
    /// `+1` antiferromagnetic, `-1` ferromagnetic (units of J).
    #[serde(rename = "J")]
    pub coupling: i8,
    /// Edge position 1..6 inside a tracked unit, 0 when not a unit edge.
    pub unit_pos: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub sites: [usize; 6],
    pub bonds: [usize; 6],
}

/// A tracked hexagon; `bonds[k - 1]` is edge `k`, joining `sites[k - 1]`
/// and `sites[k % 6]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub sites: [usize; 6],
    pub bonds: [usize; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    lx: usize,
    ly: usize,
    pattern: CouplingPattern,
    nx: usize,
    ny: usize,
    twist: usize,
    sites: Vec<Site>,
    bonds: Vec<Bond>,
    plaquettes: Vec<Plaquette>,
    units: Vec<Unit>,
}

/// Wire form of a lattice dump.
#[derive(Serialize, Deserialize)]
struct LatticeDoc {
    lx: usize,
    ly: usize,
    nn: usize,
    nb: usize,
    pattern: CouplingPattern,
    nx: usize,
    ny: usize,
    twist: usize,
    sites: Vec<Site>,
    bonds: Vec<Bond>,
    plaquettes: Vec<[usize; 6]>,
    units: Vec<Unit>,
}

struct Grid {
    nx: usize,
    ny: usize,
    twist: usize,
}

impl Grid {
    fn id(&self, x: i64, y: i64) -> usize {
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let wraps = y.div_euclid(ny);
        let y = y.rem_euclid(ny);
        let x = (x + wraps * self.twist as i64).rem_euclid(nx);
        (y * nx + x) as usize
    }

    fn xy(&self, id: usize) -> (usize, usize) {
        (id % self.nx, id / self.nx)
    }
}

impl Lattice {
    /// Builds the lattice for `lx x ly` hexagons with the sizes the tracked
    /// unit labelling supports: `lx = 5 + 6m`, `ly = 2 + 3n`. The ferro
    /// pattern accepts any `lx, ly >= 1`.
    pub fn build(lx: usize, ly: usize, pattern: CouplingPattern) -> Result<Self> {
        match pattern {
            CouplingPattern::Default => {
                if lx < 5 || (lx - 5) % 6 != 0 {
                    return Err(Error::Config(format!(
                        "lx = {lx} violates lx = 5 + 6m (m >= 0)"
                    )));
                }
                if ly < 2 || (ly - 2) % 3 != 0 {
                    return Err(Error::Config(format!(
                        "ly = {ly} violates ly = 2 + 3n (n >= 0)"
                    )));
                }
            }
            CouplingPattern::Ferro => {
                if lx < 1 || ly < 1 {
                    return Err(Error::Config(format!(
                        "ferro lattice needs lx, ly >= 1 (got {lx} x {ly})"
                    )));
                }
            }
        }
        Self::with_cells(lx, ly, pattern)
    }

    /// Like [`Lattice::build`] but only requires the geometry to be
    /// commensurate with the coupling pattern: `lx + 1` divisible by six and
    /// any `ly >= 0` for the default pattern. `(5, 0)` gives the 12-site
    /// torus used for small exact checks.
    pub fn with_cells(lx: usize, ly: usize, pattern: CouplingPattern) -> Result<Self> {
        let w = lx + 1;
        let h = ly + 1;
        let (nx, ny, twist) = if w % 2 == 0 && w >= 4 {
            (w, 2 * h, 0)
        } else if pattern == CouplingPattern::Ferro && lx >= 1 && h >= 2 {
            (2 * w, h, h % 2)
        } else {
            return Err(Error::Config(format!(
                "{lx} x {ly} hexagons cannot be laid out for pattern {pattern}"
            )));
        };
        if pattern == CouplingPattern::Default && (nx % 6 != 0 || twist != 0) {
            return Err(Error::Config(format!(
                "lx + 1 = {w} must be a multiple of 6 for the default pattern"
            )));
        }
        let lattice = Self::assemble(lx, ly, pattern, Grid { nx, ny, twist });
        lattice.check_invariants()?;
        Ok(lattice)
    }

    fn assemble(lx: usize, ly: usize, pattern: CouplingPattern, grid: Grid) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let nn = nx * ny;
        let tracked = grid.twist == 0 && nx % 6 == 0 && ny % 2 == 0;

        let mut bonds = Vec::with_capacity(3 * nn / 2);
        let mut lookup = HashMap::with_capacity(3 * nn / 2);
        for y in 0..ny {
            for x in 0..nx {
                let a = grid.id(x as i64, y as i64);
                let mut push = |b: usize, horizontal_af: bool| {
                    let coupling = match pattern {
                        CouplingPattern::Default if horizontal_af => 1,
                        _ => -1,
                    };
                    let id = bonds.len();
                    lookup.insert((a.min(b), a.max(b)), id);
                    bonds.push(Bond {
                        id,
                        i: a,
                        j: b,
                        coupling,
                        unit_pos: 0,
                    });
                };
                push(grid.id(x as i64 + 1, y as i64), x % 2 == 0 && y % 2 == 0);
                if (x + y) % 2 == 0 {
                    push(grid.id(x as i64, y as i64 + 1), false);
                }
            }
        }
        let bond_between = |a: usize, b: usize| lookup[&(a.min(b), a.max(b))];

        let mut plaquettes = Vec::with_capacity(nn / 2);
        let mut units = Vec::new();
        for y in 0..ny {
            for x in 0..nx {
                if (x + y) % 2 != 0 {
                    continue;
                }
                let (xi, yi) = (x as i64, y as i64);
                let ring = [
                    grid.id(xi, yi),
                    grid.id(xi + 1, yi),
                    grid.id(xi + 2, yi),
                    grid.id(xi + 2, yi + 1),
                    grid.id(xi + 1, yi + 1),
                    grid.id(xi, yi + 1),
                ];
                let edges: [usize; 6] =
                    std::array::from_fn(|k| bond_between(ring[k], ring[(k + 1) % 6]));
                plaquettes.push(Plaquette {
                    sites: ring,
                    bonds: edges,
                });

                if tracked && x % 6 == (3 * y) % 6 {
                    let start = if y % 2 == 0 { 1 } else { 4 };
                    let sites: [usize; 6] = std::array::from_fn(|k| ring[(start + k) % 6]);
                    let unit_bonds: [usize; 6] =
                        std::array::from_fn(|k| bond_between(sites[k], sites[(k + 1) % 6]));
                    units.push(Unit {
                        sites,
                        bonds: unit_bonds,
                    });
                }
            }
        }

        let mut sublattice = vec![None; nn];
        for unit in &units {
            for (k, (&s, &b)) in unit.sites.iter().zip(&unit.bonds).enumerate() {
                sublattice[s] = Some(k as u8 + 1);
                bonds[b].unit_pos = k as u8 + 1;
            }
        }

        let sites = (0..nn)
            .map(|id| {
                let (x, y) = grid.xy(id);
                Site {
                    id,
                    x,
                    y,
                    sublattice: sublattice[id],
                    pos: embed(x, y),
                }
            })
            .collect();

        Lattice {
            lx,
            ly,
            pattern,
            nx,
            ny,
            twist: grid.twist,
            sites,
            bonds,
            plaquettes,
            units,
        }
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn pattern(&self) -> CouplingPattern {
        self.pattern
    }

    /// Brick-grid dimensions `(nx, ny)` and the wrap twist.
    pub fn grid(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.twist)
    }

    pub fn nn(&self) -> usize {
        self.sites.len()
    }

    pub fn nb(&self) -> usize {
        self.bonds.len()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn is_annotated(&self) -> bool {
        !self.units.is_empty()
    }

    /// Sublattice labels and tracked-unit edges, when the geometry has them.
    pub fn order_geometry(&self) -> Option<OrderGeometry> {
        if !self.is_annotated() {
            return None;
        }
        let sublattice = self
            .sites
            .iter()
            .map(|s| s.sublattice.map(|l| l - 1))
            .collect::<Option<Vec<u8>>>()?;
        let units = self
            .units
            .iter()
            .map(|u| UnitEdges { bonds: u.bonds })
            .collect();
        OrderGeometry::new(self.nn(), &self.edge_list(), sublattice, units).ok()
    }

    /// `(i, j)` endpoints in bond-id order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.bonds.iter().map(|b| (b.i, b.j)).collect()
    }

    /// Total classical Ising energy `sum J s_i s_j` in units of J.
    pub fn classical_energy(&self, spins: &SpinConfig) -> i64 {
        self.bonds
            .iter()
            .map(|b| b.coupling as i64 * (spins[b.i] * spins[b.j]) as i64)
            .sum()
    }

    /// Checks every structural invariant; a failure is a construction
    /// defect.
    pub fn check_invariants(&self) -> Result<()> {
        let defect = |msg: String| Err(Error::Construction(msg));
        let nn = self.nn();
        let (w, h) = (self.lx + 1, self.ly + 1);
        if nn != 2 * w * h {
            return defect(format!("site count {nn} != 2(lx+1)(ly+1) = {}", 2 * w * h));
        }
        if self.nb() != 3 * w * h {
            return defect(format!(
                "bond count {} != 3(lx+1)(ly+1) = {}",
                self.nb(),
                3 * w * h
            ));
        }
        let mut degree = vec![0usize; nn];
        let mut seen = HashMap::new();
        for (id, b) in self.bonds.iter().enumerate() {
            if b.id != id || b.i >= nn || b.j >= nn || b.i == b.j {
                return defect(format!("bond {id} is malformed"));
            }
            if b.coupling != 1 && b.coupling != -1 {
                return defect(format!("bond {id} has coupling {}", b.coupling));
            }
            if seen.insert((b.i.min(b.j), b.i.max(b.j)), id).is_some() {
                return defect(format!("bond {id} duplicates another bond"));
            }
            degree[b.i] += 1;
            degree[b.j] += 1;
        }
        if let Some(s) = degree.iter().position(|&d| d != 3) {
            return defect(format!("site {s} has {} bonds", degree[s]));
        }

        if self.plaquettes.len() != nn / 2 {
            return defect(format!(
                "{} plaquettes, expected {}",
                self.plaquettes.len(),
                nn / 2
            ));
        }
        let mut bond_plaquettes = vec![0usize; self.nb()];
        for (p, plaq) in self.plaquettes.iter().enumerate() {
            for k in 0..6 {
                let b = &self.bonds[plaq.bonds[k]];
                let (u, v) = (plaq.sites[k], plaq.sites[(k + 1) % 6]);
                if !((b.i == u && b.j == v) || (b.i == v && b.j == u)) {
                    return defect(format!("plaquette {p} edge {k} does not match its sites"));
                }
                bond_plaquettes[plaq.bonds[k]] += 1;
            }
            if self.pattern == CouplingPattern::Default {
                let af = self.plaquette_af_count(p);
                if af % 2 == 0 {
                    return defect(format!("plaquette {p} has {af} antiferromagnetic bonds"));
                }
            }
        }
        if let Some(b) = bond_plaquettes.iter().position(|&c| c != 2) {
            return defect(format!(
                "bond {b} lies on {} plaquettes",
                bond_plaquettes[b]
            ));
        }

        if self.pattern == CouplingPattern::Default && self.units.is_empty() {
            return defect("default lattice has no tracked units".into());
        }
        if !self.units.is_empty() {
            if self.units.len() * 6 != nn {
                return defect(format!(
                    "{} units do not cover {nn} sites",
                    self.units.len()
                ));
            }
            let mut owner = vec![None; nn];
            let mut label_count = [0usize; 6];
            for (u, unit) in self.units.iter().enumerate() {
                for k in 0..6 {
                    let s = unit.sites[k];
                    if owner[s].replace(u).is_some() {
                        return defect(format!("site {s} belongs to two units"));
                    }
                    if self.sites[s].sublattice != Some(k as u8 + 1) {
                        return defect(format!("site {s} label disagrees with unit {u}"));
                    }
                    label_count[k] += 1;
                    let b = &self.bonds[unit.bonds[k]];
                    let t = unit.sites[(k + 1) % 6];
                    if !((b.i == s && b.j == t) || (b.i == t && b.j == s)) {
                        return defect(format!("unit {u} edge {} does not join its sites", k + 1));
                    }
                    if b.unit_pos != k as u8 + 1 {
                        return defect(format!("bond {} has unit_pos {}", b.id, b.unit_pos));
                    }
                }
            }
            if label_count.iter().any(|&c| c != nn / 6) {
                return defect(format!("sublattice sizes {label_count:?}"));
            }
            let unit_edges = self.bonds.iter().filter(|b| b.unit_pos != 0).count();
            if unit_edges != nn {
                return defect(format!(
                    "{unit_edges} bonds carry a unit position, expected {nn}"
                ));
            }
        }
        Ok(())
    }

    /// Number of antiferromagnetic bonds on plaquette `p`.
    pub fn plaquette_af_count(&self, p: usize) -> usize {
        self.plaquettes[p]
            .bonds
            .iter()
            .filter(|&&b| self.bonds[b].coupling > 0)
            .count()
    }

    /// 1 when bond `bond` is frustrated (`J s_i s_j > 0`) in `spins`.
    pub fn frustration_indicator(&self, spins: &SpinConfig, bond: usize) -> u8 {
        let b = &self.bonds[bond];
        u8::from(b.coupling * spins[b.i] * spins[b.j] > 0)
    }

    /// Serialises the lattice as a JSON document.
    pub fn dump<W: std::io::Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.to_doc())?;
        Ok(())
    }

    pub fn dump_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("lattice serialises")
    }

    /// Reads a document written by [`Lattice::dump`], re-validating every
    /// invariant including the odd antiferromagnetic count per plaquette.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: LatticeDoc = serde_json::from_str(text)?;
        if doc.nn != doc.sites.len() || doc.nb != doc.bonds.len() {
            return Err(Error::Document(format!(
                "header says nn={}, nb={} but lists {} sites and {} bonds",
                doc.nn,
                doc.nb,
                doc.sites.len(),
                doc.bonds.len()
            )));
        }
        for (k, s) in doc.sites.iter().enumerate() {
            if s.id != k {
                return Err(Error::Document(format!("site record {k} has id {}", s.id)));
            }
        }
        let plaquettes = doc
            .plaquettes
            .iter()
            .enumerate()
            .map(|(p, bonds)| {
                plaquette_ring(&doc.bonds, bonds)
                    .map(|sites| Plaquette {
                        sites,
                        bonds: *bonds,
                    })
                    .ok_or_else(|| Error::Document(format!("plaquette {p} is not a closed ring")))
            })
            .collect::<Result<Vec<_>>>()?;
        let lattice = Lattice {
            lx: doc.lx,
            ly: doc.ly,
            pattern: doc.pattern,
            nx: doc.nx,
            ny: doc.ny,
            twist: doc.twist,
            sites: doc.sites,
            bonds: doc.bonds,
            plaquettes,
            units: doc.units,
        };
        lattice
            .check_invariants()
            .map_err(|e| Error::Document(e.to_string()))?;
        Ok(lattice)
    }

    fn to_doc(&self) -> LatticeDoc {
        LatticeDoc {
            lx: self.lx,
            ly: self.ly,
            nn: self.nn(),
            nb: self.nb(),
            pattern: self.pattern,
            nx: self.nx,
            ny: self.ny,
            twist: self.twist,
            sites: self.sites.clone(),
            bonds: self.bonds.clone(),
            plaquettes: self.plaquettes.iter().map(|p| p.bonds).collect(),
            units: self.units.clone(),
        }
    }
}

/// Recovers the site ring of a hexagon from its six consecutive edges.
fn plaquette_ring(bonds: &[Bond], ids: &[usize; 6]) -> Option<[usize; 6]> {
    let ends = |id: usize| bonds.get(id).map(|b| (b.i, b.j));
    let (a, b) = ends(ids[0])?;
    let (c, d) = ends(ids[1])?;
    let first = if b == c || b == d { a } else { b };
    let mut ring = [0; 6];
    let mut cur = first;
    for k in 0..6 {
        ring[k] = cur;
        let (i, j) = ends(ids[k])?;
        cur = if i == cur {
            j
        } else if j == cur {
            i
        } else {
            return None;
        };
    }
    (cur == first).then_some(ring)
}

/// Honeycomb embedding of brick site `(x, y)` with unit bond length.
fn embed(x: usize, y: usize) -> [f64; 2] {
    let lift = if (x + y) % 2 == 0 { 0.5 } else { 0.0 };
    [x as f64 * 3f64.sqrt() / 2.0, 1.5 * y as f64 + lift]
}

/// Z-basis spin configuration with entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(k) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::Config(format!(
                "spin {k} is {}, expected +1 or -1",
                values[k]
            )));
        }
        Ok(SpinConfig(values))
    }

    pub fn uniform(n: usize, value: i8) -> Self {
        assert!(value == 1 || value == -1);
        SpinConfig(vec![value; n])
    }

    /// Spins from the bits of `bits`: bit `k` set means site `k` is up.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        SpinConfig(
            (0..n)
                .map(|k| if bits >> k & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }

    pub fn flipped(&self) -> Self {
        SpinConfig(self.0.iter().map(|v| -v).collect())
    }

    /// Compact `+`/`-` string, one character per site.
    pub fn to_pm_string(&self) -> String {
        self.0
            .iter()
            .map(|&v| if v > 0 { '+' } else { '-' })
            .collect()
    }
}

impl std::ops::Index<usize> for SpinConfig {
    type Output = i8;

    fn index(&self, i: usize) -> &i8 {
        &self.0[i]
    }
}

impl FromStr for SpinConfig {
    type Err = Error;

    /// Accepts either a `+`/`-` string or whitespace/comma separated
    /// `1`/`-1`/`+1` tokens; `#` starts a comment.
    fn from_str(text: &str) -> Result<Self> {
        let body: String = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .collect::<Vec<_>>()
            .join(" ");
        let compact: String = body.chars().filter(|c| !c.is_whitespace()).collect();
        if !compact.is_empty() && compact.chars().all(|c| c == '+' || c == '-') {
            return Ok(SpinConfig(
                compact
                    .chars()
                    .map(|c| if c == '+' { 1 } else { -1 })
                    .collect(),
            ));
        }
        let values = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| match t {
                "1" | "+1" => Ok(1),
                "-1" => Ok(-1),
                other => Err(Error::Config(format!("`{other}` is not a spin value"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        SpinConfig::new(values)
    }
}
