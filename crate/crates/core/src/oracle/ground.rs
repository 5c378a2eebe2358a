use super::{report, GroundStateReport};
use crate::config::MsNorm;
use crate::error::{Error, Result};
use crate::graph::SpinGraph;
use crate::lattice::{Lattice, SpinConfig};

/// Widest brick row (sites per row) the transfer matrix accepts.
pub const MAX_ROW_WIDTH: usize = 8;

const UNREACHED: i32 = i32::MAX;

/// Row-to-row transfer data. Row `r` holds sites `r * w .. (r + 1) * w`;
/// bit `x` of a row state is 1 when site `x` of that row points up.
struct Transfer {
    w: usize,
    rows: usize,
    /// `intra[r][s]`: bonds inside row `r`.
    intra: Vec<Vec<i32>>,
    /// `step[r][s * 2^w + t]`: bonds from row `r` (state `s`) up to row
    /// `r + 1` (state `t`), for `r < rows - 1`.
    step: Vec<Vec<i32>>,
    /// `close[s * 2^w + a]`: bonds from the last row back to row 0.
    close: Vec<i32>,
}

fn sign(state: usize, x: usize) -> i32 {
    if state >> x & 1 == 1 {
        1
    } else {
        -1
    }
}

impl Transfer {
    fn new(lattice: &Lattice) -> Self {
        let (w, rows, _) = lattice.grid();
        let states = 1usize << w;
        let mut intra_bonds = vec![Vec::new(); rows];
        let mut up_bonds = vec![Vec::new(); rows];
        for b in lattice.bonds() {
            let (si, sj) = (&lattice.sites()[b.i], &lattice.sites()[b.j]);
            let j = b.coupling as i32;
            if si.y == sj.y {
                intra_bonds[si.y].push((si.x, sj.x, j));
            } else {
                // the lower end of a vertical bond is the site with x + y even
                let (lo, hi) = if (si.x + si.y) % 2 == 0 {
                    (si, sj)
                } else {
                    (sj, si)
                };
                up_bonds[lo.y].push((lo.x, hi.x, j));
            }
        }
        let pair_table = |bonds: &[(usize, usize, i32)]| -> Vec<i32> {
            let mut table = vec![0; states * states];
            for s in 0..states {
                for t in 0..states {
                    table[s * states + t] = bonds
                        .iter()
                        .map(|&(xa, xb, j)| j * sign(s, xa) * sign(t, xb))
                        .sum();
                }
            }
            table
        };
        let intra = intra_bonds
            .iter()
            .map(|bonds| {
                (0..states)
                    .map(|s| {
                        bonds
                            .iter()
                            .map(|&(a, b, j)| j * sign(s, a) * sign(s, b))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let step = up_bonds[..rows - 1].iter().map(|b| pair_table(b)).collect();
        let close = pair_table(&up_bonds[rows - 1]);
        Transfer {
            w,
            rows,
            intra,
            step,
            close,
        }
    }

    fn states(&self) -> usize {
        1 << self.w
    }

    /// Minimal energies and path counts per row for fixed row-0 state
    /// `anchor`. Returns `(tables, best, count)` where `best` includes the
    /// closing bonds.
    fn sweep(&self, anchor: usize) -> Result<(Vec<Vec<(i32, u128)>>, i32, u128)> {
        let states = self.states();
        let mut tables = Vec::with_capacity(self.rows);
        let mut cur = vec![(UNREACHED, 0u128); states];
        cur[anchor] = (self.intra[0][anchor], 1);
        for r in 1..self.rows {
            let mut next = vec![(UNREACHED, 0u128); states];
            for (s, &(es, cs)) in cur.iter().enumerate() {
                if es == UNREACHED {
                    continue;
                }
                let row = &self.step[r - 1][s * states..(s + 1) * states];
                for (t, slot) in next.iter_mut().enumerate() {
                    let e = es + row[t] + self.intra[r][t];
                    if e < slot.0 {
                        *slot = (e, cs);
                    } else if e == slot.0 {
                        slot.1 = slot.1.checked_add(cs).ok_or(OVERFLOW)?;
                    }
                }
            }
            tables.push(std::mem::replace(&mut cur, next));
        }
        let (mut best, mut count) = (UNREACHED, 0u128);
        for (s, &(es, cs)) in cur.iter().enumerate() {
            if es == UNREACHED {
                continue;
            }
            let e = es + self.close[s * states + anchor];
            if e < best {
                best = e;
                count = cs;
            } else if e == best {
                count = count.checked_add(cs).ok_or(OVERFLOW)?;
            }
        }
        tables.push(cur);
        Ok((tables, best, count))
    }

    /// Appends ground configurations reachable from `anchor` to `out`
    /// until it holds `cap` entries.
    fn enumerate(
        &self,
        anchor: usize,
        tables: &[Vec<(i32, u128)>],
        target: i32,
        cap: usize,
        out: &mut Vec<SpinConfig>,
    ) {
        let states = self.states();
        let last = self.rows - 1;
        let mut rows = vec![0usize; self.rows];
        rows[0] = anchor;
        for s in 0..states {
            let es = tables[last][s].0;
            if es != UNREACHED && es + self.close[s * states + anchor] == target {
                rows[last] = s;
                self.descend(last, tables, &mut rows, cap, out);
            }
            if out.len() >= cap {
                return;
            }
        }
    }

    fn descend(
        &self,
        r: usize,
        tables: &[Vec<(i32, u128)>],
        rows: &mut Vec<usize>,
        cap: usize,
        out: &mut Vec<SpinConfig>,
    ) {
        if out.len() >= cap {
            return;
        }
        if r == 0 {
            let spins = rows
                .iter()
                .flat_map(|&s| (0..self.w).map(move |x| sign(s, x) as i8))
                .collect();
            out.push(SpinConfig::new(spins).expect("spins are +-1"));
            return;
        }
        let states = self.states();
        let t = rows[r];
        let need = tables[r][t].0 - self.intra[r][t];
        for s in 0..states {
            let es = tables[r - 1][s].0;
            if es != UNREACHED && es + self.step[r - 1][s * states + t] == need {
                rows[r - 1] = s;
                self.descend(r - 1, tables, rows, cap, out);
                if out.len() >= cap {
                    return;
                }
            }
        }
    }
}

const OVERFLOW: Error = Error::Capacity {
    what: "ground-state degeneracy (bits)",
    got: 129,
    limit: 128,
};

/// Exact classical ground energy, degeneracy and (up to `max_listed`)
/// ground configurations of `lattice`, with order parameters evaluated on
/// each listed configuration.
pub fn ground_states_dp(
    lattice: &Lattice,
    norm: MsNorm,
    max_listed: usize,
) -> Result<GroundStateReport> {
    let (w, _, _) = lattice.grid();
    if w > MAX_ROW_WIDTH {
        return Err(Error::Capacity {
            what: "transfer-matrix row width",
            got: w,
            limit: MAX_ROW_WIDTH,
        });
    }
    let transfer = Transfer::new(lattice);
    let mut per_anchor = Vec::with_capacity(transfer.states());
    for anchor in 0..transfer.states() {
        let (_, best, count) = transfer.sweep(anchor)?;
        per_anchor.push((best, count));
    }
    let e0 = per_anchor
        .iter()
        .map(|&(e, _)| e)
        .min()
        .expect("at least one anchor");
    let mut degeneracy = 0u128;
    let mut listed = Vec::new();
    for (anchor, &(e, count)) in per_anchor.iter().enumerate() {
        if e != e0 {
            continue;
        }
        degeneracy = degeneracy.checked_add(count).ok_or(OVERFLOW)?;
        if listed.len() < max_listed {
            let (tables, _, _) = transfer.sweep(anchor)?;
            transfer.enumerate(anchor, &tables, e0, max_listed, &mut listed);
        }
    }
    let graph = SpinGraph::<f64>::from_lattice(lattice, 0.0)?;
    Ok(report(&graph, e0 as f64, degeneracy, listed, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CouplingPattern;
    use crate::oracle::classical_enumerate;

    #[test]
    fn agrees_with_enumeration_on_small_tori() {
        let cases = [
            (5, 0, CouplingPattern::Default),
            (1, 1, CouplingPattern::Ferro),
            (2, 1, CouplingPattern::Ferro),
            (3, 1, CouplingPattern::Ferro),
            (5, 1, CouplingPattern::Default),
        ];
        for (lx, ly, pattern) in cases {
            let lat = Lattice::with_cells(lx, ly, pattern).unwrap();
            let graph = SpinGraph::<f64>::from_lattice(&lat, 0.0).unwrap();
            let dp = ground_states_dp(&lat, MsNorm::PerSublattice, 1 << 20).unwrap();
            let (_, en) = classical_enumerate(&graph, 1.0, MsNorm::PerSublattice, 1 << 20).unwrap();
            assert_eq!(dp.energy, en.energy, "{lx}x{ly}");
            assert_eq!(dp.degeneracy, en.degeneracy, "{lx}x{ly}");
            let mut a: Vec<_> = dp.configs.iter().map(|c| c.spins.clone()).collect();
            let mut b: Vec<_> = en.configs.iter().map(|c| c.spins.clone()).collect();
            a.sort();
            b.sort();
            assert_eq!(a, b, "{lx}x{ly}");
        }
    }

    #[test]
    fn listed_configurations_attain_the_energy() {
        let lat = Lattice::build(5, 2, CouplingPattern::Default).unwrap();
        let rep = ground_states_dp(&lat, MsNorm::PerSublattice, 200).unwrap();
        assert_eq!(rep.configs.len(), 200);
        for c in &rep.configs {
            let spins: SpinConfig = c.spins.parse().unwrap();
            assert_eq!(lat.classical_energy(&spins) as f64, rep.energy);
        }
    }

    #[test]
    fn wide_rows_are_refused() {
        let lat = Lattice::build(11, 5, CouplingPattern::Default).unwrap();
        assert!(matches!(
            ground_states_dp(&lat, MsNorm::PerSublattice, 10),
            Err(Error::Capacity { limit: 8, .. })
        ));
    }
}
