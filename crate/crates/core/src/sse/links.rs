use super::{OperatorSlot, SseState};
use crate::Real;

/// Marker for an unused leg or a site without operators.
pub const FREE: usize = usize::MAX;

/// Imaginary-time linkage of operator legs.
///
/// Leg `4p + l` of slot `p`: `l = 0, 1` are the lower legs on sites `i, j`,
/// `l = 2, 3` the upper ones. Site operators use legs 0 and 2 only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkedVertexList {
    links: Vec<usize>,
    first: Vec<usize>,
    last: Vec<usize>,
}

impl LinkedVertexList {
    pub fn build<T: Real>(state: &SseState<T>) -> Self {
        let mut list = Self::default();
        list.rebuild(state.graph().n(), state.ops(), |b| {
            let bond = state.graph().bond(b);
            (bond.i, bond.j)
        });
        list
    }

    pub(crate) fn rebuild(
        &mut self,
        n: usize,
        ops: &[OperatorSlot],
        ends: impl Fn(usize) -> (usize, usize),
    ) {
        self.links.clear();
        self.links.resize(4 * ops.len(), FREE);
        self.first.clear();
        self.first.resize(n, FREE);
        self.last.clear();
        self.last.resize(n, FREE);

        let Self { links, first, last } = self;
        let mut attach = |site: usize, lower: usize, upper: usize| {
            let prev = last[site];
            if prev == FREE {
                first[site] = lower;
            } else {
                links[prev] = lower;
                links[lower] = prev;
            }
            last[site] = upper;
        };
        for (p, op) in ops.iter().enumerate() {
            let v = 4 * p;
            match *op {
                OperatorSlot::Null => {}
                OperatorSlot::Constant(i) | OperatorSlot::Field(i) => attach(i, v, v + 2),
                OperatorSlot::Ising(b) => {
                    let (i, j) = ends(b);
                    attach(i, v, v + 2);
                    attach(j, v + 1, v + 3);
                }
            }
        }
        for site in 0..n {
            let (f, l) = (first[site], last[site]);
            if f != FREE {
                links[f] = l;
                links[l] = f;
            }
        }
    }

    /// Leg linked to `leg`, or [`FREE`] for unused legs.
    #[inline]
    pub fn link(&self, leg: usize) -> usize {
        self.links[leg]
    }

    pub fn legs(&self) -> usize {
        self.links.len()
    }

    /// First leg on `site` in imaginary time, [`FREE`] if no operator acts.
    #[inline]
    pub fn first(&self, site: usize) -> usize {
        self.first[site]
    }

    #[inline]
    pub fn last(&self, site: usize) -> usize {
        self.last[site]
    }

    pub fn is_free(&self, site: usize) -> bool {
        self.first[site] == FREE
    }

    /// Checks `link(link(x)) = x` and that exactly the legs of non-null
    /// slots are linked. Returns the first offending leg.
    pub fn check(&self, ops: &[OperatorSlot]) -> Result<(), usize> {
        for (leg, &to) in self.links.iter().enumerate() {
            let used = match ops[leg / 4] {
                OperatorSlot::Null => false,
                OperatorSlot::Constant(_) | OperatorSlot::Field(_) => leg % 2 == 0,
                OperatorSlot::Ising(_) => true,
            };
            if used != (to != FREE) {
                return Err(leg);
            }
            if used && (to >= self.links.len() || self.links[to] != leg) {
                return Err(leg);
            }
        }
        Ok(())
    }
}
