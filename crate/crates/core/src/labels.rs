//! Hub label storage and the 2-hop reachability query.

use crate::error::GraphError;
use crate::graph::{Rank, Vertex, VertexOrder};

/// Search direction of a pruned search.
///
/// A forward search walks out-edges from its root and writes the root's rank
/// into the *incoming* labels of the vertices it reaches; a backward search
/// walks in-edges and writes into outgoing labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Forward, Direction::Backward];
}

/// Two-hop reachability labels.
///
/// `l_out[v]` holds ranks of hubs that `v` reaches; `l_in[v]` holds ranks of
/// hubs that reach `v`. Every array is strictly ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HubLabels {
    pub(crate) l_out: Vec<Vec<Rank>>,
    pub(crate) l_in: Vec<Vec<Rank>>,
    pub(crate) order: VertexOrder,
    pub(crate) relaxed: bool,
}

impl HubLabels {
    /// Empty labels over `order`.
    pub fn new(order: VertexOrder) -> Self {
        let n = order.len();
        HubLabels { l_out: vec![Vec::new(); n], l_in: vec![Vec::new(); n], order, relaxed: false }
    }

    /// Assembles labels from raw arrays. Panics if lengths disagree with the order.
    pub fn from_parts(order: VertexOrder, l_out: Vec<Vec<Rank>>, l_in: Vec<Vec<Rank>>, relaxed: bool) -> Self {
        assert_eq!(l_out.len(), order.len());
        assert_eq!(l_in.len(), order.len());
        HubLabels { l_out, l_in, order, relaxed }
    }

    pub fn num_vertices(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &VertexOrder {
        &self.order
    }

    /// True when some batches were built without intra-batch pruning, so the
    /// labels may contain redundant entries.
    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    pub fn l_out(&self, v: Vertex) -> &[Rank] {
        &self.l_out[v as usize]
    }

    pub fn l_in(&self, v: Vertex) -> &[Rank] {
        &self.l_in[v as usize]
    }

    pub fn label(&self, v: Vertex, dir: Direction) -> &[Rank] {
        match dir {
            Direction::Forward => self.l_out(v),
            Direction::Backward => self.l_in(v),
        }
    }

    /// Appends `rank` to the label that a search in `search_dir` writes at `v`.
    #[inline]
    pub(crate) fn push_hub(&mut self, v: Vertex, search_dir: Direction, rank: Rank) {
        let arr = match search_dir {
            Direction::Forward => &mut self.l_in[v as usize],
            Direction::Backward => &mut self.l_out[v as usize],
        };
        debug_assert!(arr.last().is_none_or(|&last| last < rank), "labels must stay rank-sorted");
        arr.push(rank);
    }

    /// Does `s` reach `t`? Reflexive pairs are answered without consulting labels.
    pub fn query(&self, s: Vertex, t: Vertex) -> Result<bool, GraphError> {
        let n = self.num_vertices() as u32;
        for v in [s, t] {
            if v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n });
            }
        }
        Ok(self.query_unchecked(s, t))
    }

    #[inline]
    pub fn query_unchecked(&self, s: Vertex, t: Vertex) -> bool {
        s == t || intersects(&self.l_out[s as usize], &self.l_in[t as usize])
    }

    /// Total number of stored entries across both directions.
    pub fn total_entries(&self) -> usize {
        self.l_out.iter().chain(self.l_in.iter()).map(Vec::len).sum()
    }

    /// True when every label array is strictly ascending and below `n`.
    pub fn is_well_formed(&self) -> bool {
        let n = self.num_vertices() as Rank;
        self.l_out
            .iter()
            .chain(self.l_in.iter())
            .all(|a| a.windows(2).all(|w| w[0] < w[1]) && a.iter().all(|&r| r < n))
    }
}

/// Free-function form of [`HubLabels::query`].
pub fn hub_query(labels: &HubLabels, s: Vertex, t: Vertex) -> Result<bool, GraphError> {
    labels.query(s, t)
}

/// Sorted two-pointer test for a common element.
#[inline]
pub fn intersects(a: &[Rank], b: &[Rank]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionStats {
    pub entries: usize,
    pub mean: f64,
    pub max: usize,
    /// `histogram[len]` = number of vertices whose label has `len` entries.
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelStats {
    pub total_entries: usize,
    pub out: DirectionStats,
    pub inc: DirectionStats,
}

impl LabelStats {
    pub fn max(&self) -> usize {
        self.out.max.max(self.inc.max)
    }

    /// Mean entries per vertex per direction.
    pub fn mean(&self) -> f64 {
        (self.out.mean + self.inc.mean) / 2.0
    }
}

fn direction_stats(arrays: &[Vec<Rank>]) -> DirectionStats {
    let entries: usize = arrays.iter().map(Vec::len).sum();
    let max = arrays.iter().map(Vec::len).max().unwrap_or(0);
    let mut histogram = vec![0usize; max + 1];
    for a in arrays {
        histogram[a.len()] += 1;
    }
    let mean = if arrays.is_empty() { 0.0 } else { entries as f64 / arrays.len() as f64 };
    DirectionStats { entries, mean, max, histogram }
}

pub fn label_stats(labels: &HubLabels) -> LabelStats {
    let out = direction_stats(&labels.l_out);
    let inc = direction_stats(&labels.l_in);
    LabelStats { total_entries: out.entries + inc.entries, out, inc }
}
