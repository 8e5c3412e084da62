//! Immutable DAG in CSR form with cached topological order, plus the
//! importance orders that drive hub ranks.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;

/// Vertex identifier. Index files use 32-bit ids, so the in-memory type matches.
pub type Vertex = u32;

/// Position of a vertex in the importance order; lower is more important.
pub type Rank = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
}

impl Csr {
    /// Builds from edges already sorted by (source, target) and deduplicated.
    fn from_sorted(n: usize, edges: impl Iterator<Item = (Vertex, Vertex)>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::new();
        for (u, v) in edges {
            offsets[u as usize + 1] += 1;
            targets.push(v);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn row(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// A directed acyclic graph with forward and reverse adjacency.
///
/// Adjacency lists are sorted ascending; self-loops and duplicate edges are
/// removed during construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    fwd: Csr,
    bwd: Csr,
    topo_order: Vec<Vertex>,
    topo_pos: Vec<u32>,
    dropped_duplicates: usize,
    dropped_self_loops: usize,
}

impl Graph {
    /// Builds a DAG from an edge list.
    ///
    /// Without `n_hint`, the vertex count is `max(id) + 1`. The topological order
    /// is computed with Kahn's algorithm, always taking the smallest ready id.
    pub fn build(edges: &[(Vertex, Vertex)], n_hint: Option<usize>) -> Result<Self, GraphError> {
        let n = match n_hint {
            Some(n) => {
                for &(u, v) in edges {
                    if u as usize >= n || v as usize >= n {
                        return Err(GraphError::InvalidEdge { u, v, n: n as u32 });
                    }
                }
                n
            }
            None => edges
                .iter()
                .map(|&(u, v)| u.max(v) as usize + 1)
                .max()
                .unwrap_or(0),
        };

        let mut sorted: Vec<(Vertex, Vertex)> = Vec::with_capacity(edges.len());
        let mut self_loops = 0;
        for &(u, v) in edges {
            if u == v {
                self_loops += 1;
            } else {
                sorted.push((u, v));
            }
        }
        sorted.sort_unstable();
        let before = sorted.len();
        sorted.dedup();
        let duplicates = before - sorted.len();
        if duplicates + self_loops > 0 {
            log::warn!("dropped {duplicates} duplicate edges and {self_loops} self-loops");
        }

        let fwd = Csr::from_sorted(n, sorted.iter().copied());
        let mut rev: Vec<(Vertex, Vertex)> = sorted.iter().map(|&(u, v)| (v, u)).collect();
        rev.sort_unstable();
        let bwd = Csr::from_sorted(n, rev.into_iter());

        let topo_order = kahn(n, &fwd, &bwd)?;
        let mut topo_pos = vec![0u32; n];
        for (i, &v) in topo_order.iter().enumerate() {
            topo_pos[v as usize] = i as u32;
        }

        Ok(Graph {
            n,
            fwd,
            bwd,
            topo_order,
            topo_pos,
            dropped_duplicates: duplicates,
            dropped_self_loops: self_loops,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.fwd.targets.len()
    }

    /// Out-neighbors of `v`, ascending.
    #[inline]
    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        self.fwd.row(v)
    }

    /// In-neighbors of `v`, ascending.
    #[inline]
    pub fn in_neighbors(&self, v: Vertex) -> &[Vertex] {
        self.bwd.row(v)
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out_neighbors(v).len()
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.in_neighbors(v).len()
    }

    pub fn topo_order(&self) -> &[Vertex] {
        &self.topo_order
    }

    pub fn topo_pos(&self, v: Vertex) -> u32 {
        self.topo_pos[v as usize]
    }

    pub fn dropped_duplicates(&self) -> usize {
        self.dropped_duplicates
    }

    pub fn dropped_self_loops(&self) -> usize {
        self.dropped_self_loops
    }

    /// All edges in (source, target) ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n as Vertex).flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.n as Vertex
    }
}

fn kahn(n: usize, fwd: &Csr, bwd: &Csr) -> Result<Vec<Vertex>, GraphError> {
    let mut indeg: Vec<usize> = (0..n as Vertex).map(|v| bwd.row(v).len()).collect();
    let mut ready: BinaryHeap<Reverse<Vertex>> = (0..n as Vertex)
        .filter(|&v| indeg[v as usize] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &v in fwd.row(u) {
            indeg[v as usize] -= 1;
            if indeg[v as usize] == 0 {
                ready.push(Reverse(v));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every unprocessed vertex keeps an unprocessed in-neighbor, so walking
    // backwards must revisit a vertex, and that vertex lies on a cycle.
    let start = (0..n).find(|&v| indeg[v] > 0).expect("unprocessed vertex") as Vertex;
    let mut visited = vec![false; n];
    let mut cur = start;
    while !visited[cur as usize] {
        visited[cur as usize] = true;
        cur = *bwd
            .row(cur)
            .iter()
            .find(|&&p| indeg[p as usize] > 0)
            .expect("unprocessed vertex has unprocessed predecessor");
    }
    Err(GraphError::CycleDetected { vertex: cur })
}

/// Collapses strongly connected components of an arbitrary digraph.
///
/// Returns the condensation DAG and `component[v]` for each original vertex.
/// Component ids follow a topological order of the condensation.
pub fn condense_sccs(edges: &[(Vertex, Vertex)], n: usize) -> (Graph, Vec<u32>) {
    let mut sorted: Vec<(Vertex, Vertex)> =
        edges.iter().copied().filter(|&(u, v)| u != v && (u as usize) < n && (v as usize) < n).collect();
    sorted.sort_unstable();
    sorted.dedup();
    let adj = Csr::from_sorted(n, sorted.iter().copied());

    // Iterative Tarjan. Components are emitted in reverse topological order.
    const UNVISITED: u32 = u32::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<Vertex> = Vec::new();
    let mut comp = vec![UNVISITED; n];
    let mut n_comp = 0u32;
    let mut next_index = 0u32;
    let mut call: Vec<(Vertex, usize)> = Vec::new();

    for root in 0..n as Vertex {
        if index[root as usize] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            let row = adj.row(v);
            if *child < row.len() {
                let w = row[*child];
                *child += 1;
                if index[w as usize] == UNVISITED {
                    index[w as usize] = next_index;
                    low[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w as usize] = false;
                    comp[w as usize] = n_comp;
                    if w == v {
                        break;
                    }
                }
                n_comp += 1;
            }
        }
    }

    for c in comp.iter_mut() {
        *c = n_comp - 1 - *c;
    }
    let cedges: Vec<(Vertex, Vertex)> = sorted
        .iter()
        .map(|&(u, v)| (comp[u as usize], comp[v as usize]))
        .filter(|&(a, b)| a != b)
        .collect();
    let g = Graph::build(&cedges, Some(n_comp as usize)).expect("condensation is acyclic");
    (g, comp)
}

/// Importance permutation: `order[i]` is the vertex with rank `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrder {
    order: Vec<Vertex>,
    rank: Vec<Rank>,
}

impl VertexOrder {
    /// Wraps a permutation, or returns a description of why it is not one.
    pub fn from_order(order: Vec<Vertex>) -> Result<Self, String> {
        let n = order.len();
        let mut rank = vec![Rank::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v as usize >= n {
                return Err(format!("vertex {v} out of range"));
            }
            if rank[v as usize] != Rank::MAX {
                return Err(format!("vertex {v} listed twice"));
            }
            rank[v as usize] = i as Rank;
        }
        Ok(VertexOrder { order, rank })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_order((0..n as Vertex).collect()).expect("identity permutation")
    }

    /// Descending `(out_degree + 1) * (in_degree + 1)`, ties by ascending id.
    pub fn by_degree(g: &Graph) -> Self {
        let mut order: Vec<Vertex> = g.vertices().collect();
        let score = |v: Vertex| (g.out_degree(v) as u64 + 1) * (g.in_degree(v) as u64 + 1);
        order.sort_by_key(|&v| (Reverse(score(v)), v));
        Self::from_order(order).expect("sorted vertex set is a permutation")
    }

    /// Uniform random permutation from a seed.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut order: Vec<Vertex> = (0..n as Vertex).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::from_order(order).expect("shuffle is a permutation")
    }

    /// The same permutation traversed back to front.
    pub fn reversed(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        Self::from_order(order).expect("reversal is a permutation")
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    #[inline]
    pub fn vertex(&self, rank: Rank) -> Vertex {
        self.order[rank as usize]
    }

    #[inline]
    pub fn rank(&self, v: Vertex) -> Rank {
        self.rank[v as usize]
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.order
    }
}

/// Convenience wrapper matching [`VertexOrder::by_degree`].
pub fn degree_order(g: &Graph) -> VertexOrder {
    VertexOrder::by_degree(g)
}
