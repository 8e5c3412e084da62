//! Sequential pruned landmark labeling.

use crate::graph::{Graph, Rank, Vertex, VertexOrder};
use crate::labels::{intersects, Direction, HubLabels};

/// Reusable BFS state. Seen-marks are epoch stamps so starting a new search
/// costs O(1) instead of clearing an n-sized array.
#[derive(Debug, Clone)]
pub struct BfsWorkspace {
    queue: Vec<Vertex>,
    seen: Vec<u32>,
    epoch: u32,
}

impl BfsWorkspace {
    pub fn new(n: usize) -> Self {
        BfsWorkspace { queue: Vec::with_capacity(n.min(1 << 16)), seen: vec![0; n], epoch: 0 }
    }

    /// Starts a new search: empties the queue and invalidates all seen-marks.
    pub(crate) fn reset(&mut self) {
        self.queue.clear();
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.seen.fill(0);
            self.epoch = 1;
        }
    }

    /// Marks `v` seen; returns false if it already was.
    #[inline]
    pub(crate) fn visit(&mut self, v: Vertex) -> bool {
        let slot = &mut self.seen[v as usize];
        if *slot == self.epoch {
            false
        } else {
            *slot = self.epoch;
            true
        }
    }

    #[inline]
    pub(crate) fn enqueue(&mut self, v: Vertex) {
        self.queue.push(v);
    }

    /// Runs `f` over the FIFO until it drains; `f` may enqueue more vertices.
    #[inline]
    pub(crate) fn drain(&mut self, mut f: impl FnMut(&mut Self, Vertex)) {
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            f(self, u);
        }
    }
}

#[inline]
pub(crate) fn neighbors(g: &Graph, v: Vertex, dir: Direction) -> &[Vertex] {
    match dir {
        Direction::Forward => g.out_neighbors(v),
        Direction::Backward => g.in_neighbors(v),
    }
}

/// Pruned BFS from the vertex of rank `root_rank`.
///
/// `labels` must hold exactly the hubs of ranks below `root_rank` (plus, for a
/// backward search, the root's own forward results). A dequeued vertex that
/// the existing labels already connect to the root is neither labeled nor
/// expanded. Returns the number of vertices labeled.
pub fn pruned_bfs(
    g: &Graph,
    labels: &mut HubLabels,
    root_rank: Rank,
    dir: Direction,
    ws: &mut BfsWorkspace,
) -> usize {
    let root = labels.order.vertex(root_rank);
    // Forward: test l_out[root] ∩ l_in[u], write l_in[u].
    // Backward: test l_out[u] ∩ l_in[root], write l_out[u].
    let (root_label, written) = match dir {
        Direction::Forward => (&labels.l_out[root as usize], &mut labels.l_in),
        Direction::Backward => (&labels.l_in[root as usize], &mut labels.l_out),
    };

    ws.reset();
    ws.visit(root);
    ws.enqueue(root);
    let mut added = 0;
    ws.drain(|ws, u| {
        let target = &mut written[u as usize];
        if intersects(root_label, target) {
            return;
        }
        debug_assert!(target.last().is_none_or(|&r| r < root_rank));
        target.push(root_rank);
        added += 1;
        for &v in neighbors(g, u, dir) {
            if ws.visit(v) {
                ws.enqueue(v);
            }
        }
    });
    added
}

/// Builds the canonical labeling for `order`: one forward and one backward
/// pruned search per vertex, most important first.
pub fn pll_preprocess(g: &Graph, order: &VertexOrder) -> HubLabels {
    assert_eq!(g.num_vertices(), order.len(), "order must cover every vertex");
    let mut labels = HubLabels::new(order.clone());
    let mut ws = BfsWorkspace::new(g.num_vertices());
    for rank in 0..order.len() as Rank {
        for dir in Direction::BOTH {
            pruned_bfs(g, &mut labels, rank, dir, &mut ws);
        }
    }
    labels
}
