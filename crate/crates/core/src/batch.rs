//! Batched parallel pruned labeling.
//!
//! The importance order is cut into consecutive batches of up to `k` roots.
//! For each batch a topological sweep computes, per vertex, which roots reach
//! it and which roots it reaches (one bit per root). All `2 * batch` directed
//! searches then run concurrently against a frozen snapshot of the labels
//! from earlier batches. A search from root `t` also skips any vertex that a
//! more important batch peer `t' < t` sits in front of (`root_t -> root_t' -> v`),
//! since that peer's search is responsible for the pair. Results go to private
//! staging buffers and are merged in rank order at the batch barrier, which
//! makes the output independent of scheduling.
//!
//! Past the strict prefix of the order, the relaxed tail skips the sweep and
//! prunes only against frozen labels, trading some redundant entries for the
//! O(m) sweep per batch.

use std::time::{Duration, Instant};

use crate::error::BatchError;
use crate::graph::{Graph, Rank, Vertex, VertexOrder};
use crate::labels::{intersects, Direction, HubLabels};
use crate::pll::{neighbors, pll_preprocess, BfsWorkspace};

/// Widest supported batch, in 64-bit words.
const MAX_WORDS: usize = 8;

pub const SUPPORTED_WIDTHS: [usize; 4] = [64, 128, 256, 512];

/// Per-vertex K-bit reachability indicators for one batch of roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachBitsets {
    k: usize,
    words: usize,
    roots: Vec<Vertex>,
    /// Bit j of row v: root j reaches v.
    b_bwd: Vec<u64>,
    /// Bit j of row v: v reaches root j.
    b_fwd: Vec<u64>,
}

impl ReachBitsets {
    pub fn new(n: usize, k: usize) -> Result<Self, BatchError> {
        if !SUPPORTED_WIDTHS.contains(&k) {
            return Err(BatchError::InvalidWidth(k));
        }
        let words = k / 64;
        Ok(ReachBitsets { k, words, roots: Vec::new(), b_bwd: vec![0; n * words], b_fwd: vec![0; n * words] })
    }

    pub fn width(&self) -> usize {
        self.k
    }

    pub fn roots(&self) -> &[Vertex] {
        &self.roots
    }

    /// Row of "roots reaching v".
    #[inline]
    pub fn bwd(&self, v: Vertex) -> &[u64] {
        let s = v as usize * self.words;
        &self.b_bwd[s..s + self.words]
    }

    /// Row of "roots reached by v".
    #[inline]
    pub fn fwd(&self, v: Vertex) -> &[u64] {
        let s = v as usize * self.words;
        &self.b_fwd[s..s + self.words]
    }

    /// Does root `j` reach `v`?
    pub fn root_reaches(&self, j: usize, v: Vertex) -> bool {
        self.bwd(v)[j / 64] >> (j % 64) & 1 == 1
    }

    /// Does `v` reach root `j`?
    pub fn reaches_root(&self, v: Vertex, j: usize) -> bool {
        self.fwd(v)[j / 64] >> (j % 64) & 1 == 1
    }

    /// Recomputes both bitsets for `roots`, reusing the allocation.
    pub fn sweep(&mut self, g: &Graph, roots: &[Vertex]) -> Result<(), BatchError> {
        if roots.len() > self.k {
            return Err(BatchError::BatchTooWide { len: roots.len(), k: self.k });
        }
        let n = g.num_vertices();
        self.b_bwd.resize(n * self.words, 0);
        self.b_fwd.resize(n * self.words, 0);
        self.b_bwd.fill(0);
        self.b_fwd.fill(0);
        self.roots.clear();

        let w = self.words;
        for (i, &r) in roots.iter().enumerate() {
            let idx = r as usize * w + i / 64;
            let bit = 1u64 << (i % 64);
            if self.b_bwd[idx] & bit != 0 || roots[..i].contains(&r) {
                return Err(BatchError::DuplicateRoots(r));
            }
            self.b_bwd[idx] |= bit;
            self.b_fwd[idx] |= bit;
        }
        self.roots.extend_from_slice(roots);

        let mut buf = [0u64; MAX_WORDS];
        // Edges (u, v) with u in topological order: OR "reached by" bits downstream.
        for &u in g.topo_order() {
            let su = u as usize * w;
            buf[..w].copy_from_slice(&self.b_bwd[su..su + w]);
            if buf[..w].iter().all(|&x| x == 0) {
                continue;
            }
            for &v in g.out_neighbors(u) {
                let sv = v as usize * w;
                for (dst, src) in self.b_bwd[sv..sv + w].iter_mut().zip(&buf[..w]) {
                    *dst |= src;
                }
            }
        }
        // Same edges in reverse topological order: OR "reaches" bits upstream.
        for &u in g.topo_order().iter().rev() {
            let su = u as usize * w;
            buf[..w].fill(0);
            for &v in g.out_neighbors(u) {
                let sv = v as usize * w;
                for (dst, src) in buf[..w].iter_mut().zip(&self.b_fwd[sv..sv + w]) {
                    *dst |= src;
                }
            }
            for (dst, src) in self.b_fwd[su..su + w].iter_mut().zip(&buf[..w]) {
                *dst |= src;
            }
        }
        Ok(())
    }
}

/// Allocates bitsets of width `k` and sweeps them for `roots`.
pub fn topo_sweep(g: &Graph, roots: &[Vertex], k: usize) -> Result<ReachBitsets, BatchError> {
    let mut bits = ReachBitsets::new(g.num_vertices(), k)?;
    bits.sweep(g, roots)?;
    Ok(bits)
}

/// `root_row & mask_below(t)`, truncated to the words that can be non-zero.
#[inline]
fn peer_mask(root_row: &[u64], t: usize) -> ([u64; MAX_WORDS], usize) {
    let mut mask = [0u64; MAX_WORDS];
    let full = t / 64;
    mask[..full].copy_from_slice(&root_row[..full]);
    let rem = t % 64;
    let mut len = full;
    if rem > 0 {
        mask[full] = root_row[full] & ((1u64 << rem) - 1);
        len += 1;
    }
    (mask, len)
}

#[inline]
fn hits(mask: &[u64], row: &[u64]) -> bool {
    mask.iter().zip(row).any(|(a, b)| a & b != 0)
}

/// Bitmask with bits `[0, t)` set, one word per 64 roots, `words` words long.
pub fn mask_below(t: usize, words: usize) -> Vec<u64> {
    let ones = vec![u64::MAX; words];
    let (m, _) = peer_mask(&ones, t);
    m[..words].to_vec()
}

/// Vertices labeled by one directed search, tagged with the root rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedSearch {
    pub rank: Rank,
    pub dir: Direction,
    pub vertices: Vec<Vertex>,
}

/// One directed search of a batch, reading `frozen` and writing to `staging`.
///
/// `bits`, when present, must come from a sweep over this batch's roots with
/// the root at index `t`; it enables the peer-coverage rule. Without it only
/// the frozen-label intersection test prunes. Returns the number of staged
/// vertices.
#[allow(clippy::too_many_arguments)]
pub fn batch_pruned_bfs(
    g: &Graph,
    frozen: &HubLabels,
    bits: Option<&ReachBitsets>,
    root_rank: Rank,
    t: usize,
    dir: Direction,
    ws: &mut BfsWorkspace,
    staging: &mut Vec<Vertex>,
) -> usize {
    let root = frozen.order.vertex(root_rank);
    let (root_label, other) = match dir {
        Direction::Forward => (&frozen.l_out[root as usize], &frozen.l_in),
        Direction::Backward => (&frozen.l_in[root as usize], &frozen.l_out),
    };

    // Forward: v is skipped if b_fwd[root] & b_bwd[v] & mask_below(t) != 0.
    // Backward: v is skipped if b_bwd[root] & b_fwd[v] & mask_below(t) != 0.
    let (mask, mask_len, peer_rows) = match bits {
        Some(b) => {
            debug_assert_eq!(b.roots()[t], root);
            let (row, peers): (&[u64], &[u64]) = match dir {
                Direction::Forward => (b.fwd(root), &b.b_bwd),
                Direction::Backward => (b.bwd(root), &b.b_fwd),
            };
            let (mask, len) = peer_mask(row, t);
            let len = if mask[..len].iter().all(|&x| x == 0) { 0 } else { len };
            (mask, len, Some((peers, b.words)))
        }
        None => ([0; MAX_WORDS], 0, None),
    };
    let covered_by_peer = |v: Vertex| -> bool {
        match peer_rows {
            Some((rows, w)) if mask_len > 0 => {
                let s = v as usize * w;
                hits(&mask[..mask_len], &rows[s..s + mask_len])
            }
            _ => false,
        }
    };

    let before = staging.len();
    ws.reset();
    ws.visit(root);
    if covered_by_peer(root) {
        return 0;
    }
    ws.enqueue(root);
    ws.drain(|ws, u| {
        if intersects(root_label, &other[u as usize]) {
            return;
        }
        staging.push(u);
        for &v in neighbors(g, u, dir) {
            if ws.visit(v) && !covered_by_peer(v) {
                ws.enqueue(v);
            }
        }
    });
    staging.len() - before
}

/// Appends staged entries to `labels` in ascending rank order.
pub fn merge_batch(labels: &mut HubLabels, mut stagings: Vec<StagedSearch>) {
    stagings.sort_by_key(|s| (s.rank, s.dir == Direction::Backward));
    for s in stagings {
        for v in s.vertices {
            labels.push_hub(v, s.dir, s.rank);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Sequential,
    ParallelStrict,
    ParallelRelaxed,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Sequential => "seq",
            Mode::ParallelStrict => "par-strict",
            Mode::ParallelRelaxed => "par-relaxed",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "seq" | "sequential" => Ok(Mode::Sequential),
            "par-strict" | "parallel-strict" => Ok(Mode::ParallelStrict),
            "par-relaxed" | "parallel-relaxed" => Ok(Mode::ParallelRelaxed),
            _ => Err(format!("unknown mode {s:?} (expected seq, par-strict or par-relaxed)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchConfig {
    /// Batch width in bits; one of [`SUPPORTED_WIDTHS`].
    pub k: usize,
    /// Worker threads; 0 uses the global default.
    pub threads: usize,
    /// Leading fraction of the order processed with sweeps in relaxed mode.
    pub strict_fraction: f64,
    pub mode: Mode,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig { k: 256, threads: 0, strict_fraction: 0.25, mode: Mode::ParallelStrict }
    }
}

impl BatchConfig {
    pub fn validate(&self) -> Result<(), BatchError> {
        if !SUPPORTED_WIDTHS.contains(&self.k) {
            return Err(BatchError::InvalidWidth(self.k));
        }
        if !(0.0..=1.0).contains(&self.strict_fraction) {
            return Err(BatchError::InvalidStrictFraction(self.strict_fraction));
        }
        Ok(())
    }

    /// Number of leading ranks that are processed with sweeps.
    pub fn strict_prefix(&self, n: usize) -> usize {
        match self.mode {
            Mode::Sequential | Mode::ParallelStrict => n,
            Mode::ParallelRelaxed => ((self.strict_fraction * n as f64).ceil() as usize).min(n),
        }
    }
}

/// Wall time spent in each phase of a batched build.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    pub sweep: Duration,
    pub search: Duration,
    pub merge: Duration,
}

struct Executor {
    #[cfg(feature = "parallel")]
    pool: rayon::ThreadPool,
    workspaces: Vec<std::sync::Mutex<BfsWorkspace>>,
}

impl Executor {
    fn new(n: usize, threads: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool");
            let workers = pool.current_num_threads();
            let workspaces = (0..workers).map(|_| std::sync::Mutex::new(BfsWorkspace::new(n))).collect();
            Executor { pool, workspaces }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = threads;
            Executor { workspaces: vec![std::sync::Mutex::new(BfsWorkspace::new(n))] }
        }
    }

    /// Runs every (rank, t, dir) search and returns results in task order.
    fn run(
        &self,
        g: &Graph,
        frozen: &HubLabels,
        bits: Option<&ReachBitsets>,
        tasks: &[(Rank, usize, Direction)],
    ) -> Vec<StagedSearch> {
        let one = |&(rank, t, dir): &(Rank, usize, Direction), worker: usize| {
            let mut ws = self.workspaces[worker].lock().expect("workspace lock");
            let mut vertices = Vec::new();
            batch_pruned_bfs(g, frozen, bits, rank, t, dir, &mut ws, &mut vertices);
            StagedSearch { rank, dir, vertices }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            self.pool.install(|| {
                tasks
                    .par_iter()
                    .map(|task| one(task, rayon::current_thread_index().unwrap_or(0)))
                    .collect()
            })
        }
        #[cfg(not(feature = "parallel"))]
        {
            tasks.iter().map(|task| one(task, 0)).collect()
        }
    }
}

fn batch_tasks(ranks: std::ops::Range<usize>) -> Vec<(Rank, usize, Direction)> {
    let start = ranks.start;
    ranks
        .flat_map(|r| Direction::BOTH.map(|d| (r as Rank, r - start, d)))
        .collect()
}

/// Builds labels for `order` according to `cfg`.
pub fn parallel_preprocess(g: &Graph, order: &VertexOrder, cfg: &BatchConfig) -> Result<HubLabels, BatchError> {
    parallel_preprocess_timed(g, order, cfg).map(|(l, _)| l)
}

/// [`parallel_preprocess`] plus per-phase timings.
pub fn parallel_preprocess_timed(
    g: &Graph,
    order: &VertexOrder,
    cfg: &BatchConfig,
) -> Result<(HubLabels, PhaseTimes), BatchError> {
    cfg.validate()?;
    assert_eq!(g.num_vertices(), order.len(), "order must cover every vertex");
    let mut times = PhaseTimes::default();
    if cfg.mode == Mode::Sequential {
        let start = Instant::now();
        let labels = pll_preprocess(g, order);
        times.search = start.elapsed();
        return Ok((labels, times));
    }

    let n = g.num_vertices();
    let strict = cfg.strict_prefix(n);
    let exec = Executor::new(n, cfg.threads);
    let mut labels = HubLabels::new(order.clone());
    let mut bits = ReachBitsets::new(n, cfg.k)?;

    let mut start = 0;
    while start < strict {
        let end = (start + cfg.k).min(strict);
        let roots: Vec<Vertex> = (start..end).map(|r| order.vertex(r as Rank)).collect();

        let t0 = Instant::now();
        bits.sweep(g, &roots)?;
        let t1 = Instant::now();
        let staged = exec.run(g, &labels, Some(&bits), &batch_tasks(start..end));
        let t2 = Instant::now();
        merge_batch(&mut labels, staged);
        let t3 = Instant::now();

        times.sweep += t1 - t0;
        times.search += t2 - t1;
        times.merge += t3 - t2;
        start = end;
    }

    relaxed_batches(g, &mut labels, strict, cfg.k, &exec, &mut times);
    Ok((labels, times))
}

fn relaxed_batches(
    g: &Graph,
    labels: &mut HubLabels,
    from: usize,
    k: usize,
    exec: &Executor,
    times: &mut PhaseTimes,
) {
    let n = g.num_vertices();
    if from < n {
        labels.relaxed = true;
    }
    let mut start = from;
    while start < n {
        let end = (start + k).min(n);
        let t1 = Instant::now();
        let staged = exec.run(g, labels, None, &batch_tasks(start..end));
        let t2 = Instant::now();
        merge_batch(labels, staged);
        times.search += t2 - t1;
        times.merge += t2.elapsed();
        start = end;
    }
}

/// Processes ranks `from..n` in batches of `cfg.k` without sweeps.
///
/// `labels` must already hold every hub of rank below `from`. Searches prune
/// only against labels frozen at the start of their batch, so the result is
/// a correct cover that may contain redundant entries.
pub fn relaxed_tail_phase(g: &Graph, mut labels: HubLabels, from: usize, cfg: &BatchConfig) -> Result<HubLabels, BatchError> {
    cfg.validate()?;
    let exec = Executor::new(g.num_vertices(), cfg.threads);
    let mut times = PhaseTimes::default();
    relaxed_batches(g, &mut labels, from, cfg.k, &exec, &mut times);
    Ok(labels)
}
