//! Ground-truth reachability and label verification.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GraphError, VerifyError};
use crate::graph::{Graph, Rank, Vertex};
use crate::labels::{intersects, Direction, HubLabels};

/// Largest graph the dense closure will be built for.
pub const ORACLE_MAX_N: usize = 20_000;

/// Dense transitive closure, one bit row per source vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachOracle {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl ReachOracle {
    /// Per-vertex BFS over out-edges. Every vertex reaches itself.
    pub fn build(g: &Graph) -> Result<Self, GraphError> {
        let n = g.num_vertices();
        if n > ORACLE_MAX_N {
            return Err(GraphError::GraphTooLarge { n: n as u32, limit: ORACLE_MAX_N as u32 });
        }
        let words = n.div_ceil(64);
        let mut rows = vec![0u64; n * words];
        let mut queue = Vec::with_capacity(n);
        for s in g.vertices() {
            let row = &mut rows[s as usize * words..(s as usize + 1) * words];
            queue.clear();
            queue.push(s);
            row[s as usize / 64] |= 1 << (s % 64);
            let mut head = 0;
            while head < queue.len() {
                let u = queue[head];
                head += 1;
                for &v in g.out_neighbors(u) {
                    let (w, b) = (v as usize / 64, 1u64 << (v % 64));
                    if row[w] & b == 0 {
                        row[w] |= b;
                        queue.push(v);
                    }
                }
            }
        }
        Ok(ReachOracle { n, words, rows })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn reaches(&self, s: Vertex, t: Vertex) -> bool {
        self.rows[s as usize * self.words + t as usize / 64] >> (t % 64) & 1 == 1
    }

    /// Vertices reachable from `s`, ascending.
    pub fn row(&self, s: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n as Vertex).filter(move |&t| self.reaches(s, t))
    }
}

pub fn build_oracle(g: &Graph) -> Result<ReachOracle, GraphError> {
    ReachOracle::build(g)
}

/// Independent closure by repeated boolean squaring of `(A | I)`, for n ≤ 64.
/// Returns `rows[s]` with bit `t` set iff `s` reaches `t`.
pub fn closure_by_squaring(g: &Graph) -> Vec<u64> {
    let n = g.num_vertices();
    assert!(n <= 64, "squaring oracle is limited to 64 vertices");
    let mut m: Vec<u64> = (0..n)
        .map(|s| {
            let mut row = 1u64 << s;
            for &t in g.out_neighbors(s as Vertex) {
                row |= 1 << t;
            }
            row
        })
        .collect();
    loop {
        let next: Vec<u64> = (0..n)
            .map(|s| (0..n).filter(|&k| m[s] >> k & 1 == 1).fold(0, |acc, k| acc | m[k]))
            .collect();
        if next == m {
            return m;
        }
        m = next;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoverReport {
    pub pairs_checked: u64,
    /// Pairs where the labels disagree with the oracle, in (s, t) order.
    pub mismatches: Vec<(Vertex, Vertex)>,
}

impl CoverReport {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn check_row(labels: &HubLabels, s: Vertex, n: usize, reaches: impl Fn(Vertex) -> bool) -> Vec<(Vertex, Vertex)> {
    (0..n as Vertex)
        .filter(|&t| labels.query_unchecked(s, t) != reaches(t))
        .map(|t| (s, t))
        .collect()
}

fn collect_rows<F>(sources: &[Vertex], f: F) -> Vec<(Vertex, Vertex)>
where
    F: Fn(Vertex) -> Vec<(Vertex, Vertex)> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        sources.par_iter().flat_map_iter(|&s| f(s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        sources.iter().flat_map(|&s| f(s)).collect()
    }
}

/// Compares every (s, t) query against the oracle.
pub fn verify_cover(labels: &HubLabels, oracle: &ReachOracle) -> CoverReport {
    let n = oracle.num_vertices();
    assert_eq!(labels.num_vertices(), n, "labels and oracle cover different graphs");
    let sources: Vec<Vertex> = (0..n as Vertex).collect();
    let mismatches = collect_rows(&sources, |s| check_row(labels, s, n, |t| oracle.reaches(s, t)));
    CoverReport { pairs_checked: (n as u64) * (n as u64), mismatches }
}

/// Checks all pairs whose source is drawn with probability `fraction`.
/// Each sampled row is answered by a fresh BFS, so no n² matrix is built.
pub fn verify_cover_sampled(g: &Graph, labels: &HubLabels, fraction: f64, seed: u64) -> CoverReport {
    let n = g.num_vertices();
    assert_eq!(labels.num_vertices(), n, "labels and graph differ in size");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<Vertex> = g.vertices().filter(|_| rng.gen_bool(fraction.clamp(0.0, 1.0))).collect();
    let mismatches = collect_rows(&sources, |s| {
        let mut seen = vec![false; n];
        let mut queue = vec![s];
        seen[s as usize] = true;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &v in g.out_neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push(v);
                }
            }
        }
        check_row(labels, s, n, |t| seen[t as usize])
    });
    CoverReport { pairs_checked: sources.len() as u64 * n as u64, mismatches }
}

/// One stored hub: `rank` in the `dir` label of `vertex`
/// (`Forward` = outgoing label, `Backward` = incoming label).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelEntry {
    pub vertex: Vertex,
    pub dir: Direction,
    pub rank: Rank,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MinimalityReport {
    pub entries_checked: usize,
    pub removable: Vec<LabelEntry>,
}

impl MinimalityReport {
    pub fn is_minimal(&self) -> bool {
        self.removable.is_empty()
    }
}

fn without(label: &[Rank], i: usize, buf: &mut Vec<Rank>) {
    buf.clear();
    buf.extend_from_slice(&label[..i]);
    buf.extend_from_slice(&label[i + 1..]);
}

/// Finds every entry whose individual deletion leaves all reachable pairs
/// still answered true.
///
/// Removing an entry from `l_out[s]` only affects pairs `(s, *)`, and from
/// `l_in[t]` only pairs `(*, t)`, so each entry costs O(n) intersections.
/// A vertex's own rank is skipped unless `include_self`, because reflexive
/// queries never consult labels.
pub fn verify_minimal(labels: &HubLabels, oracle: &ReachOracle, include_self: bool) -> MinimalityReport {
    let n = oracle.num_vertices();
    assert_eq!(labels.num_vertices(), n, "labels and oracle cover different graphs");
    let mut report = MinimalityReport::default();
    let mut buf = Vec::new();
    for v in 0..n as Vertex {
        let own = labels.order().rank(v);
        for dir in Direction::BOTH {
            let label = labels.label(v, dir);
            for (i, &rank) in label.iter().enumerate() {
                if rank == own && !include_self {
                    continue;
                }
                report.entries_checked += 1;
                without(label, i, &mut buf);
                let needed = (0..n as Vertex).filter(|&o| o != v).any(|o| match dir {
                    Direction::Forward => oracle.reaches(v, o) && !intersects(&buf, labels.l_in(o)),
                    Direction::Backward => oracle.reaches(o, v) && !intersects(labels.l_out(o), &buf),
                });
                if !needed {
                    report.removable.push(LabelEntry { vertex: v, dir, rank });
                }
            }
        }
    }
    report
}

/// First place where two label sets differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelDifference {
    pub vertex: Vertex,
    pub dir: Direction,
    pub left: Vec<Rank>,
    pub right: Vec<Rank>,
}

/// Per-vertex, per-direction equality. `Ok(None)` means equal.
pub fn verify_equal(a: &HubLabels, b: &HubLabels) -> Result<Option<LabelDifference>, VerifyError> {
    if a.order() != b.order() {
        return Err(VerifyError::OrderMismatch);
    }
    for v in 0..a.num_vertices() as Vertex {
        for dir in Direction::BOTH {
            let (l, r) = (a.label(v, dir), b.label(v, dir));
            if l != r {
                return Ok(Some(LabelDifference { vertex: v, dir, left: l.to_vec(), right: r.to_vec() }));
            }
        }
    }
    Ok(None)
}
