//! Seeded synthetic DAG generators.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;
use crate::graph::{Graph, Vertex};

/// Edge list of a uniformly random DAG with exactly `m` edges.
///
/// Vertices are shuffled once; then `m` distinct position pairs `i < j` are
/// drawn uniformly and oriented from the lower to the higher position.
pub fn random_dag_edges(n: usize, m: usize, seed: u64) -> Result<Vec<(Vertex, Vertex)>, GraphError> {
    let max = (n as u64) * (n as u64).saturating_sub(1) / 2;
    if m as u64 > max {
        return Err(GraphError::TooManyEdges { n: n as u32, m: m as u64, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<Vertex> = (0..n as Vertex).collect();
    perm.shuffle(&mut rng);

    let mut picks = index::sample(&mut rng, max as usize, m).into_vec();
    picks.sort_unstable();

    // Pair index p enumerates (i, j) row by row: row i holds n-1-i pairs.
    let mut edges = Vec::with_capacity(m);
    let mut row = 0usize;
    let mut row_start = 0usize;
    for p in picks {
        while p >= row_start + (n - 1 - row) {
            row_start += n - 1 - row;
            row += 1;
        }
        let j = row + 1 + (p - row_start);
        edges.push((perm[row], perm[j]));
    }
    Ok(edges)
}

pub fn gen_random_dag(n: usize, m: usize, seed: u64) -> Result<Graph, GraphError> {
    let edges = random_dag_edges(n, m, seed)?;
    Graph::build(&edges, Some(n))
}

/// Edge list of a layered DAG: vertex `layer * width + i`, each non-final
/// vertex pointing to `edges_per_vertex` distinct vertices of the next layer.
pub fn layered_dag_edges(
    layers: usize,
    width: usize,
    edges_per_vertex: usize,
    seed: u64,
) -> Vec<(Vertex, Vertex)> {
    let epv = edges_per_vertex.min(width);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(layers.saturating_sub(1) * width * epv);
    for layer in 0..layers.saturating_sub(1) {
        let next = (layer + 1) * width;
        for i in 0..width {
            let u = (layer * width + i) as Vertex;
            let mut targets = index::sample(&mut rng, width, epv).into_vec();
            targets.sort_unstable();
            edges.extend(targets.into_iter().map(|t| (u, (next + t) as Vertex)));
        }
    }
    edges
}

pub fn gen_layered_dag(
    layers: usize,
    width: usize,
    edges_per_vertex: usize,
    seed: u64,
) -> Result<Graph, GraphError> {
    let edges = layered_dag_edges(layers, width, edges_per_vertex, seed);
    Graph::build(&edges, Some(layers * width))
}
