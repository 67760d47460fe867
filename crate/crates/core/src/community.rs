//! Louvain community detection: greedy modularity maximization by local node
//! moves followed by graph aggregation, repeated until no move helps.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// A full pass whose summed modularity gain falls below this ends the phase.
pub const PASS_GAIN_THRESHOLD: f64 = 1e-10;

/// Minimum gain in modularity for a single node move.
const MOVE_EPSILON: f64 = 1e-14;

/// Assignment of graph nodes to communities `0..C`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Partition {
    assignment: BTreeMap<String, usize>,
    count: usize,
}

impl Partition {
    /// Wraps an explicit assignment. Community ids must be dense.
    pub fn new(assignment: BTreeMap<String, usize>) -> Result<Self> {
        let count = assignment.values().max().map_or(0, |&c| c + 1);
        let mut used = vec![false; count];
        for &c in assignment.values() {
            used[c] = true;
        }
        if let Some(gap) = used.iter().position(|u| !u) {
            return Err(Error::InvalidPartition(format!(
                "community ids are not dense: {gap} is unused"
            )));
        }
        Ok(Partition { assignment, count })
    }

    /// Builds a partition from arbitrary group keys, renumbering groups in
    /// order of first appearance.
    pub fn from_groups<I, S, K>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, K)>,
        S: Into<String>,
        K: Eq + std::hash::Hash,
    {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let mut assignment = BTreeMap::new();
        for (node, key) in pairs {
            let next = ids.len();
            let c = *ids.entry(key).or_insert(next);
            assignment.insert(node.into(), c);
        }
        Partition {
            assignment,
            count: ids.len(),
        }
    }

    /// Every node in its own community.
    pub fn singletons(graph: &WeightedGraph) -> Self {
        Self::from_indices(graph, &(0..graph.node_count()).collect::<Vec<_>>())
    }

    /// All nodes in one community.
    pub fn whole(graph: &WeightedGraph) -> Self {
        Self::from_indices(graph, &vec![0; graph.node_count()])
    }

    pub fn community_of(&self, node: &str) -> Option<usize> {
        self.assignment.get(node).copied()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }

    /// Members of each community, sorted.
    pub fn members(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); self.count];
        for (node, &c) in &self.assignment {
            out[c].push(node.clone());
        }
        out
    }

    /// Writes `node community` per line.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for (node, c) in &self.assignment {
            writeln!(out, "{node} {c}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Dense community index per graph node. Fails on the first graph node
    /// the partition does not cover.
    pub(crate) fn to_indices(&self, graph: &WeightedGraph) -> Result<Vec<usize>> {
        let raw = graph
            .labels()
            .iter()
            .map(|l| self.community_of(l).ok_or_else(|| Error::MissingNode(l.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(renumber(&raw).0)
    }

    /// Partition from per-node community ids, renumbered densely in node order.
    pub(crate) fn from_indices(graph: &WeightedGraph, communities: &[usize]) -> Self {
        Self::from_groups(graph.labels().iter().cloned().zip(communities.iter().copied()))
    }
}

/// Relabels community ids to `0..C` by first appearance.
fn renumber(communities: &[usize]) -> (Vec<usize>, usize) {
    let mut map: HashMap<usize, usize> = HashMap::new();
    let out = communities
        .iter()
        .map(|c| {
            let next = map.len();
            *map.entry(*c).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// Newman modularity with resolution `gamma`:
/// `Q = sum_c [ in_c / m - gamma * (tot_c / 2m)^2 ]`, where `in_c` is the
/// edge weight inside community `c` and `tot_c` its summed degree.
/// A graph without edges has modularity 0.
pub fn modularity(graph: &WeightedGraph, partition: &Partition, resolution: f64) -> Result<f64> {
    let comm = partition.to_indices(graph)?;
    Ok(modularity_of(graph, &comm, resolution))
}

pub(crate) fn modularity_of(graph: &WeightedGraph, comm: &[usize], gamma: f64) -> f64 {
    let m = graph.total_weight();
    if m <= 0.0 {
        return 0.0;
    }
    let c = comm.iter().max().map_or(0, |&c| c + 1);
    let mut inside = vec![0.0; c];
    let mut tot = vec![0.0; c];
    for node in 0..graph.node_count() {
        inside[comm[node]] += graph.self_weight(node);
        tot[comm[node]] += graph.degree(node);
    }
    for (a, b, w) in graph.edges() {
        if comm[a] == comm[b] {
            inside[comm[a]] += w;
        }
    }
    inside
        .iter()
        .zip(&tot)
        .map(|(&i, &t)| i / m - gamma * (t / (2.0 * m)).powi(2))
        .sum()
}

/// Moves nodes one at a time to the neighboring community with the largest
/// modularity gain, until a full pass moves nothing or gains less than
/// [`PASS_GAIN_THRESHOLD`]. `comm` must hold ids below the node count.
/// Returns whether any node moved.
fn local_moves(graph: &WeightedGraph, comm: &mut [usize], gamma: f64, rng: &mut ChaCha8Rng) -> bool {
    let n = graph.node_count();
    let m = graph.total_weight();
    if m <= 0.0 || n == 0 {
        return false;
    }
    let degree: Vec<f64> = (0..n).map(|i| graph.degree(i)).collect();
    let mut tot = vec![0.0; n];
    for i in 0..n {
        tot[comm[i]] += degree[i];
    }

    let mut links = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    let mut moved_any = false;

    loop {
        order.shuffle(rng);
        let mut pass_gain = 0.0;
        let mut moves = 0usize;
        for &node in &order {
            let own = comm[node];
            let k = degree[node];
            for (nb, w) in graph.neighbors(node) {
                let d = comm[nb];
                if !seen[d] {
                    seen[d] = true;
                    touched.push(d);
                }
                links[d] += w;
            }
            tot[own] -= k;

            // Gain of inserting `node` into `d`, scaled by m.
            let gain = |d: usize, links: &[f64], tot: &[f64]| links[d] - gamma * tot[d] * k / (2.0 * m);
            let stay = gain(own, &links, &tot);
            touched.sort_unstable();
            let mut best = own;
            let mut best_gain = stay;
            for &d in &touched {
                if d == own {
                    continue;
                }
                let g = gain(d, &links, &tot);
                if g > best_gain && (g - stay) / m > MOVE_EPSILON {
                    best = d;
                    best_gain = g;
                }
            }

            tot[best] += k;
            if best != own {
                comm[node] = best;
                pass_gain += (best_gain - stay) / m;
                moves += 1;
            }
            for &d in &touched {
                links[d] = 0.0;
                seen[d] = false;
            }
            touched.clear();
        }
        moved_any |= moves > 0;
        if moves == 0 || pass_gain < PASS_GAIN_THRESHOLD {
            return moved_any;
        }
    }
}

/// One local-move phase from `partition`. Returns the improved partition and
/// whether any node moved; modularity never decreases.
pub fn local_move_phase(
    graph: &WeightedGraph,
    partition: &Partition,
    resolution: f64,
    seed: u64,
) -> Result<(Partition, bool)> {
    let mut comm = partition.to_indices(graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moved = local_moves(graph, &mut comm, resolution, &mut rng);
    Ok((Partition::from_indices(graph, &comm), moved))
}

fn aggregate_dense(graph: &WeightedGraph, comm: &[usize], count: usize) -> WeightedGraph {
    let mut out = WeightedGraph::with_nodes((0..count).map(|c| c.to_string()));
    for node in 0..graph.node_count() {
        let w = graph.self_weight(node);
        if w > 0.0 {
            out.add_self_weight(comm[node], w);
        }
    }
    for (a, b, w) in graph.edges() {
        let (ca, cb) = (comm[a], comm[b]);
        if ca == cb {
            out.add_self_weight(ca, w);
        } else {
            out.add_edge_between(ca, cb, w);
        }
    }
    out
}

/// Collapses each community into one node labeled by its community id.
/// Edges between communities are summed; weight inside a community becomes
/// that node's self weight.
pub fn aggregate_graph(graph: &WeightedGraph, partition: &Partition) -> Result<WeightedGraph> {
    let comm = partition.to_indices(graph)?;
    let count = comm.iter().max().map_or(0, |&c| c + 1);
    Ok(aggregate_dense(graph, &comm, count))
}

/// Modularity before and after one local-move phase of a Louvain run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTrace {
    pub level: usize,
    pub nodes: usize,
    pub modularity_before: f64,
    pub modularity_after: f64,
    pub moved: bool,
}

/// Louvain with a per-phase modularity trace.
pub fn louvain_traced(
    graph: &WeightedGraph,
    resolution: f64,
    seed: u64,
) -> (Partition, Vec<PhaseTrace>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<usize> = (0..graph.node_count()).collect();
    let mut level_graph = graph.clone();
    let mut trace = Vec::new();

    for level in 0.. {
        let n = level_graph.node_count();
        let mut comm: Vec<usize> = (0..n).collect();
        let before = modularity_of(&level_graph, &comm, resolution);
        let moved = local_moves(&level_graph, &mut comm, resolution, &mut rng);
        let after = modularity_of(&level_graph, &comm, resolution);
        trace.push(PhaseTrace {
            level,
            nodes: n,
            modularity_before: before,
            modularity_after: after,
            moved,
        });
        debug_assert!(after >= before - 1e-12, "modularity decreased: {before} -> {after}");
        if !moved {
            break;
        }
        let (comm, count) = renumber(&comm);
        for m in &mut membership {
            *m = comm[*m];
        }
        if count == n {
            break;
        }
        level_graph = aggregate_dense(&level_graph, &comm, count);
    }
    (Partition::from_indices(graph, &membership), trace)
}

/// Louvain community detection. Node visit order is shuffled from `seed`;
/// equal-gain moves go to the lowest community id, so identical inputs give
/// identical partitions.
pub fn louvain(graph: &WeightedGraph, resolution: f64, seed: u64) -> Partition {
    louvain_traced(graph, resolution, seed).0
}
