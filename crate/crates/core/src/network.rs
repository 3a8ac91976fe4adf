//! Similarity-network construction over efficient structures.

use crate::error::{CoreError, Result};
use crate::geometry::similarity;
use crate::structure::Structure;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

/// An unordered structure pair with its similarity value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCandidate {
    pub id_a: u64,
    pub id_b: u64,
    /// Similarity S of the pair, in units of r0.
    pub s: f64,
}

/// Similarity of every unordered pair, ordered by `(id_a, id_b)` with
/// `id_a < id_b`. Pairs are evaluated in parallel.
pub fn pairwise_similarities(structures: &[Structure]) -> Result<Vec<EdgeCandidate>> {
    if let Some(first) = structures.first() {
        let n = first.n();
        for s in structures {
            if s.n() != n {
                return Err(CoreError::SizeMismatch { a: n, b: s.n() });
            }
        }
    }
    let mut order: Vec<&Structure> = structures.iter().collect();
    order.sort_by_key(|s| s.id);
    for w in order.windows(2) {
        if w[0].id == w[1].id {
            return Err(CoreError::InvalidInput(format!(
                "duplicate structure id {}",
                w[0].id
            )));
        }
    }
    let mut pairs = Vec::new();
    for i in 0..order.len() {
        for j in (i + 1)..order.len() {
            pairs.push((i, j));
        }
    }
    pairs
        .into_par_iter()
        .map(|(i, j)| {
            let r = similarity(order[i], order[j])?;
            Ok(EdgeCandidate {
                id_a: order[i].id,
                id_b: order[j].id,
                s: r.s,
            })
        })
        .collect()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            self.parent[root] = self.parent[self.parent[root]];
            root = self.parent[root];
        }
        root
    }

    pub(crate) fn union(&mut self, x: usize, y: usize) {
        let (mut a, mut b) = (self.find(x), self.find(y));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }

    pub(crate) fn largest_component(&mut self) -> usize {
        let mut best = 0;
        for x in 0..self.parent.len() {
            let root = self.find(x);
            if root == x {
                best = best.max(self.size[x]);
            }
        }
        best
    }
}

/// Smallest candidate S value at which the thresholded graph's largest
/// connected component covers at least `coverage` of the nodes.
pub fn select_cutoff(candidates: &[EdgeCandidate], coverage: f64) -> Result<f64> {
    if candidates.is_empty() {
        return Err(CoreError::EmptyCandidates);
    }
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(CoreError::InvalidInput(format!(
            "coverage must lie in (0, 1], got {coverage}"
        )));
    }
    let mut ids = BTreeSet::new();
    for c in candidates {
        ids.insert(c.id_a);
        ids.insert(c.id_b);
    }
    let index: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let node_count = index.len();
    let needed = coverage * node_count as f64 - 1e-9;

    let mut values: Vec<f64> = candidates.iter().map(|c| c.s).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let connected = |cutoff: f64| -> bool {
        let mut uf = UnionFind::new(node_count);
        for c in candidates {
            if c.s <= cutoff {
                uf.union(index[&c.id_a], index[&c.id_b]);
            }
        }
        uf.largest_component() as f64 >= needed
    };

    if !connected(*values.last().unwrap()) {
        return Err(CoreError::InvalidInput(format!(
            "no cutoff reaches coverage {coverage}"
        )));
    }
    let (mut lo, mut hi) = (0usize, values.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if connected(values[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(values[lo])
}

/// Thresholded similarity network: nodes plus the candidate edges with
/// `S <= cutoff`.
#[derive(Debug, Clone)]
pub struct EfficiencyNetwork {
    /// Sorted node ids.
    pub node_ids: Vec<u64>,
    /// Edges with `s <= cutoff`, ordered by `(id_a, id_b)`.
    pub edges: Vec<EdgeCandidate>,
    pub cutoff: f64,
}

impl EfficiencyNetwork {
    /// Node degrees under the stored cutoff.
    pub fn degrees(&self) -> BTreeMap<u64, usize> {
        let mut deg: BTreeMap<u64, usize> =
            self.node_ids.iter().map(|&id| (id, 0usize)).collect();
        for e in &self.edges {
            *deg.get_mut(&e.id_a).unwrap() += 1;
            *deg.get_mut(&e.id_b).unwrap() += 1;
        }
        deg
    }
}

/// Keeps the candidate edges at or below the cutoff. `node_ids` must cover
/// every candidate endpoint; nodes without surviving edges stay in the
/// network as isolated nodes.
pub fn build_network(
    node_ids: &[u64],
    candidates: &[EdgeCandidate],
    cutoff: f64,
) -> Result<EfficiencyNetwork> {
    if !(cutoff > 0.0) {
        return Err(CoreError::InvalidInput(format!(
            "cutoff must be positive, got {cutoff}"
        )));
    }
    let mut nodes: Vec<u64> = node_ids.to_vec();
    nodes.sort_unstable();
    for w in nodes.windows(2) {
        if w[0] == w[1] {
            return Err(CoreError::InvalidInput(format!("duplicate node id {}", w[0])));
        }
    }
    let node_set: BTreeSet<u64> = nodes.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for c in candidates {
        if c.id_a == c.id_b {
            return Err(CoreError::InvalidInput(format!("self-edge on {}", c.id_a)));
        }
        if !node_set.contains(&c.id_a) || !node_set.contains(&c.id_b) {
            return Err(CoreError::InvalidInput(format!(
                "edge ({}, {}) references an unknown node",
                c.id_a, c.id_b
            )));
        }
        let key = if c.id_a < c.id_b {
            (c.id_a, c.id_b)
        } else {
            (c.id_b, c.id_a)
        };
        if !seen.insert(key) {
            return Err(CoreError::InvalidInput(format!(
                "duplicate pair ({}, {})",
                key.0, key.1
            )));
        }
        if c.s <= cutoff {
            edges.push(EdgeCandidate {
                id_a: key.0,
                id_b: key.1,
                s: c.s,
            });
        }
    }
    edges.sort_by_key(|e| (e.id_a, e.id_b));
    Ok(EfficiencyNetwork {
        node_ids: nodes,
        edges,
        cutoff,
    })
}
