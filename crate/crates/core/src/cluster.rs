//! Markov clustering (MCL) of the efficiency network and the consistency
//! parameter used to choose the inflation granularity.
//!
//! The iteration alternates expansion (matrix squaring) and inflation
//! (elementwise p-th power with column renormalization) on the
//! column-normalized adjacency matrix until the iterate stops changing;
//! clusters are the connected regions of the converged nonzero pattern.
//! All accumulations run in a fixed order so results are bit-identical
//! across runs and thread counts.

use crate::error::{CoreError, Result};
use crate::network::{EfficiencyNetwork, UnionFind};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct MclOptions {
    /// Add weight-1 self-loops before normalization. Avoids parity
    /// oscillation on near-bipartite graphs; switchable off to mimic the
    /// bare iteration.
    pub self_loops: bool,
    pub max_iterations: usize,
    /// Convergence: largest elementwise change between successive
    /// iterates.
    pub convergence_tol: f64,
    /// Entries below this are zeroed each iteration.
    pub prune_tol: f64,
}

impl Default for MclOptions {
    fn default() -> Self {
        MclOptions {
            self_loops: true,
            max_iterations: 10_000,
            convergence_tol: 1e-10,
            prune_tol: 1e-14,
        }
    }
}

/// Node-to-cluster map at one granularity. Labels are assigned by
/// decreasing cluster population (ties: smallest member id), so label 0 is
/// always the dominant cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub p: f64,
    pub labels: BTreeMap<u64, usize>,
    /// Cluster populations indexed by label (nonincreasing).
    pub populations: Vec<usize>,
}

impl ClusterAssignment {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn cluster_count(&self) -> usize {
        self.populations.len()
    }

    /// Member ids of every cluster, indexed by label.
    pub fn members(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new(); self.populations.len()];
        for (&id, &label) in &self.labels {
            out[label].push(id);
        }
        out
    }
}

/// Column-major sparse nonnegative matrix with rows sorted per column.
#[derive(Debug, Clone)]
struct SparseCols {
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
}

impl SparseCols {
    fn normalize(&mut self) {
        for col in &mut self.cols {
            let sum: f64 = col.iter().map(|(_, v)| *v).sum();
            if sum > 0.0 {
                for (_, v) in col.iter_mut() {
                    *v /= sum;
                }
            }
        }
    }

    /// Matrix square with deterministic accumulation order.
    fn expand(&self, scratch: &mut [f64], touched: &mut Vec<usize>) -> SparseCols {
        let mut cols = Vec::with_capacity(self.n);
        for j in 0..self.n {
            touched.clear();
            for &(k, vkj) in &self.cols[j] {
                for &(i, vik) in &self.cols[k] {
                    if scratch[i] == 0.0 {
                        touched.push(i);
                    }
                    scratch[i] += vik * vkj;
                }
            }
            touched.sort_unstable();
            let mut col = Vec::with_capacity(touched.len());
            for &i in touched.iter() {
                col.push((i, scratch[i]));
                scratch[i] = 0.0;
            }
            cols.push(col);
        }
        SparseCols { n: self.n, cols }
    }

    fn inflate(&mut self, p: f64) {
        if p != 1.0 {
            for col in &mut self.cols {
                for (_, v) in col.iter_mut() {
                    *v = v.powf(p);
                }
            }
        }
    }

    fn prune(&mut self, tol: f64) {
        for col in &mut self.cols {
            col.retain(|(_, v)| *v >= tol);
        }
    }

    /// Largest elementwise difference over the union of supports.
    fn max_diff(&self, other: &SparseCols) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.cols.iter().zip(&other.cols) {
            let (mut ia, mut ib) = (0, 0);
            while ia < a.len() || ib < b.len() {
                match (a.get(ia), b.get(ib)) {
                    (Some(&(ra, va)), Some(&(rb, vb))) => {
                        if ra == rb {
                            worst = worst.max((va - vb).abs());
                            ia += 1;
                            ib += 1;
                        } else if ra < rb {
                            worst = worst.max(va.abs());
                            ia += 1;
                        } else {
                            worst = worst.max(vb.abs());
                            ib += 1;
                        }
                    }
                    (Some(&(_, va)), None) => {
                        worst = worst.max(va.abs());
                        ia += 1;
                    }
                    (None, Some(&(_, vb))) => {
                        worst = worst.max(vb.abs());
                        ib += 1;
                    }
                    (None, None) => break,
                }
            }
        }
        worst
    }

    #[cfg(test)]
    fn column_sums(&self) -> Vec<f64> {
        self.cols
            .iter()
            .map(|c| c.iter().map(|(_, v)| *v).sum())
            .collect()
    }
}

fn adjacency(net: &EfficiencyNetwork, self_loops: bool) -> (Vec<u64>, SparseCols) {
    let ids = net.node_ids.clone();
    let index: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = ids.len();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    if self_loops {
        for (i, col) in cols.iter_mut().enumerate() {
            col.push((i, 1.0));
        }
    }
    for e in &net.edges {
        let (a, b) = (index[&e.id_a], index[&e.id_b]);
        cols[a].push((b, 1.0));
        cols[b].push((a, 1.0));
    }
    for col in &mut cols {
        col.sort_unstable_by_key(|(r, _)| *r);
    }
    (ids, SparseCols { n, cols })
}

/// Markov clustering at inflation `p` with default options.
pub fn mcl(net: &EfficiencyNetwork, p: f64) -> Result<ClusterAssignment> {
    mcl_with_options(net, p, &MclOptions::default())
}

pub fn mcl_with_options(
    net: &EfficiencyNetwork,
    p: f64,
    opts: &MclOptions,
) -> Result<ClusterAssignment> {
    if !(p >= 1.0) {
        return Err(CoreError::InvalidInput(format!(
            "inflation must satisfy p >= 1, got {p}"
        )));
    }
    if net.node_ids.is_empty() {
        return Err(CoreError::InvalidInput("empty network".into()));
    }
    let (ids, mut a) = adjacency(net, opts.self_loops);
    a.normalize();

    let mut scratch = vec![0.0f64; a.n];
    let mut touched: Vec<usize> = Vec::with_capacity(a.n);
    let mut converged = false;
    let mut last_delta = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let mut next = a.expand(&mut scratch, &mut touched);
        next.inflate(p);
        next.prune(opts.prune_tol);
        next.normalize();
        last_delta = a.max_diff(&next);
        a = next;
        if last_delta <= opts.convergence_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CoreError::MclNonConvergence {
            iterations: opts.max_iterations,
            last_delta,
        });
    }

    // Clusters: connected regions of the converged nonzero pattern.
    let mut uf = UnionFind::new(a.n);
    for (j, col) in a.cols.iter().enumerate() {
        for &(i, _) in col {
            uf.union(i, j);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..a.n {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut clusters: Vec<Vec<usize>> = groups.into_values().collect();
    clusters.sort_by_key(|c| (std::cmp::Reverse(c.len()), ids[c[0]]));

    let mut labels = BTreeMap::new();
    let mut populations = Vec::with_capacity(clusters.len());
    for (label, members) in clusters.iter().enumerate() {
        populations.push(members.len());
        for &i in members {
            labels.insert(ids[i], label);
        }
    }
    Ok(ClusterAssignment {
        p,
        labels,
        populations,
    })
}

/// Consistency of `cur` against the coarser assignment `prev`: the
/// population-weighted largest fraction of each cluster contained in a
/// single predecessor cluster. Returns `(raw, normalized)` where the raw
/// value is rescaled from `[1/n, 1]` (n = predecessor cluster count) onto
/// `[0, 1]`.
pub fn consistency_between(
    prev: &ClusterAssignment,
    cur: &ClusterAssignment,
) -> Result<(f64, f64)> {
    if prev.labels.len() != cur.labels.len()
        || !prev.labels.keys().eq(cur.labels.keys())
    {
        return Err(CoreError::InvalidInput(
            "assignments cover different node sets".into(),
        ));
    }
    let total = cur.node_count() as f64;
    let mut raw = 0.0;
    for members in cur.members() {
        let mut per_prev: BTreeMap<usize, usize> = BTreeMap::new();
        for id in &members {
            *per_prev.entry(prev.labels[id]).or_insert(0) += 1;
        }
        let best = per_prev.values().copied().max().unwrap_or(0) as f64;
        let c_i = best / members.len() as f64;
        raw += (members.len() as f64 / total) * c_i;
    }
    let n = prev.cluster_count() as f64;
    let normalized = if n <= 1.0 {
        1.0
    } else {
        ((raw - 1.0 / n) / (1.0 - 1.0 / n)).max(0.0)
    };
    Ok((raw, normalized))
}

/// Consistency curve over an ascending granularity grid.
#[derive(Debug, Clone)]
pub struct ConsistencyCurve {
    pub p_values: Vec<f64>,
    pub c_raw: Vec<f64>,
    /// Normalized consistency, in `[0, 1]`. The first grid point is 1 by
    /// convention (its predecessor is the single whole-network cluster).
    pub c_values: Vec<f64>,
    pub n_clusters: Vec<usize>,
}

/// Runs MCL across the grid and scores each step against its predecessor.
pub fn consistency_scan(net: &EfficiencyNetwork, p_grid: &[f64]) -> Result<ConsistencyCurve> {
    if p_grid.len() < 2 {
        return Err(CoreError::InvalidInput(format!(
            "granularity grid needs at least 2 points, got {}",
            p_grid.len()
        )));
    }
    for w in p_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(CoreError::InvalidInput(
                "granularity grid must be strictly ascending".into(),
            ));
        }
    }
    let assignments: Vec<ClusterAssignment> = p_grid
        .iter()
        .map(|&p| mcl(net, p))
        .collect::<Result<_>>()?;
    let mut c_raw = vec![1.0];
    let mut c_values = vec![1.0];
    for pair in assignments.windows(2) {
        let (raw, normalized) = consistency_between(&pair[0], &pair[1])?;
        c_raw.push(raw);
        c_values.push(normalized);
    }
    Ok(ConsistencyCurve {
        p_values: p_grid.to_vec(),
        c_raw,
        c_values,
        n_clusters: assignments.iter().map(|a| a.cluster_count()).collect(),
    })
}

/// Largest granularity whose normalized consistency is still 1.
pub fn choose_granularity(curve: &ConsistencyCurve) -> f64 {
    let mut chosen = curve.p_values[0];
    for (&p, &c) in curve.p_values.iter().zip(&curve.c_values) {
        if c >= 1.0 - 1e-9 {
            chosen = p;
        }
    }
    chosen
}

/// One row of the ranked cluster-population table.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRow {
    pub label: usize,
    pub population: usize,
    pub fraction: f64,
}

/// Clusters ranked by population with their relative fractions.
pub fn cluster_report(assignment: &ClusterAssignment) -> Vec<ClusterRow> {
    let total: usize = assignment.populations.iter().sum();
    assignment
        .populations
        .iter()
        .enumerate()
        .map(|(label, &population)| ClusterRow {
            label,
            population,
            fraction: population as f64 / total as f64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, EdgeCandidate};

    fn edges(pairs: &[(u64, u64)]) -> Vec<EdgeCandidate> {
        pairs
            .iter()
            .map(|&(a, b)| EdgeCandidate { id_a: a, id_b: b, s: 0.01 })
            .collect()
    }

    fn clique_edges(nodes: &[u64]) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                out.push((nodes[i], nodes[j]));
            }
        }
        out
    }

    fn two_cliques_with_bridge(size: u64) -> EfficiencyNetwork {
        let a: Vec<u64> = (0..size).collect();
        let b: Vec<u64> = (size..2 * size).collect();
        let mut pairs = clique_edges(&a);
        pairs.extend(clique_edges(&b));
        pairs.push((0, size));
        let nodes: Vec<u64> = (0..2 * size).collect();
        build_network(&nodes, &edges(&pairs), 1.0).unwrap()
    }

    #[test]
    fn p_one_yields_one_cluster_per_component() {
        let nodes: Vec<u64> = (0..7).collect();
        let pairs = vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5)];
        let net = build_network(&nodes, &edges(&pairs), 1.0).unwrap();
        let a = mcl(&net, 1.0).unwrap();
        // Components: {0,1,2}, {3,4,5}, {6}.
        assert_eq!(a.populations, vec![3, 3, 1]);
        assert_eq!(a.labels[&0], a.labels[&1]);
        assert_eq!(a.labels[&0], a.labels[&2]);
        assert_eq!(a.labels[&3], a.labels[&5]);
        assert_ne!(a.labels[&0], a.labels[&3]);
        assert_ne!(a.labels[&6], a.labels[&0]);
        assert_ne!(a.labels[&6], a.labels[&3]);
    }

    #[test]
    fn bridged_cliques_split_at_p_two() {
        let net = two_cliques_with_bridge(10);
        let a = mcl(&net, 2.0).unwrap();
        assert_eq!(a.cluster_count(), 2);
        assert_eq!(a.populations, vec![10, 10]);
        for id in 0..10u64 {
            assert_eq!(a.labels[&id], a.labels[&0]);
        }
        for id in 10..20u64 {
            assert_eq!(a.labels[&id], a.labels[&10]);
        }
        // And a single cluster with p = 1.
        let whole = mcl(&net, 1.0).unwrap();
        assert_eq!(whole.cluster_count(), 1);
    }

    #[test]
    fn mcl_is_deterministic() {
        let net = two_cliques_with_bridge(6);
        let a = mcl(&net, 1.4).unwrap();
        let b = mcl(&net, 1.4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mcl_rejects_bad_inputs() {
        let net = two_cliques_with_bridge(3);
        assert!(matches!(
            mcl(&net, 0.9),
            Err(CoreError::InvalidInput(_))
        ));
        let empty = EfficiencyNetwork {
            node_ids: vec![],
            edges: vec![],
            cutoff: 0.1,
        };
        assert!(mcl(&empty, 2.0).is_err());
    }

    #[test]
    fn relabeled_nodes_keep_the_same_partition() {
        let net = two_cliques_with_bridge(5);
        let base = mcl(&net, 2.0).unwrap();
        // Shift all ids by 100 (order-preserving) and reverse order via
        // negation-like remap (order-reversing); partitions must match.
        for remap in [|id: u64| id + 100, |id: u64| 99 - id] {
            let remapped = EfficiencyNetwork {
                node_ids: {
                    let mut v: Vec<u64> = net.node_ids.iter().map(|&i| remap(i)).collect();
                    v.sort_unstable();
                    v
                },
                edges: net
                    .edges
                    .iter()
                    .map(|e| {
                        let (a, b) = (remap(e.id_a), remap(e.id_b));
                        EdgeCandidate {
                            id_a: a.min(b),
                            id_b: a.max(b),
                            s: e.s,
                        }
                    })
                    .collect(),
                cutoff: net.cutoff,
            };
            let re = mcl(&remapped, 2.0).unwrap();
            let set_of = |a: &ClusterAssignment, ids: &[u64]| -> Vec<std::collections::BTreeSet<u64>> {
                let mut sets = vec![std::collections::BTreeSet::new(); a.cluster_count()];
                for &id in ids {
                    sets[a.labels[&id]].insert(id);
                }
                sets.sort();
                sets
            };
            let orig_sets = set_of(&base, &net.node_ids);
            let re_sets: Vec<std::collections::BTreeSet<u64>> = set_of(&re, &remapped.node_ids)
                .into_iter()
                .map(|s| {
                    s.into_iter()
                        .map(|id| {
                            // invert the remap
                            net.node_ids
                                .iter()
                                .copied()
                                .find(|&orig| remap(orig) == id)
                                .unwrap()
                        })
                        .collect()
                })
                .collect();
            let mut re_sets = re_sets;
            re_sets.sort();
            assert_eq!(orig_sets, re_sets);
        }
    }

    #[test]
    fn iterates_stay_column_stochastic() {
        let net = two_cliques_with_bridge(6);
        let (_, mut a) = adjacency(&net, true);
        a.normalize();
        let mut scratch = vec![0.0; a.n];
        let mut touched = Vec::new();
        for _ in 0..20 {
            let mut next = a.expand(&mut scratch, &mut touched);
            next.inflate(1.6);
            next.prune(1e-14);
            next.normalize();
            a = next;
            for sum in a.column_sums() {
                assert!((sum - 1.0).abs() < 1e-10, "column sum {sum}");
            }
        }
    }

    fn assignment(p: f64, groups: &[&[u64]]) -> ClusterAssignment {
        let mut labeled: Vec<(usize, Vec<u64>)> = groups
            .iter()
            .map(|g| g.to_vec())
            .enumerate()
            .collect();
        labeled.sort_by_key(|(i, g)| (std::cmp::Reverse(g.len()), g.iter().min().copied(), *i));
        let mut labels = BTreeMap::new();
        let mut populations = Vec::new();
        for (label, (_, members)) in labeled.into_iter().enumerate() {
            populations.push(members.len());
            for id in members {
                labels.insert(id, label);
            }
        }
        ClusterAssignment { p, labels, populations }
    }

    #[test]
    fn consistency_of_identical_assignments_is_one() {
        let a = assignment(1.1, &[&[0, 1, 2], &[3, 4]]);
        let b = assignment(1.2, &[&[0, 1, 2], &[3, 4]]);
        let (raw, norm) = consistency_between(&a, &b).unwrap();
        assert_eq!(raw, 1.0);
        assert_eq!(norm, 1.0);
    }

    #[test]
    fn consistency_of_pure_splits_is_one() {
        let a = assignment(1.1, &[&[0, 1, 2, 3], &[4, 5, 6, 7]]);
        let b = assignment(1.2, &[&[0, 1], &[2, 3], &[4, 5, 6], &[7]]);
        let (_, norm) = consistency_between(&a, &b).unwrap();
        assert_eq!(norm, 1.0);
    }

    #[test]
    fn consistency_of_uniform_mixing_is_zero() {
        let a = assignment(1.1, &[&[0, 1, 2, 3], &[4, 5, 6, 7]]);
        let b = assignment(1.2, &[&[0, 1, 4, 5], &[2, 3, 6, 7]]);
        let (raw, norm) = consistency_between(&a, &b).unwrap();
        assert!((raw - 0.5).abs() < 1e-12);
        assert_eq!(norm, 0.0);
    }

    #[test]
    fn consistency_rejects_mismatched_node_sets() {
        let a = assignment(1.1, &[&[0, 1]]);
        let b = assignment(1.2, &[&[0, 2]]);
        assert!(consistency_between(&a, &b).is_err());
    }

    #[test]
    fn scan_requires_two_grid_points() {
        let net = two_cliques_with_bridge(4);
        assert!(consistency_scan(&net, &[1.5]).is_err());
        assert!(consistency_scan(&net, &[1.5, 1.4]).is_err());
    }

    #[test]
    fn choose_granularity_takes_last_consistent_point() {
        let curve = ConsistencyCurve {
            p_values: vec![1.1, 1.2, 1.3, 1.4, 1.5],
            c_raw: vec![1.0, 1.0, 1.0, 0.97, 0.9],
            c_values: vec![1.0, 1.0, 1.0, 0.95, 0.8],
            n_clusters: vec![1, 2, 3, 5, 8],
        };
        assert_eq!(choose_granularity(&curve), 1.3);
        let all_ones = ConsistencyCurve {
            p_values: vec![1.1, 1.2],
            c_raw: vec![1.0, 1.0],
            c_values: vec![1.0, 1.0],
            n_clusters: vec![1, 1],
        };
        assert_eq!(choose_granularity(&all_ones), 1.2);
    }

    #[test]
    fn report_ranks_clusters() {
        let a = assignment(1.3, &[&[0, 1, 2, 3, 4], &[5, 6], &[7]]);
        let rows = cluster_report(&a);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].population, 5);
        assert!((rows.iter().map(|r| r.fraction).sum::<f64>() - 1.0).abs() < 1e-12);
        let single = cluster_report(&assignment(1.1, &[&[0, 1]]));
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].fraction, 1.0);
    }
}
