//! Threshold analysis: closed-form values and an exhaustive oracle.
//!
//! With `T(poly) = degree + 1` the closed forms are
//!
//! ```text
//! t_networks = T(P)
//! t_nodes    = T(Q_0) + min { sum_{i in I} T(Q_i) : |I| = T(P) - 1 }
//! t_f0       = n_0 - T(Q_0) + 1
//! t_f1       = min { sum_{i in I} (n_i - T(Q_i) + 1) : |I| = l - T(P) }
//! t_fail     = min(t_f0, t_f1)
//! ```
//!
//! where `I` ranges over daughter subsets. The oracle instead enumerates
//! every node subset and asks the rank oracle whether it reconstructs.

use serde::{Deserialize, Serialize};

use super::access::{DealtStructure, Observation};
use super::{NodeId, Topology};
use crate::error::{Error, Result};
use crate::field::{PreparedRow, RowBasis};

/// Largest total node count the oracle will enumerate (`2^20` subsets).
pub const ORACLE_NODE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub t_networks: usize,
    pub t_nodes: usize,
    pub t_fail: usize,
    pub t_f0: usize,
    pub t_f1: usize,
}

/// Minimum of `sum(values[i])` over index subsets of exactly `size`
/// elements; the empty subset sums to zero. `None` if `size > len`.
fn min_subset_sum(values: &[usize], size: usize) -> Option<usize> {
    fn go(values: &[usize], size: usize, start: usize, acc: usize, best: &mut Option<usize>) {
        if size == 0 {
            *best = Some(best.map_or(acc, |b| b.min(acc)));
            return;
        }
        for i in start..=values.len().saturating_sub(size) {
            if i < values.len() {
                go(values, size - 1, i + 1, acc + values[i], best);
            }
        }
    }
    if size > values.len() {
        return None;
    }
    let mut best = None;
    go(values, size, 0, 0, &mut best);
    best
}

/// The closed-form thresholds, evaluated as written. When
/// `outer_degree = l - 1` the daughter failure set is empty and `t_f1`
/// (hence `t_fail`) comes out as 0.
pub fn compute_thresholds_paper(topology: &Topology) -> Thresholds {
    let t_p = topology.outer_degree() + 1;
    let l = topology.network_count();
    let mother = topology.mother();
    let daughters: Vec<_> = topology.daughters().map(|j| &topology.networks()[j]).collect();

    let quorums: Vec<usize> = daughters.iter().map(|d| d.quorum()).collect();
    let t_nodes = mother.quorum() + min_subset_sum(&quorums, t_p - 1).expect("outer degree <= l - 1");

    let t_f0 = mother.node_count - mother.quorum() + 1;
    let kill_costs: Vec<usize> = daughters.iter().map(|d| d.node_count - d.quorum() + 1).collect();
    let t_f1 = min_subset_sum(&kill_costs, l - t_p).expect("l - T(P) <= l - 1");

    Thresholds { t_networks: t_p, t_nodes, t_fail: t_f0.min(t_f1), t_f0, t_f1 }
}

/// Reconstruction verdict for every subset of the topology's nodes.
///
/// Node `i` (topology order) is bit `i` of a subset mask.
pub struct AccessStructure {
    nodes: Vec<NodeId>,
    network_of: Vec<usize>,
    mother_index: usize,
    network_count: usize,
    reconstructs: Vec<bool>,
}

/// Enumerates all `2^N` node subsets with the rank oracle.
///
/// Depth-first over nodes with an incremental row basis; once a prefix
/// already pins the secret every extension is marked without more algebra.
pub fn access_structure(topology: &Topology) -> Result<AccessStructure> {
    let n = topology.total_nodes();
    if n > ORACLE_NODE_LIMIT {
        return Err(Error::Capacity(format!(
            "oracle enumeration is limited to {ORACLE_NODE_LIMIT} nodes in total; topology has {n}"
        )));
    }
    let structure = DealtStructure::new(topology, 0);
    let nodes: Vec<NodeId> = topology.nodes().collect();
    let network_of: Vec<usize> = nodes.iter().map(|id| topology.network_index(&id.network).unwrap()).collect();
    let rows = nodes
        .iter()
        .zip(&network_of)
        .map(|(id, &network)| structure.row(&Observation::Share { network, node: id.index, epoch: 0 }))
        .collect::<Result<Vec<_>>>()?;

    let mut table = vec![false; 1usize << n];
    let mut basis = RowBasis::new(topology.modulus(), structure.columns());
    let secret = basis.prepare(&structure.secret_functional());
    let rows: Vec<PreparedRow> = rows.iter().map(|r| basis.prepare(r)).collect();
    enumerate(0, 0, &rows, &secret, &mut basis, false, &mut table);

    Ok(AccessStructure {
        nodes,
        network_of,
        mother_index: topology.mother_index(),
        network_count: topology.network_count(),
        reconstructs: table,
    })
}

fn enumerate(
    i: usize,
    mask: usize,
    rows: &[PreparedRow],
    secret: &PreparedRow,
    basis: &mut RowBasis,
    pinned: bool,
    table: &mut [bool],
) {
    let n = rows.len();
    if pinned {
        for rest in 0..(1usize << (n - i)) {
            table[mask | (rest << i)] = true;
        }
        return;
    }
    if i == n {
        return;
    }
    enumerate(i + 1, mask, rows, secret, basis, false, table);

    let len = basis.len();
    let pinned = basis.insert_prepared(&rows[i]) && basis.contains_prepared(secret);
    enumerate(i + 1, mask | (1 << i), rows, secret, basis, pinned, table);
    basis.truncate(len);
}

impl AccessStructure {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn reconstructs(&self, mask: usize) -> bool {
        self.reconstructs[mask]
    }

    pub fn mask_of(&self, ids: &[NodeId]) -> Option<usize> {
        ids.iter().try_fold(0usize, |m, id| self.nodes.iter().position(|n| n == id).map(|p| m | (1 << p)))
    }

    pub fn ids_of(&self, mask: usize) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.nodes[i].clone()).collect()
    }

    fn full(&self) -> usize {
        (1usize << self.nodes.len()) - 1
    }

    fn networks_touched(&self, mask: usize) -> usize {
        let mut seen = vec![false; self.network_count];
        for i in 0..self.nodes.len() {
            if mask >> i & 1 == 1 {
                seen[self.network_of[i]] = true;
            }
        }
        seen.iter().filter(|&&s| s).count()
    }

    fn mother_mask(&self) -> usize {
        (0..self.nodes.len()).filter(|&i| self.network_of[i] == self.mother_index).fold(0, |m, i| m | 1 << i)
    }

    /// Smallest set whose removal leaves no reconstructing subset, among
    /// subsets of `within`.
    fn min_blocking(&self, within: usize) -> Option<usize> {
        let full = self.full();
        (0..=full).filter(|&b| b & !within == 0 && !self.reconstructs[full ^ b]).min_by_key(|b| b.count_ones())
    }

    pub fn min_reconstructing_set(&self) -> Option<Vec<NodeId>> {
        (0..=self.full()).filter(|&m| self.reconstructs[m]).min_by_key(|m| m.count_ones()).map(|m| self.ids_of(m))
    }

    /// A blocking set of minimum size.
    pub fn fail_witness(&self) -> Option<Vec<NodeId>> {
        self.min_blocking(self.full()).map(|b| self.ids_of(b))
    }

    pub fn thresholds(&self) -> Thresholds {
        let full = self.full();
        let mut t_nodes = usize::MAX;
        let mut t_networks = usize::MAX;
        for m in (0..=full).filter(|&m| self.reconstructs[m]) {
            t_nodes = t_nodes.min(m.count_ones() as usize);
            t_networks = t_networks.min(self.networks_touched(m));
        }
        let size = |b: Option<usize>| b.map_or(usize::MAX, |b| b.count_ones() as usize);
        let mother = self.mother_mask();
        let t_fail = size(self.min_blocking(full));
        let t_f0 = size(self.min_blocking(mother));
        let t_f1 = size(self.min_blocking(full & !mother));
        Thresholds { t_networks, t_nodes, t_fail, t_f0, t_f1 }
    }
}

/// Thresholds by exhaustive subset enumeration (`N <= 20` nodes).
pub fn compute_thresholds_oracle(topology: &Topology) -> Result<Thresholds> {
    Ok(access_structure(topology)?.thresholds())
}
