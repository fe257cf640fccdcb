//! The multi-network protocol.
//!
//! An outer polynomial `P` of degree `outer_degree` carries the secret as
//! `P(0)`. The mother network's inner polynomial has constant term `P(1)`;
//! daughter `i` (1-based, topology order) gets `P'(i)`. Each network shares
//! its constant term with its own inner Shamir polynomial, node `j` holding
//! `Q(j)`. Everything is done per chunk of the encoded secret, with fresh
//! polynomials for every chunk.

mod access;
mod codec;
mod deal;
mod file;
mod thresholds;

pub use access::{
    access_oracle, access_oracle_observations, functionals, AdversaryFunctionals, DealtStructure, Observation, Verdict,
};
pub use codec::{block_size, decode_secret, encode_secret};
pub use deal::{
    apply_node_refresh, deal, deal_with, reconstruct, refresh, ChunkPolynomials, InfeasibleReport, NodeDelta,
    NodeShare, Shares,
};
pub use file::{NetworkEntry, TopologyFile};
pub use thresholds::{
    access_structure, compute_thresholds_oracle, compute_thresholds_paper, AccessStructure, Thresholds,
    ORACLE_NODE_LIMIT,
};

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, Modulus};

/// How the owner reaches a network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    /// QKD key plus one-time pad: transcripts carry no information.
    Its,
    /// Classical cryptography: transcripts are recorded and may be broken later.
    Classical,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub id: String,
    pub node_count: usize,
    pub inner_degree: usize,
    pub link: LinkKind,
}

impl NetworkSpec {
    pub fn new(id: impl Into<String>, node_count: usize, inner_degree: usize, link: LinkKind) -> Self {
        NetworkSpec { id: id.into(), node_count, inner_degree, link }
    }

    /// Shares needed inside this network: `inner_degree + 1`.
    pub fn quorum(&self) -> usize {
        self.inner_degree + 1
    }
}

/// Role of a network in the outer sharing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// Holds `P(1)`.
    Mother,
    /// Holds `P'(point)`.
    Daughter { point: u64 },
}

/// A node address: network id plus 1-based node index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub network: String,
    pub index: u64,
}

impl NodeId {
    pub fn new(network: impl Into<String>, index: u64) -> Self {
        NodeId { network: network.into(), index }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.network, self.index)
    }
}

/// Validated multi-network layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    modulus: Modulus,
    networks: Vec<NetworkSpec>,
    mother_index: usize,
    outer_degree: usize,
}

impl Topology {
    pub fn new(modulus: Modulus, networks: Vec<NetworkSpec>, mother_index: usize, outer_degree: usize) -> Result<Self> {
        let l = networks.len();
        if l < 2 {
            return Err(Error::invalid(format!("need at least two networks, got {l}")));
        }
        if mother_index >= l {
            return Err(Error::invalid("mother index out of range"));
        }
        if outer_degree < 1 || outer_degree > l - 1 {
            return Err(Error::invalid(format!(
                "outer degree {outer_degree} must lie in 1..={} for {l} networks",
                l - 1
            )));
        }
        let q = modulus.as_usize();
        let mut ids = HashSet::new();
        for (j, net) in networks.iter().enumerate() {
            if net.id.is_empty() || !ids.insert(net.id.as_str()) {
                return Err(Error::invalid(format!("network id {:?} is empty or repeated", net.id)));
            }
            if net.node_count < 1 || net.inner_degree + 1 > net.node_count {
                return Err(Error::invalid(format!(
                    "network {}: {} nodes cannot carry inner degree {}",
                    net.id, net.node_count, net.inner_degree
                )));
            }
            if q.is_some_and(|q| net.node_count >= q) {
                return Err(Error::invalid(format!("network {}: node count must be below the modulus", net.id)));
            }
            let expected = if j == mother_index { LinkKind::Its } else { LinkKind::Classical };
            if net.link != expected {
                return Err(Error::invalid(format!(
                    "network {}: {} link expected",
                    net.id,
                    if expected == LinkKind::Its { "an ITS" } else { "a classical" }
                )));
            }
        }
        if q.is_some_and(|q| l > q) {
            return Err(Error::invalid("too many networks for the modulus"));
        }
        Ok(Topology { modulus, networks, mother_index, outer_degree })
    }

    /// `l` networks with identical node count and inner degree; network 0 is
    /// the mother (`"mother"`), the rest `"daughter1"`, `"daughter2"`, ...
    pub fn uniform(
        modulus: Modulus,
        l: usize,
        node_count: usize,
        inner_degree: usize,
        outer_degree: usize,
    ) -> Result<Self> {
        Self::from_parts(modulus, &vec![(node_count, inner_degree); l], outer_degree)
    }

    /// Network 0 is the mother; `parts[j] = (node_count, inner_degree)`.
    pub fn from_parts(modulus: Modulus, parts: &[(usize, usize)], outer_degree: usize) -> Result<Self> {
        let networks = parts
            .iter()
            .enumerate()
            .map(|(j, &(n, d))| {
                if j == 0 {
                    NetworkSpec::new("mother", n, d, LinkKind::Its)
                } else {
                    NetworkSpec::new(format!("daughter{j}"), n, d, LinkKind::Classical)
                }
            })
            .collect();
        Self::new(modulus, networks, 0, outer_degree)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn networks(&self) -> &[NetworkSpec] {
        &self.networks
    }

    pub fn mother_index(&self) -> usize {
        self.mother_index
    }

    pub fn mother(&self) -> &NetworkSpec {
        &self.networks[self.mother_index]
    }

    pub fn outer_degree(&self) -> usize {
        self.outer_degree
    }

    pub fn network_count(&self) -> usize {
        self.networks.len()
    }

    pub fn total_nodes(&self) -> usize {
        self.networks.iter().map(|n| n.node_count).sum()
    }

    pub fn network_index(&self, id: &str) -> Option<usize> {
        self.networks.iter().position(|n| n.id == id)
    }

    /// Daughters get derivative points `1..=l-1` in topology order.
    pub fn role(&self, network: usize) -> Role {
        if network == self.mother_index {
            Role::Mother
        } else {
            let point = if network < self.mother_index { network + 1 } else { network } as u64;
            Role::Daughter { point }
        }
    }

    /// Indices of daughter networks in topology order.
    pub fn daughters(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.networks.len()).filter(move |&j| j != self.mother_index)
    }

    /// Every node address in topology order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.networks.iter().flat_map(|net| (1..=net.node_count as u64).map(move |i| NodeId::new(net.id.clone(), i)))
    }

    /// The value network `network` shares internally: `P(1)` or `P'(i)`.
    pub fn inner_secret(&self, network: usize, outer: &crate::poly::Polynomial) -> FieldElement {
        match self.role(network) {
            Role::Mother => outer.eval_at(1),
            Role::Daughter { point } => outer.derivative().eval_at(point),
        }
    }

    /// Stable SHA-256 digest of the canonical topology description.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.modulus.to_hex().as_bytes());
        h.update([0]);
        h.update((self.outer_degree as u64).to_be_bytes());
        h.update((self.mother_index as u64).to_be_bytes());
        for n in &self.networks {
            h.update(n.id.as_bytes());
            h.update([0]);
            h.update((n.node_count as u64).to_be_bytes());
            h.update((n.inner_degree as u64).to_be_bytes());
            h.update([n.link as u8]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
