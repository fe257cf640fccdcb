//! JSON form of a [`Topology`].

use serde::{Deserialize, Serialize};

use super::{LinkKind, NetworkSpec, Topology};
use crate::error::{Error, Result};
use crate::field::Modulus;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    /// Prime modulus in hex; 2^127 - 1 when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<String>,
    pub outer_degree: usize,
    pub networks: Vec<NetworkEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkEntry {
    pub id: String,
    pub node_count: usize,
    pub inner_degree: usize,
    pub link: LinkKind,
    #[serde(default)]
    pub mother: bool,
}

impl TopologyFile {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Malformed(format!("topology: {e}")))
    }

    pub fn to_topology(&self) -> Result<Topology> {
        let modulus = match &self.modulus {
            Some(hex) => Modulus::from_user_hex(hex)?,
            None => Modulus::mersenne_127(),
        };
        let mothers: Vec<usize> = self.networks.iter().enumerate().filter(|(_, n)| n.mother).map(|(i, _)| i).collect();
        let [mother] = mothers[..] else {
            return Err(Error::invalid(format!("exactly one mother network required, found {}", mothers.len())));
        };
        let networks = self
            .networks
            .iter()
            .map(|n| NetworkSpec::new(n.id.clone(), n.node_count, n.inner_degree, n.link))
            .collect();
        Topology::new(modulus, networks, mother, self.outer_degree)
    }
}

impl From<&Topology> for TopologyFile {
    fn from(t: &Topology) -> Self {
        TopologyFile {
            modulus: Some(t.modulus().to_hex()),
            outer_degree: t.outer_degree(),
            networks: t
                .networks()
                .iter()
                .enumerate()
                .map(|(j, n)| NetworkEntry {
                    id: n.id.clone(),
                    node_count: n.node_count,
                    inner_degree: n.inner_degree,
                    link: n.link,
                    mother: j == t.mother_index(),
                })
                .collect(),
        }
    }
}
