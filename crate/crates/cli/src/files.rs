//! On-disk formats: one JSON share file per node plus a directory manifest.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use multiss_core::multiss::{NodeId, NodeShare, Topology, TopologyFile};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";
const SHARE_SUFFIX: &str = ".share.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShareFile {
    pub format_version: u32,
    pub modulus: String,
    pub network_id: String,
    pub node_index: u64,
    pub epoch: u64,
    pub chunk_count: usize,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub chunk_count: usize,
    pub epoch: u64,
    pub topology_digest: String,
    #[serde(default)]
    pub stale: Vec<NodeId>,
}

impl ShareFile {
    pub fn from_share(share: &NodeShare, topology: &Topology) -> Self {
        ShareFile {
            format_version: FORMAT_VERSION,
            modulus: topology.modulus().to_hex(),
            network_id: share.network_id.clone(),
            node_index: share.node_index,
            epoch: share.epoch,
            chunk_count: share.values.len(),
            values: share.values.iter().map(|v| v.to_hex()).collect(),
        }
    }

    pub fn to_share(&self, topology: &Topology) -> Result<NodeShare, CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::input(format!("unsupported share format_version {}", self.format_version)));
        }
        let m = topology.modulus();
        if multiss_core::Modulus::from_user_hex(&self.modulus).ok().as_ref() != Some(m) {
            return Err(CliError::input(format!(
                "share {}#{} uses modulus {}, topology uses {}",
                self.network_id,
                self.node_index,
                self.modulus,
                m.to_hex()
            )));
        }
        if self.values.len() != self.chunk_count {
            return Err(CliError::input(format!(
                "share {}#{} declares {} chunks but carries {}",
                self.network_id,
                self.node_index,
                self.chunk_count,
                self.values.len()
            )));
        }
        let values = self.values.iter().map(|v| m.parse_element(v)).collect::<Result<Vec<_>, _>>()?;
        Ok(NodeShare { network_id: self.network_id.clone(), node_index: self.node_index, epoch: self.epoch, values })
    }
}

pub fn share_path(dir: &Path, node: &NodeId) -> PathBuf {
    dir.join(format!("{}-{}{SHARE_SUFFIX}", node.network, node.index))
}

pub fn is_share_path(path: &Path) -> bool {
    path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(SHARE_SUFFIX))
}

/// Network ids end up in file names.
pub fn check_ids(topology: &Topology) -> Result<(), CliError> {
    for net in topology.networks() {
        if !net.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
            || net.id.starts_with('.')
        {
            return Err(CliError::input(format!(
                "network id {:?} must use only ASCII letters, digits, '-', '_' and '.'",
                net.id
            )));
        }
    }
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_topology(path: &Path) -> Result<Topology, CliError> {
    let file =
        TopologyFile::parse(&read_to_string(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let topology = file.to_topology().map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    check_ids(&topology)?;
    Ok(topology)
}

/// Writes next to the target and renames over it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let io = |e: std::io::Error| CliError::input(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn share_files_in(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    let mut out = BTreeSet::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?.path();
        if path.is_file() && is_share_path(&path) {
            out.insert(path);
        }
    }
    Ok(out.into_iter().collect())
}

pub fn read_manifest(dir: &Path) -> Result<Option<Manifest>, CliError> {
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Ok(None);
    }
    let m: Manifest = read_json(&path)?;
    if m.format_version != FORMAT_VERSION {
        return Err(CliError::input(format!("unsupported manifest format_version {}", m.format_version)));
    }
    Ok(Some(m))
}
