//! Binary state container: `MSS1`, a big-endian `u16` version, a `u64`
//! payload length, the canonical JSON payload, then the SHA-256 of the
//! payload.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AdversaryView, Capture, EventRecord, LinkModel, SimNode, Simulation};
use crate::error::{Error, Result};
use crate::field::{FieldElement, Modulus, Randomness};
use crate::multiss::{LinkKind, NodeShare, TopologyFile};

pub const STATE_MAGIC: &[u8; 4] = b"MSS1";
pub const STATE_VERSION: u16 = 1;

const HEADER: usize = 4 + 2 + 8;
const TRAILER: usize = 32;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRepr {
    topology: TopologyFile,
    seed: u64,
    word_pos: String,
    secret_digest: Option<String>,
    chunk_count: usize,
    rounds: Vec<u64>,
    hndl: bool,
    nodes: Vec<NodeRepr>,
    links: Vec<LinkRepr>,
    view_shares: Vec<CaptureRepr>,
    view_transcripts: Vec<CaptureRepr>,
    history: Vec<EventRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRepr {
    network: String,
    index: u64,
    alive: bool,
    compromised: bool,
    stale: bool,
    generation: u64,
    store: Option<StoreRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreRepr {
    epoch: u64,
    values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkRepr {
    kind: LinkKind,
    transcript: Vec<CaptureRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaptureRepr {
    capture: Capture,
    values: Vec<String>,
}

fn hexes(values: &[FieldElement]) -> Vec<String> {
    values.iter().map(FieldElement::to_hex).collect()
}

fn parse_all(m: &Modulus, values: &[String]) -> Result<Vec<FieldElement>> {
    values.iter().map(|v| m.parse_element(v)).collect()
}

fn captures<'a>(it: impl IntoIterator<Item = (&'a Capture, &'a Vec<FieldElement>)>) -> Vec<CaptureRepr> {
    it.into_iter().map(|(c, v)| CaptureRepr { capture: *c, values: hexes(v) }).collect()
}

impl Simulation {
    /// Serialized state; equal simulations give equal bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (seed, word_pos) = self.rng.position().expect("simulations are always seeded");
        let repr = StateRepr {
            topology: TopologyFile::from(&self.topology),
            seed,
            word_pos: word_pos.to_string(),
            secret_digest: self.secret_digest.clone(),
            chunk_count: self.chunk_count,
            rounds: self.rounds.clone(),
            hndl: self.hndl,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRepr {
                    network: n.network_id.clone(),
                    index: n.node_index,
                    alive: n.alive,
                    compromised: n.compromised,
                    stale: n.stale,
                    generation: n.generation,
                    store: n.store.as_ref().map(|s| StoreRepr { epoch: s.epoch, values: hexes(&s.values) }),
                })
                .collect(),
            links: self
                .links
                .iter()
                .map(|l| LinkRepr { kind: l.kind, transcript: captures(l.transcript.iter().map(|(c, v)| (c, v))) })
                .collect(),
            view_shares: captures(&self.view.shares),
            view_transcripts: captures(&self.view.transcripts),
            history: self.history.clone(),
        };
        let payload = serde_json::to_vec(&repr).expect("state serializes");
        let mut out = Vec::with_capacity(HEADER + payload.len() + TRAILER);
        out.extend_from_slice(STATE_MAGIC);
        out.extend_from_slice(&STATE_VERSION.to_be_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_be_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(&Sha256::digest(&payload));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER + TRAILER {
            return Err(Error::Corrupt(format!("state file truncated ({} bytes)", bytes.len())));
        }
        if &bytes[..4] != STATE_MAGIC {
            return Err(Error::Corrupt("not a state file (bad magic)".into()));
        }
        let version = u16::from_be_bytes([bytes[4], bytes[5]]);
        if version != STATE_VERSION {
            return Err(Error::Corrupt(format!("state version {version}, expected {STATE_VERSION}")));
        }
        let len = u64::from_be_bytes(bytes[6..14].try_into().unwrap());
        let expected = (HEADER + TRAILER) as u64 + len;
        if bytes.len() as u64 != expected {
            return Err(Error::Corrupt(format!("state file is {} bytes, header says {expected}", bytes.len())));
        }
        let payload = &bytes[HEADER..HEADER + len as usize];
        if Sha256::digest(payload).as_slice() != &bytes[HEADER + len as usize..] {
            return Err(Error::Corrupt("state checksum mismatch".into()));
        }
        let repr: StateRepr =
            serde_json::from_slice(payload).map_err(|e| Error::Corrupt(format!("state payload: {e}")))?;
        Self::from_repr(repr)
    }

    fn from_repr(r: StateRepr) -> Result<Self> {
        let bad = |msg: String| Error::Corrupt(msg);
        let topology = r.topology.to_topology()?;
        let word_pos: u128 = r.word_pos.parse().map_err(|_| bad(format!("word position {:?}", r.word_pos)))?;
        let mut sim = Simulation::new(topology, r.seed)?;
        let m = sim.topology.modulus().clone();
        sim.rng = Randomness::resume(r.seed, word_pos);
        sim.secret_digest = r.secret_digest;
        sim.chunk_count = r.chunk_count;
        sim.rounds = r.rounds;
        sim.hndl = r.hndl;
        sim.history = r.history;

        if r.nodes.len() != sim.nodes.len() {
            return Err(bad(format!("{} nodes stored, topology has {}", r.nodes.len(), sim.nodes.len())));
        }
        let generations = sim.rounds.len() as u64;
        for (slot, n) in r.nodes.into_iter().enumerate() {
            let node: &mut SimNode = &mut sim.nodes[slot];
            if n.network != node.network_id || n.index != node.node_index {
                return Err(bad(format!("node {}#{} out of topology order", n.network, n.index)));
            }
            if let Some(s) = &n.store {
                if n.generation >= generations || s.epoch > sim.rounds[n.generation as usize] {
                    return Err(bad(format!("node {}#{} holds an impossible epoch", n.network, n.index)));
                }
                if s.values.len() != sim.chunk_count {
                    return Err(bad(format!("node {}#{} chunk count", n.network, n.index)));
                }
            }
            node.alive = n.alive;
            node.compromised = n.compromised;
            node.stale = n.stale;
            node.generation = n.generation;
            node.store = n
                .store
                .map(|s| {
                    Ok::<_, Error>(NodeShare {
                        network_id: n.network.clone(),
                        node_index: n.index,
                        epoch: s.epoch,
                        values: parse_all(&m, &s.values)?,
                    })
                })
                .transpose()?;
        }

        if r.links.len() != sim.links.len() {
            return Err(bad("link count differs from topology".into()));
        }
        let restore = |list: Vec<CaptureRepr>| -> Result<Vec<(Capture, Vec<FieldElement>)>> {
            list.into_iter()
                .map(|c| {
                    if c.capture.generation >= generations {
                        return Err(Error::Corrupt("capture from an undealt generation".into()));
                    }
                    Ok((c.capture, parse_all(&m, &c.values)?))
                })
                .collect()
        };
        for (j, l) in r.links.into_iter().enumerate() {
            if l.kind != sim.links[j].kind {
                return Err(bad(format!("link {j} kind differs from topology")));
            }
            sim.links[j] = LinkModel { kind: l.kind, transcript: restore(l.transcript)? };
        }
        sim.view = AdversaryView {
            shares: restore(r.view_shares)?.into_iter().collect::<BTreeMap<_, _>>(),
            transcripts: restore(r.view_transcripts)?.into_iter().collect(),
        };
        sim.adversary_functionals()?;
        Ok(sim)
    }

    pub fn save_state(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn load_state(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}
