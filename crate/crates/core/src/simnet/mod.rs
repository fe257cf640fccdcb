//! In-process simulation of the owner, the node stores, the links and the
//! two adversaries: one that compromises nodes (stickily) and one that
//! records classical traffic and later decrypts all of it.
//!
//! Runs are driven by a [`Scenario`] and are fully deterministic under a
//! seed. The adversary's verdict comes from the rank oracle over everything
//! it has captured; when the verdict is [`Verdict::Reconstructs`] the secret
//! is actually recovered from the captured values and checked.

mod scenario;
mod state;

pub use scenario::{Actor, AdversarySummary, Event, EventRecord, Outcome, OwnerSummary, Scenario, ScenarioReport};
pub use state::{STATE_MAGIC, STATE_VERSION};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{FieldElement, Matrix, Randomness};
use crate::multiss::{
    self, AdversaryFunctionals, DealtStructure, LinkKind, NodeId, NodeShare, Observation, Shares, Topology, Verdict,
};

/// A captured value: which dealing it belongs to and what it is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Capture {
    pub generation: u64,
    pub observation: Observation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimNode {
    pub network_id: String,
    pub node_index: u64,
    /// Dealing generation of `store`.
    pub generation: u64,
    pub store: Option<NodeShare>,
    pub alive: bool,
    pub compromised: bool,
    /// Missed a write of the current generation.
    pub stale: bool,
}

impl SimNode {
    pub fn id(&self) -> NodeId {
        NodeId::new(self.network_id.clone(), self.node_index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkModel {
    pub kind: LinkKind,
    pub transcript: Vec<(Capture, Vec<FieldElement>)>,
}

impl LinkModel {
    fn carry(&mut self, capture: Capture, values: &[FieldElement]) -> bool {
        match self.kind {
            LinkKind::Its => false,
            LinkKind::Classical => {
                self.transcript.push((capture, values.to_vec()));
                true
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdversaryView {
    pub shares: BTreeMap<Capture, Vec<FieldElement>>,
    pub transcripts: BTreeMap<Capture, Vec<FieldElement>>,
}

impl AdversaryView {
    pub fn len(&self) -> usize {
        self.shares.len() + self.transcripts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, other: &AdversaryView) -> bool {
        other.shares.keys().all(|k| self.shares.contains_key(k))
            && other.transcripts.keys().all(|k| self.transcripts.contains_key(k))
    }

    fn all(&self) -> BTreeMap<Capture, &Vec<FieldElement>> {
        self.shares.iter().chain(&self.transcripts).map(|(k, v)| (*k, v)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delivery {
    pub node: NodeId,
    pub link: LinkKind,
    pub delivered: bool,
    pub recorded: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeliveryLog {
    pub deliveries: Vec<Delivery>,
}

impl DeliveryLog {
    pub fn delivered(&self) -> usize {
        self.deliveries.iter().filter(|d| d.delivered).count()
    }

    pub fn recorded(&self) -> usize {
        self.deliveries.iter().filter(|d| d.recorded).count()
    }

    pub fn skipped(&self) -> Vec<NodeId> {
        self.deliveries.iter().filter(|d| !d.delivered).map(|d| d.node.clone()).collect()
    }
}

/// Which nodes the owner asks during reconstruction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection {
    /// The mother quorum plus the cheapest daughter quorums among live,
    /// up-to-date nodes.
    Auto,
    Nodes(Vec<NodeId>),
}

pub struct Simulation {
    topology: Topology,
    rng: Randomness,
    seed: u64,
    secret_digest: Option<String>,
    chunk_count: usize,
    /// Refresh rounds per dealing generation.
    rounds: Vec<u64>,
    nodes: Vec<SimNode>,
    links: Vec<LinkModel>,
    view: AdversaryView,
    hndl: bool,
    history: Vec<EventRecord>,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Simulation {
    pub fn new(topology: Topology, seed: u64) -> Result<Self> {
        multiss::block_size(topology.modulus())?;
        let nodes = topology
            .nodes()
            .map(|id| SimNode {
                network_id: id.network,
                node_index: id.index,
                generation: 0,
                store: None,
                alive: true,
                compromised: false,
                stale: false,
            })
            .collect();
        let links = topology.networks().iter().map(|n| LinkModel { kind: n.link, transcript: Vec::new() }).collect();
        Ok(Simulation {
            topology,
            rng: Randomness::seeded(seed),
            seed,
            secret_digest: None,
            chunk_count: 0,
            rounds: Vec::new(),
            nodes,
            links,
            view: AdversaryView::default(),
            hndl: false,
            history: Vec::new(),
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn nodes(&self) -> &[SimNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[LinkModel] {
        &self.links
    }

    pub fn view(&self) -> &AdversaryView {
        &self.view
    }

    pub fn history(&self) -> &[EventRecord] {
        &self.history
    }

    /// Refresh rounds applied to the current dealing, if any.
    pub fn epoch(&self) -> Option<u64> {
        self.rounds.last().copied()
    }

    fn generation(&self) -> Option<u64> {
        self.rounds.len().checked_sub(1).map(|g| g as u64)
    }

    fn node_slot(&self, network: &str, node: u64) -> Result<usize> {
        let j = self
            .topology
            .network_index(network)
            .ok_or_else(|| Error::Malformed(format!("unknown network {network:?}")))?;
        let count = self.topology.networks()[j].node_count as u64;
        if node < 1 || node > count {
            return Err(Error::Malformed(format!("node {node} out of range 1..={count} for {network}")));
        }
        let before: usize = self.topology.networks()[..j].iter().map(|n| n.node_count).sum();
        Ok(before + node as usize - 1)
    }

    fn network_of(&self, slot: usize) -> usize {
        self.topology.network_index(&self.nodes[slot].network_id).expect("node of a known network")
    }

    fn capture_store(&mut self, slot: usize) -> bool {
        let node = &self.nodes[slot];
        let Some(share) = &node.store else { return false };
        let capture = Capture {
            generation: node.generation,
            observation: Observation::Share {
                network: self.network_of(slot),
                node: node.node_index,
                epoch: share.epoch,
            },
        };
        let values = share.values.clone();
        self.view.shares.insert(capture, values).is_none()
    }

    fn send(&mut self, network: usize, capture: Capture, values: &[FieldElement]) -> bool {
        let recorded = self.links[network].carry(capture, values);
        if recorded && self.hndl {
            self.view.transcripts.insert(capture, values.to_vec());
        }
        recorded
    }

    /// Deals `secret` afresh and delivers every node share over its link.
    /// Dead nodes receive nothing and keep whatever they held, marked stale.
    pub fn owner_store(&mut self, secret: &[u8]) -> Result<DeliveryLog> {
        let m = self.topology.modulus().clone();
        let chunks = multiss::encode_secret(secret, &m)?;
        let mut shares = multiss::deal(&chunks, &self.topology, &mut self.rng)?;
        let generation = self.rounds.len() as u64;
        self.rounds.push(0);
        self.chunk_count = chunks.len();
        self.secret_digest = Some(digest(secret));

        let mut log = DeliveryLog::default();
        for slot in 0..self.nodes.len() {
            let network = self.network_of(slot);
            let node = &self.nodes[slot];
            let id = node.id();
            let link = self.links[network].kind;
            if !node.alive {
                self.nodes[slot].stale = true;
                log.deliveries.push(Delivery { node: id, link, delivered: false, recorded: false });
                continue;
            }
            let list = shares.get_mut(&id.network).expect("dealt network");
            let share = std::mem::replace(&mut list[id.index as usize - 1], placeholder());
            let capture = Capture { generation, observation: Observation::Share { network, node: id.index, epoch: 0 } };
            let recorded = self.send(network, capture, &share.values);
            let node = &mut self.nodes[slot];
            node.store = Some(share);
            node.generation = generation;
            node.stale = false;
            if node.compromised {
                self.capture_store(slot);
            }
            log.deliveries.push(Delivery { node: id, link, delivered: true, recorded });
        }
        Ok(log)
    }

    /// One refresh round for the current dealing. Nodes that are dead or
    /// already behind are skipped and flagged stale.
    pub fn owner_refresh(&mut self) -> Result<DeliveryLog> {
        let generation = self.generation().ok_or_else(|| Error::Malformed("refresh before any deal".into()))?;
        let epoch = self.rounds[generation as usize];
        let mut deltas = multiss::refresh(&self.topology, epoch, self.chunk_count, &mut self.rng)?;
        self.rounds[generation as usize] += 1;

        let mut log = DeliveryLog::default();
        for slot in 0..self.nodes.len() {
            let network = self.network_of(slot);
            let node = &self.nodes[slot];
            let id = node.id();
            let link = self.links[network].kind;
            let current =
                node.alive && node.generation == generation && node.store.as_ref().is_some_and(|s| s.epoch == epoch);
            if !current {
                self.nodes[slot].stale = true;
                log.deliveries.push(Delivery { node: id, link, delivered: false, recorded: false });
                continue;
            }
            let delta = std::mem::replace(
                &mut deltas.get_mut(&id.network).expect("refreshed network")[id.index as usize - 1],
                multiss::NodeDelta { network_id: String::new(), node_index: 0, from_epoch: 0, values: Vec::new() },
            );
            let capture =
                Capture { generation, observation: Observation::Delta { network, node: id.index, round: epoch } };
            let recorded = self.send(network, capture, &delta.values);
            let node = &mut self.nodes[slot];
            let updated = multiss::apply_node_refresh(node.store.as_ref().expect("checked above"), &delta)?;
            node.store = Some(updated);
            if node.compromised {
                self.view.shares.insert(capture, delta.values);
                self.capture_store(slot);
            }
            log.deliveries.push(Delivery { node: id, link, delivered: true, recorded });
        }
        Ok(log)
    }

    fn usable(&self, slot: usize) -> bool {
        let node = &self.nodes[slot];
        node.alive
            && self.generation() == Some(node.generation)
            && node.store.as_ref().is_some_and(|s| Some(s.epoch) == self.epoch())
    }

    /// Collects shares from the selected nodes (live, current ones only)
    /// and reconstructs. A shortfall comes back as [`Error::Infeasible`].
    pub fn owner_reconstruct(&self, selection: &Selection) -> Result<Vec<u8>> {
        if self.generation().is_none() {
            return Err(Error::invalid("nothing has been dealt"));
        }
        let slots: Vec<usize> = match selection {
            Selection::Auto => self.auto_selection(),
            Selection::Nodes(ids) => {
                ids.iter().map(|id| self.node_slot(&id.network, id.index)).collect::<Result<Vec<_>>>()?
            }
        };
        let mut shares = Shares::new();
        for slot in slots {
            if !self.usable(slot) {
                continue;
            }
            let share = self.nodes[slot].store.clone().expect("usable nodes hold a share");
            let list: &mut Vec<NodeShare> = shares.entry(share.network_id.clone()).or_default();
            if !list.iter().any(|s| s.node_index == share.node_index) {
                list.push(share);
            }
        }
        let chunks = multiss::reconstruct(&shares, &self.topology)?;
        multiss::decode_secret(&chunks, self.topology.modulus())
    }

    fn auto_selection(&self) -> Vec<usize> {
        let mut per_network: Vec<Vec<usize>> = vec![Vec::new(); self.topology.network_count()];
        for slot in 0..self.nodes.len() {
            if self.usable(slot) {
                per_network[self.network_of(slot)].push(slot);
            }
        }
        let quorum = |j: usize| self.topology.networks()[j].quorum();
        let mother = self.topology.mother_index();
        let mut chosen: Vec<usize> = per_network[mother].iter().take(quorum(mother)).copied().collect();
        let mut daughters: Vec<usize> =
            self.topology.daughters().filter(|&j| per_network[j].len() >= quorum(j)).collect();
        daughters.sort_by_key(|&j| (quorum(j), j));
        for j in daughters.into_iter().take(self.topology.outer_degree()) {
            chosen.extend(per_network[j].iter().take(quorum(j)));
        }
        chosen
    }

    fn owner_attempt(&self) -> (bool, String) {
        match self.owner_reconstruct(&Selection::Auto) {
            Ok(bytes) if Some(digest(&bytes)) == self.secret_digest => (true, "secret recovered".into()),
            Ok(_) => (false, "recovered bytes differ from the stored secret".into()),
            Err(Error::Infeasible(report)) => (false, report.to_string()),
            Err(e) => (false, e.to_string()),
        }
    }

    /// The adversary's functionals over every dealing so far: each
    /// generation gets its own block of randomness columns, all sharing the
    /// secret column.
    fn adversary_functionals(&self) -> Result<(AdversaryFunctionals, Vec<Vec<FieldElement>>)> {
        let structures: Vec<DealtStructure> =
            self.rounds.iter().map(|&r| DealtStructure::new(&self.topology, r)).collect();
        let mut offsets = vec![1usize];
        for s in &structures {
            offsets.push(offsets.last().unwrap() + s.columns() - 1);
        }
        let cols = *offsets.last().unwrap();
        let m = self.topology.modulus();
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for (capture, vals) in self.view.all() {
            let g = capture.generation as usize;
            let local = structures
                .get(g)
                .ok_or_else(|| Error::Corrupt(format!("capture from undealt generation {g}")))?
                .row(&capture.observation)?;
            let mut row = vec![m.zero(); cols];
            row[DealtStructure::SECRET_COLUMN] = local[DealtStructure::SECRET_COLUMN].clone();
            for (c, v) in local.into_iter().enumerate().skip(1) {
                row[offsets[g] + c - 1] = v;
            }
            rows.push(row);
            values.push(vals.clone());
        }
        let matrix = Matrix::from_rows(m, cols, rows)?;
        Ok((AdversaryFunctionals { matrix, secret_coordinate: DealtStructure::SECRET_COLUMN }, values))
    }

    /// Verdict over the current view, and whether the secret was actually
    /// recovered from the captured values.
    pub fn adversary_attempt(&self) -> Result<(Verdict, bool)> {
        if self.view.is_empty() {
            return Ok((Verdict::NoInformation, false));
        }
        let (f, values) = self.adversary_functionals()?;
        let Some(weights) = f.recovery_weights() else {
            return Ok((Verdict::NoInformation, false));
        };
        let m = self.topology.modulus();
        let chunks: Vec<FieldElement> = (0..self.chunk_count)
            .map(|c| weights.iter().zip(&values).fold(m.zero(), |acc, (w, v)| &acc + &(w * &v[c])))
            .collect();
        let recovered = multiss::decode_secret(&chunks, m).is_ok_and(|b| Some(digest(&b)) == self.secret_digest);
        Ok((Verdict::Reconstructs, recovered))
    }

    fn compromise(&mut self, slots: Vec<usize>) -> Outcome {
        let mut captured = 0;
        let mut nodes = Vec::new();
        for slot in slots {
            self.nodes[slot].compromised = true;
            nodes.push(self.nodes[slot].id());
            captured += usize::from(self.capture_store(slot));
        }
        Outcome::Compromised { nodes, captured }
    }

    fn check(&self, events: &[Event]) -> Result<()> {
        let mut dealt = self.generation().is_some();
        for (i, e) in events.iter().enumerate() {
            let at = |err: Error| Error::Malformed(format!("event {i}: {err}"));
            match e {
                Event::Deal => dealt = true,
                Event::Refresh if !dealt => {
                    return Err(Error::Malformed(format!("event {i}: refresh before any deal")))
                }
                Event::CompromiseNetwork { network } => {
                    self.topology
                        .network_index(network)
                        .ok_or_else(|| at(Error::invalid(format!("unknown network {network:?}"))))?;
                }
                Event::CompromiseNode { network, node } | Event::FailNode { network, node } => {
                    self.node_slot(network, *node).map_err(at)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Applies `events` in order, after checking the whole schedule.
    pub fn apply(&mut self, events: &[Event], secret: &[u8]) -> Result<()> {
        self.check(events)?;
        for event in events {
            let outcome = match event {
                Event::Deal => {
                    let log = self.owner_store(secret)?;
                    Outcome::Dealt {
                        generation: self.generation().expect("just dealt"),
                        chunks: self.chunk_count,
                        delivered: log.delivered(),
                        recorded: log.recorded(),
                        skipped: log.skipped(),
                    }
                }
                Event::Refresh => {
                    let log = self.owner_refresh()?;
                    Outcome::Refreshed {
                        epoch: self.epoch().expect("refreshed"),
                        delivered: log.delivered(),
                        recorded: log.recorded(),
                        stale: log.skipped(),
                    }
                }
                Event::CompromiseNetwork { network } => {
                    let slots = (0..self.nodes.len()).filter(|&s| &self.nodes[s].network_id == network).collect();
                    self.compromise(slots)
                }
                Event::CompromiseNode { network, node } => {
                    let slot = self.node_slot(network, *node)?;
                    self.compromise(vec![slot])
                }
                Event::FailNode { network, node } => {
                    let slot = self.node_slot(network, *node)?;
                    self.nodes[slot].alive = false;
                    Outcome::Failed { node: self.nodes[slot].id() }
                }
                Event::HndlDecryptClassical => {
                    self.hndl = true;
                    for link in &self.links {
                        for (c, v) in &link.transcript {
                            self.view.transcripts.insert(*c, v.clone());
                        }
                    }
                    Outcome::HndlDecrypted { transcripts: self.view.transcripts.len() }
                }
                Event::AttemptReconstruct { actor: Actor::Adversary } => {
                    let (verdict, recovered_secret) = self.adversary_attempt()?;
                    Outcome::AdversaryAttempt { verdict, recovered_secret }
                }
                Event::AttemptReconstruct { actor: Actor::Owner } => {
                    let (available, detail) = if self.generation().is_some() {
                        self.owner_attempt()
                    } else {
                        (false, "nothing dealt".into())
                    };
                    Outcome::OwnerAttempt { available, detail }
                }
            };
            self.history.push(EventRecord { index: self.history.len(), event: event.clone(), outcome });
        }
        Ok(())
    }

    /// Report over the whole history of this simulation.
    pub fn report(&self) -> Result<ScenarioReport> {
        let (verdict, recovered_secret) = self.adversary_attempt()?;
        let (available, detail) =
            if self.generation().is_some() { self.owner_attempt() } else { (false, "nothing dealt".into()) };
        Ok(ScenarioReport {
            seed: self.seed,
            topology_digest: self.topology.digest(),
            events: self.history.clone(),
            adversary: AdversarySummary {
                verdict,
                recovered_secret,
                captured_shares: self.view.shares.len(),
                decrypted_transcripts: self.view.transcripts.len(),
                hndl: self.hndl,
            },
            owner: OwnerSummary { available, detail },
        })
    }
}

fn placeholder() -> NodeShare {
    NodeShare { network_id: String::new(), node_index: 0, epoch: 0, values: Vec::new() }
}

/// Runs a scenario from scratch.
pub fn run_scenario(scenario: &Scenario, seed: u64) -> Result<ScenarioReport> {
    let topology = scenario.topology.to_topology().map_err(|e| Error::Malformed(format!("topology: {e}")))?;
    let mut sim = Simulation::new(topology, seed)?;
    sim.apply(&scenario.events, &scenario.secret_bytes()?)?;
    sim.report()
}

#[cfg(test)]
mod tests;
