use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiss::{NodeId, TopologyFile, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    Owner,
    Adversary,
}

/// One step of a schedule. Time is the position in the event list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Deal,
    Refresh,
    CompromiseNetwork { network: String },
    CompromiseNode { network: String, node: u64 },
    FailNode { network: String, node: u64 },
    AttemptReconstruct { actor: Actor },
    HndlDecryptClassical,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub topology: TopologyFile,
    /// Secret as UTF-8 text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<String>,
    /// Secret as hex, for arbitrary bytes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret_hex: Option<String>,
    pub events: Vec<Event>,
}

impl Scenario {
    pub fn parse(json: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(json).map_err(|e| Error::Malformed(format!("scenario: {e}")))?;
        s.secret_bytes()?;
        Ok(s)
    }

    pub fn secret_bytes(&self) -> Result<Vec<u8>> {
        match (&self.secret, &self.secret_hex) {
            (Some(text), None) => Ok(text.as_bytes().to_vec()),
            (None, Some(h)) => hex::decode(h).map_err(|e| Error::Malformed(format!("secret_hex: {e}"))),
            (None, None) => Ok(Vec::new()),
            (Some(_), Some(_)) => Err(Error::Malformed("give either secret or secret_hex, not both".into())),
        }
    }
}

/// What an event did.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Dealt { generation: u64, chunks: usize, delivered: usize, recorded: usize, skipped: Vec<NodeId> },
    Refreshed { epoch: u64, delivered: usize, recorded: usize, stale: Vec<NodeId> },
    Compromised { nodes: Vec<NodeId>, captured: usize },
    Failed { node: NodeId },
    HndlDecrypted { transcripts: usize },
    AdversaryAttempt { verdict: Verdict, recovered_secret: bool },
    OwnerAttempt { available: bool, detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub index: usize,
    pub event: Event,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversarySummary {
    pub verdict: Verdict,
    pub recovered_secret: bool,
    pub captured_shares: usize,
    pub decrypted_transcripts: usize,
    pub hndl: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnerSummary {
    pub available: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub seed: u64,
    pub topology_digest: String,
    pub events: Vec<EventRecord>,
    pub adversary: AdversarySummary,
    pub owner: OwnerSummary,
}

impl ScenarioReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// A few lines for humans.
    pub fn summary(&self) -> String {
        let mut out = format!("topology {} seed {}\n", &self.topology_digest[..16], self.seed);
        for r in &self.events {
            let what = match &r.outcome {
                Outcome::Dealt { generation, chunks, delivered, recorded, skipped } => format!(
                    "dealt generation {generation}: {chunks} chunk(s), {delivered} deliveries, {recorded} recorded on classical links, {} skipped",
                    skipped.len()
                ),
                Outcome::Refreshed { epoch, delivered, recorded, stale } => format!(
                    "refreshed to epoch {epoch}: {delivered} deliveries, {recorded} recorded, {} stale",
                    stale.len()
                ),
                Outcome::Compromised { nodes, captured } => {
                    format!("compromised {} node(s), captured {captured} share(s)", nodes.len())
                }
                Outcome::Failed { node } => format!("node {node} failed"),
                Outcome::HndlDecrypted { transcripts } => format!("classical transcripts decrypted: {transcripts}"),
                Outcome::AdversaryAttempt { verdict, recovered_secret } => {
                    format!("adversary: {verdict:?}{}", if *recovered_secret { " (secret recovered)" } else { "" })
                }
                Outcome::OwnerAttempt { available, detail } => {
                    format!("owner: {} ({detail})", if *available { "available" } else { "unavailable" })
                }
            };
            out.push_str(&format!("[{:>3}] {what}\n", r.index));
        }
        out.push_str(&format!(
            "adversary verdict: {:?}; owner: {}\n",
            self.adversary.verdict,
            if self.owner.available { "available" } else { "unavailable" }
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_json_shape() {
        let events: Vec<Event> = serde_json::from_str(
            r#"[{"type": "deal"}, {"type": "compromise_node", "network": "tokyo", "node": 2},
                {"type": "attempt_reconstruct", "actor": "adversary"}, {"type": "hndl_decrypt_classical"}]"#,
        )
        .unwrap();
        assert_eq!(events[0], Event::Deal);
        assert_eq!(events[1], Event::CompromiseNode { network: "tokyo".into(), node: 2 });
        assert_eq!(events[2], Event::AttemptReconstruct { actor: Actor::Adversary });
        assert_eq!(events[3], Event::HndlDecryptClassical);
        assert!(serde_json::from_str::<Event>(r#"{"type": "explode"}"#).is_err());
    }

    #[test]
    fn secret_forms() {
        let topo = r#"{"outer_degree": 1, "networks": []}"#;
        let s = Scenario::parse(&format!(r#"{{"topology": {topo}, "secret_hex": "00ff", "events": []}}"#)).unwrap();
        assert_eq!(s.secret_bytes().unwrap(), vec![0, 255]);
        assert!(Scenario::parse(&format!(r#"{{"topology": {topo}, "secret_hex": "0g", "events": []}}"#)).is_err());
        assert!(Scenario::parse(&format!(
            r#"{{"topology": {topo}, "secret": "a", "secret_hex": "00", "events": []}}"#
        ))
        .is_err());
    }
}
