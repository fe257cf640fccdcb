use super::*;
use crate::multiss::{access_structure, NetworkEntry, TopologyFile};

const SECRET: &[u8] = b"archive key 0042";

fn entry(id: &str, n: usize, d: usize, mother: bool) -> NetworkEntry {
    NetworkEntry {
        id: id.into(),
        node_count: n,
        inner_degree: d,
        link: if mother { LinkKind::Its } else { LinkKind::Classical },
        mother,
    }
}

fn worked() -> TopologyFile {
    TopologyFile {
        modulus: None,
        outer_degree: 1,
        networks: vec![entry("mother", 3, 1, true), entry("daughter1", 3, 1, false), entry("daughter2", 3, 1, false)],
    }
}

fn scenario(topology: TopologyFile, events: Vec<Event>) -> Scenario {
    Scenario { topology, secret: Some(String::from_utf8(SECRET.to_vec()).unwrap()), secret_hex: None, events }
}

fn compromise(network: &str) -> Event {
    Event::CompromiseNetwork { network: network.into() }
}

fn node(network: &str, node: u64) -> Event {
    Event::CompromiseNode { network: network.into(), node }
}

fn fail(network: &str, node: u64) -> Event {
    Event::FailNode { network: network.into(), node }
}

const ADVERSARY: Event = Event::AttemptReconstruct { actor: Actor::Adversary };
const OWNER: Event = Event::AttemptReconstruct { actor: Actor::Owner };

fn verdict(topology: TopologyFile, events: Vec<Event>) -> ScenarioReport {
    run_scenario(&scenario(topology, events), 7).unwrap()
}

fn last_adversary(report: &ScenarioReport) -> (Verdict, bool) {
    report
        .events
        .iter()
        .rev()
        .find_map(|r| match r.outcome {
            Outcome::AdversaryAttempt { verdict, recovered_secret } => Some((verdict, recovered_secret)),
            _ => None,
        })
        .unwrap()
}

#[test]
fn whole_daughter_network_reveals_nothing() {
    let r = verdict(worked(), vec![Event::Deal, compromise("daughter1"), ADVERSARY]);
    assert_eq!(last_adversary(&r), (Verdict::NoInformation, false));
    assert_eq!(r.adversary.captured_shares, 3);
}

#[test]
fn harvested_transcripts_alone_reveal_nothing() {
    let r = verdict(worked(), vec![Event::Deal, Event::HndlDecryptClassical, ADVERSARY]);
    assert_eq!(last_adversary(&r), (Verdict::NoInformation, false));
    assert_eq!(r.adversary.decrypted_transcripts, 6);
}

#[test]
fn mother_alone_reveals_nothing() {
    let r = verdict(worked(), vec![Event::Deal, compromise("mother"), ADVERSARY]);
    assert_eq!(last_adversary(&r), (Verdict::NoInformation, false));
}

#[test]
fn harvest_plus_mother_recovers_the_secret() {
    let r = verdict(worked(), vec![Event::Deal, Event::HndlDecryptClassical, compromise("mother"), ADVERSARY]);
    assert_eq!(last_adversary(&r), (Verdict::Reconstructs, true));
    assert_eq!(r.adversary.verdict, Verdict::Reconstructs);
    assert!(r.adversary.recovered_secret);
    // the owner is unaffected by either adversary
    assert!(r.owner.available);
}

#[test]
fn harvest_switch_covers_later_traffic() {
    let r = verdict(
        worked(),
        vec![Event::HndlDecryptClassical, compromise("mother"), Event::Deal, Event::Refresh, ADVERSARY],
    );
    assert_eq!(last_adversary(&r), (Verdict::Reconstructs, true));
    assert_eq!(r.adversary.decrypted_transcripts, 12);
}

#[test]
fn delivery_log_shape() {
    let t = worked().to_topology().unwrap();
    let mut sim = Simulation::new(t, 1).unwrap();
    let log = sim.owner_store(SECRET).unwrap();
    assert_eq!(log.deliveries.len(), 9);
    assert_eq!(log.delivered(), 9);
    assert_eq!(log.recorded(), 6);
    assert!(sim.links()[0].transcript.is_empty());
    for link in &sim.links()[1..] {
        assert_eq!(link.transcript.len(), 3);
        // 16 bytes plus header in 15-byte blocks
        assert!(link.transcript.iter().all(|(_, v)| v.len() == 2));
    }
    assert_eq!(sim.owner_reconstruct(&Selection::Auto).unwrap(), SECRET);
}

#[test]
fn refresh_keeps_the_secret_and_flags_stale_nodes() {
    let t = worked().to_topology().unwrap();
    let mut sim = Simulation::new(t, 2).unwrap();
    sim.owner_store(SECRET).unwrap();
    sim.apply(&[fail("daughter1", 3)], SECRET).unwrap();
    let log = sim.owner_refresh().unwrap();
    assert_eq!(log.skipped(), vec![NodeId::new("daughter1", 3)]);
    assert!(sim.nodes()[5].stale);
    assert_eq!(sim.epoch(), Some(1));
    assert_eq!(sim.owner_reconstruct(&Selection::Auto).unwrap(), SECRET);
    sim.owner_refresh().unwrap();
    assert_eq!(sim.owner_reconstruct(&Selection::Auto).unwrap(), SECRET);
    assert!(sim.nodes().iter().all(|n| n.store.as_ref().unwrap().epoch == 2 || n.stale));
}

#[test]
fn refresh_separates_compromises_across_epochs() {
    let topo = TopologyFile {
        modulus: None,
        outer_degree: 1,
        networks: vec![entry("mother", 3, 2, true), entry("daughter1", 3, 1, false), entry("daughter2", 3, 1, false)],
    };
    let base =
        vec![Event::Deal, Event::HndlDecryptClassical, node("mother", 1), Event::Refresh, node("mother", 2), ADVERSARY];
    let r = verdict(topo.clone(), base.clone());
    assert_eq!(last_adversary(&r), (Verdict::NoInformation, false));

    let mut more = base;
    more.extend([node("mother", 3), ADVERSARY]);
    let r = verdict(topo, more);
    assert_eq!(last_adversary(&r), (Verdict::Reconstructs, true));
}

#[test]
fn redeal_keeps_generations_apart() {
    let events = vec![Event::Deal, node("mother", 1), Event::Deal, Event::HndlDecryptClassical, ADVERSARY];
    let r = verdict(worked(), events);
    assert_eq!(last_adversary(&r), (Verdict::NoInformation, false));
    assert_eq!(r.adversary.captured_shares, 2);
    assert!(r.owner.available);
}

#[test]
fn owner_blocked_by_oracle_witness() {
    let t = worked().to_topology().unwrap();
    let witness = access_structure(&t).unwrap().fail_witness().unwrap();
    let mut events = vec![Event::Deal];
    events.extend(witness.iter().map(|id| fail(&id.network, id.index)));
    events.push(OWNER);
    let r = verdict(worked(), events);
    assert!(!r.owner.available);
    assert!(matches!(&r.events.last().unwrap().outcome, Outcome::OwnerAttempt { available: false, .. }));
}

#[test]
fn explicit_selection() {
    let t = worked().to_topology().unwrap();
    let mut sim = Simulation::new(t, 3).unwrap();
    sim.owner_store(SECRET).unwrap();
    let pick = |ids: &[(&str, u64)]| Selection::Nodes(ids.iter().map(|&(n, i)| NodeId::new(n, i)).collect());
    let enough = pick(&[("mother", 1), ("mother", 3), ("daughter2", 2), ("daughter2", 3)]);
    assert_eq!(sim.owner_reconstruct(&enough).unwrap(), SECRET);
    let short = pick(&[("mother", 1), ("daughter2", 2), ("daughter2", 3)]);
    let Err(Error::Infeasible(report)) = sim.owner_reconstruct(&short) else { panic!() };
    assert!(!report.mother_met());
    assert!(sim.owner_reconstruct(&pick(&[("nowhere", 1)])).is_err());
}

#[test]
fn auto_prefers_cheap_daughters() {
    let topo = TopologyFile {
        modulus: None,
        outer_degree: 1,
        networks: vec![entry("mother", 2, 1, true), entry("big", 4, 3, false), entry("small", 2, 0, false)],
    };
    let mut sim = Simulation::new(topo.to_topology().unwrap(), 4).unwrap();
    sim.owner_store(SECRET).unwrap();
    let chosen: Vec<NodeId> = sim.auto_selection().into_iter().map(|s| sim.nodes()[s].id()).collect();
    assert_eq!(chosen, vec![NodeId::new("mother", 1), NodeId::new("mother", 2), NodeId::new("small", 1)]);
}

#[test]
fn deterministic_reports() {
    let s = scenario(worked(), vec![Event::Deal, Event::Refresh, node("daughter1", 2), OWNER, ADVERSARY]);
    let a = run_scenario(&s, 11).unwrap().to_json();
    let b = run_scenario(&s, 11).unwrap().to_json();
    assert_eq!(a, b);
    assert!(run_scenario(&s, 11).unwrap().summary().contains("adversary verdict: NoInformation"));
}

#[test]
fn malformed_schedules() {
    for events in [
        vec![Event::Refresh, Event::Deal],
        vec![Event::Deal, compromise("elsewhere")],
        vec![Event::Deal, node("mother", 4)],
        vec![fail("daughter2", 0)],
    ] {
        let err = run_scenario(&scenario(worked(), events.clone()), 0).unwrap_err();
        assert!(matches!(err, Error::Malformed(_)), "{events:?}: {err}");
    }
    let mut tiny = worked();
    tiny.modulus = Some("101".into());
    assert!(run_scenario(&scenario(tiny, vec![]), 0).is_err());
}

#[test]
fn state_round_trips() {
    let t = worked().to_topology().unwrap();
    let mut sim = Simulation::new(t, 5).unwrap();
    sim.apply(
        &[Event::Deal, Event::HndlDecryptClassical, node("mother", 2), fail("daughter1", 1), Event::Refresh],
        SECRET,
    )
    .unwrap();
    let bytes = sim.to_bytes();
    let again = Simulation::from_bytes(&bytes).unwrap();
    assert_eq!(again.to_bytes(), bytes);
    assert_eq!(again.view(), sim.view());
    assert_eq!(again.nodes(), sim.nodes());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.mss");
    sim.save_state(&path).unwrap();
    assert_eq!(Simulation::load_state(&path).unwrap().to_bytes(), bytes);
}

#[test]
fn state_rejects_damage() {
    let mut sim = Simulation::new(worked().to_topology().unwrap(), 5).unwrap();
    sim.owner_store(SECRET).unwrap();
    let bytes = sim.to_bytes();
    for cut in [0, 10, bytes.len() / 2, bytes.len() - 1] {
        assert!(matches!(Simulation::from_bytes(&bytes[..cut]), Err(Error::Corrupt(_))));
    }
    let mut versioned = bytes.clone();
    versioned[5] = 9;
    let err = Simulation::from_bytes(&versioned).err().unwrap();
    assert!(err.to_string().contains("version 9"));
    let mut flipped = bytes.clone();
    flipped[40] ^= 1;
    assert!(Simulation::from_bytes(&flipped).is_err());
    let mut magic = bytes;
    magic[0] = b'X';
    assert!(Simulation::from_bytes(&magic).is_err());
    assert!(matches!(Simulation::load_state(std::path::Path::new("/nonexistent/sim.mss")), Err(Error::Io(_))));
}

#[test]
fn continuation_matches_a_single_run() {
    let first = vec![Event::Deal, node("daughter2", 1), Event::Refresh];
    let second = vec![Event::HndlDecryptClassical, Event::Refresh, compromise("mother"), ADVERSARY, OWNER];
    let all: Vec<Event> = first.iter().chain(&second).cloned().collect();
    let whole = run_scenario(&scenario(worked(), all), 99).unwrap();

    let t = worked().to_topology().unwrap();
    let mut sim = Simulation::new(t, 99).unwrap();
    sim.apply(&first, SECRET).unwrap();
    let mut resumed = Simulation::from_bytes(&sim.to_bytes()).unwrap();
    resumed.apply(&second, SECRET).unwrap();
    assert_eq!(resumed.report().unwrap().to_json(), whole.to_json());
}

#[test]
fn small_modulus_simulation() {
    let mut topo = worked();
    topo.modulus = Some(format!("{:x}", (1u64 << 31) - 1));
    let r = verdict(topo, vec![Event::Deal, Event::HndlDecryptClassical, compromise("mother"), ADVERSARY]);
    assert_eq!(last_adversary(&r), (Verdict::Reconstructs, true));
    assert_eq!(r.topology_digest.len(), 64);
}
