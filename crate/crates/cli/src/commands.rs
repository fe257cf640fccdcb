use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use multiss_core::multiss::{self, NodeId, NodeShare, Shares, Thresholds, Topology};
use multiss_core::simnet::{Scenario, Simulation};
use multiss_core::Randomness;

use crate::files::{self, Manifest, ShareFile, FORMAT_VERSION, MANIFEST};
use crate::CliError;

pub fn deal(topology: &Path, secret: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let topology = files::read_topology(topology)?;
    let bytes = fs::read(secret).map_err(|e| CliError::input(format!("{}: {e}", secret.display())))?;
    let chunks = multiss::encode_secret(&bytes, topology.modulus())?;
    let shares = multiss::deal(&chunks, &topology, &mut Randomness::from_seed(seed))?;
    fs::create_dir_all(out).map_err(|e| CliError::input(format!("{}: {e}", out.display())))?;
    let mut written = 0;
    for share in shares.values().flatten() {
        let id = NodeId::new(share.network_id.clone(), share.node_index);
        files::write_json(&files::share_path(out, &id), &ShareFile::from_share(share, &topology))?;
        written += 1;
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        chunk_count: chunks.len(),
        epoch: 0,
        topology_digest: topology.digest(),
        stale: Vec::new(),
    };
    files::write_json(&out.join(MANIFEST), &manifest)?;
    println!("dealt {} byte(s) as {} chunk(s) to {written} node(s) in {}", bytes.len(), chunks.len(), out.display());
    Ok(())
}

/// Loads share files, skipping nodes the manifest lists as stale when they
/// are behind the manifest epoch.
fn load_shares(
    topology: &Topology,
    paths: &[PathBuf],
    manifest: Option<&Manifest>,
) -> Result<Vec<(PathBuf, NodeShare)>, CliError> {
    let stale: BTreeSet<&NodeId> = manifest.map(|m| m.stale.iter().collect()).unwrap_or_default();
    let mut out = Vec::new();
    for path in paths {
        let file: ShareFile = files::read_json(path)?;
        let share = file.to_share(topology)?;
        let id = NodeId::new(share.network_id.clone(), share.node_index);
        if let Some(m) = manifest {
            if stale.contains(&id) && share.epoch < m.epoch {
                eprintln!("skipping stale share {id} at epoch {}", share.epoch);
                continue;
            }
        }
        out.push((path.clone(), share));
    }
    Ok(out)
}

fn check_digest(topology: &Topology, manifest: Option<&Manifest>) -> Result<(), CliError> {
    match manifest {
        Some(m) if m.topology_digest != topology.digest() => {
            Err(CliError::input("share directory was dealt for a different topology"))
        }
        _ => Ok(()),
    }
}

fn group(shares: impl IntoIterator<Item = NodeShare>) -> Shares {
    let mut map = Shares::new();
    for s in shares {
        map.entry(s.network_id.clone()).or_default().push(s);
    }
    map
}

pub fn reconstruct(topology: &Path, shares: &[PathBuf], out: &Path) -> Result<(), CliError> {
    let topology = files::read_topology(topology)?;
    let mut paths = Vec::new();
    let mut manifest = None;
    for p in shares {
        if p.is_dir() {
            paths.extend(files::share_files_in(p)?);
            if manifest.is_none() {
                manifest = files::read_manifest(p)?;
            }
        } else {
            paths.push(p.clone());
        }
    }
    if paths.is_empty() {
        return Err(CliError::input("no share files given"));
    }
    check_digest(&topology, manifest.as_ref())?;
    let loaded = load_shares(&topology, &paths, manifest.as_ref())?;
    let count = loaded.len();
    let chunks = multiss::reconstruct(&group(loaded.into_iter().map(|(_, s)| s)), &topology)?;
    let secret = multiss::decode_secret(&chunks, topology.modulus())?;
    files::write_atomic(out, &secret)?;
    println!("recovered {} byte(s) from {count} share file(s) into {}", secret.len(), out.display());
    Ok(())
}

pub fn refresh(topology: &Path, dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let topology = files::read_topology(topology)?;
    let manifest = files::read_manifest(dir)?;
    check_digest(&topology, manifest.as_ref())?;
    let paths = files::share_files_in(dir)?;
    let loaded = load_shares(&topology, &paths, manifest.as_ref())?;
    if loaded.is_empty() {
        return Err(CliError::input(format!("no share files in {}", dir.display())));
    }
    let epochs: BTreeSet<u64> = loaded.iter().map(|(_, s)| s.epoch).collect();
    if epochs.len() > 1 {
        return Err(multiss_core::Error::EpochMismatch { found: epochs.into_iter().collect() }.into());
    }
    let epoch = *epochs.iter().next().unwrap();
    let counts: BTreeSet<usize> = loaded.iter().map(|(_, s)| s.values.len()).collect();
    if counts.len() > 1 {
        return Err(CliError::input("share files disagree on chunk_count"));
    }
    let chunk_count = *counts.iter().next().unwrap();

    let deltas = multiss::refresh(&topology, epoch, chunk_count, &mut Randomness::from_seed(seed))?;
    let mut by_node: BTreeMap<NodeId, _> = BTreeMap::new();
    for d in deltas.into_values().flatten() {
        by_node.insert(NodeId::new(d.network_id.clone(), d.node_index), d);
    }
    let mut present = BTreeSet::new();
    for (path, share) in &loaded {
        let id = NodeId::new(share.network_id.clone(), share.node_index);
        let delta = by_node.get(&id).ok_or_else(|| CliError::input(format!("share for unknown node {id}")))?;
        let next = multiss::apply_node_refresh(share, delta)?;
        files::write_json(path, &ShareFile::from_share(&next, &topology))?;
        present.insert(id);
    }
    let stale: Vec<NodeId> = topology.nodes().filter(|id| !present.contains(id)).collect();
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        chunk_count,
        epoch: epoch + 1,
        topology_digest: topology.digest(),
        stale: stale.clone(),
    };
    files::write_json(&dir.join(MANIFEST), &manifest)?;
    println!("refreshed {} share file(s) to epoch {}", present.len(), epoch + 1);
    for id in &stale {
        println!("stale: {id}");
    }
    Ok(())
}

fn line(label: &str, t: &Thresholds) -> String {
    format!(
        "{label:<7} t_networks={} t_nodes={} t_fail={} (t_f0={}, t_f1={})",
        t.t_networks, t.t_nodes, t.t_fail, t.t_f0, t.t_f1
    )
}

pub fn thresholds(topology: &Path, oracle: bool) -> Result<(), CliError> {
    let topology = files::read_topology(topology)?;
    let paper = multiss::compute_thresholds_paper(&topology);
    println!(
        "{} networks, {} nodes, outer degree {}",
        topology.network_count(),
        topology.total_nodes(),
        topology.outer_degree()
    );
    println!("{}", line("paper:", &paper));
    if !oracle {
        return Ok(());
    }
    let exact = multiss::compute_thresholds_oracle(&topology)?;
    println!("{}", line("oracle:", &exact));
    let pairs = [
        ("t_networks", paper.t_networks, exact.t_networks),
        ("t_nodes", paper.t_nodes, exact.t_nodes),
        ("t_fail", paper.t_fail, exact.t_fail),
        ("t_f0", paper.t_f0, exact.t_f0),
        ("t_f1", paper.t_f1, exact.t_f1),
    ];
    for (name, p, o) in pairs {
        if p != o {
            println!("DISCREPANCY {name}: paper formula {p}, exhaustive oracle {o}");
        }
    }
    Ok(())
}

pub fn report_path(scenario: &Path) -> PathBuf {
    let stem = scenario.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    scenario.with_file_name(format!("{stem}.report.json"))
}

pub fn simulate(scenario_path: &Path, seed: u64, state: Option<&Path>) -> Result<(), CliError> {
    let scenario = Scenario::parse(&files::read_to_string(scenario_path)?)?;
    let topology = scenario.topology.to_topology().map_err(|e| CliError::input(format!("topology: {e}")))?;
    let mut sim = match state {
        Some(path) if path.exists() => {
            let sim = Simulation::load_state(path)?;
            if sim.topology().digest() != topology.digest() {
                return Err(CliError::input("state file was written for a different topology"));
            }
            sim
        }
        _ => Simulation::new(topology, seed)?,
    };
    sim.apply(&scenario.events, &scenario.secret_bytes()?)?;
    let report = sim.report()?;
    if let Some(path) = state {
        files::write_atomic(path, &sim.to_bytes())?;
    }
    let out = report_path(scenario_path);
    let mut json = report.to_json().into_bytes();
    json.push(b'\n');
    files::write_atomic(&out, &json)?;
    print!("{}", report.summary());
    println!("report: {}", out.display());
    Ok(())
}
