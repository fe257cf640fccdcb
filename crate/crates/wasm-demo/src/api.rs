use multiss::multiss::{
    access_oracle, compute_thresholds_oracle, compute_thresholds_paper, NodeId, Thresholds, Topology, TopologyFile,
    Verdict, ORACLE_NODE_LIMIT,
};
use multiss::simnet::{run_scenario, Scenario, Selection, Simulation};
use serde::Serialize;

#[derive(Serialize)]
struct ThresholdView {
    networks: usize,
    nodes: usize,
    outer_degree: usize,
    closed_form: Thresholds,
    exhaustive: Option<Thresholds>,
    /// Why `exhaustive` is missing, if it is.
    note: Option<String>,
    differences: Vec<Difference>,
}

#[derive(Serialize)]
struct Difference {
    name: &'static str,
    closed_form: usize,
    exhaustive: usize,
}

#[derive(Serialize)]
struct SelectionView {
    verdict: Verdict,
    reconstructed: Option<String>,
    detail: String,
}

fn topology(json: &str) -> Result<Topology, String> {
    TopologyFile::parse(json).and_then(|f| f.to_topology()).map_err(|e| e.to_string())
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("view serializes")
}

pub fn thresholds(topology_json: &str) -> Result<String, String> {
    let t = topology(topology_json)?;
    let closed = compute_thresholds_paper(&t);
    let (exhaustive, note) = if t.total_nodes() > ORACLE_NODE_LIMIT {
        (None, Some(format!("exhaustive check skipped above {ORACLE_NODE_LIMIT} nodes")))
    } else {
        (Some(compute_thresholds_oracle(&t).map_err(|e| e.to_string())?), None)
    };
    let differences = exhaustive
        .map(|x| {
            [
                ("t_networks", closed.t_networks, x.t_networks),
                ("t_nodes", closed.t_nodes, x.t_nodes),
                ("t_fail", closed.t_fail, x.t_fail),
                ("t_f0", closed.t_f0, x.t_f0),
                ("t_f1", closed.t_f1, x.t_f1),
            ]
            .into_iter()
            .filter(|(_, a, b)| a != b)
            .map(|(name, closed_form, exhaustive)| Difference { name, closed_form, exhaustive })
            .collect()
        })
        .unwrap_or_default();
    Ok(to_json(&ThresholdView {
        networks: t.network_count(),
        nodes: t.total_nodes(),
        outer_degree: t.outer_degree(),
        closed_form: closed,
        exhaustive,
        note,
        differences,
    }))
}

pub fn evaluate_selection(topology_json: &str, nodes_json: &str, secret: &str) -> Result<String, String> {
    let t = topology(topology_json)?;
    let nodes: Vec<NodeId> = serde_json::from_str(nodes_json).map_err(|e| format!("nodes: {e}"))?;
    let verdict = access_oracle(&nodes, &t).map_err(|e| e.to_string())?;
    let mut sim = Simulation::new(t, 0).map_err(|e| e.to_string())?;
    sim.owner_store(secret.as_bytes()).map_err(|e| e.to_string())?;
    let view = match sim.owner_reconstruct(&Selection::Nodes(nodes)) {
        Ok(bytes) => SelectionView {
            verdict,
            reconstructed: Some(String::from_utf8_lossy(&bytes).into_owned()),
            detail: "selection reconstructs".into(),
        },
        Err(e) => SelectionView { verdict, reconstructed: None, detail: e.to_string() },
    };
    Ok(to_json(&view))
}

pub fn simulate(scenario_json: &str, seed: &str) -> Result<String, String> {
    let seed: u64 = seed.trim().parse().map_err(|_| format!("seed must be an unsigned integer, got {seed:?}"))?;
    let scenario = Scenario::parse(scenario_json).map_err(|e| e.to_string())?;
    run_scenario(&scenario, seed).map(|r| r.to_json()).map_err(|e| e.to_string())
}
