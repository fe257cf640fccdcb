use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{Role, Topology};
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::poly::{birkhoff_solve, lagrange_weights_at_zero, BirkhoffConstraint, Polynomial};
use crate::sss::{apply_refresh, refresh_deltas, FlatShare, RefreshDelta};

/// What one node stores: its inner-share value for every chunk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeShare {
    pub network_id: String,
    pub node_index: u64,
    pub epoch: u64,
    pub values: Vec<FieldElement>,
}

/// One node's refresh message, one delta per chunk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeDelta {
    pub network_id: String,
    pub node_index: u64,
    pub from_epoch: u64,
    pub values: Vec<FieldElement>,
}

/// Node shares keyed by network id.
pub type Shares = BTreeMap<String, Vec<NodeShare>>;

/// The dealer's polynomials for one chunk: outer `P` and one inner
/// polynomial per network, in topology order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChunkPolynomials {
    pub outer: Polynomial,
    pub inner: Vec<Polynomial>,
}

impl ChunkPolynomials {
    pub fn sample<R: RngCore + ?Sized>(topology: &Topology, chunk: &FieldElement, rng: &mut R) -> Self {
        let outer = Polynomial::random(topology.outer_degree(), chunk, rng);
        let inner = topology
            .networks()
            .iter()
            .enumerate()
            .map(|(j, net)| Polynomial::random(net.inner_degree, &topology.inner_secret(j, &outer), rng))
            .collect();
        ChunkPolynomials { outer, inner }
    }

    fn check(&self, topology: &Topology) -> Result<()> {
        if self.outer.modulus() != topology.modulus() {
            return Err(Error::ModulusMismatch);
        }
        if self.outer.degree() > topology.outer_degree() {
            return Err(Error::invalid("outer polynomial exceeds the outer degree"));
        }
        if self.inner.len() != topology.network_count() {
            return Err(Error::invalid("one inner polynomial per network is required"));
        }
        for (j, (q, net)) in self.inner.iter().zip(topology.networks()).enumerate() {
            if q.modulus() != topology.modulus() {
                return Err(Error::ModulusMismatch);
            }
            if q.degree() > net.inner_degree {
                return Err(Error::invalid(format!("inner polynomial of {} exceeds its degree", net.id)));
            }
            if q.constant_term() != &topology.inner_secret(j, &self.outer) {
                return Err(Error::invalid(format!("inner polynomial of {} has the wrong constant term", net.id)));
            }
        }
        Ok(())
    }
}

struct Dealing<'a> {
    topology: &'a Topology,
    per_network: Vec<Vec<NodeShare>>,
}

impl<'a> Dealing<'a> {
    fn new(topology: &'a Topology, chunks: usize) -> Self {
        let per_network = topology
            .networks()
            .iter()
            .map(|net| {
                (1..=net.node_count as u64)
                    .map(|i| NodeShare {
                        network_id: net.id.clone(),
                        node_index: i,
                        epoch: 0,
                        values: Vec::with_capacity(chunks),
                    })
                    .collect()
            })
            .collect();
        Dealing { topology, per_network }
    }

    fn push(&mut self, polys: &ChunkPolynomials) {
        for (q, nodes) in polys.inner.iter().zip(&mut self.per_network) {
            for node in nodes.iter_mut() {
                node.values.push(q.eval_at(node.node_index));
            }
        }
    }

    fn finish(self) -> Shares {
        self.topology.networks().iter().map(|n| n.id.clone()).zip(self.per_network).collect()
    }
}

/// Two-level dealing of every chunk with fresh polynomials.
pub fn deal<R: RngCore + ?Sized>(chunks: &[FieldElement], topology: &Topology, rng: &mut R) -> Result<Shares> {
    let mut dealing = Dealing::new(topology, chunks.len());
    for chunk in chunks {
        if chunk.modulus() != topology.modulus() {
            return Err(Error::ModulusMismatch);
        }
        dealing.push(&ChunkPolynomials::sample(topology, chunk, rng));
    }
    Ok(dealing.finish())
}

/// Dealing from explicitly chosen polynomials, one set per chunk.
pub fn deal_with(topology: &Topology, polys: &[ChunkPolynomials]) -> Result<Shares> {
    let mut dealing = Dealing::new(topology, polys.len());
    for p in polys {
        p.check(topology)?;
        dealing.push(p);
    }
    Ok(dealing.finish())
}

/// Why a share set cannot reconstruct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfeasibleReport {
    pub mother_nodes: usize,
    pub mother_quorum: usize,
    pub daughters_recovered: usize,
    pub daughters_needed: usize,
}

impl InfeasibleReport {
    pub fn mother_met(&self) -> bool {
        self.mother_nodes >= self.mother_quorum
    }

    pub fn daughters_met(&self) -> bool {
        self.daughters_recovered >= self.daughters_needed
    }
}

impl fmt::Display for InfeasibleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.mother_met() {
            write!(f, "missing mother; ")?;
        }
        if !self.daughters_met() {
            write!(f, "missing daughter quorums; ")?;
        }
        write!(
            f,
            "mother quorum {}/{} met; daughter quorums {}/{} met",
            self.mother_nodes.min(self.mother_quorum),
            self.mother_quorum,
            self.daughters_recovered.min(self.daughters_needed),
            self.daughters_needed
        )
    }
}

/// Recovers every chunk: Lagrange inside each network with a quorum, then
/// Birkhoff across the mother value and `outer_degree` daughter derivatives.
pub fn reconstruct(shares: &Shares, topology: &Topology) -> Result<Vec<FieldElement>> {
    let all: Vec<&NodeShare> = shares.values().flatten().collect();
    let epochs: BTreeSet<u64> = all.iter().map(|s| s.epoch).collect();
    if epochs.len() > 1 {
        return Err(Error::EpochMismatch { found: epochs.into_iter().collect() });
    }
    let chunk_counts: BTreeSet<usize> = all.iter().map(|s| s.values.len()).collect();
    if chunk_counts.len() > 1 {
        return Err(Error::invalid("node shares disagree on the chunk count"));
    }
    let chunk_count = chunk_counts.into_iter().next().unwrap_or(0);

    let m = topology.modulus();
    let mut by_network: Vec<BTreeMap<u64, &NodeShare>> = vec![BTreeMap::new(); topology.network_count()];
    for (key, list) in shares {
        for s in list {
            if &s.network_id != key {
                return Err(Error::invalid(format!("share of {} filed under {key}", s.network_id)));
            }
            let j = topology
                .network_index(&s.network_id)
                .ok_or_else(|| Error::invalid(format!("unknown network {}", s.network_id)))?;
            if s.node_index < 1 || s.node_index > topology.networks()[j].node_count as u64 {
                return Err(Error::invalid(format!("node index {} out of range for {}", s.node_index, s.network_id)));
            }
            if s.values.iter().any(|v| v.modulus() != m) {
                return Err(Error::ModulusMismatch);
            }
            if by_network[j].insert(s.node_index, s).is_some() {
                return Err(Error::invalid(format!("duplicate share for {}#{}", s.network_id, s.node_index)));
            }
        }
    }

    // inner constant terms, per network, per chunk
    let mut recovered: Vec<Option<Vec<FieldElement>>> = vec![None; topology.network_count()];
    for (j, nodes) in by_network.iter().enumerate() {
        let quorum = topology.networks()[j].quorum();
        if nodes.len() < quorum {
            continue;
        }
        let chosen: Vec<&NodeShare> = nodes.values().take(quorum).copied().collect();
        let xs: Vec<_> = chosen.iter().map(|s| m.elem(s.node_index)).collect();
        let weights = lagrange_weights_at_zero(&xs)?;
        recovered[j] = Some(combine(&weights, &chosen, chunk_count, m));
    }

    let degree = topology.outer_degree();
    let daughters: Vec<usize> = topology.daughters().filter(|&j| recovered[j].is_some()).collect();
    let mother = topology.mother_index();
    if recovered[mother].is_none() || daughters.len() < degree {
        return Err(Error::Infeasible(InfeasibleReport {
            mother_nodes: by_network[mother].len(),
            mother_quorum: topology.mother().quorum(),
            daughters_recovered: daughters.len(),
            daughters_needed: degree,
        }));
    }

    // P(0) is linear in the constraint values; solve the Birkhoff system
    // once per unit right-hand side to get the combining weights.
    let mut sources = vec![(1u64, mother)];
    for &j in daughters.iter().take(degree) {
        let Role::Daughter { point } = topology.role(j) else { unreachable!() };
        sources.push((point, j));
    }
    let weights: Vec<FieldElement> = (0..sources.len())
        .map(|unit| {
            let cs: Vec<_> = sources
                .iter()
                .enumerate()
                .map(|(r, &(point, j))| {
                    let v = if r == unit { m.one() } else { m.zero() };
                    if j == mother {
                        BirkhoffConstraint::value(m.elem(point), v)
                    } else {
                        BirkhoffConstraint::derivative(m.elem(point), v)
                    }
                })
                .collect();
            birkhoff_solve(&cs, degree).map(|p| p.constant_term().clone())
        })
        .collect::<Result<_>>()?;

    Ok((0..chunk_count)
        .map(|c| {
            sources
                .iter()
                .zip(&weights)
                .fold(m.zero(), |acc, (&(_, j), w)| &acc + &(w * &recovered[j].as_ref().unwrap()[c]))
        })
        .collect())
}

fn combine(
    weights: &[FieldElement],
    shares: &[&NodeShare],
    chunks: usize,
    m: &crate::field::Modulus,
) -> Vec<FieldElement> {
    (0..chunks).map(|c| weights.iter().zip(shares).fold(m.zero(), |acc, (w, s)| &acc + &(w * &s.values[c]))).collect()
}

/// Refresh messages for every node: per network and per chunk, a random
/// polynomial of the network's inner degree with zero constant term. The
/// outer polynomial is never touched.
pub fn refresh<R: RngCore + ?Sized>(
    topology: &Topology,
    epoch: u64,
    chunk_count: usize,
    rng: &mut R,
) -> Result<BTreeMap<String, Vec<NodeDelta>>> {
    let mut out = BTreeMap::new();
    for net in topology.networks() {
        let mut nodes: Vec<NodeDelta> = (1..=net.node_count as u64)
            .map(|i| NodeDelta {
                network_id: net.id.clone(),
                node_index: i,
                from_epoch: epoch,
                values: Vec::with_capacity(chunk_count),
            })
            .collect();
        for _ in 0..chunk_count {
            let deltas = refresh_deltas(topology.modulus(), net.quorum(), net.node_count, epoch, rng)?;
            for (node, d) in nodes.iter_mut().zip(deltas) {
                node.values.push(d.delta);
            }
        }
        out.insert(net.id.clone(), nodes);
    }
    Ok(out)
}

pub fn apply_node_refresh(share: &NodeShare, delta: &NodeDelta) -> Result<NodeShare> {
    if share.network_id != delta.network_id || share.node_index != delta.node_index {
        return Err(Error::invalid(format!(
            "delta for {}#{} applied to {}#{}",
            delta.network_id, delta.node_index, share.network_id, share.node_index
        )));
    }
    if share.values.len() != delta.values.len() {
        return Err(Error::invalid("delta chunk count differs from the share"));
    }
    let mut values = Vec::with_capacity(share.values.len());
    for (y, d) in share.values.iter().zip(&delta.values) {
        let flat = FlatShare { x: share.node_index, y: y.clone(), threshold_k: 1, epoch: share.epoch };
        let rd = RefreshDelta { x: delta.node_index, delta: d.clone(), from_epoch: delta.from_epoch };
        values.push(apply_refresh(&flat, &rd)?.y);
    }
    Ok(NodeShare { network_id: share.network_id.clone(), node_index: share.node_index, epoch: share.epoch + 1, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Modulus, Randomness};

    fn worked() -> (Topology, Vec<ChunkPolynomials>) {
        let q = Modulus::from_u64(11).unwrap();
        let t = Topology::uniform(q.clone(), 3, 3, 1, 1).unwrap();
        let polys = vec![ChunkPolynomials {
            outer: Polynomial::from_u64(&q, &[4, 3]),
            inner: vec![
                Polynomial::from_u64(&q, &[7, 2]),
                Polynomial::from_u64(&q, &[3, 5]),
                Polynomial::from_u64(&q, &[3, 1]),
            ],
        }];
        (t, polys)
    }

    fn values(shares: &Shares, net: &str) -> Vec<u64> {
        shares[net].iter().map(|s| s.values[0].to_u64().unwrap()).collect()
    }

    fn pick(shares: &Shares, wanted: &[(&str, &[u64])]) -> Shares {
        wanted
            .iter()
            .map(|(net, idx)| {
                (net.to_string(), shares[*net].iter().filter(|s| idx.contains(&s.node_index)).cloned().collect())
            })
            .collect()
    }

    #[test]
    fn worked_example() {
        let (t, polys) = worked();
        let shares = deal_with(&t, &polys).unwrap();
        assert_eq!(values(&shares, "mother"), vec![9, 0, 2]);
        assert_eq!(values(&shares, "daughter1"), vec![8, 2, 7]);
        assert_eq!(values(&shares, "daughter2"), vec![4, 5, 6]);

        let subset = pick(&shares, &[("mother", &[1, 2]), ("daughter1", &[1, 3])]);
        assert_eq!(reconstruct(&subset, &t).unwrap(), vec![t.modulus().elem(4)]);
        assert_eq!(reconstruct(&shares, &t).unwrap(), vec![t.modulus().elem(4)]);
    }

    #[test]
    fn missing_mother_is_infeasible() {
        let (t, polys) = worked();
        let shares = deal_with(&t, &polys).unwrap();
        let daughters = pick(&shares, &[("daughter1", &[1, 2, 3]), ("daughter2", &[1, 2, 3])]);
        match reconstruct(&daughters, &t) {
            Err(Error::Infeasible(r)) => {
                assert!(!r.mother_met());
                assert!(r.to_string().starts_with("missing mother"));
            }
            other => panic!("{other:?}"),
        }
        let below = pick(&shares, &[("mother", &[1, 2]), ("daughter1", &[1])]);
        assert_eq!(
            reconstruct(&below, &t).unwrap_err().to_string(),
            "reconstruction infeasible: missing daughter quorums; mother quorum 2/2 met; daughter quorums 0/1 met"
        );
    }

    #[test]
    fn deal_with_rejects_wrong_constant() {
        let (t, mut polys) = worked();
        polys[0].inner[1] = Polynomial::from_u64(t.modulus(), &[4, 5]);
        assert!(matches!(deal_with(&t, &polys), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn random_deal_shape_and_round_trip() {
        let q = Modulus::mersenne_127();
        let t = Topology::from_parts(q.clone(), &[(3, 1), (2, 0), (4, 2), (3, 2)], 2).unwrap();
        let mut rng = Randomness::seeded(10);
        let chunks: Vec<_> = (0..5).map(|_| q.random(&mut rng)).collect();
        let shares = deal(&chunks, &t, &mut rng).unwrap();
        assert_eq!(shares.values().map(Vec::len).sum::<usize>(), t.total_nodes());
        assert!(shares.values().flatten().all(|s| s.epoch == 0 && s.values.len() == 5));
        assert_eq!(reconstruct(&shares, &t).unwrap(), chunks);
    }

    #[test]
    fn two_network_daughter_holds_constant_derivative() {
        let q = Modulus::from_u64(257).unwrap();
        let t = Topology::uniform(q.clone(), 2, 2, 0, 1).unwrap();
        let mut rng = Randomness::seeded(3);
        let polys = ChunkPolynomials::sample(&t, &q.elem(42), &mut rng);
        let slope = polys.outer.coeffs().get(1).cloned().unwrap_or(q.zero());
        let shares = deal_with(&t, &[polys]).unwrap();
        assert!(shares["daughter1"].iter().all(|s| s.values[0] == slope));
        assert_eq!(reconstruct(&shares, &t).unwrap(), vec![q.elem(42)]);
    }

    #[test]
    fn refresh_preserves_and_guards_epochs() {
        let q = Modulus::mersenne_127();
        let t = Topology::uniform(q.clone(), 3, 3, 1, 1).unwrap();
        let mut rng = Randomness::seeded(11);
        let chunks = vec![q.elem(1234), q.elem(99)];
        let shares = deal(&chunks, &t, &mut rng).unwrap();
        let deltas = refresh(&t, 0, 2, &mut rng).unwrap();
        assert!(t.networks().iter().all(|n| deltas[&n.id].len() == n.node_count));
        let refreshed: Shares = shares
            .iter()
            .map(|(k, v)| {
                (k.clone(), v.iter().zip(&deltas[k]).map(|(s, d)| apply_node_refresh(s, d).unwrap()).collect())
            })
            .collect();
        assert_eq!(reconstruct(&refreshed, &t).unwrap(), chunks);
        assert_ne!(refreshed["mother"][0].values, shares["mother"][0].values);

        let mut mixed = refreshed.clone();
        mixed.insert("mother".into(), shares["mother"].clone());
        assert!(matches!(reconstruct(&mixed, &t), Err(Error::EpochMismatch { .. })));
        assert!(matches!(
            apply_node_refresh(&refreshed["mother"][0], &deltas["mother"][0]),
            Err(Error::EpochMismatch { .. })
        ));
    }
}
