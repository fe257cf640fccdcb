//! Secrecy as linear algebra.
//!
//! Every stored or transmitted value is a linear functional of the dealer's
//! inputs: the secret `S`, the non-constant coefficients of `P`, of every
//! inner polynomial and of every refresh polynomial. With all of those
//! uniform, a set of observations either pins `S` (the unit functional on
//! `S` lies in the row span) or leaves it uniformly distributed.

use serde::{Deserialize, Serialize};

use super::{NodeId, Role, Topology};
use crate::error::{Error, Result};
use crate::field::{FieldElement, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Reconstructs,
    NoInformation,
}

/// Something an adversary holds, identified by network index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    /// A node's stored share at `epoch`.
    Share { network: usize, node: u64, epoch: u64 },
    /// The refresh delta sent to a node in refresh round `round`
    /// (the transition from epoch `round` to `round + 1`).
    Delta { network: usize, node: u64, round: u64 },
}

/// Column layout of the dealer's randomness for a topology that has gone
/// through `refresh_rounds` refreshes.
#[derive(Clone, Debug)]
pub struct DealtStructure {
    topology: Topology,
    refresh_rounds: u64,
    inner_offsets: Vec<usize>,
    refresh_offsets: Vec<Vec<usize>>,
    columns: usize,
}

impl DealtStructure {
    pub fn new(topology: &Topology, refresh_rounds: u64) -> Self {
        let mut next = 1 + topology.outer_degree();
        let mut inner_offsets = Vec::new();
        for net in topology.networks() {
            inner_offsets.push(next);
            next += net.inner_degree;
        }
        let mut refresh_offsets = Vec::new();
        for _ in 0..refresh_rounds {
            let mut round = Vec::new();
            for net in topology.networks() {
                round.push(next);
                next += net.inner_degree;
            }
            refresh_offsets.push(round);
        }
        DealtStructure { topology: topology.clone(), refresh_rounds, inner_offsets, refresh_offsets, columns: next }
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub const SECRET_COLUMN: usize = 0;

    fn node_powers(&self, row: &mut [FieldElement], offset: usize, degree: usize, node: u64) {
        let m = self.topology.modulus();
        let x = m.elem(node);
        let mut power = x.clone();
        for t in 0..degree {
            row[offset + t] = power.clone();
            power = &power * &x;
        }
    }

    fn check_node(&self, network: usize, node: u64) -> Result<()> {
        let net = self
            .topology
            .networks()
            .get(network)
            .ok_or_else(|| Error::invalid(format!("network index {network} out of range")))?;
        if node < 1 || node > net.node_count as u64 {
            return Err(Error::invalid(format!("node {node} out of range for {}", net.id)));
        }
        Ok(())
    }

    pub fn row(&self, obs: &Observation) -> Result<Vec<FieldElement>> {
        let m = self.topology.modulus();
        let mut row = vec![m.zero(); self.columns];
        match *obs {
            Observation::Share { network, node, epoch } => {
                self.check_node(network, node)?;
                if epoch > self.refresh_rounds {
                    return Err(Error::invalid(format!("epoch {epoch} beyond {} refresh rounds", self.refresh_rounds)));
                }
                let degree = self.topology.outer_degree();
                match self.topology.role(network) {
                    Role::Mother => {
                        // P(1) = S + a_1 + ... + a_D
                        for entry in row.iter_mut().take(degree + 1) {
                            *entry = m.one();
                        }
                    }
                    Role::Daughter { point } => {
                        // P'(p) = sum_t t * a_t * p^(t-1)
                        let p = m.elem(point);
                        let mut power = m.one();
                        for (t, entry) in row.iter_mut().enumerate().take(degree + 1).skip(1) {
                            *entry = &m.elem(t as u64) * &power;
                            power = &power * &p;
                        }
                    }
                }
                let d = self.topology.networks()[network].inner_degree;
                self.node_powers(&mut row, self.inner_offsets[network], d, node);
                for r in 0..epoch as usize {
                    self.node_powers(&mut row, self.refresh_offsets[r][network], d, node);
                }
            }
            Observation::Delta { network, node, round } => {
                self.check_node(network, node)?;
                if round >= self.refresh_rounds {
                    return Err(Error::invalid(format!("refresh round {round} was never dealt")));
                }
                let d = self.topology.networks()[network].inner_degree;
                self.node_powers(&mut row, self.refresh_offsets[round as usize][network], d, node);
            }
        }
        Ok(row)
    }

    /// The unit functional extracting `S`.
    pub fn secret_functional(&self) -> Vec<FieldElement> {
        let m = self.topology.modulus();
        let mut v = vec![m.zero(); self.columns];
        v[Self::SECRET_COLUMN] = m.one();
        v
    }
}

/// One row per observation over the dealer's randomness vector.
#[derive(Clone, Debug)]
pub struct AdversaryFunctionals {
    pub matrix: Matrix,
    pub secret_coordinate: usize,
}

impl AdversaryFunctionals {
    fn target(&self) -> Vec<FieldElement> {
        let m = self.matrix.modulus();
        let mut v = vec![m.zero(); self.matrix.cols()];
        v[self.secret_coordinate] = m.one();
        v
    }

    pub fn verdict(&self) -> Verdict {
        if self.matrix.in_row_span(&self.target()).expect("target has matrix width") {
            Verdict::Reconstructs
        } else {
            Verdict::NoInformation
        }
    }

    /// Weights `w` with `S = sum_r w[r] * observed[r]`, when they exist.
    pub fn recovery_weights(&self) -> Option<Vec<FieldElement>> {
        self.matrix.row_combination(&self.target()).expect("target has matrix width")
    }
}

pub fn functionals(observations: &[Observation], structure: &DealtStructure) -> Result<AdversaryFunctionals> {
    let rows = observations.iter().map(|o| structure.row(o)).collect::<Result<Vec<_>>>()?;
    Ok(AdversaryFunctionals {
        matrix: Matrix::from_rows(structure.topology.modulus(), structure.columns, rows)?,
        secret_coordinate: DealtStructure::SECRET_COLUMN,
    })
}

pub fn access_oracle_observations(observations: &[Observation], structure: &DealtStructure) -> Result<Verdict> {
    Ok(functionals(observations, structure)?.verdict())
}

/// Verdict for an adversary holding the freshly dealt shares of `nodes`.
pub fn access_oracle(nodes: &[NodeId], topology: &Topology) -> Result<Verdict> {
    let obs = nodes
        .iter()
        .map(|n| {
            let network = topology
                .network_index(&n.network)
                .ok_or_else(|| Error::invalid(format!("unknown network {}", n.network)))?;
            Ok(Observation::Share { network, node: n.index, epoch: 0 })
        })
        .collect::<Result<Vec<_>>>()?;
    access_oracle_observations(&obs, &DealtStructure::new(topology, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Modulus, Randomness};
    use crate::multiss::{deal, Shares};

    fn worked() -> Topology {
        Topology::uniform(Modulus::mersenne_127(), 3, 3, 1, 1).unwrap()
    }

    fn whole(t: &Topology, net: &str) -> Vec<NodeId> {
        t.nodes().filter(|n| n.network == net).collect()
    }

    #[test]
    fn examples() {
        let t = worked();
        assert_eq!(access_oracle(&[], &t).unwrap(), Verdict::NoInformation);
        assert_eq!(access_oracle(&t.nodes().collect::<Vec<_>>(), &t).unwrap(), Verdict::Reconstructs);
        assert_eq!(access_oracle(&whole(&t, "daughter1"), &t).unwrap(), Verdict::NoInformation);
        assert_eq!(access_oracle(&whole(&t, "mother"), &t).unwrap(), Verdict::NoInformation);
        let quorum = vec![
            NodeId::new("mother", 1),
            NodeId::new("mother", 3),
            NodeId::new("daughter2", 2),
            NodeId::new("daughter2", 1),
        ];
        assert_eq!(access_oracle(&quorum, &t).unwrap(), Verdict::Reconstructs);
        assert!(access_oracle(&[NodeId::new("nope", 1)], &t).is_err());
        assert!(access_oracle(&[NodeId::new("mother", 4)], &t).is_err());
    }

    #[test]
    fn rows_match_dealt_values() {
        // Evaluating each row on the actual randomness reproduces the share.
        let q = Modulus::from_u64(257).unwrap();
        let t = Topology::from_parts(q.clone(), &[(3, 2), (2, 1), (3, 1)], 2).unwrap();
        let mut rng = Randomness::seeded(21);
        let polys = crate::multiss::ChunkPolynomials::sample(&t, &q.elem(99), &mut rng);
        let shares: Shares = crate::multiss::deal_with(&t, std::slice::from_ref(&polys)).unwrap();
        let s = DealtStructure::new(&t, 0);
        let mut randomness = vec![polys.outer.constant_term().clone()];
        let coeff = |p: &crate::poly::Polynomial, i: usize| p.coeffs().get(i).cloned().unwrap_or(q.zero());
        randomness.extend((1..=t.outer_degree()).map(|i| coeff(&polys.outer, i)));
        for (j, net) in t.networks().iter().enumerate() {
            randomness.extend((1..=net.inner_degree).map(|i| coeff(&polys.inner[j], i)));
        }
        assert_eq!(randomness.len(), s.columns());
        for (j, net) in t.networks().iter().enumerate() {
            for share in &shares[&net.id] {
                let row = s.row(&Observation::Share { network: j, node: share.node_index, epoch: 0 }).unwrap();
                let value = row.iter().zip(&randomness).fold(q.zero(), |acc, (a, b)| &acc + &(a * b));
                assert_eq!(value, share.values[0]);
            }
        }
    }

    #[test]
    fn refresh_separates_epochs() {
        // mother quorum 2: node 1 before refresh and node 2 after do not
        // combine, even alongside a full daughter quorum.
        let t = worked();
        let s = DealtStructure::new(&t, 1);
        let daughter = [
            Observation::Share { network: 1, node: 1, epoch: 1 },
            Observation::Share { network: 1, node: 2, epoch: 1 },
        ];
        let mut obs = daughter.to_vec();
        obs.push(Observation::Share { network: 0, node: 1, epoch: 0 });
        obs.push(Observation::Share { network: 0, node: 2, epoch: 1 });
        assert_eq!(access_oracle_observations(&obs, &s).unwrap(), Verdict::NoInformation);
        // the delta for node 1 bridges the epochs
        obs.push(Observation::Delta { network: 0, node: 1, round: 0 });
        assert_eq!(access_oracle_observations(&obs, &s).unwrap(), Verdict::Reconstructs);
        assert!(s.row(&Observation::Delta { network: 0, node: 1, round: 1 }).is_err());
        assert!(s.row(&Observation::Share { network: 0, node: 1, epoch: 2 }).is_err());
    }

    #[test]
    fn recovery_weights_recover_secret() {
        let q = Modulus::mersenne_127();
        let t = worked();
        let mut rng = Randomness::seeded(30);
        let secret = q.random(&mut rng);
        let shares = deal(std::slice::from_ref(&secret), &t, &mut rng).unwrap();
        let held = [("mother", 2u64), ("mother", 3), ("daughter2", 1), ("daughter2", 3), ("daughter1", 2)];
        let obs: Vec<_> = held
            .iter()
            .map(|(n, i)| Observation::Share { network: t.network_index(n).unwrap(), node: *i, epoch: 0 })
            .collect();
        let f = functionals(&obs, &DealtStructure::new(&t, 0)).unwrap();
        let w = f.recovery_weights().unwrap();
        let got = held
            .iter()
            .zip(&w)
            .fold(q.zero(), |acc, ((n, i), w)| &acc + &(w * &shares[*n][(*i - 1) as usize].values[0]));
        assert_eq!(got, secret);
    }
}
