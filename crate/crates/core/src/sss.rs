//! Flat Shamir sharing, two-rank hierarchical sharing with derivative
//! shares, and proactive refresh by adding shares of zero.
//!
//! Shares always sit at `x = 1..=n`.

use std::collections::HashSet;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, Modulus};
use crate::poly::{birkhoff_solve, lagrange_at_zero, lagrange_eval, BirkhoffConstraint, Polynomial};

/// One participant's share `(x, P(x))` of a threshold-`k` sharing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatShare {
    pub x: u64,
    pub y: FieldElement,
    pub threshold_k: usize,
    pub epoch: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rank {
    /// Holds an evaluation of the sharing polynomial.
    Manager,
    /// Holds an evaluation of its derivative.
    Employee,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierShare {
    pub rank: Rank,
    pub x: u64,
    pub y: FieldElement,
    pub threshold_k: usize,
}

/// `Q(x)` for a refresh polynomial with `Q(0) = 0`; adding it to the epoch
/// `from_epoch` share at `x` produces the epoch `from_epoch + 1` share.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefreshDelta {
    pub x: u64,
    pub delta: FieldElement,
    pub from_epoch: u64,
}

fn check_counts(modulus: &Modulus, k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("threshold k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    if modulus.as_usize().is_some_and(|q| n >= q) {
        return Err(Error::invalid(format!("n = {n} must be below the modulus")));
    }
    Ok(())
}

pub fn shamir_split<R: RngCore + ?Sized>(
    secret: &FieldElement,
    k: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<FlatShare>> {
    check_counts(secret.modulus(), k, n)?;
    let poly = Polynomial::random(k - 1, secret, rng);
    split_with_polynomial(&poly, k, n)
}

/// Shares of an explicitly given dealer polynomial (degree below `k`).
pub fn split_with_polynomial(poly: &Polynomial, k: usize, n: usize) -> Result<Vec<FlatShare>> {
    check_counts(poly.modulus(), k, n)?;
    if poly.degree() >= k {
        return Err(Error::invalid(format!("degree {} polynomial for threshold {k}", poly.degree())));
    }
    Ok((1..=n as u64).map(|x| FlatShare { x, y: poly.eval_at(x), threshold_k: k, epoch: 0 }).collect())
}

/// Checks uniform threshold and epoch and distinct `x`, then returns the
/// shares sorted by `x`.
fn consistent(shares: &[FlatShare]) -> Result<Vec<&FlatShare>> {
    let first = shares.first().ok_or(Error::InsufficientShares { have: 0, need: 1 })?;
    if shares.iter().any(|s| s.threshold_k != first.threshold_k) {
        return Err(Error::invalid("shares disagree on the threshold"));
    }
    let mut epochs: Vec<u64> = shares.iter().map(|s| s.epoch).collect();
    epochs.sort_unstable();
    epochs.dedup();
    if epochs.len() > 1 {
        return Err(Error::EpochMismatch { found: epochs });
    }
    let mut seen = HashSet::new();
    if let Some(dup) = shares.iter().find(|s| !seen.insert(s.x)) {
        return Err(Error::invalid(format!("duplicate share x = {}", dup.x)));
    }
    if shares.len() < first.threshold_k {
        return Err(Error::InsufficientShares { have: shares.len(), need: first.threshold_k });
    }
    let mut sorted: Vec<&FlatShare> = shares.iter().collect();
    sorted.sort_by_key(|s| s.x);
    Ok(sorted)
}

fn points(shares: &[&FlatShare]) -> Vec<(FieldElement, FieldElement)> {
    shares.iter().map(|s| (s.y.modulus().elem(s.x), s.y.clone())).collect()
}

/// Interpolates `P(0)` from the `k` lowest-`x` shares.
pub fn shamir_reconstruct(shares: &[FlatShare]) -> Result<FieldElement> {
    let sorted = consistent(shares)?;
    let k = sorted[0].threshold_k;
    lagrange_at_zero(&points(&sorted[..k]))
}

/// As [`shamir_reconstruct`], and additionally checks that every share past
/// the first `k` lies on the interpolated polynomial.
pub fn shamir_reconstruct_verified(shares: &[FlatShare]) -> Result<FieldElement> {
    let sorted = consistent(shares)?;
    let k = sorted[0].threshold_k;
    let base = points(&sorted[..k]);
    for extra in &sorted[k..] {
        let at = extra.y.modulus().elem(extra.x);
        if lagrange_eval(&base, &at)? != extra.y {
            return Err(Error::Corrupt(format!("share at x = {} is off the interpolated polynomial", extra.x)));
        }
    }
    lagrange_at_zero(&base)
}

pub fn hierarchical_split<R: RngCore + ?Sized>(
    secret: &FieldElement,
    k: usize,
    managers: usize,
    employees: usize,
    rng: &mut R,
) -> Result<Vec<HierShare>> {
    let poly = Polynomial::random(k.saturating_sub(1), secret, rng);
    hierarchical_split_with_polynomial(&poly, k, managers, employees)
}

pub fn hierarchical_split_with_polynomial(
    poly: &Polynomial,
    k: usize,
    managers: usize,
    employees: usize,
) -> Result<Vec<HierShare>> {
    if k < 2 {
        return Err(Error::invalid("hierarchical sharing needs k >= 2"));
    }
    if managers == 0 {
        return Err(Error::invalid("at least one manager is required"));
    }
    if poly.degree() >= k {
        return Err(Error::invalid(format!("degree {} polynomial for threshold {k}", poly.degree())));
    }
    let m = poly.modulus();
    if m.as_usize().is_some_and(|q| managers.max(employees) >= q) {
        return Err(Error::invalid("share count must be below the modulus"));
    }
    let derivative = poly.derivative();
    let mut out = Vec::with_capacity(managers + employees);
    out.extend((1..=managers as u64).map(|x| HierShare { rank: Rank::Manager, x, y: poly.eval_at(x), threshold_k: k }));
    out.extend((1..=employees as u64).map(|x| HierShare {
        rank: Rank::Employee,
        x,
        y: derivative.eval_at(x),
        threshold_k: k,
    }));
    Ok(out)
}

fn constraint(share: &HierShare) -> BirkhoffConstraint {
    let m = share.y.modulus();
    match share.rank {
        Rank::Manager => BirkhoffConstraint::value(m.elem(share.x), share.y.clone()),
        Rank::Employee => BirkhoffConstraint::derivative(m.elem(share.x), share.y.clone()),
    }
}

fn solve_subset(subset: &[&HierShare], k: usize) -> Result<Option<FieldElement>> {
    let cs: Vec<_> = subset.iter().map(|s| constraint(s)).collect();
    match birkhoff_solve(&cs, k - 1) {
        Ok(p) => Ok(Some(p.constant_term().clone())),
        Err(Error::Unsolvable) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Recovers the secret from mixed manager/employee shares by Birkhoff
/// interpolation on `k` of them.
///
/// Tries one manager plus `k - 1` employees first, then tops up with more
/// managers, and finally searches every `k`-subset holding a manager.
pub fn hierarchical_reconstruct(shares: &[HierShare], k: usize) -> Result<FieldElement> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    let mut seen = HashSet::new();
    for s in shares {
        if !seen.insert((s.rank, s.x)) {
            return Err(Error::invalid(format!("duplicate {:?} share at x = {}", s.rank, s.x)));
        }
        if s.threshold_k != k {
            return Err(Error::invalid("share threshold disagrees with k"));
        }
    }
    let mut managers: Vec<&HierShare> = shares.iter().filter(|s| s.rank == Rank::Manager).collect();
    let mut employees: Vec<&HierShare> = shares.iter().filter(|s| s.rank == Rank::Employee).collect();
    managers.sort_by_key(|s| s.x);
    employees.sort_by_key(|s| s.x);
    if managers.is_empty() || shares.len() < k {
        return Err(Error::NoQuorum);
    }

    let take_employees = employees.len().min(k - 1);
    let mut greedy: Vec<&HierShare> = employees[..take_employees].to_vec();
    greedy.extend(managers.iter().take(k - take_employees));
    if greedy.len() == k {
        if let Some(s) = solve_subset(&greedy, k)? {
            return Ok(s);
        }
    }

    let all: Vec<&HierShare> = managers.iter().chain(employees.iter()).copied().collect();
    let mut found = None;
    for_each_subset(all.len(), k, &mut |idx| {
        if !idx.iter().any(|&i| all[i].rank == Rank::Manager) {
            return Ok(false);
        }
        let subset: Vec<&HierShare> = idx.iter().map(|&i| all[i]).collect();
        if let Some(s) = solve_subset(&subset, k)? {
            found = Some(s);
            return Ok(true);
        }
        Ok(false)
    })?;
    found.ok_or(Error::NoQuorum)
}

/// Visits `k`-subsets of `0..n` in lexicographic order until `f` returns true.
fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> Result<bool>) -> Result<()> {
    if k > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if f(&idx)? {
            return Ok(());
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return Ok(());
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Deltas from a random degree `k - 1` polynomial with zero constant term.
pub fn refresh_deltas<R: RngCore + ?Sized>(
    modulus: &Modulus,
    k: usize,
    n: usize,
    from_epoch: u64,
    rng: &mut R,
) -> Result<Vec<RefreshDelta>> {
    check_counts(modulus, k, n)?;
    let poly = Polynomial::random(k - 1, &modulus.zero(), rng);
    refresh_deltas_with_polynomial(&poly, n, from_epoch)
}

pub fn refresh_deltas_with_polynomial(poly: &Polynomial, n: usize, from_epoch: u64) -> Result<Vec<RefreshDelta>> {
    if !poly.constant_term().is_zero() {
        return Err(Error::invalid("refresh polynomial must vanish at zero"));
    }
    Ok((1..=n as u64).map(|x| RefreshDelta { x, delta: poly.eval_at(x), from_epoch }).collect())
}

pub fn apply_refresh(share: &FlatShare, delta: &RefreshDelta) -> Result<FlatShare> {
    if share.x != delta.x {
        return Err(Error::invalid(format!("delta for x = {} applied to share x = {}", delta.x, share.x)));
    }
    if share.epoch != delta.from_epoch {
        return Err(Error::EpochMismatch { found: vec![share.epoch, delta.from_epoch] });
    }
    Ok(FlatShare {
        x: share.x,
        y: share.y.try_add(&delta.delta)?,
        threshold_k: share.threshold_k,
        epoch: share.epoch + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Randomness;

    fn q(v: u64) -> Modulus {
        Modulus::from_u64(v).unwrap()
    }

    fn ys(shares: &[FlatShare]) -> Vec<(u64, u64)> {
        shares.iter().map(|s| (s.x, s.y.to_u64().unwrap())).collect()
    }

    #[test]
    fn split_examples() {
        let q7 = q(7);
        let mut rng = Randomness::seeded(1);
        let shares = shamir_split(&q7.elem(4), 1, 3, &mut rng).unwrap();
        assert!(shares.iter().all(|s| s.y == q7.elem(4)));

        let p = Polynomial::from_u64(&q7, &[3, 2]);
        let shares = split_with_polynomial(&p, 2, 3).unwrap();
        assert_eq!(ys(&shares), vec![(1, 5), (2, 0), (3, 2)]);
        assert!(shares.iter().all(|s| s.epoch == 0 && s.threshold_k == 2));

        let shares = shamir_split(&q7.elem(1), 3, 5, &mut rng).unwrap();
        assert_eq!(shares.iter().map(|s| s.x).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn split_errors() {
        let q7 = q(7);
        let mut rng = Randomness::seeded(1);
        assert!(matches!(shamir_split(&q7.one(), 4, 3, &mut rng), Err(Error::InvalidArgument(_))));
        assert!(matches!(shamir_split(&q7.one(), 0, 3, &mut rng), Err(Error::InvalidArgument(_))));
        assert!(matches!(shamir_split(&q7.one(), 2, 7, &mut rng), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn reconstruct_examples() {
        let q7 = q(7);
        let shares = split_with_polynomial(&Polynomial::from_u64(&q7, &[3, 2]), 2, 3).unwrap();
        assert_eq!(shamir_reconstruct(&shares[..2]).unwrap(), q7.elem(3));
        assert_eq!(shamir_reconstruct(&shares).unwrap(), q7.elem(3));
        assert_eq!(shamir_reconstruct_verified(&shares).unwrap(), q7.elem(3));
        assert_eq!(shamir_reconstruct(&shares[..1]), Err(Error::InsufficientShares { have: 1, need: 2 }));

        let mut mixed = shares.clone();
        mixed[1].epoch = 1;
        assert_eq!(shamir_reconstruct(&mixed), Err(Error::EpochMismatch { found: vec![0, 1] }));

        let dup = vec![shares[0].clone(), shares[0].clone()];
        assert!(matches!(shamir_reconstruct(&dup), Err(Error::InvalidArgument(_))));

        let mut corrupt = shares.clone();
        corrupt[2].y = q7.elem(6);
        assert!(matches!(shamir_reconstruct_verified(&corrupt), Err(Error::Corrupt(_))));
    }

    #[test]
    fn hierarchical_examples() {
        let q11 = q(11);
        let p = Polynomial::from_u64(&q11, &[4, 3]);
        let shares = hierarchical_split_with_polynomial(&p, 2, 1, 3).unwrap();
        assert_eq!(shares.len(), 4);
        assert_eq!(shares[0], HierShare { rank: Rank::Manager, x: 1, y: q11.elem(7), threshold_k: 2 });
        assert!(shares[1..].iter().all(|s| s.rank == Rank::Employee && s.y == q11.elem(3)));

        assert_eq!(hierarchical_reconstruct(&shares[..2], 2).unwrap(), q11.elem(4));
        assert_eq!(hierarchical_reconstruct(&shares[1..3], 2), Err(Error::NoQuorum));
        assert_eq!(hierarchical_reconstruct(&shares[..1], 2), Err(Error::NoQuorum));

        let mut rng = Randomness::seeded(1);
        assert!(matches!(hierarchical_split(&q11.one(), 2, 0, 3, &mut rng), Err(Error::InvalidArgument(_))));
        assert!(matches!(hierarchical_split(&q11.one(), 1, 1, 3, &mut rng), Err(Error::InvalidArgument(_))));

        let dup = vec![shares[0].clone(), shares[0].clone()];
        assert!(matches!(hierarchical_reconstruct(&dup, 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn hierarchical_manager_mixes() {
        let q = Modulus::mersenne_127();
        let mut rng = Randomness::seeded(12);
        for k in 2..=5 {
            let secret = q.random(&mut rng);
            let shares = hierarchical_split(&secret, k, 4, 4, &mut rng).unwrap();
            let (mgr, emp): (Vec<_>, Vec<_>) = shares.iter().cloned().partition(|s| s.rank == Rank::Manager);
            for m in 1..=k.min(4) {
                let mut subset: Vec<_> = mgr[..m].to_vec();
                subset.extend(emp[..(k - m).min(4)].iter().cloned());
                if subset.len() == k {
                    assert_eq!(hierarchical_reconstruct(&subset, k).unwrap(), secret, "k={k} m={m}");
                }
            }
            // employees only, any number
            assert_eq!(hierarchical_reconstruct(&emp, k), Err(Error::NoQuorum));
        }
    }

    #[test]
    fn refresh_examples() {
        let q7 = q(7);
        let mut rng = Randomness::seeded(4);
        let deltas = refresh_deltas(&q7, 3, 5, 2, &mut rng).unwrap();
        assert_eq!(deltas.len(), 5);
        assert!(deltas.iter().all(|d| d.from_epoch == 2));
        let as_shares: Vec<_> =
            deltas.iter().map(|d| FlatShare { x: d.x, y: d.delta.clone(), threshold_k: 3, epoch: 0 }).collect();
        assert!(shamir_reconstruct(&as_shares[2..]).unwrap().is_zero());

        let forced = refresh_deltas_with_polynomial(&Polynomial::from_u64(&q7, &[0, 5]), 3, 0).unwrap();
        assert_eq!(forced.iter().map(|d| d.delta.to_u64().unwrap()).collect::<Vec<_>>(), vec![5, 3, 1]);

        let share = FlatShare { x: 1, y: q7.elem(5), threshold_k: 2, epoch: 0 };
        let next = apply_refresh(&share, &forced[0]).unwrap();
        assert_eq!((next.y.to_u64().unwrap(), next.epoch), (3, 1));

        let zero = RefreshDelta { x: 1, delta: q7.zero(), from_epoch: 0 };
        let same = apply_refresh(&share, &zero).unwrap();
        assert_eq!((same.y.clone(), same.epoch), (share.y.clone(), 1));

        assert!(matches!(apply_refresh(&next, &forced[0]), Err(Error::EpochMismatch { .. })));
        assert!(matches!(apply_refresh(&share, &forced[1]), Err(Error::InvalidArgument(_))));
    }
}
