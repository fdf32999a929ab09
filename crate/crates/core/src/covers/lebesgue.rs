//! Exact Lebesgue numbers via maximal cliques of threshold graphs.
//!
//! A subset has diameter ≤ λ exactly when it is a clique of the threshold
//! graph `G_λ` (edges between points at distance ≤ λ). Every such subset lies
//! inside a maximal clique, so checking the maximal cliques is enough.

use crate::spaces::{FiniteMetricSpace, PointId};

use super::{Cover, CoverError};

/// Largest space handled by the clique oracle. Points are packed into a `u64`.
pub const DEFAULT_ORACLE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LebesgueVerdict {
    pub holds: bool,
    /// A subset of diameter ≤ λ contained in no element, when `holds` is false.
    pub violating: Option<Vec<PointId>>,
}

fn mask_to_points(mut mask: u64) -> Vec<PointId> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        let bit = mask.trailing_zeros();
        out.push(PointId(bit));
        mask &= mask - 1;
    }
    out
}

fn check_cap(space: &FiniteMetricSpace, cap: usize) -> Result<(), CoverError> {
    let cap = cap.min(DEFAULT_ORACLE_CAP);
    if space.size() > cap {
        Err(CoverError::OracleCap { size: space.size(), cap })
    } else {
        Ok(())
    }
}

/// Maximal cliques of `G_λ` as point bitmasks, in deterministic order.
pub fn threshold_maximal_cliques(space: &FiniteMetricSpace, lambda: u32) -> Result<Vec<u64>, CoverError> {
    check_cap(space, DEFAULT_ORACLE_CAP)?;
    let n = space.size();
    let adjacency: Vec<u64> = space
        .points()
        .map(|x| {
            space
                .row(x)
                .iter()
                .enumerate()
                .filter(|&(y, &d)| y != x.index() && d <= lambda)
                .fold(0u64, |acc, (y, _)| acc | (1 << y))
        })
        .collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut out = Vec::new();
    bron_kerbosch(&adjacency, 0, all, 0, &mut out);
    Ok(out)
}

/// Bron–Kerbosch with Tomita pivoting: the pivot maximizes `|P ∩ N(u)|`
/// over `P ∪ X`, smallest index on ties.
fn bron_kerbosch(adjacency: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
    if p == 0 {
        if x == 0 {
            out.push(r);
        }
        return;
    }
    let mut pivot = 0usize;
    let mut best = -1i64;
    let mut candidates = p | x;
    while candidates != 0 {
        let u = candidates.trailing_zeros() as usize;
        candidates &= candidates - 1;
        let score = (p & adjacency[u]).count_ones() as i64;
        if score > best {
            best = score;
            pivot = u;
        }
    }
    let mut todo = p & !adjacency[pivot];
    while todo != 0 {
        let v = todo.trailing_zeros() as usize;
        todo &= todo - 1;
        let bit = 1u64 << v;
        bron_kerbosch(adjacency, r | bit, p & adjacency[v], x & adjacency[v], out);
        p &= !bit;
        x |= bit;
    }
}

fn element_masks(cover: &Cover) -> Vec<u64> {
    cover
        .elements()
        .iter()
        .map(|members| members.iter().fold(0u64, |acc, p| acc | (1 << p.0)))
        .collect()
}

/// Whether every subset of diameter ≤ λ lies in a single element.
pub fn exact_lebesgue_at_least(
    space: &FiniteMetricSpace,
    cover: &Cover,
    lambda: u32,
) -> Result<LebesgueVerdict, CoverError> {
    exact_lebesgue_at_least_capped(space, cover, lambda, DEFAULT_ORACLE_CAP)
}

pub fn exact_lebesgue_at_least_capped(
    space: &FiniteMetricSpace,
    cover: &Cover,
    lambda: u32,
    cap: usize,
) -> Result<LebesgueVerdict, CoverError> {
    check_cap(space, cap)?;
    let masks = element_masks(cover);
    let cliques = threshold_maximal_cliques(space, lambda)?;
    let violating = cliques
        .into_iter()
        .find(|&clique| !masks.iter().any(|&m| clique & !m == 0));
    Ok(LebesgueVerdict {
        holds: violating.is_none(),
        violating: violating.map(mask_to_points),
    })
}

/// Largest λ in `[0, diam(X)]` passing the exact check. The check is
/// monotone in λ, so this is a binary search.
pub fn exact_lebesgue_number(space: &FiniteMetricSpace, cover: &Cover) -> Result<u32, CoverError> {
    let (mut lo, mut hi) = (0u32, space.diameter());
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if exact_lebesgue_at_least(space, cover, mid)?.holds {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}
