//! Finite-scale dimension function and bound curves.
//!
//! On a finite space every cover is uniformly bounded, so the dimension
//! function would be identically 0 (the single-element cover). The quantity
//! estimated here is the mesh-constrained version
//!
//! ```text
//! ad(λ; D) = min { m(U) : mesh(U) ≤ D, L(U) ≥ λ } − 1
//! ```

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::covers::{
    ball_lebesgue, exact_lebesgue_at_least, greedy_net_cover, interval_cover, mesh, multiplicity,
    threshold_maximal_cliques, tree_annuli_cover, whole_space_cover, Cover, CoverError,
    DEFAULT_ORACLE_CAP,
};
use crate::spaces::{FiniteMetricSpace, PointId, SpaceKind};
use crate::witness::{theoretical_bound, Mode, WitnessContext, WitnessError, WitnessParams};

/// Largest space accepted by [`dim_exact_tiny`].
pub const TINY_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimensionError {
    #[error("mesh cap must be at least 1")]
    ZeroMeshCap,
    #[error("mesh cap {mesh_cap} is below λ = {lambda}; no cover can contain sets of diameter λ")]
    MeshBelowLambda { lambda: u32, mesh_cap: u32 },
    #[error("exhaustive dimension search is limited to {cap} points (space has {size})")]
    TooLarge { size: usize, cap: usize },
    #[error("no cover of scale n = {0} was supplied")]
    MissingCover(u32),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimQuery {
    /// Required Lebesgue number.
    pub lambda: u32,
    /// Largest admissible element diameter.
    pub mesh_cap: u32,
}

impl DimQuery {
    pub fn new(lambda: u32, mesh_cap: u32) -> Self {
        DimQuery { lambda, mesh_cap }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimEstimate {
    pub query: DimQuery,
    /// Best multiplicity found minus one; `None` means no upper bound was established.
    pub upper: Option<u32>,
    pub exact: Option<u32>,
    pub witness_cover: Option<Cover>,
    /// Generator and parameter that produced the witness cover.
    pub generator: Option<String>,
    /// The Lebesgue condition was checked with the ball criterion (space above
    /// the exact oracle cap). The ball criterion is sufficient, so the bound
    /// is still valid, only possibly weaker.
    pub surrogate: bool,
    pub candidates_examined: usize,
}

fn candidates(space: &FiniteMetricSpace) -> Result<Vec<(String, Cover)>, CoverError> {
    let mut out = vec![("whole".to_string(), whole_space_cover(space))];
    match space.kind() {
        SpaceKind::Grid { dims } => {
            let longest = dims.iter().copied().max().unwrap_or(1);
            // past (longest + 1) / 2 + 1 every axis is a single interval
            for ell in 1..=longest / 2 + 2 {
                out.push((format!("interval(l={ell})"), interval_cover(space, ell)?));
            }
        }
        SpaceKind::Tree { depth, .. } => {
            for width in 1..=depth + 1 {
                out.push((format!("tree-annuli(l={width})"), tree_annuli_cover(space, width)?));
            }
        }
        SpaceKind::Graph { .. } => {}
    }
    for r in 1..=space.diameter().max(1) {
        out.push((format!("net(r={r})"), greedy_net_cover(space, r)?));
    }
    Ok(out)
}

/// Upper bound on `ad(λ; D)` from a sweep over the standard generators.
///
/// Ties between feasible covers are broken by smaller mesh, then by the
/// lexicographic element encoding, so the result does not depend on the
/// order in which candidates are evaluated.
pub fn dim_upper(space: &FiniteMetricSpace, query: DimQuery) -> Result<DimEstimate, DimensionError> {
    if query.mesh_cap == 0 {
        return Err(DimensionError::ZeroMeshCap);
    }
    if query.mesh_cap < query.lambda {
        return Err(DimensionError::MeshBelowLambda { lambda: query.lambda, mesh_cap: query.mesh_cap });
    }
    let surrogate = space.size() > DEFAULT_ORACLE_CAP;
    let pool = candidates(space)?;
    let examined = pool.len();

    let feasible: Vec<(u32, u32, String, Cover)> = pool
        .into_par_iter()
        .map(|(label, cover)| -> Result<Option<_>, CoverError> {
            let cover_mesh = mesh(space, &cover);
            if cover_mesh > query.mesh_cap {
                return Ok(None);
            }
            let lebesgue_ok = if surrogate {
                ball_lebesgue(space, &cover).reaches_everywhere(query.lambda)
            } else {
                exact_lebesgue_at_least(space, &cover, query.lambda)?.holds
            };
            Ok(lebesgue_ok.then(|| (multiplicity(space, &cover), cover_mesh, label, cover)))
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();

    let best = feasible
        .into_iter()
        .min_by(|a, b| (a.0, a.1, a.3.elements()).cmp(&(b.0, b.1, b.3.elements())));
    Ok(match best {
        Some((m, _, label, cover)) => DimEstimate {
            query,
            upper: Some(m - 1),
            exact: None,
            witness_cover: Some(cover),
            generator: Some(label),
            surrogate,
            candidates_examined: examined,
        },
        None => DimEstimate {
            query,
            upper: None,
            exact: None,
            witness_cover: None,
            generator: None,
            surrogate,
            candidates_examined: examined,
        },
    })
}

struct Candidate {
    points: u16,
    /// Bitmask of the maximal cliques this candidate contains.
    cliques: u64,
}

struct Search<'a> {
    pool: &'a [Candidate],
    by_clique: Vec<Vec<usize>>,
    size: usize,
    best: u32,
}

impl Search<'_> {
    fn run(&mut self, uncovered: u64, counts: &mut [u32; TINY_CAP], current: u32) {
        if uncovered == 0 {
            self.best = self.best.min(current);
            return;
        }
        let clique = uncovered.trailing_zeros() as usize;
        for idx in 0..self.by_clique[clique].len() {
            let cand = &self.pool[self.by_clique[clique][idx]];
            let mut worst = current;
            for (p, count) in counts.iter().enumerate().take(self.size) {
                if cand.points & (1 << p) != 0 {
                    worst = worst.max(count + 1);
                }
            }
            if worst >= self.best {
                continue;
            }
            let points = cand.points;
            let covers = cand.cliques;
            for (p, count) in counts.iter_mut().enumerate().take(self.size) {
                if points & (1 << p) != 0 {
                    *count += 1;
                }
            }
            self.run(uncovered & !covers, counts, worst);
            for (p, count) in counts.iter_mut().enumerate().take(self.size) {
                if points & (1 << p) != 0 {
                    *count -= 1;
                }
            }
        }
    }
}

/// Exact `ad(λ; D)` by branch and bound, for spaces of at most [`TINY_CAP`] points.
///
/// A cover has Lebesgue number ≥ λ exactly when each maximal clique of the
/// threshold graph `G_λ` lies in some element (and then it covers every
/// point). Shrinking an element to the union of the cliques it contains
/// keeps the cover feasible and never raises multiplicity, so the pool is
/// the diameter-bounded unions of maximal cliques. The search branches on
/// which pool set covers the lowest uncovered clique.
pub fn dim_exact_tiny(space: &FiniteMetricSpace, query: DimQuery) -> Result<u32, DimensionError> {
    let size = space.size();
    if size > TINY_CAP {
        return Err(DimensionError::TooLarge { size, cap: TINY_CAP });
    }
    if query.mesh_cap == 0 {
        return Err(DimensionError::ZeroMeshCap);
    }
    if space.diameter() <= query.mesh_cap {
        return Ok(0);
    }
    let cliques = threshold_maximal_cliques(space, query.lambda)?;
    let diameter = |mask: u16| -> u32 {
        let pts: Vec<PointId> = (0..size as u32).filter(|&p| mask & (1 << p) != 0).map(PointId).collect();
        space.set_diameter(&pts).unwrap_or(0)
    };
    if cliques.iter().any(|&c| diameter(c as u16) > query.mesh_cap) {
        return Err(DimensionError::MeshBelowLambda { lambda: query.lambda, mesh_cap: query.mesh_cap });
    }

    let mut pool: Vec<Candidate> = (1u16..(1 << size))
        .filter_map(|mask| {
            let contained = cliques
                .iter()
                .enumerate()
                .filter(|(_, &c)| (c as u16) & !mask == 0)
                .fold((0u64, 0u16), |(bits, union), (i, &c)| (bits | 1 << i, union | c as u16));
            let (bits, union) = contained;
            (bits != 0 && union == mask && diameter(mask) <= query.mesh_cap)
                .then_some(Candidate { points: mask, cliques: bits })
        })
        .collect();
    // cover many cliques first so good incumbents appear early
    pool.sort_by_key(|c| (std::cmp::Reverse(c.cliques.count_ones()), c.points));

    let mut by_clique = vec![Vec::new(); cliques.len()];
    for (idx, cand) in pool.iter().enumerate() {
        for (i, list) in by_clique.iter_mut().enumerate() {
            if cand.cliques & (1 << i) != 0 {
                list.push(idx);
            }
        }
    }

    // cliques as their own elements are feasible; start from that multiplicity + 1
    let mut incumbent = [0u32; TINY_CAP];
    for &c in &cliques {
        for (p, count) in incumbent.iter_mut().enumerate().take(size) {
            if c & (1 << p) != 0 {
                *count += 1;
            }
        }
    }
    let mut search = Search {
        pool: &pool,
        by_clique,
        size,
        best: incumbent.iter().copied().max().unwrap_or(1) + 1,
    };
    let all = if cliques.len() == 64 { u64::MAX } else { (1u64 << cliques.len()) - 1 };
    search.run(all, &mut [0; TINY_CAP], 0);
    Ok(search.best - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub n: u32,
    pub m: u32,
    pub bound: f64,
    pub measured_sup_eta: num_rational::BigRational,
    pub measured_sup_zeta: num_rational::BigRational,
    pub sup_pair: (PointId, PointId),
    /// Every audited pair satisfied the full inequality chain.
    pub audit_ok: bool,
}

/// The cover used at scale `n` under the linear rule `ℓ(n) = coeff · n`,
/// picked by space kind.
pub fn scale_cover(space: &FiniteMetricSpace, ell: u32) -> Result<Cover, CoverError> {
    match space.kind() {
        SpaceKind::Grid { .. } => interval_cover(space, ell),
        SpaceKind::Tree { .. } => tree_annuli_cover(space, ell),
        SpaceKind::Graph { .. } => greedy_net_cover(space, ell),
    }
}

pub fn scale_family(
    space: &FiniteMetricSpace,
    coeff: u32,
    n_list: &[u32],
) -> Result<BTreeMap<u32, Cover>, CoverError> {
    n_list
        .iter()
        .map(|&n| Ok((n, scale_cover(space, coeff.saturating_mul(n))?)))
        .collect()
}

/// For each `n`: the multiplicity `m_n` of its cover, the bound
/// `2 (1 − m_n^{−2R/n})`, and the measured variation sup.
pub fn bound_curve(
    space: &FiniteMetricSpace,
    family: &BTreeMap<u32, Cover>,
    r: u32,
    n_list: &[u32],
) -> Result<Vec<BoundRow>, DimensionError> {
    n_list
        .iter()
        .map(|&n| {
            let cover = family.get(&n).ok_or(DimensionError::MissingCover(n))?;
            let ctx = WitnessContext::new(space, cover);
            let report = ctx.report(WitnessParams::new(n, r), Mode::Bound)?;
            Ok(BoundRow {
                n,
                m: report.multiplicity,
                bound: theoretical_bound(report.multiplicity, r, n),
                measured_sup_eta: report.measured_sup_eta,
                measured_sup_zeta: report.measured_sup_zeta,
                sup_pair: (report.worst_pair.x, report.worst_pair.y),
                audit_ok: report.all_pairs_ok,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn path(n: u32) -> FiniteMetricSpace {
        FiniteMetricSpace::grid_space(&[n]).unwrap()
    }

    #[test]
    fn upper_is_zero_when_cap_exceeds_diameter() {
        let p12 = path(12);
        let est = dim_upper(&p12, DimQuery::new(3, 11)).unwrap();
        assert_eq!(est.upper, Some(0));
        assert_eq!(est.generator.as_deref(), Some("whole"));
    }

    #[test]
    fn upper_examples() {
        let p12 = path(12);
        let est = dim_upper(&p12, DimQuery::new(2, 7)).unwrap();
        assert!(est.upper.unwrap() <= 1);
        let cover = est.witness_cover.unwrap();
        assert!(mesh(&p12, &cover) <= 7);
        assert!(exact_lebesgue_at_least(&p12, &cover, 2).unwrap().holds);
        assert!(!est.surrogate);

        let g = FiniteMetricSpace::grid_space(&[8, 8]).unwrap();
        let est = dim_upper(&g, DimQuery::new(1, 7)).unwrap();
        assert!(est.upper.unwrap() <= 3);
        assert!(!est.surrogate);

        let p80 = path(80);
        let est = dim_upper(&p80, DimQuery::new(4, 20)).unwrap();
        assert!(est.surrogate);
        assert_eq!(est.upper, Some(1));
        assert!(ball_lebesgue(&p80, est.witness_cover.as_ref().unwrap()).reaches_everywhere(4));
    }

    #[test]
    fn upper_preconditions() {
        let p5 = path(5);
        assert_eq!(dim_upper(&p5, DimQuery::new(1, 0)).unwrap_err(), DimensionError::ZeroMeshCap);
        assert!(matches!(
            dim_upper(&p5, DimQuery::new(3, 2)),
            Err(DimensionError::MeshBelowLambda { .. })
        ));
    }

    #[test]
    fn upper_reports_absence() {
        // a star: nets of radius 1 are the whole space, λ = 1 sets need diameter-2 elements
        let star = FiniteMetricSpace::from_graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let est = dim_upper(&star, DimQuery::new(1, 1)).unwrap();
        assert_eq!(est.upper, None);
        assert!(est.witness_cover.is_none());
    }

    #[test]
    fn exact_examples() {
        assert_eq!(dim_exact_tiny(&path(5), DimQuery::new(1, 2)).unwrap(), 1);
        assert_eq!(dim_exact_tiny(&path(5), DimQuery::new(3, 4)).unwrap(), 0);
        assert_eq!(dim_exact_tiny(&path(1), DimQuery::new(0, 1)).unwrap(), 0);
        assert!(matches!(
            dim_exact_tiny(&path(11), DimQuery::new(1, 2)),
            Err(DimensionError::TooLarge { size: 11, cap: 10 })
        ));
    }

    #[test]
    fn exact_on_cycle() {
        // C6 with λ = 1, D = 2: arcs of three vertices around the cycle
        let c6 = FiniteMetricSpace::from_graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
        assert_eq!(dim_exact_tiny(&c6, DimQuery::new(1, 2)).unwrap(), 1);
        // D = 1 forces each edge to be its own element: every vertex in two edges
        assert_eq!(dim_exact_tiny(&c6, DimQuery::new(1, 1)).unwrap(), 1);
        let p10 = path(10);
        assert_eq!(dim_exact_tiny(&p10, DimQuery::new(2, 3)).unwrap(), 1);
    }

    #[test]
    fn bound_curve_constant_family() {
        let p48 = path(48);
        let n_list = [2, 4, 8];
        let family = scale_family(&p48, 3, &n_list).unwrap();
        let rows = bound_curve(&p48, &family, 1, &n_list).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert_eq!(row.bound, theoretical_bound(row.m, 1, row.n));
            assert!(row.measured_sup_zeta <= row.measured_sup_eta);
            assert!(row.measured_sup_eta.to_f64().unwrap() <= row.bound + 1e-9);
            assert!(row.audit_ok);
        }
        assert!(matches!(
            bound_curve(&p48, &family, 1, &[16]),
            Err(DimensionError::MissingCover(16))
        ));
    }

    #[test]
    fn trivial_family_has_zero_bound() {
        let p10 = path(10);
        let family: BTreeMap<u32, Cover> = [2, 3].into_iter().map(|n| (n, whole_space_cover(&p10))).collect();
        let rows = bound_curve(&p10, &family, 1, &[2, 3]).unwrap();
        assert!(rows.iter().all(|r| r.bound == 0.0 && r.m == 1));
    }
}
