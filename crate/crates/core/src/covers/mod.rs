//! Indexed covers `U = {U_i}` of a finite metric space and their statistics.

mod generators;
mod lebesgue;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spaces::{FiniteMetricSpace, PointId, SpaceError};

pub use generators::{greedy_net, greedy_net_cover, interval_cover, tree_annuli_cover, whole_space_cover};
pub use lebesgue::{
    exact_lebesgue_at_least, exact_lebesgue_at_least_capped, exact_lebesgue_number,
    threshold_maximal_cliques, LebesgueVerdict, DEFAULT_ORACLE_CAP,
};

/// Index of a cover element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("a cover needs at least one element")]
    NoElements,
    #[error("element {0} is empty")]
    EmptyElement(ElementId),
    #[error("element {element} references point {point}, which is outside the space")]
    UnknownPoint { element: ElementId, point: u32 },
    #[error("point {0} is not covered by any element")]
    Uncovered(PointId),
    #[error("basepoint {basepoint} of element {element} does not lie in the element")]
    BasepointOutside { element: ElementId, basepoint: PointId },
    #[error("expected {expected} basepoints (one per element), found {found}")]
    BasepointCount { expected: usize, found: usize },
    #[error("this generator needs a {expected} space, got a {found} space")]
    WrongSpaceKind { expected: &'static str, found: &'static str },
    #[error("generator parameter `{name}` must be at least 1")]
    ZeroParameter { name: &'static str },
    #[error(
        "exact Lebesgue oracle is limited to {cap} points (space has {size}); use ball_lebesgue instead"
    )]
    OracleCap { size: usize, cap: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A validated cover: every point is covered, no element is empty, and every
/// element carries a basepoint inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    elements: Vec<Vec<PointId>>,
    basepoints: Vec<PointId>,
}

impl Cover {
    /// Validates `elements` and picks 1-center basepoints.
    pub fn new(space: &FiniteMetricSpace, elements: Vec<Vec<PointId>>) -> Result<Self, CoverError> {
        let elements = normalize(space, elements)?;
        let basepoints = choose_basepoints(space, &elements);
        Ok(Cover { elements, basepoints })
    }

    pub fn with_basepoints(
        space: &FiniteMetricSpace,
        elements: Vec<Vec<PointId>>,
        basepoints: Vec<PointId>,
    ) -> Result<Self, CoverError> {
        let elements = normalize(space, elements)?;
        if basepoints.len() != elements.len() {
            return Err(CoverError::BasepointCount {
                expected: elements.len(),
                found: basepoints.len(),
            });
        }
        for (i, (members, &b)) in elements.iter().zip(&basepoints).enumerate() {
            if members.binary_search(&b).is_err() {
                return Err(CoverError::BasepointOutside { element: ElementId(i as u32), basepoint: b });
            }
        }
        Ok(Cover { elements, basepoints })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element_ids(&self) -> impl Iterator<Item = ElementId> {
        (0..self.elements.len() as u32).map(ElementId)
    }

    /// Members of `U_i`, ascending.
    pub fn element(&self, i: ElementId) -> &[PointId] {
        &self.elements[i.index()]
    }

    pub fn elements(&self) -> &[Vec<PointId>] {
        &self.elements
    }

    pub fn basepoint(&self, i: ElementId) -> PointId {
        self.basepoints[i.index()]
    }

    pub fn basepoints(&self) -> &[PointId] {
        &self.basepoints
    }

    pub fn contains(&self, i: ElementId, p: PointId) -> bool {
        self.elements[i.index()].binary_search(&p).is_ok()
    }
}

fn normalize(
    space: &FiniteMetricSpace,
    mut elements: Vec<Vec<PointId>>,
) -> Result<Vec<Vec<PointId>>, CoverError> {
    if elements.is_empty() {
        return Err(CoverError::NoElements);
    }
    let mut covered = vec![false; space.size()];
    for (i, members) in elements.iter_mut().enumerate() {
        let element = ElementId(i as u32);
        if members.is_empty() {
            return Err(CoverError::EmptyElement(element));
        }
        members.sort_unstable();
        members.dedup();
        for &p in members.iter() {
            if !space.contains(p) {
                return Err(CoverError::UnknownPoint { element, point: p.0 });
            }
            covered[p.index()] = true;
        }
    }
    if let Some(p) = covered.iter().position(|&c| !c) {
        return Err(CoverError::Uncovered(PointId(p as u32)));
    }
    Ok(elements)
}

/// 1-center of each element: the member minimizing the maximum distance to
/// the other members, smallest id on ties.
pub fn choose_basepoints(space: &FiniteMetricSpace, elements: &[Vec<PointId>]) -> Vec<PointId> {
    elements
        .par_iter()
        .map(|members| {
            members
                .iter()
                .map(|&c| {
                    let row = space.row(c);
                    let radius = members.iter().map(|p| row[p.index()]).max().unwrap_or(0);
                    (radius, c)
                })
                .min()
                .map(|(_, c)| c)
                .expect("elements are nonempty")
        })
        .collect()
}

/// `m(U)`: the largest number of elements sharing a point.
pub fn multiplicity(space: &FiniteMetricSpace, cover: &Cover) -> u32 {
    let mut count = vec![0u32; space.size()];
    for members in cover.elements() {
        for p in members {
            count[p.index()] += 1;
        }
    }
    count.into_iter().max().unwrap_or(0)
}

/// Largest element diameter.
pub fn mesh(space: &FiniteMetricSpace, cover: &Cover) -> u32 {
    cover
        .elements()
        .par_iter()
        .map(|members| space.set_diameter(members).expect("elements are nonempty and in range"))
        .max()
        .unwrap_or(0)
}

/// For every point `x`, the elements containing `x` together with the largest
/// radius `r` such that `B(x, r) ⊆ U_i`.
///
/// Radii are capped at `diam(X)`: only an element equal to the whole space
/// reaches the cap, and such an element contains every ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InscribedRadii {
    per_point: Vec<Vec<(ElementId, u32)>>,
    cap: u32,
}

impl InscribedRadii {
    pub fn new(space: &FiniteMetricSpace, cover: &Cover) -> Self {
        let cap = space.diameter();
        let per_element: Vec<Vec<(PointId, u32)>> = cover
            .elements()
            .par_iter()
            .map(|members| {
                let mut inside = vec![false; space.size()];
                for p in members {
                    inside[p.index()] = true;
                }
                members
                    .iter()
                    .map(|&x| {
                        let nearest_outside = space
                            .row(x)
                            .iter()
                            .zip(&inside)
                            .filter(|(_, &inside)| !inside)
                            .map(|(&d, _)| d)
                            .min();
                        (x, nearest_outside.map_or(cap, |d| d - 1))
                    })
                    .collect()
            })
            .collect();

        let mut per_point = vec![Vec::new(); space.size()];
        for (i, radii) in per_element.into_iter().enumerate() {
            for (x, r) in radii {
                per_point[x.index()].push((ElementId(i as u32), r));
            }
        }
        InscribedRadii { per_point, cap }
    }

    /// Elements containing `x`, each with its inscribed radius at `x`.
    pub fn at(&self, x: PointId) -> &[(ElementId, u32)] {
        &self.per_point[x.index()]
    }

    /// `{ i : B(x, k) ⊆ U_i }`, ascending.
    pub fn containing_ball(&self, x: PointId, k: u32) -> Vec<ElementId> {
        let k = k.min(self.cap);
        self.per_point[x.index()]
            .iter()
            .filter(|&&(_, r)| r >= k)
            .map(|&(i, _)| i)
            .collect()
    }

    /// Per-point ball-Lebesgue radius at `x`.
    pub fn best(&self, x: PointId) -> u32 {
        self.per_point[x.index()].iter().map(|&(_, r)| r).max().expect("cover is valid")
    }

    /// The cap applied to radii, `diam(X)`.
    pub fn cap(&self) -> u32 {
        self.cap
    }
}

/// Ball-criterion Lebesgue radii.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallLebesgue {
    pub per_point: Vec<u32>,
    pub global: u32,
    /// Smallest id attaining `global`.
    pub min_location: PointId,
    /// `diam(X)`; a radius equal to this means every radius fits.
    pub saturation: u32,
}

impl BallLebesgue {
    /// True when `S_x(k)` is nonempty.
    pub fn reaches(&self, x: PointId, k: u32) -> bool {
        self.per_point[x.index()] >= k.min(self.saturation)
    }

    /// Whether every point reaches radius `k`.
    pub fn reaches_everywhere(&self, k: u32) -> bool {
        self.global >= k.min(self.saturation)
    }
}

pub fn ball_lebesgue(space: &FiniteMetricSpace, cover: &Cover) -> BallLebesgue {
    ball_lebesgue_from(&InscribedRadii::new(space, cover), space)
}

pub(crate) fn ball_lebesgue_from(radii: &InscribedRadii, space: &FiniteMetricSpace) -> BallLebesgue {
    let per_point: Vec<u32> = space.points().map(|x| radii.best(x)).collect();
    let (global, min_location) = per_point
        .iter()
        .enumerate()
        .map(|(x, &r)| (r, PointId(x as u32)))
        .min()
        .expect("space is nonempty");
    BallLebesgue { per_point, global, min_location, saturation: radii.cap() }
}

/// Measured statistics of a cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverStats {
    pub multiplicity: u32,
    pub mesh: u32,
    pub ball_lebesgue: BallLebesgue,
    /// Largest λ passing the exact check, when the space is within the oracle cap.
    pub exact_lebesgue: Option<u32>,
}

impl CoverStats {
    pub fn measure(space: &FiniteMetricSpace, cover: &Cover) -> Self {
        let exact_lebesgue = if space.size() <= DEFAULT_ORACLE_CAP {
            exact_lebesgue_number(space, cover).ok()
        } else {
            None
        };
        CoverStats {
            multiplicity: multiplicity(space, cover),
            mesh: mesh(space, cover),
            ball_lebesgue: ball_lebesgue(space, cover),
            exact_lebesgue,
        }
    }
}
