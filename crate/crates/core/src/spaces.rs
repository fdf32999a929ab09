//! Finite metric spaces with exact integer (graph) metrics.
//!
//! Every space is realized as a connected unweighted graph and stores its full
//! all-pairs distance table, so distance, ball and diameter queries are exact
//! table lookups.

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default point budget for generated and ingested spaces.
pub const DEFAULT_POINT_CAP: usize = 5_000;

/// Dense index of a point, in `[0, size)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub u32);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for PointId {
    fn from(id: u32) -> Self {
        PointId(id)
    }
}

/// A closed ball `B(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallSpec {
    pub center: PointId,
    pub radius: u32,
}

impl BallSpec {
    pub fn new(center: impl Into<PointId>, radius: u32) -> Self {
        BallSpec { center: center.into(), radius }
    }
}

/// How a space was generated. Kept so the space can be re-serialized and so
/// cover generators can check what they are working on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceKind {
    /// Arbitrary connected graph; edges are canonical (`a < b`, sorted, deduplicated).
    Graph { edges: Vec<(PointId, PointId)> },
    /// Grid graph; ids are row-major with the last axis varying fastest.
    Grid { dims: Vec<u32> },
    /// Complete `arity`-ary rooted tree in breadth-first numbering, root `0`.
    Tree { arity: u32, depth: u32 },
}

impl SpaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceKind::Graph { .. } => "graph",
            SpaceKind::Grid { .. } => "grid",
            SpaceKind::Tree { .. } => "tree",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("a space needs at least one point")]
    Empty,
    #[error("edge endpoint {id} is out of range for {size} vertices")]
    OutOfRange { id: u32, size: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(PointId),
    #[error("graph is disconnected: vertices {0} and {1} are mutually unreachable")]
    Disconnected(PointId, PointId),
    #[error("space would have {requested} points, exceeding the point cap of {cap}")]
    TooLarge { requested: u128, cap: usize },
    #[error("grid axis {axis} has length 0; every dimension must be at least 1")]
    ZeroDimension { axis: usize },
    #[error("a grid needs at least one axis")]
    NoAxes,
    #[error("tree arity must be at least 1")]
    ZeroArity,
    #[error("the diameter of an empty set is undefined")]
    EmptySet,
    #[error("point {id} does not belong to a space of {size} points")]
    UnknownPoint { id: u32, size: usize },
}

/// A finite metric space with an integer-valued graph metric.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    kind: SpaceKind,
    size: usize,
    dist: Vec<u32>,
    diameter: u32,
}

impl FiniteMetricSpace {
    /// Shortest-path metric of a connected unweighted graph.
    pub fn from_graph(vertex_count: usize, edges: &[(u32, u32)]) -> Result<Self, SpaceError> {
        Self::from_graph_capped(vertex_count, edges, DEFAULT_POINT_CAP)
    }

    pub fn from_graph_capped(
        vertex_count: usize,
        edges: &[(u32, u32)],
        cap: usize,
    ) -> Result<Self, SpaceError> {
        check_cap(vertex_count as u128, cap)?;
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            for id in [a, b] {
                if id as usize >= vertex_count {
                    return Err(SpaceError::OutOfRange { id, size: vertex_count });
                }
            }
            if a == b {
                return Err(SpaceError::SelfLoop(PointId(a)));
            }
            canonical.push((PointId(a.min(b)), PointId(a.max(b))));
        }
        canonical.sort_unstable();
        canonical.dedup();
        let kind = SpaceKind::Graph { edges: canonical.clone() };
        Self::build(kind, vertex_count, &canonical)
    }

    /// Grid graph on `∏ dims` points. Its metric is the ℓ1 distance between
    /// coordinate tuples.
    pub fn grid_space(dims: &[u32]) -> Result<Self, SpaceError> {
        Self::grid_space_capped(dims, DEFAULT_POINT_CAP)
    }

    pub fn grid_space_capped(dims: &[u32], cap: usize) -> Result<Self, SpaceError> {
        if dims.is_empty() {
            return Err(SpaceError::NoAxes);
        }
        if let Some(axis) = dims.iter().position(|&d| d == 0) {
            return Err(SpaceError::ZeroDimension { axis });
        }
        let requested = dims
            .iter()
            .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
            .unwrap_or(u128::MAX);
        check_cap(requested, cap)?;
        let size = requested as usize;
        let strides = grid_strides(dims);
        let mut edges = Vec::new();
        for id in 0..size {
            for (axis, &stride) in strides.iter().enumerate() {
                let coord = (id / stride) % dims[axis] as usize;
                if coord + 1 < dims[axis] as usize {
                    edges.push((PointId(id as u32), PointId((id + stride) as u32)));
                }
            }
        }
        edges.sort_unstable();
        Self::build(SpaceKind::Grid { dims: dims.to_vec() }, size, &edges)
    }

    /// Complete rooted `arity`-ary tree of the given depth; root has id 0 and
    /// the children of `v` are `v·arity + 1 ..= v·arity + arity`.
    pub fn tree_space(arity: u32, depth: u32) -> Result<Self, SpaceError> {
        Self::tree_space_capped(arity, depth, DEFAULT_POINT_CAP)
    }

    pub fn tree_space_capped(arity: u32, depth: u32, cap: usize) -> Result<Self, SpaceError> {
        if arity == 0 {
            return Err(SpaceError::ZeroArity);
        }
        let mut requested: u128 = 0;
        let mut level: u128 = 1;
        for _ in 0..=depth {
            requested = requested.saturating_add(level);
            level = level.saturating_mul(arity as u128);
            if requested > cap as u128 {
                break;
            }
        }
        check_cap(requested, cap)?;
        let size = requested as usize;
        let edges: Vec<_> = (1..size)
            .map(|v| (PointId(((v - 1) / arity as usize) as u32), PointId(v as u32)))
            .collect();
        Self::build(SpaceKind::Tree { arity, depth }, size, &edges)
    }

    fn build(kind: SpaceKind, size: usize, edges: &[(PointId, PointId)]) -> Result<Self, SpaceError> {
        if size == 0 {
            return Err(SpaceError::Empty);
        }
        let mut adjacency = vec![Vec::new(); size];
        for &(a, b) in edges {
            adjacency[a.index()].push(b.0);
            adjacency[b.index()].push(a.0);
        }

        let mut dist = vec![u32::MAX; size * size];
        dist.par_chunks_mut(size).enumerate().for_each(|(source, row)| {
            bfs_into(&adjacency, source, row);
        });
        if let Some(unreached) = dist[..size].iter().position(|&d| d == u32::MAX) {
            return Err(SpaceError::Disconnected(PointId(0), PointId(unreached as u32)));
        }
        let diameter = dist.par_iter().copied().max().unwrap_or(0);
        Ok(FiniteMetricSpace { kind, size, dist, diameter })
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    /// Number of points.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.size as u32).map(PointId)
    }

    pub fn contains(&self, p: PointId) -> bool {
        p.index() < self.size
    }

    pub fn check_point(&self, p: PointId) -> Result<(), SpaceError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(SpaceError::UnknownPoint { id: p.0, size: self.size })
        }
    }

    #[inline]
    pub fn dist(&self, x: PointId, y: PointId) -> u32 {
        self.dist[x.index() * self.size + y.index()]
    }

    /// Distance row from `x` to every point, indexed by point id.
    #[inline]
    pub fn row(&self, x: PointId) -> &[u32] {
        let start = x.index() * self.size;
        &self.dist[start..start + self.size]
    }

    pub fn diameter(&self) -> u32 {
        self.diameter
    }

    pub fn eccentricity(&self, x: PointId) -> u32 {
        self.row(x).iter().copied().max().unwrap_or(0)
    }

    /// Closed ball `{ y : d(center, y) ≤ radius }`, in ascending id order.
    pub fn ball(&self, spec: BallSpec) -> Vec<PointId> {
        self.row(spec.center)
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d <= spec.radius)
            .map(|(y, _)| PointId(y as u32))
            .collect()
    }

    /// Maximum pairwise distance within `pts`.
    pub fn set_diameter(&self, pts: &[PointId]) -> Result<u32, SpaceError> {
        if pts.is_empty() {
            return Err(SpaceError::EmptySet);
        }
        for &p in pts {
            self.check_point(p)?;
        }
        let mut best = 0;
        for (i, &a) in pts.iter().enumerate() {
            let row = self.row(a);
            for &b in &pts[i + 1..] {
                best = best.max(row[b.index()]);
            }
        }
        Ok(best)
    }

    /// Coordinates of a grid point, or `None` for non-grid spaces.
    pub fn grid_coords(&self, p: PointId) -> Option<Vec<u32>> {
        let SpaceKind::Grid { dims } = &self.kind else {
            return None;
        };
        let strides = grid_strides(dims);
        Some(
            strides
                .iter()
                .zip(dims)
                .map(|(&s, &d)| ((p.index() / s) % d as usize) as u32)
                .collect(),
        )
    }

    /// Parent of a tree vertex; `None` for the root or non-tree spaces.
    pub fn tree_parent(&self, v: PointId) -> Option<PointId> {
        match self.kind {
            SpaceKind::Tree { arity, .. } if v.0 > 0 => Some(PointId((v.0 - 1) / arity)),
            _ => None,
        }
    }

    /// The edges of the underlying graph (pairs at distance 1), canonical order.
    pub fn edges(&self) -> Vec<(PointId, PointId)> {
        let mut out = Vec::new();
        for a in self.points() {
            let row = self.row(a);
            for (b, &d) in row.iter().enumerate().skip(a.index() + 1) {
                if d == 1 {
                    out.push((a, PointId(b as u32)));
                }
            }
        }
        out
    }
}

fn check_cap(requested: u128, cap: usize) -> Result<(), SpaceError> {
    if requested > cap as u128 {
        Err(SpaceError::TooLarge { requested, cap })
    } else {
        Ok(())
    }
}

/// Row-major strides, last axis fastest.
pub(crate) fn grid_strides(dims: &[u32]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for axis in (0..dims.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * dims[axis + 1] as usize;
    }
    strides
}

fn bfs_into(adjacency: &[Vec<u32>], source: usize, row: &mut [u32]) {
    let mut queue = VecDeque::new();
    row[source] = 0;
    queue.push_back(source as u32);
    while let Some(u) = queue.pop_front() {
        let next = row[u as usize] + 1;
        for &v in &adjacency[u as usize] {
            if row[v as usize] == u32::MAX {
                row[v as usize] = next;
                queue.push_back(v);
            }
        }
    }
}
