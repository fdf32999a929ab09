//! Standard cover families. Generators only build covers; their Lebesgue
//! quality is always measured afterwards.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::spaces::{grid_strides, BallSpec, FiniteMetricSpace, PointId, SpaceKind};

use super::{Cover, CoverError};

fn canonical(space: &FiniteMetricSpace, mut elements: Vec<Vec<PointId>>) -> Result<Cover, CoverError> {
    for members in &mut elements {
        members.sort_unstable();
    }
    elements.sort();
    elements.dedup();
    Cover::new(space, elements)
}

/// The single-element cover `{X}`.
pub fn whole_space_cover(space: &FiniteMetricSpace) -> Cover {
    Cover::new(space, vec![space.points().collect()]).expect("the whole space covers itself")
}

/// Intervals tiling `[0, len)` with period `2h`, shifted by `offset`.
fn axis_family(len: u64, h: u64, offset: u64) -> Vec<Range<u64>> {
    let period = 2 * h;
    let mut out = Vec::new();
    let mut start = offset % period;
    if start > 0 {
        out.push(0..start.min(len));
    }
    while start < len {
        out.push(start..(start + period).min(len));
        start += period;
    }
    out
}

/// Product-of-intervals cover of a grid.
///
/// Per axis there are two partitions into intervals of length `2h` with
/// `h = 2ℓ − 1`, the second shifted by `h`. Every point sits at least `ℓ − 1`
/// steps inside an interval of one of the two partitions, so on a path the
/// per-point ball-Lebesgue radius is at least `ℓ − 1`, the multiplicity is at
/// most 2 and the mesh at most `4ℓ − 3`. On a `d`-dimensional grid the cover
/// is the union over all `2^d` choices of one partition per axis, with
/// multiplicity at most `2^d`.
pub fn interval_cover(space: &FiniteMetricSpace, half_length: u32) -> Result<Cover, CoverError> {
    let SpaceKind::Grid { dims } = space.kind() else {
        return Err(CoverError::WrongSpaceKind { expected: "grid", found: space.kind().name() });
    };
    if half_length == 0 {
        return Err(CoverError::ZeroParameter { name: "half_length" });
    }
    let h = 2 * half_length as u64 - 1;
    let axes: Vec<Vec<Vec<Range<u64>>>> = dims
        .iter()
        .map(|&len| {
            let mut families = vec![axis_family(len as u64, h, 0), axis_family(len as u64, h, h)];
            families.dedup();
            families
        })
        .collect();

    let strides = grid_strides(dims);
    let mut elements = Vec::new();
    // one family choice per axis, odometer style
    let mut choice = vec![0usize; axes.len()];
    loop {
        let mut boxes: Vec<Vec<u64>> = vec![vec![0]];
        for (axis, families) in axes.iter().enumerate() {
            let stride = strides[axis] as u64;
            let mut next = Vec::new();
            for partial in &boxes {
                for interval in &families[choice[axis]] {
                    next.push(
                        partial
                            .iter()
                            .flat_map(|&base| interval.clone().map(move |c| base + c * stride))
                            .collect(),
                    );
                }
            }
            boxes = next;
        }
        elements.extend(
            boxes
                .into_iter()
                .map(|ids| ids.into_iter().map(|id| PointId(id as u32)).collect::<Vec<_>>()),
        );

        let mut axis = 0;
        loop {
            if axis == axes.len() {
                return canonical(space, elements);
            }
            choice[axis] += 1;
            if choice[axis] < axes[axis].len() {
                break;
            }
            choice[axis] = 0;
            axis += 1;
        }
    }
}

/// Two families of depth bands on a rooted tree, split into connected
/// components. For offset `o ∈ {0, ℓ}` a vertex at depth `t` lies in band
/// `⌊(t − o + 2ℓ) / 2ℓ⌋`; each point lies in exactly one component per
/// family, so the multiplicity is at most 2.
pub fn tree_annuli_cover(space: &FiniteMetricSpace, width: u32) -> Result<Cover, CoverError> {
    if !matches!(space.kind(), SpaceKind::Tree { .. }) {
        return Err(CoverError::WrongSpaceKind { expected: "tree", found: space.kind().name() });
    }
    if width == 0 {
        return Err(CoverError::ZeroParameter { name: "width" });
    }
    let root = PointId(0);
    let band_width = 2 * width as u64;
    let mut elements = Vec::new();
    for offset in [0, width as u64] {
        let band = |v: PointId| (space.dist(root, v) as u64 + band_width - offset) / band_width;
        // a band component is named by its topmost vertex
        let mut components: BTreeMap<PointId, Vec<PointId>> = BTreeMap::new();
        for v in space.points() {
            let b = band(v);
            let mut top = v;
            while let Some(parent) = space.tree_parent(top) {
                if band(parent) != b {
                    break;
                }
                top = parent;
            }
            components.entry(top).or_default().push(v);
        }
        elements.extend(components.into_values());
    }
    canonical(space, elements)
}

/// Greedy `r`-net: scanning ids ascending, keep a point when it is farther
/// than `r` from every point kept so far.
pub fn greedy_net(space: &FiniteMetricSpace, radius: u32) -> Vec<PointId> {
    let mut net: Vec<PointId> = Vec::new();
    for p in space.points() {
        let row = space.row(p);
        if net.iter().all(|c| row[c.index()] > radius) {
            net.push(p);
        }
    }
    net
}

/// Balls `B(c, 2r)` around a greedy `r`-net.
pub fn greedy_net_cover(space: &FiniteMetricSpace, radius: u32) -> Result<Cover, CoverError> {
    if radius == 0 {
        return Err(CoverError::ZeroParameter { name: "radius" });
    }
    let reach = radius.saturating_mul(2);
    let elements = greedy_net(space, radius)
        .into_iter()
        .map(|c| space.ball(BallSpec { center: c, radius: reach }))
        .collect();
    canonical(space, elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::{ball_lebesgue, mesh, multiplicity};

    #[test]
    fn interval_cover_on_paths() {
        let p12 = FiniteMetricSpace::grid_space(&[12]).unwrap();
        let cover = interval_cover(&p12, 3).unwrap();
        assert_eq!(multiplicity(&p12, &cover), 2);
        let bl = ball_lebesgue(&p12, &cover);
        assert!(bl.per_point[6] >= 2);
        assert!(bl.global >= 2);
        assert!(mesh(&p12, &cover) <= 9);

        let families: Vec<Vec<u32>> = cover
            .elements()
            .iter()
            .map(|e| vec![e[0].0, e[e.len() - 1].0])
            .collect();
        assert_eq!(families, vec![vec![0, 4], vec![0, 9], vec![5, 11], vec![10, 11]]);
    }

    #[test]
    fn interval_cover_guarantee_holds_for_many_lengths() {
        for n in [1u32, 2, 5, 17, 48, 96] {
            let path = FiniteMetricSpace::grid_space(&[n]).unwrap();
            for ell in 1..=12 {
                let cover = interval_cover(&path, ell).unwrap();
                assert!(multiplicity(&path, &cover) <= 2);
                let bl = ball_lebesgue(&path, &cover);
                assert!(bl.global >= (ell - 1).min(path.diameter()), "n={n} ell={ell}");
                assert!(mesh(&path, &cover) <= 4 * ell - 3);
            }
        }
    }

    #[test]
    fn interval_cover_on_grid() {
        let g = FiniteMetricSpace::grid_space(&[6, 6]).unwrap();
        let cover = interval_cover(&g, 2).unwrap();
        assert!(multiplicity(&g, &cover) <= 4);
        let g3 = FiniteMetricSpace::grid_space(&[5, 3, 4]).unwrap();
        let cover = interval_cover(&g3, 1).unwrap();
        assert!(multiplicity(&g3, &cover) <= 8);
        // axes of length 1 contribute a single family
        let thin = FiniteMetricSpace::grid_space(&[1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 9]).unwrap();
        assert!(multiplicity(&thin, &interval_cover(&thin, 1).unwrap()) <= 2);
    }

    #[test]
    fn interval_cover_rejects_bad_input() {
        let t = FiniteMetricSpace::tree_space(2, 2).unwrap();
        assert_eq!(
            interval_cover(&t, 2).unwrap_err(),
            CoverError::WrongSpaceKind { expected: "grid", found: "tree" }
        );
        let p = FiniteMetricSpace::grid_space(&[4]).unwrap();
        assert!(matches!(interval_cover(&p, 0), Err(CoverError::ZeroParameter { .. })));
    }

    #[test]
    fn tree_annuli_examples() {
        let point = FiniteMetricSpace::tree_space(2, 0).unwrap();
        let cover = tree_annuli_cover(&point, 1).unwrap();
        assert_eq!(cover.len(), 1);
        assert_eq!(multiplicity(&point, &cover), 1);

        let t = FiniteMetricSpace::tree_space(2, 4).unwrap();
        let cover = tree_annuli_cover(&t, 2).unwrap();
        assert_eq!(multiplicity(&t, &cover), 2);
        assert!(ball_lebesgue(&t, &cover).global >= 1);

        let p = FiniteMetricSpace::grid_space(&[4]).unwrap();
        assert!(matches!(tree_annuli_cover(&p, 1), Err(CoverError::WrongSpaceKind { .. })));
    }

    #[test]
    fn tree_annuli_components_are_connected() {
        let t = FiniteMetricSpace::tree_space(3, 4).unwrap();
        for width in 1..=3 {
            let cover = tree_annuli_cover(&t, width).unwrap();
            assert!(multiplicity(&t, &cover) <= 2);
            for members in cover.elements() {
                // a connected subset of a tree has exactly one vertex whose parent is outside
                let tops = members
                    .iter()
                    .filter(|&&v| t.tree_parent(v).is_none_or(|p| members.binary_search(&p).is_err()))
                    .count();
                assert_eq!(tops, 1);
            }
        }
    }

    #[test]
    fn greedy_net_examples() {
        let single = FiniteMetricSpace::grid_space(&[1]).unwrap();
        assert_eq!(greedy_net_cover(&single, 1).unwrap().len(), 1);
        let p5 = FiniteMetricSpace::grid_space(&[5]).unwrap();
        assert_eq!(greedy_net(&p5, 1), vec![PointId(0), PointId(2), PointId(4)]);
        assert_eq!(greedy_net(&p5, 10), vec![PointId(0)]);
        let cover = greedy_net_cover(&p5, 10).unwrap();
        assert_eq!(cover.len(), 1);
        assert_eq!(cover.element(crate::covers::ElementId(0)).len(), 5);
    }
}
