use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use propa::covers::{
    ball_lebesgue, greedy_net_cover, interval_cover, mesh, multiplicity, tree_annuli_cover, Cover, ElementId,
};
use propa::io::{cover_from_json, cover_to_json, space_from_json, space_to_json};
use propa::spaces::{BallSpec, FiniteMetricSpace, PointId};
use propa::witness::{Mode, WitnessContext, WitnessParams};

fn graph_from_seed(seed: u64, max_vertices: usize) -> FiniteMetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = rng.gen_range(1..=max_vertices);
    let mut edges = BTreeSet::new();
    for i in 1..v as u32 {
        edges.insert((rng.gen_range(0..i), i));
    }
    for _ in 0..rng.gen_range(0..=v) {
        let (a, b) = (rng.gen_range(0..v as u32), rng.gen_range(0..v as u32));
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    FiniteMetricSpace::from_graph(v, &edges.into_iter().collect::<Vec<_>>()).unwrap()
}

/// Random cover built from balls, so that witnesses exist at small scales.
fn ball_cover_from_seed(space: &FiniteMetricSpace, seed: u64) -> Cover {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = space.diameter();
    let mut elements: Vec<Vec<PointId>> = (0..rng.gen_range(1..=6))
        .map(|_| {
            let c = PointId(rng.gen_range(0..space.size() as u32));
            space.ball(BallSpec::new(c, rng.gen_range(0..=d)))
        })
        .collect();
    for p in space.points() {
        if !elements.iter().any(|e| e.contains(&p)) {
            elements.push(space.ball(BallSpec::new(p, rng.gen_range(0..=d))));
        }
    }
    Cover::new(space, elements).unwrap()
}

fn naive_s(space: &FiniteMetricSpace, cover: &Cover, x: PointId, k: u32) -> Vec<ElementId> {
    let ball = space.ball(BallSpec::new(x, k));
    cover.element_ids().filter(|&i| ball.iter().all(|p| cover.element(i).contains(p))).collect()
}

/// Largest scale at which every S-set needed in bound mode is nonempty.
fn max_scale(space: &FiniteMetricSpace, cover: &Cover, r: u32) -> u32 {
    let bl = ball_lebesgue(space, cover);
    if bl.global == bl.saturation {
        return 6;
    }
    bl.global.saturating_sub(r) / 2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_axioms(seed in any::<u64>()) {
        let space = graph_from_seed(seed, 14);
        for x in space.points() {
            prop_assert_eq!(space.dist(x, x), 0);
            for y in space.points() {
                prop_assert_eq!(space.dist(x, y), space.dist(y, x));
                if x != y {
                    prop_assert!(space.dist(x, y) > 0);
                }
                for z in space.points() {
                    prop_assert!(space.dist(x, z) <= space.dist(x, y) + space.dist(y, z));
                }
            }
        }
    }

    #[test]
    fn balls_grow_and_stay_small(seed in any::<u64>(), r in 0u32..6) {
        let space = graph_from_seed(seed, 14);
        for x in space.points() {
            let small = space.ball(BallSpec::new(x, r));
            let big = space.ball(BallSpec::new(x, r + 1));
            prop_assert!(small.iter().all(|p| big.contains(p)));
            prop_assert!(small.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(space.set_diameter(&small).unwrap() <= 2 * r);
        }
    }

    #[test]
    fn grid_metric_is_l1(dims in prop::collection::vec(1u32..5, 1..4)) {
        let space = FiniteMetricSpace::grid_space(&dims).unwrap();
        for x in space.points() {
            let cx = space.grid_coords(x).unwrap();
            for y in space.points() {
                let cy = space.grid_coords(y).unwrap();
                let l1: u32 = cx.iter().zip(&cy).map(|(a, b)| a.abs_diff(*b)).sum();
                prop_assert_eq!(space.dist(x, y), l1);
            }
        }
    }

    #[test]
    fn multiplicity_and_mesh_match_brute_force(seed in any::<u64>(), cover_seed in any::<u64>()) {
        let space = graph_from_seed(seed, 12);
        let cover = ball_cover_from_seed(&space, cover_seed);
        let brute_m = space
            .points()
            .map(|p| cover.elements().iter().filter(|e| e.contains(&p)).count() as u32)
            .max()
            .unwrap();
        prop_assert_eq!(multiplicity(&space, &cover), brute_m);
        let brute_mesh = cover
            .elements()
            .iter()
            .map(|e| e.iter().flat_map(|&a| e.iter().map(move |&b| (a, b))).map(|(a, b)| space.dist(a, b)).max().unwrap())
            .max()
            .unwrap();
        prop_assert_eq!(mesh(&space, &cover), brute_mesh);
        // the ball-Lebesgue radius at x really fits inside one element
        let bl = ball_lebesgue(&space, &cover);
        for x in space.points() {
            prop_assert!(!naive_s(&space, &cover, x, bl.per_point[x.index()]).is_empty());
        }
    }

    #[test]
    fn witness_normalization_and_contraction(seed in any::<u64>(), cover_seed in any::<u64>(), n in 1u32..5) {
        let space = graph_from_seed(seed, 10);
        let cover = ball_cover_from_seed(&space, cover_seed);
        let bl = ball_lebesgue(&space, &cover);
        prop_assume!(bl.reaches_everywhere(2 * n));
        let ctx = WitnessContext::new(&space, &cover);
        let zetas: Vec<_> = space.points().map(|x| ctx.zeta(n, x).unwrap()).collect();
        let etas: Vec<_> = space.points().map(|x| ctx.eta(n, x).unwrap()).collect();
        for (i, z) in zetas.iter().enumerate() {
            prop_assert_eq!(z.mass(), BigRational::one());
            prop_assert_eq!(etas[i].mass(), BigRational::one());
            for j in 0..zetas.len() {
                prop_assert!(z.l1_distance(&zetas[j]) <= etas[i].l1_distance(&etas[j]));
            }
        }
        prop_assert!(ctx.integer_scaling_check(n).unwrap());
        let report = ctx.report(WitnessParams::new(n, 1), Mode::ConstructionOnly).unwrap();
        prop_assert!(report.all_pairs_ok);
    }

    #[test]
    fn s_sets_and_nesting_match_naive(seed in any::<u64>(), cover_seed in any::<u64>(), r in 1u32..3) {
        let space = graph_from_seed(seed, 10);
        let cover = ball_cover_from_seed(&space, cover_seed);
        let ctx = WitnessContext::new(&space, &cover);
        for x in space.points() {
            for k in 0..=space.diameter() + 2 {
                prop_assert_eq!(ctx.s_set(x, k), naive_s(&space, &cover, x, k));
            }
            for y in space.points().filter(|&y| space.dist(x, y) <= r) {
                for k in r..=space.diameter() + 1 {
                    let flags = ctx.nesting_check(x, y, k, r).unwrap();
                    prop_assert!(flags.iter().all(|&b| b));
                }
            }
        }
    }

    #[test]
    fn pair_audit_matches_naive_chain(seed in any::<u64>(), cover_seed in any::<u64>()) {
        let space = graph_from_seed(seed, 9);
        let cover = ball_cover_from_seed(&space, cover_seed);
        let r = 1;
        let n = max_scale(&space, &cover, r);
        prop_assume!(n > r);
        let ctx = WitnessContext::new(&space, &cover);
        let params = WitnessParams::new(n, r);
        for x in space.points() {
            for y in space.points().filter(|&y| space.dist(x, y) <= r) {
                let audit = ctx.pair_audit(params, x, y).unwrap();
                prop_assert!(audit.holds());
                let mut chain = BigRational::from_integer(0.into());
                for k in n + 1..=2 * n {
                    let inner = naive_s(&space, &cover, x, k + r).len() as i64;
                    let outer = naive_s(&space, &cover, x, k - r).len() as i64;
                    chain += BigRational::one() - BigRational::new(inner.into(), outer.into());
                }
                chain *= BigRational::new(2.into(), (n as i64).into());
                prop_assert_eq!(&audit.chain.unwrap().rhs_chain, &chain);
            }
        }
    }

    #[test]
    fn generators_are_valid_and_deterministic(len in 1u32..40, ell in 1u32..8, depth in 0u32..5, arity in 1u32..4) {
        let path = FiniteMetricSpace::grid_space(&[len]).unwrap();
        let a = interval_cover(&path, ell).unwrap();
        prop_assert_eq!(&a, &interval_cover(&path, ell).unwrap());
        prop_assert!(multiplicity(&path, &a) <= 2);
        let tree = FiniteMetricSpace::tree_space(arity, depth).unwrap();
        let t = tree_annuli_cover(&tree, ell).unwrap();
        prop_assert_eq!(&t, &tree_annuli_cover(&tree, ell).unwrap());
        prop_assert!(multiplicity(&tree, &t) <= 2);
        let net = greedy_net_cover(&path, ell).unwrap();
        prop_assert!(mesh(&path, &net) <= 4 * ell);
        let n = 1 + ell % 3;
        if ball_lebesgue(&path, &a).reaches_everywhere(2 * n + 1) && n > 1 {
            let ctx = WitnessContext::new(&path, &a);
            let first = ctx.report(WitnessParams::new(n, 1), Mode::Bound).unwrap();
            prop_assert_eq!(first, ctx.report(WitnessParams::new(n, 1), Mode::Bound).unwrap());
        }
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>(), cover_seed in any::<u64>()) {
        let space = graph_from_seed(seed, 12);
        let cover = ball_cover_from_seed(&space, cover_seed);
        let back = space_from_json(&space_to_json(&space)).unwrap();
        prop_assert_eq!(&back, &space);
        prop_assert_eq!(cover_from_json(&back, &cover_to_json(&cover)).unwrap(), cover);
    }
}
