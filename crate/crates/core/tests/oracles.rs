mod common;

use crystal_core::crystal::{Crystal1D, CrystalND, Shape};
use crystal_core::dyadic::DyadicRational;
use crystal_core::evaluator::{
    anchored_union_measure, maximal_field, rasterize, superlevel_measure, Budget, GridSpec, Mask,
    PrefixSums, INCLUSION_EXCLUSION_LIMIT,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scale_set(lo: i64, hi: i64, max_len: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::btree_set(lo..=hi, 1..=max_len).prop_map(|s| s.into_iter().collect())
}

#[test]
fn primitive_rectangle_m4_scales_pm4() {
    let k = 4;
    let sets = common::scale_sets(-k, k, 4);
    let tables: Vec<Vec<bool>> = sets.iter().map(|s| common::lattice_table(s, k)).collect();
    let crystals: Vec<Crystal1D> = sets
        .iter()
        .map(|s| Crystal1D::from_scales(s).unwrap())
        .collect();
    let check = |choice: &[usize], candidates: &[Vec<i64>]| {
        let t: Vec<&[bool]> = choice.iter().map(|&c| tables[c].as_slice()).collect();
        let found = common::maximal_anchored_rectangles(&t, candidates, k);
        let prim = CrystalND::new(choice.iter().map(|&c| crystals[c].clone()).collect())
            .unwrap()
            .primitive_rectangle();
        assert_eq!(found, vec![prim.exponents().to_vec()], "{choice:?}");
    };
    // every pair exhaustively
    let c2 = common::anchored_candidates(2, k);
    for a in 0..sets.len() {
        check(&[a], &common::anchored_candidates(1, k));
        for b in 0..sets.len() {
            check(&[a, b], &c2);
        }
    }
    // a seeded sample of triples
    let c3 = common::anchored_candidates(3, k);
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..3000 {
        let choice: Vec<usize> = (0..3).map(|_| rng.gen_range(0..sets.len())).collect();
        check(&choice, &c3);
    }
}

#[test]
fn union_measure_matches_cell_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let n = rng.gen_range(1..=3usize);
        let count = rng.gen_range(1..=INCLUSION_EXCLUSION_LIMIT + 6);
        let shapes: Vec<Shape> = (0..count)
            .map(|_| Shape::new((0..n).map(|_| rng.gen_range(-2..=2)).collect()))
            .collect();
        let u = anchored_union_measure(&shapes, Budget::default()).unwrap();
        // count cells of the 1/4 lattice covered by each anchored rectangle
        let grid = GridSpec::new(vec![-2; n], vec![2; n]).unwrap();
        let covers = |s: &Shape, c: &[usize]| {
            c.iter()
                .zip(s.exponents())
                .all(|(&x, &a)| x < 1usize << (a + 2))
        };
        let cells = common::cells(&grid.dims());
        let area = |k: usize| DyadicRational::from(k as u64).mul_pow2(-2 * n as i64);
        let union = cells
            .iter()
            .filter(|c| shapes.iter().any(|s| covers(s, c)))
            .count();
        assert_eq!(u.union, area(union), "{shapes:?}");
        for (i, s) in shapes.iter().enumerate() {
            let own = cells
                .iter()
                .filter(|c| {
                    covers(s, c)
                        && !shapes
                            .iter()
                            .enumerate()
                            .any(|(j, t)| j != i && covers(t, c))
                })
                .count();
            assert_eq!(u.exclusive[i], area(own), "{shapes:?} #{i}");
        }
    }
}

/// Aligned placements on a finer grid include the coarse ones, so refining can
/// only raise the field. Set measures themselves do not move.
#[test]
fn refinement_keeps_set_measures_and_lower_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut raised = 0;
    for _ in 0..40 {
        let n = rng.gen_range(1..=2usize);
        let factors: Vec<Crystal1D> = (0..n)
            .map(|_| {
                let len = rng.gen_range(1..=3);
                let mut s: Vec<i64> = (-2..=3).collect();
                while s.len() > len {
                    s.remove(rng.gen_range(0..s.len()));
                }
                Crystal1D::from_scales(&s).unwrap()
            })
            .collect();
        let e = CrystalND::new(factors).unwrap();
        let coarse = GridSpec::for_crystal(&e).unwrap();
        let fine = GridSpec::new(
            coarse.resolutions().iter().map(|r| r - 1).collect(),
            coarse.extents().to_vec(),
        )
        .unwrap();
        let (mc, mf) = (
            rasterize(&e, &coarse, Budget::default()).unwrap(),
            rasterize(&e, &fine, Budget::default()).unwrap(),
        );
        assert_eq!(mc.measure(), e.measure());
        assert_eq!(mf.measure(), e.measure());
        let shapes: Vec<Shape> = (0..3)
            .map(|_| common::random_shape(&mut rng, &coarse))
            .collect();
        let fc = maximal_field(&mc, &shapes).unwrap();
        let ff = maximal_field(&mf, &shapes).unwrap();
        for t in [
            DyadicRational::pow2(-1),
            DyadicRational::pow2(-2),
            DyadicRational::pow2(-3),
        ] {
            let (a, b) = (superlevel_measure(&fc, &t), superlevel_measure(&ff, &t));
            assert!(b >= a, "{e:?} {shapes:?} at {t}: coarse {a}, fine {b}");
            if b > a {
                raised += 1;
            }
        }
    }
    // the finer grid does find better placements on some inputs
    assert!(raised > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prefix_sums_match_naive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = common::random_grid(&mut rng, 9);
        let mask = common::random_mask(&mut rng, grid.clone());
        let ps = PrefixSums::new(&mask);
        prop_assert_eq!(ps.total(), mask.popcount());
        let dims = grid.dims();
        for _ in 0..8 {
            let (lo, hi): (Vec<usize>, Vec<usize>) = dims
                .iter()
                .map(|&d| {
                    let (a, b) = (rng.gen_range(0..=d), rng.gen_range(0..=d));
                    (a.min(b), a.max(b))
                })
                .unzip();
            prop_assert_eq!(ps.box_sum(&lo, &hi), common::naive_box_sum(&mask, &lo, &hi));
        }
    }

    #[test]
    fn maximal_field_matches_naive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = common::random_grid(&mut rng, 8);
        let mask = common::random_mask(&mut rng, grid.clone());
        let shapes: Vec<Shape> = (0..rng.gen_range(1..=3))
            .map(|_| common::random_shape(&mut rng, &grid))
            .collect();
        let field = maximal_field(&mask, &shapes).unwrap();
        let oracle = common::naive_maximal_field(&mask, &shapes);
        for (idx, want) in oracle.iter().enumerate() {
            prop_assert_eq!(&field.value(idx), want);
        }
    }

    #[test]
    fn more_shapes_never_lower_the_field(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = common::random_grid(&mut rng, 10);
        let mask = common::random_mask(&mut rng, grid.clone());
        let shapes: Vec<Shape> = (0..4).map(|_| common::random_shape(&mut rng, &grid)).collect();
        let small = maximal_field(&mask, &shapes[..2]).unwrap();
        let big = maximal_field(&mask, &shapes).unwrap();
        for idx in 0..small.len() {
            prop_assert!(big.value(idx) >= small.value(idx));
        }
    }

    #[test]
    fn crystal_cells_match_definition(scales in scale_set(-3, 3, 4)) {
        let c = Crystal1D::from_scales(&scales).unwrap();
        let set = c.set();
        let r = set.resolution();
        // cell k covers [k 2^r, (k+1) 2^r), sample its left end on the 1/8 lattice
        for k in 0..set.cell_count() {
            let x = (k as i64) << (r + 3);
            prop_assert_eq!(set.contains_cell(k), common::in_crystal_lattice(&scales, x, 3));
        }
    }

    #[test]
    fn product_raster_matches_factors(a in scale_set(-2, 2, 3), b in scale_set(-2, 2, 3)) {
        let e = CrystalND::new(vec![
            Crystal1D::from_scales(&a).unwrap(),
            Crystal1D::from_scales(&b).unwrap(),
        ]).unwrap();
        let grid = GridSpec::new(vec![-2, -2], vec![2, 2]).unwrap();
        let mask = rasterize(&e, &grid, Budget::default()).unwrap();
        let expect = Mask::from_fn(grid.clone(), Budget::default(), |c| {
            common::in_crystal_lattice(&a, c[0] as i64, 2) && common::in_crystal_lattice(&b, c[1] as i64, 2)
        }).unwrap();
        prop_assert_eq!(mask.measure(), e.measure());
        prop_assert_eq!(mask, expect);
    }
}
