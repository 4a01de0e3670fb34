use approx::assert_abs_diff_eq;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;

use tilemeasure::geometry::{
    enumerate_occurrences, reconcile_tile_counts, slab_partition, suspension_project, suspension_project_float,
    tile_containing_point, tile_region, AffineMap, Patch, Point, ShapeModel,
};
use tilemeasure::symbolic::{Letter, Model, Word};
use tilemeasure::{Affine64, Exact, ExactAffine};

fn map(a: Exact, b: Exact) -> ExactAffine {
    AffineMap::new(a, b).unwrap()
}

fn int(n: i64) -> Exact {
    Exact::from_integer(n)
}

fn dyadic() -> impl Strategy<Value = Exact> {
    (-64i64..64, -6i64..6).prop_map(|(m, e)| Exact::dyadic(m, e))
}

fn positive_dyadic() -> impl Strategy<Value = Exact> {
    (1i64..64, -6i64..6).prop_map(|(m, e)| Exact::dyadic(m, e))
}

#[test]
fn generator_compositions() {
    let r = ExactAffine::dilation();
    let s = ExactAffine::translation();
    assert_eq!(r.compose(&s), map(int(2), int(2)));
    assert_eq!(s.compose(&r), map(int(2), int(1)));
    assert_eq!(r.pow(-3).alpha(), Exact::ratio(1, 8));
    assert!(AffineMap::new(Exact::zero(), Exact::one()).is_err());
    let f = Affine64::new(2.0, 1.0).unwrap();
    assert_abs_diff_eq!(f.inverse().compose(&f).a(), &1.0);
}

#[test]
fn tile_regions() {
    let v = tile_region(&tilemeasure::geometry::TileAddress::new(1, 0));
    let p = |x: i64, y: i64| Point::new(int(x), int(y));
    assert_eq!(v.to_vec(), vec![p(0, 2), p(1, 2), p(2, 2), p(2, 4), p(0, 4)]);
    let t = tile_containing_point(3.0, 1.0).unwrap();
    assert_eq!((t.row, t.col.clone()), (0, 3.into()));
    let t = tile_containing_point(0.3, 0.6).unwrap();
    assert_eq!((t.row, t.col.clone()), (-1, 0.into()));
    assert!(tile_containing_point(0.0, 0.0).is_err());
}

#[test]
fn suspension_examples() {
    let p = suspension_project(&ExactAffine::dilation());
    assert_eq!((p.fractional, p.shift), (0.0, 1));
    let p = suspension_project(&map(int(3), Exact::zero()));
    assert_eq!(p.shift, 1);
    assert_abs_diff_eq!(p.fractional, 0.58496, epsilon = 1e-5);
    let q = suspension_project_float(&Affine64::new(3.0, 0.0).unwrap());
    assert_eq!(q.shift, 1);
    assert_abs_diff_eq!(q.fractional, p.fractional, epsilon = 1e-15);
}

/// Classes derived from the atlas: block `m` of the level-`(q+1)` word lies
/// `m L_q` rows under the apex, where a Triangle patch has `2^(m L_q)` apexes.
fn occurrence_oracle(model: &Model, q: usize) -> Vec<Vec<(u64, BigUint, u32)>> {
    let len = model.level_len_u64(q).unwrap() as usize;
    let children = model.atlas_words(q).unwrap();
    let children = children.materialized().unwrap();
    let parents = model.atlas_words(q + 1).unwrap();
    parents
        .materialized()
        .unwrap()
        .iter()
        .map(|w| {
            w.letters()
                .chunks(len)
                .enumerate()
                .map(|(m, chunk)| {
                    let i = children.iter().position(|c| c.letters() == chunk).unwrap();
                    let d = (m * len) as u64;
                    (d, BigUint::one() << d, i as u32 + 1)
                })
                .collect()
        })
        .collect()
}

#[test]
fn occurrences_match_oracle() {
    for model in [Model::toeplitz(2), Model::toeplitz(3), Model::substitution()] {
        for q in 0..=2 {
            let tables = enumerate_occurrences(&model, q).unwrap();
            let expect = occurrence_oracle(&model, q);
            for (t, e) in tables.iter().zip(&expect) {
                let got: Vec<(u64, BigUint, u32)> = t
                    .classes
                    .iter()
                    .map(|c| (c.depth, c.count.clone(), c.child.value()))
                    .collect();
                assert_eq!(&got, e, "{} q={q} parent {}", model.name(), t.parent.value());
                for c in &t.classes {
                    assert_eq!(c.placement().alpha(), Exact::pow2(-(c.depth as i64)));
                }
                let (summed, parent) = reconcile_tile_counts(&model, t).unwrap();
                assert_eq!(summed, parent);
            }
        }
    }
    // the listed level-1 classes
    let s = &enumerate_occurrences(&Model::substitution(), 1).unwrap()[0];
    let got: Vec<(u64, u64, u32)> = s
        .classes
        .iter()
        .map(|c| (c.depth, u64::try_from(&c.count).unwrap(), c.child.value()))
        .collect();
    assert_eq!(got, vec![(0, 1, 1), (3, 8, 1), (6, 64, 2)]);
}

#[test]
fn literal_patches_do_not_partition() {
    let rep = slab_partition(0, 4, 0..3, ShapeModel::Literal).unwrap();
    assert!(!rep.is_partition());
    let word = Word::new(vec![Letter::from_index(0); 3]);
    let apex = tilemeasure::geometry::TileAddress::new(0, 0);
    let literal = Patch::new(word.clone(), apex.clone()).with_shape(ShapeModel::Literal);
    assert_eq!(literal.tile_count(), BigUint::from(6u32));
    assert_eq!(Patch::new(word, apex).tile_count(), BigUint::from(7u32));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn alpha_is_a_morphism(a in positive_dyadic(), b in dyadic(), c in positive_dyadic(), d in dyadic()) {
        let (f, g) = (map(a, b), map(c, d));
        prop_assert_eq!(f.compose(&g).alpha(), f.alpha() * g.alpha());
        prop_assert_eq!(f.inverse().alpha(), f.alpha().recip());
        prop_assert_eq!(f.compose(&f.inverse()), ExactAffine::identity());
    }

    #[test]
    fn sample_points_return_their_tile(row in -8i64..8, col in -50i64..50, u in 0.01f64..0.99, v in 0.01f64..0.99) {
        let w = 2f64.powi(row as i32);
        let t = tile_containing_point((col as f64 + u) * w, (1.0 + v) * w).unwrap();
        prop_assert_eq!(t.row, row);
        prop_assert_eq!(t.col, col.into());
    }

    #[test]
    fn triangle_slabs_partition(bottom in -20i64..20, depth in 1usize..=8, start in -6i64..6, width in 1i64..5) {
        let rep = slab_partition(bottom, depth, start..start + width, ShapeModel::Triangle).unwrap();
        prop_assert!(rep.is_partition());
        prop_assert_eq!(rep.tiles, width as u64 * ((1u64 << depth) - 1));
    }

    #[test]
    fn suspension_is_equivariant_under_dilation(a in positive_dyadic(), b in dyadic(), k in -5i64..5) {
        // composing with R^k shifts the integer part only
        let g = map(a, b);
        let p = suspension_project(&g);
        let q = suspension_project(&ExactAffine::dilation().pow(k).compose(&g));
        prop_assert_eq!(q.shift, p.shift + k);
        prop_assert_eq!(q.fractional, p.fractional);
    }
}
