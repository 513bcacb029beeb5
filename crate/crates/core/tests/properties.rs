use std::sync::OnceLock;

use proptest::prelude::*;

use fathorse::bowen::BowenSystem;
use fathorse::cantor::{make_construction, Address, CantorConstruction, Word};
use fathorse::cones::{preimage_level, slice_measure, ConeSystem};
use fathorse::horseshoe::{PoincareSystem, Sign};
use fathorse::maps::{LorenzBranchMap, SqrtBranch};

fn system() -> &'static PoincareSystem {
    static PS: OnceLock<PoincareSystem> = OnceLock::new();
    PS.get_or_init(|| {
        let map = LorenzBranchMap::new(1.8).unwrap();
        let cc = make_construction(&map, 2.0).unwrap();
        PoincareSystem::new(BowenSystem::new(map, cc, 1e-10).unwrap()).unwrap()
    })
}

fn cantor() -> &'static CantorConstruction {
    system().bowen().construction()
}

fn word_strategy(max_len: usize) -> impl Strategy<Value = Word> {
    (0..=max_len, any::<u64>()).prop_map(|(len, bits)| {
        let mut w = Word::EMPTY;
        for i in 0..len {
            w = w.push(((bits >> i) & 1) as u8);
        }
        w
    })
}

/// `x` in `[b, a] ∪ [-a, -b]`.
fn a_abscissa() -> impl Strategy<Value = f64> {
    (0.0..=1.0f64, any::<bool>()).prop_map(|(t, neg)| {
        let (a, b) = (system().a(), system().b());
        let x = b + t * (a - b);
        if neg {
            -x
        } else {
            x
        }
    })
}

fn a_ordinate() -> impl Strategy<Value = f64> {
    (-1.0..=1.0f64).prop_map(|t| t * system().a())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lorenz_map_is_odd(x in 1e-9..=1.0f64, c in 1.3..=2.0f64) {
        let f = SqrtBranch::new(c).unwrap();
        prop_assert_eq!(f.eval(-x).unwrap(), -f.eval(x).unwrap());
    }

    #[test]
    fn right_branch_inverse_round_trip(x in 1e-6..=1.0f64, c in 1.3..=2.0f64) {
        let f = SqrtBranch::new(c).unwrap();
        let back = f.invert_right(f.eval(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() < 1e-12, "x={x} back={back}");
    }

    #[test]
    fn modified_inverse_round_trip(x in 1e-6..=1.0f64) {
        let bowen = system().bowen();
        let y = bowen.eval_modified_f(x).unwrap();
        let back = bowen.invert_right_branch_modified(y).unwrap();
        prop_assert!((back - x).abs() < 1e-9, "x={x} y={y} back={back}");
    }

    #[test]
    fn modified_map_is_odd(x in 1e-6..=1.0f64) {
        let bowen = system().bowen();
        let (p, m) = (bowen.eval_modified_f(x).unwrap(), bowen.eval_modified_f(-x).unwrap());
        prop_assert!((p + m).abs() < 1e-12);
    }

    #[test]
    fn children_and_gap_partition_parent(w in word_strategy(12)) {
        let cc = cantor();
        let parent = cc.interval_endpoints(w);
        let gap = cc.gap_endpoints(w);
        let right = cc.interval_endpoints(w.push(0));
        let left = cc.interval_endpoints(w.push(1));
        prop_assert_eq!(left.lo, parent.lo);
        prop_assert_eq!(right.hi, parent.hi);
        prop_assert!((left.hi - gap.lo).abs() < 1e-15);
        prop_assert!((gap.hi - right.lo).abs() < 1e-15);
        prop_assert!(gap.len() > 0.0);
        prop_assert!((left.len() - right.len()).abs() < 1e-15);
    }

    #[test]
    fn flipped_word_is_mirrored(w in word_strategy(12)) {
        let cc = cantor();
        let iv = cc.interval_endpoints(w);
        let mirrored = cc.interval_endpoints(w.flip());
        prop_assert!((mirrored.lo + iv.hi).abs() < 1e-15);
        prop_assert!((mirrored.hi + iv.lo).abs() < 1e-15);
    }

    #[test]
    fn midpoint_locates_to_its_word(w in word_strategy(12)) {
        let cc = cantor();
        let mid = cc.interval_endpoints(w).mid();
        prop_assert_eq!(cc.locate(mid, w.len()).unwrap(), Address::Interval(w));
    }

    #[test]
    fn second_iterate_equals_composition(x in a_abscissa(), y in a_ordinate()) {
        let ps = system();
        let closed = ps.poincare_f2_on_a((x, y)).unwrap();
        let once = ps.poincare_f((x, y)).unwrap();
        let twice = ps.poincare_f(once).unwrap();
        prop_assert!((closed.0 - twice.0).abs() < 1e-9, "{closed:?} vs {twice:?}");
        prop_assert!((closed.1 - twice.1).abs() < 1e-9, "{closed:?} vs {twice:?}");
    }

    #[test]
    fn second_iterate_is_the_base_map(t in 0.0..=1.0f64) {
        let bowen = system().bowen();
        let x = bowen.b() + t * (bowen.a() - bowen.b());
        let composed = bowen.second_iterate(x).unwrap();
        let base = bowen.eval_base(x).unwrap();
        prop_assert!((composed - base).abs() < 1e-9);
    }

    #[test]
    fn second_iterate_derivative_matches_difference_quotient(u in word_strategy(5), t in 0.05..=0.95f64) {
        // inside one gap of [b, a] = I_0, with the step well below the gap length
        let bowen = system().bowen();
        let gap = cantor().gap_endpoints(u.prepend(0));
        let x = gap.lo + t * gap.len();
        let h = 1e-5 * gap.len();
        let quotient = (bowen.second_iterate(x + h).unwrap() - bowen.second_iterate(x - h).unwrap()) / (2.0 * h);
        let exact = bowen.second_iterate_derivative(x).unwrap();
        prop_assert!((quotient - exact).abs() <= 1e-5 * exact, "x={x} dq={quotient} exact={exact}");
    }

    #[test]
    fn fiber_step_contracts_by_half(y1 in a_ordinate(), y2 in a_ordinate(), plus in any::<bool>()) {
        let ps = system();
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let d = (ps.fiber_step(sign, y1).unwrap() - ps.fiber_step(sign, y2).unwrap()).abs();
        prop_assert!(d <= 0.5 * (y1 - y2).abs() + 1e-15, "d={d} |dy|={}", (y1 - y2).abs());
    }

    #[test]
    fn membership_sets_are_nested(x in a_abscissa(), y in a_ordinate(), n in 0usize..6) {
        let ps = system();
        if ps.horseshoe_membership((x, y), n + 1) {
            prop_assert!(ps.horseshoe_membership((x, y), n));
        }
    }

    #[test]
    fn cone_preimages_map_to_parents(a in -0.999..0.999f64, n in 1usize..10) {
        let f = SqrtBranch::new(2.0).unwrap();
        let parents = preimage_level(a, n - 1).unwrap();
        let children = preimage_level(a, n).unwrap();
        for (i, &r) in children.iter().enumerate() {
            prop_assert!((f.eval(r).unwrap() - parents[i / 2]).abs() < 1e-10);
        }
    }

    #[test]
    fn cone_totals_strictly_decrease(a in -0.999..0.999f64, k in 2u32..7) {
        let sys = ConeSystem::new(k).unwrap();
        let mut previous = f64::INFINITY;
        for n in 0..=10 {
            let total = slice_measure(&sys, a, n).unwrap().total;
            prop_assert!(total < previous);
            previous = total;
        }
    }

    #[test]
    fn k2_totals_do_not_depend_on_the_slice(a in -0.999..0.999f64, n in 0usize..14) {
        let sys = ConeSystem::new(2).unwrap();
        let total = slice_measure(&sys, a, n).unwrap().total;
        prop_assert!((total - 2f64.powi(1 - n as i32)).abs() < 1e-12);
    }
}

#[test]
fn fiber_intervals_match_tree_to_depth_eight() {
    let ps = system();
    for n in 0..=8 {
        let items = ps.fiber_intervals(n).unwrap();
        assert_eq!(items.len(), 1 << n);
        for item in items {
            let tree = cantor().interval_endpoints(item.word);
            assert!((tree.lo - item.interval.lo).abs() < 1e-9, "{}", item.word);
            assert!((tree.hi - item.interval.hi).abs() < 1e-9, "{}", item.word);
        }
    }
}

#[test]
fn one_step_fiber_map_can_expand() {
    // 1/f' exceeds 1 where the spliced branch is flatter than slope 1, so only
    // the two-step fiber map is a uniform contraction.
    let ps = system();
    let worst = (0..=2000)
        .map(|i| -ps.strip_half_height() + 2.0 * ps.strip_half_height() * i as f64 / 2000.0)
        .map(|y| {
            let x = ps.bowen().invert_right_branch_modified(y).unwrap();
            1.0 / ps.bowen().modified_derivative(x).unwrap()
        })
        .fold(0.0, f64::max);
    assert!(worst > 1.0 && worst < 2.0, "max 1/f' = {worst}");
}
