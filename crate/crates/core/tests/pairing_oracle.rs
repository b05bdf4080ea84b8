//! Checks the curve backend against the independent toy-curve oracle.

#[path = "support/toy_curve.rs"]
mod toy_curve;

use grpauth::groups::GroupSuite;
use toy_curve::*;

#[test]
fn point_count_and_subgroup() {
    let points: Vec<(i64, i64)> =
        (0..P).flat_map(|x| (0..P).map(move |y| (x, y))).filter(|&(x, y)| on_curve(x, y)).collect();
    assert_eq!(points.len() as i64 + 1, P + 1);
    let subgroup: Vec<_> = points.iter().filter(|&&p| times(Q, Some(p)).is_none()).collect();
    assert_eq!(subgroup.len() as i64, Q - 1);

    let suite = GroupSuite::curve43();
    let g = to_pt(&suite.generator());
    assert!(subgroup.contains(&&g.unwrap()));
    for k in 0..Q as u64 {
        assert_eq!(to_pt(&suite.scalar_mul(k, &suite.generator()).unwrap()), times(k as i64, g), "k = {k}");
    }
}

#[test]
fn pairing_matches_naive_miller_loop_on_all_pairs() {
    let suite = GroupSuite::curve43();
    let gen = suite.generator();
    let g = to_pt(&gen);
    let base = naive_pairing(g, g);
    assert_ne!(base, (1, 0));
    assert_eq!(epow(base, Q), (1, 0));
    for a in 0..Q {
        for b in 0..Q {
            let (pa, pb) = (suite.scalar_mul(a as u64, &gen).unwrap(), suite.scalar_mul(b as u64, &gen).unwrap());
            let ours = to_e(&suite.pairing(&pa, &pb).unwrap());
            let oracle = naive_pairing(times(a, g), times(b, g));
            assert_eq!(ours, oracle, "e({a}P, {b}P)");
            assert_eq!(oracle, epow(base, a * b % Q), "bilinearity at ({a}, {b})");
        }
    }
}

#[test]
fn target_discrete_logs_are_unique() {
    let suite = GroupSuite::curve43();
    let gen = suite.generator();
    let base = to_e(&suite.pairing(&gen, &gen).unwrap());
    let powers: Vec<E> = (0..Q).map(|k| epow(base, k)).collect();
    for (i, x) in powers.iter().enumerate() {
        assert_eq!(powers.iter().position(|y| y == x), Some(i));
    }
}
