use proptest::prelude::*;

use positional::engine::{BoardKind, Side};
use positional::solver::{
    best_move, solve_tau, solve_tau_unmemoized, Position, SolveLimits, ToyGame,
};
use positional::winset::{Family, TauValue};
use positional::Edge;

fn rank(v: TauValue) -> usize {
    v.rounds().unwrap_or(usize::MAX)
}

#[derive(Clone, Debug)]
struct Board {
    n: usize,
    edges: Vec<Edge>,
    sets: Vec<Vec<Edge>>,
}

fn arb_board() -> impl Strategy<Value = Board> {
    (3usize..=5)
        .prop_flat_map(|n| {
            let all: Vec<Edge> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| Edge::new(u, v)))
                .collect();
            let m = all.len().min(9);
            (
                Just(n),
                Just(all),
                prop::sample::subsequence((0..m).collect::<Vec<_>>(), 1..=m),
            )
        })
        .prop_flat_map(|(n, all, idx)| {
            let edges: Vec<Edge> = idx.iter().map(|&i| all[i]).collect();
            let k = edges.len();
            let set = prop::sample::subsequence(edges.clone(), 1..=k.min(4));
            (Just(n), Just(edges), prop::collection::vec(set, 1..=3))
        })
        .prop_map(|(n, edges, sets)| Board { n, edges, sets })
}

fn game(b: &Board, a: usize, bb: usize) -> ToyGame {
    ToyGame::new(
        b.n,
        b.edges.clone(),
        &Family::Custom(b.sets.clone()),
        a,
        bb,
        SolveLimits::default(),
    )
    .unwrap()
}

fn side(maker_first: bool) -> Side {
    if maker_first {
        Side::Maker
    } else {
        Side::Breaker
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn memo_matches_plain_minimax(b in arb_board(), a in 1usize..=3, bb in 1usize..=3, mf in any::<bool>()) {
        let g = game(&b, a, bb);
        let lim = SolveLimits::default();
        prop_assert_eq!(solve_tau(&g, side(mf), lim).unwrap(), solve_tau_unmemoized(&g, side(mf), lim).unwrap());
    }

    #[test]
    fn more_bias_never_hurts_its_owner(b in arb_board(), a in 1usize..=2, bb in 1usize..=2, mf in any::<bool>()) {
        let lim = SolveLimits::default();
        let base = rank(solve_tau(&game(&b, a, bb), side(mf), lim).unwrap());
        prop_assert!(rank(solve_tau(&game(&b, a + 1, bb), side(mf), lim).unwrap()) <= base);
        prop_assert!(rank(solve_tau(&game(&b, a, bb + 1), side(mf), lim).unwrap()) >= base);
    }

    #[test]
    fn moving_first_never_hurts_maker(b in arb_board(), a in 1usize..=3, bb in 1usize..=3) {
        let lim = SolveLimits::default();
        let g = game(&b, a, bb);
        let mine = solve_tau(&g, Side::Maker, lim).unwrap();
        let theirs = solve_tau(&g, Side::Breaker, lim).unwrap();
        prop_assert!(rank(mine) <= rank(theirs));
    }

    #[test]
    fn best_move_achieves_the_value(b in arb_board(), a in 1usize..=3, bb in 1usize..=3) {
        let lim = SolveLimits::default();
        let g = game(&b, a, bb);
        let start = Position::start(&g, Side::Maker);
        let value = solve_tau(&g, Side::Maker, lim).unwrap();
        let (mv, v) = best_move(&g, start, lim).unwrap();
        prop_assert_eq!(v, value);
        prop_assert!(mv.len() <= a);
        prop_assert!(mv.iter().all(|e| b.edges.contains(e)));
    }
}

#[test]
fn matchings_on_small_complete_boards() {
    let lim = SolveLimits::default();
    let k4 = ToyGame::on(BoardKind::Complete, 4, &Family::PerfectMatching, 1, 1, lim).unwrap();
    assert_eq!(
        solve_tau(&k4, Side::Breaker, lim).unwrap(),
        TauValue::BreakerWin
    );
    assert_eq!(
        solve_tau(&k4, Side::Maker, lim).unwrap(),
        TauValue::BreakerWin
    );
    // three matching edges at two per move cannot take fewer than two moves
    let k6 = ToyGame::on(BoardKind::Complete, 6, &Family::PerfectMatching, 2, 2, lim).unwrap();
    assert_eq!(
        solve_tau(&k6, Side::Breaker, lim).unwrap(),
        TauValue::exact(2)
    );
    let bip = ToyGame::on(BoardKind::Bipartite, 6, &Family::PerfectMatching, 1, 1, lim).unwrap();
    assert_eq!(bip.winning_sets().len(), 6);
    assert_eq!(
        solve_tau(&bip, Side::Breaker, lim).unwrap(),
        TauValue::BreakerWin
    );
}

#[test]
fn k6_matching_at_one_to_one() {
    let lim = SolveLimits::default();
    let k6 = ToyGame::on(BoardKind::Complete, 6, &Family::PerfectMatching, 1, 1, lim).unwrap();
    assert_eq!(k6.winning_sets().len(), 15);
    assert_eq!(
        solve_tau(&k6, Side::Breaker, lim).unwrap(),
        TauValue::exact(4)
    );
}

#[test]
fn state_limit_is_reported() {
    let lim = SolveLimits {
        max_edges: 16,
        max_states: 10,
    };
    let k5 = ToyGame::on(BoardKind::Complete, 5, &Family::Hamilton, 1, 1, lim).unwrap();
    assert!(solve_tau(&k5, Side::Breaker, lim).is_err());
}
