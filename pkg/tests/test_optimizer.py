import pytest

from rcsccc.optimizer import (
    OwefMetric,
    ParityMetric,
    compare_metrics,
    is_invertible_rank,
    optimize_parity_ladder,
    optimize_systematic_ladder,
    owef_of,
    parity_metric_of,
    random_parity_metric,
)
from rcsccc.puncturing import check_rate_compatible, ladder_step


def test_compare_metrics_examples():
    a = ParityMetric(((4, 7),))
    b = ParityMetric(((3, 1),))
    assert compare_metrics(a, b) == -1
    a = ParityMetric(((4, 2), (0, 5)))
    b = ParityMetric(((4, 2), (1, 9)))
    assert compare_metrics(a, b) == 1
    assert compare_metrics(a, a) == 0
    assert compare_metrics(a, a, 3, 7) == -1
    assert compare_metrics(a, a, 9, 7) == 1


def test_compare_owef_metrics():
    assert compare_metrics(OwefMetric(4, (9, 9)), OwefMetric(3, (1, 1))) == -1
    assert compare_metrics(OwefMetric(3, (2, 5)), OwefMetric(3, (2, 4))) == 1


def test_compare_metrics_errors():
    with pytest.raises(ValueError):
        compare_metrics(ParityMetric(((1, 1),)), ParityMetric(((1, 1), (2, 2))))
    with pytest.raises(ValueError):
        compare_metrics(OwefMetric(3, (1,)), OwefMetric(3, (1, 2)))
    with pytest.raises(TypeError):
        compare_metrics(ParityMetric(((1, 1),)), OwefMetric(3, (1,)))


def test_zero_steps(rsc57, P_o1):
    res = optimize_parity_ladder(rsc57, 30, steps=0)
    assert res.ladder.ordered_positions == () and res.trajectory == []
    res = optimize_systematic_ladder(rsc57, P_o1, 200, steps=0)
    assert res.ladder.ordered_positions == ()


def test_step_bounds(rsc57, P_o1):
    with pytest.raises(ValueError):
        optimize_parity_ladder(rsc57, 10, steps=11)
    with pytest.raises(ValueError):
        optimize_systematic_ladder(rsc57, P_o1, 200, steps=101)
    with pytest.raises(ValueError):
        optimize_parity_ladder(rsc57, 10, steps=-1)


def test_incremental_parity_metric_matches_direct(rsc57):
    res = optimize_parity_ladder(rsc57, 40, steps=25)
    dels = res.ladder.ordered_positions
    for k, rec in enumerate(res.trajectory, start=1):
        m = parity_metric_of(rsc57, 40, dels[:k])
        assert [list(x) for x in m.pairs] == rec["metric"]


def test_greedy_step_is_best_candidate(rsc57):
    # brute-force every candidate at one step and compare with the greedy choice
    N = 24
    res = optimize_parity_ladder(rsc57, N, steps=6)
    prefix = list(res.ladder.ordered_positions[:5])
    best = min((p for p in range(N) if p not in prefix),
               key=lambda p: (parity_metric_of(rsc57, N, prefix + [p]).key(), p))
    assert best == res.ladder.ordered_positions[5]


def test_parity_ladder_is_deterministic(rsc57):
    a = optimize_parity_ladder(rsc57, 30, steps=12)
    b = optimize_parity_ladder(rsc57, 30, steps=12)
    assert a.ladder == b.ladder and a.trajectory_json() == b.trajectory_json()


def test_parity_trajectory_properties(greedy_parity):
    traj = greedy_parity.trajectory
    assert len(greedy_parity.ladder.ordered_positions) == 300
    check_rate_compatible([ladder_step(greedy_parity.ladder, M) for M in range(0, 301, 10)])
    for w in range(3):
        d = [r["metric"][w][0] for r in traj]
        assert all(x >= y for x, y in zip(d, d[1:]))
    d2 = [tuple(r["metric"][0]) for r in traj]
    for (da, na), (db, nb) in zip(d2, d2[1:]):
        if da == db:
            assert nb >= na
    assert any(d == 0 and n > 0 for d, n in d2)


@pytest.mark.parametrize("M", [220, 260])
def test_greedy_dominates_random(rsc57, greedy_parity, M):
    greedy = parity_metric_of(rsc57, 300, greedy_parity.ladder.ordered_positions[:M])
    rand = random_parity_metric(rsc57, 300, M, trials=100, seed=M)
    g, r = greedy.pairs[0], rand.pairs[0]
    assert (-g[0], g[1]) <= (-r[0], r[1])


def test_systematic_ladder(rsc57, P_o1, greedy_systematic):
    lad = greedy_systematic.ladder
    assert len(lad) == 100 and not greedy_systematic.stopped_early
    kept = P_o1.keep_mask()
    assert all(kept[p] for p in lad.ordered_positions)
    for k in range(0, 101, 5):
        assert is_invertible_rank(rsc57, P_o1, 200, lad.ordered_positions[:k])


def test_systematic_trajectory_matches_direct(rsc57, P_o1, greedy_systematic):
    dels = greedy_systematic.ladder.ordered_positions
    for k in (1, 10, 50, 100):
        rec = greedy_systematic.trajectory[k - 1]
        d0 = rec["d_free"]
        A = owef_of(rsc57, P_o1, 200, dels[:k], d0 + 7)
        assert A[0] == 1
        assert next(d for d in range(1, len(A)) if A[d]) == d0
        assert [int(A[d]) for d in range(d0, d0 + 7)] == rec["multiplicities"]
    d = [r["d_free"] for r in greedy_systematic.trajectory]
    assert all(x >= y for x, y in zip(d, d[1:]))


def test_restrict_to_parity(rsc57, P_o1):
    res = optimize_systematic_ladder(rsc57, P_o1, 40, steps=12, restrict_to_parity=True)
    assert len(res.ladder.ordered_positions) == 12
    assert all(p % 2 == 1 for p in res.ladder.ordered_positions)
    assert is_invertible_rank(rsc57, P_o1, 40, res.ladder.ordered_positions)


def test_rank_check_detects_non_invertible(rsc57):
    K = 10
    all_parity = tuple(range(1, 2 * K, 2))
    assert is_invertible_rank(rsc57, None, K, all_parity)
    # only the first parity bit survives
    assert not is_invertible_rank(rsc57, None, K, tuple(range(2 * K))[:1] + tuple(range(2, 2 * K)))

