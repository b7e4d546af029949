"""
Greedy rate-compatible puncturing
=================================

Parity bits of the inner code are deleted one at a time, always picking
the position whose removal gives the best (d_w, N_w) profile for input
weights 2..4.  The weight-2 distance can only fall as deletions pile up,
and at fixed d_2 its multiplicity can only grow.  Outer code bits are then
deleted under an invertibility constraint, up to outer rate one.
"""

import time

from rcsccc import GeneratorSpec, PuncturePattern, build_trellis
from rcsccc.optimizer import (
    is_invertible_rank,
    optimize_parity_ladder,
    optimize_systematic_ladder,
    random_parity_metric,
)

code = build_trellis(GeneratorSpec.parse("1,5/7"))
N = 300

t0 = time.perf_counter()
res = optimize_parity_ladder(code, N)
print(f"parity ladder: {len(res.ladder)} deletions in {time.perf_counter() - t0:.1f} s")

# (d_2, N_2) every 20 steps
for rec in res.trajectory[19::20]:
    print(f"  step {rec['step']:3d}  d_2={rec['metric'][0][0]:2d}  N_2={rec['metric'][0][1]}")

# greedy against the best of 100 random patterns with the same number of deletions
for M in (220, 260):
    greedy = res.trajectory[M - 1]["metric"][0]
    rand = random_parity_metric(code, N, M, trials=100, seed=M).pairs[0]
    print(f"  {M} deletions: greedy (d_2, N_2)={tuple(greedy)}  best random={rand}")

P_o1 = PuncturePattern.from_matrix([[1, 1], [1, 0]], 200)
sys_res = optimize_systematic_ladder(code, P_o1, 200)
positions = sys_res.ladder.ordered_positions
print(f"\nsystematic ladder: {len(positions)} deletions, first ten {positions[:10]}")
print("every prefix invertible:",
      all(is_invertible_rank(code, P_o1, 200, positions[:k]) for k in range(len(positions) + 1)))
