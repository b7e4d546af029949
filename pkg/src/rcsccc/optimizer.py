"""Greedy rate-compatible puncturing ladders.

Both searches delete one position per step, keeping every earlier deletion,
so the result is a :class:`~rcsccc.puncturing.PunctureLadder` by
construction.  Candidates of one step are scored together from forward and
backward weight tables of the current pattern: deleting one bit only changes
the branch labels of one trellis section.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .puncturing import PuncturePattern, PunctureLadder
from .trellis import TrellisCode, build_trellis

log = logging.getLogger(__name__)


# -- metrics ----------------------------------------------------------------------


@dataclass(frozen=True)
class ParityMetric:
    """``((d_2, N_2), ..., (d_wmax, N_wmax))``; larger ``d`` then smaller ``N`` wins."""

    pairs: tuple

    def key(self):
        return tuple(k for d, n in self.pairs for k in (-d, n))


@dataclass(frozen=True)
class OwefMetric:
    """``d_free`` and ``(A_dfree, ..., A_dmax)``; larger ``d_free`` then smaller vector wins."""

    d_free: int
    multiplicities: tuple

    def key(self):
        return (-self.d_free,) + tuple(self.multiplicities)


def compare_metrics(a, b, pos_a: int | None = None, pos_b: int | None = None) -> int:
    """Return -1 if ``a`` is better, 1 if ``b`` is better, 0 on a full tie.

    Ties on the metric fall back to the lower candidate position when both
    positions are given.
    """
    if type(a) is not type(b):
        raise TypeError("metrics of different kinds")
    if isinstance(a, ParityMetric) and len(a.pairs) != len(b.pairs):
        raise ValueError("metric shapes differ")
    if (isinstance(a, OwefMetric) and a.multiplicities and b.multiplicities
            and len(a.multiplicities) != len(b.multiplicities)):
        raise ValueError("metric shapes differ")
    ka, kb = a.key(), b.key()
    if ka != kb:
        return -1 if ka < kb else 1
    if pos_a is not None and pos_b is not None and pos_a != pos_b:
        return -1 if pos_a < pos_b else 1
    return 0


# -- forward / backward weight tables -------------------------------------------


def _unit(trellis):
    return trellis if trellis.bits_per_step == 1 else build_trellis(trellis.spec)


def _tables(unit: TrellisCode, info: int, keep: np.ndarray, W: int | None, H: int, dtype):
    """Forward and backward path counts over a terminated block.

    ``F[t, s, w, h]`` counts paths from the start to state ``s`` before
    section ``t``; ``B[t, s, w, h]`` counts paths from state ``s`` before
    section ``t`` to the terminated end.  With ``W=None`` the input weight
    axis is dropped (size 1).
    """
    T = keep.shape[0]
    S = unit.num_states
    Wd = 1 if W is None else W + 1
    F = np.zeros((T + 1, S, Wd, H + 1), dtype=dtype)
    B = np.zeros_like(F)
    F[0, 0, 0, 0] = 1
    B[T, 0, 0, 0] = 1
    branches = _branches(unit, info, keep, W is not None)
    for t in range(T):
        for s, u, ns, du, dh in branches[t]:
            if du < Wd and dh <= H:
                F[t + 1, ns, du:, dh:] += F[t, s, : Wd - du, : H + 1 - dh]
    for t in range(T - 1, -1, -1):
        for s, u, ns, du, dh in branches[t]:
            if du < Wd and dh <= H:
                B[t, s, du:, dh:] += B[t + 1, ns, : Wd - du, : H + 1 - dh]
    return F, B, branches


def _branches(unit, info, keep, track_w):
    out = []
    for t in range(keep.shape[0]):
        tail = t >= info
        row = []
        for s in range(unit.num_states):
            inputs = (int(unit.tail_input[s]),) if tail else (0, 1)
            for u in inputs:
                ns = int(unit.next_state[s, u])
                o = unit.outputs[s, u]
                dh = int(o[keep[t]].sum())
                du = u if (track_w and not tail) else 0
                row.append((s, u, ns, du, dh))
        out.append(row)
    return out


def _candidate_tables(unit, F, B, branches, t, col):
    """Weight table of the block after additionally deleting output ``col`` of section ``t``."""
    Wd, H1 = F.shape[2], F.shape[3]
    res = np.zeros((Wd, H1), dtype=F.dtype)
    for s, u, ns, du, dh in branches[t]:
        bit = int(unit.outputs[s, u][col])
        dh2 = dh - bit  # col was kept before this deletion
        f = F[t, s]
        b = B[t + 1, ns]
        if not f.any() or not b.any():
            continue
        for w1, h1 in zip(*np.nonzero(f)):
            w0, h0 = w1 + du, h1 + dh2
            if w0 >= Wd or h0 >= H1:
                continue
            res[w0:, h0:] += f[w1, h1] * b[: Wd - w0, : H1 - h0]
    return res


def _parity_metric(table, w_max):
    pairs = []
    for w in range(2, w_max + 1):
        nz = np.nonzero(table[w])[0]
        if nz.size:
            pairs.append((int(nz[0]), int(table[w, nz[0]])))
        else:
            pairs.append((table.shape[1], 0))  # beyond the cap: best possible
    return ParityMetric(tuple(pairs))


@dataclass
class LadderResult:
    ladder: PunctureLadder
    trajectory: list = field(default_factory=list)
    stopped_early: bool = False
    diagnostic: str = ""

    def trajectory_json(self) -> str:
        return json.dumps(self.trajectory, indent=1)


def _dtype_for(n, w):
    return np.int64 if math.comb(n + 8, min(w, n)) * 16 < 2**62 else object


def parity_metric_of(inner: TrellisCode, N: int, deleted, w_max: int = 4, h_cap: int | None = None):
    """Parity-only block metric of the inner code with parity positions ``deleted``."""
    unit = _unit(inner)
    keep = _inner_keep(unit, N, deleted)
    H = h_cap if h_cap is not None else _initial_hcap(unit, N, w_max)
    F, _, _ = _tables(unit, N, keep, w_max, H, _dtype_for(N, w_max))
    return _parity_metric(F[-1, 0], w_max)


def _inner_keep(unit, N, deleted):
    nu = unit.memory
    npar = unit.n_out - 1
    keep = np.zeros((N + nu, unit.n_out), dtype=bool)
    keep[:, 1:] = True
    keep[N:, 0] = True  # tail systematic bits are sent
    for p in deleted:
        keep[p // npar, 1 + p % npar] = False
    return keep


def _initial_hcap(unit, N, w_max):
    keep = _inner_keep(unit, N, ())
    F, _, _ = _tables(unit, N, keep, w_max, 40, _dtype_for(N, w_max))
    table = F[-1, 0]
    best = 0
    for w in range(2, w_max + 1):
        nz = np.nonzero(table[w])[0]
        best = max(best, int(nz[0]) if nz.size else 40)
    return best


def optimize_parity_ladder(
    inner: TrellisCode,
    N: int,
    w_max: int = 4,
    steps: int | None = None,
    start=(),
) -> LadderResult:
    """Greedy parity puncturing of the inner code, one position per step.

    At each step the deletion giving the best :class:`ParityMetric` of the
    parity-only block code (input weights ``2 .. w_max``) wins; ties go to
    the lowest position.
    """
    unit = _unit(inner)
    if not unit.spec.systematic:
        raise ValueError("parity ladders need a systematic inner code")
    npar = unit.n_out - 1
    total = N * npar
    steps = total - len(start) if steps is None else steps
    if steps < 0 or steps + len(start) > total:
        raise ValueError(f"steps must lie in [0, {total - len(start)}]")
    H = _initial_hcap(unit, N, w_max)
    dtype = _dtype_for(N, w_max)
    deleted = list(start)
    traj = []
    for step in range(steps):
        keep = _inner_keep(unit, N, deleted)
        F, B, branches = _tables(unit, N, keep, w_max, H, dtype)
        best = None
        taken = set(deleted)
        for p in range(total):
            if p in taken:
                continue
            t, col = p // npar, 1 + p % npar
            metric = _parity_metric(_candidate_tables(unit, F, B, branches, t, col), w_max)
            if best is None or metric.key() < best[0].key():
                best = (metric, p)
        metric, p = best
        deleted.append(p)
        traj.append({"step": step + 1, "position": p,
                     "metric": [list(x) for x in metric.pairs]})
        log.debug("parity step %d: delete %d -> %s", step + 1, p, metric.pairs)
    return LadderResult(PunctureLadder(total, tuple(deleted)), traj)


# -- systematic (outer) ladder ---------------------------------------------------


def _outer_keep(unit, P_o, K, deleted):
    n = unit.n_out
    keep = np.ones(K * n, dtype=bool)
    if P_o is not None:
        keep &= P_o.keep_mask()[: K * n]
    for p in deleted:
        keep[p] = False
    return keep.reshape(K, n)


def owef_of(outer: TrellisCode, P_o, K: int, deleted, H: int):
    """Output weight counts ``A[0..H]`` of the punctured outer block (all-zero word included)."""
    unit = _unit(outer)
    keep = _outer_keep(unit, P_o, K, deleted)
    F, _, _ = _tables(unit, K - unit.memory, keep, None, H, object)
    return F[-1, 0, 0]


def _owef_metric(A, d_span):
    """Metric from counts ``A`` (index 0 includes the all-zero word)."""
    if A[0] > 1:
        return None  # some nonzero information word is invisible: not invertible
    nz = [d for d in range(1, len(A)) if A[d]]
    if not nz:
        return OwefMetric(len(A), ())
    d0 = nz[0]
    vec = tuple(int(A[d]) if d < len(A) else 0 for d in range(d0, d0 + d_span + 1))
    return OwefMetric(d0, vec)


def is_invertible_rank(outer: TrellisCode, P_o, K: int, deleted) -> bool:
    """GF(2) rank test: the surviving bits determine the information word."""
    unit = _unit(outer)
    from .trellis import encode

    info = K - unit.memory
    keep = _outer_keep(unit, P_o, K, deleted).ravel()
    rows = []
    for i in range(info):
        e = np.zeros(info, dtype=np.int64)
        e[i] = 1
        bits = encode(unit, e, terminate=True).bits[keep]
        rows.append(int("".join(map(str, bits)) or "0", 2))
    rank = 0
    pivots = {}
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top in pivots:
                r ^= pivots[top]
            else:
                pivots[top] = r
                rank += 1
                break
    return rank == info


def optimize_systematic_ladder(
    outer: TrellisCode,
    P_o: PuncturePattern | None,
    K: int,
    d_max: int | None = None,
    steps: int | None = None,
    restrict_to_parity: bool = False,
) -> LadderResult:
    """Greedy puncturing of ``C_o'`` bits (the de-interleaved systematic pattern).

    Each step deletes the surviving outer bit whose removal gives the best
    :class:`OwefMetric` while keeping the code invertible.  The number of
    steps is capped so that ``C_o''`` never exceeds rate one.
    """
    unit = _unit(outer)
    info = K - unit.memory
    n = unit.n_out
    keep0 = _outer_keep(unit, P_o, K, ())
    N = int(keep0.sum())
    cap = N - K  # rate of C_o'' <= 1 counting the tail sections as nominal input
    steps = cap if steps is None else steps
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if steps > cap:
        raise ValueError(f"at most {cap} deletions keep the outer rate <= 1")
    A0 = owef_of(unit, P_o, K, (), 30)
    d_free0 = next(d for d in range(1, len(A0)) if A0[d])
    span = 6 if d_max is None else d_max - d_free0
    deleted: list[int] = []
    traj = []
    result = LadderResult(PunctureLadder(K * n, ()), traj)
    for step in range(steps):
        keep = _outer_keep(unit, P_o, K, deleted)
        A = owef_of(unit, P_o, K, deleted, d_free0)
        cur_dfree = next((d for d in range(1, len(A)) if A[d]), d_free0)
        H = cur_dfree + span + 1
        F, B, branches = _tables(unit, info, keep, None, H, object)
        best = None
        for t in range(K):
            for col in range(n):
                if not keep[t, col]:
                    continue
                if restrict_to_parity and col == 0:
                    continue
                table = _candidate_tables(unit, F, B, branches, t, col)[0]
                metric = _owef_metric(table, span)
                if metric is None:
                    continue
                if best is None or metric.key() < best[0].key():
                    best = (metric, t * n + col)
        if best is None:
            result.stopped_early = True
            result.diagnostic = f"no invertible candidate left after {step} deletions"
            log.warning(result.diagnostic)
            break
        metric, p = best
        deleted.append(p)
        traj.append({"step": step + 1, "position": p, "d_free": metric.d_free,
                     "multiplicities": list(metric.multiplicities)})
    result.ladder = PunctureLadder(K * n, tuple(deleted))
    return result


def random_parity_metric(inner, N, M, w_max=4, trials=100, seed=0):
    """Best metric over ``trials`` random parity patterns with ``M`` deletions."""
    rng = np.random.default_rng(seed)
    unit = _unit(inner)
    total = N * (unit.n_out - 1)
    H = _initial_hcap(unit, N, w_max)
    best = None
    for _ in range(trials):
        dels = rng.choice(total, size=M, replace=False)
        m = parity_metric_of(unit, N, dels, w_max, H)
        if best is None or m.key() < best.key():
            best = m
    return best
