"""Truncated joint weight enumerators of punctured constituent codes.

Every enumerator is computed by a forward recursion over the whole,
position-dependent trellis of one block, so aperiodic puncturing patterns
are handled exactly.  Counts are integers; arrays switch to Python ints
when the block is long enough that int64 could overflow.

Framing follows the reference case study: an outer frame of ``K`` trellis
sections carries ``K - memory`` information bits and ends with the
termination tail, so the punctured outer block has exactly
``N = K / R_c^{o'}`` bits.  The inner encoder reads the ``N`` interleaved
bits and is terminated by ``memory`` appended sections whose output bits
are sent unpunctured.

An error event is a path segment that leaves state zero and returns to it
on an information (non-tail) branch; the event counter ``n`` advances when
the event closes.  Segments closed by the tail, or still open at the end of
an unterminated block, are pinned to the frame end and are not counted:
only freely placeable events contribute the ``N^n`` growth that the
interleaver-gain exponent measures.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from fractions import Fraction

import numpy as np

from .puncturing import PuncturePattern
from .trellis import CapExceededError, TrellisCode, build_trellis

DEFAULT_CAPS = dict(w_cap=8, l_cap=24, j_cap=24, m_cap=40, n_cap=6)


def _count_dtype(sections: int, w_cap: int):
    bound = sum(math.comb(sections, w) for w in range(min(w_cap, sections) + 1))
    return np.int64 if bound < 2**62 else object


def _unit(trellis: TrellisCode) -> TrellisCode:
    return trellis if trellis.bits_per_step == 1 else build_trellis(trellis.spec)


def joint_recursion(
    trellis: TrellisCode,
    sections: int,
    weight_masks,
    caps,
    n_cap: int | None,
    w_cap: int,
    terminate: bool,
):
    """Forward recursion counting paths by (input weight, masked weights, events).

    ``weight_masks`` is a list of boolean arrays of shape
    ``(sections + tail, n_out)``; each yields one tracked output weight
    capped at the matching entry of ``caps``.  Returns the count array
    indexed ``[w, a_1, ..., a_k, n]`` (the ``n`` axis is absent when
    ``n_cap`` is None) and a dict of truncation flags.
    """
    unit = _unit(trellis)
    tail = unit.memory if terminate else 0
    T = sections + tail
    masks = [np.asarray(m, dtype=bool) for m in weight_masks]
    for m in masks:
        if m.shape != (T, unit.n_out):
            raise ValueError(f"weight mask shape {m.shape} != {(T, unit.n_out)}")
    S = unit.num_states
    dims = [w_cap + 1] + [c + 1 for c in caps] + ([n_cap + 1] if n_cap is not None else [])
    dtype = _count_dtype(sections, w_cap)
    cur = np.zeros([S] + dims, dtype=dtype)
    cur[(0,) + (0,) * len(dims)] = 1
    truncated = {"w": False, "n": False}
    for k in range(len(masks)):
        truncated[f"a{k}"] = False
    k_axes = len(dims)
    for t in range(T):
        new = np.zeros_like(cur)
        tail_step = t >= sections
        for s in range(S):
            src_all = cur[s]
            if not src_all.any():
                continue
            inputs = (int(unit.tail_input[s]),) if tail_step else (0, 1)
            for u in inputs:
                ns = unit.next_state[s, u]
                out = unit.outputs[s, u]
                shifts = [0 if tail_step else u]
                shifts += [int(out[m[t]].sum()) for m in masks]
                if n_cap is not None:
                    closes = not tail_step and ns == 0 and (s != 0 or u == 1)
                    shifts.append(1 if closes else 0)
                src_sl, dst_sl = [], []
                for ax, (d, size) in enumerate(zip(shifts, dims)):
                    src_sl.append(slice(0, size - d) if d < size else slice(0, 0))
                    dst_sl.append(slice(d, size) if d < size else slice(0, 0))
                # record mass pushed beyond a cap
                for ax, d in enumerate(shifts):
                    if d == 0:
                        continue
                    name = "w" if ax == 0 else ("n" if (n_cap is not None and ax == k_axes - 1) else f"a{ax - 1}")
                    if truncated[name]:
                        continue
                    size = dims[ax]
                    lost = [slice(None)] * k_axes
                    lost[ax] = slice(max(size - d, 0), size)
                    if src_all[tuple(lost)].any():
                        truncated[name] = True
                new[(ns,) + tuple(dst_sl)] += src_all[tuple(src_sl)]
        cur = new
    result = cur[0] if terminate else cur.sum(axis=0)
    return result, truncated


@dataclass
class OuterJointEnumerator:
    """Counts ``A[w, l, j, n]`` of the punctured outer code.

    ``l`` is the weight of the ``C_o'`` codeword (after ``P_o``), ``j`` the
    weight left after the further systematic puncturing ``P'``.
    """

    counts: np.ndarray
    K: int
    N: int
    caps: dict
    truncated: dict
    bits_per_step: int = 1
    info_bits: int = 0

    def nonzero(self):
        """Iterate ``(w, l, j, n, count)`` over nonzero entries, excluding all-zero."""
        for idx in zip(*np.nonzero(self.counts)):
            if idx[0] == 0 and idx[1] == 0:
                continue
            yield tuple(int(i) for i in idx) + (int(self.counts[idx]),)

    def wlj(self) -> np.ndarray:
        return self.counts.sum(axis=3)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["w", "l", "j", "n", "count"])
        for row in self.nonzero():
            wr.writerow(row)
        return buf.getvalue()


@dataclass
class InnerJointEnumerator:
    """Counts ``A[l, m, n]`` of the parity-only punctured inner code."""

    counts: np.ndarray
    N: int
    caps: dict
    truncated: dict
    bits_per_step: int = 1

    def nonzero(self):
        for idx in zip(*np.nonzero(self.counts)):
            if idx[0] == 0:
                continue
            yield tuple(int(i) for i in idx) + (int(self.counts[idx]),)

    def lm(self) -> np.ndarray:
        return self.counts.sum(axis=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["l", "m", "n", "count"])
        for row in self.nonzero():
            wr.writerow(row)
        return buf.getvalue()


def _keep_matrix(pattern: PuncturePattern | None, T: int, n_out: int, cols=None) -> np.ndarray:
    """Reshape a serialized keep-mask to ``(T, n_out)``, padding uncovered bits as kept."""
    keep = np.ones(T * n_out, dtype=bool)
    if pattern is not None:
        km = pattern.keep_mask()
        L = min(len(km), keep.size)
        keep[:L] = km[:L]
    keep = keep.reshape(T, n_out)
    if cols is not None:
        sel = np.zeros(n_out, dtype=bool)
        sel[cols] = True
        keep &= sel
    return keep


def outer_info_bits(outer: TrellisCode, K: int, terminate: bool = True) -> int:
    """Information bits carried by an outer frame of ``K`` sections."""
    k = K - (outer.memory if terminate else 0)
    if k < 1:
        raise ValueError(f"frame of {K} sections leaves no information bits")
    return k


def outer_masks(outer: TrellisCode, P_o, P_prime, K: int):
    """Keep matrices of ``C_o'`` and ``C_o''`` over the ``K`` outer sections."""
    n = outer.n_out
    keep_o = _keep_matrix(P_o, K, n)
    keep_pp = keep_o & _keep_matrix(P_prime, K, n)
    return keep_o, keep_pp


def outer_block_length(outer: TrellisCode, P_o, K: int) -> int:
    """``N``: bits of a frame that survive ``P_o``."""
    keep_o, _ = outer_masks(outer, P_o, None, K)
    return int(keep_o.sum())


def outer_joint_enumerator(
    outer: TrellisCode,
    P_o: PuncturePattern | None,
    P_prime: PuncturePattern | None,
    K: int,
    caps: dict | None = None,
    terminate: bool = True,
) -> OuterJointEnumerator:
    """Joint enumerator of ``C_o'`` / ``C_o''`` over one frame of ``K`` sections.

    ``P_o`` and ``P_prime`` index the mother-code serialization
    ``0 .. n_out*K - 1``.  ``P_prime`` deletes bits that ``P_o`` keeps (it
    lives on ``C_o'`` bits, i.e. it is the de-interleaved systematic
    puncturing of the inner code).
    """
    c = {**DEFAULT_CAPS, **(caps or {})}
    info = outer_info_bits(outer, K, terminate)
    keep_o, keep_pp = outer_masks(outer, P_o, P_prime, K)
    counts, trunc = joint_recursion(
        outer, info, [keep_o, keep_pp], [c["l_cap"], c["j_cap"]], c["n_cap"], c["w_cap"], terminate
    )
    trunc = {"w": trunc["w"], "l": trunc["a0"], "j": trunc["a1"], "n": trunc["n"]}
    return OuterJointEnumerator(counts, K, int(keep_o.sum()), c, trunc, outer.bits_per_step, info)


def inner_joint_enumerator(
    inner: TrellisCode,
    P_i_p: PuncturePattern | None,
    N: int,
    caps: dict | None = None,
    terminate: bool = True,
) -> InnerJointEnumerator:
    """Enumerate the inner code seen through its surviving parity bits only.

    ``P_i_p`` indexes the parity bits section by section (``N`` positions
    for a rate-1/2 inner code); tail parity bits, when terminated, sit at
    the end of that serialization.
    """
    c = {**DEFAULT_CAPS, **(caps or {})}
    unit = _unit(inner)
    T = N + (unit.memory if terminate else 0)
    sys_cols = 1 if unit.spec.systematic else 0
    npar = unit.n_out - sys_cols
    keep_par = _keep_matrix(P_i_p, T, npar)
    keep = np.zeros((T, unit.n_out), dtype=bool)
    keep[:, sys_cols:] = keep_par
    if terminate and sys_cols:
        keep[N:, 0] = True  # tail systematic bits are sent and never interleaved
    counts, trunc = joint_recursion(
        inner, N, [keep], [c["m_cap"]], c["n_cap"], c["l_cap"], terminate
    )
    trunc = {"l": trunc["w"], "m": trunc["a0"], "n": trunc["n"]}
    return InnerJointEnumerator(counts, N, c, trunc, inner.bits_per_step)


def block_weight_table(trellis, length, deleted=None, outputs="all", w_cap=4, h_cap=20,
                       terminate=False):
    """``table[w, h]``: words of input weight ``w`` and surviving output weight ``h``.

    ``deleted`` indexes the full serialization (``outputs="all"``) or the
    parity-only serialization (``outputs="parity"``).
    """
    unit = _unit(trellis)
    T = length + (unit.memory if terminate else 0)
    n = unit.n_out
    if outputs == "parity" and unit.spec.systematic:
        par = np.ones((T, n - 1), dtype=bool).ravel()
        if deleted is not None:
            par[list(deleted)] = False
        keep = np.zeros((T, n), dtype=bool)
        keep[:, 1:] = par.reshape(T, n - 1)
    else:
        keep = np.ones(T * n, dtype=bool)
        if deleted is not None:
            keep[list(deleted)] = False
        keep = keep.reshape(T, n)
    counts, _ = joint_recursion(unit, length, [keep], [h_cap], None, w_cap, terminate)
    return counts


# -- scalar distance parameters -------------------------------------------------


@dataclass
class DistanceSummary:
    d_f_o_prime: int
    d_f_o_dprime: int
    d_odprime_at_dfoprime: int
    d_f_eff_inner: int
    h_m3: int
    d_w: dict
    A_d: dict
    invertible: bool
    d_odprime_at: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = {
            "d_f_o_prime": self.d_f_o_prime,
            "d_f_o_dprime": self.d_f_o_dprime,
            "d_odprime_at_dfoprime": self.d_odprime_at_dfoprime,
            "d_f_eff_inner": self.d_f_eff_inner,
            "h_m3": self.h_m3,
            "d_w": {str(k): list(v) for k, v in self.d_w.items()},
            "A_d": {str(k): v for k, v in self.A_d.items()},
            "invertible": self.invertible,
            "d_odprime_at": {str(k): v for k, v in self.d_odprime_at.items()},
        }
        return json.dumps(d, indent=2, sort_keys=True)


def _min_index(vec, what, complete=True):
    nz = np.nonzero(vec)[0]
    if nz.size == 0 or not complete:
        if nz.size == 0:
            raise CapExceededError(f"{what}: no nonzero coefficient within the caps")
    return int(nz[0])


def distance_summary(outer_enum: OuterJointEnumerator, inner_enum: InnerJointEnumerator,
                     w_max: int = 4) -> DistanceSummary:
    """Extract the scalar design parameters from a pair of enumerators.

    All minima are taken over nonzero codewords (input weight ``w >= 1`` for
    the outer code, ``l >= 1`` for the inner one).
    """
    A = outer_enum.wlj()
    A = A.copy()
    A[0] = 0  # the all-zero word
    l_marg = A.sum(axis=(0, 2))
    j_marg = A.sum(axis=(0, 1))
    dfo = _min_index(l_marg, "d_f^{o'}")
    if dfo == 0:
        raise CapExceededError("outer code C_o' is not invertible (zero-weight codeword)")
    if dfo >= outer_enum.caps["l_cap"]:
        raise CapExceededError("d_f^{o'} not witnessed below l_cap")
    dfo2 = _min_index(j_marg, "d_f^{o''}")
    d_at = {}
    for l in range(dfo, min(dfo + 2, A.shape[1])):
        col = A[:, l, :].sum(axis=0)
        if col.any():
            d_at[l] = _min_index(col, f"d^{{o''}}({l})")
    I = inner_enum.lm()
    d_w = {}
    for w in range(1, min(w_max, I.shape[0] - 1) + 1):
        if I[w].any():
            m = _min_index(I[w], f"d_{w}")
            d_w[w] = (m, int(I[w][m]))
    if 2 not in d_w or 3 not in d_w:
        raise CapExceededError("inner d_2 / h_m^(3) not witnessed within caps")
    single = inner_enum.counts[2, :, 1] if inner_enum.counts.shape[2] > 1 else I[2]
    d_eff = _min_index(single, "d_f,eff") if np.any(single) else d_w[2][0]
    A_d = {int(d): int(v) for d, v in enumerate(j_marg) if v}
    invertible = all(d > 0 for d, _ in d_w.values())
    return DistanceSummary(
        d_f_o_prime=dfo,
        d_f_o_dprime=dfo2,
        d_odprime_at_dfoprime=d_at[dfo],
        d_f_eff_inner=d_eff,
        h_m3=d_w[3][0],
        d_w=d_w,
        A_d=A_d,
        invertible=invertible,
        d_odprime_at=d_at,
    )


# -- brute-force oracle -----------------------------------------------------------


def _encode_block(unit, bits, terminate):
    from .trellis import encode

    return encode(unit, bits, terminate).bits


def brute_force_spectrum(
    outer: TrellisCode,
    inner: TrellisCode,
    K: int,
    P_o: PuncturePattern | None = None,
    P_prime: PuncturePattern | None = None,
    P_i_p: PuncturePattern | None = None,
    terminate: bool = True,
    method: str = "placements",
):
    """Exact interleaver-averaged spectrum ``{(w, h): Fraction}`` by enumeration.

    The serial chain is simulated literally: the outer codeword is punctured
    by ``P_o`` to ``N`` bits and permuted, and the inner encoder's
    systematic bits are punctured by the permuted image of ``P_prime`` (so
    they are exactly the ``P_prime``-surviving outer bits) while its parity
    bits are punctured by ``P_i_p``.  The average runs over all ``N!``
    permutations (``method="permutations"``) or over all placements of each
    outer codeword's ones (``"placements"``), which is the same thing.
    ``K`` counts outer trellis sections, tail included, as in
    :func:`outer_joint_enumerator`.  The all-zero word is excluded.
    """
    uo, ui = _unit(outer), _unit(inner)
    info = outer_info_bits(uo, K, terminate)
    if info > 8:
        raise ValueError("brute-force oracle is limited to 8 information bits")
    rows = []
    for bits in product((0, 1), repeat=info):
        cw = _encode_block(uo, np.array(bits), terminate)
        keep_o = np.ones(cw.size, bool) if P_o is None else P_o.keep_mask()
        keep_pp = keep_o.copy()
        if P_prime is not None:
            keep_pp &= P_prime.keep_mask()
        j = int(cw[keep_pp].sum())
        rows.append((sum(bits), j, cw[keep_o]))
    N = rows[0][2].size
    if method == "permutations" and N > 8:
        raise ValueError("permutation averaging is limited to N <= 8")
    if N > 12:
        raise ValueError("oracle is limited to N <= 12")
    cache = {}

    def parity_weight(v):
        key = v.tobytes()
        if key not in cache:
            out = _encode_block(ui, v, terminate).reshape(-1, ui.n_out)
            sys_cols = int(ui.spec.systematic)
            par = out[:, sys_cols:].ravel()
            kp = np.ones(par.size, bool)
            if P_i_p is not None:
                m = P_i_p.keep_mask()
                kp[: min(m.size, par.size)] = m[: min(m.size, par.size)]
            wt = int(par[kp].sum())
            if terminate and sys_cols:
                wt += int(out[N:, 0].sum())  # tail systematic bits are sent
            cache[key] = wt
        return cache[key]

    spec = {}
    for w, j, c in rows:
        if w == 0:
            continue
        if method == "permutations":
            total = math.factorial(N)
            for perm in permutations(range(N)):
                h = j + parity_weight(c[list(perm)])
                spec[(w, h)] = spec.get((w, h), 0) + Fraction(1, total)
        else:
            l = int(c.sum())
            total = math.comb(N, l)
            for ones in combinations(range(N), l):
                v = np.zeros(N, dtype=np.int64)
                v[list(ones)] = 1
                h = j + parity_weight(v)
                spec[(w, h)] = spec.get((w, h), 0) + Fraction(1, total)
    return spec
