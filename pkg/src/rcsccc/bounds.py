"""Uniform-interleaver composition and union bounds.

The serial code is analysed as the parallel combination of the outer code
seen through its surviving systematic positions (``C_o''``) and the
parity-only inner code (``C_i'``), both fed by the same ``C_o'`` codeword
of weight ``l``.  Averaging over all interleavers gives

    A[w, h] = sum_{l, j + m = h} A_o[w, l, j] * A_i[l, m] / C(N, l).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import erfc

from .enumerator import DistanceSummary, InnerJointEnumerator, OuterJointEnumerator


@dataclass
class SCCCSpectrum:
    """Interleaver-averaged multiplicities ``coeffs[(w, h)]`` (exact fractions).

    Coefficients are complete for ``h <= h_limit`` up to the enumerator caps
    on ``w`` and ``l``, which are recorded in ``truncated``.
    """

    coeffs: dict
    N: int
    info_bits: int
    h_limit: int
    truncated: dict = field(default_factory=dict)

    @property
    def h_m(self) -> int:
        hs = [h for (w, h), v in self.coeffs.items() if v > 0]
        if not hs:
            raise ValueError("empty spectrum")
        return min(hs)

    def multiplicity(self, h: int) -> Fraction:
        return sum((v for (w, hh), v in self.coeffs.items() if hh == h), Fraction(0))

    @property
    def N_hm(self) -> Fraction:
        return self.multiplicity(self.h_m)

    def distance_spectrum(self) -> dict:
        """``{h: sum_w A[w, h]}``."""
        out = {}
        for (w, h), v in sorted(self.coeffs.items()):
            out[h] = out.get(h, Fraction(0)) + v
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["w", "h", "coefficient"])
        for (w, h), v in sorted(self.coeffs.items()):
            wr.writerow([w, h, _decimal(v)])
        return buf.getvalue()


def _decimal(v: Fraction, digits: int = 17) -> str:
    return f"{float(v):.{digits}g}" if v else "0"


def compose_uniform(
    outer: OuterJointEnumerator,
    inner: InnerJointEnumerator,
    N: int | None = None,
    mode: str = "exact",
    h_limit: int | None = None,
) -> SCCCSpectrum:
    """Average the serial code spectrum over the uniform interleaver.

    ``mode="exact"`` uses the exact binomial ``1 / C(N, l)``.  ``"approx"``
    replaces every binomial by its power-of-``N`` upper bound, writing each
    block count as ``C(N/p, n) * a`` (``a`` the per-placement coefficient)::

        a_o * a_i * N**(n_o + n_i - l) * l**l * l! / (p**(n_o + n_i) * n_o! * n_i!)

    which dominates the exact value term by term.
    """
    if N is None:
        N = outer.N
    if outer.N != N or inner.N != N:
        raise ValueError(f"enumerator block lengths {outer.N}, {inner.N} != N={N}")
    if mode not in ("exact", "approx"):
        raise ValueError(f"unknown composition mode {mode!r}")
    if outer.counts.size == 0 or inner.counts.size == 0:
        raise ValueError("empty enumerator")
    if h_limit is None:
        h_limit = min(outer.caps["j_cap"], inner.caps["m_cap"])
    coeffs: dict = {}
    if mode == "exact":
        A = outer.wlj()
        I = inner.lm()
        L = min(A.shape[1], I.shape[0])
        # l = 0 only matters for codes that map information words to zero
        for l in range(L):
            b = I[l]
            if not b.any():
                continue
            binom = math.comb(N, l)
            for w in range(1, A.shape[0]):
                a = A[w, l]
                if not a.any():
                    continue
                conv = np.convolve(a.astype(object), b.astype(object))
                for h in np.nonzero(conv[: h_limit + 1])[0]:
                    key = (w, int(h))
                    coeffs[key] = coeffs.get(key, Fraction(0)) + Fraction(int(conv[h]), binom)
    else:
        p = outer.bits_per_step
        if N % p:
            raise ValueError("N must be a multiple of bits_per_step")
        sections = N // p
        inner_rows = {0: [(0, 0, Fraction(1))]}
        for l, m, ni, c in inner.nonzero():
            inner_rows.setdefault(l, []).append((m, ni, Fraction(c, math.comb(sections, ni))))
        for w, l, j, no, c in outer.nonzero():
            if w == 0 or l not in inner_rows or j > h_limit:
                continue
            a_o = Fraction(c, math.comb(sections, no))
            for m, ni, a_i in inner_rows[l]:
                h = j + m
                if h > h_limit:
                    continue
                factor = Fraction(
                    N ** (no + ni) * l**l * math.factorial(l),
                    N**l * p ** (no + ni) * math.factorial(no) * math.factorial(ni),
                )
                key = (w, h)
                coeffs[key] = coeffs.get(key, Fraction(0)) + a_o * a_i * factor
    trunc = {f"outer_{k}": v for k, v in outer.truncated.items()}
    trunc.update({f"inner_{k}": v for k, v in inner.truncated.items()})
    info = outer.info_bits or outer.K
    return SCCCSpectrum(coeffs, N, info, h_limit, trunc)


# -- union bounds ---------------------------------------------------------------


@dataclass
class BoundCurve:
    ebno_db: np.ndarray
    values: np.ndarray
    kind: str
    kernel: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["ebno_db", "value"])
        for x, y in zip(self.ebno_db, self.values):
            wr.writerow([repr(float(x)), f"{float(y):.17g}"])
        return buf.getvalue()


def _kernel(kernel: str, x: float) -> float:
    if kernel == "exponential":
        return math.exp(-x)
    if kernel == "erfc":
        return 0.5 * float(erfc(math.sqrt(x)))
    raise ValueError(f"unknown kernel {kernel!r}")


def _union_bound(spec: SCCCSpectrum, R, grid, kernel: str, weights, kind: str) -> BoundCurve:
    R = float(Fraction(R))
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    terms = sorted(spec.coeffs.items())
    vals = []
    for db in grid:
        ebno = 10.0 ** (db / 10.0)
        # fixed summation order + compensated summation
        vals.append(math.fsum(float(weights(w) * v) * _kernel(kernel, h * R * ebno)
                              for (w, h), v in terms))
    return BoundCurve(grid, np.array(vals), kind, kernel)


def union_bound_bit(spec: SCCCSpectrum, R, ebno_grid, kernel: str = "exponential") -> BoundCurve:
    """Bit-error union bound, each term weighted by ``w / info_bits``."""
    k = Fraction(spec.info_bits)
    return _union_bound(spec, R, ebno_grid, kernel, lambda w: Fraction(w) / k, "bit")


def union_bound_frame(spec: SCCCSpectrum, R, ebno_grid, kernel: str = "exponential") -> BoundCurve:
    return _union_bound(spec, R, ebno_grid, kernel, lambda w: 1, "frame")


def cumulative_spectrum(spec: SCCCSpectrum) -> dict:
    """``{d: sum_{h <= d} sum_w A[w, h]}`` for ``d = 0 .. h_limit``."""
    ds = spec.distance_spectrum()
    out, acc = {}, Fraction(0)
    for d in range(spec.h_limit + 1):
        acc += ds.get(d, Fraction(0))
        out[d] = acc
    return out


# -- asymptotics ----------------------------------------------------------------


@dataclass
class AsymptoticReport:
    alpha_M: int
    h_alpha_M: int
    h_alpha_M_lower: int
    parity: str
    branch: str
    branches: dict
    alpha_of_h: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "alpha_M": self.alpha_M,
            "h_alpha_M": self.h_alpha_M,
            "h_alpha_M_lower": self.h_alpha_M_lower,
            "parity": self.parity,
            "branch": self.branch,
            "branches": self.branches,
            "alpha_of_h": {str(k): v for k, v in sorted(self.alpha_of_h.items())},
        }


def alpha_max_closed_form(d_f_o_prime: int) -> int:
    return -((d_f_o_prime + 1) // 2)


def asymptotic_report(summary: DistanceSummary, alpha_of_h: dict | None = None) -> AsymptoticReport:
    """Interleaver-gain exponent and the weight ``h(alpha_M)`` that carries it.

    For odd ``d_f^{o'}`` the weight-``d_f`` term competes with the input
    weights ``d_f + 1`` and ``2 d_f`` that reach the same exponent; the
    report takes the smallest weight among these, and names the winner.
    """
    dfo = summary.d_f_o_prime
    deff = summary.d_f_eff_inner
    d_at = summary.d_odprime_at
    if dfo not in d_at:
        raise ValueError("summary lacks d^{o''}(d_f^{o'})")
    alpha_M = alpha_max_closed_form(dfo)
    branches = {}
    if dfo % 2 == 0:
        parity = "even"
        branches[f"l={dfo}"] = dfo * deff // 2 + d_at[dfo]
        lower = dfo * deff // 2 + summary.d_f_o_dprime
    else:
        parity = "odd"
        branches[f"l={dfo}"] = (dfo - 3) * deff // 2 + summary.h_m3 + d_at[dfo]
        lower = (dfo - 3) * deff // 2 + summary.h_m3 + summary.d_f_o_dprime
        if dfo == 3:
            if dfo + 1 in d_at:
                branches[f"l={dfo + 1}"] = 2 * deff + d_at[dfo + 1]
            branches[f"l={2 * dfo}"] = 3 * deff + 2 * d_at[dfo]
            lower = min(lower, 2 * deff + summary.d_f_o_dprime,
                        3 * deff + 2 * summary.d_f_o_dprime)
    branch = min(branches, key=lambda k: (branches[k], k))
    return AsymptoticReport(alpha_M, branches[branch], lower, parity, branch, branches,
                            dict(alpha_of_h or {}))


def exponent_profile(outer: OuterJointEnumerator, inner: InnerJointEnumerator,
                     h_limit: int | None = None) -> dict:
    """``alpha(h) = max (n_o + n_i - l - 1)`` over the enumerated support.

    Only terms with ``j + m = h`` and nonzero counts on both sides take part.
    """
    if h_limit is None:
        h_limit = min(outer.caps["j_cap"], inner.caps["m_cap"])
    O = outer.counts.sum(axis=0)  # [l, j, n]
    O = O.copy()
    O[0] = 0
    # largest n per (l, j) and per (l, m)
    def max_n(arr):
        nz = arr != 0
        idx = np.arange(arr.shape[-1])
        return np.where(nz.any(axis=-1), (nz * idx).max(axis=-1), -1)

    no = max_n(O)
    ni = max_n(inner.counts)
    alpha = {}
    L = min(no.shape[0], ni.shape[0])
    for l in range(1, L):
        js = np.nonzero(no[l] >= 0)[0]
        ms = np.nonzero(ni[l] >= 0)[0]
        for j in js:
            for m in ms:
                h = int(j + m)
                if h > h_limit:
                    continue
                a = int(no[l, j] + ni[l, m] - l - 1)
                if a > alpha.get(h, -10**9):
                    alpha[h] = a
    return alpha


def report_json(summary: DistanceSummary, spec: SCCCSpectrum, asym: AsymptoticReport,
                extra: dict | None = None) -> str:
    """Every column of the parameter tables plus the asymptotic report."""
    d = {
        "h_m3": summary.h_m3,
        "d_f_eff_inner": summary.d_f_eff_inner,
        "d_odprime_at_dfoprime": summary.d_odprime_at_dfoprime,
        "d_f_o_prime": summary.d_f_o_prime,
        "d_f_o_dprime": summary.d_f_o_dprime,
        "h_alpha_M": asym.h_alpha_M,
        "h_m": spec.h_m,
        "N_hm": float(spec.N_hm),
        "N_hm_exact": f"{spec.N_hm.numerator}/{spec.N_hm.denominator}",
        "asymptotic": asym.to_dict(),
        "truncated": spec.truncated,
    }
    if extra:
        d.update(extra)
    return json.dumps(d, indent=2, sort_keys=True)
