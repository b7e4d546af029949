"""Monte Carlo simulation of punctured serial concatenations over BPSK/AWGN.

LLR convention: natural-log units, positive means bit 0.  Punctured
positions carry an LLR of exactly zero.

Random streams
--------------
Every frame draws from its own ``numpy.random.Generator(PCG64)`` seeded by
``SeedSequence(seed, spawn_key=(point_index, frame_index))``.  The frame first
draws its information bits with ``integers(0, 2, size=info_bits)`` and then
its noise with ``standard_normal(n_tx)`` (numpy's ziggurat sampler).  Results
therefore do not depend on how frames are scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numba
import numpy as np
from scipy.stats import norm

from .puncturing import PuncturePattern, interleave_pattern
from .trellis import GeneratorSpec, TrellisCode, build_trellis

LOG_MAP = "log-map"
MAX_LOG_MAP = "max-log-map"


# -- channel -----------------------------------------------------------------------


def frame_rng(seed: int, frame: int, point: int = 0) -> np.random.Generator:
    """Random stream of one frame (see the module docstring)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(point, frame))))


def bpsk_awgn(bits, keep, ebno_db: float, R, rng: np.random.Generator) -> np.ndarray:
    """Channel LLRs for ``bits`` sent as ``+1/-1`` at the positions where ``keep`` is true.

    ``llr = 4 R Eb/N0 y`` with ``y = x + n`` and ``n ~ N(0, 1 / (2 R Eb/N0))``.
    Punctured positions get exactly zero and consume no noise samples.
    """
    bits = np.asarray(bits)
    keep = np.asarray(keep, dtype=bool)
    if not math.isfinite(ebno_db):
        raise ValueError("ebno_db must be finite")
    es = float(Fraction(R)) * 10.0 ** (ebno_db / 10.0)
    x = 1.0 - 2.0 * bits[keep]
    y = x + rng.standard_normal(x.size) / math.sqrt(2.0 * es)
    llr = np.zeros(bits.shape, dtype=np.float64)
    llr[keep] = 4.0 * es * y
    return llr


# -- SISO --------------------------------------------------------------------------


@numba.njit(cache=True)
def _bit_probs(L):
    """``(P(b=0), P(b=1))`` for an LLR ``L`` (positive favours 0)."""
    if L >= 0.0:
        e = math.exp(-L)
        return 1.0 / (1.0 + e), e / (1.0 + e)
    e = math.exp(L)
    return e / (1.0 + e), 1.0 / (1.0 + e)


@numba.njit(cache=True)
def _gamma_logmap(next_state, outputs, tail_input, info, lu, lc):
    T, n = lc.shape
    S = next_state.shape[0]
    gam = np.zeros((T, S, 2))
    pc = np.empty((n, 2))
    for t in range(T):
        p0, p1 = _bit_probs(lu[t]) if t < info else (1.0, 1.0)
        for c in range(n):
            pc[c, 0], pc[c, 1] = _bit_probs(lc[t, c])
        for s in range(S):
            for u in range(2):
                if t >= info and u != tail_input[s]:
                    continue
                g = p0 if u == 0 else p1
                for c in range(n):
                    g *= pc[c, outputs[s, u, c]]
                gam[t, s, u] = g
    return gam


@numba.njit(cache=True)
def _gamma_maxlog(next_state, outputs, tail_input, info, lu, lc):
    T, n = lc.shape
    S = next_state.shape[0]
    gam = np.full((T, S, 2), -np.inf)
    for t in range(T):
        for s in range(S):
            for u in range(2):
                if t >= info and u != tail_input[s]:
                    continue
                g = 0.5 * lu[t] * (1 - 2 * u) if t < info else 0.0
                for c in range(n):
                    g += 0.5 * lc[t, c] * (1 - 2 * outputs[s, u, c])
                gam[t, s, u] = g
    return gam


@numba.njit(cache=True)
def _clip(x, clip):
    return min(max(x, -clip), clip)


@numba.njit(cache=True)
def _siso_kernel(next_state, outputs, tail_input, info, lu, lc, exact, clip, want_c=True):
    """Forward-backward pass over a terminated trellis.

    The exact variant (log-MAP) works on normalized probabilities, which is
    the same recursion as the jacobian-logarithm form with fewer
    transcendental calls; the max-log variant works on log metrics.
    Returns ``(ext_u, ext_c, post_u)``; ``ext_c`` stays zero unless
    ``want_c``.
    """
    T, n = lc.shape
    S = next_state.shape[0]
    if exact:
        gam = _gamma_logmap(next_state, outputs, tail_input, info, lu, lc)
        zero, one = 0.0, 1.0
    else:
        gam = _gamma_maxlog(next_state, outputs, tail_input, info, lu, lc)
        zero, one = -np.inf, 0.0
    alpha = np.full((T + 1, S), zero)
    beta = np.full((T + 1, S), zero)
    alpha[0, 0] = one
    beta[T, 0] = one
    for t in range(T):
        for s in range(S):
            a = alpha[t, s]
            for u in range(2):
                ns = next_state[s, u]
                if exact:
                    alpha[t + 1, ns] += a * gam[t, s, u]
                else:
                    alpha[t + 1, ns] = max(alpha[t + 1, ns], a + gam[t, s, u])
        _normalize(alpha[t + 1], exact)
    for t in range(T - 1, -1, -1):
        for s in range(S):
            b = zero
            for u in range(2):
                ns = next_state[s, u]
                if exact:
                    b += gam[t, s, u] * beta[t + 1, ns]
                else:
                    b = max(b, gam[t, s, u] + beta[t + 1, ns])
            beta[t, s] = b
        _normalize(beta[t], exact)
    ext_u = np.zeros(T)
    ext_c = np.zeros((T, n))
    post_u = np.zeros(T)
    num_c = np.empty(n)
    den_c = np.empty(n)
    for t in range(T):
        num_u = zero
        den_u = zero
        for c in range(n):
            num_c[c] = zero
            den_c[c] = zero
        for s in range(S):
            for u in range(2):
                ns = next_state[s, u]
                if exact:
                    v = alpha[t, s] * gam[t, s, u] * beta[t + 1, ns]
                    if u == 0:
                        num_u += v
                    else:
                        den_u += v
                else:
                    v = alpha[t, s] + gam[t, s, u] + beta[t + 1, ns]
                    if u == 0:
                        num_u = max(num_u, v)
                    else:
                        den_u = max(den_u, v)
                if want_c:
                    for c in range(n):
                        if exact:
                            if outputs[s, u, c] == 0:
                                num_c[c] += v
                            else:
                                den_c[c] += v
                        elif outputs[s, u, c] == 0:
                            num_c[c] = max(num_c[c], v)
                        else:
                            den_c[c] = max(den_c[c], v)
        if t < info:
            p = _llr(num_u, den_u, exact)
            post_u[t] = _clip(p, clip)
            ext_u[t] = _clip(p - lu[t], clip)
        if want_c:
            for c in range(n):
                ext_c[t, c] = _clip(_llr(num_c[c], den_c[c], exact) - lc[t, c], clip)
    return ext_u, ext_c, post_u


@numba.njit(cache=True)
def _normalize(row, exact):
    if exact:
        tot = row.sum()
        if tot > 0.0:
            row /= tot
    else:
        m = row.max()
        if m > -np.inf:
            row -= m


@numba.njit(cache=True)
def _llr(num, den, exact):
    if not exact:
        return num - den
    if num == 0.0:
        return -np.inf if den > 0.0 else 0.0
    if den == 0.0:
        return np.inf
    return math.log(num / den)


@numba.njit(cache=True)
def _encode_kernel(next_state, outputs, tail_input, info, memory):
    n = outputs.shape[2]
    out = np.empty((info.size + memory, n), dtype=np.int8)
    s = 0
    for t in range(info.size + memory):
        u = info[t] if t < info.size else tail_input[s]
        for c in range(n):
            out[t, c] = outputs[s, u, c]
        s = next_state[s, u]
    return out


def siso_decode(trellis: TrellisCode, prior_input_llr, prior_output_llr, info_sections: int | None = None,
                siso_kind: str = LOG_MAP, llr_clip: float = 30.0):
    """Forward-backward SISO over a terminated trellis.

    ``prior_input_llr`` has one entry per section (entries of tail sections
    are ignored); ``prior_output_llr`` has shape ``(sections, n_out)``.
    Returns ``(extrinsic_input, extrinsic_output, posterior_input)``; the
    extrinsics exclude each position's own prior.
    """
    if trellis.bits_per_step != 1:
        trellis = build_trellis(trellis.spec)
    lc = np.ascontiguousarray(prior_output_llr, dtype=np.float64)
    T = lc.shape[0]
    if lc.ndim != 2 or lc.shape[1] != trellis.n_out:
        raise ValueError(f"output priors must have shape (sections, {trellis.n_out})")
    lu = np.zeros(T) if prior_input_llr is None else np.ascontiguousarray(prior_input_llr, dtype=np.float64)
    if lu.shape != (T,):
        raise ValueError("input priors must have one entry per section")
    if not (np.all(np.isfinite(lc)) and np.all(np.isfinite(lu))):
        raise ValueError("non-finite LLR input")
    if siso_kind not in (LOG_MAP, MAX_LOG_MAP):
        raise ValueError(f"unknown SISO kind {siso_kind!r}")
    info = T - trellis.memory if info_sections is None else info_sections
    return _siso_kernel(trellis.next_state.astype(np.int64), trellis.outputs.astype(np.int64),
                        trellis.tail_input.astype(np.int64), info, lu, lc,
                        siso_kind == LOG_MAP, float(llr_clip))


# -- configuration -----------------------------------------------------------------


@dataclass(frozen=True)
class DecoderConfig:
    iterations: int = 10
    siso_kind: str = LOG_MAP
    llr_clip: float = 30.0
    stopping: str = "fixed"  # or "early-exit"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.llr_clip > 0:
            raise ValueError("llr_clip must be > 0")
        if self.siso_kind not in (LOG_MAP, MAX_LOG_MAP):
            raise ValueError(f"unknown SISO kind {self.siso_kind!r}")
        if self.stopping not in ("fixed", "early-exit"):
            raise ValueError(f"unknown stopping rule {self.stopping!r}")


@dataclass
class SCCCConfig:
    """A complete punctured serial concatenation.

    ``K`` counts outer trellis sections including the termination tail, so
    the frame carries ``K - memory`` information bits.  ``P_prime`` deletes
    outer mother-code positions (``n_out * t + c``) and is moved through the
    interleaver to give the inner systematic pattern.  ``P_i_p`` indexes the
    ``N`` inner parity bits of the information sections; the inner tail is
    always sent.
    """

    outer: GeneratorSpec
    inner: GeneratorSpec
    K: int
    P_o: PuncturePattern
    perm: np.ndarray
    P_prime: PuncturePattern
    P_i_p: PuncturePattern
    perm_seed: int | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.perm = np.asarray(self.perm, dtype=np.int64)
        n_o = self.outer.n_out
        if self.P_o.length != self.K * n_o or self.P_prime.length != self.K * n_o:
            raise ValueError(f"outer patterns must have length K*n = {self.K * n_o}")
        kept = self.P_o.keep_mask()
        if not kept[list(self.P_prime.deleted)].all():
            raise ValueError("P_prime deletes a position already removed by P_o")
        N = int(kept.sum())
        if self.perm.size != N or not np.array_equal(np.sort(self.perm), np.arange(N)):
            raise ValueError(f"interleaver must be a permutation of length N = {N}")
        if self.inner.n_out != 2:
            raise ValueError("inner code must be systematic with one parity output")
        if self.P_i_p.length != N:
            raise ValueError(f"inner parity pattern must have length N = {N}")
        if self.K <= self.outer_trellis.memory:
            raise ValueError("K must exceed the outer memory")

    @classmethod
    def from_ladders(cls, outer, inner, K, P_o, sys_ladder, sys_deleted, par_ladder, par_deleted,
                     perm_seed=0, tile: int = 1):
        """Build a configuration from ladder prefixes, tiled ``tile`` times."""
        from .puncturing import ladder_step

        P_prime = ladder_step(sys_ladder, sys_deleted)
        P_i_p = ladder_step(par_ladder, par_deleted)
        if tile > 1:
            P_prime = P_prime.tiled(P_prime.length * tile)
            P_i_p = P_i_p.tiled(P_i_p.length * tile)
        P_o = P_o.tiled(P_o.length * tile) if P_o.length != K * outer.n_out * tile else P_o
        K = K * tile
        N = P_o.num_kept
        perm = interleaver(N, perm_seed)
        return cls(outer, inner, K, P_o, perm, P_prime, P_i_p, perm_seed)

    @property
    def outer_trellis(self) -> TrellisCode:
        if "outer" not in self._cache:
            self._cache["outer"] = build_trellis(self.outer)
        return self._cache["outer"]

    @property
    def inner_trellis(self) -> TrellisCode:
        if "inner" not in self._cache:
            self._cache["inner"] = build_trellis(self.inner)
        return self._cache["inner"]

    def arrays(self, which: str):
        """``(next_state, outputs, tail_input)`` as int64 arrays for the kernels."""
        key = "arr_" + which
        if key not in self._cache:
            tr = self.outer_trellis if which == "outer" else self.inner_trellis
            self._cache[key] = (tr.next_state.astype(np.int64), tr.outputs.astype(np.int64),
                                tr.tail_input.astype(np.int64))
        return self._cache[key]

    @property
    def inverse_perm(self) -> np.ndarray:
        if "inv" not in self._cache:
            inv = np.empty_like(self.perm)
            inv[self.perm] = np.arange(self.N)
            self._cache["inv"] = inv
        return self._cache["inv"]

    @property
    def N(self) -> int:
        return int(self.perm.size)

    @property
    def info_bits(self) -> int:
        return self.K - self.outer_trellis.memory

    @property
    def outer_index(self) -> np.ndarray:
        """Mother-code position of each of the ``N`` outer code bits."""
        if "idx" not in self._cache:
            self._cache["idx"] = np.flatnonzero(self.P_o.keep_mask())
        return self._cache["idx"]

    @property
    def P_i_s(self) -> PuncturePattern:
        """Inner systematic pattern: ``P_prime`` seen at the interleaver output."""
        if "P_i_s" not in self._cache:
            pos = {int(m): i for i, m in enumerate(self.outer_index)}
            on_outer = PuncturePattern(self.N, tuple(pos[d] for d in self.P_prime.deleted))
            self._cache["P_i_s"] = interleave_pattern(on_outer, self.perm)
        return self._cache["P_i_s"]

    def inner_keep(self) -> np.ndarray:
        """Keep mask of shape ``(N + memory, 2)`` over the inner code bits."""
        if "keep" in self._cache:
            return self._cache["keep"]
        nu = self.inner_trellis.memory
        keep = np.ones((self.N + nu, 2), dtype=bool)
        keep[: self.N, 0] = self.P_i_s.keep_mask()
        keep[: self.N, 1] = self.P_i_p.keep_mask()
        self._cache["keep"] = keep
        return keep

    @property
    def transmitted(self) -> int:
        return int(self.inner_keep().sum())

    @property
    def rate(self) -> Fraction:
        """Information bits per transmitted bit (tails included)."""
        return Fraction(self.info_bits, self.transmitted)

    def describe(self) -> dict:
        return {
            "outer": str(self.outer),
            "inner": str(self.inner),
            "K": self.K,
            "N": self.N,
            "info_bits": self.info_bits,
            "transmitted": self.transmitted,
            "rate": str(self.rate),
            "systematic_deleted": len(self.P_prime.deleted),
            "parity_deleted": len(self.P_i_p.deleted),
            "interleaver": "numpy PCG64 permutation",
            "interleaver_seed": self.perm_seed,
        }


def interleaver(N: int, seed: int) -> np.ndarray:
    """Seeded pseudo-random permutation: ``default_rng(seed).permutation(N)``."""
    return np.random.default_rng(seed).permutation(N)


# -- encode / decode ---------------------------------------------------------------


def sccc_encode(cfg: SCCCConfig, info) -> np.ndarray:
    """Inner code bits, shape ``(N + memory, 2)`` (before puncturing)."""
    info = np.asarray(info, dtype=np.int64)
    if info.shape != (cfg.info_bits,):
        raise ValueError(f"expected {cfg.info_bits} information bits")
    ns, out, tail = cfg.arrays("outer")
    c = _encode_kernel(ns, out, tail, info, cfg.outer_trellis.memory).ravel()[cfg.outer_index]
    ns, out, tail = cfg.arrays("inner")
    return _encode_kernel(ns, out, tail, c[cfg.perm].astype(np.int64), cfg.inner_trellis.memory)


@dataclass
class DecodeResult:
    info: np.ndarray
    iterations: int
    per_iteration: list  # hard decisions after each iteration
    extrinsic_mean_abs: list


def sccc_iterative_decode(cfg: SCCCConfig, llr: np.ndarray, dec: DecoderConfig = DecoderConfig(),
                          keep_history: bool = False) -> DecodeResult:
    """Iterative decoding of one frame from channel LLRs of shape ``(N + memory, 2)``.

    The inner SISO sees the channel LLRs of its systematic and parity bits
    and the interleaved outer extrinsics as input priors.  Its input
    extrinsics contain the systematic channel term, so the outer decoder
    receives the directly observed outer bits through the same path.
    """
    inner, outer = cfg.inner_trellis, cfg.outer_trellis
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (cfg.N + inner.memory, 2):
        raise ValueError(f"channel LLRs must have shape {(cfg.N + inner.memory, 2)}")
    N, K, n_o = cfg.N, cfg.K, outer.n_out
    idx = cfg.outer_index
    inv = cfg.inverse_perm
    arr_i, arr_o = cfg.arrays("inner"), cfg.arrays("outer")
    exact, clip = dec.siso_kind == LOG_MAP, float(dec.llr_clip)
    no_prior = np.zeros(K)
    prior_v = np.zeros(N + inner.memory)
    lc_outer = np.zeros(K * n_o)
    history, mags = [], []
    info_hat = np.zeros(cfg.info_bits, dtype=np.int8)
    it = 0
    for it in range(1, dec.iterations + 1):
        ext_v, _, _ = _siso_kernel(*arr_i, N, prior_v, llr, exact, clip, False)
        if dec.stopping == "early-exit":
            # inner posterior on its input bits, before the prior is replaced
            v_hat = (ext_v[:N] + prior_v[:N] < 0).astype(np.int8)
        # deinterleave: outer code bit i sits at inner position inv[i]
        lc_outer[:] = 0.0
        lc_outer[idx] = ext_v[:N][inv]
        _, ext_c, post_u = _siso_kernel(*arr_o, cfg.info_bits, no_prior, lc_outer.reshape(K, n_o),
                                        exact, clip)
        info_hat = (post_u[: cfg.info_bits] < 0).astype(np.int8)
        ext_flat = ext_c.ravel()[idx]
        prior_v[:N] = ext_flat[cfg.perm]
        mags.append(float(np.mean(np.abs(ext_v[:N]))))
        if keep_history:
            history.append(info_hat.copy())
        if dec.stopping == "early-exit" and it < dec.iterations:
            if _reencode_matches(cfg, info_hat, v_hat):
                break
    return DecodeResult(info_hat, it, history, mags)


def _reencode_matches(cfg, info_hat, v_hat) -> bool:
    """Hard decisions of the inner input bits agree with the re-encoded estimate."""
    return bool(np.array_equal(sccc_encode(cfg, info_hat)[: cfg.N, 0], v_hat))


# -- Monte Carlo ---------------------------------------------------------------------


@dataclass
class SimPoint:
    ebno_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    iterations: int  # summed over frames
    bits: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.frames else float("nan")

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else float("nan")

    @property
    def avg_iterations(self) -> float:
        return self.iterations / self.frames if self.frames else float("nan")

    def ci(self, level: float = 0.95) -> tuple[float, float]:
        """Normal-approximation interval on the FER, clipped to ``[0, 1]``."""
        z = float(norm.ppf(0.5 + level / 2))
        p = self.fer
        half = z * math.sqrt(p * (1 - p) / self.frames)
        return max(0.0, p - half), min(1.0, p + half)

    @property
    def exact_zero(self) -> bool:
        return self.frame_errors == 0


@dataclass
class SimReport:
    points: list
    config: dict
    seed: int
    ci_method: str = "normal approximation, 95%"

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["ebno_db", "frames", "bit_errors", "frame_errors", "ber", "fer",
                     "ci_low", "ci_high", "avg_iterations"])
        for p in self.points:
            lo, hi = p.ci()
            wr.writerow([repr(float(p.ebno_db)), p.frames, p.bit_errors, p.frame_errors,
                         f"{p.ber:.10g}", f"{p.fer:.10g}", f"{lo:.10g}", f"{hi:.10g}",
                         f"{p.avg_iterations:.6g}"])
        return buf.getvalue()


def simulate_frame(cfg: SCCCConfig, dec: DecoderConfig, ebno_db: float, seed: int, frame: int,
                   point: int = 0, noiseless: bool = False):
    """Run one frame; returns ``(bit_errors, iterations)``."""
    rng = frame_rng(seed, frame, point)
    info = rng.integers(0, 2, size=cfg.info_bits).astype(np.int8)
    code = sccc_encode(cfg, info)
    keep = cfg.inner_keep()
    if noiseless:
        llr = np.where(keep, dec.llr_clip * (1.0 - 2.0 * code), 0.0)
    else:
        llr = bpsk_awgn(code, keep, ebno_db, cfg.rate, rng)
    res = sccc_iterative_decode(cfg, llr, dec)
    return int(np.count_nonzero(res.info != info)), res.iterations


def _run_batch(args):
    cfg, dec, ebno_db, seed, point, start, stop, noiseless = args
    out = []
    for f in range(start, stop):
        out.append(simulate_frame(cfg, dec, ebno_db, seed, f, point, noiseless))
    return out


def run_monte_carlo(cfg: SCCCConfig, ebno_grid, dec: DecoderConfig = DecoderConfig(), seed: int = 0,
                    min_frame_errors: int = 100, max_frames: int = 10_000, batch: int = 50,
                    workers: int = 1) -> SimReport:
    """Simulate each Eb/N0 point until ``min_frame_errors`` or ``max_frames``.

    Frames run in fixed batches and the stop rule is checked only between
    batches, so counts are identical for any number of ``workers``.  An
    infinite Eb/N0 runs noiseless frames.
    """
    if min_frame_errors < 1 or max_frames < 1 or batch < 1:
        raise ValueError("stop thresholds must be positive")
    points = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for k, db in enumerate(np.atleast_1d(np.asarray(ebno_grid, dtype=float))):
            noiseless = math.isinf(db) and db > 0
            pt = SimPoint(float(db), 0, 0, 0, 0)
            while pt.frames < max_frames and pt.frame_errors < min_frame_errors:
                span = workers * batch
                stop = min(pt.frames + span, max_frames)
                jobs = [(cfg, dec, float(db), seed, k, a, min(a + batch, stop), noiseless)
                        for a in range(pt.frames, stop, batch)]
                results = pool.map(_run_batch, jobs) if pool else map(_run_batch, jobs)
                for res in results:
                    # batches beyond the stopping point are discarded so that
                    # the totals do not depend on the worker count
                    if pt.frame_errors >= min_frame_errors:
                        break
                    for errs, its in res:
                        pt.frames += 1
                        pt.bits += cfg.info_bits
                        pt.bit_errors += errs
                        pt.frame_errors += errs > 0
                        pt.iterations += its
            points.append(pt)
    finally:
        if pool:
            pool.shutdown()
    return SimReport(points, cfg.describe(), seed)
