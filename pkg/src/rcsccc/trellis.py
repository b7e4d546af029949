"""Trellises of systematic recursive convolutional encoders.

Generators are given in the usual octal form, most significant bit first
being the ``D^0`` tap, so ``7`` is ``1 + D + D^2`` and ``15`` is
``1 + D + D^3``.  A code written ``(1, 5/7)`` has a systematic output and
one parity output with forward polynomial 5 and feedback polynomial 7.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidSpecError(ValueError):
    """Raised for generator specifications that do not describe a valid encoder."""


class CapExceededError(RuntimeError):
    """Raised when a truncated search cannot witness the requested minimum."""


def _poly_taps(octal: int) -> list[int]:
    """Coefficients ``[c_0, c_1, ..., c_deg]`` of an octal generator."""
    bits = int(str(octal), 8)
    if bits == 0:
        raise InvalidSpecError("zero generator polynomial")
    deg = bits.bit_length() - 1
    return [(bits >> (deg - i)) & 1 for i in range(deg + 1)]


@dataclass(frozen=True)
class GeneratorSpec:
    """Octal description of a rate ``1/n_out`` systematic recursive encoder."""

    feedback_poly: int
    forward_polys: tuple[int, ...]
    systematic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "forward_polys", tuple(self.forward_polys))
        if not self.forward_polys:
            raise InvalidSpecError("at least one forward polynomial is required")
        fb = _poly_taps(self.feedback_poly)
        if fb[0] != 1 or int(str(self.feedback_poly), 8) % 2 == 0:
            raise InvalidSpecError(
                f"feedback polynomial {self.feedback_poly} has no delay-free tap"
            )
        for g in self.forward_polys:
            _poly_taps(g)

    @classmethod
    def parse(cls, text: str) -> "GeneratorSpec":
        """Parse strings such as ``"1,5/7"`` or ``"1, 17/15"``.

        All parity outputs must share one feedback polynomial.
        """
        parts = [p.strip() for p in text.split(",") if p.strip()]
        systematic = False
        if parts and parts[0] == "1":
            systematic = True
            parts = parts[1:]
        if not parts:
            raise InvalidSpecError(f"no parity generators in {text!r}")
        forward, feedback = [], set()
        for p in parts:
            if "/" in p:
                num, den = p.split("/")
                forward.append(int(num))
                feedback.add(int(den))
            else:
                forward.append(int(p))
                feedback.add(1)
        if len(feedback) != 1:
            raise InvalidSpecError("parity outputs must share a feedback polynomial")
        try:
            return cls(feedback.pop(), tuple(forward), systematic)
        except ValueError as exc:
            raise InvalidSpecError(str(exc)) from exc

    @property
    def memory(self) -> int:
        degs = [len(_poly_taps(self.feedback_poly)) - 1]
        degs += [len(_poly_taps(g)) - 1 for g in self.forward_polys]
        return max(degs)

    @property
    def n_out(self) -> int:
        return int(self.systematic) + len(self.forward_polys)

    def __str__(self) -> str:
        head = ["1"] if self.systematic else []
        if self.feedback_poly == 1:
            tail = [str(g) for g in self.forward_polys]
        else:
            tail = [f"{g}/{self.feedback_poly}" for g in self.forward_polys]
        return ",".join(head + tail)


def _padded(taps: list[int], memory: int) -> list[int]:
    return taps + [0] * (memory + 1 - len(taps))


def _step(spec: GeneratorSpec, state: int, u: int) -> tuple[int, tuple[int, ...], int]:
    """One shift-register step.

    The state holds ``a_{t-1} ... a_{t-nu}`` with ``a_{t-1}`` in the most
    significant bit.  Returns ``(next_state, outputs, feedback_bit)``.
    """
    nu = spec.memory
    fb = _padded(_poly_taps(spec.feedback_poly), nu)
    past = [(state >> (nu - 1 - i)) & 1 for i in range(nu)]  # a_{t-1}..a_{t-nu}
    fbsum = 0
    for i in range(1, nu + 1):
        fbsum ^= fb[i] & past[i - 1]
    a = u ^ fbsum
    regs = [a] + past
    outs = [u] if spec.systematic else []
    for g in spec.forward_polys:
        taps = _padded(_poly_taps(g), nu)
        outs.append(sum(t & r for t, r in zip(taps, regs)) & 1)
    nxt = 0
    if nu:
        nxt = ((a << (nu - 1)) | (state >> 1)) & ((1 << nu) - 1)
    return nxt, tuple(outs), fbsum


@dataclass(frozen=True, eq=False)
class TrellisCode:
    """State machine of an encoder, possibly with ``p`` input bits per section.

    ``next_state[s, x]`` and ``outputs[s, x, :]`` are indexed by the integer
    value ``x`` of the section input (first bit of the section in the most
    significant position).  ``tail_input[s]`` is the single-bit input that
    drives a unit section toward state zero.
    """

    spec: GeneratorSpec
    bits_per_step: int
    next_state: np.ndarray
    outputs: np.ndarray
    tail_input: np.ndarray = field(repr=False)

    @property
    def num_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def memory(self) -> int:
        return self.spec.memory

    @property
    def n_out(self) -> int:
        return self.spec.n_out

    @property
    def termination_length(self) -> int:
        return self.spec.memory

    @property
    def rate(self):
        from fractions import Fraction

        return Fraction(1, self.n_out)

    def input_weight(self) -> np.ndarray:
        """Hamming weight of every section input value."""
        return np.array([bin(x).count("1") for x in range(1 << self.bits_per_step)])


def build_trellis(spec: GeneratorSpec, bits_per_step: int = 1) -> TrellisCode:
    """Tabulate the trellis of ``spec``.

    With ``bits_per_step > 1`` consecutive unit sections are merged, so each
    state has ``2**bits_per_step`` branches carrying ``bits_per_step * n_out``
    output bits.
    """
    if not isinstance(spec, GeneratorSpec):
        raise InvalidSpecError("expected a GeneratorSpec")
    if bits_per_step < 1:
        raise InvalidSpecError("bits_per_step must be >= 1")
    S = 1 << spec.memory
    p = bits_per_step
    nxt = np.zeros((S, 1 << p), dtype=np.int64)
    out = np.zeros((S, 1 << p, p * spec.n_out), dtype=np.int8)
    tail = np.zeros(S, dtype=np.int8)
    for s in range(S):
        tail[s] = _step(spec, s, 0)[2]
        for x in range(1 << p):
            state, bits = s, []
            for b in range(p):
                u = (x >> (p - 1 - b)) & 1
                state, o, _ = _step(spec, state, u)
                bits.extend(o)
            nxt[s, x] = state
            out[s, x] = bits
    return TrellisCode(spec, p, nxt, out, tail)


@dataclass(frozen=True)
class Codeword:
    """Encoder output, serialized section by section (systematic bit first)."""

    bits: np.ndarray
    frame_length: int
    tail: np.ndarray
    final_state: int

    @property
    def block_length(self) -> int:
        return len(self.bits)


def encode(trellis: TrellisCode, info, terminate: bool = True) -> Codeword:
    """Encode ``info`` (a 0/1 sequence) bit by bit.

    With ``terminate`` the encoder is driven to state zero by ``memory``
    tail inputs whose output bits are appended to the codeword.
    """
    info = np.asarray(info, dtype=np.int64).ravel()
    if info.size < 1:
        raise ValueError("information sequence must not be empty")
    if np.any((info != 0) & (info != 1)):
        raise ValueError("information sequence must be binary")
    unit = trellis if trellis.bits_per_step == 1 else build_trellis(trellis.spec)
    p = trellis.bits_per_step
    if info.size % p:
        raise ValueError(f"length {info.size} is not a multiple of bits_per_step={p}")
    s = 0
    chunks = []
    for u in info:
        chunks.append(unit.outputs[s, u])
        s = unit.next_state[s, u]
    tail = []
    if terminate:
        for _ in range(unit.memory):
            u = unit.tail_input[s]
            tail.append(u)
            chunks.append(unit.outputs[s, u])
            s = unit.next_state[s, u]
        assert s == 0
    bits = np.concatenate(chunks).astype(np.int8) if chunks else np.zeros(0, np.int8)
    return Codeword(bits, int(info.size), np.array(tail, dtype=np.int8), int(s))


def shift_register_encode(spec: GeneratorSpec, info, terminate: bool = True) -> np.ndarray:
    """Direct polynomial-arithmetic encoder, independent of the tabulated trellis.

    Used as a cross-check for :func:`encode`.
    """
    nu = spec.memory
    fb = _padded(_poly_taps(spec.feedback_poly), nu)
    fwd = [_padded(_poly_taps(g), nu) for g in spec.forward_polys]
    a_hist = [0] * nu  # a_{t-1}, ..., a_{t-nu}
    out = []

    def push(u):
        a = u
        for i in range(1, nu + 1):
            a ^= fb[i] & a_hist[i - 1]
        regs = [a] + a_hist
        if spec.systematic:
            out.append(u)
        for taps in fwd:
            out.append(sum(t * r for t, r in zip(taps, regs)) % 2)
        a_hist[:] = regs[:nu]

    for u in np.asarray(info).ravel():
        push(int(u))
    if terminate:
        for _ in range(nu):
            u = 0
            for i in range(1, nu + 1):
                u ^= fb[i] & a_hist[i - 1]
            push(u)
    return np.array(out, dtype=np.int8)


def min_event_weights(
    trellis: TrellisCode,
    w_max: int,
    h_cap: int,
    length: int | None = None,
    deleted=None,
    outputs: str = "all",
) -> dict[int, tuple[int, int] | None]:
    """Minimum output weight ``d_w`` and multiplicity ``N_w`` per input weight.

    Without ``length`` the single error events of the time-invariant code
    are searched (paths leaving state zero and returning to it).  With
    ``length`` the whole terminated block of that many information bits is
    enumerated instead, and ``deleted`` may name punctured positions in the
    serialization used by :mod:`rcsccc.enumerator`.

    ``outputs`` is ``"all"`` or ``"parity"``.  An entry is ``None`` when no
    event of output weight ``<= h_cap`` exists for that input weight; if no
    input weight is witnessed at all :class:`CapExceededError` is raised.
    """
    if w_max < 2:
        raise ValueError("w_max must be >= 2")
    if length is not None:
        from .enumerator import block_weight_table

        table = block_weight_table(
            trellis, length, deleted=deleted, outputs=outputs,
            w_cap=w_max, h_cap=h_cap,
        )
        res = {}
        for w in range(1, w_max + 1):
            nz = np.nonzero(table[w])[0]
            res[w] = (int(nz[0]), int(table[w][nz[0]])) if nz.size else None
    else:
        res = _single_event_weights(trellis, w_max, h_cap, outputs)
    if all(v is None for w, v in res.items() if w >= 2):
        raise CapExceededError(f"no event of output weight <= {h_cap} found")
    return res


def _single_event_weights(trellis, w_max, h_cap, outputs):
    unit = trellis if trellis.bits_per_step == 1 else build_trellis(trellis.spec)
    cols = slice(None) if outputs == "all" else slice(int(unit.spec.systematic), None)
    S = unit.num_states
    wt = unit.outputs[:, :, cols].sum(axis=2)
    # counts[s][w][h] of partial events currently in state s (s != 0)
    counts = np.zeros((S, w_max + 1, h_cap + 1), dtype=object)
    done = np.zeros((w_max + 1, h_cap + 1), dtype=object)
    s1 = unit.next_state[0, 1]
    h1 = int(wt[0, 1])
    if h1 <= h_cap:
        if s1 == 0:
            done[1, h1] += 1
        else:
            counts[s1, 1, h1] += 1
    # every branch on a nonzero cycle either adds output weight or, for a
    # recursive code, the search is still bounded by w_max + h_cap growth
    for _ in range((h_cap + w_max + 2) * max(S, 2) * 4):
        if not np.any(counts):
            break
        new = np.zeros_like(counts)
        for s in range(1, S):
            if not np.any(counts[s]):
                continue
            for u in (0, 1):
                ns = unit.next_state[s, u]
                h = int(wt[s, u])
                src = counts[s, : w_max + 1 - u, : h_cap + 1 - h]
                if ns == 0:
                    done[u:, h:] += src
                else:
                    new[ns, u:, h:] += src
        counts = new
    res = {}
    for w in range(1, w_max + 1):
        nz = np.nonzero(done[w])[0]
        res[w] = (int(nz[0]), int(done[w][nz[0]])) if nz.size else None
    return res
