"""Puncturing patterns, rate-compatible ladders and exact rate arithmetic.

Position conventions (zero based):

* outer mother-code output: section ``t`` emits the systematic bit at
  ``2t`` and the parity bit at ``2t + 1`` (``n_out * t + c`` in general);
* inner parity: one index per inner section, ``0 .. N-1``;
* inner systematic: the ``N`` interleaved outer code bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np


class DegenerateCodeError(ValueError):
    pass


class InfeasiblePermeabilityError(ValueError):
    pass


@dataclass(frozen=True)
class PuncturePattern:
    """Set of deleted positions over ``length`` serialized bits.

    ``deleted`` keeps insertion order; for ladder prefixes this is the order
    in which positions were punctured.  A periodic pattern also remembers
    its binary ``mask`` (1 = keep), tiled over ``length``.
    """

    length: int
    deleted: tuple[int, ...] = ()
    kind: str = "list"
    mask: tuple[int, ...] | None = None

    def __post_init__(self):
        d = tuple(int(x) for x in self.deleted)
        object.__setattr__(self, "deleted", d)
        if len(set(d)) != len(d):
            raise ValueError("deleted positions contain duplicates")
        if any(x < 0 or x >= self.length for x in d):
            raise ValueError(f"deleted positions must lie in [0, {self.length})")
        if self.kind not in ("list", "periodic"):
            raise ValueError(f"unknown pattern kind {self.kind!r}")

    @classmethod
    def periodic(cls, mask, length: int) -> "PuncturePattern":
        """Tile a keep-mask (string ``"1101"`` or 0/1 sequence) over ``length``."""
        if isinstance(mask, str):
            mask = [int(c) for c in mask.strip()]
        mask = tuple(int(m) for m in mask)
        if not mask or any(m not in (0, 1) for m in mask):
            raise ValueError("periodic mask must be a non-empty 0/1 sequence")
        T = len(mask)
        deleted = tuple(i for i in range(length) if not mask[i % T])
        return cls(length, deleted, "periodic", mask)

    @classmethod
    def from_matrix(cls, matrix, sections: int) -> "PuncturePattern":
        """Periodic pattern from a puncturing matrix.

        Rows are encoder outputs and columns are time, e.g. ``[[1, 1], [1, 0]]``
        keeps every systematic bit and every other parity bit.
        """
        P = np.asarray(matrix, dtype=int)
        mask = P.T.ravel()  # serialize section by section
        return cls.periodic(mask, sections * P.shape[0])

    def tiled(self, length: int) -> "PuncturePattern":
        """Repeat this pattern (deleted set taken modulo ``self.length``) over ``length``."""
        if self.kind == "periodic":
            return PuncturePattern.periodic(self.mask, length)
        base = set(self.deleted)
        L = self.length
        deleted = tuple(
            r * L + d for r in range(-(-length // L)) for d in self.deleted if r * L + d < length
        )
        assert all(d % L in base for d in deleted)
        return PuncturePattern(length, deleted, "list")

    def keep_mask(self) -> np.ndarray:
        keep = np.ones(self.length, dtype=bool)
        if self.deleted:
            keep[list(self.deleted)] = False
        return keep

    @property
    def num_kept(self) -> int:
        return self.length - len(self.deleted)

    def union(self, other: "PuncturePattern") -> "PuncturePattern":
        if other.length != self.length:
            raise ValueError("pattern lengths differ")
        seen = set(self.deleted)
        extra = tuple(d for d in other.deleted if d not in seen)
        return PuncturePattern(self.length, self.deleted + extra, "list")


@dataclass(frozen=True)
class PunctureLadder:
    """Ordered deletion positions; step ``M`` deletes the first ``M`` of them."""

    base_length: int
    ordered_positions: tuple[int, ...]

    def __post_init__(self):
        pos = tuple(int(x) for x in self.ordered_positions)
        object.__setattr__(self, "ordered_positions", pos)
        if len(set(pos)) != len(pos):
            raise ValueError("ladder positions must be distinct")
        if any(x < 0 or x >= self.base_length for x in pos):
            raise ValueError(f"ladder positions must lie in [0, {self.base_length})")

    def __len__(self):
        return len(self.ordered_positions)


def ladder_step(ladder: PunctureLadder, M: int) -> PuncturePattern:
    if not 0 <= M <= len(ladder):
        raise IndexError(f"ladder step {M} outside [0, {len(ladder)}]")
    return PuncturePattern(ladder.base_length, ladder.ordered_positions[:M], "list")


@dataclass(frozen=True)
class PermeabilityPair:
    rho_s: Fraction
    rho_p: Fraction

    def __post_init__(self):
        for name in ("rho_s", "rho_p"):
            v = Fraction(getattr(self, name))
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} outside [0, 1]")
            object.__setattr__(self, name, v)


def sccc_rate(R_o_prime, n: int, rho: PermeabilityPair) -> Fraction:
    """Overall rate ``R_o' / (rho_s + (n-1) rho_p)`` as an exact fraction."""
    denom = rho.rho_s + (n - 1) * rho.rho_p
    if denom == 0:
        raise DegenerateCodeError("every inner bit is punctured")
    return Fraction(R_o_prime) / denom


def rho_s_for_target(R_target, R_o_prime, n: int, rho_p) -> Fraction:
    """Systematic permeability giving overall rate ``R_target`` for a given ``rho_p``."""
    R_target, R_o_prime, rho_p = Fraction(R_target), Fraction(R_o_prime), Fraction(rho_p)
    rho_s = R_o_prime / R_target - (n - 1) * rho_p
    if not 0 <= rho_s <= 1:
        lo = max(Fraction(0), (R_o_prime / R_target - 1) / (n - 1))
        hi = min(Fraction(1), R_o_prime / R_target / (n - 1))
        raise InfeasiblePermeabilityError(
            f"rho_s={rho_s} infeasible for R={R_target}, R_o'={R_o_prime}; "
            f"rho_p must lie in [{lo}, {hi}]"
        )
    return rho_s


def apply_pattern(seq, pat: PuncturePattern):
    seq = np.asarray(seq)
    if seq.shape[0] != pat.length:
        raise ValueError(f"sequence length {seq.shape[0]} != pattern length {pat.length}")
    return seq[pat.keep_mask()]


def _check_perm(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    if perm.ndim != 1 or not np.array_equal(np.sort(perm), np.arange(perm.size)):
        raise ValueError("permutation is not a bijection on [0, N)")
    return perm


def interleave(seq, perm):
    """``out[q] = seq[perm[q]]``."""
    return np.asarray(seq)[_check_perm(perm)]


def deinterleave(seq, perm):
    perm = _check_perm(perm)
    out = np.empty_like(np.asarray(seq))
    out[perm] = seq
    return out


def interleave_pattern(p_prime: PuncturePattern, perm) -> PuncturePattern:
    """Move a pattern on interleaver inputs to interleaver outputs.

    With ``out[q] = in[perm[q]]``, output position ``q`` is deleted iff
    ``perm[q]`` is deleted on the input side.  Ladder order is preserved.
    """
    perm = _check_perm(perm)
    if perm.size != p_prime.length:
        raise ValueError("permutation and pattern lengths differ")
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return PuncturePattern(p_prime.length, tuple(int(inv[d]) for d in p_prime.deleted), "list")


def deinterleave_pattern(p: PuncturePattern, perm) -> PuncturePattern:
    perm = _check_perm(perm)
    if perm.size != p.length:
        raise ValueError("permutation and pattern lengths differ")
    return PuncturePattern(p.length, tuple(int(perm[d]) for d in p.deleted), "list")


@dataclass(frozen=True)
class CompatibilityVerdict:
    ok: bool
    pair: tuple[int, int] | None = None
    position: int | None = None

    def __bool__(self):
        return self.ok


def check_rate_compatible(patterns) -> CompatibilityVerdict:
    """True iff the deleted sets form a chain under inclusion.

    On failure reports the first offending pair (indices in the input list)
    and a position deleted by the first but not by the second.
    """
    patterns = list(patterns)
    if len({p.length for p in patterns}) > 1:
        raise ValueError("patterns have different lengths")
    sets = [set(p.deleted) for p in patterns]
    order = sorted(range(len(sets)), key=lambda i: (len(sets[i]), i))
    for a, b in zip(order, order[1:]):
        if not sets[a] <= sets[b]:
            pos = min(sets[a] - sets[b], key=patterns[a].deleted.index)
            return CompatibilityVerdict(False, (min(a, b), max(a, b)), pos)
    return CompatibilityVerdict(True)


# -- pattern files -----------------------------------------------------------


def write_pattern(path, pat) -> None:
    """Write a pattern or ladder.

    ``length=<L> kind=list`` followed by one position per line, or
    ``length=<L> kind=periodic`` followed by the keep-mask string.
    """
    Path(path).write_text(format_pattern(pat))


def format_pattern(pat) -> str:
    if isinstance(pat, PunctureLadder):
        lines = [f"length={pat.base_length} kind=list"]
        lines += [str(p) for p in pat.ordered_positions]
    elif pat.kind == "periodic":
        lines = [f"length={pat.length} kind=periodic", "".join(map(str, pat.mask))]
    else:
        lines = [f"length={pat.length} kind=list"] + [str(p) for p in pat.deleted]
    return "\n".join(lines) + "\n"


def parse_pattern(text: str):
    """Inverse of :func:`format_pattern`.

    List files come back as a :class:`PunctureLadder`, periodic ones as a
    :class:`PuncturePattern`.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty pattern file")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    try:
        length = int(header["length"])
        kind = header["kind"]
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad pattern header {lines[0]!r}") from exc
    if kind == "list":
        return PunctureLadder(length, tuple(int(x) for x in lines[1:]))
    if kind == "periodic":
        if len(lines) != 2:
            raise ValueError("periodic pattern needs exactly one mask line")
        return PuncturePattern.periodic(lines[1], length)
    raise ValueError(f"unknown pattern kind {kind!r}")


def read_pattern(path):
    return parse_pattern(Path(path).read_text())


# transcribed reference ladders shipped with the package
BUILTIN_LADDERS = {
    "table1": "table1_inner_parity.txt",
    "table2": "table2_systematic_po1.txt",
    "table3": "table3_systematic_po2.txt",
    "table4": "table4_systematic_po1_parity_only.txt",
}


def builtin_ladder(name: str) -> PunctureLadder:
    """Reference ladder ``table1`` (inner parity, N=300) .. ``table4`` (systematic, 2K=400)."""
    if name not in BUILTIN_LADDERS:
        raise KeyError(f"unknown builtin ladder {name!r}; known: {sorted(BUILTIN_LADDERS)}")
    pat = parse_pattern(resources.files("rcsccc").joinpath("data", BUILTIN_LADDERS[name]).read_text())
    return pat if isinstance(pat, PunctureLadder) else PunctureLadder(pat.length, pat.deleted)
