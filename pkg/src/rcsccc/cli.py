"""Command-line front end: ``rcsccc {enumerate,bound,optimize,simulate,family}``.

Each job reads one YAML file (``--config``), applies command-line
overrides, validates everything, writes ``resolved_config.yaml`` to the
output directory and then its artifacts.  Outputs contain no timestamps,
so reruns with the same config and seed are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 cap exceeded or
infeasible request, 4 internal error (including an oracle mismatch).
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import bounds, enumerator, optimizer, puncturing, simulator
from .puncturing import (
    InfeasiblePermeabilityError,
    PuncturePattern,
    PunctureLadder,
    check_rate_compatible,
    ladder_step,
    read_pattern,
    rho_s_for_target,
)
from .trellis import CapExceededError, GeneratorSpec, InvalidSpecError, build_trellis

log = logging.getLogger("rcsccc")

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_INTERNAL = 0, 2, 3, 4

DEFAULTS = {
    "outer": "1,5/7",
    "inner": "1,5/7",
    "K": 200,
    "N": None,
    "outer_puncturing": None,
    "systematic_ladder": None,
    "parity_ladder": None,
    "systematic_deleted": None,
    "parity_deleted": None,
    "rate": None,
    "rho_p": None,
    "tile": 1,
    "interleaver_seed": 1,
    "seed": 1,
    "caps": dict(enumerator.DEFAULT_CAPS),
    "kernel": "exponential",
    "grid": "4:8:0.5",
    "bound": {"mode": "exact", "h_limit": None, "oracle": False},
    "optimize": {"target": "both", "w_max": 4, "d_max": None, "parity_steps": None,
                 "systematic_steps": None, "restrict_to_parity": False},
    "simulation": {"iterations": 10, "siso": "log-map", "llr_clip": 30.0, "stopping": "fixed",
                   "min_frame_errors": 100, "max_frames": 10000, "batch": 50, "workers": 1,
                   "overlay": False, "sweep_rho_p": None},
    "family": {"rates": None, "rho_p": None, "parameters": True},
}


class ConfigError(ValueError):
    pass


# -- configuration -------------------------------------------------------------------


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _fraction(x, name):
    try:
        return Fraction(str(x))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{name}: cannot read {x!r} as a fraction") from exc


def parse_grid(text) -> list[float]:
    """``"4:8:0.5"`` (inclusive range), ``"4,5,6"`` or an explicit list of values."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text)
    if ":" in text:
        a, b, s = (float(v) for v in text.split(":"))
        return _range(a, b, s)
    return [float(v) for v in text.split(",") if v.strip()]


def _range(a, b, s):
    if s <= 0 or b < a:
        raise ConfigError(f"bad grid range {a}:{b}:{s}")
    n = int(round((b - a) / s))
    return [round(a + k * s, 10) for k in range(n + 1)]


def parse_caps(text) -> dict:
    out = {}
    for tok in str(text).split(","):
        if not tok.strip():
            continue
        k, _, v = tok.partition("=")
        k = k.strip()
        if k not in enumerator.DEFAULT_CAPS:
            raise ConfigError(f"unknown cap {k!r}; known: {sorted(enumerator.DEFAULT_CAPS)}")
        out[k] = int(v)
    return out


def _load_ladder(ref, base_dir: Path, name: str):
    if ref is None:
        return None
    if isinstance(ref, dict):
        return PunctureLadder(int(ref["length"]), tuple(ref.get("positions", ())))
    ref = str(ref)
    if ref.startswith("builtin:"):
        try:
            return puncturing.builtin_ladder(ref.split(":", 1)[1])
        except KeyError as exc:
            raise ConfigError(f"{name}: {exc.args[0]}") from exc
    path = Path(ref)
    if not path.is_absolute():
        path = base_dir / path
    if not path.exists():
        raise ConfigError(f"{name}: pattern file not found: {path}")
    try:
        pat = read_pattern(path)
    except ValueError as exc:
        raise ConfigError(f"{name}: {path}: {exc}") from exc
    if not isinstance(pat, PunctureLadder):
        pat = PunctureLadder(pat.length, pat.deleted)
    return pat


@dataclass
class JobConfig:
    """Validated job description (see ``DEFAULTS`` for every key)."""

    raw: dict
    outer: GeneratorSpec
    inner: GeneratorSpec
    K: int
    N: int
    P_o: PuncturePattern
    sys_ladder: PunctureLadder | None
    par_ladder: PunctureLadder | None
    sys_deleted: int
    par_deleted: int

    @property
    def R_o_prime(self) -> Fraction:
        return Fraction(self.K, self.N)

    @property
    def rho(self) -> puncturing.PermeabilityPair:
        return puncturing.PermeabilityPair(Fraction(self.N - self.sys_deleted, self.N),
                                           Fraction(self.N - self.par_deleted, self.N))

    @property
    def nominal_rate(self) -> Fraction:
        return puncturing.sccc_rate(self.R_o_prime, self.inner.n_out, self.rho)

    def P_prime(self, deleted=None) -> PuncturePattern:
        d = self.sys_deleted if deleted is None else deleted
        if self.sys_ladder is None:
            return PuncturePattern(self.K * self.outer.n_out, ())
        return ladder_step(self.sys_ladder, d)

    def P_i_p(self, deleted=None) -> PuncturePattern:
        d = self.par_deleted if deleted is None else deleted
        if self.par_ladder is None:
            return PuncturePattern(self.N, ())
        return ladder_step(self.par_ladder, d)

    def split_for(self, rate, rho_p) -> tuple[int, int]:
        """Deleted counts ``(systematic, parity)`` giving ``rate`` at parity permeability ``rho_p``."""
        rho_s = rho_s_for_target(rate, self.R_o_prime, self.inner.n_out, rho_p)
        sys_del = self.N - rho_s * self.N
        par_del = self.N - Fraction(rho_p) * self.N
        if sys_del.denominator != 1 or par_del.denominator != 1:
            raise ConfigError(f"rate {rate} with rho_p={rho_p} needs a fractional number of deletions")
        return int(sys_del), int(par_del)

    def sccc(self, tile: int | None = None, sys_deleted=None, par_deleted=None) -> simulator.SCCCConfig:
        tile = int(self.raw["tile"]) if tile is None else tile
        P_prime = self.P_prime(sys_deleted)
        P_i_p = self.P_i_p(par_deleted)
        P_o, K = self.P_o, self.K
        if tile > 1:
            P_prime = P_prime.tiled(P_prime.length * tile)
            P_i_p = P_i_p.tiled(P_i_p.length * tile)
            P_o = P_o.tiled(P_o.length * tile)
            K *= tile
        seed = int(self.raw["interleaver_seed"])
        perm = simulator.interleaver(P_o.num_kept, seed)
        return simulator.SCCCConfig(self.outer, self.inner, K, P_o, perm, P_prime, P_i_p, seed)


def resolve(raw: dict, base_dir: Path) -> JobConfig:
    """Merge defaults, parse and cross-check every field before any compute."""
    cfg = _merge(DEFAULTS, raw)
    unknown = set(raw or {}) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        outer = GeneratorSpec.parse(str(cfg["outer"]))
        inner = GeneratorSpec.parse(str(cfg["inner"]))
    except InvalidSpecError as exc:
        raise ConfigError(str(exc)) from exc
    if not inner.systematic or inner.n_out != 2:
        raise ConfigError("inner code must be systematic rate 1/2")
    K = int(cfg["K"])
    if K <= outer.memory:
        raise ConfigError(f"K={K} leaves no information bits")
    if cfg["outer_puncturing"] is None:
        P_o = PuncturePattern(K * outer.n_out, ())
    else:
        M = np.asarray(cfg["outer_puncturing"], dtype=int)
        if M.ndim != 2 or M.shape[0] != outer.n_out or M.shape[1] == 0 or K % M.shape[1]:
            raise ConfigError("outer_puncturing must be an n_out x T 0/1 matrix with T dividing K")
        P_o = PuncturePattern.from_matrix(M, K)
    N = P_o.num_kept
    if cfg["N"] is not None and int(cfg["N"]) != N:
        raise ConfigError(f"N={cfg['N']} but K={K} and the outer puncturing give N={N}")
    cfg["N"] = N
    sys_ladder = _load_ladder(cfg["systematic_ladder"], base_dir, "systematic_ladder")
    par_ladder = _load_ladder(cfg["parity_ladder"], base_dir, "parity_ladder")
    if sys_ladder is not None:
        if sys_ladder.base_length != K * outer.n_out:
            raise ConfigError(f"systematic ladder length {sys_ladder.base_length} != K*n = {K * outer.n_out}")
        kept = P_o.keep_mask()
        bad = [p for p in sys_ladder.ordered_positions if not kept[p]]
        if bad:
            raise ConfigError(f"systematic ladder deletes outer positions already punctured: {bad[:5]}")
    if par_ladder is not None and par_ladder.base_length != N:
        raise ConfigError(f"parity ladder length {par_ladder.base_length} != N = {N}")
    job = JobConfig(cfg, outer, inner, K, N, P_o, sys_ladder, par_ladder, 0, 0)
    if cfg["rate"] is not None:
        if cfg["rho_p"] is None:
            raise ConfigError("rate needs rho_p to fix the permeability split")
        rate = _fraction(cfg["rate"], "rate")
        rho_p = _fraction(cfg["rho_p"], "rho_p")
        try:
            sd, pd = job.split_for(rate, rho_p)
        except InfeasiblePermeabilityError as exc:
            raise ConfigError(f"infeasible rate request: {exc}") from exc
        for k, v in (("systematic_deleted", sd), ("parity_deleted", pd)):
            if cfg[k] is not None and int(cfg[k]) != v:
                raise ConfigError(f"{k}={cfg[k]} contradicts rate {rate} with rho_p={rho_p} ({v})")
            cfg[k] = v
    job.sys_deleted = int(cfg["systematic_deleted"] or 0)
    job.par_deleted = int(cfg["parity_deleted"] or 0)
    for name, ladder, d in (("systematic", sys_ladder, job.sys_deleted), ("parity", par_ladder, job.par_deleted)):
        if d and ladder is None:
            raise ConfigError(f"{name}_deleted={d} needs a {name}_ladder")
        if ladder is not None and not 0 <= d <= len(ladder):
            raise ConfigError(f"{name}_deleted={d} outside the ladder [0, {len(ladder)}]")
    if job.sys_deleted > N - K:
        raise ConfigError(f"at most N - K = {N - K} systematic deletions keep the outer rate <= 1")
    if cfg["bound"]["mode"] not in ("exact", "approx"):
        raise ConfigError(f"bound.mode must be 'exact' or 'approx', not {cfg['bound']['mode']!r}")
    if cfg["kernel"] not in ("exponential", "erfc"):
        raise ConfigError(f"kernel must be 'exponential' or 'erfc', not {cfg['kernel']!r}")
    if int(cfg["tile"]) < 1:
        raise ConfigError("tile must be >= 1")
    cfg["grid"] = parse_grid(cfg["grid"])
    unknown_caps = set(cfg["caps"]) - set(enumerator.DEFAULT_CAPS)
    if unknown_caps:
        raise ConfigError(f"unknown caps {sorted(unknown_caps)}")
    try:
        simulator.DecoderConfig(int(cfg["simulation"]["iterations"]), cfg["simulation"]["siso"],
                                float(cfg["simulation"]["llr_clip"]), cfg["simulation"]["stopping"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return job


def _plain(obj):
    """YAML-safe copy (fractions and tuples to plain types)."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# -- commands ------------------------------------------------------------------------


class Job:
    def __init__(self, job: JobConfig, out: Path):
        self.cfg = job
        self.out = out
        out.mkdir(parents=True, exist_ok=True)

    def write(self, name, text):
        (self.out / name).write_text(text)
        log.info("wrote %s", self.out / name)

    def write_json(self, name, obj):
        self.write(name, json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")

    def enumerators(self, sys_deleted=None, par_deleted=None):
        c = self.cfg
        caps = {**enumerator.DEFAULT_CAPS, **c.raw["caps"]}
        to = build_trellis(c.outer)
        ti = build_trellis(c.inner)
        oe = enumerator.outer_joint_enumerator(to, c.P_o, c.P_prime(sys_deleted), c.K, caps)
        ie = enumerator.inner_joint_enumerator(ti, c.P_i_p(par_deleted), c.N, caps)
        return oe, ie

    def rates(self):
        c = self.cfg
        sc = c.sccc(tile=1)
        return {"R_o_prime": c.R_o_prime, "rho_s": c.rho.rho_s, "rho_p": c.rho.rho_p,
                "rate_nominal": c.nominal_rate, "rate_with_tails": sc.rate,
                "info_bits": sc.info_bits, "transmitted": sc.transmitted}

    def parameters(self, sys_deleted=None, par_deleted=None):
        oe, ie = self.enumerators(sys_deleted, par_deleted)
        summ = enumerator.distance_summary(oe, ie)
        b = self.cfg.raw["bound"]
        spec = bounds.compose_uniform(oe, ie, mode=b["mode"], h_limit=b["h_limit"])
        asym = bounds.asymptotic_report(summ, bounds.exponent_profile(oe, ie, spec.h_limit))
        return oe, ie, summ, spec, asym


def cmd_enumerate(job: Job, args) -> int:
    oe, ie = job.enumerators()
    summ = enumerator.distance_summary(oe, ie)
    job.write("outer_enumerator.csv", oe.to_csv())
    job.write("inner_enumerator.csv", ie.to_csv())
    d = json.loads(summ.to_json())
    d["rates"] = job.rates()
    d["truncated"] = {"outer": oe.truncated, "inner": ie.truncated}
    job.write_json("summary.json", d)
    print(f"rate {job.cfg.nominal_rate} (with tails {job.rates()['rate_with_tails']}); "
          f"d_f^o'={summ.d_f_o_prime} d_f^o''={summ.d_f_o_dprime}")
    return EXIT_OK


def _oracle_check(job: Job, spec) -> bool:
    c = job.cfg
    bf = enumerator.brute_force_spectrum(build_trellis(c.outer), build_trellis(c.inner), c.K,
                                         c.P_o, c.P_prime(), c.P_i_p())
    exact = {k: v for k, v in spec.coeffs.items() if v}
    ref = {k: v for k, v in bf.items() if v and k[1] <= spec.h_limit}
    return exact == ref


def cmd_bound(job: Job, args) -> int:
    c = job.cfg
    oe, ie, summ, spec, asym = job.parameters()
    R = job.rates()["rate_with_tails"]
    grid = c.raw["grid"]
    kernel = c.raw["kernel"]
    job.write("spectrum.csv", spec.to_csv())
    job.write("bound_bit.csv", bounds.union_bound_bit(spec, R, grid, kernel).to_csv())
    job.write("bound_frame.csv", bounds.union_bound_frame(spec, R, grid, kernel).to_csv())
    cum = bounds.cumulative_spectrum(spec)
    job.write("cumulative_spectrum.csv",
              "d,cumulative\n" + "".join(f"{d},{float(v):.17g}\n" for d, v in cum.items()))
    extra = {"rates": _plain(job.rates()), "kernel": kernel, "mode": c.raw["bound"]["mode"]}
    job.write("report.json", bounds.report_json(summ, spec, asym, extra) + "\n")
    print(f"h_m={spec.h_m} N_hm={float(spec.N_hm):.4g} alpha_M={asym.alpha_M} h(alpha_M)={asym.h_alpha_M}")
    if c.raw["bound"]["oracle"]:
        if c.raw["bound"]["mode"] != "exact":
            raise ConfigError("the oracle cross-check needs bound.mode = exact")
        if not _oracle_check(job, spec):
            print("oracle mismatch: composed spectrum differs from brute force", file=sys.stderr)
            return EXIT_INTERNAL
        print("oracle: exact match")
    return EXIT_OK


def cmd_optimize(job: Job, args) -> int:
    c = job.cfg
    o = c.raw["optimize"]
    if o["target"] not in ("both", "parity", "systematic"):
        raise ConfigError("optimize.target must be both, parity or systematic")
    if o["target"] in ("both", "parity"):
        res = optimizer.optimize_parity_ladder(build_trellis(c.inner), c.N, int(o["w_max"]), o["parity_steps"])
        job.write("parity_ladder.txt", puncturing.format_pattern(res.ladder))
        job.write("parity_trajectory.json", res.trajectory_json() + "\n")
        print(f"parity ladder: {len(res.ladder)} positions")
    if o["target"] in ("both", "systematic"):
        res = optimizer.optimize_systematic_ladder(build_trellis(c.outer), c.P_o, c.K, o["d_max"],
                                                   o["systematic_steps"], bool(o["restrict_to_parity"]))
        job.write("systematic_ladder.txt", puncturing.format_pattern(res.ladder))
        job.write("systematic_trajectory.json", res.trajectory_json() + "\n")
        print(f"systematic ladder: {len(res.ladder)} positions"
              + (f" (stopped early: {res.diagnostic})" if res.stopped_early else ""))
    return EXIT_OK


def _decoder(c: JobConfig) -> simulator.DecoderConfig:
    s = c.raw["simulation"]
    return simulator.DecoderConfig(int(s["iterations"]), s["siso"], float(s["llr_clip"]), s["stopping"])


def _run(c: JobConfig, sc, grid):
    s = c.raw["simulation"]
    return simulator.run_monte_carlo(sc, grid, _decoder(c), int(c.raw["seed"]), int(s["min_frame_errors"]),
                                     int(s["max_frames"]), int(s["batch"]), int(s["workers"]))


def cmd_simulate(job: Job, args) -> int:
    c = job.cfg
    s = c.raw["simulation"]
    grid = c.raw["grid"]
    if s["sweep_rho_p"] is not None:
        # fixed overall rate, varying split between systematic and parity bits
        rate = c.nominal_rate if c.raw["rate"] is None else _fraction(c.raw["rate"], "rate")
        lines = ["rate,rho_s,rho_p,ebno_db,frames,frame_errors,fer,ci_low,ci_high"]
        for rp in s["sweep_rho_p"]:
            rp = _fraction(rp, "sweep_rho_p")
            try:
                sd, pd = c.split_for(rate, rp)
            except InfeasiblePermeabilityError as exc:
                raise ConfigError(f"infeasible sweep point: {exc}") from exc
            rep = _run(c, c.sccc(sys_deleted=sd, par_deleted=pd), grid)
            rho_s = Fraction(c.N - sd, c.N)
            for p in rep.points:
                lo, hi = p.ci()
                lines.append(f"{rate},{rho_s},{rp},{p.ebno_db!r},{p.frames},{p.frame_errors},"
                             f"{p.fer:.10g},{lo:.10g},{hi:.10g}")
        job.write("fer_vs_rho.csv", "\n".join(lines) + "\n")
        return EXIT_OK
    sc = c.sccc()
    rep = _run(c, sc, grid)
    job.write("simulation.csv", rep.to_csv())
    job.write_json("simulation_meta.json", {"config": rep.config, "seed": rep.seed, "ci": rep.ci_method,
                                            "rng": "numpy PCG64, SeedSequence(seed, spawn_key=(point, frame))"})
    if s["overlay"]:
        if int(c.raw["tile"]) != 1:
            raise ConfigError("the bound overlay is computed for tile = 1 only")
        _, _, _, spec, _ = job.parameters()
        fb = bounds.union_bound_frame(spec, sc.rate, grid, c.raw["kernel"])
        lines = ["ebno_db,fer_sim,ci_low,ci_high,fer_bound"]
        for p, b in zip(rep.points, fb.values):
            lo, hi = p.ci()
            lines.append(f"{p.ebno_db!r},{p.fer:.10g},{lo:.10g},{hi:.10g},{float(b):.10g}")
        job.write("overlay.csv", "\n".join(lines) + "\n")
    for p in rep.points:
        print(f"{p.ebno_db:5.2f} dB  frames {p.frames:7d}  FER {p.fer:.3e}  BER {p.ber:.3e}")
    return EXIT_OK


def cmd_family(job: Job, args) -> int:
    c = job.cfg
    f = c.raw["family"]
    if not f["rates"] or f["rho_p"] is None:
        raise ConfigError("family needs family.rates and family.rho_p (one per rate)")
    rates = [_fraction(r, "family.rates") for r in f["rates"]]
    rhos = f["rho_p"] if isinstance(f["rho_p"], list) else [f["rho_p"]] * len(rates)
    if len(rhos) != len(rates):
        raise ConfigError("family.rho_p must have one entry per rate")
    members = []
    sys_pats, par_pats, inner_pats = [], [], []
    for rate, rp in zip(rates, rhos):
        rp = _fraction(rp, "family.rho_p")
        try:
            sd, pd = c.split_for(rate, rp)
        except InfeasiblePermeabilityError as exc:
            raise ConfigError(f"infeasible family member: {exc}") from exc
        if sd > c.N - c.K:
            raise ConfigError(f"rate {rate}: {sd} systematic deletions exceed N - K = {c.N - c.K}")
        for name, ladder, d in (("systematic", c.sys_ladder, sd), ("parity", c.par_ladder, pd)):
            if d and (ladder is None or d > len(ladder)):
                raise ConfigError(f"rate {rate} needs {d} {name} deletions; ladder too short or missing")
        P_prime, P_i_p = c.P_prime(sd), c.P_i_p(pd)
        sys_pats.append(P_prime)
        par_pats.append(P_i_p)
        sc = c.sccc(tile=1, sys_deleted=sd, par_deleted=pd)
        inner_pats.append(PuncturePattern(2 * c.N, tuple(2 * p for p in sc.P_i_s.deleted)
                                          + tuple(2 * p + 1 for p in P_i_p.deleted)))
        m = {"rate": rate, "rho_s": Fraction(c.N - sd, c.N), "rho_p": rp,
             "systematic_prefix": sd, "parity_prefix": pd, "rate_with_tails": sc.rate}
        if f["parameters"]:
            _, _, summ, spec, asym = job.parameters(sd, pd)
            m.update({"h_m3": summ.h_m3, "d_odprime_at_dfoprime": summ.d_odprime_at_dfoprime,
                      "h_alpha_M": asym.h_alpha_M, "alpha_M": asym.alpha_M, "h_m": spec.h_m,
                      "N_hm": float(spec.N_hm)})
        members.append(m)
    verdicts = {name: check_rate_compatible(p) for name, p in
                (("systematic", sys_pats), ("parity", par_pats), ("inner", inner_pats))}
    ok = all(verdicts.values())
    job.write_json("family.json", {
        "members": members,
        "rate_compatible": ok,
        "checks": {k: {"ok": v.ok, "pair": v.pair, "position": v.position} for k, v in verdicts.items()},
    })
    print(f"family of {len(members)} rates; rate compatible: {ok}")
    return EXIT_OK if ok else EXIT_CAP


COMMANDS = {
    "enumerate": cmd_enumerate,
    "bound": cmd_bound,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "family": cmd_family,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rcsccc", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="YAML job file")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--seed", type=int, help="simulation master seed")
    p.add_argument("--kernel", choices=("exponential", "erfc"))
    p.add_argument("--caps", help="e.g. w_cap=8,l_cap=24,j_cap=24,m_cap=40,n_cap=6")
    p.add_argument("--oracle", action="store_true", help="cross-check the bound against brute force")
    p.add_argument("--restrict-to-parity", action="store_true", help="systematic ladder on parity bits only")
    p.add_argument("--iterations", type=int, help="decoder iterations")
    p.add_argument("--grid", help="Eb/N0 grid in dB: a:b:step or comma list")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _overrides(args) -> dict:
    o: dict = {}
    if args.seed is not None:
        o["seed"] = args.seed
    if args.kernel:
        o["kernel"] = args.kernel
    if args.caps:
        o["caps"] = parse_caps(args.caps)
    if args.oracle:
        o["bound"] = {"oracle": True}
    if args.restrict_to_parity:
        o["optimize"] = {"restrict_to_parity": True}
    if args.iterations is not None:
        o["simulation"] = {"iterations": args.iterations}
    if args.grid:
        o["grid"] = parse_grid(args.grid)
    return o


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = {}
        base = Path.cwd()
        if args.config is not None:
            if not args.config.exists():
                raise ConfigError(f"config file not found: {args.config}")
            raw = yaml.safe_load(args.config.read_text()) or {}
            if not isinstance(raw, dict):
                raise ConfigError("config must be a mapping")
            base = args.config.resolve().parent
        raw = _merge(raw, _overrides(args))
        job = resolve(raw, base)
        runner = Job(job, args.out)
        resolved = _plain({**job.raw, "derived": runner.rates()})
        runner.write("resolved_config.yaml", yaml.safe_dump(resolved, sort_keys=True))
        return COMMANDS[args.command](runner, args)
    except (ConfigError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CapExceededError, InfeasiblePermeabilityError, puncturing.DegenerateCodeError) as exc:
        print(f"cap/feasibility error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except Exception as exc:  # noqa: BLE001 - reported as an internal error
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
