"""Design and analysis of rate-compatible punctured serial concatenated convolutional codes."""

from .trellis import CapExceededError, GeneratorSpec, InvalidSpecError, build_trellis, encode
from .puncturing import (PermeabilityPair, PuncturePattern, PunctureLadder, builtin_ladder, ladder_step,
                         sccc_rate)
from .enumerator import distance_summary, inner_joint_enumerator, outer_joint_enumerator
from .bounds import asymptotic_report, compose_uniform, union_bound_bit, union_bound_frame
from .simulator import DecoderConfig, SCCCConfig, run_monte_carlo

__all__ = [
    "CapExceededError",
    "GeneratorSpec",
    "InvalidSpecError",
    "PermeabilityPair",
    "PuncturePattern",
    "PunctureLadder",
    "DecoderConfig",
    "SCCCConfig",
    "asymptotic_report",
    "build_trellis",
    "builtin_ladder",
    "compose_uniform",
    "distance_summary",
    "encode",
    "inner_joint_enumerator",
    "ladder_step",
    "outer_joint_enumerator",
    "run_monte_carlo",
    "sccc_rate",
    "union_bound_bit",
    "union_bound_frame",
]
