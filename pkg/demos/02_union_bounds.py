"""
Frame-error union bounds and cumulative spectra
===============================================

Union bounds for the P_o1 family at N=300.  Keeping more inner parity
bits lowers the floor until the h_m=1 code at 100/300, whose shallower
slope makes it cross the others at high Eb/N0.
"""

from fractions import Fraction

import numpy as np

from rcsccc import (
    GeneratorSpec,
    PuncturePattern,
    build_trellis,
    builtin_ladder,
    compose_uniform,
    inner_joint_enumerator,
    ladder_step,
    outer_joint_enumerator,
    union_bound_frame,
)
from rcsccc.bounds import cumulative_spectrum

code = build_trellis(GeneratorSpec.parse("1,5/7"))
P_o1 = PuncturePattern.from_matrix([[1, 1], [1, 0]], 200)
systematic, parity = builtin_ladder("table2"), builtin_ladder("table1")
R = Fraction(99, 152)  # 198 information bits over 304 channel bits
grid = np.arange(4.0, 8.01, 1.0)

print("rho_p    " + "".join(f"{x:9.1f} dB" for x in grid))
spectra = {}
for kept in (20, 40, 60, 80, 100):
    spec = compose_uniform(outer_joint_enumerator(code, P_o1, ladder_step(systematic, kept), 200),
                           inner_joint_enumerator(code, ladder_step(parity, 300 - kept), 300))
    spectra[kept] = spec
    fer = union_bound_frame(spec, R, grid).values
    print(f"{kept:3d}/300 " + "".join(f"{v:12.3e}" for v in fer))

print("\ncumulative multiplicity up to d")
print("rho_p   " + "".join(f"{d:10d}" for d in (2, 3, 4, 6, 10)))
for kept, spec in spectra.items():
    cum = cumulative_spectrum(spec)
    print(f"{kept:3d}/300" + "".join(f"{float(cum[d]):10.3g}" for d in (2, 3, 4, 6, 10)))
