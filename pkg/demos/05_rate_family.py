"""
A rate-compatible family from the command line
==============================================

The ``family`` command picks, for each target rate, how many systematic
and parity deletions the two ladders must supply, reports the distance
parameters of every member and verifies that each higher-rate member
only removes bits that lower-rate members also remove.
"""

import json
import tempfile
from pathlib import Path

from rcsccc.cli import main

job = """\
K: 200
outer_puncturing: [[1, 1], [1, 0]]
systematic_ladder: builtin:table2
parity_ladder: builtin:table1
family:
  rates: ["1/3", "1/2", "2/3", "4/5"]
  rho_p: ["1", "125/300", "40/300", "10/300"]
"""

with tempfile.TemporaryDirectory() as tmp:
    cfg = Path(tmp) / "family.yaml"
    cfg.write_text(job)
    code = main(["family", "--config", str(cfg), "--out", tmp])
    fam = json.loads((Path(tmp) / "family.json").read_text())

print("exit code", code, " rate compatible:", fam["rate_compatible"])
for m in fam["members"]:
    print(f"rate {m['rate']:>4}  rho_s={m['rho_s']:>7}  rho_p={m['rho_p']:>6}"
          f"  h_m={m['h_m']}  N_hm={m['N_hm']:.3e}")

# 9/10 would need 200 / (9/10) = 222.2 transmitted bits, so no split exists;
# the command exits with code 2 and says why
