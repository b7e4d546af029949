import json

import pytest
import yaml

from rcsccc import cli, enumerator
from rcsccc.puncturing import parse_pattern

T5 = """\
# rate 2/3 with rho_p = 40/300
K: 200
outer_puncturing: [[1, 1], [1, 0]]
systematic_ladder: builtin:table2
parity_ladder: builtin:table1
rate: "2/3"
rho_p: "{rp}"
"""

TOY = """\
K: 4
parity_ladder: {length: 8, positions: [1, 4]}
systematic_ladder: {length: 8, positions: [3]}
systematic_deleted: 1
parity_deleted: 2
grid: "2:4:1"
"""


def _cfg(tmp_path, text, name="job.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _run(tmp_path, cmd, text, *extra, out="out"):
    code = cli.main([cmd, "--config", str(_cfg(tmp_path, text)), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


def test_enumerate_baseline(tmp_path, capsys):
    code, out = _run(tmp_path, "enumerate", "K: 20\nouter_puncturing: [[1, 1], [1, 0]]\n")
    assert code == 0
    summ = json.loads((out / "summary.json").read_text())
    assert summ["d_f_o_prime"] == 3
    assert (out / "outer_enumerator.csv").read_text().startswith("w,l,j,n,count")
    assert yaml.safe_load((out / "resolved_config.yaml").read_text())["caps"] == enumerator.DEFAULT_CAPS


def test_empty_puncturing_echoes_rate_one_third(tmp_path, capsys):
    code, out = _run(tmp_path, "enumerate", "K: 12\nouter_puncturing: [[1, 1], [1, 0]]\n")
    assert code == 0
    assert "rate 1/3" in capsys.readouterr().out
    assert yaml.safe_load((out / "resolved_config.yaml").read_text())["derived"]["rate_nominal"] == "1/3"


def test_missing_pattern_file(tmp_path, capsys):
    code, _ = _run(tmp_path, "enumerate", "K: 200\nparity_ladder: nowhere.txt\n")
    assert code == 2
    assert "nowhere.txt" in capsys.readouterr().err


@pytest.mark.parametrize("text", [
    "K: 200\nbogus_key: 1\n",
    "K: 200\nouter: '1,9/8'\n",
    "K: 200\nN: 301\n",
    "K: 200\nrate: '2/3'\n",
    "K: 200\nkernel: gaussian\n",
    "K: 200\nbound: {mode: fancy}\n",
    "K: 200\nouter_puncturing: [[1, 1], [1, 0]]\nparity_ladder: builtin:table1\n"
    "systematic_ladder: builtin:table2\nrate: '9/10'\nrho_p: '1'\n",
    "- just\n- a list\n",
])
def test_config_errors(tmp_path, text):
    assert _run(tmp_path, "bound", text)[0] == 2


def test_missing_config_file(tmp_path):
    assert cli.main(["bound", "--config", str(tmp_path / "none.yaml"), "--out", str(tmp_path)]) == 2


def test_cap_exceeded_exit_code(tmp_path):
    assert _run(tmp_path, "bound", "K: 20\n", "--caps", "l_cap=2")[0] == 3


def test_bound_table_v_row(tmp_path):
    code, out = _run(tmp_path, "bound", T5.format(rp="20/300"))
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["h_m"] == 3 and rep["d_odprime_at_dfoprime"] == 3 and rep["h_alpha_M"] == 3
    assert rep["asymptotic"]["alpha_M"] == -2
    assert rep["rates"]["rate_nominal"] == "2/3"
    for name in ("spectrum.csv", "bound_bit.csv", "bound_frame.csv", "cumulative_spectrum.csv"):
        assert (out / name).exists()


def test_kernel_flag(tmp_path):
    _, a = _run(tmp_path, "bound", TOY, out="a")
    _, b = _run(tmp_path, "bound", TOY, "--kernel", "erfc", out="b")
    assert (a / "bound_frame.csv").read_text() != (b / "bound_frame.csv").read_text()
    assert yaml.safe_load((b / "resolved_config.yaml").read_text())["kernel"] == "erfc"


def test_oracle_flag(tmp_path, capsys, monkeypatch):
    code, _ = _run(tmp_path, "bound", TOY, "--oracle")
    assert code == 0 and "exact match" in capsys.readouterr().out
    real = enumerator.brute_force_spectrum

    def skewed(*a, **k):
        d = real(*a, **k)
        key = min(d)
        d[key] += 1
        return d

    monkeypatch.setattr(enumerator, "brute_force_spectrum", skewed)
    assert _run(tmp_path, "bound", TOY, "--oracle")[0] == 4


def test_bound_is_byte_identical(tmp_path):
    _, a = _run(tmp_path, "bound", TOY, out="a")
    _, b = _run(tmp_path, "bound", TOY, out="b")
    for f in sorted(p.name for p in a.iterdir()):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_optimize_ladders(tmp_path):
    code, out = _run(tmp_path, "optimize", "K: 18\nouter_puncturing: [[1, 1], [1, 0]]\n")
    assert code == 0
    par = parse_pattern((out / "parity_ladder.txt").read_text())
    sys = parse_pattern((out / "systematic_ladder.txt").read_text())
    assert len(par) == 27
    assert len(sys) <= 27 - 18
    traj = json.loads((out / "parity_trajectory.json").read_text())
    assert [r["step"] for r in traj] == list(range(1, 28))


def test_optimize_restrict_to_parity(tmp_path):
    text = "K: 18\nouter_puncturing: [[1, 1], [1, 0]]\noptimize: {target: systematic}\n"
    code, out = _run(tmp_path, "optimize", text, "--restrict-to-parity")
    assert code == 0
    sys = parse_pattern((out / "systematic_ladder.txt").read_text())
    assert all(p % 2 == 1 for p in sys.ordered_positions)
    assert not (out / "parity_ladder.txt").exists()


SIM = T5.format(rp="40/300") + """\
grid: "2.0,2.5"
simulation: {max_frames: 100, min_frame_errors: 5, batch: 25, overlay: true}
"""


def test_simulate_reproducible(tmp_path):
    code, a = _run(tmp_path, "simulate", SIM, "--seed", "5", out="a")
    assert code == 0
    _, b = _run(tmp_path, "simulate", SIM, "--seed", "5", out="b")
    for f in ("simulation.csv", "simulation_meta.json", "overlay.csv", "resolved_config.yaml"):
        assert (a / f).read_bytes() == (b / f).read_bytes()
    head = (a / "overlay.csv").read_text().splitlines()[0]
    assert head == "ebno_db,fer_sim,ci_low,ci_high,fer_bound"
    _, c = _run(tmp_path, "simulate", SIM, "--seed", "6", out="c")
    assert (a / "simulation.csv").read_bytes() != (c / "simulation.csv").read_bytes()


def test_simulate_workers_do_not_change_output(tmp_path):
    one = SIM.replace("batch: 25", "batch: 25, workers: 1")
    two = SIM.replace("batch: 25", "batch: 25, workers: 2")
    _, a = _run(tmp_path, "simulate", one, out="a")
    _, b = _run(tmp_path, "simulate", two, out="b")
    assert (a / "simulation.csv").read_bytes() == (b / "simulation.csv").read_bytes()


def test_simulate_rho_sweep(tmp_path):
    text = T5.format(rp="40/300") + """\
grid: "3.0"
simulation: {max_frames: 25, batch: 25, sweep_rho_p: ["20/300", "80/300"]}
"""
    code, out = _run(tmp_path, "simulate", text)
    assert code == 0
    rows = (out / "fer_vs_rho.csv").read_text().splitlines()
    assert rows[0].startswith("rate,rho_s,rho_p") and len(rows) == 3
    assert rows[1].split(",")[1] == "14/15"  # 280/300 systematic bits kept


def test_iterations_flag(tmp_path):
    _, out = _run(tmp_path, "simulate", SIM, "--iterations", "3")
    assert yaml.safe_load((out / "resolved_config.yaml").read_text())["simulation"]["iterations"] == 3


FAMILY = """\
K: 200
outer_puncturing: [[1, 1], [1, 0]]
systematic_ladder: builtin:table2
parity_ladder: builtin:table1
family:
  rates: ["1/3", "1/2", "2/3", "4/5"]
  rho_p: ["1", "125/300", "40/300", "10/300"]
  parameters: {params}
"""


def test_family_manifest(tmp_path):
    code, out = _run(tmp_path, "family", FAMILY.format(params="true"))
    assert code == 0
    fam = json.loads((out / "family.json").read_text())
    assert fam["rate_compatible"]
    two_thirds = fam["members"][2]
    assert two_thirds["rate"] == "2/3" and two_thirds["h_m"] == 2
    assert two_thirds["N_hm"] == pytest.approx(4.81e-3, rel=5e-3)


def test_family_not_nested(tmp_path):
    text = FAMILY.format(params="false").replace('"125/300"', '"150/300"')
    assert _run(tmp_path, "family", text)[0] == 3


def test_family_infeasible_rate(tmp_path, capsys):
    text = FAMILY.format(params="false").replace('"4/5"', '"9/10"').replace('"10/300"', '"1"')
    assert _run(tmp_path, "family", text)[0] == 2
    assert "infeasible" in capsys.readouterr().err


def test_grid_parsing():
    assert cli.parse_grid("4:5:0.5") == [4.0, 4.5, 5.0]
    assert cli.parse_grid("1,2.5") == [1.0, 2.5]
    assert cli.parse_grid([3, 4]) == [3.0, 4.0]
    with pytest.raises(cli.ConfigError):
        cli.parse_grid("4:3:0.5")
