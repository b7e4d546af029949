from importlib import resources

import pytest

from rcsccc.puncturing import PuncturePattern, parse_pattern
from rcsccc.trellis import GeneratorSpec, build_trellis


def builtin(name):
    return parse_pattern(resources.files("rcsccc").joinpath("data", name).read_text())


@pytest.fixture(scope="session")
def rsc57():
    return build_trellis(GeneratorSpec.parse("1,5/7"))


@pytest.fixture(scope="session")
def table1():
    return builtin("table1_inner_parity.txt")


@pytest.fixture(scope="session")
def table2():
    return builtin("table2_systematic_po1.txt")


@pytest.fixture(scope="session")
def table3():
    return builtin("table3_systematic_po2.txt")


@pytest.fixture(scope="session")
def table4():
    return builtin("table4_systematic_po1_parity_only.txt")


@pytest.fixture(scope="session")
def P_o1():
    return PuncturePattern.from_matrix([[1, 1], [1, 0]], 200)


@pytest.fixture(scope="session")
def P_o2():
    return PuncturePattern.from_matrix([[1, 1, 1, 1], [1, 1, 0, 0]], 200)


@pytest.fixture(scope="session")
def po1_system(rsc57, P_o1, table1, table2):
    """Cached ``(outer, inner, summary, spectrum)`` for the P_o1 family at N=300."""
    from rcsccc.bounds import compose_uniform
    from rcsccc.enumerator import distance_summary, inner_joint_enumerator, outer_joint_enumerator
    from rcsccc.puncturing import ladder_step

    cache = {}

    def get(rp, P_o=P_o1, sys_ladder=table2):
        key = (rp, id(P_o), id(sys_ladder))
        if key not in cache:
            oe = outer_joint_enumerator(rsc57, P_o, ladder_step(sys_ladder, rp), 200)
            ie = inner_joint_enumerator(rsc57, ladder_step(table1, 300 - rp), 300)
            cache[key] = (oe, ie, distance_summary(oe, ie), compose_uniform(oe, ie))
        return cache[key]

    return get


@pytest.fixture(scope="session")
def greedy_parity(rsc57):
    """Full greedy parity ladder of the (1,5/7) inner code at N=300 (about 30 s)."""
    from rcsccc.optimizer import optimize_parity_ladder

    return optimize_parity_ladder(rsc57, 300)


@pytest.fixture(scope="session")
def greedy_systematic(rsc57, P_o1):
    """Full greedy systematic ladder for (1,5/7) with P_o1, K=200."""
    from rcsccc.optimizer import optimize_systematic_ladder

    return optimize_systematic_ladder(rsc57, P_o1, 200)
