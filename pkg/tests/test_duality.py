import pytest

import oracles
from conftest import GROUPOIDS, dual, structure
from qgroupoid.duality import bidual_check, dual_relations_check, heisenberg_check, verify_dual
from qgroupoid.linops import opnorm
from qgroupoid.mqg import verify_mqg


@pytest.mark.parametrize("name", ["trivial", "C(S3)", "L(S3)", "pair2_mu", "pairs_C2"])
def test_dual_verifies(name):
    d, rep = verify_dual(structure(name))
    assert rep.passed, [(c.name, c.residual) for c in rep.failures()]
    assert verify_mqg(d).passed


def test_dual_of_the_group_algebra_is_commutative():
    d = dual("L(S3)")
    assert d.M.dim == 6 and d.M.blocks == [1] * 6


def test_dual_of_functions_on_S3_is_noncommutative():
    d = dual("C(S3)")
    assert sorted(d.M.blocks) == [1, 1, 2]
    G = GROUPOIDS["S3"]()
    assert oracles.span_distance(d.M.basis, oracles.left_regular(G)) < 1e-9


def test_manageable_operator_is_self_dual():
    for name in ["pair2_mu", "pairs_M2"]:
        assert opnorm(dual(name).P - structure(name).P) < 1e-9


def test_dual_relations():
    s = structure("pairs_C2")
    assert dual_relations_check(s, dual("pairs_C2")).passed


def test_heisenberg_dimensions_for_the_pair_groupoid():
    rep = heisenberg_check(structure("pair2"), dual("pair2"))
    assert rep.passed
    assert rep.notes["dimensions"] == {"M_cap_Mhat": 2, "Mcomm_cap_Mhat": 2,
                                       "M_cap_Mhatcomm": 2, "Mcomm_cap_Mhatcomm": 2}


@pytest.mark.parametrize("name", ["C(Z3)", "pair3_mu"])
def test_bidual(name):
    rep = bidual_check(structure(name), d1=dual(name))
    assert rep.passed, rep.failures()


def test_groups_have_trivial_heisenberg_intersections():
    rep = heisenberg_check(structure("C(S3)"), dual("C(S3)"))
    assert rep.passed
    assert set(rep.notes["dimensions"].values()) == {1}
