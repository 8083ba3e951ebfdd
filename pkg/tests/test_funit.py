import numpy as np
import pytest

import oracles
from conftest import dual, structure
from qgroupoid.funit import (FundamentalUnitary, commutation_defects, hat_unitary,
                             implementation_defect, key_relation_defect, left_slice, manageability_check, pentagon_residual, right_slice,
                             weak_regularity_check)

SMALL = ["trivial", "C(S3)", "L(S3)", "pair2_mu", "pair3_mu", "pairs_C2"]


@pytest.mark.parametrize("name", SMALL)
def test_fundamental_unitary(name):
    s = structure(name)
    W = s.W
    assert W.unitarity() < 1e-10
    assert pentagon_residual(W) < 1e-10
    assert implementation_defect(W, s.hb) < 1e-10


def test_perturbed_unitary_breaks_the_pentagon():
    s = structure("pair2_mu")
    W = s.W
    rng = np.random.default_rng(0)
    h = rng.normal(size=W.W.shape)
    k = W.target.proj @ (h + h.T) @ W.target.proj
    from scipy.linalg import expm
    u = expm(1j * 0.3 * k)
    bad = FundamentalUnitary(u @ W.W, W.source, W.target, W.side, W.legs)
    assert bad.unitarity() < 1e-10
    assert pentagon_residual(bad) > 1e-3


@pytest.mark.parametrize("name", ["C(S3)", "pair2_mu"])
def test_group_like_slices_span_the_algebras(name):
    s = structure(name)
    e = np.eye(s.n)
    right = [right_slice(s.W, e[i], e[j]) for i in range(s.n) for j in range(s.n)]
    left = [left_slice(s.W, e[i], e[j]) for i in range(s.n) for j in range(s.n)]
    assert oracles.span_distance(right, s.M.basis) < 1e-9
    assert oracles.span_distance(left, dual(name).M.basis) < 1e-9


@pytest.mark.parametrize("name", ["L(Z3)", "pair3_mu", "pairs_C2"])
def test_manageability_and_regularity(name):
    s = structure(name)
    assert manageability_check(s.W, s.P, s.gns.Delta, s.gns.J).passed
    reg = weak_regularity_check(s.W, s.hb)
    assert reg.passed
    assert reg.notes["slice_dim"] == reg.notes["commutant_dim"]


def test_manageability_detects_a_wrong_operator():
    s = structure("pair2_mu")
    # δ is not itself a manageable operator here
    rep = manageability_check(s.W, s.delta, s.gns.Delta, s.gns.J)
    assert not rep.passed


def test_hat_unitary_is_unitary():
    s = structure("pair2_mu")
    hat = hat_unitary(s.W)
    assert hat.unitarity() < 1e-10


@pytest.mark.parametrize("name", ["C(S3)", "pairs_C2"])
def test_key_relation_and_commutations(name):
    s = structure(name)
    assert key_relation_defect(s.W, s.hb, s.omega) < 1e-10
    assert max(commutation_defects(s.W, s.hb, s.omega).values()) < 1e-10
