import numpy as np
import pytest

from conftest import GROUPOIDS, MU3, structure
from qgroupoid import factory
from qgroupoid.hopf import InvariantOvw
from qgroupoid.linops import dag, op_power, opnorm
from qgroupoid.mqg import (MqgStructure, antipode_consistency, classify, uniqueness_probe, verify_mqg)

FAST = ["trivial", "C(Z2)", "C(S3)", "L(S3)", "pair2", "pair2_mu", "pair3_mu", "pairs_C2", "qspace_C2"]


@pytest.mark.parametrize("name", FAST)
def test_examples_verify(name):
    rep = verify_mqg(structure(name))
    assert rep.passed, [(c.name, c.residual) for c in rep.failures()]


def _with(s, **changes):
    fields = dict(hb=s.hb, omega=s.omega, R_images=s.R_images, tau_gen=s.tau_gen, name="edited")
    fields.update(changes)
    return MqgStructure(**fields)


def test_wrong_co_involution_is_caught():
    s = structure("C(S3)")
    bad = _with(s, R_images=s.M.basis.copy())
    failures = {c.name for c in verify_mqg(bad).failures()}
    assert "R_alpha_is_beta" in failures or "R_coproduct" in failures


def test_non_invariant_weight_is_caught():
    s = structure("pair3_mu")
    w = np.arange(1, s.n + 1, dtype=float)
    bad = _with(s, omega=(s.omega * np.sqrt(w / w.sum() * s.n)).astype(complex))
    failures = {c.name for c in verify_mqg(bad).failures()}
    assert "left_invariance" in failures


def test_wrong_scaling_group_is_caught():
    s = structure("pair2_mu")
    # a diagonal generator would commute with the diagonal algebra; mix the arrows instead
    a = np.arange(16, dtype=float).reshape(4, 4)
    gen = (a @ a.T / 100 + np.eye(4)).astype(complex)
    failures = {c.name for c in verify_mqg(_with(s, tau_gen=gen)).failures()}
    assert "tau_preserves_M" in failures


def test_modulus_of_the_weighted_pair_groupoid():
    G = GROUPOIDS["pair3_mu"]()
    s = structure("pair3_mu")
    mu = np.asarray(MU3)
    assert opnorm(s.delta - np.diag(mu[G.source] / mu[G.range])) < 1e-10
    assert opnorm(s.lam - np.eye(s.n)) < 1e-10


def test_antipode_is_R_after_analytic_tau():
    s = structure("pairs_M2")
    rng = np.random.default_rng(4)
    x = s.M.random_element(rng)
    assert opnorm(s.S(x) - s.R(s.tau_complex(-0.5j, x))) < 1e-10
    # S is antimultiplicative
    y = s.M.random_element(rng)
    assert opnorm(s.S(x @ y) - s.S(y) @ s.S(x)) < 1e-8 * np.linalg.norm(x) * np.linalg.norm(y)


@pytest.mark.parametrize("name", ["C(S3)", "pair2_mu", "pairs_C2"])
def test_antipode_consistency(name):
    rep = antipode_consistency(structure(name))
    assert rep.passed, rep.failures()


def test_uniqueness_of_the_left_invariant_weight():
    s = structure("pair3_mu")
    m = s.base.m
    h0 = np.diag(np.linspace(1, 2, m)).astype(complex)
    bh = s.hb.beta_of(op_power(h0, 0.5))
    scaled = InvariantOvw(s.M, np.array([s.T_L(bh @ x @ bh) for x in s.M.basis]), s.hb.alpha, "left")
    h, rep = uniqueness_probe(s, scaled)
    assert rep.passed
    assert np.allclose(np.diag(h).real, np.diag(h0).real, atol=1e-8)
    # a non-invariant operator-valued weight is rejected
    rng = np.random.default_rng(0)
    x0 = s.M.random_element(rng, hermitian=True)
    x0 = x0 @ x0 + np.eye(s.n)
    other = InvariantOvw(s.M, np.array([s.T_L(x0 @ x @ x0) for x in s.M.basis]), s.hb.alpha, "left")
    h, rep = uniqueness_probe(s, other)
    assert h is None and not rep.passed


def test_classification_of_groups_and_groupoids():
    f = classify(structure("L(S3)"))
    assert f["quantum_group"] and f["adapted"] and f["compact_type"] and f["discrete_type"]
    g = classify(structure("pair2_mu"))
    assert g["adapted"] and not g["quantum_group"]
    p = classify(structure("pairs_M2"))
    assert p["adapted"] and not p["quantum_group"]


def test_changing_the_weight_on_the_basis():
    # same groupoid, different μ: the co-involution and λ stay, δ follows μ
    a = structure("pair2")
    b = structure("pair2_mu")
    assert np.abs(a.R_images - b.R_images).max() == 0
    assert opnorm(a.lam - b.lam) < 1e-10
    assert opnorm(a.delta - np.eye(a.n)) < 1e-10 < opnorm(b.delta - np.eye(b.n))


def test_transport_moves_delta():
    s = structure("pair2_mu")
    rng = np.random.default_rng(1)
    q, _ = np.linalg.qr(rng.normal(size=(s.n, s.n)) + 1j * rng.normal(size=(s.n, s.n)))
    t = factory.transport(s, q)
    assert verify_mqg(t).passed
    assert opnorm(t.delta - q @ s.delta @ dag(q)) < 1e-9
