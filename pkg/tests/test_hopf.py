import numpy as np
import pytest

from conftest import WHAS, structure, wha, wha_structure
from qgroupoid import factory
from qgroupoid.hopf import (HopfBimodule, WeakHopfAlgebra, amqg_to_wha, coassociativity_defect,
                            haar_state, verify_hopf_bimodule, verify_wha, wha_to_amqg)
from qgroupoid.linops import StructureError


@pytest.mark.parametrize("key", sorted(WHAS))
def test_factory_weak_hopf_algebras_verify(key):
    rep = verify_wha(wha(key))
    assert rep.passed, rep.failures()


def test_identity_antipode_is_rejected():
    w = wha("conv_S3")
    bad = WeakHopfAlgebra(w.M, w.Gamma, w.M.basis.copy(), w.eps)
    rep = verify_wha(bad)
    assert not rep.passed
    assert any("antipode" in c.name for c in rep.failures())


def test_broken_coproduct_is_rejected():
    w = wha("fun_pair2")
    gam = w.Gamma.copy()
    gam[0] = gam[1]
    rep = verify_wha(WeakHopfAlgebra(w.M, gam, w.kappa, w.eps))
    assert not rep.passed


def test_haar_on_a_group_is_the_uniform_state():
    h = haar_state(wha("fun_S3"))
    assert h.affine_nullity == 0
    assert np.isclose(h.state(np.eye(6)), 1.0)
    assert np.allclose([h.state(np.diag(np.eye(6)[g])) for g in range(6)], 1 / 6)


def test_haar_failure_is_reported():
    w = wha("conv_Z2")
    # a counit of zero makes the normalisation impossible
    bad = WeakHopfAlgebra(w.M, w.Gamma * 0, w.kappa, w.eps)
    with pytest.raises(StructureError):
        haar_state(bad)


@pytest.mark.parametrize("key", ["fun_S3", "conv_S3", "fun_pair3", "conv_pair2"])
def test_wha_gives_a_hopf_bimodule(key):
    data = wha_to_amqg(wha(key))
    rep = verify_hopf_bimodule(data.hb)
    assert rep.passed, rep.failures()


@pytest.mark.parametrize("key", ["fun_Z3", "conv_S3", "conv_pair3"])
def test_round_trip_through_measured_structure(key):
    w = wha(key)
    w2 = amqg_to_wha(wha_structure(key))
    assert verify_wha(w2, 1e-8).passed
    assert w2.M.dim == w.M.dim
    assert sorted(w2.M.blocks) == sorted(w.M.blocks)


def test_non_coassociative_bimodule_fails():
    s = structure("pair2_mu")
    hb = s.hb
    gam = hb.Gamma.copy()
    # swap the legs of every coproduct image: still a homomorphism, no longer coassociative
    sw = factory.swap_matrix_nn(s.n)
    twisted = HopfBimodule(hb.base, hb.M, hb.alpha, hb.beta, np.array([sw @ g @ sw.T for g in gam]))
    assert verify_hopf_bimodule(twisted).passed is False


def test_coassociativity_on_groupoid():
    assert coassociativity_defect(structure("pair3").hb) < 1e-10
