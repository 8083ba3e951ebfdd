import functools

import numpy as np
import pytest

from qgroupoid import factory
from qgroupoid.hopf import wha_to_amqg
from qgroupoid.mqg import from_adapted
from qgroupoid.reltensor import Basis

MU2 = [1 / 3, 2 / 3]
MU3 = [1 / 6, 1 / 3, 1 / 2]


def _base(blocks, diag):
    return Basis(blocks, np.diag(diag).astype(complex))


GROUPOIDS = {
    "Z2": lambda: factory.cyclic_group(2),
    "Z3": lambda: factory.cyclic_group(3),
    "S3": lambda: factory.symmetric_group(3),
    "pair2": lambda: factory.pair_groupoid(2),
    "pair2_mu": lambda: factory.pair_groupoid(2, MU2),
    "pair3": lambda: factory.pair_groupoid(3),
    "pair3_mu": lambda: factory.pair_groupoid(3, MU3),
}

WHAS = {f"{kind}_{g}": (lambda k=kind, g=g: (factory.function_wha if k == "fun" else
                                             factory.convolution_wha)(GROUPOIDS[g]()))
        for kind in ("fun", "conv") for g in ("Z2", "Z3", "S3", "pair2", "pair3")}

STRUCTURES = {
    "trivial": factory.trivial,
    "C(Z2)": lambda: factory.from_finite_groupoid(GROUPOIDS["Z2"]()),
    "C(Z3)": lambda: factory.from_finite_groupoid(GROUPOIDS["Z3"]()),
    "C(S3)": lambda: factory.from_finite_groupoid(GROUPOIDS["S3"]()),
    "L(Z2)": lambda: from_adapted(wha_to_amqg(wha("conv_Z2"))),
    "L(Z3)": lambda: from_adapted(wha_to_amqg(wha("conv_Z3"))),
    "L(S3)": lambda: from_adapted(wha_to_amqg(wha("conv_S3"))),
    "pair2": lambda: factory.from_finite_groupoid(GROUPOIDS["pair2"]()),
    "pair2_mu": lambda: factory.from_finite_groupoid(GROUPOIDS["pair2_mu"]()),
    "pair3": lambda: factory.from_finite_groupoid(GROUPOIDS["pair3"]()),
    "pair3_mu": lambda: factory.from_finite_groupoid(GROUPOIDS["pair3_mu"]()),
    "pairs_C2": lambda: factory.pairs_qg(_base([1, 1], [0.3, 0.7])),
    "pairs_M2": lambda: factory.pairs_qg(_base([2], [2 / 3, 1 / 3])),
    "qspace_C2": lambda: factory.quantum_space_qg(_base([1, 1], [0.3, 0.7])),
    "qspace_M2": lambda: factory.quantum_space_qg(_base([2], [2 / 3, 1 / 3])),
}

# structures with N = ℂ
GROUPS = ["trivial", "C(Z2)", "C(Z3)", "C(S3)", "L(Z2)", "L(Z3)", "L(S3)"]
# built from a groupoid or a weak Hopf algebra
CLASSICAL = [k for k in STRUCTURES if not k.startswith(("pairs", "qspace"))]


@functools.lru_cache(maxsize=None)
def structure(name):
    return STRUCTURES[name]()


@functools.lru_cache(maxsize=None)
def wha(name):
    return WHAS[name]()


@functools.lru_cache(maxsize=None)
def dual(name):
    from qgroupoid.duality import dualize
    return dualize(structure(name))


@pytest.fixture(params=list(STRUCTURES))
def example(request):
    return request.param, structure(request.param)


@functools.lru_cache(maxsize=None)
def wha_structure(name):
    return from_adapted(wha_to_amqg(wha(name)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
