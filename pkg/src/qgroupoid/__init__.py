"""Finite-dimensional measured quantum groupoids as explicit matrices."""
from .linops import TOL, StructureError, VerificationReport
from .reltensor import Basis
from .hopf import HopfBimodule, WeakHopfAlgebra, amqg_to_wha, verify_wha, wha_to_amqg
from .mqg import MqgStructure, classify, from_adapted, verify_mqg
from .duality import bidual_check, dualize, verify_dual
from . import factory

__all__ = ["TOL", "StructureError", "VerificationReport", "Basis", "HopfBimodule",
           "WeakHopfAlgebra", "amqg_to_wha", "verify_wha", "wha_to_amqg", "MqgStructure",
           "classify", "from_adapted", "verify_mqg", "bidual_check", "dualize", "verify_dual",
           "factory"]
