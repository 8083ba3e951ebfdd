"""Functions on a groupoid versus its convolution algebra.

Build C(G) for the pair groupoid on three points with unequal point masses,
and take the dual. The commutative algebra turns into a single matrix block and
the nontrivial modulus becomes the identity. Dualizing again lands back on
C(G).
"""
import numpy as np

from qgroupoid import bidual_check, classify, factory, verify_dual, verify_mqg


def spectrum(x):
    return np.round(np.linalg.eigvalsh((x + x.conj().T) / 2), 6)


G = factory.pair_groupoid(3, [1 / 6, 1 / 3, 1 / 2])
s = factory.from_finite_groupoid(G)
print("C(G): blocks", s.M.blocks, "on a carrier of dimension", s.n)
print("  verification:", verify_mqg(s).summary())
print("  modulus spectrum:", spectrum(s.delta))

d, rep = verify_dual(s)
print("dual: blocks", sorted(d.M.blocks), "on a carrier of dimension", d.n)
print("  verification:", rep.summary())
print("  modulus spectrum:", spectrum(d.delta))

flags = classify(s)
print("C(G) adapted:", flags["adapted"], " quantum group:", flags["quantum_group"])

# the double dual is isomorphic to C(G) through the canonical identification
print("bidual:", bidual_check(s, d1=d).summary())
