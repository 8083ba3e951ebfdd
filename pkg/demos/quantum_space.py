"""The pairs structure on M_2 and why its dual is not adapted.

Both sides are honest measured quantum groupoids. On the original the
adaptedness identity holds with the modular group of the base weight; on the
dual it only holds with the time-reversed group, so the dual sits in the
"dual of adapted" column. A non-tracial density is what separates the two.
"""
import numpy as np

from qgroupoid import Basis, classify, dualize, factory, verify_mqg

for dens in ([0.5, 0.5], [2 / 3, 1 / 3]):
    base = Basis([2], np.diag(dens).astype(complex))
    s = factory.pairs_qg(base)
    d = dualize(s)
    fs, fd = classify(s), classify(d)
    print(f"density {np.round(dens, 3)}")
    print("  pairs:", verify_mqg(s).summary(), "adapted", fs["adapted"])
    print("  dual: ", verify_mqg(d).summary(), "adapted", fd["adapted"],
          "dual of adapted", fd["dual_of_adapted"])
    print("  gap to σ on the dual: %.3g" % fd["residuals"]["gamma_vs_sigma"])
