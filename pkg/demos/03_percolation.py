"""
Sites connected to the boundary in supercritical bond percolation
=================================================================

With bonds open at probability 0.7 on Z^2 the infinite cluster is unique,
and the indicator "x connects to the box boundary" stands in for "x is in
the infinite cluster". Counting such sites in a block gives a positively
associated block sum. We check that the count does not depend on the box
size and that its law approaches a normal as the block grows.
"""
import math
import warnings

from steinpa.lattice.percolation import PercolationParams, percolation_sample
from steinpa.stats import d1_value, standardize

warnings.simplefilter("ignore")

for L in (128, 256):
    params = PercolationParams(dim=2, box_side=L, theta=0.7)
    for n in (8, 16, 32):
        U = percolation_sample(params, n=n, replicates=1000).column(0)
        se = U.std(ddof=1) / math.sqrt(U.size) / n**2
        print(f"L={L} n={n:2d}: E[U]/n^2 = {U.mean() / n**2:.4f} +- {se:.4f}   "
              f"d1 = {d1_value(standardize(U).values):.3f}")
