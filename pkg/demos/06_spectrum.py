# Singular values of truncated mode operators, and the kernel probe.
#
# A square K x K section of D_n (n >= 0) only sees the minimal operator, so
# the kernel vector never shows up as a small singular value there.  The
# K x (K+1) section is exact row by row; its null direction is the
# truncated h_n, and comparing it with h_n normalized far out tells a
# square-summable kernel vector from one that is not.

import numpy as np

from qdisk.analysis import kernel_probe, singular_values
from qdisk.dirac import DiracData
from qdisk.sequences import PowerLawFamily

for c in (5.5, 9.0):
    data = DiracData.from_family(PowerLawFamily(4, 3, c))
    p = kernel_probe(data, 0, 200)
    print(f"c = {c}: cosine with truncated h = {p.cosine_truncated:.6f}, with normalized h = {p.cosine_reference:.6f}")

# lowest singular values of the orthonormalized mode-0 section; the steep
# weight converges fast, the preset only algebraically
for c in (5.5, 9.0):
    data = DiracData.from_family(PowerLawFamily(4, 3, c))
    lows = [np.sort(singular_values(data, 0, K))[:20] for K in (200, 400, 800)]
    d1 = np.max(np.abs(lows[0] - lows[1]) / lows[1])
    d2 = np.max(np.abs(lows[1] - lows[2]) / lows[2])
    print(f"c = {c}: lowest sigma {lows[2][0]:.6f}, drift 200->400 {d1:.1e}, 400->800 {d2:.1e}")
