# What happens when beta (and so alpha) has zeros?
#
# The hypotheses exclude it, and the checker reports the first zero as a
# witness.  Each zero decouples the bidiagonal recursion, so every mode
# picks up finitely supported kernel vectors, one per zero inside the cut.

import numpy as np

from qdisk.analysis import check_condition, degenerate_kernel
from qdisk.dirac import DiracData, ModeOperator
from qdisk.sequences import Affine, PowerLawFamily

fam = PowerLawFamily(4, 3, 5.5)
beta = Affine(1.0, 1.0).with_overrides({k: 0.0 for k in range(4, 1000, 5)})
data = DiracData(beta, fam.mu, fam.w, fam.w_prime)

print("condition three:", check_condition("three", data).witness)
for K in (20, 40, 80):
    print(f"K = {K}: null space per mode", degenerate_kernel(data, K, (-2, 2)))

# an explicit one for mode 0: start at the zero k = 9 and solve backwards
# until the previous zero at k = 4
op = ModeOperator(data, 0)
f = np.zeros(12)
f[9] = 1.0
for k in range(8, 4, -1):
    f[k] = data.alpha(k) * f[k + 1] / data.beta(k)
print("support:", np.flatnonzero(f), " |D_0 f| =", np.max(np.abs(op.apply(f))))
