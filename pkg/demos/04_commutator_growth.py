# Commutators [D, pi(U)] on growing truncations.
#
# The off-diagonal block of [D, pi(a)] is pi(d(a)) composed with the
# inclusion H_w -> H_w'.  When w'/w grows like (1+k)^(c-a) that inclusion is
# unbounded, and the truncated norms grow like K^((c-a)/2).  With equal
# weights the inclusion is the identity and the norms stay flat.

import math

from qdisk.analysis import commutator_norm
from qdisk.dirac import DiracData
from qdisk.sequences import PowerLaw, PowerLawFamily
from qdisk.toeplitz import shift

fam = PowerLawFamily(4, 3, 5.5)
data = DiracData.from_family(fam)
flat = DiracData(fam.beta, PowerLaw(0), fam.w, fam.w)

prev = None
print(f"{'K':>5} {'(4,3,5.5)':>10} {'slope':>6} {'w = w':>8}")
for K in (50, 100, 200, 400):
    v = commutator_norm(data, shift(), K)
    slope = "" if prev is None else f"{math.log(v / prev) / math.log(2):.3f}"
    print(f"{K:5d} {v:10.3f} {slope:>6} {commutator_norm(flat, shift(), K):8.4f}")
    prev = v
print("predicted slope (c - a)/2 =", (fam.c - fam.a) / 2)
