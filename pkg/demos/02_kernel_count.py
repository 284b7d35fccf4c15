# How many modes carry a square-summable kernel vector?
#
# For beta = 1+k, mu = (1+k)^-b, w ~ (1+k)^-c the mode-n kernel vector is
# h_n = P_n / mu with P_n(k) = beta(k)...beta(k+n-1).  It lies in l2_w
# while 2n + 2b - c < -1, so the count is max(0, ceil((c - 2b - 1)/2)).

from qdisk.analysis import check_condition, kernel_dimension
from qdisk.dirac import DiracData, kernel_membership
from qdisk.sequences import PowerLawFamily

print(f"{'c':>6} {'predicted':>10} {'computed':>9}")
for c in (5.5, 7.5, 9.0, 9.5, 10.0, 11.0, 12.5):
    fam = PowerLawFamily(4, 3, c)
    data = DiracData.from_family(fam)
    print(f"{c:6.1f} {fam.predicted_N():10d} {kernel_dimension(data):9d}")

# the membership series for the first modes of c = 10; the last one is
# the first divergent index, which condition seven reports as N
data = DiracData.from_family(PowerLawFamily(4, 3, 10))
for n in range(3):
    m = kernel_membership(data, n)
    print(f"mode {n}: in l2_w = {m.in_space}, order {m.series.order:+.1f}, partial {m.series.partial:.6g}")
print("N from condition seven:", check_condition("seven", data).N)
