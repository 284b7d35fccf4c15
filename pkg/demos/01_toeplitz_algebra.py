# The Toeplitz algebra in canonical form, and the covariant derivation.
#
# Elements are finite sums U^n a_n(K) + a_n(K) (U*)^-n.  Products are
# normal-ordered with the relations K U = U (K + 1) and U* U = I.

import numpy as np

from qdisk.sequences import Affine
from qdisk.toeplitz import adjoint, derive, identity, monomial, multiply, represent, shift, shift_adjoint

U, Us = shift(), shift_adjoint()

# U is an isometry but not unitary
print("U*U == I     :", multiply(Us, U).equals(identity()))
UUs = multiply(U, Us)
print("U U* symbol  :", UUs.modes[0](np.arange(6)))

# the canonical form agrees with honest 6x6 matrices away from the cut
x = monomial(1, Affine(1.0, 0.0))  # U a(K) with a(k) = k
y = monomial(1, 1.0)
print("(U a)(U b)   :", multiply(x, y).modes[2](np.arange(6)))
print("product vs matrices:",
      np.allclose(represent(multiply(x, y), 6)[:4, :4], (represent(x, 6) @ represent(y, 6))[:4, :4]))

# the derivation d(x) = [U beta(K), x] with beta = 1 + k sends U to U^2
# and U* to -I
beta = Affine(1.0, 1.0)
print("d(U)  == U^2 :", derive(U, beta).equals(monomial(2, 1.0)))
print("d(U*) == -I  :", derive(Us, beta).equals(-1 * identity()))

# the star operation is an involution
z = multiply(monomial(2, beta), Us)
print("x** == x     :", adjoint(adjoint(z)).equals(z))
