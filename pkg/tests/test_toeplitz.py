import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdisk.sequences import Affine, PowerLaw, normalize_weight
from qdisk.toeplitz import (
    CannotBoundError,
    DiagonalSymbol,
    ToeplitzElement,
    const_symbol,
    derive,
    diagonal,
    identity,
    monomial,
    multiply,
    random_element,
    represent,
    rho,
    shift,
    shift_adjoint,
    tau,
)

BETA = Affine(1, 1)
seeds = st.integers(0, 2**32 - 1)


def rand(seed, **kw):
    return random_element(np.random.default_rng(seed), **kw)


def test_small_matrix_oracles():
    U = np.eye(6, k=-1)
    assert np.array_equal(represent(shift(), 5), U)
    assert np.array_equal(represent(shift_adjoint(), 5), U.T)
    lab = diagonal(Affine(1, 0))
    assert np.array_equal(represent(lab, 5), np.diag(np.arange(6.0)))
    x = multiply(shift(), lab)
    assert np.array_equal(represent(x, 5), U @ np.diag(np.arange(6.0)))


def test_isometry_relations():
    assert multiply(shift_adjoint(), shift()).equals(identity())
    p = multiply(shift(), shift_adjoint())
    assert p.equals(diagonal(const_symbol(1.0, [0.0])))
    assert not p.equals(identity())


def test_canonical_products():
    # (U k)(U 1) = U^2 (k+1)
    x = multiply(monomial(1, Affine(1, 0)), shift())
    assert set(x.modes) == {2}
    assert np.allclose(x.modes[2](np.arange(10)), np.arange(1, 11))


@settings(max_examples=40, deadline=None)
@given(seeds, seeds)
def test_product_matches_matrix_compression(s1, s2):
    x, y = rand(s1), rand(s2)
    r = x.max_mode + y.max_mode
    K = 30
    big = represent(x, K + r) @ represent(y, K + r)
    m = K - r
    assert np.allclose(represent(multiply(x, y), K)[:m, :m], big[:m, :m], rtol=1e-13, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_adjoint_is_conjugate_transpose(s):
    x = rand(s)
    assert np.allclose(represent(x.adjoint(), 25), represent(x, 25).conj().T)
    assert x.adjoint().adjoint().equals(x)


@settings(max_examples=25, deadline=None)
@given(seeds, seeds, seeds)
def test_associative_and_distributive(s1, s2, s3):
    x, y, z = rand(s1, max_mode=3), rand(s2, max_mode=3), rand(s3, max_mode=3)
    assert multiply(multiply(x, y), z).equals(multiply(x, multiply(y, z)), rtol=1e-12, atol=1e-12)
    assert multiply(x, y + z).equals(multiply(x, y) + multiply(x, z), rtol=1e-12, atol=1e-12)


def test_probe_window_is_faithful():
    # symbols are constant past k0, so agreement on the probe window
    # (at most 32 beyond the supports) means agreement everywhere
    rng = np.random.default_rng(5)
    for _ in range(20):
        x, y = random_element(rng), random_element(rng)
        z1 = multiply(x, y)
        z2 = multiply(x, y + identity()) - x
        w = z1.probe_window(z2)
        assert w <= 32
        assert z1.equals(z2, window=w, rtol=1e-12, atol=1e-12)
        assert z1.max_difference(z2, 10 * w) <= 1e-12 * (1 + z1.max_difference(ToeplitzElement(), 10 * w))
        # a perturbation beyond k0 is seen by the window
        k0 = max(a.k0 for a in z1.modes.values()) if z1.modes else 0
        bumped = z1 + diagonal(const_symbol(0.0, [0.0] * (k0 + 1) + [1.0]))
        assert not bumped.equals(z1, window=bumped.probe_window(z1))


def test_derivation_of_generators():
    dU = derive(shift(), BETA)
    assert set(dU.modes) == {2}
    assert dU.equals(monomial(2, 1.0))
    assert dU.modes[2].limit == 1
    dUs = derive(shift_adjoint(), BETA)
    assert dUs.equals(-1 * identity())
    assert dUs.modes[0].limit == -1
    assert derive(identity(), BETA).modes == {}


def test_derivation_matrix_oracle():
    rng = np.random.default_rng(3)
    G = monomial(1, DiagonalSymbol(BETA, None))
    for _ in range(10):
        x = random_element(rng, max_mode=3)
        K, m = 40, 30
        gm, xm = represent(G, K), represent(x, K)
        assert np.allclose(represent(derive(x, BETA), K)[:m, :m], (gm @ xm - xm @ gm)[:m, :m], rtol=1e-12, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, seeds)
def test_leibniz(s1, s2):
    x, y = rand(s1, max_mode=3), rand(s2, max_mode=3)
    lhs = derive(multiply(x, y), BETA)
    rhs = multiply(derive(x, BETA), y) + multiply(x, derive(y, BETA))
    assert lhs.max_difference(rhs, 60) <= 1e-10 * (1 + lhs.max_difference(ToeplitzElement(), 60))


@pytest.mark.parametrize("theta", [np.pi / 7, 1.0, 2 * np.pi / 3])
def test_derivation_is_covariant(theta):
    rng = np.random.default_rng(11)
    for _ in range(10):
        x = random_element(rng)
        lhs = rho(derive(x, BETA), theta)
        rhs = cmath.exp(1j * theta) * derive(rho(x, theta), BETA)
        assert lhs.max_difference(rhs, 50) <= 1e-12 * (1 + lhs.max_difference(ToeplitzElement(), 50))


def test_rotation():
    assert rho(shift_adjoint(), np.pi).equals(-1 * shift_adjoint(), atol=1e-15)
    x = random_element(np.random.default_rng(0))
    assert rho(rho(x, 0.3), -0.3).equals(x, rtol=1e-14, atol=1e-14)


def test_tau():
    w = normalize_weight(PowerLaw(5.5))
    p = multiply(shift(), shift_adjoint())
    assert tau(w, p) == pytest.approx(1 - w(0), rel=1e-14)
    assert tau(w, shift()) == 0
    assert tau(w, identity()) == pytest.approx(1.0)
    with pytest.raises(CannotBoundError):
        tau(w, diagonal(Affine(1, 1)))


def test_serialization_round_trip():
    x = random_element(np.random.default_rng(9))
    again = ToeplitzElement.from_list(x.to_list())
    assert again.equals(x)
