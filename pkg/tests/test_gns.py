import numpy as np
import pytest

from qdisk.analysis import random_vector
from qdisk.gns import (
    GnsVector,
    SpaceMismatchError,
    WeightedSpace,
    act,
    check_implementing,
    embed,
    inner,
    norm,
    pi_matrix,
    rotate,
    window_index,
)
from qdisk.sequences import PowerLaw, normalize_weight
from qdisk.toeplitz import identity, multiply, random_element, shift, shift_adjoint


@pytest.fixture(scope="module")
def space():
    return WeightedSpace(normalize_weight(PowerLaw(5.5)), "w")


def test_norm_uses_shifted_weights(space):
    w = space.weight
    f = GnsVector({0: [1.0], -2: [1.0]}, space)
    assert norm(f) ** 2 == pytest.approx(w(0) + w(2))


def test_inner_is_conjugate_linear_in_first(space, rng):
    f, g = random_vector(rng, space), random_vector(rng, space)
    assert inner(2j * f, g) == pytest.approx(-2j * inner(f, g))
    assert inner(f, 2j * g) == pytest.approx(2j * inner(f, g))
    assert inner(g, f) == pytest.approx(np.conj(inner(f, g)))


def test_space_mismatch(space):
    other = WeightedSpace(normalize_weight(PowerLaw(4)), "w'")
    f = GnsVector({0: [1.0]}, space)
    g = GnsVector({0: [1.0]}, other)
    with pytest.raises(SpaceMismatchError):
        f + g
    with pytest.raises(SpaceMismatchError):
        inner(f, g)


def test_shift_action(space):
    f = GnsVector({0: [1.0, 2, 3, 4, 5]}, space)
    assert np.array_equal(act(shift(), f).coeffs[1], [1, 2, 3, 4, 5])
    assert np.array_equal(act(shift_adjoint(), f).coeffs[-1], [2, 3, 4, 5])
    assert act(identity(), f).coeffs.keys() == {0}


def test_action_is_a_representation(space, rng):
    for _ in range(10):
        x, y = random_element(rng, max_mode=3), random_element(rng, max_mode=3)
        f = random_vector(rng, space)
        lhs = act(x, act(y, f))
        rhs = act(multiply(x, y), f)
        assert norm(lhs - rhs) <= 1e-12 * (norm(lhs) + 1)


def test_pi_matrix_matches_action(space, rng):
    K, modes = 20, (-4, 4)
    ms, ks = window_index(modes, K)
    for _ in range(3):
        a = random_element(rng, max_mode=2)
        P = pi_matrix(a, modes, K).toarray()
        for col in range(0, len(ms), 7):
            f = GnsVector({int(ms[col]): np.eye(K)[ks[col]]}, space)
            g = act(a, f)
            vec = np.zeros(len(ms), dtype=complex)
            for n, v in g.coeffs.items():
                if modes[0] <= n <= modes[1]:
                    m = min(K, len(v))
                    vec[(n - modes[0]) * K : (n - modes[0]) * K + m] = v[:m]
            assert np.allclose(P[:, col], vec)


def test_rotation_is_unitary_and_implements(space, rng):
    f = random_vector(rng, space)
    assert norm(rotate(f, 0.7)) == pytest.approx(norm(f))
    for _ in range(5):
        a = random_element(rng)
        for theta in (np.pi / 7, 1.0, 2 * np.pi / 3):
            assert check_implementing(a, theta, f)


def test_vector_round_trips(space, rng):
    a = random_element(rng)
    f = embed(a, 12, space)
    again = GnsVector.from_dict(f.to_dict(), space)
    assert norm(f - again) == 0
    assert GnsVector.from_element(f.as_element(), 12, space).coeffs.keys() <= f.coeffs.keys()
