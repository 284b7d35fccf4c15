import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import zeta

from qdisk.sequences import (
    Affine,
    DivergenceError,
    DomainError,
    EventuallyConstant,
    Exponential,
    PowerLaw,
    PowerLawFamily,
    SingularSymbolError,
    Tabulated,
    alpha_from,
    nested_sum,
    normalize_weight,
    predicted_N,
    sequence_from_dict,
    sum_series,
)


def power_log(p):
    return lambda k: -p * np.log1p(np.asarray(k, dtype=float))


def test_power_law_values_and_logs():
    s = PowerLaw(3)
    assert s(0) == 1.0
    assert s(1) == pytest.approx(0.125)
    assert s.log(np.array([9]))[0] == pytest.approx(-3 * math.log(10))
    assert s.order == -3


def test_negative_index_is_domain_error():
    with pytest.raises(DomainError):
        PowerLaw(2)(-1)
    with pytest.raises(DomainError):
        Affine(1, 1)(np.array([0, -2]))


def test_affine_zero_is_exact():
    k, cert = Affine(1, -5).first_zero()
    assert (k, cert) == (5, True)
    assert Affine(1, 1).first_zero() == (None, True)


def test_eventually_constant():
    s = EventuallyConstant([1.0, 2.0], 7.0)
    assert s.k0 == 2
    assert list(s(np.arange(5))) == [1, 2, 7, 7, 7]
    assert s.limit == 7


def test_tabulated_continues_linearly():
    s = Tabulated([1.0, 3.0, 4.0], 2.0)
    assert s(2) == 4.0
    assert s(5) == pytest.approx(10.0)


def test_overrides_inject_values():
    s = Affine(1, 1).with_overrides({5: 0})
    assert s(5) == 0
    assert s(4) == 5
    assert s.first_zero()[0] == 5


def test_descriptor_round_trip():
    for seq in (PowerLaw(2.5), Affine(1, 1), EventuallyConstant([1, 2], 3), Exponential(0.5)):
        again = sequence_from_dict(seq.describe())
        ks = np.arange(20)
        assert np.allclose(again(ks), seq(ks))


def test_descriptor_errors_name_the_field():
    with pytest.raises(ValueError, match="missing field 'p'"):
        sequence_from_dict({"kind": "power"})
    with pytest.raises(ValueError, match="unknown sequence kind"):
        sequence_from_dict({"kind": "spline"})


def test_normalization_matches_zeta():
    w = normalize_weight(PowerLaw(2))
    assert w(0) == pytest.approx(6 / math.pi**2, rel=1e-13)
    w = normalize_weight(PowerLaw(5.5))
    assert w(0) == pytest.approx(1 / zeta(5.5), rel=1e-13)
    assert w(3) / w(0) == pytest.approx(4**-5.5)


def test_normalization_rejects_bad_weights():
    with pytest.raises(ValueError, match="k=3"):
        normalize_weight(EventuallyConstant([1, 1, 1, 0], 1))
    with pytest.raises(DivergenceError):
        normalize_weight(PowerLaw(1))


def test_shifted_weight():
    w = normalize_weight(PowerLaw(4))
    ws = w.shifted(-2)
    assert ws(0) == w(2)
    with pytest.raises(DomainError):
        w.shifted(2)(1)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.3, 8.0))
def test_power_series_bound_contains_zeta(p):
    s = sum_series(power_log(p), -p, tol=1e-12)
    assert s.converges
    assert abs(s.value - zeta(p)) <= s.tail_bound + 2e-15 * zeta(p)


def test_boundary_order_diverges():
    assert sum_series(power_log(1.0), -1.0).converges is False
    assert sum_series(power_log(0.5), -0.5).converges is False


def test_geometric_series():
    s = sum_series(lambda k: -0.5 * np.asarray(k, dtype=float), -math.inf)
    assert s.value == pytest.approx(1 / (1 - math.exp(-0.5)), rel=1e-12)


def test_empirical_order_fallback():
    s = sum_series(power_log(3.0), None)
    assert s.converges and not s.exact_order
    assert s.value == pytest.approx(zeta(3), rel=1e-9)


def test_nested_sum_closed_forms():
    # sum_j (1+j)^-4 (j+1) = zeta(3); strict inner count j gives zeta(3) - zeta(4)
    s = nested_sum(power_log(4), lambda k: np.zeros(np.shape(k)), -4, 0, horizon=1 << 16)
    assert abs(s.value - zeta(3)) <= s.tail_bound + 1e-15
    s = nested_sum(power_log(4), lambda k: np.zeros(np.shape(k)), -4, 0, strict=True, horizon=1 << 16)
    assert abs(s.value - (zeta(3) - zeta(4))) <= s.tail_bound + 1e-15


def test_nested_sum_divergence_verdict():
    assert nested_sum(power_log(1.5), power_log(0.2), -1.5, -0.2, horizon=1 << 12).converges is False
    assert nested_sum(power_log(3), power_log(2), -3, -2, horizon=1 << 12).converges is True


def test_family_constraint_is_strict():
    PowerLawFamily(4, 3, 5.5)
    for abc in [(3, 3, 6), (4, 3, 5), (5, 3, 6), (4, 3, 4.5)]:
        with pytest.raises(ValueError):
            PowerLawFamily(*abc)


@pytest.mark.parametrize("abc,N", [((4, 3, 5.5), 0), ((4, 3, 9), 1), ((4, 3, 10), 2), ((4, 3, 11), 2), ((3.5, 2.5, 12), 3)])
def test_predicted_N(abc, N):
    assert predicted_N(PowerLawFamily(*abc)) == N


def test_alpha_from():
    a = alpha_from(Affine(1, 1), PowerLaw(3))
    assert a(0) == pytest.approx(0.125)
    assert a(10**6) - (10**6 + 1) == pytest.approx(-3, abs=1e-5)
    with pytest.raises(SingularSymbolError):
        alpha_from(Affine(1, 1), PowerLaw(3, scale=2.0))
    with pytest.raises(SingularSymbolError):
        alpha_from(Affine(1, 1), EventuallyConstant([1, 1, 0], 1))


@pytest.mark.parametrize(
    "seq",
    [Affine(2.0, 1.0), PowerLaw(-1.0, 3.0), PowerLaw(-0.5), PowerLaw(2.0), Tabulated([1.0, 4.0, 2.0], 0.5)],
    ids=["affine", "linear-power", "sqrt", "decaying", "tabulated"],
)
def test_declared_difference_limit_matches_values(seq):
    ks = np.array([10**4, 10**5, 10**6])
    diffs = np.asarray(seq(ks + 1)) - np.asarray(seq(ks))
    assert np.allclose(diffs, seq.diff_limit, atol=1e-2)
