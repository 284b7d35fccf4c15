import math

import numpy as np
import pytest

from qdisk.analysis import (
    CONDITIONS,
    Tolerances,
    check_all,
    check_condition,
    commutator_norm,
    degenerate_kernel,
    kernel_dimension,
    kernel_probe,
    singular_values,
    verify_triple,
)
from qdisk.dirac import DiracData
from qdisk.sequences import Affine, Exponential, PowerLaw, PowerLawFamily, SingularSymbolError, normalize_weight, predicted_N
from qdisk.toeplitz import identity, shift, shift_adjoint


def _custom(beta=None, mu=None, w=None, wp=None):
    fam = PowerLawFamily(4, 3, 5.5)
    return DiracData(beta or fam.beta, mu or fam.mu, w or fam.w, wp or fam.w_prime)


def test_preset_conditions_hold(data55):
    reports = check_all(data55)
    assert [r.condition for r in reports] == list(CONDITIONS)
    assert all(r.verdict == "holds" for r in reports), [(r.condition, r.verdict) for r in reports]
    assert reports[-1].N == 0


@pytest.mark.parametrize("c,N", [(5.5, 0), (9, 1), (10, 2), (11, 2), (11.5, 3)])
def test_condition_seven_reports_N(c, N):
    data = DiracData.from_family(PowerLawFamily(4, 3, c))
    assert check_condition("seven", data).N == N
    assert kernel_dimension(data) == N


def test_unknown_condition(data55):
    with pytest.raises(ValueError, match="unknown condition"):
        check_condition("two", data55)


def test_beta_zero_detected():
    data = _custom(beta=Affine(1.0, 1.0).with_overrides({5: 0.0}))
    r = check_condition("three", data)
    assert r.verdict == "fails"
    assert r.witness == {"sequence": "beta", "k": 5}


def test_mu_normalization_rejected():
    with pytest.raises(SingularSymbolError, match="mu"):
        _custom(mu=PowerLaw(3, scale=2.0))


def test_nonsummable_defect_detected():
    # |1 - mu(k+1)/mu(k)| is constant, so the summand has order 2 - 2.5
    data = _custom(mu=Exponential(0.1), wp=normalize_weight(PowerLaw(2.5)))
    r = check_condition("one", data)
    assert r.verdict == "fails"
    assert r.witness["exponent"] == pytest.approx(-0.5)


def test_weight_gap_detected():
    # w' ~ k^-4 and w ~ k^-5 with mu ~ k^-3: c = 2b - 1 sits on the boundary
    data = _custom(w=normalize_weight(PowerLaw(5)), wp=normalize_weight(PowerLaw(4)))
    r = check_condition("six", data)
    assert r.verdict == "fails"
    assert r.witness["part"] in ("j_ge_k", "j_lt_k")
    assert r.witness["order"] >= -1


def test_condition_six_boundary_from_family_rejected():
    with pytest.raises(ValueError, match="2b-1"):
        PowerLawFamily(4, 3, 5)


def test_condition_five_monotone(data55):
    r = check_condition("five", data55)
    assert r.verdict == "holds" and r.evidence["const"] == 1.0


def test_kernel_count_grid():
    fams = [(a, b, c) for b in (2.5, 3.0, 3.5) for a in (3.2, 2 * b - 1.5) for c in (2 * b - 0.5, 2 * b + 2, 2 * b + 5)]
    for a, b, c in fams:
        fam = PowerLawFamily(a, b, c)
        assert kernel_dimension(DiracData.from_family(fam)) == predicted_N(fam), (a, b, c)


def test_commutator_of_identity_vanishes(data55):
    assert commutator_norm(data55, identity(), 60) == 0.0


def test_commutator_grows_with_truncation(data55):
    # the off-diagonal block carries the inclusion H_w -> H_w', which is
    # unbounded when w'/w grows; the truncated norms grow like K^((c-a)/2)
    n1 = commutator_norm(data55, shift(), 100)
    n2 = commutator_norm(data55, shift(), 200)
    slope = math.log(n2 / n1) / math.log(2)
    assert 0.6 < slope < 0.9


def test_commutator_bounded_for_equal_weights():
    fam = PowerLawFamily(4, 3, 5.5)
    data = DiracData(fam.beta, PowerLaw(0), fam.w, fam.w)
    vals = [commutator_norm(data, a, K) for a in (shift(), shift_adjoint()) for K in (60, 120)]
    assert np.allclose(vals, 1.0, atol=1e-6)


def test_singular_values_descending(data55):
    s = singular_values(data55, 0, 40)
    assert np.all(s > 0)
    assert np.all(np.diff(s) <= 0)
    with pytest.raises(ValueError):
        singular_values(data55, 0, 4)


def test_singular_values_stable_for_steep_weight(data9):
    s1 = singular_values(data9, 0, 200)[::-1][:20]
    s2 = singular_values(data9, 0, 400)[::-1][:20]
    assert np.max(np.abs(s1 - s2) / s2) < 1e-3


def test_kernel_probe_finds_square_summable_kernel(data9, data55):
    p = kernel_probe(data9, 0, 100)
    assert p.cosine_truncated == pytest.approx(1.0, abs=1e-10)
    assert p.cosine_reference > 0.999
    assert p.smallest_nonzero > 0
    q = kernel_probe(data55, 0, 100)
    # the null direction still tracks h, which is not normalizable
    assert q.cosine_truncated == pytest.approx(1.0, abs=1e-10)
    assert q.cosine_reference < 0.9
    with pytest.raises(ValueError):
        kernel_probe(data9, -1, 50)


def test_degenerate_kernel_counts(data55):
    fam = PowerLawFamily(4, 3, 5.5)
    beta = Affine(1.0, 1.0).with_overrides({k: 0.0 for k in range(4, 400, 5)})
    data = DiracData(beta, fam.mu, fam.w, fam.w_prime)
    counts = degenerate_kernel(data, 60, (-2, 2))
    assert all(v >= 10 for v in counts.values())
    assert set(degenerate_kernel(data55, 60, (-2, 2)).values()) == {0}


@pytest.fixture(scope="module")
def quick_report(data9):
    return verify_triple(data9, K=60, modes=(-4, 4), pairs=4, hs_horizon=1 << 14)


def test_verify_battery(quick_report):
    by_name = {c.name: c for c in quick_report.checks}
    for name in (
        "conditions",
        "kernel_dimension",
        "implementation_identity",
        "covariance",
        "parametrix_DQ",
        "parametrix_QD",
        "defect_rank",
        "adjoint_contract",
        "hermitian",
        "grading_anticommutes",
        "grading_commutes",
        "commutator_I",
        "hs_finite",
        "sigma_min_vs_hs",
    ):
        assert by_name[name].passed, by_name[name]
    assert quick_report.kernel_dimension == 1
    assert not by_name["commutator_U"].passed
    assert quick_report.first_failure.name == "commutator_U"
    d = quick_report.to_dict()
    assert d["verdict"] == "fail"


def test_zero_tolerance_fails(data9):
    rep = verify_triple(data9, K=40, modes=(-2, 2), tol=Tolerances().scaled(0.0), pairs=2, hs_horizon=1 << 12)
    assert not rep.passed


def test_verify_stops_when_N_unknown():
    data = _custom(beta=Affine(1.0, 1.0).with_overrides({5: 0.0}))
    rep = verify_triple(data, K=40, modes=(-2, 2), pairs=2, hs_horizon=1 << 12)
    assert not rep.passed
    assert rep.first_failure.name == "conditions"
    assert "three" in rep.first_failure.witness
