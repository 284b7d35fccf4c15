"""Acceptance gate: one test per criterion, each recording a pass/fail line.

The lines are printed in the terminal summary under "acceptance criteria".
Tolerances are the stated ones; nothing here is relaxed to make a criterion pass.
"""

import cmath
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from qdisk.analysis import check_all, check_condition, commutator_norm, kernel_dimension, random_vector, singular_values
from qdisk.cli import main
from qdisk.dirac import CORRECTED, DiracData, ModeOperator, apply_D, assemble, build_parametrix
from qdisk.gns import act, norm, rotate
from qdisk.sequences import Affine, Exponential, PowerLaw, PowerLawFamily, normalize_weight
from qdisk.toeplitz import derive, identity, monomial, random_element, shift, shift_adjoint


def _record(num: int, title: str, ok: bool, detail: str):
    ACCEPTANCE_LINES.append(f"criterion {num}: {'PASS' if ok else 'FAIL'} {title} ({detail})")
    assert ok, detail


def _wnorm(v, wts):
    return np.sqrt(np.sum(wts[:, None] * np.abs(v) ** 2, axis=0))


def test_criterion_1_kernel_count_law():
    grid = [
        (3.5, 3, 5.5),
        (4, 3, 9),  # boundary: (c - 2b - 1)/2 = 1
        (4, 3, 10),
        (4, 3, 11),  # boundary
        (4, 3, 11.5),
        (3.2, 2.5, 4.5),
        (3.5, 2.5, 8),  # boundary
        (3.5, 2.5, 8.5),
        (5, 3.5, 6.5),
        (5, 3.5, 12),  # boundary
        (5.5, 4, 13.5),
        (6, 4, 20),
    ]
    t0 = time.perf_counter()
    bad = []
    for a, b, c in grid:
        expected = max(0, math.ceil((c - 2 * b - 1) / 2))
        got = kernel_dimension(DiracData.from_family(PowerLawFamily(a, b, c)))
        if got != expected:
            bad.append(((a, b, c), got, expected))
    dt = time.perf_counter() - t0
    _record(1, "kernel-count law", not bad and dt < 30, f"{len(grid)} families, {len(bad)} mismatches, {dt:.2f} s")


def test_criterion_2_parametrix_identities():
    rng = np.random.default_rng(2)
    L, size = 24, 28
    worst_dq = worst_qd = 0.0
    rank_bad = []
    regimes = set()
    for c in (5.5, 9):
        data = DiracData.from_family(PowerLawFamily(4, 3, c))
        N = check_condition("seven", data).N
        for n in range(-15, 16):
            op = ModeOperator(data, n)
            q = build_parametrix(data, n, N)
            regimes.add(q.regime)
            ks = np.arange(size)
            win, wout = op.domain_weight(ks), op.codomain_weight(ks)
            G = rng.normal(size=(L, 100))
            R = op.apply(q.apply(G, size))[:L] - G
            worst_dq = max(worst_dq, float(np.max(_wnorm(R, wout[:L]) / _wnorm(G, wout[:L]))))
            F = np.zeros((size, 100))
            F[:L] = rng.normal(size=(L, 100))
            R = q.apply(op.apply(F[:L]), size)[:size] - (F - q.defect(F[:L], size))
            worst_qd = max(worst_qd, float(np.max(_wnorm(R, win) / _wnorm(F, win))))
            rank = int(np.linalg.matrix_rank(q.defect(np.eye(L), L)))
            if rank > 1 or (n >= N and rank != 0) or (q.regime == CORRECTED and rank != 1):
                rank_bad.append((c, n, rank))
    ok = worst_dq <= 1e-10 and worst_qd <= 1e-10 and not rank_bad and len(regimes) == 3
    _record(2, "parametrix identities", ok, f"DQ {worst_dq:.1e}, QD {worst_qd:.1e}, rank violations {len(rank_bad)}")


def test_criterion_3_implementation_identity(data55):
    rng = np.random.default_rng(3)
    beta = data55.beta
    worst = 0.0
    for _ in range(100):
        a = random_element(rng, max_mode=3, prefix=5)
        f = random_vector(rng, data55.H_w)
        lhs = apply_D(data55, act(a, f)) - act(a, apply_D(data55, f))
        rhs = act(derive(a, beta), f).in_space(data55.H_w_prime)
        worst = max(worst, norm(lhs - rhs) / max(norm(rhs), norm(apply_D(data55, act(a, f)))))
    exact = derive(shift(), beta).equals(monomial(2, 1.0)) and derive(shift_adjoint(), beta).equals(-1 * identity())
    _record(3, "implementation identity", worst <= 1e-10 and exact, f"worst relative {worst:.1e}, generators exact {exact}")


def test_criterion_4_covariance(data55):
    rng = np.random.default_rng(4)
    worst = 0.0
    for theta in (1.0, math.sqrt(2), math.pi / math.e):
        for _ in range(10):
            f = random_vector(rng, data55.H_w)
            lhs = rotate(apply_D(data55, rotate(f, -theta)), theta)
            rhs = apply_D(data55, f) * cmath.exp(1j * theta)
            worst = max(worst, norm(lhs - rhs) / norm(rhs))
    _record(4, "covariance", worst <= 1e-12, f"worst relative {worst:.1e}")


def test_criterion_5_hs_decay(data55):
    norms, certified = {}, True
    for n in range(-30, 31):
        h = build_parametrix(data55, n, 0).hs_norm(1 << 18)
        certified &= h.finite and h.bound < 1e-2 * h.norm
        norms[n] = h.norm
    head = max(v for n, v in norms.items() if abs(n) <= 5)
    tail = max(v for n, v in norms.items() if abs(n) >= 20)
    ratio = tail / head
    _record(5, "HS decay", certified and ratio < 0.25, f"all certified {certified}, tail/head {ratio:.3f}")


def test_criterion_6_hypothesis_checkers(data55):
    fam = PowerLawFamily(4, 3, 5.5)
    preset_ok = all(r.verdict == "holds" for r in check_all(data55))

    zero = DiracData(Affine(1.0, 1.0).with_overrides({5: 0.0}), fam.mu, fam.w, fam.w_prime)
    r3 = check_condition("three", zero)
    beta_ok = r3.verdict == "fails" and r3.witness == {"sequence": "beta", "k": 5}

    flat = DiracData(fam.beta, Exponential(0.1), fam.w, normalize_weight(PowerLaw(2.5)))
    r1 = check_condition("one", flat)
    one_ok = r1.verdict == "fails" and r1.witness is not None

    gap = DiracData(fam.beta, fam.mu, normalize_weight(PowerLaw(5)), normalize_weight(PowerLaw(4)))
    r6 = check_condition("six", gap)
    gap_ok = r6.verdict == "fails" and r6.witness is not None
    try:
        PowerLawFamily(4, 3, 5)
        family_guard = False
    except ValueError:
        family_guard = True

    ok = preset_ok and beta_ok and one_ok and gap_ok and family_guard
    _record(
        6,
        "hypothesis checkers",
        ok,
        f"preset holds {preset_ok}, beta zero {beta_ok}, |beta-alpha|^2 w' {one_ok}, c <= 2b-1 {gap_ok and family_guard}",
    )


def test_criterion_7_spectral_stability(data55):
    s1 = singular_values(data55, 0, 200)[::-1][:20]
    s2 = singular_values(data55, 0, 400)[::-1][:20]
    sig = float(np.max(np.abs(s1 - s2) / s2))
    comm = {}
    for name, a in (("U", shift()), ("U*", shift_adjoint())):
        v1, v2 = commutator_norm(data55, a, 100), commutator_norm(data55, a, 400)
        comm[name] = (v1, v2, abs(v2 - v1) / v2)
    ok = sig <= 1e-3 and all(d <= 1e-6 for *_, d in comm.values())
    parts = ", ".join(f"[D,pi({k})] {v1:.3g} -> {v2:.3g}" for k, (v1, v2, _) in comm.items())
    _record(7, "spectral stability", ok, f"sigma rel diff {sig:.1e}, {parts}")


def test_criterion_8_grading(data55):
    rng = np.random.default_rng(8)
    asm = assemble(data55, 60, (-6, 6))
    anti = asm.grading_residual()
    elems = [shift(), shift_adjoint(), identity()] + [random_element(rng, max_mode=2, prefix=4) for _ in range(5)]
    comm = max(asm.grading_commutator(a) for a in elems)
    _record(8, "grading", anti == 0.0 and comm == 0.0, f"anticommutator {anti}, commutator {comm}")


def test_criterion_9_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["verify", "--seed", "11", "--out", str(a)])
    main(["verify", "--seed", "11", "--out", str(b)])
    capsys.readouterr()
    same = (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    _record(9, "determinism", same, "byte-identical report.json" if same else "reports differ")
