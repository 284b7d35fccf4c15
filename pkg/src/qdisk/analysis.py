"""Hypothesis checks, the spectral-triple battery, and spectral statistics of truncations."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse.linalg as sla

from .dirac import (
    CORRECTED,
    DiracData,
    ModeOperator,
    assemble,
    build_parametrix,
    apply_D,
    kernel_membership,
    kernel_vector,
    orthonormal_section,
)
from .gns import GnsVector, WeightedSpace, act, norm, rotate
from .sequences import SeriesSum, nested_sum, sum_series
from .toeplitz import ToeplitzElement, derive, identity, random_element, shift, shift_adjoint

__all__ = [
    "CONDITIONS",
    "ConditionReport",
    "Check",
    "Tolerances",
    "TripleReport",
    "KernelProbe",
    "check_condition",
    "check_all",
    "kernel_dimension",
    "commutator_norm",
    "singular_values",
    "kernel_probe",
    "random_vector",
    "verify_triple",
    "degenerate_kernel",
]

CONDITIONS = ("one", "three", "five", "six", "seven")
HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"


def _series_evidence(s: SeriesSum) -> dict:
    return {
        "partial": s.partial,
        "value": s.value if s.converges else None,
        "tail_bound": s.tail_bound if s.converges else None,
        "horizon": s.horizon,
        "order": s.order,
        "exact_order": s.exact_order,
    }


def _verdict(s: SeriesSum) -> str:
    if s.converges is None:
        return INCONCLUSIVE
    return HOLDS if s.converges else FAILS


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    verdict: str
    evidence: dict = field(default_factory=dict)
    N: int | None = None
    witness: dict | None = None

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return asdict(self)


def _order_sum(*terms):
    total = 0.0
    for coef, o in terms:
        if o is None:
            return None
        total += coef * o
    return None if math.isnan(total) else total


def _check_one(data: DiracData) -> ConditionReport:
    # |beta - alpha| = |beta| |1 - mu(k+1)/mu(k)|
    beta, mu, wp = data.beta, data.mu, data.w_prime

    def log_term(k):
        defect = np.abs(-np.expm1(mu.log_step(k)))
        with np.errstate(divide="ignore"):
            return 2 * (beta.log_abs(k) + np.log(defect)) + wp.log_abs(k)

    rd = mu.ratio_defect_order
    order = _order_sum((2, beta.order), (2, rd), (1, wp.order))
    s = sum_series(log_term, order, tol=1e-10)
    v = _verdict(s)
    witness = {"exponent": order} if v == FAILS else None
    return ConditionReport("one", v, _series_evidence(s), witness=witness)


def _check_three(data: DiracData, horizon: int = 10_000) -> ConditionReport:
    ev = {}
    if data.mu(0) != 1:
        return ConditionReport("three", FAILS, ev, witness={"sequence": "mu", "k": 0, "value": "mu(0) != 1"})
    certified = True
    for name, seq in (("beta", data.beta), ("mu", data.mu), ("alpha", data.alpha)):
        k, cert = seq.first_zero(horizon)
        if k is not None:
            return ConditionReport("three", FAILS, ev, witness={"sequence": name, "k": int(k)})
        if name != "alpha":
            # alpha = beta mu(k+1)/mu(k) vanishes exactly where beta does
            ev[f"{name}_certified"] = bool(cert)
            certified &= cert
    if data.beta.limit == 0:
        return ConditionReport("three", FAILS, ev, witness={"sequence": "beta", "limit": 0})
    ev["scan_horizon"] = horizon
    return ConditionReport("three", HOLDS if certified else INCONCLUSIVE, ev)


def _check_five(data: DiracData, grid: int = 200, n_max: int = 50) -> ConditionReport:
    beta = data.beta
    m = beta.monotone_modulus_from()
    if m == 0:
        return ConditionReport("five", HOLDS, {"const": 1.0, "argument": "|beta| nondecreasing"})
    if m is not None:
        # factors with both indices past m are <= 1; at most m factors remain
        head = np.abs(beta(np.arange(m + 1)))
        if np.all(head > 0):
            const = float((head.max() / head.min()) ** m)
            return ConditionReport("five", HOLDS, {"const": const, "argument": f"|beta| nondecreasing from {m}"})
    lb = np.real(beta.log_abs(np.arange(grid + n_max + 1)))
    cum = np.concatenate([[0.0], np.cumsum(lb)])
    sup = -np.inf
    for n in range(n_max + 1):
        with np.errstate(invalid="ignore"):
            lp = cum[n + 1 : grid + n + 1] - cum[:grid]
            # sup over k <= j of lp[k] - lp[j]
            run_max = np.maximum.accumulate(lp)
            gap = run_max - lp
        # a vanishing beta makes some ratios undefined; those are unbounded
        sup = math.inf if np.isnan(gap).any() else max(sup, float(np.max(gap)))
        if sup == math.inf:
            break
    return ConditionReport("five", INCONCLUSIVE, {"grid_sup": math.exp(sup), "grid": grid, "n_max": n_max})


def _check_six(data: DiracData) -> ConditionReport:
    mu, w, wp = data.mu, data.w, data.w_prime

    def lmu(k):
        return np.real(mu.log(k))

    def l_src(j):
        return 2 * lmu(j) - wp.log_abs(j)

    def l_dst(k):
        return -2 * lmu(k) + w.log_abs(k)

    def decay(k):
        return -2 * np.log1p(np.asarray(k, dtype=float))

    o_src = _order_sum((2, mu.order), (-1, wp.order))
    o_dst = _order_sum((-2, mu.order), (1, w.order))
    o_src_d = None if o_src is None else o_src - 2
    o_dst_d = None if o_dst is None else o_dst - 2
    upper = nested_sum(lambda j: l_src(j) + decay(j), l_dst, o_src_d, o_dst)
    lower = nested_sum(lambda k: l_dst(k) + decay(k), l_src, o_dst_d, o_src, strict=True)
    ev = {"j_ge_k": _series_evidence(upper), "j_lt_k": _series_evidence(lower)}
    verdicts = {_verdict(upper), _verdict(lower)}
    if FAILS in verdicts:
        bad = upper if _verdict(upper) == FAILS else lower
        part = "j_ge_k" if bad is upper else "j_lt_k"
        return ConditionReport("six", FAILS, ev, witness={"part": part, "order": bad.order})
    return ConditionReport("six", INCONCLUSIVE if INCONCLUSIVE in verdicts else HOLDS, ev)


def _check_seven(data: DiracData, n_max: int = 64) -> ConditionReport:
    mu, w = data.mu, data.w
    ev = {}
    for n in range(n_max + 1):
        def log_term(k, n=n):
            return 2 * n * np.log1p(np.asarray(k, dtype=float)) - 2 * np.real(mu.log(k)) + w.log_abs(k)

        order = _order_sum((-2, mu.order), (1, w.order))
        s = sum_series(log_term, None if order is None else order + 2 * n, tol=1e-10)
        ev[str(n)] = _series_evidence(s)
        if s.converges is None:
            return ConditionReport("seven", INCONCLUSIVE, ev)
        if not s.converges:
            return ConditionReport("seven", HOLDS, ev, N=n)
    return ConditionReport("seven", INCONCLUSIVE, ev)


def check_condition(cid: str, data: DiracData) -> ConditionReport:
    """Check one hypothesis of the parametrix construction.

    ``one``: sum |beta - alpha|**2 w' < inf.  ``three``: alpha, beta, mu never
    vanish and mu(0) = 1.  ``five``: bounded ratios of beta-products.  ``six``:
    the double sum with 1/(max(j,k)+1)**2.  ``seven``: the moment sums, whose
    first divergent index is reported as N.
    """
    fn = {"one": _check_one, "three": _check_three, "five": _check_five, "six": _check_six, "seven": _check_seven}
    if cid not in fn:
        raise ValueError(f"unknown condition {cid!r}; expected one of {CONDITIONS}")
    return fn[cid](data)


def check_all(data: DiracData) -> list[ConditionReport]:
    return [check_condition(c, data) for c in CONDITIONS]


def kernel_dimension(data: DiracData, n_max: int = 64) -> int:
    """Number of modes ``n >= 0`` with ``h_n`` in ``l2_w``; negative modes have trivial kernel."""
    count = 0
    for n in range(n_max + 1):
        m = kernel_membership(data, n)
        if m.in_space is None:
            raise ValueError(f"membership of mode {n} is undecided")
        if not m.in_space:
            return count
        count += 1
    raise ValueError(f"kernel vectors stay square-summable up to mode {n_max}")


# ---------------------------------------------------------------------------
# spectral statistics


def _spectral_norm(M) -> float:
    if M.nnz == 0:
        return 0.0
    if min(M.shape) <= 1500:
        return float(np.linalg.norm(M.toarray(), 2))
    v0 = np.ones(min(M.shape)) / math.sqrt(min(M.shape))
    s = sla.svds(M, k=1, v0=v0, tol=1e-12, return_singular_vectors=False, solver="arpack")
    return float(s[0])


def commutator_norm(data: DiracData, a: ToeplitzElement, K: int, modes: tuple[int, int] | None = None) -> float:
    """Largest singular value of the truncated ``[D, pi(a)]`` on its interior window.

    Rows and columns within ``max(4, K/50)`` of the cut (and a margin of the
    element's reach) are excluded, as are modes near the window boundary;
    what remains is computed without truncation error.
    """
    r = max(a.max_mode, 1)
    if modes is None:
        modes = (-(2 * r + 2), 2 * r + 2)
    lo, hi = modes
    A = assemble(data, K, modes)
    C = A.commutator(a)
    edge = max(4, K // 50, 2 * r + 2)
    ks = np.tile(np.arange(K), hi - lo + 1)
    ms = np.repeat(np.arange(lo, hi + 1), K)
    keep_w = (ks < K - edge) & (ms >= lo + r + 1) & (ms <= hi - r - 1)
    keep = np.flatnonzero(np.concatenate([keep_w, keep_w]))
    if keep.size == 0:
        raise ValueError("mode window too small for the interior of this element")
    return _spectral_norm(C[keep][:, keep].tocsr())


def singular_values(data: DiracData, n: int, K: int) -> np.ndarray:
    """Singular values (descending) of the orthonormalized ``K x K`` section of ``D_n``."""
    if K < 8:
        raise ValueError("truncation K must be at least 8")
    return np.linalg.svd(orthonormal_section(data, n, K), compute_uv=False)


@dataclass(frozen=True)
class KernelProbe:
    """Null direction of the row-exact ``K x (K+1)`` section of ``D_n``.

    ``cosine_truncated`` compares it with ``h_n`` cut at ``K``;
    ``cosine_reference`` with ``h_n`` normalized at ``reference`` indices, which
    stays near 1 only when ``h_n`` is square-summable.
    """

    n: int
    K: int
    smallest_nonzero: float
    cosine_truncated: float
    cosine_reference: float


def kernel_probe(data: DiracData, n: int, K: int, reference: int | None = None) -> KernelProbe:
    if n < 0:
        raise ValueError("kernel probes apply to modes n >= 0")
    reference = reference or 16 * K
    op = ModeOperator(data, n)
    ks = np.arange(K + 1)
    so = np.sqrt(op.codomain_weight(ks[:K]))
    si = np.sqrt(op.domain_weight(ks))
    M = so[:, None] * op.apply(np.eye(K + 1))[:K] / si[None, :]
    _, s, vh = np.linalg.svd(M)
    v = np.conj(vh[-1])
    h = kernel_vector(data, n)
    ht = h.values(K + 1) * si
    href = h.values(reference) * np.sqrt(op.domain_weight(np.arange(reference)))
    cos_t = abs(np.vdot(ht / np.linalg.norm(ht), v))
    cos_r = abs(np.vdot(href[: K + 1] / np.linalg.norm(href), v))
    return KernelProbe(n, K, float(s[-1]), float(cos_t), float(cos_r))


# ---------------------------------------------------------------------------
# the battery


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-10
    covariance: float = 1e-12
    parametrix: float = 1e-10
    adjoint: float = 1e-12
    hermitian: float = 1e-12
    stabilization: float = 1e-6
    hs_decay: float = 0.25

    def scaled(self, tol: float) -> "Tolerances":
        """Every numeric tolerance replaced by ``tol`` (the decay ratio is kept)."""
        return Tolerances(tol, tol, tol, tol, tol, tol, self.hs_decay)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    witness: dict | None = None


def _check(name, value, tol, witness=None, passed=None) -> Check:
    ok = bool(value <= tol) if passed is None else bool(passed)
    return Check(name, float(value), float(tol), ok, None if ok else witness)


@dataclass
class TripleReport:
    checks: list[Check] = field(default_factory=list)
    conditions: list[ConditionReport] = field(default_factory=list)
    kernel_dimension: int | None = None
    hs_norms: list[dict] = field(default_factory=list)
    commutators: list[dict] = field(default_factory=list)
    sigma_min: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.passed), None)

    def to_dict(self) -> dict:
        return {
            "verdict": "pass" if self.passed else "fail",
            "checks": [asdict(c) for c in self.checks],
            "conditions": [c.to_dict() for c in self.conditions],
            "kernel_dimension": self.kernel_dimension,
            "hs_norms": self.hs_norms,
            "commutators": self.commutators,
            "sigma_min": self.sigma_min,
        }


def random_vector(rng: np.random.Generator, space: WeightedSpace | None, max_mode: int = 3, length: int = 8) -> GnsVector:
    """Complex random vector with modes ``-max_mode..max_mode``, ``length`` coefficients each."""
    return GnsVector(
        {n: rng.normal(size=length) + 1j * rng.normal(size=length) for n in range(-max_mode, max_mode + 1)}, space
    )


def _rel(num: float, den: float) -> float:
    return num / den if den > 0 else num


def _identity_residuals(data: DiracData, rng, pairs: int) -> float:
    worst = 0.0
    Hw, Hwp = data.H_w, data.H_w_prime
    for _ in range(pairs):
        a = random_element(rng, max_mode=3, prefix=5)
        f = random_vector(rng, Hw)
        lhs = apply_D(data, act(a, f)) - act(a, apply_D(data, f))
        rhs = act(derive(a, data.beta), f).in_space(Hwp)
        scale = norm(apply_D(data, act(a, f))) + norm(act(a, apply_D(data, f))) + norm(rhs)
        worst = max(worst, _rel(norm(lhs - rhs), scale))
    return worst


def _covariance_residuals(data: DiracData, rng, thetas=(math.pi / 7, 1.0, 2 * math.pi / 3)) -> float:
    worst = 0.0
    for theta in thetas:
        f = random_vector(rng, data.H_w)
        lhs = rotate(apply_D(data, rotate(f, -theta)), theta)
        rhs = apply_D(data, f) * complex(math.cos(theta), math.sin(theta))
        worst = max(worst, _rel(norm(lhs - rhs), norm(rhs)))
    return worst


def _weighted_norm(v, wts) -> float:
    return float(np.sqrt(np.sum(wts[: len(v)] * np.abs(v) ** 2)))


def parametrix_residuals(data: DiracData, n: int, N: int, rng, trials: int = 5, length: int = 24):
    """Worst weighted relative residuals of ``D Q = I`` and ``Q D = I - C`` on random vectors, and rank(C)."""
    op = ModeOperator(data, n)
    q = build_parametrix(data, n, N)
    size = length + 4
    win = op.domain_weight(np.arange(size + 2))
    wout = op.codomain_weight(np.arange(size + 2))
    dq = qd = 0.0
    for _ in range(trials):
        g = rng.normal(size=length)
        r = op.apply(q.apply(g, size))[:length] - g
        dq = max(dq, _rel(_weighted_norm(r, wout), _weighted_norm(g, wout)))
        f = rng.normal(size=length)
        fp = np.zeros(size)
        fp[:length] = f
        r = q.apply(op.apply(f), size)[:size] - (fp - q.defect(f, size))
        qd = max(qd, _rel(_weighted_norm(r, win), _weighted_norm(fp, win)))
    rank = int(np.linalg.matrix_rank(q.defect(np.eye(length), length)))
    return dq, qd, rank, q.regime


def _adjoint_residual(data: DiracData, n: int, rng, trials: int = 5, length: int = 16) -> float:
    op = ModeOperator(data, n)
    worst = 0.0
    for _ in range(trials):
        f = rng.normal(size=length) + 1j * rng.normal(size=length)
        g = rng.normal(size=length + 1) + 1j * rng.normal(size=length + 1)
        df = op.apply(f)
        m = min(len(df), len(g))
        lhs = np.sum(op.codomain_weight(np.arange(m)) * np.conj(df[:m]) * g[:m])
        dg = op.adjoint_apply(g)
        m2 = min(len(dg), length)
        rhs = np.sum(op.domain_weight(np.arange(m2)) * np.conj(f[:m2]) * dg[:m2])
        scale = _weighted_norm(df, op.codomain_weight(np.arange(len(df)))) * _weighted_norm(
            g, op.codomain_weight(np.arange(len(g)))
        )
        worst = max(worst, _rel(abs(lhs - rhs), scale))
    return worst


def verify_triple(
    data: DiracData,
    K: int = 200,
    modes: tuple[int, int] = (-20, 20),
    tol: Tolerances | None = None,
    seed: int = 0,
    pairs: int = 20,
    hs_horizon: int = 1 << 18,
) -> TripleReport:
    """Run the spectral-triple battery; deterministic for a fixed seed."""
    tol = tol or Tolerances()
    rng = np.random.default_rng(seed)
    rep = TripleReport()
    lo, hi = modes

    rep.conditions = check_all(data)
    bad = [c for c in rep.conditions if not c.holds]
    rep.checks.append(
        _check(
            "conditions",
            len(bad),
            0,
            witness={c.condition: {"verdict": c.verdict, "witness": c.witness} for c in bad},
        )
    )
    seven = rep.conditions[-1]
    N = seven.N
    # a vanishing symbol leaves the parametrix kernels undefined
    if N is None or rep.conditions[1].verdict == FAILS:
        return rep
    rep.kernel_dimension = kernel_dimension(data)
    rep.checks.append(
        _check("kernel_dimension", abs(rep.kernel_dimension - N), 0, witness={"kernel": rep.kernel_dimension, "N": N})
    )

    rep.checks.append(_check("implementation_identity", _identity_residuals(data, rng, pairs), tol.identity))
    rep.checks.append(_check("covariance", _covariance_residuals(data, rng), tol.covariance))

    worst_dq = worst_qd = worst_adj = 0.0
    rank_bad = None
    for n in range(lo, hi + 1):
        dq, qd, rank, regime = parametrix_residuals(data, n, N, rng)
        if dq > worst_dq:
            worst_dq, wdq = dq, n
        if qd > worst_qd:
            worst_qd, wqd = qd, n
        expected = 1 if regime == CORRECTED else 0
        if rank != expected and rank_bad is None:
            rank_bad = {"mode": n, "rank": rank, "expected": expected}
        a = _adjoint_residual(data, n, rng)
        if a > worst_adj:
            worst_adj, wadj = a, n
    rep.checks.append(_check("parametrix_DQ", worst_dq, tol.parametrix, witness={"mode": wdq} if worst_dq else None))
    rep.checks.append(_check("parametrix_QD", worst_qd, tol.parametrix, witness={"mode": wqd} if worst_qd else None))
    rep.checks.append(_check("defect_rank", 0 if rank_bad is None else 1, 0, witness=rank_bad))
    rep.checks.append(_check("adjoint_contract", worst_adj, tol.adjoint, witness={"mode": wadj} if worst_adj else None))

    asm = assemble(data, K, modes)
    rep.checks.append(_check("hermitian", asm.hermitian_residual(), tol.hermitian))
    rep.checks.append(_check("grading_anticommutes", asm.grading_residual(), 0.0))
    probe = random_element(rng, max_mode=2, prefix=4)
    g_res = max(asm.grading_commutator(x) for x in (shift(), shift_adjoint(), probe))
    rep.checks.append(_check("grading_commutes", g_res, 0.0))

    for name, a in (("U", shift()), ("U*", shift_adjoint()), ("I", identity())):
        norms = {Kc: commutator_norm(data, a, Kc) for Kc in (max(16, K // 2), K)}
        (k1, v1), (k2, v2) = norms.items()
        rep.commutators.append({"generator": name, "K": [k1, k2], "norm": [v1, v2]})
        rep.checks.append(
            _check(f"commutator_{name}", abs(v2 - v1), tol.stabilization, witness={"K": [k1, k2], "norm": [v1, v2]})
        )

    head, tail = [], []
    M = max(abs(lo), abs(hi))
    finite = True
    for n in range(lo, hi + 1):
        q = build_parametrix(data, n, N)
        h = q.hs_norm(hs_horizon)
        rep.hs_norms.append({"n": n, "norm": h.norm, "bound": h.bound})
        finite &= h.finite
        if abs(n) <= 5:
            head.append(h.norm)
        if M >= 9 and abs(n) >= (2 * M) // 3:
            tail.append(h.norm)
    rep.checks.append(_check("hs_finite", 0 if finite else 1, 0))
    if head and tail:
        ratio = max(tail) / max(head)
        rep.checks.append(_check("hs_decay", ratio, tol.hs_decay, witness={"ratio": ratio}))

    eps = 1e-9
    for n in range(max(lo, -10), min(hi, 10) + 1):
        q = build_parametrix(data, n, N)
        if q.regime == CORRECTED:
            continue
        smin = float(singular_values(data, n, min(K, 200))[-1])
        hs = next(e["norm"] for e in rep.hs_norms if e["n"] == n)
        rep.sigma_min.append({"n": n, "sigma_min": smin, "inverse_hs": 1 / hs})
        if smin < 1 / hs - eps:
            rep.checks.append(_check("sigma_min_vs_hs", 1, 0, witness={"mode": n, "sigma_min": smin}))
            break
    else:
        rep.checks.append(_check("sigma_min_vs_hs", 0, 0))
    return rep


def degenerate_kernel(data: DiracData, K: int, modes: tuple[int, int], rel_tol: float = 1e-12) -> dict[int, int]:
    """Per mode, the dimension of the numerical null space of the exact section.

    Meant for ``beta`` (hence ``alpha``) with zeros: each zero decouples the
    bidiagonal recursion and produces finitely supported kernel vectors.
    Sections are exact restrictions (``K x K`` for ``n >= 0``, ``(K+1) x K``
    for ``n < 0``), so a null vector is a genuine kernel vector supported in
    the first ``K`` labels.  The count is a demonstration, not a certificate
    of infinite dimension.
    """
    out = {}
    for n in range(modes[0], modes[1] + 1):
        op = ModeOperator(data, n)
        M = op.apply(np.eye(K))
        M = M[:K] if n >= 0 else M[: K + 1]
        s = np.linalg.svd(M, compute_uv=False)
        scale = max(float(np.max(np.abs(M))), 1e-300)
        out[n] = int(K - np.sum(s > rel_tol * scale))
    return out
