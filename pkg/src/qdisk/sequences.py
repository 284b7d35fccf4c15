"""Scalar sequences on the nonnegative integers and certified series sums.

Every coefficient of the operators in this package (the derivation symbol
``beta``, the ratio sequence ``mu``, the weights ``w`` and ``w'``) is a map
from ``k = 0, 1, 2, ...`` into the complex numbers.  Sequences are evaluated
lazily from closed forms and carry asymptotic metadata:

``order``
    exponent ``p`` with ``|s(k)|`` comparable to ``(1+k)**p`` for large ``k``
    (``-inf``/``+inf`` for faster-than-any-power decay/growth, ``None`` when
    unknown).
``limit`` / ``diff_limit``
    declared limits of ``s(k)`` and of ``s(k+1) - s(k)``.

Series of positive terms are summed with :func:`sum_series` and
:func:`nested_sum`, which return a partial sum together with a tail bound
obtained from integral comparison against the declared order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "DomainError",
    "SingularSymbolError",
    "DivergenceError",
    "Sequence",
    "PowerLaw",
    "Affine",
    "EventuallyConstant",
    "Tabulated",
    "Exponential",
    "FunctionSequence",
    "WeightSequence",
    "PowerLawFamily",
    "SeriesSum",
    "evaluate",
    "alpha_from",
    "normalize_weight",
    "predicted_N",
    "sum_series",
    "nested_sum",
    "estimate_order",
    "sequence_from_dict",
]


class DomainError(ValueError):
    """A sequence was evaluated at a negative index."""


class SingularSymbolError(ValueError):
    """A sequence that must be nonvanishing has a zero."""


class DivergenceError(ValueError):
    """A series that must converge does not."""


def _as_index(k):
    arr = np.asarray(k)
    scalar = arr.ndim == 0
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind == "f" and np.all(arr == np.round(arr)):
            arr = arr.astype(np.int64)
        else:
            raise DomainError(f"index must be an integer, got {k!r}")
    if np.any(arr < 0):
        raise DomainError(f"negative index {int(np.min(arr))}")
    return np.atleast_1d(arr).astype(np.int64), scalar


def _encode(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _decode(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return v


class Sequence:
    """A lazily evaluated map from ``Z>=0`` to the complex numbers.

    Subclasses implement ``_eval`` on int64 arrays.  Calling the sequence
    accepts a scalar or an array of nonnegative integers.
    """

    order: float | None = None
    limit: complex | None = None
    diff_limit: complex | None = None
    real: bool = True

    def __call__(self, k):
        idx, scalar = _as_index(k)
        out = np.asarray(self._eval(idx))
        if out.shape != idx.shape:
            out = np.broadcast_to(out, idx.shape).copy()
        return out[0].item() if scalar else out

    def _eval(self, k: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # log-space evaluation, needed once products of many terms are formed

    def log_abs(self, k) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(np.atleast_1d(self(k))))

    def log(self, k) -> np.ndarray:
        """Complex logarithm ``log|s(k)| + i arg s(k)``."""
        vals = np.atleast_1d(self(k))
        with np.errstate(divide="ignore"):
            out = np.log(np.abs(vals)).astype(complex)
        if not self.real or np.any(np.real(vals) < 0):
            out = out + 1j * np.angle(vals)
        return out

    def log_step(self, k) -> np.ndarray:
        """``log s(k+1) - log s(k)`` (complex)."""
        k = np.atleast_1d(np.asarray(k))
        return self.log(k + 1) - self.log(k)

    # asymptotic metadata used by the condition checkers

    @property
    def ratio_defect_order(self) -> float | None:
        """Order of ``|1 - s(k+1)/s(k)|``; ``None`` when not known."""
        return None

    def monotone_modulus_from(self) -> int | None:
        """Index from which ``|s(k)|`` is nondecreasing, if the kind guarantees it."""
        return None

    def first_zero(self, horizon: int = 10_000) -> tuple[int | None, bool]:
        """First index with ``s(k) == 0`` and whether the answer is certified.

        Kinds with a closed form certify the answer for all ``k``; the
        generic fallback scans ``[0, horizon)`` only.
        """
        vals = self(np.arange(horizon))
        hits = np.flatnonzero(vals == 0)
        return (int(hits[0]) if hits.size else None), False

    def describe(self) -> dict:
        raise TypeError(f"{type(self).__name__} has no serialized form")

    def with_overrides(self, values: dict[int, complex]) -> "Sequence":
        """Copy of this sequence with finitely many values replaced."""
        return _Overridden(self, {int(k): v for k, v in values.items()})


@dataclass(frozen=True, eq=False)
class PowerLaw(Sequence):
    """``k -> scale * (1+k)**(-p)``."""

    p: float
    scale: complex = 1.0

    def __post_init__(self):
        if self.scale == 0:
            raise ValueError("power-law scale must be nonzero")

    @property
    def real(self):
        return complex(self.scale).imag == 0

    @property
    def order(self):
        return -float(self.p)

    @property
    def limit(self):
        if self.p > 0:
            return 0.0
        if self.p == 0:
            return self.scale
        return None

    @property
    def diff_limit(self):
        if self.p > -1:
            return 0.0
        if self.p == -1:
            return self.scale
        return None

    def _eval(self, k):
        return self.scale * (1.0 + k) ** (-float(self.p))

    def log_abs(self, k):
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        return math.log(abs(self.scale)) - self.p * np.log1p(k.astype(float))

    def log(self, k):
        return self.log_abs(k) + 1j * np.angle(self.scale)

    def log_step(self, k):
        k = np.atleast_1d(np.asarray(k, dtype=float))
        return (-self.p * np.log1p(1.0 / (1.0 + k))).astype(complex)

    @property
    def ratio_defect_order(self):
        return -1.0 if self.p != 0 else -math.inf

    def monotone_modulus_from(self):
        return 0 if self.p <= 0 else None

    def first_zero(self, horizon=10_000):
        return None, True

    def describe(self):
        return {"kind": "power", "p": float(self.p), "scale": _encode(self.scale)}


@dataclass(frozen=True, eq=False)
class Affine(Sequence):
    """``k -> offset + slope * k``."""

    slope: complex
    offset: complex

    @property
    def real(self):
        return complex(self.slope).imag == 0 and complex(self.offset).imag == 0

    @property
    def order(self):
        if self.slope != 0:
            return 1.0
        return 0.0 if self.offset != 0 else -math.inf

    @property
    def limit(self):
        return self.offset if self.slope == 0 else None

    @property
    def diff_limit(self):
        return self.slope

    def _eval(self, k):
        return self.offset + self.slope * k

    @property
    def ratio_defect_order(self):
        return -1.0 if self.slope != 0 else -math.inf

    def monotone_modulus_from(self):
        s, o = complex(self.slope), complex(self.offset)
        if s == 0:
            return 0
        # |o + s(k+1)|^2 - |o + s k|^2 = 2 Re(o conj s) + |s|^2 (2k + 1)
        kstar = -(o * s.conjugate()).real / abs(s) ** 2 - 0.5
        return max(0, math.ceil(kstar))

    def first_zero(self, horizon=10_000):
        s, o = complex(self.slope), complex(self.offset)
        if s == 0:
            return (0 if o == 0 else None), True
        root = -o / s
        if root.imag == 0 and root.real >= 0 and root.real == round(root.real):
            return int(round(root.real)), True
        return None, True

    def describe(self):
        return {"kind": "affine", "slope": _encode(self.slope), "offset": _encode(self.offset)}


class EventuallyConstant(Sequence):
    """Finite prefix followed by a constant tail (the class ``c00+``)."""

    def __init__(self, prefix, tail):
        self.prefix = np.asarray(prefix)
        if self.prefix.ndim != 1:
            raise ValueError("prefix must be one-dimensional")
        self.tail = tail
        self.real = bool(np.isrealobj(self.prefix) or np.all(np.imag(self.prefix) == 0)) and (
            complex(tail).imag == 0
        )

    @property
    def k0(self) -> int:
        return len(self.prefix)

    @property
    def order(self):
        return 0.0 if self.tail != 0 else -math.inf

    @property
    def limit(self):
        return self.tail

    @property
    def diff_limit(self):
        return 0.0

    def _eval(self, k):
        dtype = np.result_type(self.prefix.dtype if self.prefix.size else float, type(self.tail))
        out = np.full(k.shape, self.tail, dtype=dtype)
        inside = k < self.k0
        out[inside] = self.prefix[k[inside]]
        return out

    @property
    def ratio_defect_order(self):
        return -math.inf

    def monotone_modulus_from(self):
        vals = np.abs(np.append(self.prefix, self.tail))
        bad = np.flatnonzero(np.diff(vals) < 0)
        return int(bad[-1] + 1) if bad.size else 0

    def first_zero(self, horizon=10_000):
        hits = np.flatnonzero(self.prefix == 0)
        if hits.size:
            return int(hits[0]), True
        return (self.k0 if self.tail == 0 else None), True

    def describe(self):
        return {
            "kind": "eventually_constant",
            "prefix": [_encode(v) for v in self.prefix],
            "tail": _encode(self.tail),
        }


class Tabulated(Sequence):
    """Explicit table continued linearly with the declared difference limit.

    For ``k >= len(table)`` the value is
    ``table[-1] + (k - len(table) + 1) * diff_limit``.
    """

    def __init__(self, table, diff_limit):
        self.table = np.asarray(table)
        if self.table.ndim != 1 or self.table.size == 0:
            raise ValueError("table must be a nonempty 1-d array")
        self.diff_limit = diff_limit
        self.real = bool(np.all(np.imag(self.table) == 0)) and complex(diff_limit).imag == 0

    @property
    def _tail(self) -> Affine:
        n = len(self.table)
        return Affine(self.diff_limit, self.table[-1] - (n - 1) * self.diff_limit)

    @property
    def order(self):
        return self._tail.order

    @property
    def limit(self):
        return self._tail.limit

    def _eval(self, k):
        n = len(self.table)
        out = np.asarray(self._tail._eval(k)).astype(np.result_type(self.table.dtype, float, type(self.diff_limit)))
        inside = k < n
        out[inside] = self.table[k[inside]]
        return out

    @property
    def ratio_defect_order(self):
        return self._tail.ratio_defect_order

    def monotone_modulus_from(self):
        n = len(self.table)
        tail_from = self._tail.monotone_modulus_from()
        if tail_from is None:
            return None
        top = max(n, tail_from) + 1
        vals = np.abs(self(np.arange(top + 1)))
        bad = np.flatnonzero(np.diff(vals) < 0)
        return int(bad[-1] + 1) if bad.size else 0

    def first_zero(self, horizon=10_000):
        hits = np.flatnonzero(self.table == 0)
        if hits.size:
            return int(hits[0]), True
        z, _ = self._tail.first_zero()
        if z is not None and z >= len(self.table):
            return z, True
        if self._tail.slope == 0 and self._tail.offset == 0:
            return len(self.table), True
        return None, True

    def describe(self):
        return {
            "kind": "tabulated",
            "table": [_encode(v) for v in self.table],
            "diff_limit": _encode(self.diff_limit),
        }


@dataclass(frozen=True, eq=False)
class Exponential(Sequence):
    """``k -> scale * exp(-rate * k)``."""

    rate: float
    scale: complex = 1.0

    @property
    def real(self):
        return complex(self.scale).imag == 0

    @property
    def order(self):
        if self.rate > 0:
            return -math.inf
        return math.inf if self.rate < 0 else 0.0

    @property
    def limit(self):
        if self.rate > 0:
            return 0.0
        return self.scale if self.rate == 0 else None

    @property
    def diff_limit(self):
        return 0.0 if self.rate >= 0 else None

    def _eval(self, k):
        return self.scale * np.exp(-self.rate * k.astype(float))

    def log_abs(self, k):
        k = np.atleast_1d(np.asarray(k, dtype=float))
        return math.log(abs(self.scale)) - self.rate * k

    def log(self, k):
        return self.log_abs(k) + 1j * np.angle(self.scale)

    def log_step(self, k):
        k = np.atleast_1d(np.asarray(k))
        return np.full(k.shape, -self.rate, dtype=complex)

    @property
    def ratio_defect_order(self):
        return 0.0 if self.rate != 0 else -math.inf

    def monotone_modulus_from(self):
        return 0 if self.rate <= 0 else None

    def first_zero(self, horizon=10_000):
        return (None if self.scale != 0 else 0), True

    def describe(self):
        return {"kind": "exponential", "rate": float(self.rate), "scale": _encode(self.scale)}


class FunctionSequence(Sequence):
    """Sequence given by a vectorized callable plus declared metadata."""

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        *,
        order=None,
        limit=None,
        diff_limit=None,
        real=True,
        log_fn=None,
        log_step_fn=None,
        ratio_defect_order=None,
    ):
        self._fn = fn
        self.order = order
        self.limit = limit
        self.diff_limit = diff_limit
        self.real = real
        self._log_fn = log_fn
        self._log_step_fn = log_step_fn
        self._rdo = ratio_defect_order

    def _eval(self, k):
        return self._fn(k)

    def log(self, k):
        if self._log_fn is not None:
            return self._log_fn(np.atleast_1d(np.asarray(k, dtype=np.int64)))
        return super().log(k)

    def log_abs(self, k):
        if self._log_fn is not None:
            return np.real(self.log(k))
        return super().log_abs(k)

    def log_step(self, k):
        if self._log_step_fn is not None:
            return self._log_step_fn(np.atleast_1d(np.asarray(k, dtype=np.int64)))
        return super().log_step(k)

    @property
    def ratio_defect_order(self):
        return self._rdo


class _Overridden(Sequence):
    def __init__(self, base: Sequence, values: dict[int, complex]):
        if any(k < 0 for k in values):
            raise DomainError("override at a negative index")
        self.base = base
        self.values = dict(sorted(values.items()))
        self.order = base.order
        self.limit = base.limit
        self.diff_limit = base.diff_limit
        self.real = base.real and all(complex(v).imag == 0 for v in values.values())

    def _eval(self, k):
        out = np.asarray(self.base._eval(k))
        out = out.astype(np.result_type(out.dtype, *[type(v) for v in self.values.values()]))
        for idx, v in self.values.items():
            out[k == idx] = v
        return out

    def log(self, k):
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        out = np.asarray(self.base.log(k), dtype=complex).copy()
        for idx, v in self.values.items():
            if np.any(k == idx):
                out[k == idx] = np.log(complex(v)) if v != 0 else -np.inf
        return out

    def log_abs(self, k):
        return np.real(self.log(k))

    @property
    def ratio_defect_order(self):
        return self.base.ratio_defect_order

    def monotone_modulus_from(self):
        base_from = self.base.monotone_modulus_from()
        if base_from is None:
            return None
        top = max(base_from, max(self.values) + 1) + 1
        vals = np.abs(self(np.arange(top + 1)))
        bad = np.flatnonzero(np.diff(vals) < 0)
        return int(bad[-1] + 1) if bad.size else 0

    def first_zero(self, horizon=10_000):
        zs = [k for k, v in self.values.items() if v == 0]
        z, certified = self.base.first_zero(horizon)
        while z is not None and z in self.values and self.values[z] != 0:
            # the base zero was overwritten; look past it
            rest = self.base(np.arange(z + 1, max(horizon, z + 2)))
            hits = np.flatnonzero(rest == 0)
            z = int(z + 1 + hits[0]) if hits.size else None
            certified = certified and z is None and isinstance(self.base, (PowerLaw, Affine, Exponential))
        cands = zs + ([z] if z is not None else [])
        return (min(cands) if cands else None), certified

    def describe(self):
        d = self.base.describe()
        d["overrides"] = {str(k): _encode(v) for k, v in self.values.items()}
        return d


def evaluate(seq: Sequence, k):
    """Value of ``seq`` at ``k`` (scalar or array); negative ``k`` raises."""
    return seq(k)


# ---------------------------------------------------------------------------
# derived sequences


def alpha_from(beta: Sequence, mu: Sequence, probe: int = 10_000) -> Sequence:
    """``alpha(k) = beta(k) mu(k+1) / mu(k)``.

    ``mu`` must satisfy ``mu(0) == 1`` and have no zeros; both are checked,
    the latter exactly for closed-form kinds and on ``[0, probe)`` otherwise.
    """
    if mu(0) != 1:
        raise SingularSymbolError(f"mu(0) must be 1, got {mu(0)!r}")
    z, _ = mu.first_zero(probe)
    if z is not None:
        raise SingularSymbolError(f"mu vanishes at k={z}")

    def fn(k):
        den = mu(k)
        if np.any(den == 0):
            raise SingularSymbolError(f"mu vanishes at k={int(k[den == 0][0])}")
        return beta(k) * mu(k + 1) / den

    def log_fn(k):
        return beta.log(k) + mu.log_step(k)

    return FunctionSequence(
        fn,
        order=beta.order,
        limit=None,
        diff_limit=None,
        real=beta.real and mu.real,
        log_fn=log_fn,
    )


# ---------------------------------------------------------------------------
# series


@dataclass(frozen=True)
class SeriesSum:
    """A sum of positive terms with a certified error bound.

    ``value`` is the best estimate; the exact sum lies within ``tail_bound``
    of it.  Divergent series have ``converges=False`` and ``value=inf``.
    ``exact_order`` records whether the verdict comes from declared
    closed-form exponents (True) or from an empirical slope (False).
    """

    value: float
    partial: float
    tail_bound: float
    horizon: int
    order: float | None
    converges: bool | None
    exact_order: bool = True

    @property
    def certified(self) -> bool:
        return self.converges is True and math.isfinite(self.tail_bound)


def _logsumexp(x: np.ndarray) -> float:
    if x.size == 0:
        return -math.inf
    m = float(np.max(x))
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(x - m))))


def estimate_order(log_term: Callable, lo: int = 10**4, hi: int = 10**6, points: int = 9) -> float:
    """Log-log slope of a term over ``[lo, hi]``."""
    ks = np.unique(np.geomspace(lo, hi, points).astype(np.int64))
    lt = np.real(log_term(ks))
    x = np.log1p(ks.astype(float))
    if not np.all(np.isfinite(lt)):
        return -math.inf if np.all(lt[-2:] == -np.inf) else math.nan
    return float(np.polyfit(x, lt, 1)[0])


def _envelope(log_term, order, start, span=1e8, points=64):
    """min/max of ``log t(k) - order*log(1+k)`` sampled on ``[start, span*start]``."""
    ks = np.unique(np.geomspace(start, span * start, points).astype(np.int64))
    ks = ks[ks >= start]
    r = np.real(log_term(ks)) - order * np.log1p(ks.astype(float))
    return float(np.min(r)), float(np.max(r))


def _ratio_bound(log_term, start, span=1e4, points=64):
    """Largest sampled ``t(k+1)/t(k)`` for ``k >= start``."""
    ks = np.unique(np.geomspace(start, span * start, points).astype(np.int64))
    with np.errstate(invalid="ignore"):
        lr = np.real(log_term(ks + 1)) - np.real(log_term(ks))
    lr = lr[~np.isnan(lr)]
    return float(np.exp(np.max(lr))) if lr.size else 0.0


def _classify(order, margin):
    if order is None or math.isnan(order):
        return None
    if order < -1 - margin:
        return True
    if order >= -1 + margin:
        return False
    return None


def sum_series(
    log_term: Callable[[np.ndarray], np.ndarray],
    order: float | None = None,
    *,
    tol: float = 1e-12,
    start: int = 1 << 10,
    max_horizon: int = 1 << 22,
    margin: float = 0.05,
) -> SeriesSum:
    """Sum ``sum_{k>=0} t(k)`` of positive terms given ``log t``.

    With a declared ``order`` the convergence verdict is exact: the series
    converges iff ``order < -1``.  Without one the order is estimated from
    the log-log slope over ``k in [1e4, 1e6]`` and the verdict is
    ``None`` (inconclusive) within ``margin`` of ``-1``.

    The horizon doubles until the relative half-width of the tail interval
    is at most ``tol`` or ``max_horizon`` is reached.  The tail interval
    comes from integral comparison,
    ``C_lo (1+H)**(r+1)/(-r-1) <= sum_{k>=H} t(k) <= C_hi H**(r+1)/(-r-1)``,
    with ``C_lo, C_hi`` the extreme values of ``t(k)/(1+k)**r`` sampled on
    ``k >= H`` (exact for pure powers).
    """
    exact = order is not None
    r = order if exact else estimate_order(log_term)
    converges = (r < -1) if exact else _classify(r, margin)

    H = start
    while True:
        ks = np.arange(H)
        lt = np.real(log_term(ks))
        partial = math.exp(_logsumexp(lt))
        if converges is not True:
            if converges is False or H >= max_horizon:
                return SeriesSum(math.inf if converges is False else partial, partial, math.inf,
                                 H, r, converges, exact)
            H *= 2
            continue
        if r == -math.inf:
            rho = _ratio_bound(log_term, H)
            first = math.exp(float(np.real(log_term(np.array([H])))[0]))
            lo, hi = 0.0, (first / (1 - rho) if rho < 1 else math.inf)
        else:
            cmin, cmax = _envelope(log_term, r, H)
            lo = math.exp(cmin) * (1.0 + H) ** (r + 1) / (-r - 1)
            hi = math.exp(cmax) * float(H) ** (r + 1) / (-r - 1)
        half = 0.5 * (hi - lo)
        value = partial + 0.5 * (hi + lo)
        if half <= tol * value or H >= max_horizon:
            return SeriesSum(value, partial, half, H, r, True, exact)
        H *= 2


def nested_sum(
    log_outer: Callable[[np.ndarray], np.ndarray],
    log_inner: Callable[[np.ndarray], np.ndarray],
    outer_order: float | None,
    inner_order: float | None,
    *,
    strict: bool = False,
    horizon: int = 1 << 20,
) -> SeriesSum:
    """``sum_j u(j) * sum_{k <= j} v(k)`` (``k < j`` when ``strict``).

    All Hilbert-Schmidt norms and the double sum of condition (six) reduce
    to this shape.  Inner sums are cumulative, so the cost is linear in the
    horizon.  Work is done in log-space because the factors individually
    overflow for high Fourier modes.

    Convergence with orders ``ou, ov``: if ``ov < -1`` the inner sums are
    bounded and the verdict is ``ou < -1``; otherwise the inner sum grows
    like ``(1+j)**(ov+1)`` and the verdict is ``ou + ov + 1 < -1``.  The
    tail beyond the horizon ``H`` is bounded by
    ``V(H) * tail(u) + C_u C_v sum_{j>=H} (1+j)**ou * I(j)`` where ``I(j)``
    bounds ``sum_{H<=k<=j} (1+k)**ov``.
    """
    ks = np.arange(horizon)
    lu = np.real(log_outer(ks))
    lv = np.real(log_inner(ks))
    with np.errstate(invalid="ignore"):
        lV = np.logaddexp.accumulate(lv)
    if strict:
        lV = np.concatenate(([-np.inf], lV[:-1]))
    partial = math.exp(_logsumexp(lu + lV))
    lV_H = float(lV[-1]) if not strict else float(np.logaddexp(lV[-1], lv[-1]))

    exact = outer_order is not None and inner_order is not None
    ou = outer_order
    ov = inner_order
    if not exact:
        # empirical slopes from the computed window
        lo_i = horizon // 100
        x = np.log1p(ks[lo_i:].astype(float))
        ou = float(np.polyfit(x[::97], lu[lo_i:][::97], 1)[0]) if ou is None else ou
        ov = float(np.polyfit(x[::97], lv[lo_i:][::97], 1)[0]) if ov is None else ov

    if ov < -1:
        converges = ou < -1
    else:
        converges = ou + ov + 1 < -1
    if not exact:
        eff = ou if ov < -1 else ou + ov + 1
        converges = _classify(eff, 0.05)

    if converges is not True:
        value = math.inf if converges is False else partial
        eff = ou if ov < -1 else ou + ov + 1
        return SeriesSum(value, partial, math.inf, horizon, eff, converges, exact)

    # tail bound assembled in log-space: the envelope constants of the two
    # factors can over- and underflow separately
    H = horizon
    lH = math.log(H)
    if ou == -math.inf:
        rho = _ratio_bound(log_outer, H)
        first = float(np.real(log_outer(np.array([H])))[0])
        ltail_u = first - math.log1p(-rho) if rho < 1 else math.inf
        lcu = math.inf
    else:
        _, lcu = _envelope(log_outer, ou, H)
        ltail_u = lcu + (ou + 1) * lH - math.log(-ou - 1)

    if ov < -1:
        if ov == -math.inf:
            rho = _ratio_bound(log_inner, H)
            first = float(np.real(log_inner(np.array([H])))[0])
            ltail_v = first - math.log1p(-rho) if rho < 1 else math.inf
        else:
            _, lcv = _envelope(log_inner, ov, H)
            ltail_v = lcv + (ov + 1) * lH - math.log(-ov - 1)
        lbound = float(np.logaddexp(lV_H, ltail_v)) + ltail_u
    else:
        ov_eff = ov if ov > -1 else -1 + 1e-3
        _, lcv = _envelope(log_inner, ov, H)
        if ov == -1:
            # log((1+j)/(1+H)) <= ((1+j)/(1+H))**eps / eps
            lcv += -1e-3 * lH - math.log(1e-3)
        lscale = 0.0 if ov_eff >= 0 else -math.log(ov_eff + 1)
        r = ou + ov_eff + 1
        lsecond = lcu + lcv + lscale + (r + 1) * lH - math.log(-r - 1)
        lbound = float(np.logaddexp(lV_H + ltail_u, lsecond))
    bound = math.exp(lbound) if lbound < 709 else math.inf
    return SeriesSum(partial + 0.5 * bound, partial, 0.5 * bound, H, ou + max(ov + 1, 0), True, exact)


# ---------------------------------------------------------------------------
# weights


class WeightSequence(Sequence):
    """Strictly positive summable sequence normalized to total mass one.

    ``shift`` gives ``k -> w(k - shift)``, the weight of the negative Fourier
    modes; evaluation with ``k - shift < 0`` is a domain error.
    """

    def __init__(self, raw: Sequence, total: float, error: float, shift: int = 0):
        self.raw = raw
        self.total = float(total)
        self.error = float(error)
        self.shift = int(shift)
        self.order = raw.order
        self.limit = 0.0
        self.diff_limit = 0.0
        self.real = True

    def shifted(self, m: int) -> "WeightSequence":
        return WeightSequence(self.raw, self.total, self.error, self.shift + m)

    def _base(self, k):
        j = k - self.shift
        if np.any(j < 0):
            raise DomainError(f"shifted weight evaluated below its support (k - {self.shift} < 0)")
        return j

    def _eval(self, k):
        return np.real(self.raw(self._base(k))) / self.total

    def log_abs(self, k):
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        return np.real(self.raw.log_abs(self._base(k))) - math.log(self.total)

    def log(self, k):
        return self.log_abs(k).astype(complex)

    def log_step(self, k):
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        return self.raw.log_step(self._base(k))

    @property
    def ratio_defect_order(self):
        return self.raw.ratio_defect_order

    def first_zero(self, horizon=10_000):
        return None, True

    def describe(self):
        d = {"weight": self.raw.describe()}
        if self.shift:
            d["shift"] = self.shift
        return d


def normalize_weight(raw: Sequence, tol: float = 1e-13, probe: int = 4096) -> WeightSequence:
    """Normalize a positive summable sequence to unit mass.

    The total is the partial sum plus an integral tail estimate, with the
    horizon grown until the relative error bound is below ``tol``.
    """
    vals = raw(np.arange(probe))
    if np.any(np.imag(vals) != 0) or np.any(np.real(vals) <= 0):
        bad = np.flatnonzero((np.imag(vals) != 0) | (np.real(vals) <= 0))[0]
        raise ValueError(f"weight must be strictly positive; fails at k={int(bad)}")
    if isinstance(raw, EventuallyConstant) and raw.tail == 0:
        raise ValueError(f"weight must be strictly positive; fails at k={raw.k0}")
    if raw.order is not None and raw.order >= -1:
        raise DivergenceError(f"weight is not summable (order {raw.order} >= -1)")
    s = sum_series(raw.log_abs, raw.order, tol=tol)
    if s.converges is not True:
        raise DivergenceError("weight is not summable")
    return WeightSequence(raw, s.value, s.tail_bound / s.value)


# ---------------------------------------------------------------------------
# the power-law example family


@dataclass(frozen=True)
class PowerLawFamily:
    """``beta = 1+k``, ``mu = (1+k)**-b``, ``w ~ (1+k)**-c``, ``w' ~ (1+k)**-a``.

    The constructor enforces ``3 < a < 2b - 1 < c``.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = self.a, self.b, self.c
        if not (3 < a < 2 * b - 1 < c):
            raise ValueError(f"need 3 < a < 2b-1 < c, got a={a}, b={b}, c={c} (2b-1={2 * b - 1})")

    @property
    def beta(self) -> Affine:
        return Affine(1.0, 1.0)

    @property
    def mu(self) -> PowerLaw:
        return PowerLaw(self.b)

    @property
    def w(self) -> WeightSequence:
        return _family_weight(self.c)

    @property
    def w_prime(self) -> WeightSequence:
        return _family_weight(self.a)

    def predicted_N(self) -> int:
        return max(0, math.ceil((self.c - 2 * self.b - 1) / 2))


_weight_cache: dict[float, WeightSequence] = {}


def _family_weight(p: float) -> WeightSequence:
    if p not in _weight_cache:
        _weight_cache[p] = normalize_weight(PowerLaw(p))
    return _weight_cache[p]


def predicted_N(family: PowerLawFamily) -> int:
    """Least ``n >= 0`` with ``sum (1+k)**(2n) |mu(k)|**-2 w(k)`` divergent.

    For the power-law family the summand is ``(1+k)**(2n + 2b - c)``, which
    diverges iff ``2n + 2b - c >= -1``.
    """
    return family.predicted_N()


# ---------------------------------------------------------------------------
# configuration descriptors


def sequence_from_dict(d: dict) -> Sequence:
    """Build a sequence from its descriptor ``{"kind": ..., ...}``."""
    d = dict(d)
    overrides = d.pop("overrides", None)
    kind = d.pop("kind", None)
    try:
        if kind == "power":
            seq = PowerLaw(float(d.pop("p")), _decode(d.pop("scale", 1.0)))
        elif kind == "affine":
            seq = Affine(_decode(d.pop("slope")), _decode(d.pop("offset")))
        elif kind == "eventually_constant":
            seq = EventuallyConstant([_decode(v) for v in d.pop("prefix")], _decode(d.pop("tail")))
        elif kind == "tabulated":
            seq = Tabulated([_decode(v) for v in d.pop("table")], _decode(d.pop("diff_limit")))
        elif kind == "exponential":
            seq = Exponential(float(d.pop("rate")), _decode(d.pop("scale", 1.0)))
        else:
            raise ValueError(f"unknown sequence kind {kind!r}")
    except KeyError as exc:
        raise ValueError(f"sequence of kind {kind!r} is missing field {exc.args[0]!r}") from None
    if d:
        raise ValueError(f"unexpected fields for kind {kind!r}: {sorted(d)}")
    if overrides:
        seq = seq.with_overrides({int(k): _decode(v) for k, v in overrides.items()})
    return seq
