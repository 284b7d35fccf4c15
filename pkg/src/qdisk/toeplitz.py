"""Canonical-form algebra of the quantum disk.

Elements are finite Fourier sums

    x = sum_{n>=0} U**n a_n(K) + sum_{n<0} a_n(K) (U*)**(-n)

with ``U`` the unilateral shift and ``K`` the label operator.  Products are
computed through *column coefficients*: the mode-``n`` term sends ``E_k`` to
``c_n(k) E_{k+n}`` where ``c_n = a_n`` for ``n >= 0`` and
``c_n(k) = [k >= -n] a_n(k+n)`` for ``n < 0``.  In that form

    (x y)_p(k) = sum_{m+n=p} c^y_m(k) c^x_n(k+m),

which is the relation ``K U = U (K + 1)`` together with ``U* U = I``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .sequences import EventuallyConstant, FunctionSequence, Sequence, WeightSequence, _decode, _encode
from .sequences import sequence_from_dict

__all__ = [
    "CannotBoundError",
    "DiagonalSymbol",
    "ToeplitzElement",
    "identity",
    "shift",
    "shift_adjoint",
    "diagonal",
    "monomial",
    "multiply",
    "adjoint",
    "rho",
    "derive",
    "represent",
    "tau",
    "random_element",
]


class CannotBoundError(ValueError):
    """The trace of an unbounded diagonal symbol was requested."""


@dataclass(frozen=True)
class DiagonalSymbol:
    """A diagonal operator ``a(K)`` with ``a(K) E_k = a(k) E_k``.

    ``k0`` is set when the symbol is constant for ``k >= k0`` (member of
    ``c00+``); ``None`` means only the sequence's declared limit is known.
    """

    seq: Sequence
    k0: int | None = None

    def __call__(self, k):
        return self.seq(k)

    @property
    def limit(self):
        if self.k0 is not None:
            return self.seq(self.k0)
        return self.seq.limit

    @property
    def eventually_constant(self) -> bool:
        return self.k0 is not None

    def is_zero(self) -> bool:
        if self.k0 is None:
            return False
        return bool(np.all(self.seq(np.arange(self.k0 + 1)) == 0))

    def to_dict(self) -> dict:
        if self.k0 is not None:
            vals = self.seq(np.arange(self.k0 + 1))
            return {"prefix": [_encode(v) for v in vals[:-1]], "tail": _encode(vals[-1])}
        return self.seq.describe()

    @classmethod
    def from_dict(cls, d: dict) -> "DiagonalSymbol":
        if "kind" in d:
            seq = sequence_from_dict(d)
            k0 = seq.k0 if isinstance(seq, EventuallyConstant) else None
            return cls(seq, k0)
        return const_symbol(_decode(d["tail"]), [_decode(v) for v in d.get("prefix", [])])


def const_symbol(value, prefix=()) -> DiagonalSymbol:
    seq = EventuallyConstant(np.asarray(prefix, dtype=np.result_type(float, *[type(v) for v in prefix])), value)
    return DiagonalSymbol(seq, len(prefix))


def _combine_limits(a, b, op):
    if a is None or b is None:
        return None
    return op(a, b)


def _sym_shift(s: DiagonalSymbol, m: int) -> DiagonalSymbol:
    """``k -> s(k+m)``, zero where ``k + m < 0``."""
    if m == 0:
        return s

    def fn(k):
        j = k + m
        ok = j >= 0
        vals = s(j[ok])
        out = np.zeros(k.shape, dtype=np.result_type(vals, float))
        out[ok] = vals
        return out

    k0 = None if s.k0 is None else max(s.k0 - m, 0)
    return DiagonalSymbol(FunctionSequence(fn, limit=s.limit, real=s.seq.real), k0)


def _sym_mul(s: DiagonalSymbol, t: DiagonalSymbol) -> DiagonalSymbol:
    k0 = None if s.k0 is None or t.k0 is None else max(s.k0, t.k0)
    lim = _combine_limits(s.limit, t.limit, lambda x, y: x * y)
    return DiagonalSymbol(FunctionSequence(lambda k: s(k) * t(k), limit=lim, real=s.seq.real and t.seq.real), k0)


def _sym_add(s: DiagonalSymbol, t: DiagonalSymbol, sign: int = 1) -> DiagonalSymbol:
    k0 = None if s.k0 is None or t.k0 is None else max(s.k0, t.k0)
    lim = _combine_limits(s.limit, t.limit, lambda x, y: x + sign * y)
    return DiagonalSymbol(FunctionSequence(lambda k: s(k) + sign * t(k), limit=lim, real=s.seq.real and t.seq.real), k0)


def _sym_scale(s: DiagonalSymbol, c) -> DiagonalSymbol:
    lim = None if s.limit is None else c * s.limit
    real = s.seq.real and complex(c).imag == 0
    return DiagonalSymbol(FunctionSequence(lambda k: c * s(k), limit=lim, real=real), s.k0)


def _sym_conj(s: DiagonalSymbol) -> DiagonalSymbol:
    lim = None if s.limit is None else np.conj(s.limit)
    return DiagonalSymbol(FunctionSequence(lambda k: np.conj(s(k)), limit=lim, real=s.seq.real), s.k0)


def _as_symbol(a) -> DiagonalSymbol:
    if isinstance(a, DiagonalSymbol):
        return a
    if isinstance(a, EventuallyConstant):
        return DiagonalSymbol(a, a.k0)
    if isinstance(a, Sequence):
        return DiagonalSymbol(a, None)
    if np.isscalar(a):
        return const_symbol(a)
    raise TypeError(f"cannot use {type(a).__name__} as a diagonal symbol")


@dataclass(frozen=True)
class ToeplitzElement:
    """Finite Fourier sum in canonical order; ``modes`` maps ``n`` to ``a_n``."""

    modes: dict[int, DiagonalSymbol] = field(default_factory=dict)

    # column-coefficient form

    def column(self, n: int) -> DiagonalSymbol:
        a = self.modes[n]
        return a if n >= 0 else _sym_shift(a, n)

    @classmethod
    def from_columns(cls, cols: dict[int, DiagonalSymbol]) -> "ToeplitzElement":
        modes = {}
        for p, c in sorted(cols.items()):
            a = c if p >= 0 else _sym_shift(c, -p)
            if not a.is_zero():
                modes[p] = a
        return cls(modes)

    @property
    def max_mode(self) -> int:
        return max((abs(n) for n in self.modes), default=0)

    def coefficients(self, n: int, k) -> np.ndarray:
        """Values ``a_n(k)``; zero for modes outside the support."""
        k = np.asarray(k)
        if n not in self.modes:
            return np.zeros(k.shape)
        return self.modes[n](k)

    # arithmetic

    def __add__(self, other):
        other = _as_element(other)
        modes = dict(self.modes)
        for n, b in other.modes.items():
            modes[n] = _sym_add(modes[n], b) if n in modes else b
        return ToeplitzElement({n: modes[n] for n in sorted(modes) if not modes[n].is_zero()})

    __radd__ = __add__

    def __neg__(self):
        return ToeplitzElement({n: _sym_scale(a, -1) for n, a in self.modes.items()})

    def __sub__(self, other):
        return self + (-_as_element(other))

    def __rsub__(self, other):
        return _as_element(other) - self

    def __mul__(self, other):
        if isinstance(other, ToeplitzElement):
            return multiply(self, other)
        if np.isscalar(other):
            if other == 0:
                return ToeplitzElement()
            return ToeplitzElement({n: _sym_scale(a, other) for n, a in self.modes.items()})
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    def adjoint(self) -> "ToeplitzElement":
        return adjoint(self)

    # comparisons on a probe window

    def probe_window(self, other: "ToeplitzElement | None" = None, margin: int = 8) -> int:
        els = [self] if other is None else [self, other]
        k0s = [a.k0 for x in els for a in x.modes.values()]
        top = max((k for k in k0s if k is not None), default=0)
        mm = max(x.max_mode for x in els)
        return top + mm + margin + (32 if any(k is None for k in k0s) else 0)

    def equals(self, other: "ToeplitzElement", window: int | None = None, rtol: float = 0.0, atol: float = 0.0) -> bool:
        """Mode-by-mode equality on ``[0, window]`` plus equality of limits."""
        if window is None:
            window = self.probe_window(other)
        ks = np.arange(window + 1)
        for n in set(self.modes) | set(other.modes):
            x, y = self.coefficients(n, ks), other.coefficients(n, ks)
            if not np.allclose(x, y, rtol=rtol, atol=atol):
                return False
            lx = self.modes[n].limit if n in self.modes else 0.0
            ly = other.modes[n].limit if n in other.modes else 0.0
            if lx is not None and ly is not None and not np.isclose(lx, ly, rtol=rtol, atol=atol):
                return False
        return True

    def max_difference(self, other: "ToeplitzElement", window: int) -> float:
        ks = np.arange(window + 1)
        diffs = [
            np.max(np.abs(self.coefficients(n, ks) - other.coefficients(n, ks)))
            for n in set(self.modes) | set(other.modes)
        ]
        return float(max(diffs, default=0.0))

    # serialization

    def to_list(self) -> list[dict]:
        return [{"mode": n, "symbol": a.to_dict()} for n, a in sorted(self.modes.items())]

    @classmethod
    def from_list(cls, items: list[dict]) -> "ToeplitzElement":
        return cls({int(d["mode"]): DiagonalSymbol.from_dict(d["symbol"]) for d in items})


def _as_element(x) -> ToeplitzElement:
    if isinstance(x, ToeplitzElement):
        return x
    if np.isscalar(x):
        return ToeplitzElement({0: const_symbol(x)}) if x != 0 else ToeplitzElement()
    raise TypeError(f"cannot convert {type(x).__name__} to an algebra element")


def identity() -> ToeplitzElement:
    return ToeplitzElement({0: const_symbol(1.0)})


def shift() -> ToeplitzElement:
    """The unilateral shift ``U``."""
    return ToeplitzElement({1: const_symbol(1.0)})


def shift_adjoint() -> ToeplitzElement:
    """``U*``."""
    return ToeplitzElement({-1: const_symbol(1.0)})


def diagonal(a) -> ToeplitzElement:
    """``a(K)`` for a sequence, symbol or scalar."""
    return ToeplitzElement({0: _as_symbol(a)})


def monomial(n: int, a) -> ToeplitzElement:
    """``U**n a(K)`` for ``n >= 0`` and ``a(K) (U*)**(-n)`` for ``n < 0``."""
    return ToeplitzElement({n: _as_symbol(a)})


def multiply(x: ToeplitzElement, y: ToeplitzElement) -> ToeplitzElement:
    """Canonical form of ``x y``."""
    cols: dict[int, DiagonalSymbol] = {}
    for m in sorted(y.modes):
        cy = y.column(m)
        for n in sorted(x.modes):
            term = _sym_mul(cy, _sym_shift(x.column(n), m))
            p = m + n
            cols[p] = _sym_add(cols[p], term) if p in cols else term
    return ToeplitzElement.from_columns(cols)


def adjoint(x: ToeplitzElement) -> ToeplitzElement:
    """Canonical form of ``x*``: mode ``-n`` gets ``conj(c_n(k - n))``."""
    cols = {-n: _sym_conj(_sym_shift(x.column(n), -n)) for n in x.modes}
    return ToeplitzElement.from_columns(cols)


def rho(x: ToeplitzElement, theta: float) -> ToeplitzElement:
    """Rotation automorphism: mode ``n`` is multiplied by ``exp(i n theta)``."""
    return ToeplitzElement({n: (a if n == 0 else _sym_scale(a, cmath.exp(1j * n * theta))) for n, a in x.modes.items()})


def derive(x: ToeplitzElement, beta: Sequence) -> ToeplitzElement:
    """The covariant derivation ``d(x) = [U beta(K), x]``.

    Mode ``n`` of ``x`` feeds only mode ``n+1`` of the result.  When ``a_n``
    is eventually constant the output symbol is
    ``(beta(k+n) - beta(k)) a_n(k)`` plus an eventually vanishing term, so
    its limit is declared as ``n * beta_inf * lim a_n``.
    """
    g = monomial(1, DiagonalSymbol(beta, None))
    raw = multiply(g, x) - multiply(x, g)
    modes = {}
    for p, sym in raw.modes.items():
        a = x.modes.get(p - 1)
        lim = None
        if a is not None and a.k0 is not None and beta.diff_limit is not None:
            lim = (p - 1) * beta.diff_limit * a.limit
        # beta(k)(a_0(k) - a_0(k+1)) vanishes once a_0 is constant
        k0 = a.k0 if (p == 1 and a is not None) else None
        seq = FunctionSequence(sym.seq._eval, limit=lim, real=sym.seq.real)
        out = DiagonalSymbol(seq, k0)
        if not out.is_zero():
            modes[p] = out
    return ToeplitzElement(modes)


def represent(x: ToeplitzElement, K: int) -> np.ndarray:
    """Matrix of ``x`` on ``span{E_0, ..., E_K}`` (compression)."""
    if K < 0:
        raise ValueError("truncation size must be nonnegative")
    ks = np.arange(K + 1)
    vals = [x.column(n)(ks) for n in x.modes]
    dtype = np.result_type(float, *vals) if vals else float
    M = np.zeros((K + 1, K + 1), dtype=dtype)
    for n, v in zip(x.modes, vals):
        src = ks[(ks + n >= 0) & (ks + n <= K)]
        M[src + n, src] = v[src]
    return M


def tau(w: WeightSequence, x: ToeplitzElement, tol: float = 1e-12) -> complex:
    """The invariant state ``tr(w(K) x)``; only mode 0 contributes."""
    a = x.modes.get(0)
    if a is None:
        return 0.0
    if a.k0 is not None:
        head = np.arange(a.k0)
        wh = w(head)
        return complex(np.sum(wh * a(head)) + a.limit * (1.0 - np.sum(wh))) if a.k0 else complex(a.limit)
    if a.limit is None:
        raise CannotBoundError("mode-0 symbol has no declared limit")
    H = 1024
    while True:
        head = np.arange(H)
        wh = w(head)
        mass = max(1.0 - float(np.sum(wh)), 0.0)
        probe = np.unique(np.geomspace(H, 1e6 * H, 64).astype(np.int64))
        dev = float(np.max(np.abs(a(probe) - a.limit)))
        if dev * mass <= tol or H >= 1 << 22:
            return complex(np.sum(wh * a(head)) + a.limit * mass)
        H *= 2


def random_element(rng: np.random.Generator, max_mode: int = 4, prefix: int = 6, n_terms: int | None = None) -> ToeplitzElement:
    """Random element of the polynomial subalgebra with eventually constant symbols."""
    n_terms = n_terms or int(rng.integers(1, 2 * max_mode + 2))
    modes = rng.choice(np.arange(-max_mode, max_mode + 1), size=min(n_terms, 2 * max_mode + 1), replace=False)
    out = {}
    for n in sorted(int(m) for m in modes):
        L = int(rng.integers(0, prefix + 1))
        vals = rng.normal(size=L + 1) + 1j * rng.normal(size=L + 1)
        out[n] = const_symbol(complex(vals[-1]), [complex(v) for v in vals[:-1]])
    return ToeplitzElement(out)
