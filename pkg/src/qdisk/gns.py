"""GNS spaces of the rotation-invariant states.

A vector ``f`` of ``H_w`` is a Fourier series
``sum_{n>=0} U**n f_n(K) + sum_{n<0} f_n(K) (U*)**(-n)`` with norm

    ||f||_w**2 = sum_{n>=0} sum_k w(k)|f_n(k)|**2 + sum_{n<0} sum_k w(k-n)|f_n(k)|**2.

Computational vectors are finitely supported: each mode holds a finite
coefficient array.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .sequences import WeightSequence, _decode, _encode
from .toeplitz import DiagonalSymbol, ToeplitzElement, multiply, rho
from .sequences import EventuallyConstant

__all__ = [
    "SpaceMismatchError",
    "WeightedSpace",
    "GnsVector",
    "inner",
    "norm",
    "act",
    "right_act",
    "rotate",
    "check_implementing",
    "embed",
    "pi_matrix",
]


class SpaceMismatchError(ValueError):
    """Vectors from different weighted spaces were combined."""


@dataclass(frozen=True)
class WeightedSpace:
    """``H_w``: mode ``n >= 0`` is weighted by ``w(k)``, mode ``n < 0`` by ``w(k - n)``."""

    weight: WeightSequence
    name: str = "w"

    def mode_weight(self, n: int) -> WeightSequence:
        return self.weight if n >= 0 else self.weight.shifted(n)

    def weights(self, n: int, size: int) -> np.ndarray:
        return self.mode_weight(n)(np.arange(size))


@dataclass(frozen=True)
class GnsVector:
    """Finitely supported family ``f_n(k)``; ``space=None`` is the formal space."""

    coeffs: dict[int, np.ndarray] = field(default_factory=dict)
    space: WeightedSpace | None = None

    def __post_init__(self):
        clean = {}
        for n, v in self.coeffs.items():
            v = np.atleast_1d(np.asarray(v))
            if v.ndim != 1:
                raise ValueError("coefficient arrays must be one-dimensional")
            clean[int(n)] = v
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @property
    def max_mode(self) -> int:
        return max((abs(n) for n in self.coeffs), default=0)

    @property
    def length(self) -> int:
        return max((len(v) for v in self.coeffs.values()), default=0)

    def mode(self, n: int, size: int | None = None) -> np.ndarray:
        """Mode-``n`` coefficients zero-padded (or cut) to ``size``."""
        v = self.coeffs.get(n, np.zeros(0))
        if size is None:
            return v
        out = np.zeros(size, dtype=np.result_type(v, float))
        m = min(size, len(v))
        out[:m] = v[:m]
        return out

    def in_space(self, space: WeightedSpace | None) -> "GnsVector":
        return GnsVector(self.coeffs, space)

    def _binary(self, other: "GnsVector", op) -> "GnsVector":
        if self.space is not None and other.space is not None and self.space != other.space:
            raise SpaceMismatchError("vectors live in different spaces")
        out = {}
        for n in set(self.coeffs) | set(other.coeffs):
            size = max(len(self.coeffs.get(n, ())), len(other.coeffs.get(n, ())))
            out[n] = op(self.mode(n, size), other.mode(n, size))
        return GnsVector(out, self.space or other.space)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, c):
        return GnsVector({n: c * v for n, v in self.coeffs.items()}, self.space)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def as_element(self) -> ToeplitzElement:
        """The vector read as an algebra element with finitely supported symbols."""
        return ToeplitzElement(
            {n: DiagonalSymbol(EventuallyConstant(v, 0.0), len(v)) for n, v in self.coeffs.items() if len(v)}
        )

    @classmethod
    def from_element(cls, x: ToeplitzElement, size: int, space: WeightedSpace | None = None) -> "GnsVector":
        """Coefficients ``a_n(0..size-1)`` of ``x``, trailing zeros removed."""
        ks = np.arange(size)
        out = {}
        for n, a in x.modes.items():
            v = np.trim_zeros(np.asarray(a(ks)), "b")
            if v.size:
                out[n] = v
        return cls(out, space)

    def to_dict(self) -> dict:
        return {str(n): [_encode(z) for z in v] for n, v in self.coeffs.items()}

    @classmethod
    def from_dict(cls, d: dict, space: WeightedSpace | None = None) -> "GnsVector":
        return cls({int(n): np.array([_decode(z) for z in v]) for n, v in d.items()}, space)


def _space_of(f: GnsVector, g: GnsVector, space: WeightedSpace | None) -> WeightedSpace:
    spaces = [s for s in (f.space, g.space, space) if s is not None]
    if not spaces:
        raise SpaceMismatchError("no weighted space given for the inner product")
    if any(s != spaces[0] for s in spaces[1:]):
        raise SpaceMismatchError("inner product of vectors from different spaces")
    return spaces[0]


def inner(f: GnsVector, g: GnsVector, space: WeightedSpace | None = None) -> complex:
    """``(f, g)_w``, conjugate-linear in ``f``."""
    sp_ = _space_of(f, g, space)
    total = 0.0 + 0.0j
    for n in set(f.coeffs) & set(g.coeffs):
        size = min(len(f.coeffs[n]), len(g.coeffs[n]))
        if size == 0:
            continue
        wn = sp_.weights(n, size)
        total += np.sum(wn * np.conj(f.coeffs[n][:size]) * g.coeffs[n][:size])
    return complex(total)


def norm(f: GnsVector, space: WeightedSpace | None = None) -> float:
    return float(np.sqrt(max(inner(f, f, space).real, 0.0)))


def _materialize(x: ToeplitzElement, size: int, space) -> GnsVector:
    return GnsVector.from_element(x, size, space)


def act(a: ToeplitzElement, f: GnsVector) -> GnsVector:
    """Left multiplication ``pi_w(a) f = a f``."""
    if not f.coeffs:
        return GnsVector({}, f.space)
    size = f.length + f.max_mode + a.max_mode + 2
    return _materialize(multiply(a, f.as_element()), size, f.space)


def right_act(f: GnsVector, a: ToeplitzElement) -> GnsVector:
    """Right multiplication ``f a`` (used by the algebraic form of ``D``)."""
    if not f.coeffs:
        return GnsVector({}, f.space)
    size = f.length + f.max_mode + a.max_mode + 2
    return _materialize(multiply(f.as_element(), a), size, f.space)


def rotate(f: GnsVector, theta: float) -> GnsVector:
    """The unitary ``U_theta``: mode ``n`` is multiplied by ``exp(i n theta)``."""
    return GnsVector({n: (v if n == 0 else cmath.exp(1j * n * theta) * v) for n, v in f.coeffs.items()}, f.space)


def check_implementing(a: ToeplitzElement, theta: float, f: GnsVector, tol: float = 1e-12) -> bool:
    """``pi(rho_theta(a)) f == U_theta pi(a) U_theta^{-1} f`` within ``tol`` (relative)."""
    lhs = act(rho(a, theta), f)
    rhs = rotate(act(a, rotate(f, -theta)), theta)
    scale = max(norm(lhs), norm(rhs), 1e-300)
    return norm(lhs - rhs) <= tol * scale


def embed(x: ToeplitzElement, size: int, space: WeightedSpace | None = None) -> GnsVector:
    """``x`` as a vector of ``H_w``, truncated to ``k < size`` in every mode."""
    ks = np.arange(size)
    return GnsVector({n: np.asarray(a(ks)) for n, a in x.modes.items()}, space)


def window_index(modes: tuple[int, int], K: int):
    """``(mode, k)`` labels of a truncated window, in storage order."""
    lo, hi = modes
    ms = np.repeat(np.arange(lo, hi + 1), K)
    ks = np.tile(np.arange(K), hi - lo + 1)
    return ms, ks


def pi_matrix(a: ToeplitzElement, modes: tuple[int, int], K: int) -> sp.csr_matrix:
    """Coefficient matrix of ``f -> a f`` on modes ``[lo, hi]`` and ``k < K``.

    Basis vector ``(m, i)`` is sent to ``(m+n, i + max(0,-m) - max(0,-m-n))``
    with coefficient ``c_n(i + max(m, 0))`` for each mode ``n`` of ``a``;
    targets outside the window are dropped.  The matrix is unweighted: it
    acts on the coefficient arrays.
    """
    lo, hi = modes
    rows, cols, vals = [], [], []
    i = np.arange(K)
    for n in sorted(a.modes):
        c = a.column(n)
        for m in range(lo, hi + 1):
            q = m + n
            if q < lo or q > hi:
                continue
            j = i + max(0, -m) - max(0, -q)
            v = np.asarray(c(i + max(m, 0)))
            ok = (j >= 0) & (j < K) & (v != 0)
            rows.append((q - lo) * K + j[ok])
            cols.append((m - lo) * K + i[ok])
            vals.append(v[ok])
    dim = (hi - lo + 1) * K
    if not vals:
        return sp.csr_matrix((dim, dim))
    vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
