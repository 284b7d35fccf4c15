"""The covariant implementation ``D f = U beta(K) f - f U alpha(K)`` and its parametrices.

``D`` raises the Fourier mode by one.  On mode ``n`` it acts through the
bidiagonal operators

    n >= 0:  D_n f(k) = beta(k+n) f(k) - alpha(k) f(k+1)          l2_w    -> l2_w'
    n <  0:  D_n f(k) = alpha(k-n-1) f(k) - beta(k-1) f(k-1)       l2_{w_n} -> l2_{w'_{n+1}}

with ``alpha(k) = beta(k) mu(k+1)/mu(k)``.  For ``n < 0`` the mode-``(n+1)``
component of ``D f`` is ``-D_n f_n``: the bidiagonal operators above are
normalized so that the lower-triangular parametrix below inverts them.

Parametrices, with ``P_n(k) = beta(k) ... beta(k+n-1)`` (empty product 1):

* ``n >= N``: ``Q_n g(k) = sum_{j>=k} P_n(k) mu(j) / (P_{n+1}(j) mu(k)) g(j)``,
  a two-sided inverse;
* ``0 <= n < N``: the same sum minus a rank-one term along the kernel
  vector ``h_n = P_n / mu``, so that ``Q_n D_n = I - C_n``;
* ``n < 0``: ``Q_n g(k) = sum_{j<=k} P_{m-1}(j) mu(j+m-1) / (P_m(k) mu(k+m)) g(j)``
  with ``m = -n``, a two-sided inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .gns import GnsVector, WeightedSpace, act, pi_matrix, right_act
from .sequences import (
    PowerLawFamily,
    Sequence,
    SeriesSum,
    SingularSymbolError,
    WeightSequence,
    alpha_from,
    nested_sum,
    sum_series,
)
from .toeplitz import DiagonalSymbol, ToeplitzElement, monomial, multiply

__all__ = [
    "DiracData",
    "ModeOperator",
    "KernelVector",
    "Membership",
    "ModeParametrix",
    "HSNorm",
    "DiracAssembly",
    "apply_mode",
    "apply_D",
    "apply_D_algebraic",
    "kernel_vector",
    "kernel_membership",
    "build_parametrix",
    "apply_parametrix",
    "hs_norm",
    "adjoint_apply",
    "assemble",
    "orthonormal_section",
]


def _order(*terms):
    """Sum of (coefficient, order) pairs; ``None`` if unknown or ill-defined."""
    total = 0.0
    for coef, o in terms:
        if coef == 0:
            continue
        if o is None:
            return None
        total += coef * o
    return None if math.isnan(total) else total


@dataclass(frozen=True)
class DiracData:
    """The sequences that determine ``D``: ``beta``, ``mu``, the weights, and ``alpha``."""

    beta: Sequence
    mu: Sequence
    w: WeightSequence
    w_prime: WeightSequence
    alpha: Sequence | None = None

    def __post_init__(self):
        if self.alpha is None:
            object.__setattr__(self, "alpha", alpha_from(self.beta, self.mu))

    @classmethod
    def from_family(cls, family: PowerLawFamily) -> "DiracData":
        return cls(family.beta, family.mu, family.w, family.w_prime)

    @property
    def H_w(self) -> WeightedSpace:
        return WeightedSpace(self.w, "w")

    @property
    def H_w_prime(self) -> WeightedSpace:
        return WeightedSpace(self.w_prime, "w'")

    @property
    def real(self) -> bool:
        return self.beta.real and self.mu.real and self.alpha.real

    def log_products(self, n: int, size: int) -> np.ndarray:
        """``log P_n(k)`` for ``k < size`` (complex)."""
        if n == 0:
            return np.zeros(size, dtype=complex)
        lb = self.beta.log(np.arange(size + n))
        out = np.zeros(size, dtype=complex)
        for i in range(n):
            out += lb[i : i + size]
        return out

    def log_products_at(self, n: int, k: np.ndarray) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        out = np.zeros(k.shape, dtype=complex)
        for i in range(n):
            out += self.beta.log(k + i)
        return out


def _finish(vals: np.ndarray, real: bool) -> np.ndarray:
    return np.real(vals) if real and np.iscomplexobj(vals) else vals


# ---------------------------------------------------------------------------
# mode operators


class ModeOperator:
    """The bidiagonal operator ``D_n`` between weighted sequence spaces."""

    def __init__(self, data: DiracData, n: int):
        self.data = data
        self.n = int(n)

    @property
    def sign(self) -> int:
        """Sign with which ``D_n`` enters the mode decomposition of ``D``."""
        return 1 if self.n >= 0 else -1

    @property
    def domain_weight(self) -> WeightSequence:
        return self.data.w if self.n >= 0 else self.data.w.shifted(self.n)

    @property
    def codomain_weight(self) -> WeightSequence:
        return self.data.w_prime if self.n >= 0 else self.data.w_prime.shifted(self.n + 1)

    def diagonal(self, k) -> np.ndarray:
        k = np.asarray(k)
        d = self.data
        return d.beta(k + self.n) if self.n >= 0 else d.alpha(k - self.n - 1)

    def off_diagonal(self, k) -> np.ndarray:
        """``alpha(k)`` (coupling to ``f(k+1)``) or ``beta(k)`` (coupling ``f(k)`` into row ``k+1``)."""
        k = np.asarray(k)
        return self.data.alpha(k) if self.n >= 0 else self.data.beta(k)

    def output_size(self, size: int) -> int:
        return size if self.n >= 0 else size + 1

    def apply(self, f) -> np.ndarray:
        """``D_n f`` for a finitely supported ``f`` (arrays along axis 0)."""
        f = np.asarray(f)
        L = f.shape[0]
        if L == 0:
            return f.copy()
        ks = np.arange(self.output_size(L))
        diag = self.diagonal(ks)
        off = self.off_diagonal(ks)
        shape = (len(ks),) + f.shape[1:]
        fp = np.zeros(shape, dtype=np.result_type(f, diag, off))
        fp[:L] = f
        ex = (slice(None),) + (None,) * (f.ndim - 1)
        out = diag[ex] * fp
        if self.n >= 0:
            out[:-1] -= off[:-1][ex] * fp[1:]
        else:
            out[1:] -= off[:-1][ex] * fp[:-1]
        return out

    def matrix(self, K: int) -> np.ndarray:
        """Raw ``K x K`` section of ``D_n``."""
        return self.apply(np.eye(K))[:K]

    def adjoint_apply(self, g) -> np.ndarray:
        """The adjoint for the weighted inner products, ``<D_n f, g>' = <f, D_n* g>``."""
        g = np.asarray(g)
        L = g.shape[0]
        if L == 0:
            return g.copy()
        size = L + 1 if self.n >= 0 else L
        ks = np.arange(size + 1)
        w_in = self.domain_weight(ks[:size])
        w_out = self.codomain_weight(ks)
        diag = np.conj(self.diagonal(ks[:size]))
        off = np.conj(self.off_diagonal(ks))
        ex = (slice(None),) + (None,) * (g.ndim - 1)
        gp = np.zeros((size + 1,) + g.shape[1:], dtype=np.result_type(g, diag, off, float))
        gp[:L] = g
        wg = w_out[ex] * gp
        out = diag[ex] * wg[:size]
        if self.n >= 0:
            out[1:] -= off[: size - 1][ex] * wg[: size - 1]
        else:
            out -= off[:size][ex] * wg[1 : size + 1]
        return out / w_in[ex]


def apply_mode(op: ModeOperator, f) -> np.ndarray:
    return op.apply(f)


def adjoint_apply(data: DiracData, n: int, g) -> np.ndarray:
    return ModeOperator(data, n).adjoint_apply(g)


def apply_D(data: DiracData, f):
    """``D f`` mode by mode.

    Accepts a :class:`GnsVector` (finitely supported; the result lives in
    ``H_w'``) or a :class:`ToeplitzElement` (routed through the algebra).
    """
    if isinstance(f, ToeplitzElement):
        ub = monomial(1, DiagonalSymbol(data.beta, None))
        ua = monomial(1, DiagonalSymbol(data.alpha, None))
        return multiply(ub, f) - multiply(f, ua)
    out = {}
    for n, fn in f.coeffs.items():
        op = ModeOperator(data, n)
        out[n + 1] = op.sign * op.apply(fn)
    return GnsVector(out, data.H_w_prime)


def apply_D_algebraic(data: DiracData, f: GnsVector) -> GnsVector:
    """``U beta(K) f - f U alpha(K)`` through left/right multiplication."""
    ub = monomial(1, DiagonalSymbol(data.beta, None))
    ua = monomial(1, DiagonalSymbol(data.alpha, None))
    out = act(ub, f) - right_act(f, ua)
    return out.in_space(data.H_w_prime)


# ---------------------------------------------------------------------------
# kernel vectors


class KernelVector:
    """``h_n(k) = beta(k) ... beta(k+n-1) / mu(k)``, spanning the formal kernel of ``D_n``."""

    def __init__(self, data: DiracData, n: int):
        if n < 0:
            raise ValueError("kernel vectors exist for n >= 0 only")
        self.data = data
        self.n = int(n)

    def log(self, k) -> np.ndarray:
        return self.data.log_products_at(self.n, k) - self.data.mu.log(k)

    def __call__(self, k):
        scalar = np.ndim(k) == 0
        vals = _finish(np.exp(self.log(k)), self.data.real)
        return vals[0] if scalar else vals

    def values(self, size: int) -> np.ndarray:
        ks = np.arange(size)
        return _finish(np.exp(self.data.log_products(self.n, size) - self.data.mu.log(ks)), self.data.real)


def kernel_vector(data: DiracData, n: int) -> KernelVector:
    return KernelVector(data, n)


@dataclass(frozen=True)
class Membership:
    """Whether ``h_n`` lies in ``l2_w``, with the partial-sum evidence."""

    n: int
    in_space: bool | None
    series: SeriesSum


def kernel_membership(data: DiracData, n: int, w: WeightSequence | None = None) -> Membership:
    """Decide ``sum_k |h_n(k)|**2 w(k) < inf``."""
    w = data.w if w is None else w
    h = KernelVector(data, n)

    def log_term(k):
        return 2 * np.real(h.log(k)) + w.log_abs(k)

    order = _order((2 * n, data.beta.order), (-2, data.mu.order), (1, w.order))
    s = sum_series(log_term, order, tol=1e-10)
    return Membership(n, s.converges, s)


# ---------------------------------------------------------------------------
# parametrices

UPPER = "inverse-upper"
CORRECTED = "corrected"
LOWER = "inverse-lower"


@dataclass(frozen=True)
class HSNorm:
    """Hilbert-Schmidt norm with an error bound; ``norm`` is ``inf`` when divergent."""

    norm: float
    bound: float
    squared: SeriesSum

    @property
    def finite(self) -> bool:
        return self.squared.converges is True


class ModeParametrix:
    """Parametrix ``Q_n`` of ``D_n`` in one of three regimes."""

    def __init__(self, data: DiracData, n: int, regime: str):
        if regime not in (UPPER, CORRECTED, LOWER):
            raise ValueError(f"unknown regime {regime!r}")
        if (regime == LOWER) != (n < 0):
            raise ValueError(f"regime {regime} does not apply to mode {n}")
        self.data = data
        self.n = int(n)
        self.regime = regime

    @property
    def operator(self) -> ModeOperator:
        return ModeOperator(self.data, self.n)

    @property
    def defect_rank(self) -> int:
        return 1 if self.regime == CORRECTED else 0

    # kernels on a square window

    def _logs(self, size: int):
        d, n = self.data, self.n
        ks = np.arange(size)
        if n >= 0:
            return d.log_products(n, size), d.log_products(n + 1, size), d.mu.log(ks)
        m = -n
        return d.log_products(m - 1, size), d.log_products(m, size), d.mu.log(ks + m - 1), d.mu.log(ks + m)

    def tilde_kernel(self, size: int) -> np.ndarray:
        """Upper-triangular kernel ``P_n(k) mu(j) / (P_{n+1}(j) mu(k))``, ``j >= k`` (``n >= 0``)."""
        if self.n < 0:
            raise ValueError("the upper-triangular kernel is defined for n >= 0")
        lpn, lpn1, lmu = self._logs(size)
        logk = (lpn - lmu)[:, None] + (lmu - lpn1)[None, :]
        mask = np.triu(np.ones((size, size), dtype=bool))
        out = np.zeros((size, size), dtype=complex)
        out[mask] = np.exp(logk[mask])
        return _finish(out, self.data.real)

    def kernel_matrix(self, size: int) -> np.ndarray:
        """Matrix ``Q_n(k, j)`` for ``k, j < size``.

        In the corrected regime the rank-one term cancels the upper triangle
        exactly and the kernel is ``-P_n(k) mu(j) / (mu(k) P_{n+1}(j))`` for
        ``j < k``.
        """
        if self.regime == UPPER:
            return self.tilde_kernel(size)
        if self.regime == CORRECTED:
            lpn, lpn1, lmu = self._logs(size)
            logk = (lpn - lmu)[:, None] + (lmu - lpn1)[None, :]
            mask = np.tril(np.ones((size, size), dtype=bool), -1)
            out = np.zeros((size, size), dtype=complex)
            out[mask] = -np.exp(logk[mask])
            return _finish(out, self.data.real)
        lpm1, lpm, lmu_j, lmu_k = self._logs(size)
        logk = (-lpm - lmu_k)[:, None] + (lpm1 + lmu_j)[None, :]
        mask = np.tril(np.ones((size, size), dtype=bool))
        out = np.zeros((size, size), dtype=complex)
        out[mask] = np.exp(logk[mask])
        return _finish(out, self.data.real)

    # action

    def correction_functional(self, g) -> complex:
        """``(Q~ g)(0) / P_n(0)`` (corrected regime)."""
        g = np.asarray(g)
        qg0 = self.tilde_kernel(g.shape[0])[0] @ g
        return qg0 / np.exp(self.data.log_products(self.n, 1)[0])

    def defect(self, f, size: int | None = None) -> np.ndarray:
        """``C_n f = f(0) / P_n(0) * h_n``; zero outside the corrected regime."""
        f = np.asarray(f)
        size = size or f.shape[0]
        if self.regime != CORRECTED:
            return np.zeros((size,) + f.shape[1:], dtype=f.dtype)
        h = KernelVector(self.data, self.n).values(size)
        c = f[0] / np.exp(self.data.log_products(self.n, 1)[0])
        return _finish(np.multiply.outer(h, c) if f.ndim > 1 else h * c, self.data.real and np.isrealobj(f))

    def apply(self, g, size: int | None = None) -> np.ndarray:
        """``Q_n g`` on ``[0, size)`` for finitely supported ``g``.

        Upper-triangular outputs vanish beyond the support of ``g``; the
        other regimes produce infinitely supported outputs, evaluated on
        demand up to ``size``.
        """
        g = np.asarray(g)
        L = g.shape[0]
        size = max(L, size or L)
        gp = np.zeros((size,) + g.shape[1:], dtype=g.dtype)
        gp[:L] = g
        if self.regime == UPPER:
            return self.tilde_kernel(size) @ gp
        if self.regime == CORRECTED:
            qt = self.tilde_kernel(size) @ gp
            h = KernelVector(self.data, self.n).values(size)
            c = qt[0] / np.exp(self.data.log_products(self.n, 1)[0])
            if not self.data.real:
                qt = qt.astype(complex)
            return qt - (np.multiply.outer(h, c) if gp.ndim > 1 else c * h)
        return self.kernel_matrix(size) @ gp

    # Hilbert-Schmidt norm

    def hs_norm(self, horizon: int = 1 << 20) -> HSNorm:
        """``||Q_n||_HS`` as an operator between the weighted spaces.

        ``sum_{k,j} |Q_n(k,j)|**2 w_dom(k) / w_cod(j)`` where ``w_dom`` and
        ``w_cod`` are the weights of the target and source of ``Q_n``.
        """
        d, n = self.data, self.n
        beta_o, mu_o, w_o, wp_o = d.beta.order, d.mu.order, d.w.order, d.w_prime.order
        lb_cache = {}

        def lb(k):
            key = (int(k[0]), len(k))
            if key not in lb_cache:
                lb_cache.clear()
                lb_cache[key] = d.beta.log(np.arange(k[0], k[-1] + abs(n) + 2))
            return lb_cache[key]

        def logprod(count, k):
            k = np.atleast_1d(np.asarray(k, dtype=np.int64))
            if count == 0:
                return np.zeros(k.shape)
            if len(k) > 1 and np.all(np.diff(k) == 1):
                arr = np.real(lb(k))
                out = np.zeros(len(k))
                for i in range(count):
                    out += arr[i : i + len(k)]
                return out
            return np.real(d.log_products_at(count, k))

        if n >= 0:
            def log_src(j):  # |mu(j)|^2 / (|P_{n+1}(j)|^2 w'(j))
                return 2 * (np.real(d.mu.log(j)) - logprod(n + 1, j)) - d.w_prime.log_abs(j)

            def log_dst(k):  # |P_n(k)|^2 w(k) / |mu(k)|^2
                return 2 * (logprod(n, k) - np.real(d.mu.log(k))) + d.w.log_abs(k)

            o_src = _order((2, mu_o), (-2 * (n + 1), beta_o), (-1, wp_o))
            o_dst = _order((2 * n, beta_o), (-2, mu_o), (1, w_o))
            if self.regime == UPPER:
                s = nested_sum(log_src, log_dst, o_src, o_dst, horizon=horizon)
            else:
                s = nested_sum(log_dst, log_src, o_dst, o_src, strict=True, horizon=horizon)
        else:
            m = -n
            wsh, wpsh = d.w.shifted(n), d.w_prime.shifted(n + 1)

            def log_out(k):  # w(k+m) / (|P_m(k)|^2 |mu(k+m)|^2)
                return wsh.log_abs(k) - 2 * (logprod(m, k) + np.real(d.mu.log(np.asarray(k) + m)))

            def log_in(j):  # |P_{m-1}(j)|^2 |mu(j+m-1)|^2 / w'(j+m-1)
                return 2 * (logprod(m - 1, j) + np.real(d.mu.log(np.asarray(j) + m - 1))) - wpsh.log_abs(j)

            o_out = _order((1, w_o), (-2 * m, beta_o), (-2, mu_o))
            o_in = _order((2 * (m - 1), beta_o), (2, mu_o), (-1, wp_o))
            s = nested_sum(log_out, log_in, o_out, o_in, horizon=horizon)
        if s.converges is not True:
            return HSNorm(math.inf, math.inf, s)
        v, e = s.value, s.tail_bound
        nrm = math.sqrt(v)
        return HSNorm(nrm, e / (nrm + math.sqrt(max(v - e, 0.0))) if e > 0 else 0.0, s)


def build_parametrix(data: DiracData, n: int, N: int) -> ModeParametrix:
    """Regime-correct parametrix of ``D_n`` given the kernel count ``N``."""
    if n < 0:
        return ModeParametrix(data, n, LOWER)
    if data.mu(0) != 1:
        raise SingularSymbolError("mu(0) must be 1")
    return ModeParametrix(data, n, UPPER if n >= N else CORRECTED)


def apply_parametrix(q: ModeParametrix, g, size: int | None = None) -> np.ndarray:
    return q.apply(g, size)


def hs_norm(q: ModeParametrix, horizon: int = 1 << 20) -> HSNorm:
    return q.hs_norm(horizon)


# ---------------------------------------------------------------------------
# the even Dirac operator on H_w' (+) H_w


@dataclass(frozen=True)
class DiracAssembly:
    """Truncation of ``[[0, D], [D*, 0]]`` in weight-orthonormal coordinates.

    ``H_w'`` carries modes ``lo+1 .. hi+1`` and ``H_w`` modes ``lo .. hi``,
    each truncated to ``k < K``; ``D`` maps the mode-``n`` block of ``H_w``
    to the mode-``(n+1)`` block of ``H_w'``, so the ``D`` block is
    block-diagonal.
    """

    data: DiracData
    K: int
    modes: tuple[int, int]
    D_block: sp.csr_matrix
    Dstar_block: sp.csr_matrix
    sqrt_w: np.ndarray
    sqrt_wp: np.ndarray

    @property
    def dim_w(self) -> int:
        return self.sqrt_w.size

    @property
    def dim_wp(self) -> int:
        return self.sqrt_wp.size

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        return sp.bmat([[None, self.D_block], [self.Dstar_block, None]], format="csr")

    @cached_property
    def grading(self) -> sp.csr_matrix:
        return sp.diags(np.concatenate([np.ones(self.dim_wp), -np.ones(self.dim_w)])).tocsr()

    def pi(self, a: ToeplitzElement) -> sp.csr_matrix:
        """``pi(a) = pi_w'(a) (+) pi_w(a)`` in orthonormal coordinates."""
        lo, hi = self.modes
        Ap = _similar(pi_matrix(a, (lo + 1, hi + 1), self.K), self.sqrt_wp)
        A = _similar(pi_matrix(a, (lo, hi), self.K), self.sqrt_w)
        return sp.block_diag([Ap, A], format="csr")

    def commutator(self, a: ToeplitzElement) -> sp.csr_matrix:
        P = self.pi(a)
        return (self.matrix @ P - P @ self.matrix).tocsr()

    def hermitian_residual(self) -> float:
        M = self.matrix
        diff = abs(M - M.getH()).max()
        return float(diff / max(abs(M).max(), 1e-300))

    def grading_residual(self) -> float:
        G = self.grading
        R = G @ self.matrix + self.matrix @ G
        return float(abs(R).max()) if R.nnz else 0.0

    def grading_commutator(self, a: ToeplitzElement) -> float:
        G, P = self.grading, self.pi(a)
        R = G @ P - P @ G
        return float(abs(R).max()) if R.nnz else 0.0

    def mode_block(self, n: int) -> np.ndarray:
        """Orthonormalized ``K x K`` block of ``D`` from mode ``n`` to ``n+1``."""
        lo, _ = self.modes
        i = (n - lo) * self.K
        return self.D_block[i : i + self.K, i : i + self.K].toarray()


def _similar(M: sp.csr_matrix, s: np.ndarray) -> sp.csr_matrix:
    """``diag(s) M diag(1/s)``, exact on entries with equal row and column scale."""
    M = M.tocoo()
    ls = np.log(s)
    vals = M.data * np.exp(ls[M.row] - ls[M.col])
    return sp.csr_matrix((vals, (M.row, M.col)), shape=M.shape)


def orthonormal_section(data: DiracData, n: int, K: int) -> np.ndarray:
    """``sign_n * W'^{1/2} D_n W^{-1/2}`` on ``k < K``: the mode block of ``D``."""
    op = ModeOperator(data, n)
    ks = np.arange(K)
    so = np.sqrt(op.codomain_weight(ks))
    si = np.sqrt(op.domain_weight(ks))
    return op.sign * (so[:, None] * op.matrix(K) / si[None, :])


def assemble(data: DiracData, K: int, modes: tuple[int, int] = (-2, 2)) -> DiracAssembly:
    """Build the truncated even Dirac operator.

    The ``D*`` block is assembled from :meth:`ModeOperator.adjoint_apply`
    rather than by transposing, so hermiticity of the result is a check on
    the weighted adjoint.
    """
    if K < 8:
        raise ValueError("truncation K must be at least 8")
    lo, hi = modes
    ks = np.arange(K)
    blocks, star_blocks, sw, swp = [], [], [], []
    for n in range(lo, hi + 1):
        op = ModeOperator(data, n)
        si = np.sqrt(op.domain_weight(ks))
        so = np.sqrt(op.codomain_weight(ks))
        sw.append(si)
        swp.append(so)
        M = op.sign * op.matrix(K)
        S = op.sign * op.adjoint_apply(np.eye(K))[:K]
        blocks.append(sp.csr_matrix(so[:, None] * M / si[None, :]))
        star_blocks.append(sp.csr_matrix(si[:, None] * S / so[None, :]))
    return DiracAssembly(
        data,
        K,
        (lo, hi),
        sp.block_diag(blocks, format="csr"),
        sp.block_diag(star_blocks, format="csr"),
        np.concatenate(sw),
        np.concatenate(swp),
    )
