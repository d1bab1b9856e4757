"""Special-function kernels: Hermite polynomials and functions, Gauss-Hermite
rules, the Hermite product linearization, factorial/binomial helpers.

Hermite polynomials use the physicists' convention, H_1(x) = 2x, orthogonal
against exp(-x**2).  The probabilists' He_n would silently change every
density built on top of these kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError

MAX_QUADRATURE_NODES = 512
DEFAULT_QUADRATURE_NODES = 200

# rescale threshold for the log-scaled recurrence
_BIG = 1e150
_LOG_BIG = math.log(_BIG)


def _check_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("argument must be finite")
    return arr


def _check_degree(n):
    if int(n) != n or n < 0:
        raise DomainError(f"degree must be a non-negative integer, got {n!r}")
    return int(n)


def hermite_poly(n, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence.

    Accepts a scalar or an array ``x``; returns the same shape.
    """
    n = _check_degree(n)
    x = _check_finite(x)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def hermite_fn_table(nmax, xi):
    """Dimensionless oscillator eigenfunctions psi_0..psi_nmax at ``xi``.

    Uses the normalized recurrence

        psi_{k+1} = sqrt(2/(k+1)) xi psi_k - sqrt(k/(k+1)) psi_{k-1}

    so no H_k or k! is ever formed.  Returns shape ``(nmax + 1,) + xi.shape``.
    """
    nmax = _check_degree(nmax)
    xi = _check_finite(xi)
    out = np.empty((nmax + 1,) + xi.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * xi * xi)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for k in range(1, nmax):
        out[k + 1] = (math.sqrt(2.0 / (k + 1)) * xi * out[k]
                      - math.sqrt(k / (k + 1)) * out[k - 1])
    return out


def hermite_fn(n, x, p=None):
    """Normalized eigenfunction psi_n(x) of the oscillator with params ``p``.

    psi_n(x) = (m w / pi hbar)^(1/4) (2^n n!)^(-1/2) H_n(xi) exp(-xi^2/2),
    xi = sqrt(m w / hbar) x.  ``p=None`` means m = w = hbar = 1.
    """
    n = _check_degree(n)
    x = _check_finite(x)
    scale = 1.0 if p is None else math.sqrt(p.mass * p.omega / p.hbar)
    vals = hermite_fn_table(n, scale * x)[n] * math.sqrt(scale)
    return vals if vals.ndim else float(vals)


def hermite_norm_scaled(nmax, y):
    """Orthonormal Hermite polynomials h_k = psi_k(y) exp(y^2/2), k <= nmax,
    returned as ``(mantissa, log_scale)`` with h_k = mantissa * exp(log_scale).

    The pair never overflows, whatever the degree or the argument.
    """
    nmax = _check_degree(nmax)
    y = _check_finite(y)
    mant = np.empty((nmax + 1,) + y.shape)
    logs = np.zeros((nmax + 1,) + y.shape)
    mant[0] = np.pi ** -0.25
    scale = np.zeros(y.shape)
    prev = np.zeros(y.shape)
    cur = mant[0].copy()
    for k in range(nmax):
        nxt = math.sqrt(2.0 / (k + 1)) * y * cur - math.sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _BIG
        if np.any(big):
            cur = np.where(big, cur / _BIG, cur)
            prev = np.where(big, prev / _BIG, prev)
            scale = scale + big * _LOG_BIG
        mant[k + 1] = cur
        logs[k + 1] = scale
    return mant, logs


@lru_cache(maxsize=4096)
def ln_factorial(n):
    """log(n!), exact to rounding."""
    n = _check_degree(n)
    if n <= 1000:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1.0)


_EXACT_BINOMIAL_MAX = 62


def binomial(n, r):
    """C(n, r); exact integer arithmetic up to n = 62, log-scale beyond."""
    n, r = _check_degree(n), _check_degree(r)
    if r > n:
        raise DomainError(f"binomial({n}, {r}) needs r <= n")
    if n <= _EXACT_BINOMIAL_MAX:
        return float(math.comb(n, r))
    return math.exp(ln_binomial(n, r))


def ln_binomial(n, r):
    n, r = _check_degree(n), _check_degree(r)
    if r > n:
        raise DomainError(f"binomial({n}, {r}) needs r <= n")
    return ln_factorial(n) - ln_factorial(r) - ln_factorial(n - r)


@dataclass(frozen=True)
class HermiteExpansion:
    """Finite sum  sum_d terms[d] * H_d(x)."""

    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        for d, c in self.terms.items():
            if not math.isfinite(c):
                raise DomainError(f"non-finite coefficient at degree {d}")

    @property
    def degrees(self):
        return sorted(self.terms, reverse=True)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for d, c in self.terms.items():
            total = total + c * hermite_poly(d, x)
        return total if total.ndim else float(total)


def hermite_product_linearize(m, n):
    """Expand H_m H_n = sum_r 2^r r! C(m,r) C(n,r) H_{m+n-2r}."""
    m, n = _check_degree(m), _check_degree(n)
    terms = {}
    for r in range(min(m, n) + 1):
        terms[m + n - 2 * r] = float(2 ** r * math.factorial(r)
                                     * math.comb(m, r) * math.comb(n, r))
    return HermiteExpansion(terms)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Hermite rule for the weight exp(-y^2) on the real line.

    ``log_weights`` carries the weights without underflow; ``integrate``
    uses ``weights * exp(nodes**2)`` so integrands may be passed whole,
    Gaussian factor included.
    """

    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self):
        for arr in (self.nodes, self.weights, self.log_weights):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.nodes)

    @property
    def scaled_weights(self):
        return np.exp(self.log_weights + self.nodes ** 2)

    def integrate_weighted(self, g):
        """sum_i w_i g(y_i)  ~  int exp(-y^2) g(y) dy."""
        return float(np.dot(self.weights, g(self.nodes)))

    def integrate(self, f, center=0.0, scale=1.0):
        """int f(x) dx for f roughly Gaussian around ``center`` with width ``scale``."""
        x = center + scale * self.nodes
        return float(scale * np.dot(self.scaled_weights, f(x)))


@lru_cache(maxsize=64)
def gauss_hermite_rule(k=DEFAULT_QUADRATURE_NODES):
    """k-point Gauss-Hermite rule.

    Nodes come from the symmetric tridiagonal Jacobi matrix (Golub-Welsch),
    polished by Newton steps on the orthonormal h_k; weights come from the
    Christoffel formula w_i = 1 / (k h_{k-1}(y_i)^2), which keeps full
    relative accuracy in the tails where eigenvector components do not.
    """
    if int(k) != k or not 1 <= k <= MAX_QUADRATURE_NODES:
        raise DomainError(f"node count must be in [1, {MAX_QUADRATURE_NODES}], got {k!r}")
    k = int(k)
    if k == 1:
        y = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, k) / 2.0)
        y = eigh_tridiagonal(np.zeros(k), off, eigvals_only=True)
        for _ in range(2):
            mant, logs = hermite_norm_scaled(k, y)
            # h_k' = sqrt(2k) h_{k-1}
            ratio = mant[k] / mant[k - 1] * np.exp(logs[k] - logs[k - 1])
            y = y - ratio / math.sqrt(2.0 * k)
        y = 0.5 * (y - y[::-1])
        if k % 2:
            y[k // 2] = 0.0
    mant, logs = hermite_norm_scaled(k - 1, y)
    log_w = -math.log(k) - 2.0 * (np.log(np.abs(mant[k - 1])) + logs[k - 1])
    log_w = 0.5 * (log_w + log_w[::-1])
    return QuadratureRule(nodes=y, weights=np.exp(log_w), log_weights=log_w)
