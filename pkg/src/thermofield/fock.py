"""Brute-force reference states on a truncated doubled Fock space.

Every state is built from operator exponentials acting on number states:
squeeze, then displace, tensor with the tilde conjugate, thermalize with
exp{-theta (a a~ - a^dag a~^dag)}, evolve with exp{-i wt (a^dag a - a~^dag a~)}.
No closed-form wavefunction is used anywhere in here; that independence is
the point of the module.

Exponentials are applied on a padded working space and the result cropped
back to the requested cutoff, so ``1 - sum |c|^2`` measures the probability
the cutoff failed to hold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, CutoffError, DomainError
from .model import Displacement, OscillatorParams, Squeeze, ThermalParams
from .special_fn import hermite_fn_table

UNIT = OscillatorParams()

DEFAULT_TOL = 1e-12
MAX_DEFICIT = 1e-10
MAX_CUTOFF = 512
_TAYLOR_MAX_TERMS = 80
# stripe eigendecompositions are cached up to this working cutoff
_STRIPE_CACHE_MAX = 200


def working_cutoff(N):
    return N + N // 4 + 8


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Sparse banded operator; ``lower``/``upper`` are the band widths."""

    matrix: sp.csr_matrix
    lower: int
    upper: int

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(sp.csr_matrix(self.matrix @ other.matrix),
                                  self.lower + other.lower, self.upper + other.upper)
        return self.matrix @ other

    def __mul__(self, scalar):
        return OperatorMatrix(sp.csr_matrix(self.matrix * scalar), self.lower, self.upper)

    __rmul__ = __mul__

    def __add__(self, other):
        return OperatorMatrix(sp.csr_matrix(self.matrix + other.matrix),
                              max(self.lower, other.lower), max(self.upper, other.upper))

    def __sub__(self, other):
        return self + (-1.0) * other

    @property
    def H(self):
        return OperatorMatrix(sp.csr_matrix(self.matrix.conj().T), self.upper, self.lower)

    def toarray(self):
        return self.matrix.toarray()

    def norm1(self):
        return float(abs(self.matrix).sum(axis=0).max()) if self.matrix.nnz else 0.0


def ladder_matrices(N):
    """Annihilation and creation matrices on |0>..|N>."""
    if int(N) != N or N < 1:
        raise DomainError(f"cutoff must be an integer >= 1, got {N!r}")
    N = int(N)
    a = sp.diags(np.sqrt(np.arange(1, N + 1, dtype=float)), 1,
                 shape=(N + 1, N + 1), format="csr").astype(complex)
    a_op = OperatorMatrix(a, 0, 1)
    return a_op, a_op.H


def number_operator(N):
    return OperatorMatrix(sp.diags(np.arange(N + 1, dtype=float), 0, format="csr")
                          .astype(complex), 0, 0)


def matrix_exp_apply(M, v, tol=DEFAULT_TOL, max_terms=_TAYLOR_MAX_TERMS):
    """e^M v by scaled Taylor series.

    M is split into s = ceil(||M||_1) steps so each step has norm <= 1; each
    step's series stops once the newest term is below tol/s of ||v||, which
    bounds the total truncation error by about tol ||v||.
    """
    if isinstance(M, OperatorMatrix):
        mat, norm = M.matrix, M.norm1()
    else:
        mat = M
        norm = float(abs(mat).sum(axis=0).max()) if np.size(mat) else 0.0
    if not math.isfinite(norm):
        raise DomainError("operator norm is not finite")
    v = np.asarray(v, dtype=complex)
    if norm == 0.0:
        return v.copy()
    steps = max(1, math.ceil(norm))
    vnorm = np.linalg.norm(v)
    if vnorm == 0.0:
        return v.copy()
    per_step = tol / steps * vnorm
    out = v.copy()
    for _ in range(steps):
        term = out
        acc = out.copy()
        for j in range(1, max_terms + 1):
            term = (mat @ term) / (steps * j)
            acc += term
            if np.linalg.norm(term) <= per_step:
                break
        else:
            raise ConvergenceError("Taylor series did not converge",
                                   residual=float(np.linalg.norm(term)))
        out = acc
    return out


@dataclass(frozen=True, eq=False)
class FockVector1:
    coefficients: np.ndarray

    @property
    def cutoff(self):
        return len(self.coefficients) - 1

    @property
    def deficit(self):
        return 1.0 - float(np.vdot(self.coefficients, self.coefficients).real)


@dataclass(frozen=True, eq=False)
class FockVector2:
    """Coefficients c[k, l] on |k> (x) |l~>."""

    coefficients: np.ndarray

    @property
    def cutoff(self):
        return self.coefficients.shape[0] - 1

    @property
    def deficit(self):
        c = self.coefficients
        return 1.0 - float(np.sum(c.real ** 2 + c.imag ** 2))


def _as_complex(value, cls):
    if isinstance(value, cls):
        return value
    return cls.from_complex(value)


def displaced_squeezed_number_vector(alpha, z, n, N, tol=DEFAULT_TOL, max_deficit=MAX_DEFICIT):
    """D(alpha) S(z) |n>, squeeze first, on |0>..|N>."""
    alpha = _as_complex(alpha, Displacement)
    z = _as_complex(z, Squeeze)
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    if 2 * n > N:
        raise DomainError(f"cutoff {N} leaves no headroom above n = {n}")
    M = working_cutoff(N)
    a, ad = ladder_matrices(M)
    v = np.zeros(M + 1, dtype=complex)
    v[n] = 1.0
    if not z.is_zero:
        gen = 0.5 * (z.z * (ad @ ad) - z.z.conjugate() * (a @ a))
        v = matrix_exp_apply(gen, v, tol)
    if alpha.alpha != 0:
        gen = alpha.alpha * ad - alpha.alpha.conjugate() * a
        v = matrix_exp_apply(gen, v, tol)
    out = FockVector1(v[:N + 1].copy())
    if out.deficit > max_deficit:
        raise CutoffError(f"cutoff {N} loses {out.deficit:.3e} of the norm",
                          deficit=out.deficit, cutoff=N)
    return out


def tilde_vector(v: FockVector1):
    """Tilde partner: coefficients conjugated (alpha~ = alpha*, z~ = z*)."""
    return FockVector1(np.conj(v.coefficients))


def tensor(v: FockVector1, w: FockVector1):
    return FockVector2(np.outer(v.coefficients, w.coefficients))


def doubled(v: FockVector1):
    """|psi> (x) |psi~>."""
    return tensor(v, tilde_vector(v))


def _stripe_index(d, L):
    m = np.arange(L)
    if d >= 0:
        return m + d, m
    return m, m - d


def _stripe_mode(M, d):
    L = M + 1 - d
    if L == 1:
        return np.zeros(1), np.ones((1, 1))
    m = np.arange(L - 1, dtype=float)
    return eigh_tridiagonal(np.zeros(L), np.sqrt((m + 1.0) * (m + 1.0 + d)))


def _stripe_modes(M):
    """Eigen-decomposition of every stripe generator on the working cutoff M.

    On the stripe k - l = d the generator -(a a~ - a^dag a~^dag) is real
    antisymmetric tridiagonal with couplings sqrt((m + 1)(m + 1 + |d|));
    conjugating by diag(i^m) turns it into -i J with J real symmetric.
    Large cutoffs are decomposed lazily, one stripe at a time.
    """
    if M > _STRIPE_CACHE_MAX:
        return (_stripe_mode(M, d) for d in range(M + 1))
    return _cached_stripe_modes(M)


@lru_cache(maxsize=8)
def _cached_stripe_modes(M):
    return tuple(_stripe_mode(M, d) for d in range(M + 1))


def thermalize(c: FockVector2, theta, tol=DEFAULT_TOL):
    """Apply exp{-theta (a a~ - a^dag a~^dag)} stripe by stripe."""
    if isinstance(theta, ThermalParams):
        theta = theta.theta
    theta = float(theta)
    if not theta >= 0:
        raise DomainError(f"thermal angle must be >= 0, got {theta!r}")
    if theta == 0.0:
        return FockVector2(c.coefficients.copy())
    N = c.cutoff
    M = working_cutoff(N)
    work = np.zeros((M + 1, M + 1), dtype=complex)
    work[:N + 1, :N + 1] = c.coefficients
    out = np.zeros_like(work)
    for d, (lam, V) in enumerate(_stripe_modes(M)):
        L = M + 1 - d
        phase = 1j ** (np.arange(L) % 4)
        prop = np.exp(-1j * theta * lam)
        for sd in ((d, -d) if d else (0,)):
            k, l = _stripe_index(sd, L)
            vec = work[k, l]
            if not np.any(vec):
                continue
            out[k, l] = phase * (V @ (prop * (V.T @ (vec / phase))))
    before = np.sum(np.abs(work) ** 2)
    after = np.sum(np.abs(out) ** 2)
    if abs(after - before) > tol * max(before, 1.0) * 100:
        raise ConvergenceError("thermal propagator lost unitarity",
                               residual=float(abs(after - before)))
    return FockVector2(out[:N + 1, :N + 1].copy())


def time_evolve(c: FockVector2, omega_t):
    """Free evolution under (a^dag a - a~^dag a~) hbar w: c[k,l] *= e^{-i wt (k - l)}."""
    k = np.arange(c.cutoff + 1)
    phase = np.exp(-1j * float(omega_t) * k)
    return FockVector2(c.coefficients * phase[:, None] * np.conj(phase)[None, :])


def synthesize(v: FockVector1, x, p: OscillatorParams = UNIT):
    """Position amplitude sum_k v_k psi_k(x) of a single-mode vector."""
    table = hermite_fn_table(v.cutoff, p.xi(x))
    return np.tensordot(v.coefficients, table, axes=(0, 0)) / math.sqrt(p.length)


def position_amplitude(c: FockVector2, x, x_tilde, p: OscillatorParams = UNIT):
    """Psi(x, x~) = sum_kl c_kl psi_k(x) psi_l(x~) at paired points."""
    x, x_tilde = np.broadcast_arrays(np.asarray(x, float), np.asarray(x_tilde, float))
    tx = hermite_fn_table(c.cutoff, p.xi(x.ravel()))
    tt = hermite_fn_table(c.cutoff, p.xi(x_tilde.ravel()))
    amp = np.einsum("ki,kl,li->i", tx, c.coefficients, tt) / p.length
    return amp.reshape(x.shape)


def marginal_density(c: FockVector2, x, p: OscillatorParams = UNIT):
    """int |Psi(x, x~)|^2 dx~ = sum_l |sum_k c_kl psi_k(x)|^2 by tilde orthonormality."""
    x = np.asarray(x, dtype=float)
    table = hermite_fn_table(c.cutoff, p.xi(x.ravel()))
    amp = table.T @ c.coefficients
    rho = np.sum(amp.real ** 2 + amp.imag ** 2, axis=1) / p.length
    return rho.reshape(x.shape) if x.ndim else float(rho[0])


def oracle_moments(c: FockVector2, p: OscillatorParams = UNIT):
    """(mean, variance) of x = sqrt(hbar / 2 m w)(a + a^dag) on the physical index.

    a^dag is allowed to reach level N + 1 so <x^2> = ||x c||^2 is exact for the
    truncated vector; both moments are normalized by the retained norm.
    """
    cf = c.coefficients
    N = c.cutoff
    y = np.zeros((N + 2, N + 1), dtype=complex)
    root = np.sqrt(np.arange(1, N + 1, dtype=float))[:, None]
    y[:N] += root * cf[1:]
    y[1:N + 1] += root * cf[:N]
    y[N + 1] += math.sqrt(N + 1) * cf[N]
    norm = float(np.sum(np.abs(cf) ** 2))
    scale = p.length / math.sqrt(2.0)
    first = float(np.vdot(cf, y[:N + 1]).real) / norm * scale
    second = float(np.sum(np.abs(y) ** 2)) / norm * scale ** 2
    return first, second - first ** 2


def initial_cutoff(alpha, z, n, th: ThermalParams):
    """4 (n + |alpha|^2 + sinh^2 r + nbar) + 20."""
    alpha = _as_complex(alpha, Displacement)
    z = _as_complex(z, Squeeze)
    occ = n + abs(alpha.alpha) ** 2 + math.sinh(z.r) ** 2 + th.occupation
    return max(int(math.ceil(4.0 * occ + 20.0)), 2 * n)


@dataclass(frozen=True, eq=False)
class OracleState:
    """A thermalized doubled state at wt = 0 plus the cutoff that held it."""

    state: FockVector2
    cutoff: int

    @property
    def deficit(self):
        return self.state.deficit

    def at(self, omega_t):
        return time_evolve(self.state, omega_t)

    def density(self, x, p: OscillatorParams = UNIT, omega_t=0.0):
        return marginal_density(self.at(omega_t), x, p)


def build_thermal_state(alpha, z, n, th: ThermalParams, cutoff, tol=DEFAULT_TOL):
    """Number state -> squeeze -> displace -> (x) tilde -> thermalize, at one cutoff."""
    v = displaced_squeezed_number_vector(alpha, z, n, cutoff, tol, max_deficit=math.inf)
    return thermalize(doubled(v), th, tol)


def prepare_thermal_state(alpha, z, n, th: ThermalParams, cutoff="auto", tol=DEFAULT_TOL,
                          max_deficit=MAX_DEFICIT, max_cutoff=MAX_CUTOFF):
    """Thermalized state with a cutoff that holds all but ``max_deficit`` of the norm.

    ``cutoff="auto"`` starts from :func:`initial_cutoff` and doubles; an integer
    cutoff is used as given.  Either way a deficit above ``max_deficit`` is an
    error.
    """
    if cutoff == "auto":
        N = initial_cutoff(alpha, z, n, th)
        while True:
            N = min(N, max_cutoff)
            state = build_thermal_state(alpha, z, n, th, N, tol)
            if state.deficit < max_deficit:
                return OracleState(state, N)
            if N >= max_cutoff:
                raise CutoffError(f"no cutoff up to {max_cutoff} holds the state "
                                  f"(deficit {state.deficit:.3e})",
                                  deficit=state.deficit, cutoff=N)
            N *= 2
    N = int(cutoff)
    state = build_thermal_state(alpha, z, n, th, N, tol)
    if state.deficit > max_deficit:
        raise CutoffError(f"cutoff {N} loses {state.deficit:.3e} of the norm",
                          deficit=state.deficit, cutoff=N)
    return OracleState(state, N)


def oracle_for(spec, th: ThermalParams, cutoff="auto", tol=DEFAULT_TOL,
               max_deficit=MAX_DEFICIT):
    return prepare_thermal_state(spec.alpha, spec.z, spec.n, th, cutoff, tol, max_deficit)
