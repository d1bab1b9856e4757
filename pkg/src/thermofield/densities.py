"""Position probability densities with the tilde coordinate integrated out,
plus the position mean and variance.

The double sums over (j, k) are accumulated in log space: each term is a
positive combinatorial weight times e^{-u^2} H_p(u), and the Hermite factor
is carried as a normalized mantissa with a separate log scale, so n up to
the configured maximum never overflows.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import NegativeDensityError
from .model import (
    Displacement,
    NO_SQUEEZE,
    OscillatorParams,
    Squeeze,
    ThermalParams,
    ThermalVacuum,
    ThermalizedDisplacedNumber,
    ThermalizedSqueezedNumber,
    time_point,
)
from .special_fn import (
    DEFAULT_QUADRATURE_NODES,
    gauss_hermite_rule,
    hermite_norm_scaled,
    ln_binomial,
    ln_factorial,
)

SQRT2 = math.sqrt(2.0)
UNIT = OscillatorParams()
LN2 = math.log(2.0)

# cancellation noise below this magnitude is clamped to zero and counted
CLAMP_FLOOR = -1e-9
DEFAULT_GRID_POINTS = 801
DEFAULT_GRID_SIGMAS = 8.0
# points whose series terms cancel by more than this factor are redone in mpmath
_COND_LIMIT = 1e3
_MP_GUARD_DIGITS = 8
_MP_MAX_DIGITS = 2000

clamp_counts = Counter()


@dataclass(frozen=True)
class SumIntermediates:
    """a1, a2, b1, b2 of the tilde integral, in units where xi is dimensionless
    except a1, b1 which carry sqrt(m w / hbar)."""

    a1: float
    a2: np.ndarray
    b1: float
    b2: np.ndarray

    @property
    def a(self):
        return self.b1 / self.a1

    @property
    def b(self):
        return -self.a * self.a2 + self.b2


def sum_intermediates(x, alpha: Displacement, th: ThermalParams, p=UNIT, omega_t=0.0):
    k = 1.0 / p.length
    xi = p.xi(x)
    c, s = th.cosh_theta, th.sinh_theta
    shift = SQRT2 * alpha.real_part_at(omega_t)
    return SumIntermediates(a1=k * c, a2=-xi * s - shift, b1=k * s, b2=-xi * c + shift)


@dataclass(frozen=True)
class DensityProfile:
    grid: np.ndarray
    values: np.ndarray
    state: object
    beta_hw: float
    omega_t: float
    clamped: int = 0

    def integral(self):
        return float(np.trapezoid(self.values, self.grid))

    def rows(self):
        return zip(self.grid.tolist(), self.values.tolist())


def _gauss_hermite_series(u, degrees, log_coef, log_scale=0.0, exact_weights=None):
    """exp(log_scale) * sum_p exp(log_coef[p]) * exp(-u^2) * H_p(u), without overflow.

    H_p(u) = h_p(u) * sqrt(2^p p! sqrt(pi)) with h_p the orthonormal
    polynomial, whose mantissa/log-scale pair comes from hermite_norm_scaled.

    The terms are positive weights times sign-changing Hermite values, so
    for large n at high temperature they cancel by many orders of magnitude.
    Points whose cancellation factor sum|t|/|sum t| exceeds _COND_LIMIT are
    re-evaluated with ``exact_weights`` in extended precision.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    degrees = np.asarray(degrees)
    mant, logs = hermite_norm_scaled(int(degrees.max()), u)
    ln_k = np.array([0.5 * (d * LN2 + ln_factorial(int(d)) + 0.5 * math.log(math.pi))
                     for d in degrees])
    m = mant[degrees]
    with np.errstate(divide="ignore"):
        logmag = (np.asarray(log_coef)[:, None] + ln_k[:, None]
                  + np.log(np.abs(m)) + logs[degrees]) - u[None, :] ** 2
    top = np.max(logmag, axis=0)
    finite = np.isfinite(top)
    top_safe = np.where(finite, top, 0.0)
    scaled = np.exp(logmag - top_safe[None, :])
    total = np.sum(np.sign(m) * scaled, axis=0)
    with np.errstate(over="ignore"):
        value = np.where(finite, total * np.exp(top_safe + log_scale), 0.0)
    if exact_weights is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.sum(scaled, axis=0) / np.abs(total)
        bad = finite & ~(cond <= _COND_LIMIT)
        if np.any(bad):
            value[bad] = _series_extended(u[bad], cond[bad], log_scale, exact_weights)
    return value


def _series_extended(u, cond, log_scale, exact_weights):
    """The same series in mpmath, at enough digits to absorb the cancellation.

    The double-precision estimate of the cancellation saturates once the
    total is pure rounding noise, so each point measures it again at working
    precision and retries with more digits until they cover it.
    """
    worst = float(np.max(np.where(np.isfinite(cond), cond, 1e300)))
    dps = 17 + _MP_GUARD_DIGITS + int(math.ceil(math.log10(max(worst, 1.0))))
    out = np.empty(len(u))
    pending = list(range(len(u)))
    while pending:
        retry = []
        with mpmath.workdps(dps):
            weights = exact_weights()
            scale = mpmath.exp(mpmath.mpf(log_scale))
            for i in pending:
                acc, mag = _hermite_sum_mp(mpmath.mpf(float(u[i])), weights)
                need = 17 + _MP_GUARD_DIGITS + (
                    int(mpmath.ceil(mpmath.log10(mag / abs(acc)))) if acc else dps)
                if need > dps and dps < _MP_MAX_DIGITS:
                    retry.append(i)
                    continue
                out[i] = float(acc * mpmath.exp(-mpmath.mpf(float(u[i])) ** 2) * scale)
        pending = retry
        dps = min(2 * dps, _MP_MAX_DIGITS)
    return out


def _hermite_sum_mp(y, weights):
    """sum_p w_p H_p(y) and sum_p |w_p H_p(y)| by the three-term recurrence."""
    top = max(weights)
    h_prev, h = mpmath.mpf(1), 2 * y
    w0 = weights.get(0, 0)
    acc, mag = w0 * h_prev, abs(w0 * h_prev)
    for k in range(top):
        if k:
            h_prev, h = h, 2 * y * h - 2 * k * h_prev
        w = weights.get(k + 1, 0)
        if w:
            acc += w * h
            mag += abs(w * h)
    return acc, mag


def _collect(log_terms):
    """Merge (degree, log weight) pairs sharing a degree by log-sum-exp."""
    by_degree = {}
    for d, lw in log_terms:
        by_degree.setdefault(d, []).append(lw)
    degrees = sorted(by_degree)
    return degrees, [float(np.logaddexp.reduce(by_degree[d])) for d in degrees]


def _closed_form_coefficients(n, th: ThermalParams):
    """log of 2^{2(j+k)-2n} j! k! (C_n^j C_n^k)^2 e^{(j-k) bhw/2} cosh^{j+k-2n}(bhw/2),
    grouped by Hermite degree 2(2n - j - k)."""
    terms = []
    if th.is_zero_temperature:
        # only j = n survives: e^{(n-k) tau} cosh^{k-n} tau -> 2^{n-k}
        j = n
        for k in range(n + 1):
            lw = ((n + k) * LN2 + ln_factorial(j) + ln_factorial(k)
                  + 2.0 * ln_binomial(n, k))
            terms.append((2 * (2 * n - j - k), lw))
        return _collect(terms)
    tau = 0.5 * th.beta_hw
    lch = th.log_cosh_half
    for j in range(n + 1):
        for k in range(n + 1):
            lw = ((2 * (j + k) - 2 * n) * LN2 + ln_factorial(j) + ln_factorial(k)
                  + 2.0 * (ln_binomial(n, j) + ln_binomial(n, k))
                  + (j - k) * tau + (j + k - 2 * n) * lch)
            terms.append((2 * (2 * n - j - k), lw))
    return _collect(terms)


def _general_coefficients(n, a):
    """log of 2^{j+k} j! k! (C_n^j C_n^k)^2 a^{2(n-j)} (a^2+1)^{j+k-2n}."""
    terms = []
    l1a = math.log1p(a * a)
    for j in range(n + 1):
        if a == 0.0 and j < n:
            continue
        la = 0.0 if j == n else 2 * (n - j) * math.log(a)
        for k in range(n + 1):
            lw = ((j + k) * LN2 + ln_factorial(j) + ln_factorial(k)
                  + 2.0 * (ln_binomial(n, j) + ln_binomial(n, k))
                  + la + (j + k - 2 * n) * l1a)
            terms.append((2 * (2 * n - j - k), lw))
    return _collect(terms)


def _closed_form_weights_mp(n, th: ThermalParams):
    """Degree -> weight of the closed-form sum at the current mpmath precision."""
    out = {}
    js = [n] if th.is_zero_temperature else range(n + 1)
    if not th.is_zero_temperature:
        tau = mpmath.mpf(th.beta_hw) / 2
        ch = mpmath.cosh(tau)
    for j in js:
        for k in range(n + 1):
            if th.is_zero_temperature:
                w = mpmath.mpf(2) ** (n + k)
            else:
                w = (mpmath.mpf(2) ** (2 * (j + k) - 2 * n) * mpmath.exp((j - k) * tau)
                     * ch ** (j + k - 2 * n))
            w *= math.factorial(j) * math.factorial(k) * (math.comb(n, j) * math.comb(n, k)) ** 2
            d = 2 * (2 * n - j - k)
            out[d] = out.get(d, 0) + w
    return out


def _general_weights_mp(n, a):
    """Degree -> weight of the (a, b) form at the current mpmath precision."""
    a = mpmath.mpf(a)
    one_a2 = 1 + a * a
    out = {}
    for j in range(n + 1):
        if a == 0 and j < n:
            continue
        for k in range(n + 1):
            w = (mpmath.mpf(2) ** (j + k) * a ** (2 * (n - j)) * one_a2 ** (j + k - 2 * n)
                 * math.factorial(j) * math.factorial(k)
                 * (math.comb(n, j) * math.comb(n, k)) ** 2)
            d = 2 * (2 * n - j - k)
            out[d] = out.get(d, 0) + w
    return out


def _clamp(values, name):
    values = np.asarray(values, dtype=float)
    if values.size and values.min() < CLAMP_FLOOR:
        raise NegativeDensityError(f"{name}: density {values.min():.3e} below {CLAMP_FLOOR}")
    neg = values < 0
    count = int(np.count_nonzero(neg))
    if count:
        clamp_counts[name] += count
        values = np.where(neg, 0.0, values)
    return values, count


def _shape(x, values):
    return values if np.ndim(x) else float(values[0])


def rho_vacuum(x, th: ThermalParams, p: OscillatorParams = UNIT, omega_t=0.0):
    """Thermal-vacuum density, a Gaussian of variance coth(bhw/2) hbar / 2 m w.

    ``omega_t`` is accepted and ignored: the thermal vacuum does not evolve.
    """
    xi = p.xi(x)
    t = th.tanh_half
    return math.sqrt(t / (math.pi)) / p.length * np.exp(-t * xi ** 2)


def _rho_closed_raw(x, alpha: Displacement, z: Squeeze, n, th: ThermalParams, p, omega_t):
    xi = np.atleast_1d(p.xi(x))
    width = z.F4 * time_point(omega_t, z).abs_B
    t = th.tanh_half
    shift = SQRT2 * alpha.real_part_at(omega_t) * math.sqrt(1.0 + th.sech_half)
    u = (math.sqrt(t) * xi - shift) / width
    degrees, log_coef = _closed_form_coefficients(n, th)
    log_pref = (-math.log(p.length) - 0.5 * math.log(math.pi)
                - 2.0 * (n * LN2 + ln_factorial(n)) + 0.5 * math.log(t) - math.log(width))
    return _gauss_hermite_series(u, degrees, log_coef, log_pref,
                                 lambda: _closed_form_weights_mp(n, th))


def _rho_general_raw(x, alpha: Displacement, z: Squeeze, n, th: ThermalParams, p, omega_t):
    si = sum_intermediates(np.atleast_1d(x), alpha, th, p, omega_t)
    a, b = si.a, si.b
    B = time_point(omega_t, z).B
    width = z.F4 * abs(B)
    one_a2 = 1.0 + a * a
    u = b / (math.sqrt(one_a2) * width)
    degrees, log_coef = _general_coefficients(n, a)
    log_pref = (math.log(p.mass * p.omega * width / (math.pi * p.hbar * si.a1))
                - 2.0 * (n * LN2 + ln_factorial(n))
                + 0.5 * math.log(math.pi / one_a2)
                + 2 * n * math.log(abs(z.F3)) - 2.0 * math.log(abs(z.F1)) - 2.0 * math.log(abs(B)))
    return _gauss_hermite_series(u, degrees, log_coef, log_pref,
                                 lambda: _general_weights_mp(n, a))


def rho_tdn(x, alpha: Displacement, n, th: ThermalParams, p: OscillatorParams = UNIT,
            omega_t=0.0):
    """Position density of the thermalized displaced number state at phase wt."""
    vals, _ = _clamp(_rho_closed_raw(x, alpha, NO_SQUEEZE, n, th, p, omega_t), "rho_tdn")
    return _shape(x, vals)


def rho_tsn(x, alpha: Displacement, z: Squeeze, n, th: ThermalParams,
            p: OscillatorParams = UNIT, omega_t=0.0):
    """Position density of the thermalized squeezed number state at phase wt.

    Same sum as the displaced case with every Hermite/Gaussian argument
    divided by F4 |B|, B = cos wt + i F2 sin wt.
    """
    vals, _ = _clamp(_rho_closed_raw(x, alpha, z, n, th, p, omega_t), "rho_tsn")
    return _shape(x, vals)


def rho_general(x, alpha: Displacement, z: Squeeze, n, th: ThermalParams,
                p: OscillatorParams = UNIT, omega_t=0.0):
    """Same density through the intermediate form in a = b1/a1 and b = -a a2 + b2."""
    vals, _ = _clamp(_rho_general_raw(x, alpha, z, n, th, p, omega_t), "rho_general")
    return _shape(x, vals)


def _state_params(spec):
    if isinstance(spec, ThermalVacuum):
        return Displacement(), NO_SQUEEZE, 0
    if isinstance(spec, ThermalizedDisplacedNumber):
        return spec.alpha, NO_SQUEEZE, spec.n
    if isinstance(spec, ThermalizedSqueezedNumber):
        return spec.alpha, spec.z, spec.n
    raise TypeError(f"not a StateSpec: {spec!r}")


def _reduces_to_vacuum(spec):
    # n = 0, alpha = 0, z = 0 is the thermal vacuum itself; route it through the
    # same Gaussian so the reduction is exact to the last bit
    if isinstance(spec, ThermalVacuum):
        return True
    alpha, z, n = _state_params(spec)
    return n == 0 and alpha.alpha == 0 and z.is_zero


def rho_state_raw(spec, x, th, p=UNIT, omega_t=0.0):
    """Unclamped density of any StateSpec (array input)."""
    if _reduces_to_vacuum(spec):
        return np.atleast_1d(rho_vacuum(x, th, p))
    alpha, z, n = _state_params(spec)
    return _rho_closed_raw(x, alpha, z, n, th, p, omega_t)


def rho_state(spec, x, th, p=UNIT, omega_t=0.0):
    if _reduces_to_vacuum(spec):
        return rho_vacuum(x, th, p)
    alpha, z, n = _state_params(spec)
    name = "rho_tsn" if isinstance(spec, ThermalizedSqueezedNumber) else "rho_tdn"
    vals, _ = _clamp(_rho_closed_raw(x, alpha, z, n, th, p, omega_t), name)
    return _shape(x, vals)


def mean_x(alpha: Displacement, z: Squeeze = NO_SQUEEZE, n=0, th: ThermalParams = None,
           p: OscillatorParams = UNIT, omega_t=0.0):
    """<x> = sqrt(coth(bhw/4)) sqrt(2 hbar / m w) (alpha1 cos wt + alpha2 sin wt).

    Independent of n and z; both are accepted to keep one signature with var_x.
    """
    coth_q = 1.0 if th is None else th.coth_quarter
    return math.sqrt(coth_q) * SQRT2 * p.length * alpha.real_part_at(omega_t)


def var_x(alpha: Displacement = None, z: Squeeze = NO_SQUEEZE, n=0, th: ThermalParams = None,
          p: OscillatorParams = UNIT, omega_t=0.0):
    """(Delta x)^2 = coth(bhw/2) (2n + 1) hbar F4^2 |B|^2 / (2 m w); independent of alpha."""
    coth_h = 1.0 if th is None else th.coth_half
    width = z.F4 * time_point(omega_t, z).abs_B
    return coth_h * (2 * n + 1) * p.length ** 2 * width ** 2 / 2.0


def state_moments(spec, th, p=UNIT, omega_t=0.0):
    alpha, z, n = _state_params(spec)
    return mean_x(alpha, z, n, th, p, omega_t), var_x(alpha, z, n, th, p, omega_t)


def gaussian_n0(x, alpha: Displacement, z: Squeeze, th: ThermalParams, p=UNIT, omega_t=0.0):
    """Normal density with the n = 0 mean and variance."""
    mu = mean_x(alpha, z, 0, th, p, omega_t)
    var = var_x(alpha, z, 0, th, p, omega_t)
    x = np.asarray(x, dtype=float)
    return np.exp(-(x - mu) ** 2 / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def quartic_n1(x, alpha: Displacement, z: Squeeze, th: ThermalParams, p=UNIT, omega_t=0.0):
    """The n = 1 special case as a Gaussian times a quartic in (x - <x>).

    sqrt(2 / (pi s2)) e^{-v} { sech^2(bhw/2) [(v - 3/2)^2 - 3/2] / 2 + v },
    v = (x - <x>)^2 / (2 s2), s2 the n = 0 variance.
    """
    mu = mean_x(alpha, z, 1, th, p, omega_t)
    s2 = var_x(alpha, z, 0, th, p, omega_t)
    x = np.asarray(x, dtype=float)
    v = (x - mu) ** 2 / (2.0 * s2)
    poly = 0.5 * th.sech_half ** 2 * ((v - 1.5) ** 2 - 1.5) + v
    return math.sqrt(2.0 / (math.pi * s2)) * np.exp(-v) * poly


def density_frame(spec, th, p=UNIT, omega_t=0.0):
    """(centre, scale) with x = centre + scale * y mapping the density's
    Gaussian factor onto exp(-y^2)."""
    alpha, z, _ = _state_params(spec)
    width = z.F4 * time_point(omega_t, z).abs_B
    centre = mean_x(alpha, z, 0, th, p, omega_t)
    return centre, p.length * width / math.sqrt(th.tanh_half)


def quadrature_moments(spec, th, p=UNIT, omega_t=0.0, nodes=DEFAULT_QUADRATURE_NODES):
    """(mass, mean, variance) of the closed-form density by Gauss-Hermite quadrature."""
    rule = gauss_hermite_rule(nodes)
    centre, scale = density_frame(spec, th, p, omega_t)
    x = centre + scale * rule.nodes
    w = scale * rule.scaled_weights * rho_state_raw(spec, x, th, p, omega_t)
    mass = float(np.sum(w))
    d1 = float(np.dot(w, x - centre)) / mass
    d2 = float(np.dot(w, (x - centre - d1) ** 2)) / mass
    return mass, centre + d1, d2


def auto_grid(spec, th, p=UNIT, omega_t=0.0, count=DEFAULT_GRID_POINTS,
              sigmas=DEFAULT_GRID_SIGMAS):
    mu, var = state_moments(spec, th, p, omega_t)
    half = sigmas * math.sqrt(var)
    return np.linspace(mu - half, mu + half, count)


def density_profile(spec, th, p=UNIT, omega_t=0.0, grid=None):
    if grid is None:
        grid = auto_grid(spec, th, p, omega_t)
    grid = np.asarray(grid, dtype=float)
    vals, count = _clamp(rho_state_raw(spec, grid, th, p, omega_t), "profile")
    return DensityProfile(grid=grid, values=vals, state=spec, beta_hw=th.beta_hw,
                          omega_t=float(omega_t), clamped=count)
