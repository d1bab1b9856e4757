"""Parameter records for the oscillator, the heat bath, and the states.

All records are frozen; derived quantities are filled in at construction.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError

# lowest accepted beta*hbar*omega; theta and coth(beta hbar omega / 2) diverge below it
BETA_HW_FLOOR = 1e-6
# largest number-state index accepted in a StateSpec
MAX_N = 64
# below this |z| the sinh(r)/r factor is taken from its series
_SERIES_R = 1e-4


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class OscillatorParams:
    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mass", "omega", "hbar"):
            v = _finite(name, getattr(self, name))
            if v <= 0:
                raise DomainError(f"{name} must be positive, got {v!r}")

    @property
    def length(self):
        """Oscillator length sqrt(hbar / m omega)."""
        return math.sqrt(self.hbar / (self.mass * self.omega))

    def xi(self, x):
        """Dimensionless coordinate sqrt(m omega / hbar) x."""
        return np.asarray(x, dtype=float) / self.length


@dataclass(frozen=True)
class ThermalParams:
    """Inverse temperature as beta*hbar*omega plus the thermal angle theta,
    tanh(theta) = exp(-beta hbar omega / 2).  beta_hw = inf is zero temperature.

    Build with :func:`thermal_params_from`; theta is never set by hand.
    """

    beta_hw: float
    theta: float

    def __post_init__(self):
        if math.isinf(self.beta_hw):
            if self.theta != 0.0:
                raise DomainError("zero temperature requires theta = 0")
            return
        if abs(math.tanh(self.theta) - math.exp(-0.5 * self.beta_hw)) > 1e-14:
            raise DomainError("theta inconsistent with beta_hw")

    @property
    def is_zero_temperature(self):
        return math.isinf(self.beta_hw)

    @property
    def tanh_theta(self):
        return 0.0 if self.is_zero_temperature else math.exp(-0.5 * self.beta_hw)

    @property
    def cosh_theta(self):
        if self.is_zero_temperature:
            return 1.0
        # 1 - tanh^2 theta = 1 - exp(-beta hbar omega)
        return 1.0 / math.sqrt(-math.expm1(-self.beta_hw))

    @property
    def sinh_theta(self):
        return self.tanh_theta * self.cosh_theta

    @property
    def tanh_half(self):
        """tanh(beta hbar omega / 2)."""
        return 1.0 if self.is_zero_temperature else math.tanh(0.5 * self.beta_hw)

    @property
    def coth_half(self):
        return 1.0 / self.tanh_half

    @property
    def coth_quarter(self):
        """coth(beta hbar omega / 4)."""
        return 1.0 if self.is_zero_temperature else 1.0 / math.tanh(0.25 * self.beta_hw)

    @property
    def sech_half(self):
        if self.is_zero_temperature:
            return 0.0
        e = math.exp(-0.5 * self.beta_hw)
        return 2.0 * e / (1.0 + e * e)

    @property
    def log_cosh_half(self):
        """log cosh(beta hbar omega / 2)."""
        h = 0.5 * self.beta_hw
        return h + math.log1p(math.exp(-2.0 * h)) - math.log(2.0)

    @property
    def occupation(self):
        """Bose occupation 1 / (exp(beta hbar omega) - 1)."""
        return 0.0 if self.is_zero_temperature else 1.0 / math.expm1(self.beta_hw)


def thermal_params_from(beta_hw):
    """ThermalParams for a dimensionless beta*hbar*omega (``inf`` allowed)."""
    beta_hw = float(beta_hw)
    if math.isnan(beta_hw) or beta_hw <= 0:
        raise DomainError(f"beta*hbar*omega must be positive (unphysical: {beta_hw!r})")
    if beta_hw < BETA_HW_FLOOR:
        raise DomainError(f"temperature too high: beta*hbar*omega = {beta_hw!r} "
                          f"is below the floor {BETA_HW_FLOOR}")
    if math.isinf(beta_hw):
        return ThermalParams(beta_hw=beta_hw, theta=0.0)
    t = math.exp(-0.5 * beta_hw)
    # artanh(t) = (log1p(t) - log(1 - t)) / 2, with 1 - t from expm1
    theta = 0.5 * (math.log1p(t) - math.log(-math.expm1(-0.5 * beta_hw)))
    return ThermalParams(beta_hw=beta_hw, theta=theta)


def thermal_coords(x, x_tilde, theta):
    """Thermal coordinates (x cosh - x~ sinh, x~ cosh - x sinh) at angle theta."""
    if isinstance(theta, ThermalParams):
        c, s = theta.cosh_theta, theta.sinh_theta
    else:
        c, s = math.cosh(theta), math.sinh(theta)
    x = np.asarray(x, dtype=float)
    x_tilde = np.asarray(x_tilde, dtype=float)
    return x * c - x_tilde * s, x_tilde * c - x * s


def inverse_thermal_coords(x_beta, x_tilde_beta, theta):
    """Undo :func:`thermal_coords` (the map has unit determinant)."""
    if isinstance(theta, ThermalParams):
        c, s = theta.cosh_theta, theta.sinh_theta
    else:
        c, s = math.cosh(theta), math.sinh(theta)
    x_beta = np.asarray(x_beta, dtype=float)
    x_tilde_beta = np.asarray(x_tilde_beta, dtype=float)
    return x_beta * c + x_tilde_beta * s, x_tilde_beta * c + x_beta * s


@dataclass(frozen=True)
class Displacement:
    """alpha = alpha1 + i alpha2.  The tilde partner is always conj(alpha)."""

    alpha1: float = 0.0
    alpha2: float = 0.0

    def __post_init__(self):
        _finite("alpha1", self.alpha1)
        _finite("alpha2", self.alpha2)

    @classmethod
    def from_complex(cls, alpha):
        alpha = complex(alpha)
        return cls(alpha.real, alpha.imag)

    @property
    def alpha(self):
        return complex(self.alpha1, self.alpha2)

    def real_part_at(self, omega_t):
        """alpha1 cos(wt) + alpha2 sin(wt), the real part of alpha e^{-i wt}."""
        return self.alpha1 * math.cos(omega_t) + self.alpha2 * math.sin(omega_t)

    def rotated(self, omega_t):
        """Displacement after free evolution for phase wt: alpha e^{-i wt}."""
        return Displacement.from_complex(self.alpha * cmath.exp(-1j * omega_t))


@dataclass(frozen=True)
class Squeeze:
    """z = z1 + i z2 = r e^{i phi} with the derived F-factors.

    S = cosh r + z1 sinh(r)/r,  kappa = z2 sinh(r) / (2 r S),
    F1 = S(1 + 2i kappa),  F2 = 1/(S^2 (1 + 2i kappa)) - 2i kappa,
    F3 = (1 - 2i kappa)/(1 + 2i kappa),  F4 = S sqrt(1 + 4 kappa^2).
    """

    z1: float = 0.0
    z2: float = 0.0
    r: float = field(init=False)
    phi: float = field(init=False)
    S: float = field(init=False)
    kappa: float = field(init=False)
    F1: complex = field(init=False)
    F2: complex = field(init=False)
    F3: complex = field(init=False)
    F4: float = field(init=False)

    def __post_init__(self):
        z1 = _finite("z1", self.z1)
        z2 = _finite("z2", self.z2)
        r = math.hypot(z1, z2)
        if r < _SERIES_R:
            r2 = r * r
            sinhc = 1.0 + r2 / 6.0 + r2 * r2 / 120.0
        else:
            sinhc = math.sinh(r) / r
        S = math.cosh(r) + z1 * sinhc
        kappa = z2 * sinhc / (2.0 * S)
        one = complex(1.0, 2.0 * kappa)
        derived = {
            "r": r,
            "phi": math.atan2(z2, z1),
            "S": S,
            "kappa": kappa,
            "F1": S * one,
            "F2": 1.0 / (S * S * one) - 2j * kappa,
            "F3": one.conjugate() / one,
            "F4": S * math.sqrt(1.0 + 4.0 * kappa * kappa),
        }
        for name, value in derived.items():
            object.__setattr__(self, name, value)

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        return cls(z.real, z.imag)

    @property
    def z(self):
        return complex(self.z1, self.z2)

    @property
    def is_zero(self):
        return self.z1 == 0.0 and self.z2 == 0.0

    def rotated(self, omega_t):
        """Squeeze parameter after free evolution for phase wt: z e^{-2i wt}."""
        return Squeeze.from_complex(self.z * cmath.exp(-2j * omega_t))


def squeeze_from(z1, z2):
    return Squeeze(z1, z2)


NO_SQUEEZE = Squeeze(0.0, 0.0)


@dataclass(frozen=True)
class TimePoint:
    """Phase wt with A = cos wt + i sin wt and B = cos wt + i F2 sin wt."""

    omega_t: float
    A: complex
    B: complex

    @property
    def abs_B(self):
        return abs(self.B)


def time_point(omega_t, squeeze=NO_SQUEEZE):
    omega_t = _finite("omega_t", omega_t)
    c, s = math.cos(omega_t), math.sin(omega_t)
    return TimePoint(omega_t=omega_t, A=complex(c, s), B=c + 1j * squeeze.F2 * s)


def _check_n(n):
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    if n > MAX_N:
        raise DomainError(f"n = {n} exceeds the configured maximum {MAX_N}")
    return int(n)


@dataclass(frozen=True)
class ThermalVacuum:
    kind = "vacuum"

    @property
    def alpha(self):
        return Displacement()

    @property
    def z(self):
        return NO_SQUEEZE

    @property
    def n(self):
        return 0


@dataclass(frozen=True)
class ThermalizedDisplacedNumber:
    alpha: Displacement
    n: int
    kind = "displaced"

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n(self.n))

    @property
    def z(self):
        return NO_SQUEEZE


@dataclass(frozen=True)
class ThermalizedSqueezedNumber:
    alpha: Displacement
    z: Squeeze
    n: int
    kind = "squeezed"

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n(self.n))


StateSpec = Union[ThermalVacuum, ThermalizedDisplacedNumber, ThermalizedSqueezedNumber]


def make_state(kind, alpha=0.0, z=0.0, n=0):
    """StateSpec from a kind name and complex parameters."""
    if kind == "vacuum":
        return ThermalVacuum()
    if kind == "displaced":
        return ThermalizedDisplacedNumber(Displacement.from_complex(alpha), n)
    if kind == "squeezed":
        return ThermalizedSqueezedNumber(Displacement.from_complex(alpha),
                                         Squeeze.from_complex(z), n)
    raise DomainError(f"unknown state kind {kind!r}")
