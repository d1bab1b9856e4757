"""Closed-form coordinate wavefunctions.

Single-mode displaced and squeezed number states, and the doubled
(x, x~) wavefunctions of the thermal vacuum and the thermalized displaced /
squeezed number states, at t = 0 and after free evolution for phase wt.

Everything is evaluated in xi = sqrt(m w / hbar) x and rescaled to physical
amplitudes at the end.  Only |psi|^2 is physically meaningful across
different constructions: the single-mode states carry the phase
exp(-i alpha1 alpha2) and (sqrt F3)^n on the principal branch, while the
thermal amplitudes carry no global phase at all.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Displacement,
    NO_SQUEEZE,
    OscillatorParams,
    Squeeze,
    ThermalParams,
    ThermalVacuum,
    ThermalizedDisplacedNumber,
    ThermalizedSqueezedNumber,
    thermal_coords,
    time_point,
)
from .special_fn import hermite_poly, ln_factorial

SQRT2 = math.sqrt(2.0)
UNIT = OscillatorParams()


@dataclass(frozen=True)
class WavefunctionSample:
    value: complex
    at: tuple
    omega_t: float = 0.0


def _norm_1d(n, p):
    """(m w / pi hbar)^(1/4) / sqrt(2^n n!)."""
    return (p.mass * p.omega / (math.pi * p.hbar)) ** 0.25 * math.exp(
        -0.5 * (n * math.log(2.0) + ln_factorial(n)))


def _norm_2d(n, p):
    """(m w / pi hbar)^(1/2) / (2^n n!)."""
    return math.sqrt(p.mass * p.omega / (math.pi * p.hbar)) * math.exp(
        -(n * math.log(2.0) + ln_factorial(n)))


def psi_displaced_number(x, alpha: Displacement, n, p: OscillatorParams = UNIT):
    """<x|D(alpha)|n>."""
    xi = p.xi(x)
    a1, a2 = alpha.alpha1, alpha.alpha2
    shift = xi - SQRT2 * a1
    expo = -0.5 * shift ** 2 + 1j * SQRT2 * a2 * xi - 1j * a1 * a2
    return _norm_1d(n, p) * np.exp(expo) * hermite_poly(n, shift)


def psi_squeezed_number(x, alpha: Displacement, z: Squeeze, n, p: OscillatorParams = UNIT):
    """<x|D(alpha) S(z)|n>, squeeze applied first."""
    xi = p.xi(x)
    a1, a2 = alpha.alpha1, alpha.alpha2
    shift = xi - SQRT2 * a1
    pref = _norm_1d(n, p) * cmath.sqrt(z.F3) ** n / cmath.sqrt(z.F1)
    expo = -0.5 * z.F2 * shift ** 2 + 1j * SQRT2 * a2 * xi - 1j * a1 * a2
    return pref * np.exp(expo) * hermite_poly(n, shift / z.F4)


def single_mode_density(x, alpha: Displacement, z: Squeeze, n, p: OscillatorParams = UNIT,
                        omega_t=0.0):
    """|<x|D(alpha') S(z')|n>|^2 with alpha' = alpha e^{-i wt}, z' = z e^{-2i wt}.

    The free evolution of a squeezed number state is the same state with
    rotated parameters, so its density has centre alpha1 cos wt + alpha2 sin wt
    and Hermite scale F4(z') = F4 |B|.
    """
    psi = psi_squeezed_number(x, alpha.rotated(omega_t), z.rotated(omega_t), n, p)
    return np.abs(psi) ** 2


def psi_thermal_vacuum(x, x_tilde, th: ThermalParams, p: OscillatorParams = UNIT):
    """<x~, x|0, beta>, a real Gaussian in the thermal coordinates."""
    xb, xtb = thermal_coords(p.xi(x), p.xi(x_tilde), th)
    return math.sqrt(p.mass * p.omega / (math.pi * p.hbar)) * np.exp(-0.5 * (xb ** 2 + xtb ** 2))


def psi_tdn_static(x, x_tilde, alpha: Displacement, n, th: ThermalParams,
                   p: OscillatorParams = UNIT):
    """Thermalized displaced number state at t = 0, written out in (x, x~)."""
    xi, xti = p.xi(x), p.xi(x_tilde)
    c, s = th.cosh_theta, th.sinh_theta
    a1, a2 = alpha.alpha1, alpha.alpha2
    u = xi * c - xti * s - SQRT2 * a1
    v = xti * c - xi * s - SQRT2 * a1
    expo = -0.5 * (u ** 2 + v ** 2) + 1j * SQRT2 * a2 * (c + s) * (xi - xti)
    return _norm_2d(n, p) * np.exp(expo) * hermite_poly(n, u) * hermite_poly(n, v)


def psi_tdn(x, x_tilde, alpha: Displacement, n, th: ThermalParams,
            p: OscillatorParams = UNIT, omega_t=0.0):
    """Thermalized displaced number state after free evolution for phase wt.

    Gaussians centred on the complex points sqrt2 alpha/A and sqrt2 alpha*/A*
    in the thermal coordinates, A = e^{i wt}.
    """
    xb, xtb = thermal_coords(p.xi(x), p.xi(x_tilde), th)
    al = alpha.alpha
    A = time_point(omega_t).A
    cos_wt = math.cos(omega_t)
    const = (al ** 2 / A + al.conjugate() ** 2 / A.conjugate()).real * cos_wt \
        - 2.0 * alpha.alpha1 ** 2
    gauss = (xb - SQRT2 * al / A) ** 2 + (xtb - SQRT2 * al.conjugate() / A.conjugate()) ** 2
    centre = SQRT2 * alpha.real_part_at(omega_t)
    return (_norm_2d(n, p) * np.exp(const - 0.5 * gauss)
            * hermite_poly(n, xb - centre) * hermite_poly(n, xtb - centre))


def psi_tsn_static(x, x_tilde, alpha: Displacement, z: Squeeze, n, th: ThermalParams,
                   p: OscillatorParams = UNIT):
    """Thermalized squeezed number state at t = 0, written out in (x, x~)."""
    xi, xti = p.xi(x), p.xi(x_tilde)
    c, s = th.cosh_theta, th.sinh_theta
    a1, a2 = alpha.alpha1, alpha.alpha2
    u = xi * c - xti * s - SQRT2 * a1
    v = xti * c - xi * s - SQRT2 * a1
    pref = _norm_2d(n, p) * abs(z.F3) ** n / abs(z.F1)
    expo = (-0.5 * (z.F2 * u ** 2 + z.F2.conjugate() * v ** 2)
            + 1j * SQRT2 * a2 * (c + s) * (xi - xti))
    return pref * np.exp(expo) * hermite_poly(n, u / z.F4) * hermite_poly(n, v / z.F4)


def psi_tsn(x, x_tilde, alpha: Displacement, z: Squeeze, n, th: ThermalParams,
            p: OscillatorParams = UNIT, omega_t=0.0):
    """Thermalized squeezed number state after free evolution for phase wt.

    Five exponential factors: two alpha-only constants over B and B*, and one
    quadratic-plus-linear Gaussian per thermal coordinate; Hermite arguments
    scaled by 1/(F4 |B|).
    """
    xb, xtb = thermal_coords(p.xi(x), p.xi(x_tilde), th)
    a1, a2 = alpha.alpha1, alpha.alpha2
    tp = time_point(omega_t, z)
    B, Bc = tp.B, tp.B.conjugate()
    F2, F2c = z.F2, z.F2.conjugate()
    c, s = math.cos(omega_t), math.sin(omega_t)
    pref = _norm_2d(n, p) * abs(z.F3) ** n / (abs(z.F1) * abs(B))
    k1 = -(F2 * c * a1 ** 2 + 2.0 * F2 * s * a1 * a2 + 1j * s * a2 ** 2) / B
    k2 = -(F2c * c * a1 ** 2 + 2.0 * F2c * s * a1 * a2 - 1j * s * a2 ** 2) / Bc
    g1 = -0.5 * (F2 * c + 1j * s) / B * xb ** 2 + SQRT2 * (F2 * a1 + 1j * a2) / B * xb
    g2 = -0.5 * (F2c * c - 1j * s) / Bc * xtb ** 2 + SQRT2 * (F2c * a1 - 1j * a2) / Bc * xtb
    width = z.F4 * abs(B)
    centre = SQRT2 * alpha.real_part_at(omega_t)
    return (pref * np.exp(k1 + k2 + g1 + g2)
            * hermite_poly(n, (xb - centre) / width) * hermite_poly(n, (xtb - centre) / width))


def psi_state(spec, x, x_tilde, th: ThermalParams, p: OscillatorParams = UNIT, omega_t=0.0):
    """Doubled-coordinate amplitude of any StateSpec."""
    if isinstance(spec, ThermalVacuum):
        return psi_thermal_vacuum(x, x_tilde, th, p) + 0j
    if isinstance(spec, ThermalizedDisplacedNumber):
        return psi_tdn(x, x_tilde, spec.alpha, spec.n, th, p, omega_t)
    if isinstance(spec, ThermalizedSqueezedNumber):
        return psi_tsn(x, x_tilde, spec.alpha, spec.z, spec.n, th, p, omega_t)
    raise TypeError(f"not a StateSpec: {spec!r}")


def sample(spec, x, x_tilde, th, p=UNIT, omega_t=0.0):
    value = complex(psi_state(spec, x, x_tilde, th, p, omega_t))
    return WavefunctionSample(value=value, at=(float(x), float(x_tilde)), omega_t=float(omega_t))


def state_geometry(spec, p=UNIT, omega_t=0.0):
    """(centre, width) of each thermal-coordinate factor, in xi units."""
    z = spec.z if not isinstance(spec, ThermalVacuum) else NO_SQUEEZE
    width = z.F4 * time_point(omega_t, z).abs_B
    return SQRT2 * spec.alpha.real_part_at(omega_t), width
