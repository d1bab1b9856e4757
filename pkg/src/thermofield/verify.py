"""Verification suite: closed forms against the Fock oracle and quadrature.

Each check records what was compared, the metric, its threshold and the
measured value.  Reports serialize to deterministic JSON (sorted keys, no
timestamps), so two runs on the same build produce identical bytes.

Set ``TFD_WORKERS`` to spread the lattice over worker processes; results
are collected in lattice order regardless of the worker count.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import densities as dens
from . import fock
from .model import (
    NO_SQUEEZE,
    Displacement,
    Squeeze,
    make_state,
    thermal_params_from,
)
from .special_fn import gauss_hermite_rule, hermite_poly, hermite_product_linearize
from .states import single_mode_density

X_WINDOW = np.linspace(-6.0, 6.0, 241)

TOL_ORACLE = 1e-6
TOL_NORM = 1e-8
TOL_MOMENTS = 1e-8
TOL_ORACLE_MOMENTS = 1e-7
TOL_ZERO_T = 1e-9
TOL_VACUUM = 1e-8
TOL_VACUUM_TIME = 1e-12
TOL_VACUUM_VAR = 1e-10
TOL_UNIT_F3 = 1e-14
TOL_LINEARIZE = 1e-9
TOL_COMMUTE = 1e-10
TOL_DIAGONAL = 1e-10
TOL_GAUSSIAN = 1e-10
TOL_GENERAL = 1e-10
TOL_SPOT = 1e-9

LATTICES = {
    "full": {
        "n": (0, 1, 2, 5),
        "beta_hw": (0.5, 1.0, 2.0, math.inf),
        "alpha": (0j, 1 + 0j, 1 + 0.5j),
        "z": (0j, 0.5 + 0j, 0.3 + 0.4j),
        "omega_t": (0.0, 0.7, math.pi / 2),
    },
    "quick": {
        "n": (0, 1),
        "beta_hw": (1.0, math.inf),
        "alpha": (0j, 1 + 0.5j),
        "z": (0j, 0.3 + 0.4j),
        "omega_t": (0.0, 0.7),
    },
}

# independent scalar evaluations of the two quoted spot values
SPOT_MEAN = math.sqrt(1.0 / math.tanh(0.5)) * math.sqrt(2.0)
SPOT_VAR = 3.0 / math.tanh(1.0) / 2.0


def _jsonable(value):
    if isinstance(value, complex):
        return [_jsonable(value.real), _jsonable(value.imag)]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


@dataclass(frozen=True)
class Check:
    id: str
    params: dict
    metric: str
    threshold: float
    measured: float

    @property
    def passed(self):
        return math.isfinite(self.measured) and self.measured <= self.threshold

    def to_dict(self):
        return _jsonable({"id": self.id, "params": self.params, "metric": self.metric,
                          "threshold": self.threshold, "measured": self.measured,
                          "passed": self.passed})


@dataclass
class VerifyReport:
    level: str
    checks: list = field(default_factory=list)
    errata: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def summary(self):
        counts = {}
        for c in self.checks:
            tally = counts.setdefault(c.id, [0, 0])
            tally[0 if c.passed else 1] += 1
        return {
            "total": len(self.checks),
            "passed": sum(c.passed for c in self.checks),
            "failed": len(self.failures),
            "by_check": {k: {"passed": v[0], "failed": v[1]} for k, v in sorted(counts.items())},
        }

    def to_dict(self):
        return {
            "level": self.level,
            "overall_pass": self.passed,
            "summary": self.summary(),
            "checks": [c.to_dict() for c in self.checks],
            "errata": [_jsonable(e) for e in self.errata],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def sup_rel(a, b):
    """sup |a - b| relative to the peak of b."""
    a, b = np.asarray(a), np.asarray(b)
    peak = float(np.max(np.abs(b)))
    return float(np.max(np.abs(a - b))) / peak if peak else float(np.max(np.abs(a - b)))


def rel(a, b, scale=None):
    scale = abs(b) if scale is None else scale
    return abs(a - b) / scale if scale else abs(a - b)


def _spec(n, alpha, z):
    return make_state("displaced" if z == 0 else "squeezed", alpha, z, n)


def lattice_point_checks(n, beta_hw, alpha, z, omega_ts):
    """Every check at one (n, beta_hw, alpha, z); the oracle state is built once
    and evolved to each wt."""
    th = thermal_params_from(beta_hw)
    spec = _spec(n, alpha, z)
    al, sq = Displacement.from_complex(alpha), Squeeze.from_complex(z)
    base = {"n": n, "beta_hw": beta_hw, "alpha": complex(alpha), "z": complex(z)}
    oracle = fock.oracle_for(spec, th)
    checks, errata = [], []
    for wt in omega_ts:
        params = dict(base, omega_t=wt)
        closed = dens.rho_state(spec, X_WINDOW, th, omega_t=wt)
        c = oracle.at(wt)
        checks.append(Check("oracle_density", params, "sup_rel_error", TOL_ORACLE,
                            sup_rel(fock.marginal_density(c, X_WINDOW), closed)))
        checks.append(Check("general_form", params, "sup_rel_error", TOL_GENERAL,
                            sup_rel(dens.rho_general(X_WINDOW, al, sq, n, th, omega_t=wt),
                                    closed)))
        mu, var = dens.mean_x(al, sq, n, th, omega_t=wt), dens.var_x(al, sq, n, th, omega_t=wt)
        scale = max(abs(mu), math.sqrt(var))
        mass, qmu, qvar = dens.quadrature_moments(spec, th, omega_t=wt)
        checks.append(Check("normalization", params, "abs_integral_deviation", TOL_NORM,
                            abs(mass - 1.0)))
        checks.append(Check("quadrature_mean", params, "rel_error", TOL_MOMENTS,
                            rel(qmu, mu, scale)))
        checks.append(Check("quadrature_variance", params, "rel_error", TOL_MOMENTS,
                            rel(qvar, var)))
        omu, ovar = fock.oracle_moments(c)
        checks.append(Check("oracle_mean", params, "rel_error", TOL_ORACLE_MOMENTS,
                            rel(omu, mu, scale)))
        checks.append(Check("oracle_variance", params, "rel_error", TOL_ORACLE_MOMENTS,
                            rel(ovar, var)))
        if th.is_zero_temperature:
            single = single_mode_density(X_WINDOW, al, sq, n, omega_t=wt)
            checks.append(Check("zero_temperature_reduction", params, "sup_rel_error",
                                TOL_ZERO_T, sup_rel(closed, single)))
        if n == 0:
            checks.append(Check("gaussian_n0", params, "sup_rel_error", TOL_GAUSSIAN,
                                sup_rel(closed, dens.gaussian_n0(X_WINDOW, al, sq, th,
                                                                 omega_t=wt))))
        if n == 1:
            err = sup_rel(dens.quartic_n1(X_WINDOW, al, sq, th, omega_t=wt), closed)
            errata.append({"id": "quartic_n1_vs_general", "params": params,
                           "metric": "sup_rel_error", "measured": err,
                           "agreement": err <= TOL_GAUSSIAN})
    return checks, errata


def vacuum_checks(betas):
    checks = []
    for b in betas:
        th = thermal_params_from(b)
        params = {"beta_hw": b}
        oracle = fock.prepare_thermal_state(0, 0, 0, th)
        ref = dens.rho_vacuum(X_WINDOW, th)
        checks.append(Check("vacuum_oracle", params, "sup_rel_error", TOL_VACUUM,
                            sup_rel(oracle.density(X_WINDOW), ref)))
        closed_drift = max(sup_rel(dens.rho_vacuum(X_WINDOW, th, omega_t=wt), ref)
                           for wt in (0.7, math.pi / 2, 2.0))
        checks.append(Check("vacuum_time_invariance_closed", params, "sup_rel_error", 0.0,
                            closed_drift))
        still = oracle.density(X_WINDOW)
        drift = max(sup_rel(oracle.density(X_WINDOW, omega_t=wt), still)
                    for wt in (0.7, math.pi / 2, 2.0))
        checks.append(Check("vacuum_time_invariance_oracle", params, "sup_rel_error",
                            TOL_VACUUM_TIME, drift))
        rule = gauss_hermite_rule()
        scale = 1.0 / math.sqrt(th.tanh_half)
        qvar = rule.integrate(lambda x: x * x * dens.rho_vacuum(x, th), 0.0, scale)
        checks.append(Check("vacuum_variance", params, "rel_error", TOL_VACUUM_VAR,
                            rel(qvar, 0.5 * th.coth_half)))
        if not th.is_zero_temperature:
            c = oracle.state.coefficients
            k = np.arange(c.shape[0])
            geo = th.tanh_theta ** k / th.cosh_theta
            off = c - np.diag(np.diag(c))
            err = max(float(np.max(np.abs(np.diag(c) - geo))), float(np.max(np.abs(off))))
            checks.append(Check("vacuum_fock_diagonal", params, "max_abs_error",
                                TOL_DIAGONAL, err))
    return checks


def identity_checks(seed=20240601):
    rng = np.random.default_rng(seed)
    checks = []
    zs = rng.uniform(-2.0, 2.0, size=(1000, 2))
    f3 = max(abs(abs(Squeeze(a, b).F3) - 1.0) for a, b in zs)
    checks.append(Check("unit_modulus_F3", {"samples": 1000, "seed": seed}, "max_abs_error",
                        TOL_UNIT_F3, f3))
    xs = np.linspace(-3.0, 3.0, 61)
    worst = 0.0
    for m in range(11):
        for n in range(11):
            direct = hermite_poly(m, xs) * hermite_poly(n, xs)
            worst = max(worst, sup_rel(hermite_product_linearize(m, n)(xs), direct))
    checks.append(Check("hermite_linearization", {"max_degree": 10}, "sup_rel_error",
                        TOL_LINEARIZE, worst))
    N = 30
    worst = 0.0
    for _ in range(3):
        c = rng.normal(size=(N + 1, N + 1)) + 1j * rng.normal(size=(N + 1, N + 1))
        c *= np.exp(-0.25 * np.add.outer(np.arange(N + 1), np.arange(N + 1)))
        c = fock.FockVector2(c / np.linalg.norm(c))
        a = fock.time_evolve(fock.thermalize(c, 0.4), 0.9).coefficients
        b = fock.thermalize(fock.time_evolve(c, 0.9), 0.4).coefficients
        worst = max(worst, float(np.max(np.abs(a - b))))
    checks.append(Check("thermalize_time_evolve_commute", {"cutoff": N, "theta": 0.4,
                                                           "omega_t": 0.9},
                        "max_abs_error", TOL_COMMUTE, worst))
    th = thermal_params_from(2.0)
    mu = dens.mean_x(Displacement(1.0, 0.0), NO_SQUEEZE, 0, th)
    checks.append(Check("spot_mean_x", {"alpha": 1 + 0j, "beta_hw": 2.0, "omega_t": 0.0,
                                        "expected": SPOT_MEAN},
                        "rel_error", TOL_SPOT, rel(mu, SPOT_MEAN)))
    var = dens.var_x(Displacement(), NO_SQUEEZE, 1, th)
    checks.append(Check("spot_var_x", {"n": 1, "z": 0j, "beta_hw": 2.0, "omega_t": 0.0,
                                       "expected": SPOT_VAR},
                        "rel_error", TOL_SPOT, rel(var, SPOT_VAR)))
    return checks


def _point_task(args):
    return lattice_point_checks(*args)


def worker_count():
    try:
        return max(1, int(os.environ.get("TFD_WORKERS", "1")))
    except ValueError:
        return 1


def run_verify(level="quick", workers=None):
    if level not in LATTICES:
        raise ValueError(f"unknown verify level {level!r}")
    lat = LATTICES[level]
    workers = worker_count() if workers is None else workers
    report = VerifyReport(level=level)
    report.checks.extend(identity_checks())
    report.checks.extend(vacuum_checks(lat["beta_hw"]))
    tasks = [(n, b, a, z, lat["omega_t"])
             for n, b, a, z in product(lat["n"], lat["beta_hw"], lat["alpha"], lat["z"])]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_task, tasks))
    else:
        results = [_point_task(t) for t in tasks]
    for checks, errata in results:
        report.checks.extend(checks)
        report.errata.extend(errata)
    return report
