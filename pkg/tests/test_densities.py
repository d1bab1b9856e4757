import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermofield import densities as dens
from thermofield import fock
from thermofield.errors import NegativeDensityError
from thermofield.model import (
    NO_SQUEEZE,
    Displacement,
    OscillatorParams,
    Squeeze,
    make_state,
    thermal_params_from,
)
from thermofield.special_fn import gauss_hermite_rule
from thermofield.states import single_mode_density

ALPHA = Displacement(1.0, 0.5)
ZSQ = Squeeze(0.3, 0.4)
X = np.linspace(-6, 6, 241)


def sup_rel(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_vacuum_values():
    th0 = thermal_params_from(math.inf)
    assert dens.rho_vacuum(0.0, th0) == pytest.approx(np.pi ** -0.5, rel=1e-15)
    th1 = thermal_params_from(1.0)
    assert dens.rho_vacuum(0.0, th1) == pytest.approx(math.sqrt(math.tanh(0.5) / math.pi),
                                                      rel=1e-15)
    # sqrt(tanh(1/2) / pi) = 0.3835316, not 0.383528
    assert dens.rho_vacuum(0.0, th1) == pytest.approx(0.383532, abs=5e-7)


@pytest.mark.parametrize("b", [0.3, 1.0, 10.0])
def test_vacuum_normalized(b):
    th = thermal_params_from(b)
    rule = gauss_hermite_rule(40)
    scale = 1 / math.sqrt(th.tanh_half)
    assert abs(rule.integrate(lambda x: dens.rho_vacuum(x, th), 0, scale) - 1) < 1e-12


def test_sum_intermediates():
    th = thermal_params_from(1.3)
    si = dens.sum_intermediates(X, ALPHA, th, omega_t=0.4)
    assert abs(si.a - math.tanh(th.theta)) < 1e-14
    assert 0 <= si.a < 1
    si0 = dens.sum_intermediates(X, ALPHA, thermal_params_from(math.inf))
    assert si0.a == 0.0


def test_reduction_chain():
    for b in (0.5, 1.0, math.inf):
        th = thermal_params_from(b)
        vac = dens.rho_vacuum(X, th)
        assert np.max(np.abs(dens.rho_tdn(X, Displacement(), 0, th) - vac)) <= 1e-12 * vac.max()
        for n in (0, 1, 3):
            for wt in (0.0, 0.7):
                tdn = dens.rho_tdn(X, ALPHA, n, th, omega_t=wt)
                tsn = dens.rho_tsn(X, ALPHA, NO_SQUEEZE, n, th, omega_t=wt)
                assert np.max(np.abs(tsn - tdn)) <= 1e-12 * tdn.max()


@pytest.mark.parametrize("n", [0, 1, 2, 5, 10])
@pytest.mark.parametrize("b", [0.5, 1.0, 2.0, math.inf])
def test_general_form_matches_closed_form(n, b):
    th = thermal_params_from(b)
    for wt in (0.0, 0.7, math.pi / 2):
        a = dens.rho_general(X, ALPHA, ZSQ, n, th, omega_t=wt)
        c = dens.rho_tsn(X, ALPHA, ZSQ, n, th, omega_t=wt)
        assert sup_rel(a, c) < 1e-10


@pytest.mark.parametrize("n", range(11))
@pytest.mark.parametrize("b", [0.5, 2.0, math.inf])
def test_normalization_up_to_ten(n, b):
    th = thermal_params_from(b)
    for z in (NO_SQUEEZE, ZSQ, Squeeze(0.5, 0)):
        spec = make_state("squeezed", ALPHA.alpha, z.z, n)
        mass, _, _ = dens.quadrature_moments(spec, th, omega_t=0.7)
        assert abs(mass - 1) < 1e-8


def test_normalization_large_n_and_units():
    p = OscillatorParams(3.0, 2.0, 0.7)
    th = thermal_params_from(10.0)
    spec = make_state("squeezed", 1 + 1j, 0.5 + 0.2j, 50)
    mass, mu, var = dens.quadrature_moments(spec, th, p, omega_t=1.1)
    assert abs(mass - 1) < 1e-8
    assert mu == pytest.approx(dens.mean_x(spec.alpha, spec.z, 50, th, p, 1.1), rel=1e-8)
    assert var == pytest.approx(dens.var_x(spec.alpha, spec.z, 50, th, p, 1.1), rel=1e-8)


@pytest.mark.parametrize("n", [0, 1, 3])
@pytest.mark.parametrize("b", [0.5, 1.0, 2.0, math.inf])
@pytest.mark.parametrize("z", [0, 0.5, 0.3 + 0.4j])
def test_moment_consistency(n, b, z):
    th = thermal_params_from(b)
    spec = make_state("squeezed", ALPHA.alpha, z, n)
    for wt in (0.0, 0.7, math.pi / 2):
        mass, mu, var = dens.quadrature_moments(spec, th, omega_t=wt)
        emu, evar = dens.state_moments(spec, th, omega_t=wt)
        assert abs(mu - emu) <= 1e-8 * max(abs(emu), math.sqrt(evar))
        assert abs(var - evar) <= 1e-8 * evar


def test_moment_spot_values():
    th = thermal_params_from(2.0)
    one = Displacement(1.0, 0.0)
    inf = thermal_params_from(math.inf)
    assert dens.mean_x(one, th=inf) == pytest.approx(math.sqrt(2), rel=1e-15)
    # sqrt(coth 0.5) sqrt 2 = 1.4710382 * 1.4142136
    assert dens.mean_x(one, th=th) == pytest.approx(2.0803621866, rel=1e-10)
    assert dens.var_x(Displacement(), n=1, th=th) == pytest.approx(1.969553, abs=5e-7)
    assert dens.var_x(Displacement(), n=0, th=inf) == 0.5
    for b in (0.5, 3.0):
        for wt in (0.0, 1.0, 4.0):
            assert dens.mean_x(Displacement(), th=thermal_params_from(b), omega_t=wt) == 0.0


def test_moments_independent_of_n_and_z_and_alpha():
    th = thermal_params_from(1.0)
    m = {dens.mean_x(ALPHA, z, n, th, omega_t=0.3) for n in (0, 3) for z in (NO_SQUEEZE, ZSQ)}
    assert len(m) == 1
    v = {dens.var_x(a, ZSQ, 2, th, omega_t=0.3) for a in (Displacement(), ALPHA)}
    assert len(v) == 1


def test_time_behaviour():
    th = thermal_params_from(1.0)
    for wt in (0.3, 1.7):
        a = dens.rho_tsn(X, ALPHA, ZSQ, 2, th, omega_t=wt)
        b = dens.rho_tsn(X, ALPHA, ZSQ, 2, th, omega_t=wt + 2 * math.pi)
        assert sup_rel(a, b) < 1e-10
    ts = np.linspace(0, 2 * math.pi, 9)
    mus = [dens.mean_x(ALPHA, th=th, omega_t=t) for t in ts]
    amp = math.sqrt(th.coth_quarter) * math.sqrt(2) * abs(ALPHA.alpha)
    phase = math.atan2(ALPHA.alpha2, ALPHA.alpha1)
    assert np.allclose(mus, amp * np.cos(ts - phase), rtol=0, atol=1e-14)
    vs = {round(dens.var_x(ALPHA, NO_SQUEEZE, 1, th, omega_t=t), 15) for t in ts}
    assert len(vs) == 1


def test_positivity_before_clamp():
    for n, b, z in [(5, 0.5, ZSQ), (10, 2.0, Squeeze(0.5, 0)), (3, math.inf, ZSQ)]:
        th = thermal_params_from(b)
        spec = make_state("squeezed", ALPHA.alpha, z.z, n)
        mu, var = dens.state_moments(spec, th, omega_t=0.7)
        x = np.linspace(mu - 8 * math.sqrt(var), mu + 8 * math.sqrt(var), 400)
        assert dens.rho_state_raw(spec, x, th, omega_t=0.7).min() >= -1e-12


def test_clamp_policy():
    vals, count = dens._clamp(np.array([0.1, -1e-16, 0.0]), "t")
    assert count == 1 and vals.tolist() == [0.1, 0.0, 0.0]
    with pytest.raises(NegativeDensityError):
        dens._clamp(np.array([0.1, -1e-6]), "t")


def test_gaussian_special_case():
    for b in (0.5, 2.0, math.inf):
        th = thermal_params_from(b)
        for wt in (0.0, 0.7):
            g = dens.gaussian_n0(X, ALPHA, ZSQ, th, omega_t=wt)
            r = dens.rho_tsn(X, ALPHA, ZSQ, 0, th, omega_t=wt)
            assert sup_rel(g, r) < 1e-10


def test_quartic_special_case_agrees():
    for b in (0.5, 2.0, math.inf):
        th = thermal_params_from(b)
        q = dens.quartic_n1(X, ALPHA, ZSQ, th, omega_t=0.7)
        r = dens.rho_tsn(X, ALPHA, ZSQ, 1, th, omega_t=0.7)
        assert sup_rel(q, r) < 1e-10


@pytest.mark.parametrize("n", [0, 1, 3])
def test_zero_temperature_single_mode(n):
    th = thermal_params_from(math.inf)
    for alpha in (Displacement(1.0, 0.0), ALPHA):
        for z in (NO_SQUEEZE, ZSQ):
            for wt in (0.0, 0.7, math.pi / 2):
                r = dens.rho_tsn(X, alpha, z, n, th, omega_t=wt)
                s = single_mode_density(X, alpha, z, n, omega_t=wt)
                assert sup_rel(r, s) < 1e-9


def test_oracle_spot_points():
    th = thermal_params_from(1.0)
    x = np.array([-2.0, 0.0, 2.0])
    oracle = fock.prepare_thermal_state(ALPHA, NO_SQUEEZE, 2, th)
    closed = dens.rho_tdn(x, ALPHA, 2, th, omega_t=0.7)
    assert np.max(np.abs(oracle.density(x, omega_t=0.7) / closed - 1)) < 1e-6


def test_profile_and_auto_grid():
    th = thermal_params_from(1.0)
    spec = make_state("squeezed", ALPHA.alpha, ZSQ.z, 2)
    prof = dens.density_profile(spec, th, omega_t=0.7)
    mu, var = dens.state_moments(spec, th, omega_t=0.7)
    assert len(prof.grid) == 801
    assert prof.grid[0] == pytest.approx(mu - 8 * math.sqrt(var))
    assert prof.grid[-1] == pytest.approx(mu + 8 * math.sqrt(var))
    assert abs(prof.integral() - 1) < 1e-6
    assert np.all(prof.values >= 0)
    assert len(list(prof.rows())) == 801


def test_high_n_no_overflow():
    th = thermal_params_from(10.0)
    spec = make_state("displaced", 1, 0, 64)
    x = dens.auto_grid(spec, th, count=201)
    vals = dens.rho_state(spec, x, th)
    assert np.all(np.isfinite(vals)) and vals.max() > 0


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 6), b=st.sampled_from([0.5, 1.0, 3.0, math.inf]),
       a1=st.floats(-2, 2), a2=st.floats(-2, 2), z1=st.floats(-0.8, 0.8),
       z2=st.floats(-0.8, 0.8), wt=st.floats(0, 2 * math.pi))
def test_density_is_normalized_with_right_moments(n, b, a1, a2, z1, z2, wt):
    th = thermal_params_from(b)
    spec = make_state("squeezed", complex(a1, a2), complex(z1, z2), n)
    mass, mu, var = dens.quadrature_moments(spec, th, omega_t=wt)
    emu, evar = dens.state_moments(spec, th, omega_t=wt)
    assert abs(mass - 1) < 1e-8
    assert abs(mu - emu) <= 1e-8 * max(abs(emu), math.sqrt(evar))
    assert abs(var - evar) <= 1e-8 * evar


@pytest.mark.parametrize("b", [0.01, 0.5, 10.0])
def test_maximum_n_normalized_at_any_temperature(b):
    # the Hermite series cancels by far more than double precision here
    th = thermal_params_from(b)
    spec = make_state("squeezed", 1 + 0.5j, 0.3 + 0.4j, 64)
    mass, mu, var = dens.quadrature_moments(spec, th, omega_t=0.7)
    emu, evar = dens.state_moments(spec, th, omega_t=0.7)
    assert abs(mass - 1) < 1e-8
    assert abs(var - evar) <= 1e-8 * evar
