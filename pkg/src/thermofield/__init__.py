"""Thermofield dynamics of a harmonic oscillator.

Closed-form coordinate wavefunctions, position densities and moments of the
thermal vacuum, thermalized displaced number states and thermalized squeezed
number states, with a truncated doubled-Fock-space oracle to check them.
"""
from .densities import (
    DensityProfile,
    SumIntermediates,
    density_profile,
    mean_x,
    quadrature_moments,
    rho_general,
    rho_state,
    rho_tdn,
    rho_tsn,
    rho_vacuum,
    state_moments,
    sum_intermediates,
    var_x,
)
from .errors import ConvergenceError, CutoffError, DomainError, NegativeDensityError
from .fock import (
    FockVector1,
    FockVector2,
    OperatorMatrix,
    displaced_squeezed_number_vector,
    ladder_matrices,
    marginal_density,
    matrix_exp_apply,
    oracle_moments,
    prepare_thermal_state,
    thermalize,
    tilde_vector,
    time_evolve,
)
from .model import (
    Displacement,
    OscillatorParams,
    Squeeze,
    ThermalParams,
    ThermalVacuum,
    ThermalizedDisplacedNumber,
    ThermalizedSqueezedNumber,
    TimePoint,
    make_state,
    squeeze_from,
    thermal_coords,
    thermal_params_from,
    time_point,
)
from .special_fn import (
    HermiteExpansion,
    QuadratureRule,
    binomial,
    gauss_hermite_rule,
    hermite_fn,
    hermite_poly,
    hermite_product_linearize,
    ln_factorial,
)
from .states import (
    WavefunctionSample,
    psi_displaced_number,
    psi_squeezed_number,
    psi_state,
    psi_thermal_vacuum,
    psi_tdn,
    psi_tsn,
)

__version__ = "0.1.0"
