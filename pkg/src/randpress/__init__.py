"""Numerical thermodynamic formalism for expanding random maps.

Fiberwise transfer operators, Gibbs/conformal cylinder measures, expected
pressure, Bowen dimension of random fractal fibers, the essential vs
quasi-deterministic dichotomy, multifractal Legendre spectra, inducing for
maps expanding only in the mean, and random polynomial Julia systems.
"""

__version__ = "0.1.0"

from .base import (
    BaseProcess,
    RunningStats,
    SymbolPath,
    birkhoff_stats,
    deterministic_process,
    iid_process,
    periodic_process,
    sample_path,
)
from .fibers import (
    FiberFamily,
    QuadraticFamily,
    cantor_family,
    doubling_family,
    mean_example_family,
    quadratic_family,
    two_slope_family,
)
from .transfer import (
    BranchConstant,
    FiberFunction,
    GeometricT,
    MultifractalQT,
    Shifted,
    apply_transfer,
    conformal_cylinder_masses,
    constant_function,
    correlation_series,
    distortion_check,
    grid_function,
    invariant_density,
    iterate_transfer,
    lambda_trace,
)
from .pressure import (
    bowen_dimension,
    expected_pressure,
    pressure_convexity_probe,
    pressure_trace,
)
from .classify import asymptotic_variance, classify_system, gibbs_ratio_extremes
from .multifractal import (
    legendre_spectrum,
    temperature,
    temperature_curve,
    temperature_derivative,
)
from .induce import (
    find_expanding_set,
    induced_path,
    induced_pressure_consistency,
    mean_example_bowen,
)
from .julia import inverse_tree, julia_bowen, julia_pressure
