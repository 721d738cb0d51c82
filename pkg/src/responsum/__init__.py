"""Quasi-periodic response solutions of strongly damped forced systems.

Solves ``eps M x'' + G x' + eps g(x) = eps f(omega t)`` and the
forced-potential variant ``eps M x'' + G x' + eps dV(x, omega t)/dx = 0`` by a
graded perturbation series in Fourier space, with a tree-expansion oracle,
rigorous propagator bounds and a stiff reference integrator for checking.
"""
from .bifurcation import BifurcationSolveRecord, SeriesParams, residual_H, solve_zeta, sweep_epsilon
from .errors import (ComplexLeak, DegenerateMinimum, EpsilonTooLarge, HypothesisViolation, InsufficientData,
                     NonConvergence, NotPositiveDefinite, OrderTooLarge, ParseError, ResponsumError,
                     SingularMatrix, StepFailure, ValidationError)
from .fourier import FourierMap
from .model import (AUTONOMOUS, FORCED, Polynomial, SystemSpec, TaylorTensors, TrigPolynomialFamily,
                    TrigVectorField, locate_center, taylor_tensors)
from .propagator import SpectralData, small_divisor_scan, spectral_data
from .series import compute_orders, picard_solve, sum_series

__version__ = "0.1.0"

__all__ = [
    "AUTONOMOUS", "FORCED", "BifurcationSolveRecord", "ComplexLeak", "DegenerateMinimum", "EpsilonTooLarge",
    "FourierMap", "HypothesisViolation", "InsufficientData", "NonConvergence", "NotPositiveDefinite",
    "OrderTooLarge", "ParseError", "Polynomial", "ResponsumError", "SeriesParams", "SingularMatrix",
    "SpectralData", "StepFailure", "SystemSpec", "TaylorTensors", "TrigPolynomialFamily", "TrigVectorField",
    "ValidationError", "compute_orders", "locate_center", "picard_solve", "residual_H", "small_divisor_scan",
    "solve_zeta", "spectral_data", "sum_series", "sweep_epsilon", "taylor_tensors",
]
