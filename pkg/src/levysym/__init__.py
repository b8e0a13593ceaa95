"""Symmetrization inequalities for Lévy processes, checked numerically.

Lévy triples and their symmetrization, discrete symmetric decreasing
rearrangement, reproducible simulation of the compound-Poisson-plus-Gaussian
approximation, Monte Carlo estimators of exit and Feynman-Kac functionals, and
deterministic quadrature oracles.
"""
from .characteristics import (ApproxComponents, JumpDensity, LevyTriple, UnsupportedTripleError,
                              ValidationReport, approx_exponent, exponent, exponent_star,
                              symmetrize_approx, symmetrize_triple, truncate, validate)
from .domains import Ball, Box, GridMask, Union, domain_from_dict
from .functionals import (EstimateReport, FunctionalSpec, Verdict, compare_reports,
                          estimate_exit_moment, estimate_feynman_kac, estimate_heat_content,
                          estimate_lambda1, estimate_product_functional, estimate_survival,
                          estimate_torsional_rigidity)
from .rearrange import (GridFunction, GridSpec, layer_cake_eval, level_measure, rearrange_grid,
                        symmetrize_domain)
from .rng import Stream
from .sampler import PathGrid, SamplerConfig, sample_increment, sample_jump, sample_path, simulate

__version__ = "0.1.0"

__all__ = [
    "ApproxComponents", "JumpDensity", "LevyTriple", "UnsupportedTripleError", "ValidationReport",
    "approx_exponent", "exponent", "exponent_star", "symmetrize_approx", "symmetrize_triple",
    "truncate", "validate", "Ball", "Box", "GridMask", "Union", "domain_from_dict",
    "EstimateReport", "FunctionalSpec", "Verdict", "compare_reports", "estimate_exit_moment",
    "estimate_feynman_kac", "estimate_heat_content", "estimate_lambda1",
    "estimate_product_functional", "estimate_survival", "estimate_torsional_rigidity",
    "GridFunction", "GridSpec", "layer_cake_eval", "level_measure", "rearrange_grid",
    "symmetrize_domain", "Stream", "PathGrid", "SamplerConfig", "sample_increment", "sample_jump",
    "sample_path", "simulate",
]
