"""Simulation and exponent analysis for the inhomogeneous nonlinear Schroedinger equation

    i u_t + Laplacian u + mu |x|^-b |u|^alpha u = 0.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .exponents import (INF, ExponentPair, FeasibilityReport, ProblemParams, alpha_thresholds,
                        critical_sobolev, decay_exponent, is_admissible, lemma_local_pairs,
                        lemma_scattering_pairs, lemma_weighted_pairs, lwp_regime, strauss_exponent)
from .grid import (ComplexField, Grid, SingularWeight, gaussian_data, read_field, sample_weight,
                   spectral_gradient, transform_forward, transform_inverse, write_field)
from .observables import (ObservableSample, TimeSeries, decay_fit, energy, g_decay_fit, lq_norm,
                          mass, potential_G, pseudoconformal_residual, strichartz_window_norm,
                          v_transform, virial_residual, weighted_field)
from .scattering import ScatterReport, cauchy_defect, free_propagate_back, sigma_norm
from .solver import GuardConfig, SolverState, evolve, linear_substep, nonlinear_substep, strang_step
