"""Geometric spectral inversion of two-fermion binding-energy curves.

Given ground-state energies E = F(v) of H = -Delta + v f(r), this package
reconstructs the shape f(r) by envelope iteration, computes the forward
spectra, and fits the exact shifted-Coulomb / Hulthen model curves.
"""
from .dataio import DataSet, builtin, labels, load, save
from .eigensolver import (EigenProblem, EigenResult, energy_curve,
                          solve_ground_state, solve_state)
from .inversion import (InversionConfig, InversionRun,
                        estimate_critical_coupling, invert, iterate_once)
from .models import (CoulombModelParams, FitReport, coulomb_ground_curve,
                     coulomb_level, fit_coulomb, hulthen_equivalent,
                     hulthen_level)
from .potentials import (Coulomb, Hulthen, PotentialShape, ShiftedCoulomb,
                         Tabulated, Yukawa, affine_transform,
                         check_singular_class)
from .spectral import (KFunction, KineticPotential, SpectralCurve,
                       build_curve, energy_from_k,
                       energy_from_kinetic_potential, k_function_from_curve,
                       k_function_from_shape, kinetic_potential_from_curve)

__version__ = "0.1.0"

__all__ = [
    "DataSet", "builtin", "labels", "load", "save",
    "EigenProblem", "EigenResult", "energy_curve", "solve_ground_state",
    "solve_state",
    "InversionConfig", "InversionRun", "estimate_critical_coupling",
    "invert", "iterate_once",
    "CoulombModelParams", "FitReport", "coulomb_ground_curve",
    "coulomb_level", "fit_coulomb", "hulthen_equivalent", "hulthen_level",
    "Coulomb", "Hulthen", "PotentialShape", "ShiftedCoulomb", "Tabulated",
    "Yukawa", "affine_transform", "check_singular_class",
    "KFunction", "KineticPotential", "SpectralCurve", "build_curve",
    "energy_from_k", "energy_from_kinetic_potential",
    "k_function_from_curve", "k_function_from_shape",
    "kinetic_potential_from_curve",
]
