"""Beurling densities, matrix-valued densities and exponential frame bounds for atomic measures."""

__version__ = "0.1.0"

from .density import DensityReport, beurling_density, sliding_extremes
from .framebounds import CubeUnion, epsilon_sweep, frame_bounds, frame_operator_spectrum, frame_quadratic_form
from .generators import (ModelSetSpec, almost_period_search, bessel_blowup_probe, dyadic_measure_bound,
                         dyadic_membership, frame_shift_transfer, intersection_witness, lattice, model_set,
                         perturbed_lattice)
from .groups import (ResidueCellQuery, SubgroupSpec, mean_of_squared_modulus, residue_cell_mass,
                     trig_poly_window_average, uniform_group_test, well_distributed_test)
from .local_l2 import local_l2_demo
from .matrix_density import NodeSet, gram_window, matrix_densities, pair_density_closed_form
from .measure import (PointMeasure, TrigPolynomial, Window, apply_envelope, lebesgue_approx, load_point_set,
                      mass, translation_bounded_check)
from .quadratic import QuadraticIrrational

__all__ = [
    "CubeUnion", "DensityReport", "ModelSetSpec", "NodeSet", "PointMeasure", "QuadraticIrrational",
    "ResidueCellQuery", "SubgroupSpec", "TrigPolynomial", "Window", "almost_period_search",
    "apply_envelope", "bessel_blowup_probe", "beurling_density", "dyadic_measure_bound",
    "dyadic_membership", "epsilon_sweep", "frame_bounds", "frame_operator_spectrum",
    "frame_quadratic_form", "frame_shift_transfer", "gram_window", "intersection_witness", "lattice",
    "lebesgue_approx", "load_point_set", "local_l2_demo", "mass", "matrix_densities",
    "mean_of_squared_modulus", "model_set", "pair_density_closed_form", "perturbed_lattice",
    "residue_cell_mass", "sliding_extremes", "translation_bounded_check", "trig_poly_window_average",
    "uniform_group_test", "well_distributed_test",
]
