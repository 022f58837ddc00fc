"""Exact cochain-complex computations for grading-restricted vertex algebras."""

from .linear import Q, GradedVector, project, kernel_basis, quotient_dimension
from .ratfun import (RatFun, ratfun, rf_zero, rf_const, rf_var, rf_monomial,
                     rf_pole_pair, rf_pole_origin, rf_add, rf_sub, rf_neg,
                     rf_mul, rf_scale, rf_sum, rf_eval, sn_act, expand,
                     reconstruct, Region, LaurentSlab, homogeneity_degree,
                     NoSolution, Underdetermined)
from .vertex import (VertexSpec, heisenberg, commutative_algebra, mode_act,
                     translate, skew_vertex, pole_bounds, check_axioms,
                     load_spec, save_spec)

__version__ = "0.1.0"
