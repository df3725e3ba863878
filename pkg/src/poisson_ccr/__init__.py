"""Poisson and compound Poisson product systems checked against CCR flows.

The package builds multiplicative Poisson functionals on a lattice grid over a
polyhedral cone, compares them with exponential vectors in symmetric Fock
space, and certifies the identification by exact pathwise identities and
Monte Carlo estimates.
"""

from .cone import InvariantSet, PolyhedralCone, Region, orthant, region, wedge
from .fock import FockVector, ccr_product, fock_inner, second_quantize
from .l2grid import Grid, GridError, GridFunction, Window, adjoint_shift, inner, restrict, shift
from .pointproc import (
    LevyMeasure,
    MarkedConfiguration,
    MCEstimate,
    PointConfiguration,
    PoissonSampler,
    MarkedSampler,
    compound_laplace_rhs,
    eta_count,
    exp_functional,
    master_equation_rhs,
    mc_mean,
    sample_marked,
    sample_poisson,
    xi_mass,
)
from .prodsys import (
    MarkedGrid,
    MarkedLabel,
    MeasurableLog,
    SigmaLabel,
    decompose,
    embed_g0,
    project_Qa,
    shift_sigma,
    sigma_eval,
    sigma_inner_mc,
    sigma_product,
    theta_check,
    totality_rank,
    u_from_f,
    xi_vector_eval,
)

__version__ = "0.1.0"
