"""Certified sieve constants, permutation densities and sifting experiments."""
from .constants import (
    SieveConstants,
    ThresholdSpec,
    beta_sieve_constants,
    solve_threshold,
    threshold_lhs,
)
from .lod import A_count, LodReport, gauss_reduce, lattice_points_in_region, lod_sum_experiment
from .permdens import (
    CycleType,
    GroupSpec,
    T_exact,
    T_of_group,
    excluded_degrees,
    h_fixed_point_free,
    hw_condition_check,
)
from .sifter import (
    CongruenceClass,
    Region,
    SiftingSetSpec,
    SiftProblem,
    hasse_example_report,
    sift_count,
)
from .specfun import CertifiedValue, DomainError

__version__ = "0.1.0"
