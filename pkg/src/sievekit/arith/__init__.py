"""Primes, polynomials over prime fields, and local counting functions."""
from .chebotarev import (
    DensityEstimate,
    ThetaReport,
    chebotarev_density,
    nu_batch,
    ramified_primes,
    split_condition_mask,
    splitting_counts_batch,
    splitting_type,
    theta_estimate,
)
from .counting import (
    h_i_of_r,
    h_partial_sums,
    nu_of_p,
    nu_of_p_gcd,
    nu_of_p_scan,
    psi_k,
    rho_exhaustive,
    rho_i_of_p,
    rho_of,
    rho_of_pk,
)
from .polys import BinaryForm, FactoredBinaryForm, ParseError, parse_polynomial
from .primes import PrimeRange, prime_pi, primes_array, primes_in
