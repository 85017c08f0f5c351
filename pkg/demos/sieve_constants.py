"""Beta-sieve constants and the thresholds built from them."""
import numpy as np

from sievekit import beta_sieve_constants, excluded_degrees
from sievekit.constants import solve_threshold_cached
from sievekit.selfcheck import degree_bound

# both start at 1; A rises and B falls as kappa approaches 1/2
for kappa in np.linspace(0.05, 0.45, 9):
    c = beta_sieve_constants(float(kappa))
    print(f"kappa={kappa:.2f}  A={c.A.value:.6f}  B={c.B.value:.6f}  r={c.r.value:.6f}")

# each threshold root carries its own error radius
for variant in ("quadratic-general", "cubic", "biquadratic-corollary"):
    root = solve_threshold_cached(variant)
    print(f"{variant:24s} {root.value:.7f} +/- {root.error_radius:.1e}")

bound = degree_bound()
print("degree bound", bound.value)

# degrees whose symmetric-group density exceeds the bound
print("excluded", excluded_degrees(bound, n_max=200))
