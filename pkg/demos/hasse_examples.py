"""Two worked sifting examples: one with a local obstruction, one without."""
from sievekit import hasse_example_report, sift_count
from sievekit.sifter import iskovskikh_problem, residue_obstruction

# every point in the congruence class makes one factor a non-square mod 4,
# so nothing survives the sieve
pb = iskovskikh_problem(10 ** 4)
res = sift_count(pb)
print("points in class", res.points, "survivors", res.count)
for cert in residue_obstruction(pb):
    print("obstruction", cert)

# sieve dimension estimates put this example outside the admissible range
rep = hasse_example_report("iskovskikh", N=1000, X=10 ** 5)
print("kappa", rep.kappa_estimate, "+/-", rep.kappa_half_width, "->", rep.verdict)

# the binomial family has density 1/q for the non-coprime splitting condition
rep = hasse_example_report("irving", N=50, X=10 ** 5, q=3, r=2)
print("alpha", rep.theta.alpha.estimate, "expected", 1 / 3, "->", rep.verdict)
