"""Remainder sums for lattice-point counts in sublattices."""
import numpy as np

from sievekit import lod_sum_experiment

Ns = [500, 1000, 2000, 4000]
rep = lod_sum_experiment("x^2+y^2", "y*(x^2+y^2)", Ns, e1=0.4, e2=0.4)

for N, d1, d2, total in zip(rep.N, rep.D1, rep.D2, rep.totals):
    print(f"N={N:5d}  D1={d1:4d}  D2={d2:4d}  sum|r|={total:10.1f}  sum/N^2={total / N**2:.4f}")

# a slope below 2 means the remainders are smaller than the trivial bound
print("slope", rep.slope)

# where the remainder mass sits, by dyadic block of (d1, d2)
last = rep.blocks[-1]
share = {k: v / rep.totals[-1] for k, v in sorted(last.items(), key=lambda kv: -kv[1])[:5]}
print("largest blocks", {k: round(v, 3) for k, v in share.items()})
print("log-log fit check", np.polyfit(np.log(Ns), np.log(rep.totals), 1)[0])
