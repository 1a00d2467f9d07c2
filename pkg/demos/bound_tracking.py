##
# The convergence guarantee is fully computable: alpha_n * D(x*, x_1)
# plus the accumulated (M^2 / 2 sigma) sum s_i^2 / alpha_i, divided by
# sum s_i.  This script runs dual averaging on a small logistic + l1
# problem and prints the measured gaps next to the guarantee at every
# logged n.  The bound holds for the best iterate so far and for the
# step-weighted average alike.
##
import numpy as np

from xrda.geometry import EuclideanMirror
from xrda.problems import build_problem, synthetic_sparse_data
from xrda.reference import reference_optimum
from xrda.regularizers import L1Penalty
from xrda.schedules import schedule_preset
from xrda.solver import run

A, b, _ = synthetic_sparse_data("logistic", d=20, m=50, k=5, noise=0.1, seed=102)
problem = build_problem("logistic", L1Penalty(0.1), EuclideanMirror(), A=A, b=b)
ref = reference_optimum(problem, tol=1e-8)

print("f* = %.9f via %s, certificate %.2e" % (ref.f_star, ref.method, ref.certified_gap))
print("subgradient norm bound M = %.4f" % problem.M)
print()

res = run(problem, schedule_preset("rda", c=2.0), 20_000, stride=2000, reference=ref)

print("     n   gap(best)   gap(avg)    guarantee   ratio")
for row in res.rows:
    print("%6d   %.3e   %.3e   %.3e   %5.1f%%"
          % (row.n, row.gap_best, row.gap_avg, row.bound,
             100.0 * row.gap_best / row.bound))

print()
print("The guarantee decays like n^(-1/2) and is never violated; on easy")
print("instances the measured gap runs orders of magnitude below it.")
