##
# Sparse recovery with three schedules on the same l1-regularized
# least-absolute-deviations problem: the classical forward-backward
# iteration, plain dual averaging, and the leap-frog schedule whose
# backward step keeps growing.  The growing step is what prunes the
# iterate down to the planted support.
##
import numpy as np

from xrda.problems import build_problem, synthetic_sparse_data
from xrda.reference import reference_optimum
from xrda.regularizers import L1Penalty
from xrda.geometry import EuclideanMirror
from xrda.schedules import schedule_preset
from xrda.solver import run

A, b, x_true = synthetic_sparse_data("lad", d=100, m=50, k=5, noise=0.0, seed=201)
problem = build_problem("lad", L1Penalty(0.2), EuclideanMirror(), A=A, b=b)
ref = reference_optimum(problem, tol=1e-8)
print("reference: f* = %.6f  (%s, certified to %.1e)"
      % (ref.f_star, ref.method, ref.certified_gap))
print("planted support size:", np.count_nonzero(x_true),
      " reference support size:", np.count_nonzero(np.abs(ref.x_star) > 1e-10))
print()

results = {}
for kind in ("forward_backward", "rda", "leap_frog"):
    results[kind] = run(problem, schedule_preset(kind), 3000, stride=500,
                        reference=ref).rows

print("     n | fwd-bwd gap    nnz | rda gap        nnz | leap-frog gap  nnz")
print("-" * 70)
for i in range(len(results["rda"])):
    row = [results[k][i] for k in ("forward_backward", "rda", "leap_frog")]
    print("%6d | %12.3e %5d | %12.3e %5d | %12.3e %5d"
          % (row[0].n, row[0].gap_best, row[0].nnz,
             row[1].gap_best, row[1].nnz, row[2].gap_best, row[2].nnz))

print()
print("All three close the objective gap at the same n^(-1/2) rate, but only")
print("the growing backward step of leap_frog zeroes out the 95 spurious")
print("coordinates; forward-backward keeps them small-but-nonzero forever.")
