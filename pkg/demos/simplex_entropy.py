##
# Optimization over the probability simplex with the entropy mirror map.
# The backward step here is a multiplicative update followed by
# normalization (exponentiated gradient), so iterates stay strictly
# positive and sum to one by construction, with no projection step.
#
# Minimizing a linear cost c . x over the simplex has the optimum at the
# cheapest vertex, which the iterates approach from the interior.
##
import numpy as np

from xrda.geometry import NegativeEntropyMirror
from xrda.problems import build_problem
from xrda.reference import reference_optimum
from xrda.regularizers import SimplexIndicator
from xrda.schedules import schedule_preset
from xrda.solver import averaged_iterate, run

c = np.array([0.3, -1.2, 0.4, 0.9, -0.7])
problem = build_problem("linear", SimplexIndicator(), NegativeEntropyMirror(), c=c)
ref = reference_optimum(problem)
print("cost vector:", c)
print("optimum is the vertex e_%d with value %.1f" % (int(np.argmin(c)), ref.f_star))
print()

res = run(problem, schedule_preset("forward_backward"), 5000, stride=1000,
          reference=ref)

x = res.state.x
print("final iterate (n = %d):" % res.state.n)
print("  ", np.array2string(x, precision=6, suppress_small=True))
print("   min entry %.2e, sum %.15f" % (x.min(), x.sum()))
print("   objective gap %.3e" % (problem.objective(x) - ref.f_star))

avg = averaged_iterate(res.state)
print("weighted average gap %.3e" % (problem.objective(avg) - ref.f_star))
print()
print("Mass concentrates on coordinate %d; every iterate was a valid"
      % int(np.argmin(c)))
print("probability vector along the way.")
