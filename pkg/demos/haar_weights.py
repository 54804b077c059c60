"""Optimised POVM weights for a Haar-random 3-qubit target.

Solves the weight LP, checks it against SciPy's HiGHS, and compares the
exact per-shot variance with grouped DFE at the same number of shots.

Run: python demos/haar_weights.py
"""

import numpy as np
from scipy.optimize import linprog

from oasis_dfe import grouping, oasis_gt, states
from oasis_dfe.measurement import make_rng

n = 3
O = states.make_haar(n, seed=11)
rho = states.depolarize(O, 0.1)
povm = oasis_gt.build_pauli_povm(n)

weights, law, objective = oasis_gt.optimize_weights(povm, O)
print(f"objective {objective:.10f}, settings with q > 0: {len(law.support)} of {povm.num_settings}")

p = oasis_gt.assemble_lp(povm, O)
ref = linprog(p.c, A_ub=p.A_ub, b_ub=p.b_ub, A_eq=p.A_eq, b_eq=p.b_eq,
              bounds=[(lo if np.isfinite(lo) else None, None) for lo in p.lower], method="highs")
print(f"HiGHS on the explicit LP: {ref.fun:.10f}")

mean, var = oasis_gt.exact_moments_gt(rho, weights, law)
print(f"mean {mean:.6f} (exact {states.exact_fidelity(rho, O):.6f}), single-shot variance {var:.4f}, bound {objective**2:.4f}")

budget = grouping.EstimationBudget(0.1, 0.1)
gm, gv, gshots = grouping.gdfe_exact_moments(rho, grouping.group_target(O), budget)
N = int(round(gshots))
print(f"G-DFE: {gshots:.1f} expected shots, MSE {gv:.3e}")
print(f"weights at N={N}: MSE {var / N:.3e}")

est = [oasis_gt.gt_estimate(rho, weights, law, N, make_rng(3, i)).estimate for i in range(200)]
print(f"200 runs: empirical MSE {np.mean((np.array(est) - mean) ** 2):.3e}")
