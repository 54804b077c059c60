"""Why the W catalog beats sorted insertion.

Greedy grouping merges strings under pivots such as YYYZ whose own weight in
the target is zero; the catalog keeps one group per qubit pair and letter.

Run: python demos/w_grouping.py
"""

from oasis_dfe import grouping, oasis_st, states
from oasis_dfe.pauli import char_value

n = 4
O = states.make_w(n)
si = grouping.group_target(O)
cat = oasis_st.w_group_catalog(n)
print(f"sorted insertion: {si.num_groups} groups, catalog: {cat.num_groups} groups")

for g in si.groups:
    if len(g.members) > 1 and abs(char_value(O, g.pivot)) < 1e-12:
        print(f"  pivot {g.pivot} has chi = 0 but covers {g.labels()}")

rho = states.depolarize(O, 0.1)
budget = grouping.EstimationBudget(0.1, 0.1)
_, v_si, s_si = grouping.gdfe_exact_moments(rho, si, budget)
target = oasis_st.StructuredTarget("W", n)
l, m1, m2 = oasis_st.structured_budget(target)
_, v_st, s_st = oasis_st.exact_moments_st(target, rho, l, (m1, m2))
print(f"G-DFE     MSE {v_si:.3e} with {s_si:.0f} shots")
print(f"catalog   MSE {v_st:.3e} with {s_st:.0f} shots (m1={m1}, m2={m2})")
