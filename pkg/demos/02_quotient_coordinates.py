"""Pushing the Toda structures to the quotient coordinates.

The map (q, p) -> (a_i, b_i) with a_i = exp(q_i - q_{i+1}), b_i = p_i is a
surjective submersion; both bivectors push forward, but the recursion
tensor does not, and the projected pair is degenerate, so no recursion
operator exists downstairs.  The obstruction comes with explicit witnesses.
"""

from pnalgebroid import (
    build_toda, project_bivector, projectable_endo_check,
    recursion_operator, DegenerateBivector, rewrite_basic,
)

t = build_toda(2)
epi = t.epi_flaschka
print("quotient map validates:", epi.validate().ok)
print("kernel of the projection:", ", ".join(str(X) for X in epi.kernel_frame()))

print()
print("lam0 projects to lam0_bar:",
      (project_bivector(epi, t.lam0) - t.lam0_bar).is_zero())
print("lam1 projects to lam1_bar:",
      (project_bivector(epi, t.lam1) - t.lam1_bar).is_zero())
print("Hamiltonians rewrite to basic functions:",
      (rewrite_basic(epi, t.H1) - t.H1_bar).is_zero())

# The recursion tensor sees the kernel direction and cannot descend.
rep = projectable_endo_check(epi, t.N)
print()
print("recursion tensor projectable:", rep.ok)
print("witness:", rep.witness())

# Downstairs the first bivector is degenerate (odd-dimensional base), so
# asking for a recursion operator raises with a kernel covector.
try:
    recursion_operator(t.lam0_bar, t.lam1_bar)
except DegenerateBivector as e:
    print()
    print("no recursion operator on the quotient:", e)
