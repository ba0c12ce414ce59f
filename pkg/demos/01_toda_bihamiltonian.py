"""The open Toda lattice as a bi-Hamiltonian system.

Builds the canonical pair of Poisson bivectors on R^{2n}, checks that they
are separately Poisson and compatible, recovers the recursion operator as
the quotient of the two sharps, and climbs the hierarchy of deformed
bivectors.
"""

from pnalgebroid import (
    build_toda, is_poisson, are_compatible, recursion_operator,
    hierarchy_check, bihamiltonian_check, torsion_check,
)

n = 3
t = build_toda(n)
print(f"open Toda lattice with {n} sites, coordinates {t.tangent.base_vars}")

print("lam0 Poisson:", is_poisson(t.lam0).ok)
print("lam1 Poisson:", is_poisson(t.lam1).ok)
print("compatible:  ", are_compatible(t.lam0, t.lam1).ok)

# The recursion operator N = lam1# o (lam0#)^{-1} comes out as a matrix of
# exact expressions over the determinant of lam0; here lam0 is canonical so
# the denominator is 1 and the closed-form tensor is recovered on the nose.
frac = recursion_operator(t.lam0, t.lam1)
N = frac.exact()
print("recursion operator matches the closed form:", (N - t.N).is_zero())
print("torsion-free:", torsion_check(N).ok)

# Deforming lam0 by powers of N produces a ladder of pairwise compatible
# Poisson structures: N^0 lam0 = lam0, N^1 lam0 = lam1, and so on.
rep = hierarchy_check(t.lam0, N, 3)
print("hierarchy of deformed bivectors is pairwise compatible:", rep.ok)

# The two Hamiltonians interlock through the pair: lam0# dH1 = lam1# dH0.
print("bi-Hamiltonian ladder:", bihamiltonian_check(t.lam0, t.lam1, t.H0, t.H1).ok)
