"""Maps that look like derivations at a single point.

A map tau with tau(I) = 0 is Jordan-derivable at A if
tau(A) = tau(S) o T + S o tau(T) whenever S o T = A.  Collecting these linear
conditions over the fiber of e_12 in M_3(F_7) leaves an 8-dimensional space,
and every map in it is a Jordan derivation: the inner derivations ad_M,
one for each M modulo scalars.

The same fiber answers the multiplicative question.  A conjugation passes;
a map nudged off the identity is caught by an explicit pair (S, T).
"""

import random

from jordet import (
    LinMap,
    Matrix,
    NotInvertible,
    Strategy,
    derivable_space,
    inner_automorphism,
    inner_derivation,
    multiplicative_check,
    ring_create,
    unit,
)

F5 = ring_create("Fp", 5)
F7 = ring_create("Fp", 7)

rep = derivable_space(unit(3, 1, 2, F7))
print(f"constraint rank {rep.constraint_rank} of 81 unknowns -> solution dim {rep.solution_dim}")
print(f"all solutions are Jordan derivations: {rep.all_solutions_are_jordan_derivations}")
print(f"slices used: {rep.pairs_used} (stopped early: {rep.certified_early})")

d = inner_derivation(unit(3, 1, 2, F7))
print("\nad_{e_12}(e_21) =")
print(d(unit(3, 2, 1, F7)))

rng = random.Random(3)
while True:
    s = Matrix(F5, [[rng.randrange(5) for _ in range(3)] for _ in range(3)])
    try:
        phi = inner_automorphism(s)
        break
    except NotInvertible:
        pass
a = unit(3, 1, 2, F5)
print("\nconjugation:", multiplicative_check(phi, a, Strategy.random(seed=1)).outcome)

rows = Matrix.identity(F5, 9).tolist()
rows[0][1] = 1
bent = LinMap(3, Matrix(F5, rows))
rep = multiplicative_check(bent, a, Strategy.random(seed=1))
S, T = rep.hypothesis_failure
print("bent identity:", rep.outcome)
print("  S =", S.tolist(), " T =", T.tolist())
