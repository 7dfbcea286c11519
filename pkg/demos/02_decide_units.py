"""Sampling the fiber of each matrix unit of M_3.

For every unit e_ij the decision procedure draws random x, solves x o y = e_ij
for the whole affine family of y, and feeds the differences into an
incremental row-echelon span.  Once the span reaches dim ker J = 36 the unit
is Jordan product determined; the rank trace shows how fast that happens.
"""

from jordet import Strategy, decide, ring_create, unit

F5 = ring_create("Fp", 5)

for i in range(1, 4):
    for j in range(1, 4):
        rep = decide(unit(3, i, j, F5), Strategy.random(seed=42, max_samples=5000))
        steps = sorted(set(rep.trace))
        print(f"e_{i}{j}: {rep.verdict:14s} span {rep.dim_span}/{rep.dim_kernel} "
              f"after {rep.samples_used} samples; ranks seen {steps[:4]}...{steps[-1]}")

# At n = 2 the fiber is small enough to sweep completely.
rep = decide(unit(2, 1, 1, F5), Strategy.exhaustive(early_exit=False))
print(f"\nn=2, e_11 over F_5, all {rep.samples_used} x: {rep.verdict} "
      f"({rep.dim_span}/{rep.dim_kernel})")
