"""The Jordan product factors through the symmetric square.

Every pair (x, y) gives a vector sigma(x, y) in Sym^2 of the unit coordinates,
and the Jordan product x o y = xy + yx is a fixed linear map J applied to it.
The kernel of J is where all the freedom lives: a point A is determined
exactly when the fiber differences sigma(x, y) - sigma(A/2, I) fill ker J.
"""

import random

from jordet import QQ, Matrix, jordan, kernel_of_jordan, ring_create, sigma
from jordet.jordan import jordan_sym_matrix, sym_dim

F7 = ring_create("Fp", 7)

rng = random.Random(1)
x = Matrix(F7, [[rng.randrange(7) for _ in range(3)] for _ in range(3)])
y = Matrix(F7, [[rng.randrange(7) for _ in range(3)] for _ in range(3)])

print("x o y computed directly:")
print(jordan(x, y))
J = jordan_sym_matrix(3, F7)
print("and through J . sigma(x, y):")
print(Matrix.from_vec(F7, J.apply(sigma(x, y)), 3))

print()
for n in (2, 3, 4):
    kb = kernel_of_jordan(n, QQ)
    print(f"n={n}: dim Sym^2 = {sym_dim(n):3d}, dim ker J = {kb.dim:3d} (= {sym_dim(n)} - {n * n})")
