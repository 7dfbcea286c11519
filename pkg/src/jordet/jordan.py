"""Matrix units, the Jordan product and the symmetric-square coordinates.

Conventions used throughout the package:

* a matrix unit ``e_ij`` (1-based ``i, j``) is flattened to the 0-based slot
  ``(i - 1) * n + (j - 1)``; ``vec`` is row-major;
* an unordered pair of slots ``alpha <= beta`` is stored at the lexicographic
  position returned by :func:`sym_index`, giving ``D = N (N + 1) / 2`` coordinates
  with ``N = n * n``;
* ``sigma(x, y)`` has coordinate ``x_a y_b + x_b y_a`` at ``{a, b}`` (``a < b``)
  and ``x_a y_a`` on the diagonal, so a symmetric bilinear map ``B`` is the
  functional ``lam`` with ``lam[{a, b}] = B(e_a, e_b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .linalg import DimensionMismatch, Matrix, Ring, SpanAccumulator, nullspace

__all__ = [
    "IndexOutOfRange",
    "SizeMismatch",
    "unit",
    "identity",
    "jordan",
    "jordan_operator",
    "sym_dim",
    "sym_index",
    "sym_pair",
    "slot",
    "sigma",
    "sigma_sparse",
    "jordan_sym_matrix",
    "apply_jordan_sym",
    "KernelBasis",
    "kernel_of_jordan",
]


class IndexOutOfRange(IndexError):
    pass


class SizeMismatch(DimensionMismatch):
    pass


def _check_square(x: Matrix) -> int:
    if x.rows != x.cols:
        raise SizeMismatch(f"expected a square matrix, got {x.rows}x{x.cols}")
    return x.rows


def _check_pair(x: Matrix, y: Matrix) -> int:
    n = _check_square(x)
    if _check_square(y) != n:
        raise SizeMismatch(f"size mismatch: {n} vs {y.rows}")
    if x.ring != y.ring:
        raise SizeMismatch(f"ring mismatch: {x.ring} vs {y.ring}")
    return n


def slot(n: int, i: int, j: int) -> int:
    """0-based flattened slot of the 1-based unit ``e_ij``."""
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexOutOfRange(f"unit e_{i},{j} outside 1..{n}")
    return (i - 1) * n + (j - 1)


def unit(n: int, i: int, j: int, ring: Ring | None = None) -> Matrix:
    """The matrix unit ``e_ij`` (1-based indices)."""
    from .linalg import QQ

    ring = QQ if ring is None else ring
    s = slot(n, i, j)
    m = Matrix.zeros(ring, n)
    m.data[s // n][s % n] = ring.one
    return m


def identity(n: int, ring: Ring) -> Matrix:
    return Matrix.identity(ring, n)


def jordan(x: Matrix, y: Matrix) -> Matrix:
    """``x o y = xy + yx``."""
    _check_pair(x, y)
    return x @ y + y @ x


def jordan_operator(x: Matrix) -> Matrix:
    """The ``n^2 x n^2`` matrix of ``y -> x o y`` acting on ``vec(y)``."""
    n = _check_square(x)
    ring = x.ring
    ring.require_field("jordan_operator")
    N = n * n
    t = [[0] * N for _ in range(N)]
    xd = x.data
    for a in range(n):
        for b in range(n):
            row = t[a * n + b]
            for c in range(n):
                # (xy)_ab picks up x_ac y_cb, (yx)_ab picks up y_ac x_cb
                row[c * n + b] += xd[a][c]
                row[a * n + c] += xd[c][b]
    return Matrix(ring, t)


def sym_dim(n: int) -> int:
    N = n * n
    return N * (N + 1) // 2


def sym_index(alpha: int, beta: int, N: int) -> int:
    """Position of the unordered slot pair ``{alpha, beta}`` (0-based slots)."""
    if alpha > beta:
        alpha, beta = beta, alpha
    return alpha * N - alpha * (alpha - 1) // 2 + (beta - alpha)


@lru_cache(maxsize=None)
def _pairs(N: int) -> tuple[tuple[int, int], ...]:
    return tuple((a, b) for a in range(N) for b in range(a, N))


def sym_pair(pos: int, N: int) -> tuple[int, int]:
    """Inverse of :func:`sym_index`."""
    return _pairs(N)[pos]


def sigma_sparse(x: Matrix, y: Matrix) -> dict[int, object]:
    """Nonzero symmetric-square coordinates of the pair ``(x, y)``."""
    n = _check_pair(x, y)
    N = n * n
    ring = x.ring
    m = ring.modulus
    xs = [(k, v) for k, v in enumerate(x.vec()) if v]
    ys = [(k, v) for k, v in enumerate(y.vec()) if v]
    out: dict[int, object] = {}
    for a, xa in xs:
        for b, yb in ys:
            pos = sym_index(a, b, N)
            out[pos] = out.get(pos, 0) + xa * yb
    if m is not None:
        out = {k: v % m for k, v in out.items()}
    return {k: ring(v) for k, v in out.items() if v}


def sigma(x: Matrix, y: Matrix) -> list:
    """Dense symmetric-square coordinates of ``(x, y)`` (length ``sym_dim(n)``)."""
    n = _check_pair(x, y)
    v = [x.ring.zero] * sym_dim(n)
    for k, c in sigma_sparse(x, y).items():
        v[k] = c
    return v


def _unit_product(a: int, b: int, n: int) -> list[tuple[int, int]]:
    """``e_a o e_b`` as (slot, coefficient) pairs."""
    i, j = divmod(a, n)
    k, m = divmod(b, n)
    out: dict[int, int] = {}
    if j == k:
        out[i * n + m] = out.get(i * n + m, 0) + 1
    if m == i:
        out[k * n + j] = out.get(k * n + j, 0) + 1
    return [(s, c) for s, c in out.items() if c]


@lru_cache(maxsize=None)
def _jordan_columns(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    N = n * n
    return tuple(tuple(_unit_product(a, b, n)) for a, b in _pairs(N))


def jordan_sym_matrix(n: int, ring: Ring) -> Matrix:
    """The ``n^2 x D`` matrix ``J`` with ``J sigma(x, y) = vec(x o y)``."""
    ring.require_field("jordan_sym_matrix")
    N = n * n
    cols = _jordan_columns(n)
    data = [[0] * len(cols) for _ in range(N)]
    for c, entries in enumerate(cols):
        for s, coef in entries:
            data[s][c] += coef
    return Matrix(ring, data)


def apply_jordan_sym(v, n: int, ring: Ring) -> list:
    """``J v`` for a dense or sparse symmetric-square vector, without building ``J``."""
    N = n * n
    cols = _jordan_columns(n)
    out = [0] * N
    items = v.items() if isinstance(v, dict) else enumerate(v)
    for c, x in items:
        if x:
            for s, coef in cols[c]:
                out[s] += coef * x
    return [ring(x) for x in out]


@dataclass(frozen=True)
class KernelBasis:
    """Reduced row-echelon basis of ``K = ker J`` inside the symmetric square."""

    n: int
    ring: Ring
    vectors: tuple[tuple, ...]

    @property
    def dim(self) -> int:
        return len(self.vectors)

    @property
    def ambient_dim(self) -> int:
        return sym_dim(self.n)

    def accumulator(self) -> SpanAccumulator:
        acc = SpanAccumulator(self.ring, self.ambient_dim)
        acc.extend(self.vectors)
        return acc

    def contains(self, v: Sequence | dict) -> bool:
        """Membership in ``K``, decided by ``J v = 0``."""
        return all(x == 0 for x in apply_jordan_sym(v, self.n, self.ring))


@lru_cache(maxsize=None)
def kernel_of_jordan(n: int, ring: Ring) -> KernelBasis:
    """Basis of the relations ``sum x_t o y_t = 0`` in symmetric-square form."""
    ring.require_field("kernel_of_jordan")
    if n < 1:
        raise IndexOutOfRange("n must be positive")
    raw = nullspace(jordan_sym_matrix(n, ring))
    acc = SpanAccumulator(ring, sym_dim(n))
    acc.extend(raw)
    return KernelBasis(n, ring, tuple(tuple(v) for v in acc.basis))
