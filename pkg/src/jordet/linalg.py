"""Exact scalar arithmetic and dense linear algebra over small coefficient rings.

Three rings are supported:

* ``Q`` -- rationals, elements are :class:`fractions.Fraction` (unbounded).
* ``F_p`` -- prime field with ``p`` not dividing 6, elements are ints in ``[0, p)``.
* ``Z/m`` -- residue ring with ``gcd(m, 6) = 1``; usable for arithmetic only
  (elimination, solving and rank need a field and raise :class:`CapabilityError`).

Elements are plain Python values so that hot loops stay cheap; a :class:`Ring`
knows how to coerce, combine and print them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "RingRejected",
    "CapabilityError",
    "DimensionMismatch",
    "NotInvertible",
    "Ring",
    "QQ",
    "ring_create",
    "parse_ring",
    "Matrix",
    "rref",
    "solve_linear",
    "nullspace",
    "SpanAccumulator",
]


class RingRejected(ValueError):
    """The requested coefficient ring is not allowed (6 not invertible, bad modulus)."""


class CapabilityError(TypeError):
    """A field-only operation was requested over a replay-only ring."""


class NotInvertible(ZeroDivisionError):
    pass


class DimensionMismatch(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


_SCALAR_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


@dataclass(frozen=True)
class Ring:
    """A validated coefficient ring.

    Use :func:`ring_create` (or :func:`parse_ring`) rather than the constructor so
    that the invertibility of 6 is checked.
    """

    kind: str  # "Q", "Fp" or "Zm"
    modulus: int | None = None
    _inv_cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    # -- identity -----------------------------------------------------------
    @property
    def is_field(self) -> bool:
        return self.kind != "Zm"

    @property
    def capability(self) -> str:
        return "Field" if self.is_field else "ReplayOnly"

    @property
    def is_finite(self) -> bool:
        return self.kind != "Q"

    def __str__(self) -> str:
        if self.kind == "Q":
            return "Q"
        if self.kind == "Fp":
            return f"F_{self.modulus}"
        return f"Z/{self.modulus}"

    @property
    def spec(self) -> str:
        """Command-line spelling: ``q``, ``fp:P`` or ``zm:M``."""
        if self.kind == "Q":
            return "q"
        return f"{'fp' if self.kind == 'Fp' else 'zm'}:{self.modulus}"

    def require_field(self, what: str = "this operation") -> None:
        if not self.is_field:
            raise CapabilityError(f"{what} needs a field; {self} is replay-only")

    # -- elements -----------------------------------------------------------
    @property
    def zero(self):
        return Fraction(0) if self.modulus is None else 0

    @property
    def one(self):
        return Fraction(1) if self.modulus is None else 1

    def __call__(self, value):
        """Coerce an int, Fraction or scalar literal into a canonical element."""
        if isinstance(value, str):
            return self.parse(value)
        m = self.modulus
        if m is None:
            return Fraction(value)
        if isinstance(value, int):
            return value % m
        value = Fraction(value)
        if value.denominator == 1:
            return value.numerator % m
        return value.numerator * self._invert(value.denominator % m) % m

    def parse(self, text: str):
        """Parse ``[sign]int[/int]``; a denominator must be invertible in the ring."""
        match = _SCALAR_RE.match(text)
        if not match:
            raise ValueError(f"bad scalar literal {text!r}")
        num = int(match.group(1))
        den = int(match.group(2)) if match.group(2) else 1
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return self(Fraction(num, den))

    def format(self, x) -> str:
        if self.modulus is None:
            return str(Fraction(x))
        return str(int(x))

    def _invert(self, a: int) -> int:
        m = self.modulus
        inv = self._inv_cache.get(a)
        if inv is None:
            if math.gcd(a, m) != 1:
                raise ZeroDivisionError(f"{a} is not invertible in {self}")
            inv = pow(a, -1, m)
            self._inv_cache[a] = inv
        return inv

    def add(self, a, b):
        return a + b if self.modulus is None else (a + b) % self.modulus

    def sub(self, a, b):
        return a - b if self.modulus is None else (a - b) % self.modulus

    def mul(self, a, b):
        return a * b if self.modulus is None else (a * b) % self.modulus

    def neg(self, a):
        return -a if self.modulus is None else (-a) % self.modulus

    def inv(self, a):
        if self.modulus is None:
            if a == 0:
                raise ZeroDivisionError("division by zero in Q")
            return 1 / Fraction(a)
        return self._invert(a % self.modulus)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def dot(self, u: Sequence, v: Sequence):
        s = sum(a * b for a, b in zip(u, v))
        return s if self.modulus is None else s % self.modulus


QQ = Ring("Q")


def ring_create(kind: str, modulus: int | None = None) -> Ring:
    """Validate and build a ring.

    ``kind`` accepts ``"Q"``/``"Rationals"``, ``"Fp"``/``"PrimeField"`` and
    ``"Zm"``/``"ResidueRing"``.
    """
    aliases = {
        "q": "Q", "rationals": "Q",
        "fp": "Fp", "primefield": "Fp",
        "zm": "Zm", "residuering": "Zm",
    }
    k = aliases.get(kind.lower().replace("_", ""))
    if k is None:
        raise RingRejected(f"unknown ring kind {kind!r}")
    if k == "Q":
        if modulus is not None:
            raise RingRejected("the rationals take no modulus")
        return QQ
    if modulus is None:
        raise RingRejected(f"{kind} needs a modulus")
    modulus = int(modulus)
    if modulus < 2:
        raise RingRejected(f"modulus must be >= 2, got {modulus}")
    if k == "Fp" and not _is_prime(modulus):
        raise RingRejected(f"{modulus} is not prime")
    if math.gcd(modulus, 6) != 1:
        raise RingRejected("ring rejected: 6 not invertible")
    return Ring(k, modulus)


def parse_ring(text: str) -> Ring:
    """Parse ``q``, ``fp:P`` or ``zm:M``."""
    text = text.strip().lower()
    if text == "q":
        return QQ
    kind, sep, mod = text.partition(":")
    if not sep or kind not in ("fp", "zm"):
        raise RingRejected(f"bad ring spec {text!r} (expected q, fp:P or zm:M)")
    try:
        m = int(mod)
    except ValueError:
        raise RingRejected(f"bad modulus in {text!r}") from None
    return ring_create(kind, m)


# ---------------------------------------------------------------------------
# Dense matrices
# ---------------------------------------------------------------------------


class Matrix:
    """Dense row-major matrix over a :class:`Ring`. Indices are 0-based."""

    __slots__ = ("ring", "rows", "cols", "data")

    def __init__(self, ring: Ring, data: Sequence[Sequence], *, _trusted: bool = False):
        self.ring = ring
        if _trusted:
            self.data = data
        else:
            self.data = [[ring(x) for x in row] for row in data]
        self.rows = len(self.data)
        self.cols = len(self.data[0]) if self.data else 0
        if self.rows == 0 or self.cols == 0:
            raise DimensionMismatch("matrices must have positive size")
        if any(len(r) != self.cols for r in self.data):
            raise DimensionMismatch("ragged rows")

    @classmethod
    def zeros(cls, ring: Ring, rows: int, cols: int | None = None) -> Matrix:
        cols = rows if cols is None else cols
        z = ring.zero
        return cls(ring, [[z] * cols for _ in range(rows)], _trusted=True)

    @classmethod
    def identity(cls, ring: Ring, n: int) -> Matrix:
        m = cls.zeros(ring, n)
        for i in range(n):
            m.data[i][i] = ring.one
        return m

    @classmethod
    def from_vec(cls, ring: Ring, vec: Sequence, n: int) -> Matrix:
        """Inverse of :meth:`vec` for a square ``n x n`` matrix."""
        if len(vec) != n * n:
            raise DimensionMismatch(f"vector of length {len(vec)} is not {n}x{n}")
        return cls(ring, [list(vec[i * n:(i + 1) * n]) for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def n(self) -> int:
        if self.rows != self.cols:
            raise DimensionMismatch("not a square matrix")
        return self.rows

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __setitem__(self, ij, value):
        i, j = ij
        self.data[i][j] = self.ring(value)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.ring == other.ring and self.data == other.data

    def __hash__(self):
        return hash((self.ring, tuple(map(tuple, self.data))))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(self.ring.format(x) for x in row) for row in self.data)
        return f"Matrix[{self.ring}]({body})"

    def copy(self) -> Matrix:
        return Matrix(self.ring, [list(r) for r in self.data], _trusted=True)

    def tolist(self) -> list[list]:
        return [list(r) for r in self.data]

    def vec(self) -> list:
        """Row-major flattening."""
        return [x for row in self.data for x in row]

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    def transpose(self) -> Matrix:
        return Matrix(self.ring, [list(c) for c in zip(*self.data)], _trusted=True)

    T = property(transpose)

    def _check_same(self, other: Matrix) -> None:
        if self.ring != other.ring:
            raise DimensionMismatch(f"ring mismatch: {self.ring} vs {other.ring}")
        if self.shape != other.shape:
            raise DimensionMismatch(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: Matrix) -> Matrix:
        self._check_same(other)
        add = self.ring.add
        return Matrix(self.ring, [[add(a, b) for a, b in zip(r, s)]
                                  for r, s in zip(self.data, other.data)], _trusted=True)

    def __sub__(self, other: Matrix) -> Matrix:
        self._check_same(other)
        sub = self.ring.sub
        return Matrix(self.ring, [[sub(a, b) for a, b in zip(r, s)]
                                  for r, s in zip(self.data, other.data)], _trusted=True)

    def __neg__(self) -> Matrix:
        neg = self.ring.neg
        return Matrix(self.ring, [[neg(a) for a in r] for r in self.data], _trusted=True)

    def scale(self, c) -> Matrix:
        c = self.ring(c)
        mul = self.ring.mul
        return Matrix(self.ring, [[mul(c, a) for a in r] for r in self.data], _trusted=True)

    def __rmul__(self, c) -> Matrix:
        return self.scale(c)

    def __matmul__(self, other: Matrix) -> Matrix:
        if self.ring != other.ring:
            raise DimensionMismatch(f"ring mismatch: {self.ring} vs {other.ring}")
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        m = self.ring.modulus
        cols = list(zip(*other.data))
        out = []
        for row in self.data:
            nz = [(k, a) for k, a in enumerate(row) if a]
            new = []
            for col in cols:
                s = sum(a * col[k] for k, a in nz)
                new.append(s if m is None else s % m)
            out.append(new)
        if m is None:
            out = [[Fraction(x) for x in r] for r in out]
        return Matrix(self.ring, out, _trusted=True)

    def apply(self, v: Sequence) -> list:
        """Matrix-vector product ``self @ v``."""
        if len(v) != self.cols:
            raise DimensionMismatch(f"vector length {len(v)} != {self.cols} columns")
        dot = self.ring.dot
        return [self.ring(dot(row, v)) for row in self.data]

    def inverse(self) -> Matrix:
        n = self.n
        self.ring.require_field("inverse")
        aug = Matrix(self.ring, [list(r) + [self.ring.one if i == j else self.ring.zero
                                            for j in range(n)]
                                 for i, r in enumerate(self.data)], _trusted=True)
        red, rank, piv = rref(aug)
        if piv[:n] != list(range(n)):
            raise NotInvertible("matrix is singular")
        return Matrix(self.ring, [r[n:] for r in red.data[:n]], _trusted=True)


# ---------------------------------------------------------------------------
# Elimination
# ---------------------------------------------------------------------------


def _rref_rows(rows: list[list], ring: Ring, ncols: int) -> tuple[list[list], list[int]]:
    """In-place Gauss-Jordan on a list of rows; returns (rows, pivot columns).

    The pivot in each column is the first row (from the current pivot row down)
    with a nonzero entry; pivot rows are scaled to a unit pivot.
    """
    m = ring.modulus
    nrows = len(rows)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        for i in range(r, nrows):
            if rows[i][c] != 0:
                break
        else:
            continue
        rows[r], rows[i] = rows[i], rows[r]
        prow = rows[r]
        inv = ring.inv(prow[c])
        if m is None:
            prow = [x * inv for x in prow]
        else:
            prow = [x * inv % m for x in prow]
        rows[r] = prow
        nz = [(j, x) for j, x in enumerate(prow) if x and j >= c]
        for i in range(nrows):
            if i == r:
                continue
            f = rows[i][c]
            if f == 0:
                continue
            row = rows[i]
            if m is None:
                for j, x in nz:
                    row[j] -= f * x
            else:
                for j, x in nz:
                    row[j] = (row[j] - f * x) % m
        pivots.append(c)
        r += 1
    return rows, pivots


def rref(m: Matrix) -> tuple[Matrix, int, list[int]]:
    """Reduced row-echelon form, rank and pivot columns (0-based)."""
    m.ring.require_field("rref")
    rows, pivots = _rref_rows([list(r) for r in m.data], m.ring, m.cols)
    return Matrix(m.ring, rows, _trusted=True), len(pivots), pivots


def nullspace(m: Matrix) -> list[list]:
    """Basis of ``{v : m v = 0}``, one vector per free column (in column order)."""
    red, rank, pivots = rref(m)
    ring = m.ring
    pivset = set(pivots)
    basis = []
    for f in range(m.cols):
        if f in pivset:
            continue
        v = [ring.zero] * m.cols
        v[f] = ring.one
        for r, p in enumerate(pivots):
            v[p] = ring.neg(red.data[r][f])
        basis.append(v)
    return basis


def solve_linear(a: Matrix, b: Sequence) -> tuple[list, list[list]] | None:
    """Solve ``a y = b``.

    Returns ``(particular, kernel_basis)`` with free variables of the particular
    solution set to zero, or ``None`` when the system is inconsistent.
    """
    ring = a.ring
    ring.require_field("solve_linear")
    if len(b) != a.rows:
        raise DimensionMismatch(f"rhs length {len(b)} != {a.rows} rows")
    rows = [list(r) + [ring(x)] for r, x in zip(a.data, b)]
    rows, pivots = _rref_rows(rows, ring, a.cols + 1)
    if pivots and pivots[-1] == a.cols:
        return None
    particular = [ring.zero] * a.cols
    for r, p in enumerate(pivots):
        particular[p] = rows[r][a.cols]
    pivset = set(pivots)
    kernel = []
    for f in range(a.cols):
        if f in pivset:
            continue
        v = [ring.zero] * a.cols
        v[f] = ring.one
        for r, p in enumerate(pivots):
            v[p] = ring.neg(rows[r][f])
        kernel.append(v)
    return particular, kernel


# ---------------------------------------------------------------------------
# Incremental span
# ---------------------------------------------------------------------------

Vector = Sequence | Mapping[int, object]


class SpanAccumulator:
    """Incrementally maintained reduced row-echelon basis of a subspace.

    Rows are stored sparsely (``{column: value}``) keyed by their pivot column,
    which keeps insertion of the very sparse tensors built from matrix units
    cheap. The basis is canonical: it depends only on the subspace spanned.
    """

    def __init__(self, ring: Ring, dim: int):
        ring.require_field("SpanAccumulator")
        if dim < 1:
            raise DimensionMismatch("ambient dimension must be positive")
        self.ring = ring
        self.ambient_dim = dim
        self._rows: dict[int, dict[int, object]] = {}

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> list[int]:
        return sorted(self._rows)

    @property
    def basis(self) -> list[list]:
        """Dense basis rows ordered by pivot column."""
        z = self.ring.zero
        out = []
        for p in self.pivots:
            v = [z] * self.ambient_dim
            for j, x in self._rows[p].items():
                v[j] = x
            out.append(v)
        return out

    def copy(self) -> SpanAccumulator:
        new = SpanAccumulator(self.ring, self.ambient_dim)
        new._rows = {p: dict(r) for p, r in self._rows.items()}
        return new

    def _sparse(self, v: Vector) -> dict[int, object]:
        ring = self.ring
        if isinstance(v, Mapping):
            items = v.items()
            if any(not 0 <= j < self.ambient_dim for j in v):
                raise DimensionMismatch("sparse index out of range")
        else:
            if len(v) != self.ambient_dim:
                raise DimensionMismatch(
                    f"vector length {len(v)} != ambient dimension {self.ambient_dim}")
            items = enumerate(v)
        out = {}
        for j, x in items:
            x = ring(x)
            if x:
                out[j] = x
        return out

    def _reduce(self, v: dict[int, object]) -> dict[int, object]:
        m = self.ring.modulus
        rows = self._rows
        hits = [(p, v[p]) for p in v if p in rows]
        if not hits:
            return v
        out = dict(v)
        for p, c in hits:
            for j, x in rows[p].items():
                if m is None:
                    out[j] = out.get(j, 0) - c * x
                else:
                    out[j] = (out.get(j, 0) - c * x) % m
        return {j: x for j, x in out.items() if x}

    def reduce(self, v: Vector) -> list:
        """Residue of ``v`` modulo the current span (dense)."""
        r = self._reduce(self._sparse(v))
        z = self.ring.zero
        out = [z] * self.ambient_dim
        for j, x in r.items():
            out[j] = x
        return out

    def contains(self, v: Vector) -> bool:
        return not self._reduce(self._sparse(v))

    def insert(self, v: Vector) -> bool:
        """Add ``v`` to the span; True iff the rank grew."""
        r = self._reduce(self._sparse(v))
        if not r:
            return False
        ring = self.ring
        m = ring.modulus
        p = min(r)
        inv = ring.inv(r[p])
        if m is None:
            r = {j: x * inv for j, x in r.items()}
        else:
            r = {j: x * inv % m for j, x in r.items()}
        for row in self._rows.values():
            c = row.get(p)
            if c is None:
                continue
            for j, x in r.items():
                if m is None:
                    row[j] = row.get(j, 0) - c * x
                else:
                    row[j] = (row.get(j, 0) - c * x) % m
            for j in [j for j, x in row.items() if not x]:
                del row[j]
        self._rows[p] = r
        return True

    def extend(self, vectors: Iterable[Vector] | SpanAccumulator) -> int:
        """Insert many vectors (or another accumulator's basis); returns rank gained."""
        if isinstance(vectors, SpanAccumulator):
            if vectors.ring != self.ring or vectors.ambient_dim != self.ambient_dim:
                raise DimensionMismatch("cannot merge accumulators over different spaces")
            vectors = [dict(r) for r in vectors._rows.values()]
        before = self.rank
        for v in vectors:
            self.insert(v)
        return self.rank - before

    def __iter__(self) -> Iterator[list]:
        return iter(self.basis)


def span_insert(acc: SpanAccumulator, v: Vector) -> bool:
    return acc.insert(v)


def span_contains(acc: SpanAccumulator, v: Vector) -> bool:
    return acc.contains(v)
