"""Linear maps that are Jordan-derivable or Jordan-multiplicative at a point.

A linear map ``tau`` on ``M_n`` is stored as the ``n^2 x n^2`` matrix acting on
``vec(x)``.  The module ``X`` of the at-point definitions is taken to be
``M_n`` itself, so both ``tau``-values and their Jordan products live in ``M_n``.

Derivability at ``A`` is linear in ``tau``::

    tau(A) = tau(S) o T + S o tau(T)    whenever S o T = A

and is linearized over fiber slices exactly like the decision procedure: for
fixed ``S`` the admissible ``T`` form ``y0 + span(k_1, ..., k_r)``, so the
condition splits into one equation at ``y0`` and the homogeneous equations
``tau(S) o k + S o tau(k) = 0``.  Multiplicativity is quadratic in ``phi`` and
is only *checked* for a supplied map.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from typing import Iterator

from .decision import (
    Strategy,
    StrategyUnsupported,
    _iter_exhaustive,
    _structured_witnesses,
    fiber_slice,
    random_point,
)
from .jordan import SizeMismatch, jordan, jordan_operator
from .linalg import Matrix, NotInvertible, Ring, SpanAccumulator, parse_ring

__all__ = [
    "LinMap",
    "NotInvertible",
    "PreconditionFailed",
    "DerivableSpaceReport",
    "MultReport",
    "derivable_space",
    "is_jordan_derivation",
    "derivation_defect",
    "multiplicative_check",
    "inner_derivation",
    "inner_automorphism",
    "transpose_map",
    "identity_map",
]


class PreconditionFailed(ValueError):
    pass


@dataclass(frozen=True)
class LinMap:
    """A linear map ``M_n -> M_n`` given by its matrix on row-major ``vec``."""

    n: int
    matrix: Matrix

    def __post_init__(self):
        N = self.n * self.n
        if self.matrix.shape != (N, N):
            raise SizeMismatch(f"a map on M_{self.n} needs a {N}x{N} matrix")

    @property
    def ring(self) -> Ring:
        return self.matrix.ring

    def __call__(self, x: Matrix) -> Matrix:
        return self.apply(x)

    def apply(self, x: Matrix) -> Matrix:
        if x.n != self.n or x.ring != self.ring:
            raise SizeMismatch("argument does not match the map's size or ring")
        return Matrix.from_vec(self.ring, self.matrix.apply(x.vec()), self.n)

    def image_of_unit(self, alpha: int) -> Matrix:
        """``tau(e_alpha)`` for a 0-based slot ``alpha``, i.e. a column."""
        return Matrix.from_vec(self.ring, [row[alpha] for row in self.matrix.data], self.n)

    def __add__(self, other: LinMap) -> LinMap:
        return LinMap(self.n, self.matrix + other.matrix)

    def to_dict(self) -> dict:
        fmt = self.ring.format
        return {
            "n": self.n,
            "ring": self.ring.spec,
            "entries": [[fmt(x) for x in row] for row in self.matrix.data],
        }

    @classmethod
    def from_dict(cls, obj: dict, ring: Ring | None = None) -> LinMap:
        try:
            n = int(obj["n"])
            entries = obj["entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed map object: {exc}") from None
        if ring is None:
            ring = parse_ring(str(obj.get("ring", "q")))
        rows = [[ring(x) if isinstance(x, (str, int)) else _bad_scalar(x) for x in row]
                for row in entries]
        return cls(n, Matrix(ring, rows))

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str, ring: Ring | None = None) -> LinMap:
        return cls.from_dict(json.loads(text), ring)


def _bad_scalar(x):
    raise ValueError(f"bad scalar literal {x!r}")


def _from_images(n: int, ring: Ring, images: list[Matrix]) -> LinMap:
    cols = [m.vec() for m in images]
    N = n * n
    return LinMap(n, Matrix(ring, [[cols[c][r] for c in range(N)] for r in range(N)],
                            _trusted=True))


def _units(n: int, ring: Ring) -> list[Matrix]:
    N = n * n
    out = []
    for a in range(N):
        v = [ring.zero] * N
        v[a] = ring.one
        out.append(Matrix.from_vec(ring, v, n))
    return out


def inner_derivation(m: Matrix) -> LinMap:
    """``x -> m x - x m``."""
    return _from_images(m.n, m.ring, [m @ e - e @ m for e in _units(m.n, m.ring)])


def inner_automorphism(s: Matrix) -> LinMap:
    """``x -> s x s^-1``; raises NotInvertible for singular ``s``."""
    s_inv = s.inverse()
    return _from_images(s.n, s.ring, [s @ e @ s_inv for e in _units(s.n, s.ring)])


def transpose_map(n: int, ring: Ring) -> LinMap:
    return _from_images(n, ring, [e.transpose() for e in _units(n, ring)])


def identity_map(n: int, ring: Ring) -> LinMap:
    return LinMap(n, Matrix.identity(ring, n * n))


# ---------------------------------------------------------------------------
# Jordan derivations
# ---------------------------------------------------------------------------


def derivation_defect(d: LinMap) -> tuple[int, int] | None:
    """First unit pair ``alpha <= beta`` (0-based slots) breaking the derivation law."""
    n, ring = d.n, d.ring
    units = _units(n, ring)
    images = [d.image_of_unit(a) for a in range(n * n)]
    for a, ea in enumerate(units):
        for b in range(a, n * n):
            eb = units[b]
            lhs = d.apply(jordan(ea, eb))
            if lhs != jordan(images[a], eb) + jordan(ea, images[b]):
                return a, b
    return None


def is_jordan_derivation(d: LinMap) -> bool:
    """``d(x o y) = d(x) o y + x o d(y)`` on all unit pairs (enough by bilinearity)."""
    return derivation_defect(d) is None


@dataclass
class DerivableSpaceReport:
    point: Matrix
    ring: Ring
    strategy: Strategy
    constraint_rank: int
    solution_dim: int
    basis: list[LinMap]
    all_solutions_are_jordan_derivations: bool
    pairs_used: int
    certified_early: bool = False
    elapsed_ms: int = 0
    trace: list[int] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        ring = self.ring
        return {
            "point": [[ring.format(x) for x in row] for row in self.point.data],
            "ring": ring.spec,
            "strategy": self.strategy.to_dict(),
            "unknowns": self.point.n ** 4,
            "constraint_rank": self.constraint_rank,
            "solution_dim": self.solution_dim,
            "all_solutions_are_jordan_derivations": self.all_solutions_are_jordan_derivations,
            "pairs_used": self.pairs_used,
            "certified_early": self.certified_early,
            "basis": [b.to_dict()["entries"] for b in self.basis],
        }


def _pair_rows(s: Matrix, t: Matrix, a: Matrix | None) -> Iterator[dict]:
    """Rows of ``tau(a) - tau(S) o T - S o tau(T)`` in the unknowns ``M[r][c]``.

    ``tau(X)_r = sum_c M[r][c] X_c`` and ``(tau(S) o T)_i = sum_r L_T[i][r] tau(S)_r``
    with ``L_T`` the Jordan operator of ``T``.  ``a = None`` drops the ``tau(a)``
    term (used for kernel directions).
    """
    ring = s.ring
    N = s.n * s.n
    lt = jordan_operator(t).data
    ls = jordan_operator(s).data
    sv, tv = s.vec(), t.vec()
    av = a.vec() if a is not None else None
    s_nz = [(c, x) for c, x in enumerate(sv) if x]
    t_nz = [(c, x) for c, x in enumerate(tv) if x]
    for i in range(N):
        row: dict[int, object] = {}
        if av is not None:
            for c, x in enumerate(av):
                if x:
                    row[i * N + c] = row.get(i * N + c, 0) + x
        for r in range(N):
            f, g = lt[i][r], ls[i][r]
            if f:
                for c, x in s_nz:
                    row[r * N + c] = row.get(r * N + c, 0) - f * x
            if g:
                for c, x in t_nz:
                    row[r * N + c] = row.get(r * N + c, 0) - g * x
        row = {k: ring(v) for k, v in row.items()}
        row = {k: v for k, v in row.items() if v}
        if row:
            yield row


def _identity_rows(n: int, ring: Ring) -> Iterator[dict]:
    """``tau(I) = 0``."""
    N = n * n
    diag = [k * n + k for k in range(n)]
    for r in range(N):
        yield {r * N + c: ring.one for c in diag}


def _nullspace_of(acc: SpanAccumulator) -> list[list]:
    # the accumulator is already in reduced echelon form
    ring = acc.ring
    rows = acc.basis
    pivots = acc.pivots
    pivset = set(pivots)
    out = []
    for f in range(acc.ambient_dim):
        if f in pivset:
            continue
        v = [ring.zero] * acc.ambient_dim
        v[f] = ring.one
        for row, p in zip(rows, pivots):
            v[p] = ring.neg(row[f])
        out.append(v)
    return out


def _as_map(v: list, n: int, ring: Ring) -> LinMap:
    N = n * n
    return LinMap(n, Matrix(ring, [v[r * N:(r + 1) * N] for r in range(N)], _trusted=True))


def _slices(a: Matrix, strategy: Strategy) -> Iterator[tuple[Matrix, Matrix, list[Matrix]]]:
    """``(S, y0, kernel_dirs)`` per the strategy; structured yields bare pairs."""
    n, ring = a.n, a.ring
    if strategy.kind == "exhaustive":
        if not ring.is_finite:
            raise StrategyUnsupported("exhaustive sweeps need a finite field")
        xs = _iter_exhaustive(n, ring)
    elif strategy.kind == "random":
        rng = random.Random(strategy.seed)
        xs = (random_point(n, ring, rng) for _ in range(strategy.max_samples))
    elif strategy.kind == "structured":
        if strategy.catalog is None:
            raise StrategyUnsupported("structured strategy needs a catalog")
        for x, y in _structured_witnesses(a, strategy.catalog):
            if jordan(x, y) == a:
                yield x, y, []
        return
    else:
        raise StrategyUnsupported(f"unknown strategy {strategy.kind!r}")
    for x in xs:
        sl = fiber_slice(x, a)
        if sl is not None:
            yield sl.x, sl.y0, sl.kernel_dirs


def derivable_space(a: Matrix, strategy: Strategy | None = None) -> DerivableSpaceReport:
    """Solve for all ``tau`` with ``tau(I) = 0`` that are Jordan-derivable at ``a``.

    Constraints are accumulated slice by slice.  Every Jordan derivation
    satisfies all of them and kills ``I``, so once every basis vector of the
    current solution space is a Jordan derivation the final space is known;
    with ``early_exit`` the sweep stops there (``certified_early``).
    """
    strategy = strategy or Strategy.exhaustive()
    t0 = time.perf_counter()
    ring = a.ring
    ring.require_field("derivable_space")
    n = a.n
    N = n * n
    acc = SpanAccumulator(ring, N * N)
    acc.extend(_identity_rows(n, ring))

    def solutions() -> list[LinMap]:
        return [_as_map(v, n, ring) for v in _nullspace_of(acc)]

    certified = False
    pairs = 0
    trace: list[int] = []
    for s, y0, dirs in _slices(a, strategy):
        pairs += 1
        before = acc.rank
        acc.extend(_pair_rows(s, y0, a))
        for k in dirs:
            acc.extend(_pair_rows(s, k, None))
        trace.append(acc.rank)
        if strategy.early_exit and acc.rank != before:
            if all(is_jordan_derivation(b) for b in solutions()):
                certified = True
                break

    basis = solutions()
    all_ok = certified or all(is_jordan_derivation(b) for b in basis)
    return DerivableSpaceReport(
        point=a, ring=ring, strategy=strategy, constraint_rank=acc.rank,
        solution_dim=len(basis), basis=basis,
        all_solutions_are_jordan_derivations=all_ok, pairs_used=pairs,
        certified_early=certified,
        elapsed_ms=int((time.perf_counter() - t0) * 1000), trace=trace,
    )


# ---------------------------------------------------------------------------
# Jordan-multiplicative maps
# ---------------------------------------------------------------------------


@dataclass
class MultReport:
    """Outcome of the two-phase check.

    ``outcome`` is ``"hypothesis_fails"``, ``"conclusion_holds"`` or
    ``"conclusion_fails"``.  ``paper_contradiction`` is set when the hypothesis
    was verified over the whole fiber of a matrix unit with ``n >= 3`` and the
    conclusion still fails.
    """

    point: Matrix
    ring: Ring
    strategy: Strategy
    outcome: str
    hypothesis_ok: bool
    hypothesis_complete: bool
    slices_checked: int
    hypothesis_failure: tuple[Matrix, Matrix] | None
    conclusion_ok: bool
    conclusion_failure: tuple[int, int] | None
    paper_contradiction: bool
    elapsed_ms: int = 0

    def to_dict(self) -> dict:
        ring = self.ring
        mat = lambda m: [[ring.format(x) for x in row] for row in m.data]
        n = self.point.n
        unit = lambda a: [a // n + 1, a % n + 1]
        hf = self.hypothesis_failure
        cf = self.conclusion_failure
        return {
            "point": mat(self.point),
            "ring": ring.spec,
            "strategy": self.strategy.to_dict(),
            "outcome": self.outcome,
            "hypothesis_ok": self.hypothesis_ok,
            "hypothesis_complete": self.hypothesis_complete,
            "slices_checked": self.slices_checked,
            "hypothesis_failure": None if hf is None else {"S": mat(hf[0]), "T": mat(hf[1])},
            "conclusion_ok": self.conclusion_ok,
            "conclusion_failure": None if cf is None else {"alpha": unit(cf[0]), "beta": unit(cf[1])},
            "flags": ["PAPER-CONTRADICTION"] if self.paper_contradiction else [],
        }


def _multiplicative_defect(phi: LinMap) -> tuple[int, int] | None:
    n, ring = phi.n, phi.ring
    units = _units(n, ring)
    images = [phi.image_of_unit(a) for a in range(n * n)]
    for a in range(n * n):
        for b in range(a, n * n):
            if phi.apply(jordan(units[a], units[b])) != jordan(images[a], images[b]):
                return a, b
    return None


def multiplicative_check(phi: LinMap, a: Matrix,
                         strategy: Strategy | None = None) -> MultReport:
    """Check ``phi(a) = phi(S) o phi(T)`` on the fiber, then ``phi`` everywhere.

    For fixed ``S`` the products ``phi(S) o phi(y0 + sum t_k k)`` are affine in
    ``t``, so a slice passes iff ``phi(S) o phi(y0) = phi(a)`` and
    ``phi(S) o phi(k) = 0`` for every kernel direction; this covers every pair
    of the slice exactly.
    """
    from .replay import point_indices_of

    strategy = strategy or Strategy.exhaustive()
    t0 = time.perf_counter()
    ring = a.ring
    ring.require_field("multiplicative_check")
    n = a.n
    if phi.n != n or phi.ring != ring:
        raise SizeMismatch("map and point must share size and ring")
    eye = Matrix.identity(ring, n)
    if phi.apply(eye) != eye:
        raise PreconditionFailed("phi(I) != I")

    target = phi.apply(a)
    failure = None
    checked = 0
    for s, y0, dirs in _slices(a, strategy):
        checked += 1
        ps = phi.apply(s)
        if jordan(ps, phi.apply(y0)) != target:
            failure = (s, y0)
            break
        bad = next((k for k in dirs if not jordan(ps, phi.apply(k)).is_zero()), None)
        if bad is not None:
            failure = (s, y0 + bad)
            break

    hyp_ok = failure is None
    complete = hyp_ok and strategy.kind == "exhaustive"
    defect = _multiplicative_defect(phi)
    concl_ok = defect is None
    contradiction = (complete and not concl_ok and n >= 3
                     and point_indices_of(a) is not None)
    if not hyp_ok:
        outcome = "hypothesis_fails"
    elif concl_ok:
        outcome = "conclusion_holds"
    else:
        outcome = "conclusion_fails"
    return MultReport(
        point=a, ring=ring, strategy=strategy, outcome=outcome,
        hypothesis_ok=hyp_ok, hypothesis_complete=complete, slices_checked=checked,
        hypothesis_failure=failure, conclusion_ok=concl_ok, conclusion_failure=defect,
        paper_contradiction=contradiction,
        elapsed_ms=int((time.perf_counter() - t0) * 1000),
    )
