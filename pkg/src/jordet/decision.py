"""Deciding whether a matrix is a Jordan product determined point.

A symmetric bilinear map ``B`` out of ``M_n`` is a functional ``lam`` on the
symmetric square (``B(x, y) = lam . sigma(x, y)``). ``B`` is constant on the
fiber ``{(x, y) : x o y = A}`` iff ``lam`` kills

    W_A = span{ sigma(x, y) - sigma(x0, y0) : x o y = A }

and ``B`` factors through the Jordan product iff ``lam`` kills ``K = ker J``.
Since ``W_A`` is always inside ``K``, ``A`` is determined iff ``W_A = K``.

For fixed ``x`` the fiber is the affine space ``y0 + span(kernel_dirs)`` and
``sigma(x, .)`` is linear, so one slice contributes ``sigma(x, y0) - base``
plus ``sigma(x, k)`` for each kernel direction ``k``.
"""

from __future__ import annotations

import itertools
import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .jordan import (
    SizeMismatch,
    jordan,
    jordan_operator,
    kernel_of_jordan,
    KernelBasis,
    sigma_sparse,
    sym_dim,
)
from .linalg import Matrix, Ring, SpanAccumulator, solve_linear, nullspace

log = logging.getLogger(__name__)

MAX_N = 6

__all__ = [
    "StrategyUnsupported",
    "SoundnessViolation",
    "Strategy",
    "FiberSlice",
    "Certificate",
    "DecisionReport",
    "base_pair",
    "fiber_slice",
    "slice_vectors",
    "random_point",
    "decide",
    "certificate_extract",
    "certificate_validate",
]


class StrategyUnsupported(ValueError):
    pass


class SoundnessViolation(AssertionError):
    """A vector outside ``K`` reached the fiber span (cannot happen for correct input)."""


@dataclass(frozen=True)
class Strategy:
    """How fiber slices are visited.

    ``kind`` is ``"exhaustive"`` (every ``x`` over a finite field, lexicographic in
    ``vec(x)``), ``"random"`` (``max_samples`` draws from ``seed``) or
    ``"structured"`` (only the witnesses of a bundled proof catalog).
    """

    kind: str
    seed: int = 0
    max_samples: int = 5000
    catalog: str | None = None
    early_exit: bool = True
    threads: int = 1

    @classmethod
    def exhaustive(cls, early_exit: bool = True, threads: int = 1) -> Strategy:
        return cls("exhaustive", early_exit=early_exit, threads=threads)

    @classmethod
    def random(cls, seed: int = 0, max_samples: int = 5000) -> Strategy:
        return cls("random", seed=seed, max_samples=max_samples)

    @classmethod
    def structured(cls, catalog: str) -> Strategy:
        return cls("structured", catalog=catalog)

    def to_dict(self) -> dict:
        if self.kind == "exhaustive":
            return {"kind": "exhaustive", "early_exit": self.early_exit}
        if self.kind == "random":
            return {"kind": "random", "seed": self.seed, "max_samples": self.max_samples}
        return {"kind": "structured", "catalog": self.catalog}


@dataclass
class FiberSlice:
    x: Matrix
    y0: Matrix
    kernel_dirs: list[Matrix]


@dataclass
class Certificate:
    """Functional constant on the fiber that does not factor through ``o``."""

    functional: list
    witness_kernel_vector: list

    def to_dict(self, ring: Ring) -> dict:
        return {
            "functional": [ring.format(x) for x in self.functional],
            "witness_kernel_vector": [ring.format(x) for x in self.witness_kernel_vector],
        }


@dataclass
class DecisionReport:
    point: Matrix
    ring: Ring
    strategy: Strategy
    dim_sym2: int
    dim_kernel: int
    dim_span: int
    verdict: str  # "determined" | "not_determined" | "inconclusive"
    samples_used: int
    elapsed_ms: int
    certificate: Certificate | None = None
    span: SpanAccumulator | None = field(default=None, repr=False, compare=False)
    trace: list[int] = field(default_factory=list, repr=False, compare=False)

    @property
    def determined(self) -> bool:
        return self.verdict == "determined"

    def to_dict(self) -> dict:
        ring = self.ring
        return {
            "point": [[ring.format(x) for x in row] for row in self.point.data],
            "ring": ring.spec,
            "strategy": self.strategy.to_dict(),
            "dim_sym2": self.dim_sym2,
            "dim_kernel": self.dim_kernel,
            "dim_span": self.dim_span,
            "verdict": self.verdict,
            "samples_used": self.samples_used,
            "certificate": None if self.certificate is None else self.certificate.to_dict(ring),
        }


def base_pair(a: Matrix) -> tuple[Matrix, Matrix]:
    """``(a / 2, I)``, a canonical point of the fiber of ``a``."""
    ring = a.ring
    return a.scale(Fraction(1, 2)), Matrix.identity(ring, a.n)


def fiber_slice(x: Matrix, a: Matrix) -> FiberSlice | None:
    """All ``y`` with ``x o y = a`` for this ``x``, or None if there are none."""
    n = a.n
    if x.n != n or x.ring != a.ring:
        raise SizeMismatch("x and a must share size and ring")
    sol = solve_linear(jordan_operator(x), a.vec())
    if sol is None:
        return None
    y0, ker = sol
    ring = a.ring
    return FiberSlice(x, Matrix.from_vec(ring, y0, n),
                      [Matrix.from_vec(ring, k, n) for k in ker])


def _diff(u: dict, v: dict, ring: Ring) -> dict:
    out = dict(u)
    for k, x in v.items():
        out[k] = ring.sub(out.get(k, ring.zero), x)
    return {k: x for k, x in out.items() if x}


def slice_vectors(s: FiberSlice, base_sigma: dict, ring: Ring) -> Iterator[dict]:
    """Sparse generators of one slice's contribution to ``W_A``."""
    yield _diff(sigma_sparse(s.x, s.y0), base_sigma, ring)
    for k in s.kernel_dirs:
        yield sigma_sparse(s.x, k)


def random_point(n: int, ring: Ring, rng: random.Random) -> Matrix:
    """Uniform over ``F_p``; independent entries in ``[-3, 3]`` over ``Q``."""
    if ring.modulus is None:
        vals = [rng.randint(-3, 3) for _ in range(n * n)]
    else:
        vals = [rng.randrange(ring.modulus) for _ in range(n * n)]
    return Matrix.from_vec(ring, vals, n)


def _iter_exhaustive(n: int, ring: Ring, prefix: tuple = ()) -> Iterator[Matrix]:
    p = ring.modulus
    for digits in itertools.product(range(p), repeat=n * n - len(prefix)):
        yield Matrix(ring, [list((prefix + digits)[i * n:(i + 1) * n]) for i in range(n)],
                     _trusted=True)


class _Sweep:
    """Accumulates ``W_A`` slice by slice."""

    def __init__(self, a: Matrix, kernel: KernelBasis, check: bool = False):
        self.a = a
        self.ring = a.ring
        self.kernel = kernel
        self.acc = SpanAccumulator(self.ring, kernel.ambient_dim)
        self.base_sigma = sigma_sparse(*base_pair(a))
        self.check = check
        self.visited = 0
        self.trace: list[int] = []

    @property
    def saturated(self) -> bool:
        return self.acc.rank == self.kernel.dim

    def insert(self, v: dict) -> None:
        if self.check and not self.kernel.contains(v):
            raise SoundnessViolation(f"fiber vector outside ker J: {v}")
        self.acc.insert(v)

    def visit(self, x: Matrix) -> bool:
        """Absorb the slice at ``x``; False if it is empty."""
        self.visited += 1
        s = fiber_slice(x, self.a)
        if s is None:
            return False
        for v in slice_vectors(s, self.base_sigma, self.ring):
            self.insert(v)
        self.trace.append(self.acc.rank)
        return True


def _sweep_chunk(a: Matrix, prefixes: list[tuple], early_exit: bool) -> tuple[list[dict], int]:
    """Worker for a partitioned exhaustive sweep."""
    n = a.n
    sweep = _Sweep(a, kernel_of_jordan(n, a.ring))
    for prefix in prefixes:
        for x in _iter_exhaustive(n, a.ring, prefix):
            sweep.visit(x)
            if early_exit and sweep.saturated:
                return [dict(r) for r in sweep.acc._rows.values()], sweep.visited
    return [dict(r) for r in sweep.acc._rows.values()], sweep.visited


def _structured_witnesses(a: Matrix, catalog: str) -> Iterable[tuple[Matrix, Matrix]]:
    from .replay import catalog_witnesses, point_indices_of

    n = a.n
    idx = point_indices_of(a)
    if idx is None:
        raise StrategyUnsupported("structured strategy needs a matrix-unit point")
    yield from catalog_witnesses(catalog, n, idx, a.ring)


def decide(a: Matrix, strategy: Strategy | None = None, *,
           check_soundness: bool = False) -> DecisionReport:
    """Compare the fiber span ``W_A`` with ``K = ker J`` and report a verdict.

    ``NotDetermined`` is only reported after a complete exhaustive sweep, and then
    carries a certificate; an unsaturated random or structured run is
    ``Inconclusive``.
    """
    strategy = strategy or Strategy.random()
    t0 = time.perf_counter()
    ring = a.ring
    ring.require_field("decide")
    n = a.n
    if n < 2:
        raise SizeMismatch("points must be at least 2x2")
    if n > MAX_N:
        raise StrategyUnsupported(f"n = {n} exceeds the supported maximum {MAX_N}")
    kernel = kernel_of_jordan(n, ring)
    sweep = _Sweep(a, kernel, check_soundness)

    if strategy.kind == "exhaustive":
        if not ring.is_finite:
            raise StrategyUnsupported("exhaustive sweeps need a finite field")
        if strategy.threads > 1:
            p = ring.modulus
            prefixes = [(d,) for d in range(p)]
            chunks = [prefixes[i::strategy.threads] for i in range(strategy.threads)]
            with ProcessPoolExecutor(strategy.threads) as pool:
                parts = list(pool.map(_sweep_chunk, [a] * len(chunks), chunks,
                                      [strategy.early_exit] * len(chunks)))
            for rows, visited in parts:
                sweep.acc.extend(rows)
                sweep.visited += visited
        else:
            for x in _iter_exhaustive(n, ring):
                sweep.visit(x)
                if strategy.early_exit and sweep.saturated:
                    break
    elif strategy.kind == "random":
        rng = random.Random(strategy.seed)
        while sweep.visited < strategy.max_samples and not sweep.saturated:
            sweep.visit(random_point(n, ring, rng))
    elif strategy.kind == "structured":
        if strategy.catalog is None:
            raise StrategyUnsupported("structured strategy needs a catalog")
        base = sigma_sparse(*base_pair(a))
        for x, y in _structured_witnesses(a, strategy.catalog):
            if jordan(x, y) != a:
                continue
            sweep.visited += 1
            sweep.insert(_diff(sigma_sparse(x, y), base, ring))
            sweep.trace.append(sweep.acc.rank)
    else:
        raise StrategyUnsupported(f"unknown strategy {strategy.kind!r}")

    dim_span = sweep.acc.rank
    certificate = None
    if dim_span == kernel.dim:
        verdict = "determined"
    elif strategy.kind == "exhaustive":
        verdict = "not_determined"
        certificate = certificate_extract(sweep.acc, kernel)
    else:
        verdict = "inconclusive"
    elapsed = int((time.perf_counter() - t0) * 1000)
    log.debug("decide %s over %s: %s (%d/%d)", strategy.kind, ring, verdict, dim_span, kernel.dim)
    return DecisionReport(
        point=a, ring=ring, strategy=strategy, dim_sym2=sym_dim(n),
        dim_kernel=kernel.dim, dim_span=dim_span, verdict=verdict,
        samples_used=sweep.visited, elapsed_ms=elapsed, certificate=certificate,
        span=sweep.acc, trace=sweep.trace,
    )


def certificate_extract(w_span: SpanAccumulator, kernel: KernelBasis) -> Certificate | None:
    """A functional vanishing on ``w_span`` but not on ``K``; None if they coincide."""
    ring = w_span.ring
    if w_span.rank >= kernel.dim:
        return None
    witness = next((list(k) for k in kernel.vectors if not w_span.contains(k)), None)
    if witness is None:
        return None
    D = w_span.ambient_dim
    if w_span.rank == 0:
        annihilator = [[ring.one if j == i else ring.zero for j in range(D)] for i in range(D)]
    else:
        annihilator = nullspace(Matrix(ring, w_span.basis, _trusted=True))
    for lam in annihilator:
        if ring.dot(lam, witness) != 0:
            return Certificate(functional=lam, witness_kernel_vector=witness)
    return None  # unreachable: witness is outside the double annihilator of W


def _dot_sparse(lam: list, v: dict, ring: Ring):
    return ring(sum(lam[k] * x for k, x in v.items()))


def certificate_validate(c: Certificate, a: Matrix, samples: int = 100, seed: int = 0) -> bool:
    """Replay a certificate on random fiber slices.

    True iff the functional vanishes on every sampled slice (condition (i)) and is
    nonzero on its witness, which must lie in ``K`` (condition (ii) fails).
    """
    ring = a.ring
    n = a.n
    kernel = kernel_of_jordan(n, ring)
    if len(c.functional) != kernel.ambient_dim:
        return False
    witness = {k: ring(x) for k, x in enumerate(c.witness_kernel_vector) if x}
    if not kernel.contains(witness) or _dot_sparse(c.functional, witness, ring) == 0:
        return False
    rng = random.Random(seed)
    base = sigma_sparse(*base_pair(a))
    candidates = [base_pair(a)[0]]
    candidates += [random_point(n, ring, rng) for _ in range(samples)]
    for x in candidates:
        s = fiber_slice(x, a)
        if s is None:
            continue
        for v in slice_vectors(s, base, ring):
            if _dot_sparse(c.functional, v, ring) != 0:
                return False
    return True
