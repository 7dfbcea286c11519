"""Replay of witness-identity catalogs.

A catalog is a YAML document transcribing a proof that a matrix unit is a
Jordan product determined point. Each step names a witness pair
``(left, right)`` with ``left o right = target`` plus linear relations among
values ``{e_ij, e_km}`` of a symmetric bilinear map that the witness (and the
steps before it) force. Replay checks, exactly and for every admissible index
assignment:

1. every witness identity;
2. every relation, as membership of its symmetric-square vector in the span of
   witness differences collected so far;
3. that the closing relation families span the whole kernel ``K`` of ``J``.

Schema (one document per catalog)::

    name: T2.2
    point_kind: diagonal          # fixed symbols [s]; "offdiagonal" gives [p, q]
    steps:
      - id: T2.2-1.1-a
        paper_anchor: "(2) ..."
        vars: [i, j]
        requires: ["i!=s", "j!=s"]
        left: "1/2 e[s,s] + e[i,j]"
        right: "e[s,s]"
        target: "e[s,s]"          # optional, defaults to the point
        relations: ["<e[i,j],e[s,s]> = 0"]
        comment: ...
    families:                     # closing relation families, same fields
      - ...

Constraint atoms: ``a!=b`` (or ``a≠b``), ``distinct(a,b,...)``, ``n>K``, ``n=K``.
A relation is a chain ``X = Y = Z`` of pair combinations; it stands for the
consecutive differences ``X - Y``, ``Y - Z``.
"""

from __future__ import annotations

import itertools
import os
import re
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterator, Sequence

import yaml

from .jordan import apply_jordan_sym, jordan, kernel_of_jordan, sigma_sparse, slot, sym_dim, sym_index
from .linalg import Matrix, Ring, SpanAccumulator

__all__ = [
    "CatalogError",
    "ParseError",
    "SchemaError",
    "StepTemplate",
    "Catalog",
    "ConcreteStep",
    "StepResult",
    "ReplayReport",
    "load_catalog",
    "load_bundled",
    "resolve_catalog",
    "instantiate",
    "assignments",
    "verify_step",
    "run_catalog",
    "verify_relation_completeness",
    "relation_span_dim",
    "catalog_witnesses",
    "point_indices_of",
]


class CatalogError(ValueError):
    def __init__(self, msg: str, *, line: int | None = None, step: str | None = None):
        where = []
        if step:
            where.append(f"step {step}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{msg} ({', '.join(where)})" if where else msg)
        self.line = line
        self.step = step


class ParseError(CatalogError):
    pass


class SchemaError(CatalogError):
    pass


# ---------------------------------------------------------------------------
# Formal expressions
# ---------------------------------------------------------------------------

# A formal unit is a pair of index tokens (symbols or 1-based integers).
Unit = tuple[str, str]
MatExpr = tuple[tuple[Fraction, Unit], ...]
PairExpr = tuple[tuple[Fraction, tuple[Unit, Unit]], ...]

_COEF = r"(\d+(?:\s*/\s*\d+)?)"
_IDX = r"([A-Za-z]\w*|\d+)"
_UNIT = rf"e\[\s*{_IDX}\s*,\s*{_IDX}\s*\]"
_UNIT_TERM = re.compile(rf"\s*{_COEF}?\s*\*?\s*{_UNIT}\s*")
_PAIR_TERM = re.compile(rf"\s*{_COEF}?\s*\*?\s*<\s*{_UNIT}\s*,\s*{_UNIT}\s*>\s*")
_SIGN = re.compile(r"\s*([+-])\s*")


def _coef(text: str | None) -> Fraction:
    return Fraction(1) if text is None else Fraction(text.replace(" ", ""))


def _parse_lincomb(text: str, term: re.Pattern, build) -> tuple:
    """``[sign] term (sign term)*`` -> tuple of (coefficient, payload)."""
    pos = 0
    out = []
    first = True
    text = text.strip()
    if not text:
        raise ValueError("empty expression")
    while pos < len(text):
        sign = 1
        m = _SIGN.match(text, pos)
        if m:
            sign = -1 if m.group(1) == "-" else 1
            pos = m.end()
        elif not first:
            raise ValueError(f"expected '+' or '-' at {text[pos:]!r}")
        m = term.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse term at {text[pos:]!r}")
        coef, payload = build(m)
        out.append((sign * coef, payload))
        pos = m.end()
        first = False
    return tuple(out)


def parse_matrix_expr(text: str) -> MatExpr:
    return _parse_lincomb(text, _UNIT_TERM,
                          lambda m: (_coef(m.group(1)), (m.group(2), m.group(3))))


def parse_pair_expr(text: str) -> PairExpr:
    if text.strip() == "0":
        return ()
    return _parse_lincomb(
        text, _PAIR_TERM,
        lambda m: (_coef(m.group(1)), ((m.group(2), m.group(3)), (m.group(4), m.group(5)))))


def parse_relation(text: str) -> list[PairExpr]:
    """A chain ``A = B = C`` as its consecutive differences ``A - B``, ``B - C``."""
    sides = [parse_pair_expr(s) for s in text.split("=")]
    if len(sides) < 2:
        raise ValueError(f"relation {text!r} has no '='")
    diffs = []
    for lhs, rhs in zip(sides, sides[1:]):
        diffs.append(lhs + tuple((-c, pair) for c, pair in rhs))
    return diffs


def _symbols_of(expr) -> set[str]:
    out = set()
    for _, payload in expr:
        units = payload if isinstance(payload[0], tuple) else (payload,)
        for u in units:
            out.update(t for t in u if not t.isdigit())
    return out


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------

_NE = re.compile(rf"^\s*{_IDX}\s*(?:!=|≠)\s*{_IDX}\s*$")
_DISTINCT = re.compile(r"^\s*distinct\s*\(([^()]*)\)\s*$")
_NGUARD = re.compile(r"^\s*n\s*(>|=|==)\s*(\d+)\s*$")


@dataclass(frozen=True)
class Constraint:
    kind: str  # "ne", "distinct", "n_gt", "n_eq"
    args: tuple

    def holds(self, env: dict[str, int], n: int) -> bool:
        if self.kind == "ne":
            a, b = (_value(t, env) for t in self.args)
            return a != b
        if self.kind == "distinct":
            vals = [_value(t, env) for t in self.args]
            return len(set(vals)) == len(vals)
        if self.kind == "n_gt":
            return n > self.args[0]
        return n == self.args[0]

    def symbols(self) -> set[str]:
        if self.kind in ("ne", "distinct"):
            return {t for t in self.args if not t.isdigit()}
        return set()

    def __str__(self) -> str:
        if self.kind == "ne":
            return f"{self.args[0]}!={self.args[1]}"
        if self.kind == "distinct":
            return f"distinct({','.join(self.args)})"
        return f"n{'>' if self.kind == 'n_gt' else '='}{self.args[0]}"


def _value(token: str, env: dict[str, int]) -> int:
    return int(token) if token.isdigit() else env[token]


def parse_constraint(text: str) -> Constraint:
    if not isinstance(text, str):
        raise ParseError(f"constraint must be a string, got {text!r}")
    m = _NE.match(text)
    if m:
        return Constraint("ne", (m.group(1), m.group(2)))
    m = _DISTINCT.match(text)
    if m:
        toks = [t.strip() for t in m.group(1).split(",")]
        if len(toks) < 2 or not all(re.fullmatch(_IDX, t) for t in toks):
            raise ParseError(f"bad distinct() list in {text!r}")
        return Constraint("distinct", tuple(toks))
    m = _NGUARD.match(text)
    if m:
        return Constraint("n_gt" if m.group(1) == ">" else "n_eq", (int(m.group(2)),))
    # Looks like an inequality atom with a missing operand -> malformed, not unknown.
    if re.search(r"!=|≠", text) or re.match(r"^\s*distinct\b", text):
        raise ParseError(f"malformed constraint {text!r}")
    raise SchemaError(f"unknown constraint atom {text!r}")


# ---------------------------------------------------------------------------
# Catalog model
# ---------------------------------------------------------------------------

FIXED_SYMBOLS = {"diagonal": ("s",), "offdiagonal": ("p", "q")}


@dataclass(frozen=True)
class StepTemplate:
    id: str
    anchor: str
    index_vars: tuple[str, ...]
    requires: tuple[Constraint, ...]
    left: MatExpr | None
    right: MatExpr | None
    target: MatExpr | None
    relations: tuple[PairExpr, ...]
    relation_texts: tuple[str, ...]
    comment: str = ""
    line: int | None = None

    @property
    def has_witness(self) -> bool:
        return self.left is not None


@dataclass(frozen=True)
class Catalog:
    name: str
    point_kind: str
    steps: tuple[StepTemplate, ...]
    final_relation_families: tuple[StepTemplate, ...]
    source: str = ""

    @property
    def fixed_symbols(self) -> tuple[str, ...]:
        return FIXED_SYMBOLS[self.point_kind]

    def step(self, step_id: str) -> StepTemplate:
        for s in self.steps + self.final_relation_families:
            if s.id == step_id:
                return s
        raise KeyError(step_id)

    def replace_step(self, new: StepTemplate) -> Catalog:
        steps = tuple(new if s.id == new.id else s for s in self.steps)
        fams = tuple(new if s.id == new.id else s for s in self.final_relation_families)
        return replace(self, steps=steps, final_relation_families=fams)


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    mapping = loader.construct_mapping(node, deep=deep)
    mapping["__line__"] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _as_list(value, what: str, sid: str | None, line: int | None) -> list:
    if value is None:
        return []
    if not isinstance(value, list):
        raise SchemaError(f"{what} must be a list", step=sid, line=line)
    return value


_STEP_KEYS = {"id", "paper_anchor", "vars", "requires", "left", "right", "target",
              "relations", "comment", "__line__"}


def _build_step(raw: dict, fixed: tuple[str, ...], family: bool) -> StepTemplate:
    line = raw.get("__line__")
    sid = raw.get("id")
    if not isinstance(sid, str) or not sid:
        raise SchemaError("step without an id", line=line)
    unknown = set(raw) - _STEP_KEYS
    if unknown:
        raise SchemaError(f"unknown step fields {sorted(unknown)}", step=sid, line=line)
    index_vars = tuple(_as_list(raw.get("vars"), "vars", sid, line))
    if any(not isinstance(v, str) or not re.fullmatch(r"[A-Za-z]\w*", v) for v in index_vars):
        raise SchemaError(f"bad index variable list {index_vars}", step=sid, line=line)
    if set(index_vars) & set(fixed):
        raise SchemaError(f"variables shadow fixed indices {fixed}", step=sid, line=line)
    try:
        requires = tuple(parse_constraint(c) for c in _as_list(raw.get("requires"), "requires",
                                                               sid, line))
    except CatalogError as exc:
        raise type(exc)(str(exc), step=sid, line=line) from None

    def expr(key):
        text = raw.get(key)
        if text is None:
            return None
        try:
            return parse_matrix_expr(str(text))
        except ValueError as exc:
            raise ParseError(f"{key}: {exc}", step=sid, line=line) from None

    left, right, target = expr("left"), expr("right"), expr("target")
    if family and left is not None:
        raise SchemaError("relation families carry no witness", step=sid, line=line)
    if (left is None) != (right is None):
        raise SchemaError("left and right must be given together", step=sid, line=line)
    texts = [str(r) for r in _as_list(raw.get("relations"), "relations", sid, line)]
    relations = []
    try:
        for t in texts:
            relations.extend(parse_relation(t))
    except ValueError as exc:
        raise ParseError(f"relation: {exc}", step=sid, line=line) from None
    if left is None and not relations:
        raise SchemaError("step has neither a witness nor relations", step=sid, line=line)

    known = set(index_vars) | set(fixed)
    used = set()
    for e in (left, right, target):
        if e:
            used |= _symbols_of(e)
    for r in relations:
        used |= _symbols_of(r)
    for c in requires:
        used |= c.symbols()
    undeclared = used - known
    if undeclared:
        raise SchemaError(f"undeclared index symbols {sorted(undeclared)}", step=sid, line=line)
    return StepTemplate(
        id=sid, anchor=str(raw.get("paper_anchor", "")), index_vars=index_vars,
        requires=requires, left=left, right=right, target=target,
        relations=tuple(relations), relation_texts=tuple(texts),
        comment=str(raw.get("comment", "") or ""), line=line,
    )


def load_catalog(source: str) -> Catalog:
    """Parse and validate catalog text."""
    try:
        doc = yaml.load(source, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(f"YAML error: {getattr(exc, 'problem', exc)}",
                         line=None if mark is None else mark.line + 1) from None
    if not isinstance(doc, dict):
        raise SchemaError("catalog must be a mapping")
    name = doc.get("name")
    kind = doc.get("point_kind")
    if not isinstance(name, str):
        raise SchemaError("catalog needs a name")
    if kind not in FIXED_SYMBOLS:
        raise SchemaError(f"point_kind must be one of {sorted(FIXED_SYMBOLS)}")
    fixed = FIXED_SYMBOLS[kind]
    steps = tuple(_build_step(s, fixed, False)
                  for s in _as_list(doc.get("steps"), "steps", None, None))
    fams = tuple(_build_step(s, fixed, True)
                 for s in _as_list(doc.get("families"), "families", None, None))
    ids = [s.id for s in steps + fams]
    dup = {i for i in ids if ids.count(i) > 1}
    if dup:
        raise SchemaError(f"duplicate step ids {sorted(dup)}")
    if not steps:
        raise SchemaError("catalog has no steps")
    return Catalog(name=name, point_kind=kind, steps=steps,
                   final_relation_families=fams, source=source)


BUNDLED = {"t22": "t22.yaml", "t23": "t23.yaml"}


def _catalog_text(name: str) -> str:
    override = os.environ.get("JORDET_CATALOG_DIR")
    if override:
        return (Path(override) / BUNDLED[name]).read_text(encoding="utf-8")
    return resources.files("jordet.catalogs").joinpath(BUNDLED[name]).read_text(encoding="utf-8")


def load_bundled(name: str) -> Catalog:
    key = name.lower().replace(".", "")
    if key not in BUNDLED:
        raise KeyError(f"no bundled catalog {name!r}; choose from {sorted(BUNDLED)}")
    return load_catalog(_catalog_text(key))


def resolve_catalog(ref: str | Catalog) -> Catalog:
    """A bundled name (``t22``, ``T2.3``), a file path, or a Catalog."""
    if isinstance(ref, Catalog):
        return ref
    key = ref.lower().replace(".", "")
    try:
        if key in BUNDLED:
            return load_bundled(key)
        text = Path(ref).read_text(encoding="utf-8")
    except OSError as exc:
        raise CatalogError(f"cannot read catalog {ref!r}: {exc.strerror or exc}") from None
    return load_catalog(text)


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------


@dataclass
class ConcreteStep:
    template: StepTemplate
    assignment: dict[str, int]
    n: int
    left: Matrix | None
    right: Matrix | None
    target: Matrix | None
    relations: list[dict[int, object]]

    @property
    def id(self) -> str:
        return self.template.id


def _env(catalog_fixed: tuple[str, ...], point: Sequence[int], assignment: dict) -> dict:
    env = dict(zip(catalog_fixed, point))
    env.update(assignment)
    return env


def _matrix(expr: MatExpr, env: dict, n: int, ring: Ring) -> Matrix:
    m = Matrix.zeros(ring, n)
    for c, (a, b) in expr:
        s = slot(n, _value(a, env), _value(b, env))
        m.data[s // n][s % n] = ring.add(m.data[s // n][s % n], ring(c))
    return m


def _pair_vector(expr: PairExpr, env: dict, n: int, ring: Ring) -> dict[int, object]:
    N = n * n
    out: dict[int, object] = {}
    for c, ((a, b), (k, m)) in expr:
        pos = sym_index(slot(n, _value(a, env), _value(b, env)),
                        slot(n, _value(k, env), _value(m, env)), N)
        out[pos] = ring.add(out.get(pos, ring.zero), ring(c))
    return {k: v for k, v in out.items() if v}


def _point_matrix(kind: str, point: Sequence[int], n: int, ring: Ring) -> Matrix:
    i, j = (point[0], point[0]) if kind == "diagonal" else tuple(point)
    m = Matrix.zeros(ring, n)
    s = slot(n, i, j)
    m.data[s // n][s % n] = ring.one
    return m


def _check_point(kind: str, point: Sequence[int], n: int) -> tuple[int, ...]:
    point = tuple(point)
    want = len(FIXED_SYMBOLS[kind])
    if len(point) != want:
        raise ValueError(f"{kind} catalogs take {want} point index(es), got {point}")
    for x in point:
        if not 1 <= x <= n:
            raise IndexError(f"point index {x} outside 1..{n}")
    if kind == "offdiagonal" and point[0] == point[1]:
        raise ValueError("off-diagonal point needs p != q")
    return point


def instantiate(t: StepTemplate, n: int, point_indices: Sequence[int],
                assignment: dict[str, int], ring: Ring,
                point_kind: str | None = None) -> ConcreteStep | None:
    """Concrete matrices and relation vectors, or None if a constraint fails."""
    if set(assignment) != set(t.index_vars):
        raise ValueError(f"assignment {assignment} does not cover {t.index_vars}")
    for v in assignment.values():
        if not 1 <= v <= n:
            raise IndexError(f"index {v} outside 1..{n}")
    kind = point_kind or ("diagonal" if len(point_indices) == 1 else "offdiagonal")
    env = _env(FIXED_SYMBOLS[kind], point_indices, assignment)
    if not all(c.holds(env, n) for c in t.requires):
        return None
    left = right = target = None
    if t.has_witness:
        left = _matrix(t.left, env, n, ring)
        right = _matrix(t.right, env, n, ring)
        target = (_matrix(t.target, env, n, ring) if t.target is not None
                  else _point_matrix(kind, point_indices, n, ring))
    rels = [_pair_vector(r, env, n, ring) for r in t.relations]
    return ConcreteStep(t, dict(assignment), n, left, right, target, rels)


def assignments(t: StepTemplate, n: int) -> Iterator[dict[str, int]]:
    for combo in itertools.product(range(1, n + 1), repeat=len(t.index_vars)):
        yield dict(zip(t.index_vars, combo))


def _instances(t: StepTemplate, n: int, point: Sequence[int], ring: Ring,
               kind: str) -> list[ConcreteStep]:
    out = []
    for a in assignments(t, n):
        c = instantiate(t, n, point, a, ring, kind)
        if c is not None:
            out.append(c)
    return out


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass
class StepResult:
    step_id: str
    assignment: dict[str, int]
    identity_ok: bool | None  # None for relation-only steps
    product: Matrix | None = None
    relation_ok: list[bool] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.identity_ok is not False and all(self.relation_ok)


def _base_sigma(target: Matrix) -> dict:
    ring = target.ring
    return sigma_sparse(target.scale(Fraction(1, 2)), Matrix.identity(ring, target.n))


def _witness_vector(step: ConcreteStep) -> dict:
    ring = step.left.ring
    v = sigma_sparse(step.left, step.right)
    for k, x in _base_sigma(step.target).items():
        v[k] = ring.sub(v.get(k, ring.zero), x)
    return {k: x for k, x in v.items() if x}


def check_identity(step: ConcreteStep, state: SpanAccumulator | None,
                   check_soundness: bool = False) -> StepResult:
    """Phase 1: ``left o right = target``; on success feed the difference into ``state``."""
    res = StepResult(step.id, step.assignment, None)
    if step.left is None:
        return res
    prod = jordan(step.left, step.right)
    res.product = prod
    res.identity_ok = prod == step.target
    if res.identity_ok and state is not None:
        v = _witness_vector(step)
        if check_soundness and any(apply_jordan_sym(v, step.n, state.ring)):
            raise AssertionError(f"witness difference of {step.id} left ker J")
        state.insert(v)
    return res


def check_relations(step: ConcreteStep, state: SpanAccumulator, res: StepResult) -> StepResult:
    """Phase 2: each relation vector must lie in ``state``."""
    res.relation_ok = [state.contains(r) for r in step.relations]
    return res


def verify_step(step: ConcreteStep, state: SpanAccumulator | None) -> StepResult:
    """Identity check (feeding ``state``), then relation membership."""
    res = check_identity(step, state)
    if state is not None:
        check_relations(step, state, res)
    return res


def _format_matrix(m: Matrix) -> str:
    ring = m.ring
    n = m.n
    terms = []
    for i in range(n):
        for j in range(n):
            x = m.data[i][j]
            if x:
                terms.append(f"{ring.format(x)}e[{i + 1},{j + 1}]")
    return " + ".join(terms) if terms else "0"


@dataclass
class Failure:
    step_id: str
    assignment: dict[str, int]
    anchor: str
    detail: str

    def to_dict(self) -> dict:
        return {"step": self.step_id, "assignment": dict(sorted(self.assignment.items())),
                "anchor": self.anchor, "detail": self.detail}


@dataclass
class ReplayReport:
    catalog: str
    n: int
    point: tuple[int, ...]
    ring: Ring
    instantiations_checked: int = 0
    identity_failures: list[Failure] = field(default_factory=list)
    membership_failures: list[Failure] = field(default_factory=list)
    kernel_span_ok: bool | None = None  # None: skipped (replay-only ring)
    relation_span_dim: int | None = None
    kernel_dim: int | None = None
    witness_span_dim: int | None = None
    elapsed_ms: int = 0

    @property
    def success(self) -> bool:
        if self.identity_failures or self.membership_failures:
            return False
        if not self.ring.is_field:
            return True
        return bool(self.kernel_span_ok)

    @property
    def first_failure(self) -> Failure | None:
        fails = self.identity_failures + self.membership_failures
        return fails[0] if fails else None

    @property
    def failing_steps(self) -> list[str]:
        seen = []
        for f in self.identity_failures + self.membership_failures:
            if f.step_id not in seen:
                seen.append(f.step_id)
        return seen

    def to_dict(self) -> dict:
        return {
            "catalog": self.catalog,
            "n": self.n,
            "point": list(self.point),
            "ring": self.ring.spec,
            "success": self.success,
            "instantiations_checked": self.instantiations_checked,
            "identity_failures": [f.to_dict() for f in self.identity_failures],
            "membership_failures": [f.to_dict() for f in self.membership_failures],
            "kernel_phase": ("checked" if self.kernel_span_ok is not None
                             else "skipped (replay-only ring)"),
            "kernel_span_ok": self.kernel_span_ok,
            "witness_span_dim": self.witness_span_dim,
            "relation_span_dim": self.relation_span_dim,
            "kernel_dim": self.kernel_dim,
        }


def run_catalog(c: Catalog | str, n: int, point_indices: Sequence[int], ring: Ring, *,
                check_soundness: bool = False) -> ReplayReport:
    """Replay every step over all admissible index assignments.

    Within a step all witnesses are fed in before its relations are checked, so a
    relation may use any instance of its own step and of every earlier step.
    Over replay-only rings only the identity phase runs.
    """
    t0 = time.perf_counter()
    c = resolve_catalog(c)
    if n < 3:
        raise ValueError("catalog replay needs n >= 3")
    point = _check_point(c.point_kind, point_indices, n)
    report = ReplayReport(c.name, n, point, ring)
    state = SpanAccumulator(ring, sym_dim(n)) if ring.is_field else None

    for t in c.steps:
        insts = _instances(t, n, point, ring, c.point_kind)
        results = []
        for inst in insts:
            res = check_identity(inst, state, check_soundness)
            report.instantiations_checked += 1
            if res.identity_ok is False:
                report.identity_failures.append(Failure(
                    t.id, inst.assignment, t.anchor,
                    f"({_format_matrix(inst.left)}) o ({_format_matrix(inst.right)}) = "
                    f"{_format_matrix(res.product)} != {_format_matrix(inst.target)}"))
            results.append(res)
        if state is None:
            continue
        for inst, res in zip(insts, results):
            check_relations(inst, state, res)
            for k, ok in enumerate(res.relation_ok):
                if not ok:
                    report.membership_failures.append(Failure(
                        t.id, inst.assignment, t.anchor,
                        f"relation #{k + 1} not derivable: {_relation_text(t, k)}"))

    if state is None:
        # Families are still instantiated so that bad indices surface as errors.
        for t in c.final_relation_families:
            report.instantiations_checked += len(_instances(t, n, point, ring, c.point_kind))
        report.elapsed_ms = int((time.perf_counter() - t0) * 1000)
        return report

    report.witness_span_dim = state.rank
    relation_span = SpanAccumulator(ring, sym_dim(n))
    for t in c.final_relation_families:
        for inst in _instances(t, n, point, ring, c.point_kind):
            report.instantiations_checked += 1
            for k, r in enumerate(inst.relations):
                if not state.contains(r):
                    report.membership_failures.append(Failure(
                        t.id, inst.assignment, t.anchor,
                        f"relation #{k + 1} not derivable: {_relation_text(t, k)}"))
                relation_span.insert(r)
    kernel = kernel_of_jordan(n, ring)
    report.kernel_dim = kernel.dim
    report.relation_span_dim = relation_span.rank
    report.kernel_span_ok = _spans_kernel(relation_span, kernel)
    report.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    return report


def _relation_text(t: StepTemplate, k: int) -> str:
    # Relations are stored flattened; map the k-th difference back to its source chain.
    count = 0
    for text in t.relation_texts:
        links = len(parse_relation(text))
        if k < count + links:
            return text if links == 1 else f"{text} [link {k - count + 1}]"
        count += links
    return "?"


def _spans_kernel(span: SpanAccumulator, kernel) -> bool:
    """Equal dimension plus containment of the span in ``K``."""
    if span.rank != kernel.dim:
        return False
    return all(kernel.contains(v) for v in span.basis)


def verify_relation_completeness(c: Catalog | str, n: int, ring: Ring,
                                 families: Sequence[str] | None = None) -> bool:
    """True iff the closing relation families span exactly ``K``.

    ``families`` restricts the check to the named family ids.
    """
    ring.require_field("verify_relation_completeness")
    c = resolve_catalog(c)
    point = (1,) if c.point_kind == "diagonal" else (1, 2)
    span = SpanAccumulator(ring, sym_dim(n))
    for t in c.final_relation_families:
        if families is not None and t.id not in families:
            continue
        for inst in _instances(t, n, point, ring, c.point_kind):
            span.extend(inst.relations)
    return _spans_kernel(span, kernel_of_jordan(n, ring))


def relation_span_dim(c: Catalog | str, n: int, ring: Ring,
                      families: Sequence[str] | None = None) -> int:
    c = resolve_catalog(c)
    point = (1,) if c.point_kind == "diagonal" else (1, 2)
    span = SpanAccumulator(ring, sym_dim(n))
    for t in c.final_relation_families:
        if families is None or t.id in families:
            for inst in _instances(t, n, point, ring, c.point_kind):
                span.extend(inst.relations)
    return span.rank


def catalog_witnesses(c: Catalog | str, n: int, point_indices: Sequence[int],
                      ring: Ring) -> Iterator[tuple[Matrix, Matrix]]:
    """Every instantiated witness pair of the catalog, in step order."""
    c = resolve_catalog(c)
    point = _check_point(c.point_kind, point_indices, n)
    for t in c.steps:
        if t.has_witness:
            for inst in _instances(t, n, point, ring, c.point_kind):
                yield inst.left, inst.right


def point_indices_of(a: Matrix) -> tuple[int, ...] | None:
    """``(s,)`` for ``e_ss``, ``(p, q)`` for ``e_pq``, None if ``a`` is not a unit."""
    nz = [(i, j, x) for i, row in enumerate(a.data) for j, x in enumerate(row) if x]
    if len(nz) != 1 or nz[0][2] != 1:
        return None
    i, j, _ = nz[0]
    return (i + 1,) if i == j else (i + 1, j + 1)

