"""Single-coefficient catalog mutations that replay is guaranteed to notice.

Adding 1 to a witness coefficient on ``e_u`` changes the product by
``e_u o other``, so the identity breaks wherever that is nonzero.  Adding 1 to a
relation coefficient on ``<e_a, e_b>`` shifts the relation vector by a tensor
whose Jordan image is ``e_a o e_b``; if that is nonzero the shifted relation
leaves ``ker J`` and cannot lie in the witness span.  Other coefficients may be
absorbed (the mutated relation can still be derivable), so they are skipped.
"""

from dataclasses import replace
from fractions import Fraction

from jordet.jordan import jordan, unit
from jordet.replay import FIXED_SYMBOLS, _value, assignments, instantiate


def _envs(t, n, point, kind):
    fixed = FIXED_SYMBOLS[kind]
    for a in assignments(t, n):
        if instantiate(t, n, point, a, ring_q(), kind) is not None:
            env = dict(zip(fixed, point))
            env.update(a)
            yield env


def ring_q():
    from jordet.linalg import QQ
    return QQ


def _unit(n, u, env):
    return unit(n, _value(u[0], env), _value(u[1], env))


def _mat(n, expr, env):
    m = None
    for c, u in expr:
        term = _unit(n, u, env).scale(c)
        m = term if m is None else m + term
    return m


def sensitive_mutations(catalog, n, point):
    """``(step_id, field, index)`` triples; relation terms use ``(relation, term)``."""
    out = []
    kind = catalog.point_kind
    for t in catalog.steps + catalog.final_relation_families:
        envs = list(_envs(t, n, point, kind))
        if not envs:
            continue
        if t.has_witness:
            for side, other in (("left", t.right), ("right", t.left)):
                for k, (_, u) in enumerate(getattr(t, side)):
                    if any(not jordan(_unit(n, u, e), _mat(n, other, e)).is_zero() for e in envs):
                        out.append((t.id, side, k))
        for r, rel in enumerate(t.relations):
            for k, (_, (ua, ub)) in enumerate(rel):
                if any(not jordan(_unit(n, ua, e), _unit(n, ub, e)).is_zero() for e in envs):
                    out.append((t.id, "relations", (r, k)))
    return out


def mutate(catalog, step_id, field, index):
    t = catalog.step(step_id)
    if field in ("left", "right"):
        terms = list(getattr(t, field))
        c, u = terms[index]
        terms[index] = (c + Fraction(1), u)
        new = replace(t, **{field: tuple(terms)})
    else:
        r, k = index
        rels = [list(x) for x in t.relations]
        c, pair = rels[r][k]
        rels[r][k] = (c + Fraction(1), pair)
        new = replace(t, relations=tuple(tuple(x) for x in rels))
    return catalog.replace_step(new)
