import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jordet.jordan import (
    IndexOutOfRange,
    SizeMismatch,
    apply_jordan_sym,
    identity,
    jordan,
    jordan_operator,
    jordan_sym_matrix,
    kernel_of_jordan,
    sigma,
    slot,
    sym_dim,
    sym_index,
    unit,
)
from jordet.linalg import QQ, CapabilityError, Matrix, rref, ring_create

from oracles import rank_mod_p, sym_coords

F5 = ring_create("Fp", 5)
F7 = ring_create("Fp", 7)


def rand_matrix(n, ring, rng):
    if ring.modulus is None:
        return Matrix(ring, [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)])
    return Matrix(ring, [[rng.randrange(ring.modulus) for _ in range(n)] for _ in range(n)])


def test_unit():
    e = unit(3, 1, 2)
    assert e[0, 1] == 1 and sum(x for r in e.data for x in r) == 1
    assert unit(2, 2, 2).tolist() == [[0, 0], [0, 1]]
    with pytest.raises(IndexOutOfRange):
        unit(3, 4, 1)


def test_jordan_examples():
    assert jordan(unit(3, 1, 3), unit(3, 3, 2)) == unit(3, 1, 2)
    assert jordan(unit(3, 1, 1).scale(Fraction(1, 2)), unit(3, 1, 1)) == unit(3, 1, 1)
    assert jordan(unit(3, 1, 2), unit(3, 2, 1)) == unit(3, 1, 1) + unit(3, 2, 2)


@pytest.mark.parametrize("n", [3, 4])
def test_jordan_chain_through_any_middle_index(n):
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            if p != q:
                for s in range(1, n + 1):
                    assert jordan(unit(n, p, s), unit(n, s, q)) == unit(n, p, q)


def test_jordan_size_mismatch():
    with pytest.raises(SizeMismatch):
        jordan(unit(2, 1, 1), unit(3, 1, 1))
    with pytest.raises(SizeMismatch):
        jordan(unit(2, 1, 1), unit(2, 1, 1, F5))


def test_jordan_operator_examples():
    t = jordan_operator(unit(2, 1, 1))
    assert t.tolist() == [[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]]
    for n in (2, 3):
        assert jordan_operator(identity(n, QQ)) == Matrix.identity(QQ, n * n).scale(2)
    t = jordan_operator(unit(3, 1, 2))
    assert t.apply(unit(3, 2, 1).vec()) == (unit(3, 1, 1) + unit(3, 2, 2)).vec()


def test_jordan_operator_needs_field():
    with pytest.raises(CapabilityError):
        jordan_operator(unit(2, 1, 1, ring_create("Zm", 25)))


@pytest.mark.parametrize("ring", [QQ, F7], ids=str)
def test_jordan_operator_matches_product(ring):
    rng = random.Random(3)
    for _ in range(50):
        x, y = rand_matrix(3, ring, rng), rand_matrix(3, ring, rng)
        assert jordan_operator(x).apply(y.vec()) == jordan(x, y).vec()


def test_sigma_examples():
    N = 4
    v = sigma(unit(2, 1, 1), unit(2, 1, 2))
    assert [k for k, x in enumerate(v) if x] == [sym_index(0, 1, N)]
    v = sigma(unit(2, 1, 1), unit(2, 1, 1))
    assert [(k, x) for k, x in enumerate(v) if x] == [(sym_index(0, 0, N), 1)]


def test_sym_dims():
    assert [sym_dim(n) for n in (2, 3, 4)] == [10, 45, 136]


def test_sym_index_is_lexicographic():
    N = 9
    pos = [sym_index(a, b, N) for a in range(N) for b in range(a, N)]
    assert pos == list(range(sym_dim(3)))
    assert sym_index(4, 2, N) == sym_index(2, 4, N)
    assert slot(3, 2, 3) == 5


@pytest.mark.parametrize("ring", [QQ, F7], ids=str)
def test_sigma_matches_independent_coordinates(ring):
    rng = random.Random(11)
    for _ in range(30):
        x, y = rand_matrix(3, ring, rng), rand_matrix(3, ring, rng)
        xs = np.array([[int(v) for v in r] for r in x.data])
        ys = np.array([[int(v) for v in r] for r in y.data])
        want = sym_coords(xs, ys, ring.modulus)
        assert [int(v) for v in sigma(x, y)] == [int(v) for v in want]


def test_jordan_sym_matrix_columns():
    J = jordan_sym_matrix(2, QQ)
    col = lambda k: [J[r, k] for r in range(4)]
    assert col(sym_index(0, 1, 4)) == unit(2, 1, 2).vec()
    assert col(sym_index(0, 0, 4)) == unit(2, 1, 1).scale(2).vec()


def test_jordan_sym_matrix_rank():
    assert rref(jordan_sym_matrix(3, QQ))[1] == 9


@pytest.mark.parametrize("ring", [F7, QQ], ids=str)
def test_factorization_through_sigma(ring):
    rng = random.Random(2024)
    J = jordan_sym_matrix(3, ring)
    for _ in range(1000):
        x, y = rand_matrix(3, ring, rng), rand_matrix(3, ring, rng)
        want = jordan(x, y).vec()
        s = sigma(x, y)
        assert J.apply(s) == want
        assert apply_jordan_sym(s, 3, ring) == want


coef = st.integers(-5, 5)
mat3 = st.lists(coef, min_size=9, max_size=9)


def _m(v, ring=QQ):
    return Matrix.from_vec(ring, v, 3)


@given(mat3, mat3)
def test_sigma_symmetric(x, y):
    assert sigma(_m(x), _m(y)) == sigma(_m(y), _m(x))


@given(coef, mat3, mat3, mat3)
def test_sigma_bilinear(a, x, b, y):
    ax_b = _m(x).scale(a) + _m(b)
    lhs = sigma(ax_b, _m(y))
    rhs = [a * u + v for u, v in zip(sigma(_m(x), _m(y)), sigma(_m(b), _m(y)))]
    assert lhs == rhs
    lhs = sigma(_m(y), ax_b)
    assert lhs == rhs


@given(st.lists(coef, min_size=45, max_size=45), mat3, mat3)
@settings(max_examples=50)
def test_functional_correspondence(lam, x, y):
    # B(x, y) = lam . sigma(x, y) evaluates to lam{a, b} on units
    N = 9
    B = lambda u, v: sum(l * s for l, s in zip(lam, sigma(u, v)))
    for a, b in [(0, 0), (0, 4), (3, 8), (8, 8)]:
        ea, eb = _m([1 if k == a else 0 for k in range(N)]), _m([1 if k == b else 0 for k in range(N)])
        assert B(ea, eb) == lam[sym_index(a, b, N)]
    # and the form is symmetric and bilinear
    assert B(_m(x), _m(y)) == B(_m(y), _m(x))


def test_kernel_dims():
    assert kernel_of_jordan(2, F5).dim == 6
    assert kernel_of_jordan(3, QQ).dim == 36
    assert kernel_of_jordan(4, QQ).dim == 120


def test_kernel_dim_against_numpy_oracle():
    # J built independently from products of units, ranked mod 7
    n, N = 3, 9
    cols = []
    for a in range(N):
        for b in range(a, N):
            ea = np.zeros((n, n), dtype=np.int64)
            eb = np.zeros((n, n), dtype=np.int64)
            ea.flat[a] = 1
            eb.flat[b] = 1
            cols.append((ea @ eb + eb @ ea).ravel())
    J = np.array(cols).T
    assert 45 - rank_mod_p(J, 7) == kernel_of_jordan(3, F7).dim


@pytest.mark.parametrize("n,ring", [(2, F5), (3, QQ), (3, F7)], ids=str)
def test_kernel_vectors_annihilated(n, ring):
    J = jordan_sym_matrix(n, ring)
    kb = kernel_of_jordan(n, ring)
    assert all(x == 0 for v in kb.vectors for x in J.apply(list(v)))
    assert kb.dim == sym_dim(n) - n * n


def test_kernel_needs_field():
    with pytest.raises(CapabilityError):
        kernel_of_jordan(3, ring_create("Zm", 25))
