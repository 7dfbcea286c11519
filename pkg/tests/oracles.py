"""Independent reference computations for the test suite.

Nothing here imports the package: matrices are numpy integer arrays reduced
mod p, and elimination is a plain textbook Gauss-Jordan.
"""

import itertools

import numpy as np


def rref_mod_p(a, p):
    """Reduced row-echelon form of an integer matrix over F_p; returns (R, pivots)."""
    m = np.array(a, dtype=np.int64) % p
    if m.ndim == 1:
        m = m.reshape(1, -1)
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        m[[r, k]] = m[[k, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, p)) % p
        others = np.nonzero(m[:, c])[0]
        for o in others:
            if o != r:
                m[o] = (m[o] - m[o, c] * m[r]) % p
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank_mod_p(a, p):
    if len(a) == 0:
        return 0
    return len(rref_mod_p(a, p)[1])


def nullspace_mod_p(a, p):
    red, pivots = rref_mod_p(a, p)
    cols = np.array(a).shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for row, pc in zip(red, pivots):
            v[pc] = (-row[f]) % p
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(basis), cols)


def jordan_np(x, y):
    return x @ y + y @ x


def sym_coords(x, y, p=None):
    """Unordered-pair coordinates, lexicographic (a <= b), cross terms summed."""
    xv, yv = np.asarray(x).ravel(), np.asarray(y).ravel()
    outer = np.outer(xv, yv)
    full = outer + outer.T
    iu = np.triu_indices(len(xv))
    v = full[iu].astype(object)
    diag = iu[0] == iu[1]
    v[diag] = (xv * yv)[iu[0][diag]]
    if p is not None:
        v = np.array([int(t) % p for t in v], dtype=np.int64)
    return v


def all_matrices(n, p):
    for digits in itertools.product(range(p), repeat=n * n):
        yield np.array(digits, dtype=np.int64).reshape(n, n)


def brute_force_span_dim(a, p):
    """dim span{sigma(x, y) - sigma(a/2, I) : x o y = a} by enumerating every pair."""
    n = a.shape[0]
    mats = np.array(list(all_matrices(n, p)))           # (p^N, n, n)
    half = pow(2, -1, p)
    base = sym_coords((a * half) % p, np.eye(n, dtype=np.int64), p)
    diffs = []
    for x in mats:
        prods = (np.einsum("ij,bjk->bik", x, mats) + np.einsum("bij,jk->bik", mats, x)) % p
        hits = np.nonzero((prods == a % p).all(axis=(1, 2)))[0]
        for h in hits:
            diffs.append((sym_coords(x, mats[h], p) - base) % p)
    return rank_mod_p(diffs, p), len(diffs)


def unit_np(n, a):
    e = np.zeros(n * n, dtype=np.int64)
    e[a] = 1
    return e.reshape(n, n)


def jordan_derivation_space(n, p):
    """rref basis of {d : d(I) = 0, d(e_a o e_b) = d(e_a) o e_b + e_a o d(e_b)}.

    Unknown d[r][c] sits at column r * N + c, with d(X) = D vec(X).
    """
    N = n * n
    units = [unit_np(n, a) for a in range(N)]
    # column r of L_b holds vec(e_r o e_b)
    L = [np.array([jordan_np(units[r], units[b]).ravel() for r in range(N)]).T for b in range(N)]
    rows = []
    for a in range(N):
        for b in range(a, N):
            w = jordan_np(units[a], units[b]).ravel()
            for i in range(N):
                row = np.zeros(N * N, dtype=np.int64)
                row[i * N:(i + 1) * N] += w
                for r in range(N):
                    row[r * N + a] -= L[b][i, r]
                    row[r * N + b] -= L[a][i, r]
                rows.append(row)
    eye = np.eye(n, dtype=np.int64).ravel()
    for r in range(N):
        row = np.zeros(N * N, dtype=np.int64)
        row[r * N:(r + 1) * N] = eye
        rows.append(row)
    null = nullspace_mod_p(np.array(rows), p)
    if len(null) == 0:
        return null
    return rref_mod_p(null, p)[0]
