"""Slow index-sum reference implementations used only by the tests."""
from __future__ import annotations

import itertools
from math import comb

import numpy as np


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq`` (distinct entries)."""
    s, seq = 1, list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def lex(n, k):
    return list(itertools.combinations(range(n), k))


def index_of(n, k):
    return {I: r for r, I in enumerate(lex(n, k))}


def wedge(a, p, b, q, n):
    out = np.zeros(comb(n, p + q))
    pos = index_of(n, p + q)
    for i, I in enumerate(lex(n, p)):
        for j, J in enumerate(lex(n, q)):
            if set(I) & set(J):
                continue
            out[pos[tuple(sorted(I + J))]] += perm_sign(I + J) * a[i] * b[j]
    return out


def kn(a, pa, qa, b, pb, qb, n):
    """(a.b)_{I,J} = sum over splittings I = I1 u I2, J = J1 u J2 with shuffle signs."""
    out = np.zeros((comb(n, pa + pb), comb(n, qa + qb)))
    rows, cols = index_of(n, pa + pb), index_of(n, qa + qb)
    for (i1, I1), (j1, J1) in itertools.product(enumerate(lex(n, pa)), enumerate(lex(n, qa))):
        if a[i1, j1] == 0:
            continue
        for (i2, I2), (j2, J2) in itertools.product(enumerate(lex(n, pb)), enumerate(lex(n, qb))):
            if set(I1) & set(I2) or set(J1) & set(J2):
                continue
            s = perm_sign(I1 + I2) * perm_sign(J1 + J2)
            out[rows[tuple(sorted(I1 + I2))], cols[tuple(sorted(J1 + J2))]] += \
                s * a[i1, j1] * b[i2, j2]
    return out


def ctr(a, p, q, n):
    """(ctr a)(x; y) = sum_i a(e_i, x; e_i, y) on basis forms."""
    out = np.zeros((comb(n, p - 1), comb(n, q - 1)))
    rows, cols = index_of(n, p), index_of(n, q)
    for r, I in enumerate(lex(n, p - 1)):
        for c, J in enumerate(lex(n, q - 1)):
            for i in range(n):
                if i in I or i in J:
                    continue
                s = perm_sign((i,) + I) * perm_sign((i,) + J)
                out[r, c] += s * a[rows[tuple(sorted((i,) + I))], cols[tuple(sorted((i,) + J))]]
    return out


def curvature_operator(r):
    """op[I,J] = R(e_i1, e_i2, e_j1, e_j2) over lexicographic pairs."""
    pairs = lex(r.shape[0], 2)
    return np.array([[r[i, j, k, l] for (k, l) in pairs] for (i, j) in pairs])


def ricci(r):
    return np.einsum("abad->bd", r)


def full_norm_sq_quarter(r):
    return 0.25 * float(np.sum(r * r))


def complex_space_form(m, c):
    """R(X,Y,Z,W) of CP^m with J e_{2i} = e_{2i+1} (0-based), explicit loops."""
    d = 2 * m
    g = np.eye(d)
    J = np.zeros((d, d))
    for i in range(m):
        J[2 * i + 1, 2 * i] = 1.0
        J[2 * i, 2 * i + 1] = -1.0
    # g(JX, Y) for basis vectors: (J e_a)_b = J[b, a]
    om = J.T
    r = np.zeros((d, d, d, d))
    for a, b, cc, e in itertools.product(range(d), repeat=4):
        r[a, b, cc, e] = 0.25 * c * (g[a, cc] * g[b, e] - g[a, e] * g[b, cc]
                                     + om[a, cc] * om[b, e] - om[a, e] * om[b, cc]
                                     + 2 * om[a, b] * om[cc, e])
    return r


def sectional(r, u, v):
    num = np.einsum("abcd,a,b,c,d->", r, u, v, u, v)
    return num / (u @ u * (v @ v) - (u @ v) ** 2)
