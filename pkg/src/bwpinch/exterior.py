"""Pointwise exterior algebra of an oriented Euclidean space R^n.

Forms are stored as dense coefficient vectors over the lexicographic basis
theta^I, I a strictly increasing multi-index. Internally index sets are
0-based bit masks; :class:`MultiIndex` is the 1-based public view.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

MAX_DIM = 12


def set_max_dim(n: int) -> None:
    """Override the default dimension cap (``n <= 12``)."""
    global MAX_DIM
    if n < 1:
        raise ValueError("dimension cap must be positive")
    MAX_DIM = int(n)


def check_dim(n: int) -> None:
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension n={n} outside [1, {MAX_DIM}]")


@dataclass(frozen=True)
class MultiIndex:
    """Strictly increasing 1-based index tuple labelling theta^{i1} ^ ... ^ theta^{ik}."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"multi-index {idx} is not strictly increasing")
        if idx and idx[0] < 1:
            raise ValueError(f"multi-index {idx} has entries below 1")
        object.__setattr__(self, "indices", idx)

    @property
    def degree(self) -> int:
        return len(self.indices)

    def rank(self, n: int) -> int:
        """Position in the lexicographic enumeration of k-subsets of {1..n}."""
        k = self.degree
        if self.indices and self.indices[-1] > n:
            raise ValueError(f"multi-index {self.indices} exceeds n={n}")
        r, prev = 0, 0
        for i, c in enumerate(self.indices):
            for v in range(prev + 1, c):
                r += comb(n - v, k - i - 1)
            prev = c
        return r

    @classmethod
    def unrank(cls, n: int, k: int, r: int) -> "MultiIndex":
        if not 0 <= r < comb(n, k):
            raise ValueError(f"rank {r} outside [0, {comb(n, k)})")
        out, v = [], 1
        for i in range(k):
            while True:
                block = comb(n - v, k - i - 1)
                if r < block:
                    break
                r -= block
                v += 1
            out.append(v)
            v += 1
        return cls(tuple(out))

    def mask(self) -> int:
        m = 0
        for i in self.indices:
            m |= 1 << (i - 1)
        return m


@lru_cache(maxsize=None)
def basis(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """0-based lexicographic basis of Lambda^k R^n."""
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def basis_masks(n: int, k: int) -> np.ndarray:
    out = np.array([sum(1 << i for i in I) for I in basis(n, k)], dtype=np.int64)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def mask_rank(n: int) -> np.ndarray:
    """Table mask -> lexicographic rank inside its own degree."""
    table = np.full(1 << n, -1, dtype=np.int64)
    for k in range(n + 1):
        table[basis_masks(n, k)] = np.arange(comb(n, k))
    table.setflags(write=False)
    return table


def merge_sign(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Sign of sorting the concatenation (A, B) of disjoint index sets.

    Counts pairs x in A, y in B with y < x.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    inv = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    for x in range(n):
        below = b & ((1 << x) - 1)
        inv += ((a >> x) & 1) * np.bitwise_count(below)
    return 1 - 2 * (inv & 1)


@dataclass(frozen=True, eq=False)
class KForm:
    n: int
    k: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (comb(self.n, self.k),):
            raise ValueError(f"expected {comb(self.n, self.k)} coefficients for a "
                             f"{self.k}-form in dimension {self.n}, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, n, k):
        return cls(n, k, np.zeros(comb(n, k)))

    @classmethod
    def basis_form(cls, n, indices, coeff=1.0):
        """theta^{i1} ^ ... ^ theta^{ik} for 1-based ``indices`` (need not be sorted)."""
        idx = list(indices)
        k = len(idx)
        if len(set(idx)) < k:
            return cls.zero(n, k)
        perm_sign = 1
        for i in range(k):
            for j in range(i + 1, k):
                if idx[i] > idx[j]:
                    perm_sign = -perm_sign
        out = np.zeros(comb(n, k))
        out[MultiIndex(tuple(sorted(idx))).rank(n)] = perm_sign * coeff
        return cls(n, k, out)

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(len(v), 1, v)

    def __add__(self, other):
        _same_space(self, other)
        return KForm(self.n, self.k, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_space(self, other)
        return KForm(self.n, self.k, self.coeffs - other.coeffs)

    def __neg__(self):
        return KForm(self.n, self.k, -self.coeffs)

    def __mul__(self, s):
        return KForm(self.n, self.k, s * self.coeffs)

    __rmul__ = __mul__

    def inner(self, other) -> float:
        _same_space(self, other)
        return float(self.coeffs @ other.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def allclose(self, other, atol=1e-12) -> bool:
        return (self.n, self.k) == (other.n, other.k) and np.allclose(
            self.coeffs, other.coeffs, rtol=0, atol=atol)


def _same_space(a: KForm, b: KForm):
    if (a.n, a.k) != (b.n, b.k):
        raise ValueError(f"forms live in different spaces: {(a.n, a.k)} vs {(b.n, b.k)}")


@lru_cache(maxsize=None)
def wedge_table(n: int, p: int, q: int):
    """All disjoint basis pairs (I, J) of degrees (p, q): returns (i, j, out, sign)."""
    ma, mb = basis_masks(n, p), basis_masks(n, q)
    ii, jj = np.nonzero((ma[:, None] & mb[None, :]) == 0)
    sign = merge_sign(ma[ii], mb[jj], n).astype(float)
    out = mask_rank(n)[ma[ii] | mb[jj]]
    return ii, jj, out, sign


def wedge(a: KForm, b: KForm) -> KForm:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch {a.n} vs {b.n}")
    n, p, q = a.n, a.k, b.k
    if p + q > n:
        raise ValueError(f"degree {p}+{q} exceeds n={n}")
    ii, jj, out, sign = wedge_table(n, p, q)
    res = np.bincount(out, weights=sign * a.coeffs[ii] * b.coeffs[jj],
                      minlength=comb(n, p + q))
    return KForm(n, p + q, res)


@lru_cache(maxsize=None)
def _interior_table(n: int, k: int):
    rows, cols, slots, signs = [], [], [], []
    rank = {I: r for r, I in enumerate(basis(n, k - 1))}
    for r, I in enumerate(basis(n, k)):
        for pos, i in enumerate(I):
            rows.append(rank[I[:pos] + I[pos + 1:]])
            cols.append(r)
            slots.append(i)
            signs.append(-1.0 if pos % 2 else 1.0)
    return (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
            np.array(slots, dtype=np.int64), np.array(signs))


def interior(v, a: KForm) -> KForm:
    """Contraction v ⌟ a of a vector with a k-form, k >= 1."""
    v = np.asarray(v, dtype=float)
    if a.k < 1:
        raise ValueError("interior product needs a form of degree >= 1")
    if v.shape != (a.n,):
        raise ValueError(f"vector of length {v.shape} does not match n={a.n}")
    rows, cols, slots, signs = _interior_table(a.n, a.k)
    res = np.bincount(rows, weights=signs * v[slots] * a.coeffs[cols],
                      minlength=comb(a.n, a.k - 1))
    return KForm(a.n, a.k - 1, res)


@lru_cache(maxsize=None)
def hodge_table(n: int, k: int):
    """(target index, sign) with *theta^I = sign * theta^{I^c}."""
    ma = basis_masks(n, k)
    full = (1 << n) - 1
    comp = full ^ ma
    return mask_rank(n)[comp], merge_sign(ma, comp, n).astype(float)


def hodge_star(a: KForm) -> KForm:
    target, sign = hodge_table(a.n, a.k)
    res = np.zeros(comb(a.n, a.n - a.k))
    res[target] = sign * a.coeffs
    return KForm(a.n, a.n - a.k, res)


def hodge_matrix(n: int, k: int) -> np.ndarray:
    """Matrix of * : Lambda^k -> Lambda^{n-k} in the lexicographic bases."""
    target, sign = hodge_table(n, k)
    mat = np.zeros((comb(n, n - k), comb(n, k)))
    mat[target, np.arange(comb(n, k))] = sign
    return mat


def self_dual_split(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases (as columns) of Lambda^{n/2}_+ and Lambda^{n/2}_- for n/2 even."""
    if n % 4:
        raise ValueError("self-dual splitting needs n divisible by 4")
    star = hodge_matrix(n, n // 2)
    ident = np.eye(star.shape[0])
    out = []
    for s in (1.0, -1.0):
        proj = 0.5 * (ident + s * star)
        w, v = np.linalg.eigh(proj)
        out.append(v[:, w > 0.5])
    return out[0], out[1]


def random_form(n: int, k: int, rng: np.random.Generator) -> KForm:
    return KForm(n, k, rng.standard_normal(comb(n, k)))
