"""Double forms on R^n: elements of Lambda^p ⊗ Lambda^q with the
Kulkarni–Nomizu product (ω1⊗θ1)·(ω2⊗θ2) = (ω1∧ω2)⊗(θ1∧θ2).

Coefficients are dense ``C(n,p) x C(n,q)`` matrices in the lexicographic
product basis, which is orthonormal, so the inner product is the Frobenius
one. With this normalization ``g^j / j!`` is the identity of Lambda^j and a
constant-curvature-kappa tensor is ``kappa * g^2 / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exterior import basis_masks, mask_rank, merge_sign

SYM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DoubleForm:
    n: int
    p: int
    q: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        shape = (comb(self.n, self.p), comb(self.n, self.q))
        if c.shape != shape:
            raise ValueError(f"({self.p},{self.q}) double form in dimension {self.n} "
                             f"needs shape {shape}, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def bidegree(self) -> tuple[int, int]:
        return self.p, self.q

    @property
    def symmetric_flag(self) -> bool:
        if self.p != self.q:
            return False
        scale = max(1.0, float(np.abs(self.coeffs).max(initial=0.0)))
        return bool(np.abs(self.coeffs - self.coeffs.T).max(initial=0.0) <= SYM_TOL * scale)

    @classmethod
    def zero(cls, n, p, q):
        return cls(n, p, q, np.zeros((comb(n, p), comb(n, q))))

    def _check(self, other):
        if (self.n, self.p, self.q) != (other.n, other.p, other.q):
            raise ValueError("double forms of different type")

    def __add__(self, other):
        self._check(other)
        return DoubleForm(self.n, self.p, self.q, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return DoubleForm(self.n, self.p, self.q, self.coeffs - other.coeffs)

    def __neg__(self):
        return DoubleForm(self.n, self.p, self.q, -self.coeffs)

    def __mul__(self, s):
        if isinstance(s, DoubleForm):
            return kn_product(self, s)
        return DoubleForm(self.n, self.p, self.q, s * self.coeffs)

    def __rmul__(self, s):
        return DoubleForm(self.n, self.p, self.q, s * self.coeffs)

    def __truediv__(self, s):
        return DoubleForm(self.n, self.p, self.q, self.coeffs / s)

    def inner(self, other) -> float:
        self._check(other)
        return float(np.sum(self.coeffs * other.coeffs))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def transpose(self):
        return DoubleForm(self.n, self.q, self.p, self.coeffs.T)

    def scalar(self) -> float:
        if (self.p, self.q) != (0, 0):
            raise ValueError("only (0,0) double forms are scalars")
        return float(self.coeffs[0, 0])


def metric(n: int) -> DoubleForm:
    return DoubleForm(n, 1, 1, np.eye(n))


def metric_power(n: int, j: int) -> DoubleForm:
    """g^j / j!, which acts as the identity on Lambda^j."""
    return DoubleForm(n, j, j, np.eye(comb(n, j)))


def from_matrix(mat) -> DoubleForm:
    mat = np.asarray(mat, dtype=float)
    return DoubleForm(mat.shape[0], 1, 1, mat)


def _pairs(rows_a, cols_a, rows_b, cols_b, n):
    """Index pairs (a-entry, b-entry) whose row sets and column sets are disjoint."""
    ok = ((rows_a[:, None] & rows_b[None, :]) == 0) & ((cols_a[:, None] & cols_b[None, :]) == 0)
    return np.nonzero(ok)


def kn_product(a: DoubleForm, b: DoubleForm) -> DoubleForm:
    """Kulkarni–Nomizu product of double forms, computed over nonzero entries."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch {a.n} vs {b.n}")
    n = a.n
    p, q = a.p + b.p, a.q + b.q
    if p > n or q > n:
        raise ValueError(f"bidegree ({p},{q}) exceeds n={n}")
    ia, ja = np.nonzero(a.coeffs)
    ib, jb = np.nonzero(b.coeffs)
    va, vb = a.coeffs[ia, ja], b.coeffs[ib, jb]
    ra, ca = basis_masks(n, a.p)[ia], basis_masks(n, a.q)[ja]
    rb, cb = basis_masks(n, b.p)[ib], basis_masks(n, b.q)[jb]
    rank = mask_rank(n)
    out = np.zeros(comb(n, p) * comb(n, q))
    ncols = comb(n, q)
    chunk = max(1, 2_000_000 // max(1, len(vb)))
    for lo in range(0, len(va), chunk):
        sl = slice(lo, lo + chunk)
        e, f = _pairs(ra[sl], ca[sl], rb, cb, n)
        e = e + lo
        sign = merge_sign(ra[e], rb[f], n) * merge_sign(ca[e], cb[f], n)
        flat = rank[ra[e] | rb[f]] * ncols + rank[ca[e] | cb[f]]
        out += np.bincount(flat, weights=sign * va[e] * vb[f], minlength=len(out))
    return DoubleForm(n, p, q, out.reshape(comb(n, p), comb(n, q)))


@lru_cache(maxsize=None)
def _metric_plan(n: int, j: int, r: int, s: int):
    """Sparse matrix of b -> (g^j/j!)·b from (r,s) forms to (r+j, s+j) forms."""
    m = basis_masks(n, j)
    rb, cb = basis_masks(n, r), basis_masks(n, s)
    okr = (m[:, None] & rb[None, :]) == 0
    okc = (m[:, None] & cb[None, :]) == 0
    rank = mask_rank(n)
    out_r = rank[m[:, None] | rb[None, :]]
    out_c = rank[m[:, None] | cb[None, :]]
    sg_r = merge_sign(m[:, None], rb[None, :], n)
    sg_c = merge_sign(m[:, None], cb[None, :], n)
    jm, ir, ic = np.nonzero(okr[:, :, None] & okc[:, None, :])
    ncol_out = comb(n, s + j)
    rows = out_r[jm, ir] * ncol_out + out_c[jm, ic]
    cols = ir * comb(n, s) + ic
    vals = (sg_r[jm, ir] * sg_c[jm, ic]).astype(float)
    shape = (comb(n, r + j) * ncol_out, comb(n, r) * comb(n, s))
    mat = sp.csr_matrix((vals, (rows, cols)), shape=shape)
    return mat, mat.T.tocsr()


def metric_product(j: int, b: DoubleForm) -> DoubleForm:
    """(g^j / j!) · b through a cached sparse plan; equals kn_product(metric_power(n, j), b)."""
    n = b.n
    if j < 0 or b.p + j > n or b.q + j > n:
        raise ValueError(f"g^{j}/{j}! · ({b.p},{b.q}) overflows dimension {n}")
    if j == 0:
        return b
    mat, _ = _metric_plan(n, j, b.p, b.q)
    res = mat @ b.coeffs.ravel()
    return DoubleForm(n, b.p + j, b.q + j, res.reshape(comb(n, b.p + j), comb(n, b.q + j)))


def contraction(a: DoubleForm) -> DoubleForm:
    """ctr, the adjoint of b -> g·b for the Frobenius inner product."""
    if a.p < 1 or a.q < 1:
        raise ValueError("contraction needs bidegree (p,q) with p, q >= 1")
    n = a.n
    _, mat_t = _metric_plan(n, 1, a.p - 1, a.q - 1)
    res = mat_t @ a.coeffs.ravel()
    return DoubleForm(n, a.p - 1, a.q - 1, res.reshape(comb(n, a.p - 1), comb(n, a.q - 1)))


def contract(a: DoubleForm, times: int) -> DoubleForm:
    for _ in range(times):
        a = contraction(a)
    return a


def as_operator(a: DoubleForm, tol: float = 1e-12) -> np.ndarray:
    """Symmetric matrix on Lambda^k represented by a symmetric (k,k) double form."""
    if a.p != a.q:
        raise ValueError(f"bidegree ({a.p},{a.q}) is not of type (k,k)")
    c = a.coeffs
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    if np.abs(c - c.T).max(initial=0.0) > tol * scale:
        raise ValueError("double form is not symmetric")
    return 0.5 * (c + c.T)


def project_primitive(t: DoubleForm) -> DoubleForm:
    """Orthogonal projection of a (p,q) form onto ker(ctr), i.e. its 'traceless' part."""
    if t.p < 1 or t.q < 1:
        return t
    mat, mat_t = _metric_plan(t.n, 1, t.p - 1, t.q - 1)
    normal = (mat_t @ mat).tocsc()
    x = spla.spsolve(normal, mat_t @ t.coeffs.ravel())
    res = t.coeffs.ravel() - mat @ x
    return DoubleForm(t.n, t.p, t.q, res.reshape(t.coeffs.shape))


@dataclass(frozen=True)
class NormIdentityResult:
    factor: int
    norm_sq: float
    product_norm_sq: float
    contraction_pairing: float
    residual: float
    pairing_residual: float


def norm_identity_check(t: DoubleForm, j: int, tol: float = 1e-10) -> NormIdentityResult:
    """Check |(g^j/j!)·T|^2 = (1/j!)<ctr^j (g^j/j!)·T, T> = C(n-2k, j)|T|^2 for ctr T = 0.

    ``t`` must be a symmetric (k,k) form annihilated by the contraction.
    """
    n, k = t.n, t.p
    if t.p != t.q:
        raise ValueError("norm identity needs a (k,k) double form")
    if j < 0 or n - 2 * k < j:
        raise ValueError(f"need 0 <= j <= n-2k, got j={j}, n={n}, k={k}")
    t_sq = t.norm() ** 2
    if t_sq == 0.0:
        raise ValueError("zero double form")
    if k >= 1 and contraction(t).norm() > tol * np.sqrt(t_sq):
        raise ValueError("double form is not traceless (ctr T != 0)")
    factor = comb(n - 2 * k, j)
    prod = metric_product(j, t)
    prod_sq = prod.norm() ** 2
    pairing = contract(prod, j).inner(t) / factorial(j)
    return NormIdentityResult(
        factor=factor,
        norm_sq=t_sq,
        product_norm_sq=prod_sq,
        contraction_pairing=pairing,
        residual=abs(prod_sq - factor * t_sq) / t_sq,
        pairing_residual=abs(pairing - factor * t_sq) / t_sq,
    )


def random_double_form(n, p, q, rng, symmetric=False) -> DoubleForm:
    c = rng.standard_normal((comb(n, p), comb(n, q)))
    if symmetric:
        if p != q:
            raise ValueError("symmetric double forms need p == q")
        c = 0.5 * (c + c.T)
    return DoubleForm(n, p, q, c)
