"""Algebraic curvature tensors of model spaces and their Ricci/Weyl decomposition.

Sign convention: a space of constant sectional curvature kappa has curvature
operator ``kappa * Id`` on Lambda^2, i.e. ``R[a,b,a,b] = kappa`` for a != b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .double_forms import DoubleForm, as_operator, contraction, metric_product
from .exterior import basis, check_dim

PAIR_TOL = 1e-12
BIANCHI_TOL = 1e-10


# --------------------------------------------------------------------------
# model spaces


@dataclass(frozen=True)
class Sphere:
    m: int
    kappa: float = 1.0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"sphere factor needs dimension >= 2, got {self.m}")
        if not self.kappa > 0:
            raise ValueError(f"sphere curvature must be positive, got {self.kappa}")

    @property
    def dim(self):
        return self.m

    def volume(self) -> float:
        m = self.m
        return self.kappa ** (-m / 2) * 2 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2)

    def scaled(self, lam):
        return Sphere(self.m, self.kappa / lam)

    def dsl(self):
        return f"S({self.m},{self.kappa:g})"


@dataclass(frozen=True)
class ComplexProjective:
    """CP^m (real dimension 2m) with holomorphic sectional curvature c."""

    m: int
    c: float = 4.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"CP^m needs m >= 1, got {self.m}")
        if not self.c > 0:
            raise ValueError(f"holomorphic sectional curvature must be positive, got {self.c}")

    @property
    def dim(self):
        return 2 * self.m

    def volume(self) -> float:
        return (4.0 / self.c) ** self.m * math.pi ** self.m / math.factorial(self.m)

    def scaled(self, lam):
        return ComplexProjective(self.m, self.c / lam)

    def dsl(self):
        return f"CP({self.m},{self.c:g})"


@dataclass(frozen=True)
class Circle:
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"circle length must be positive, got {self.T}")

    @property
    def dim(self):
        return 1

    def volume(self) -> float:
        return self.T

    def scaled(self, lam):
        return Circle(self.T * math.sqrt(lam))

    def dsl(self):
        return f"Circ({self.T:g})"


Factor = Sphere | ComplexProjective | Circle


@dataclass(frozen=True)
class ModelSpace:
    """Riemannian product of sphere, complex projective and circle factors."""

    factors: tuple

    def __post_init__(self):
        facs = tuple(self.factors)
        if not facs:
            raise ValueError("a model needs at least one factor")
        for f in facs:
            if not isinstance(f, (Sphere, ComplexProjective, Circle)):
                raise TypeError(f"unsupported factor {f!r}")
        object.__setattr__(self, "factors", facs)

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def volume(self) -> float:
        return math.prod(f.volume() for f in self.factors)

    def scaled(self, lam: float) -> "ModelSpace":
        """The same manifold with metric multiplied by ``lam``."""
        return ModelSpace(tuple(f.scaled(lam) for f in self.factors))

    def dsl(self) -> str:
        return "x".join(f.dsl() for f in self.factors)

    def __str__(self):
        return self.dsl()


@dataclass(frozen=True)
class CoshCylinder:
    """N x R with metric alpha cosh^2(t) (h + dt^2); N is a closed product model."""

    base: ModelSpace
    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not isinstance(self.base, ModelSpace):
            raise TypeError("cosh cylinder base must be a closed product model")

    @property
    def dim(self) -> int:
        return self.base.dim + 1

    def volume(self):
        raise ValueError("cosh cylinder has infinite volume")

    def dsl(self) -> str:
        return f"CoshCyl({self.base.dsl()},alpha={self.alpha:g})"

    def __str__(self):
        return self.dsl()


def product(*factors) -> ModelSpace:
    return ModelSpace(tuple(factors))


def volume_of(model) -> float:
    if isinstance(model, CoshCylinder):
        raise ValueError("cosh cylinder has infinite volume")
    return model.volume()


# --------------------------------------------------------------------------
# tensors <-> (2,2) double forms


@lru_cache(maxsize=None)
def _pair_index(n):
    pairs = np.array(basis(n, 2), dtype=np.int64).reshape(-1, 2)
    return pairs[:, 0], pairs[:, 1]


def tensor_to_form(r: np.ndarray) -> DoubleForm:
    n = r.shape[0]
    i, j = _pair_index(n)
    return DoubleForm(n, 2, 2, r[i[:, None], j[:, None], i[None, :], j[None, :]])


def form_to_tensor(f: DoubleForm) -> np.ndarray:
    n = f.n
    i, j = _pair_index(n)
    c = f.coeffs
    r = np.zeros((n, n, n, n))
    ii, jj = i[:, None], j[:, None]
    kk, ll = i[None, :], j[None, :]
    r[ii, jj, kk, ll] = c
    r[jj, ii, kk, ll] = -c
    r[ii, jj, ll, kk] = -c
    r[jj, ii, ll, kk] = c
    return r


def bianchi_sum(r: np.ndarray) -> np.ndarray:
    """R_abcd + R_acdb + R_adbc."""
    return r + np.einsum("acdb->abcd", r) + np.einsum("adbc->abcd", r)


def project_curvature(x: np.ndarray) -> np.ndarray:
    """Orthogonal projection of an arbitrary 4-tensor onto algebraic curvature tensors."""
    r = 0.5 * (x - np.einsum("bacd->abcd", x))
    r = 0.5 * (r - np.einsum("abdc->abcd", r))
    r = 0.5 * (r + np.einsum("cdab->abcd", r))
    return r - bianchi_sum(r) / 3.0


@dataclass(frozen=True, eq=False)
class AlgCurvature:
    """Algebraic curvature tensor stored as a symmetric (2,2) double form."""

    form: DoubleForm
    checked: bool = field(default=True, repr=False)

    def __post_init__(self):
        f = self.form
        if (f.p, f.q) != (2, 2):
            raise ValueError("curvature must be a (2,2) double form")
        if self.checked:
            scale = max(1.0, float(np.abs(f.coeffs).max(initial=0.0)))
            asym = float(np.abs(f.coeffs - f.coeffs.T).max(initial=0.0))
            if asym > PAIR_TOL * scale:
                raise ValueError(f"pair symmetry violated ({asym:.3e})")
            res = self.bianchi_residual()
            if res > BIANCHI_TOL:
                raise ValueError(f"first Bianchi identity violated (relative residual {res:.3e})")

    @property
    def n(self) -> int:
        return self.form.n

    @property
    def operator(self) -> np.ndarray:
        return as_operator(self.form)

    def tensor(self) -> np.ndarray:
        return form_to_tensor(self.form)

    def bianchi_residual(self) -> float:
        if self.n < 3:
            return 0.0
        r = form_to_tensor(self.form)
        scale = max(1.0, float(np.abs(r).max(initial=0.0)))
        return float(np.abs(bianchi_sum(r)).max(initial=0.0)) / scale

    def rotated(self, q: np.ndarray) -> "AlgCurvature":
        """Same tensor expressed in the orthonormal frame e'_a = q[b,a] e_b."""
        r = np.einsum("abcd,ai,bj,ck,dl->ijkl", self.tensor(), q, q, q, q, optimize=True)
        return AlgCurvature(tensor_to_form(r))

    @classmethod
    def from_tensor(cls, r):
        return cls(tensor_to_form(np.asarray(r, dtype=float)))

    def __add__(self, other):
        return AlgCurvature(self.form + other.form)

    def __mul__(self, s):
        return AlgCurvature(s * self.form)

    __rmul__ = __mul__


def random_curvature(n: int, rng: np.random.Generator) -> AlgCurvature:
    x = rng.standard_normal((n, n, n, n))
    return AlgCurvature.from_tensor(project_curvature(x))


def constant_curvature(n: int, kappa: float = 1.0) -> AlgCurvature:
    """kappa * g^2 / 2."""
    return AlgCurvature(DoubleForm(n, 2, 2, kappa * np.eye(comb(n, 2))))


def subspace_curvature(n: int, dims: list[int], kappas: list[float]) -> AlgCurvature:
    """Sum of kappa_i * g_{V_i}^2 / 2 over consecutive coordinate blocks V_i."""
    r = np.zeros((n, n, n, n))
    off = 0
    for d, kap in zip(dims, kappas):
        _sphere_block(r, off, d, kap)
        off += d
    if off > n:
        raise ValueError("blocks exceed dimension")
    return AlgCurvature.from_tensor(r)


def _sphere_block(r, off, d, kappa):
    e = np.eye(d)
    blk = kappa * (np.einsum("ac,bd->abcd", e, e) - np.einsum("ad,bc->abcd", e, e))
    s = slice(off, off + d)
    r[s, s, s, s] += blk


def kahler_form(m: int) -> np.ndarray:
    """omega[a,b] = g(J e_a, e_b) for J e_{2i-1} = e_{2i}."""
    w = np.zeros((2 * m, 2 * m))
    for i in range(m):
        w[2 * i, 2 * i + 1] = 1.0
        w[2 * i + 1, 2 * i] = -1.0
    return w


def _cp_block(r, off, m, c):
    d = 2 * m
    e = np.eye(d)
    w = kahler_form(m)
    blk = (np.einsum("ac,bd->abcd", e, e) - np.einsum("ad,bc->abcd", e, e)
           + np.einsum("ac,bd->abcd", w, w) - np.einsum("ad,bc->abcd", w, w)
           + 2.0 * np.einsum("ab,cd->abcd", w, w))
    s = slice(off, off + d)
    r[s, s, s, s] += 0.25 * c * blk


def curvature_tensor(model: ModelSpace) -> np.ndarray:
    n = model.dim
    check_dim(n)
    r = np.zeros((n, n, n, n))
    off = 0
    for f in model.factors:
        if isinstance(f, Sphere):
            _sphere_block(r, off, f.m, f.kappa)
        elif isinstance(f, ComplexProjective):
            _cp_block(r, off, f.m, f.c)
        off += f.dim
    return r


def curvature_of_model(model, t: float | None = None) -> AlgCurvature:
    """Curvature at a point; cosh cylinders need the parameter ``t``."""
    if isinstance(model, CoshCylinder):
        if t is None:
            raise ValueError("cosh cylinder curvature needs a parameter value t")
        return AlgCurvature.from_tensor(_cosh_cylinder_tensor(model.base, model.alpha, t))
    if not isinstance(model, ModelSpace):
        raise TypeError(f"unsupported model {model!r}")
    return AlgCurvature.from_tensor(curvature_tensor(model))


# --------------------------------------------------------------------------
# Ricci decomposition


@dataclass(frozen=True, eq=False)
class RicciDecomposition:
    n: int
    R: float
    ricci: np.ndarray
    ric0: np.ndarray
    weyl: DoubleForm

    @property
    def weyl_norm_sq(self) -> float:
        return float(np.sum(self.weyl.coeffs ** 2))

    @property
    def ric0_norm_sq(self) -> float:
        return float(np.sum(self.ric0 ** 2))

    def is_einstein(self, tol=1e-10) -> bool:
        scale = max(1.0, abs(self.R))
        return bool(np.abs(self.ric0).max() <= tol * scale)

    def reassemble(self) -> DoubleForm:
        n = self.n
        out = self.weyl + DoubleForm(n, 2, 2, self.R / (n * (n - 1)) * np.eye(comb(n, 2)))
        if n > 2:
            out = out + metric_product(1, DoubleForm(n, 1, 1, self.ric0)) / (n - 2)
        return out


def ricci_of(rm: AlgCurvature) -> np.ndarray:
    ric = contraction(rm.form).coeffs
    return 0.5 * (ric + ric.T)


def ricci_decompose(rm: AlgCurvature) -> RicciDecomposition:
    res = rm.bianchi_residual()
    if res > BIANCHI_TOL:
        raise ValueError(f"first Bianchi identity violated (relative residual {res:.3e})")
    n = rm.n
    ric = ricci_of(rm)
    scal = float(np.trace(ric))
    ric0 = ric - scal / n * np.eye(n)
    if n <= 2:
        weyl = DoubleForm.zero(n, 2, 2)
    else:
        weyl = (rm.form
                - metric_product(1, DoubleForm(n, 1, 1, ric0)) / (n - 2)
                - DoubleForm(n, 2, 2, scal / (n * (n - 1)) * np.eye(comb(n, 2))))
        weyl = DoubleForm(n, 2, 2, 0.5 * (weyl.coeffs + weyl.coeffs.T))
    return RicciDecomposition(n=n, R=scal, ricci=ric, ric0=ric0, weyl=weyl)


def rho_of(rm: AlgCurvature) -> float:
    """Minus the lowest eigenvalue of the traceless curvature operator on Lambda^2."""
    n = rm.n
    op = rm.operator
    scal = float(np.trace(ricci_of(rm)))
    lam = np.linalg.eigvalsh(op - scal / (n * (n - 1)) * np.eye(op.shape[0]))
    return float(-lam[0])


# --------------------------------------------------------------------------
# cosh cylinders


def normalize_base(base: ModelSpace) -> tuple[ModelSpace, float]:
    """Rescale ``base`` (dim n-1) so that its scalar curvature is (n-2)(n-1).

    Returns the rescaled model and the metric factor used.
    """
    m = base.dim
    if m < 2:
        raise ValueError("cylinder base needs dimension >= 2")
    scal = ricci_decompose(curvature_of_model(base)).R
    if not scal > 0:
        raise ValueError("base has non-positive scalar curvature; cannot normalize")
    lam = scal / ((m - 1) * m)
    return base.scaled(lam), lam


def _cosh_cylinder_tensor(base: ModelSpace, alpha: float, t: float) -> np.ndarray:
    nb, _ = normalize_base(base)
    m = nb.dim
    n = m + 1
    rh = curvature_tensor(nb)
    e = np.eye(m)
    gg = np.einsum("ac,bd->abcd", e, e) - np.einsum("ad,bc->abcd", e, e)
    ch = math.cosh(t)
    th = math.tanh(t)
    r = np.zeros((n, n, n, n))
    r[:m, :m, :m, :m] = (rh - th ** 2 * gg) / (alpha * ch ** 2)
    v = -1.0 / (alpha * ch ** 4)
    idx = np.arange(m)
    r[idx, m, idx, m] = v
    r[m, idx, m, idx] = v
    r[idx, m, m, idx] = -v
    r[m, idx, idx, m] = -v
    return r


@dataclass(frozen=True, eq=False)
class CoshCylinderCurvature:
    n: int
    t: float
    alpha: float
    base_scale: float
    R: float
    ric0: np.ndarray
    r1: float
    r1_base: float
    R_closed_form: float
    r1_closed_form: float


def cosh_cylinder_curvature(base: ModelSpace, alpha: float, t: float) -> CoshCylinderCurvature:
    """Scalar curvature, traceless Ricci (frame: base directions, then d/dt) and r_1.

    ``r1_closed_form`` is (r_1(h) + 2(n-2)(n-1)/n) / (alpha cosh^4 t); it agrees with
    the eigenvalue ``r1`` for Einstein bases only, since the Ric°_h block scales
    like cosh^-2 t.
    """
    nb, lam = normalize_base(base)
    n = nb.dim + 1
    dec_h = ricci_decompose(curvature_of_model(nb))
    r1_h = float(-np.linalg.eigvalsh(dec_h.ric0)[0])
    dec = ricci_decompose(curvature_of_model(CoshCylinder(base, alpha), t=t))
    r1 = float(-np.linalg.eigvalsh(dec.ric0)[0])
    c4 = alpha * math.cosh(t) ** 4
    return CoshCylinderCurvature(
        n=n, t=t, alpha=alpha, base_scale=lam, R=dec.R, ric0=dec.ric0, r1=r1, r1_base=r1_h,
        R_closed_form=(n - 1) * (n - 4) / c4,
        r1_closed_form=(r1_h + 2 * (n - 2) * (n - 1) / n) / c4,
    )
