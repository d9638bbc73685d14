"""Bochner–Weitzenböck curvature R_k on k-forms and the pinching lemmas around it."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .curvature import AlgCurvature, RicciDecomposition, constant_curvature, rho_of, \
    ricci_decompose, subspace_curvature
from .double_forms import DoubleForm, metric_product
from .exterior import hodge_matrix, self_dual_split

TRACE_TOL = 1e-10
CLUSTER_TOL = 1e-7
EQUALITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class BWOperator:
    n: int
    k: int
    matrix: np.ndarray
    R: float
    ric0_norm_sq: float
    weyl_norm_sq: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def traceless(self) -> np.ndarray:
        return self.matrix - np.trace(self.matrix) / self.dim * np.eye(self.dim)


def trace_formula(n: int, k: int, R: float) -> float:
    return comb(n, k) * k * (n - k) / (n * (n - 1)) * R


def build_bw(dec: RicciDecomposition, k: int) -> BWOperator:
    """R_k = -2 (g^{k-2}/(k-2)!)·W + ((n-2k)/(n-2)) (g^{k-1}/(k-1)!)·Ric° + k(n-k)/(n(n-1)) R Id."""
    n = dec.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"degree k={k} outside [1, {n - 1}]")
    if k == 1:
        mat = dec.ricci.copy()
    else:
        mat = (-2.0 * metric_product(k - 2, dec.weyl).coeffs
               + (n - 2 * k) / (n - 2) * metric_product(k - 1, DoubleForm(n, 1, 1, dec.ric0)).coeffs)
        mat += k * (n - k) / (n * (n - 1)) * dec.R * np.eye(comb(n, k))
    mat = 0.5 * (mat + mat.T)
    expected = trace_formula(n, k, dec.R)
    scale = max(1.0, abs(expected), float(np.abs(mat).max()))
    if abs(np.trace(mat) - expected) > TRACE_TOL * scale * comb(n, k):
        raise ArithmeticError(f"trace of R_{k} off: {np.trace(mat)} vs {expected}")
    return BWOperator(n, k, mat, dec.R, dec.ric0_norm_sq, dec.weyl_norm_sq)


def bw_of_curvature(rm: AlgCurvature, k: int) -> BWOperator:
    return build_bw(ricci_decompose(rm), k)


def cluster(values, tol=CLUSTER_TOL) -> list[tuple[float, int]]:
    """Group sorted eigenvalues whose gaps are below ``tol`` times the spectral radius."""
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        return []
    radius = float(np.abs(vals).max())
    eps = tol * (radius if radius > 0 else 1.0)
    out, start = [], 0
    for i in range(1, vals.size + 1):
        if i == vals.size or vals[i] - vals[i - 1] > eps:
            out.append((float(vals[start:i].mean()), i - start))
            start = i
    return out


@dataclass(frozen=True)
class RkSpectrum:
    r_k: float
    eigenvalues: list
    traceless_eigenvalues: list


def r_k_of(op: BWOperator) -> RkSpectrum:
    lam = np.linalg.eigvalsh(op.matrix)
    shifted = lam - lam.mean()
    return RkSpectrum(r_k=float(-shifted[0]), eigenvalues=cluster(lam),
                      traceless_eigenvalues=cluster(shifted))


# --------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class PinchConstants:
    n: int
    k: int
    a: Fraction
    b: Fraction
    a_mid: Fraction | None
    theorem_constant: Fraction
    excluded: bool

    def as_floats(self) -> dict:
        return {"a": float(self.a), "b": float(self.b),
                "a_mid": None if self.a_mid is None else float(self.a_mid),
                "theorem_constant": float(self.theorem_constant)}


def theorem_constant(n: int, k: int) -> Fraction:
    return Fraction(k * (n - k), n * (n - 1))


def pinch_constants(n: int, k: int) -> PinchConstants:
    """Exact a_{n,k}, b_{n,k} and, for k = n/2, the refined middle-degree constant.

    ``excluded`` marks k = (n-1)/2, which the norm pinching statement leaves out.
    """
    if n < 4:
        raise ValueError(f"pinching constants need n >= 4, got {n}")
    if not 1 <= k <= n / 2:
        raise ValueError(f"need 1 <= k <= n/2, got k={k}, n={n}")
    base = (comb(n, k) - 1) * theorem_constant(n, k)
    a = base * Fraction(4 * (k - 1) * (n - k - 1), (n - 2) * (n - 3))
    b = base * Fraction((n - 2 * k) ** 2, (n - 2) ** 2)
    a_mid = None
    if 2 * k == n:
        lead = 4 if (n // 2) % 2 == 0 else 8
        a_mid = Fraction(n * (n - 2), lead * (n - 1) * (n - 3)) * (comb(n, n // 2) - 2)
    return PinchConstants(n, k, a, b, a_mid, theorem_constant(n, k), excluded=(2 * k == n - 1))


@dataclass(frozen=True)
class ChainLink:
    label: str
    derived_sq: Fraction
    target_sq: Fraction

    @property
    def exact(self) -> bool:
        return self.derived_sq == self.target_sq


def constant_chain() -> list[ChainLink]:
    """Theorem constants rebuilt from a_{n,k}, b_{n,k}; squares compared exactly."""
    links = []
    for n in range(5, 13):
        pc = pinch_constants(n, 1)
        links.append(ChainLink(f"traceless Ricci norm, n={n}",
                               pc.theorem_constant ** 2 / pc.b, Fraction(1, n * (n - 1))))
    pc = pinch_constants(4, 1)
    links.append(ChainLink("traceless Ricci L2, n=4 (Y^2 coefficient)",
                           pc.theorem_constant ** 2 / pc.b, Fraction(1, 12)))
    pc = pinch_constants(4, 2)
    links.append(ChainLink("Weyl L2, n=4 (Y^2 coefficient)",
                           pc.theorem_constant ** 2 / pc.a_mid, Fraction(1, 24)))
    # r_2^+ = 2 w^+ and r_2^+ <= c Y
    links.append(ChainLink("w+ L2, n=4", (pc.theorem_constant / 2) ** 2, Fraction(1, 36)))
    pc = pinch_constants(6, 3)
    links.append(ChainLink("Weyl L3, n=6", pc.theorem_constant ** 2 / pc.a_mid, Fraction(1, 40)))
    return links


# --------------------------------------------------------------------------
# lemmas


@dataclass(frozen=True)
class EigenEndoReport:
    d: int
    trials: int
    violations: int
    max_ratio: float
    equality_slack: float


def lemma_eigenendo_check(d: int, trials: int, rng: np.random.Generator, nu: float = 1.0,
                          tol: float = 1e-9) -> EigenEndoReport:
    """a^2 <= ((d-1)/d)|A|^2 for traceless symmetric A with lowest eigenvalue a."""
    if d < 2:
        raise ValueError("need d >= 2")
    x = rng.standard_normal((trials, d, d))
    a_mat = 0.5 * (x + x.transpose(0, 2, 1))
    a_mat -= np.trace(a_mat, axis1=1, axis2=2)[:, None, None] / d * np.eye(d)
    low = np.linalg.eigvalsh(a_mat)[:, 0]
    bound = (d - 1) / d * np.sum(a_mat ** 2, axis=(1, 2))
    violations = int(np.sum(low ** 2 > bound + tol * np.maximum(bound, 1.0)))
    eq = np.diag([-nu] + [nu / (d - 1)] * (d - 1))
    a0 = np.linalg.eigvalsh(eq)[0]
    eq_bound = (d - 1) / d * np.sum(eq ** 2)
    return EigenEndoReport(d, trials, violations, float(np.max(low ** 2 / bound)),
                           float(abs(eq_bound - a0 ** 2) / eq_bound))


@dataclass(frozen=True)
class LemmaRkResult:
    n: int
    k: int
    lhs: float
    rhs: float
    slack: float
    equality: bool
    middle: bool


def lemma_rk_check(dec: RicciDecomposition, k: int, tol: float = EQUALITY_TOL) -> LemmaRkResult:
    """r_k^2 against a_{n,k}|W|^2 + b_{n,k}|Ric°|^2 (a_{n,n/2}|W|^2 in the middle degree)."""
    n = dec.n
    middle = 2 * k == n
    if not (1 <= k <= (n - 1) / 2 or middle):
        raise ValueError(f"k={k} outside [1, (n-1)/2] and not n/2 for n={n}")
    pc = pinch_constants(n, k)
    r_k = r_k_of(build_bw(dec, k)).r_k
    if middle:
        rhs = float(pc.a_mid) * dec.weyl_norm_sq
    else:
        rhs = float(pc.a) * dec.weyl_norm_sq + float(pc.b) * dec.ric0_norm_sq
    lhs = r_k ** 2
    scale = max(lhs, rhs)
    equality = scale == 0 or abs(rhs - lhs) <= tol * scale
    return LemmaRkResult(n, k, lhs, rhs, rhs - lhs, bool(equality), middle)


def gallot_meyer_check(rm: AlgCurvature, k: int) -> tuple[float, float]:
    """(r_k, k(n-k) rho); the first never exceeds the second."""
    n = rm.n
    r_k = r_k_of(bw_of_curvature(rm, k)).r_k
    return r_k, k * (n - k) * rho_of(rm)


# --------------------------------------------------------------------------
# product equality models


def split_curvature(alpha, beta, gamma, n, k) -> AlgCurvature:
    """alpha g_V^2/2 + beta g_{V^perp}^2/2 + gamma g^2/2 with V the first k coordinates."""
    rm = subspace_curvature(n, [k, n - k], [alpha, beta])
    return rm + constant_curvature(n, gamma)


def predicted_product_spectrum(alpha, beta, gamma, n, k) -> list[tuple[float, int]]:
    out = []
    for j in range(min(k, n - k) + 1):
        out.append((alpha * j * (k - j) + beta * j * (n - k - j) + gamma * k * (n - k),
                    comb(k, j) * comb(n - k, j)))
    return out


@dataclass(frozen=True)
class EqualitySpectrumReport:
    n: int
    k: int
    max_error: float
    matches: bool
    distinct: list
    two_point: bool
    lowest_simple: bool
    discrepancy: str = ""


def equality_spectrum_check(alpha, beta, gamma, n, k, tol=1e-10) -> EqualitySpectrumReport:
    op = bw_of_curvature(split_curvature(alpha, beta, gamma, n, k), k)
    lam = np.linalg.eigvalsh(op.matrix)
    pred = np.sort(np.concatenate([[v] * m for v, m in predicted_product_spectrum(
        alpha, beta, gamma, n, k)]))
    scale = max(1.0, float(np.abs(lam).max()))
    err = float(np.abs(lam - pred).max()) / scale
    distinct = r_k_of(op).eigenvalues
    ok = err <= tol
    msg = "" if ok else (f"numerical spectrum {np.round(lam, 12).tolist()} differs from "
                         f"predicted {np.round(pred, 12).tolist()}")
    return EqualitySpectrumReport(n, k, err, ok, distinct, len(distinct) == 2,
                                  distinct[0][1] == 1, msg)


def two_point_directions(n: int, k: int) -> np.ndarray | None:
    """Directions (alpha, beta) making the product spectrum two-valued with simple lowest.

    The j = 0 eigenvalue is the only simple one, so all j >= 1 values must agree
    and sit strictly above it; this is a linear condition on (alpha, beta).
    """
    if k < 2 or 2 * k > n - 1:
        raise ValueError("need 2 <= k <= (n-1)/2")
    f = [np.array([j * (k - j), j * (n - k - j)], dtype=float) for j in range(1, k + 1)]
    rows = np.array([fj - f[0] for fj in f[1:]])
    _, s, vt = np.linalg.svd(rows)
    rank = int(np.sum(s > 1e-12 * max(1.0, s.max(initial=0.0))))
    null = vt[rank:]
    if null.shape[0] != 1:
        return None
    v = null[0]
    if f[0] @ v < 0:
        v = -v
    if f[0] @ v <= 1e-12:
        return None
    return v / v[1] if abs(v[1]) > 1e-14 else v


# --------------------------------------------------------------------------
# middle degree


@dataclass(frozen=True)
class MiddleSplit:
    n: int
    r_half: float
    even_multiplicities: bool | None
    spectrum_plus: list = field(default_factory=list)
    spectrum_minus: list = field(default_factory=list)
    r_plus: float | None = None
    r_minus: float | None = None
    w_plus: float | None = None
    weyl_minus_norm: float | None = None
    hodge_commutator: float = 0.0


def middle_degree_split(op: BWOperator, weyl: DoubleForm | None = None) -> MiddleSplit:
    n, k = op.n, op.k
    if n % 2 or 2 * k != n:
        raise ValueError("middle-degree splitting needs n even and k = n/2")
    t = op.traceless()
    star = hodge_matrix(n, k)
    comm = float(np.abs(star @ t - t @ star).max())
    r_half = float(-np.linalg.eigvalsh(t)[0])
    if (n // 2) % 2:
        spec = cluster(np.linalg.eigvalsh(t))
        return MiddleSplit(n, r_half, all(m % 2 == 0 for _, m in spec),
                           hodge_commutator=comm)
    bp, bm = self_dual_split(n)
    tp, tm = bp.T @ t @ bp, bm.T @ t @ bm
    lp, lm = np.linalg.eigvalsh(tp), np.linalg.eigvalsh(tm)
    w_plus = w_minus = None
    if n == 4 and weyl is not None:
        w = 0.5 * (weyl.coeffs + weyl.coeffs.T)
        w_plus = float(np.linalg.eigvalsh(bp.T @ w @ bp)[-1])
        w_minus = float(np.linalg.norm(bm.T @ w @ bm))
    return MiddleSplit(n, r_half, None, cluster(lp), cluster(lm), float(-lp[0]), float(-lm[0]),
                       w_plus, w_minus, comm)
