"""Warped cylinders eta(t)^2 h + dt^2 over an Einstein base, their radial harmonic
functions, and finite-difference checks of the degree-one Kato and Bochner inequalities.

The Laplacian has positive spectrum: Delta u = -eta^{1-n} (eta^{n-1} u')' for radial u.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate


@dataclass(frozen=True, eq=False)
class WarpedCylinder:
    """Metric eta(t)^2 h + dt^2 with Ric_h = (n-2) kappa h on the (n-1)-dimensional base."""

    n: int
    t: np.ndarray
    eta: np.ndarray
    deta: np.ndarray
    d2eta: np.ndarray
    kappa: float = 1.0
    label: str = ""
    closed: tuple | None = None

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("warped cylinder needs n >= 3")
        t = np.asarray(self.t, dtype=float)
        h = np.diff(t)
        if t.ndim != 1 or t.size < 5 or not np.allclose(h, h[0], rtol=1e-9, atol=0) or h[0] <= 0:
            raise ValueError("grid must be uniform, increasing, with at least 5 points")
        for name in ("eta", "deta", "d2eta"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != t.shape:
                raise ValueError(f"{name} must be sampled on the grid")
            object.__setattr__(self, name, arr)
        if np.any(self.eta <= 0):
            raise ValueError("warp function must be positive")
        object.__setattr__(self, "t", t)

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])

    def ricci(self):
        """(radial, fiber) Ricci eigenvalues; fiber has multiplicity n-1."""
        n, e, de, dde = self.n, self.eta, self.deta, self.d2eta
        radial = -(n - 1) * dde / e
        fiber = ((n - 2) * (self.kappa - de ** 2) - e * dde) / e ** 2
        return radial, fiber

    def scalar(self) -> np.ndarray:
        radial, fiber = self.ricci()
        return radial + (self.n - 1) * fiber

    def r1(self) -> np.ndarray:
        radial, fiber = self.ricci()
        scal = radial + (self.n - 1) * fiber
        return -np.minimum(radial, fiber) + scal / self.n


def _grid(lo, hi, points):
    return np.linspace(lo, hi, points)


def from_closed_form(n, eta, deta, d2eta, lo, hi, points, kappa=1.0, label=""):
    t = _grid(lo, hi, points)
    return WarpedCylinder(n, t, eta(t), deta(t), d2eta(t), kappa, label, (eta, deta, d2eta))


def constant_warp(n, c=1.0, lo=-5.0, hi=5.0, points=10_000, kappa=1.0):
    def zero(t):
        return np.zeros_like(np.asarray(t, dtype=float))

    return from_closed_form(n, lambda t: zero(t) + c, zero, zero, lo, hi, points, kappa,
                            f"const({c:g})")


def sine_warp(n, lo=-2 * np.pi, hi=2 * np.pi, points=10_000, kappa=1.0):
    return from_closed_form(n, lambda t: 2 + np.sin(t), np.cos, lambda t: -np.sin(t),
                            lo, hi, points, kappa, "2+sin t")


def cosh_warp(n, lo=-3.0, hi=3.0, points=10_000, kappa=1.0):
    return from_closed_form(n, np.cosh, np.sinh, np.cosh, lo, hi, points, kappa, "cosh t")


def cosh_cylinder_warp(n, alpha=1.0, lo=-4.0, hi=4.0, points=10_000):
    """alpha cosh^2(s)(h + ds^2) in arc length t = sqrt(alpha) sinh s: eta = sqrt(alpha + t^2).

    The base is normalized to Ric_h = (n-2) h.
    """
    return from_closed_form(n, lambda t: np.sqrt(alpha + t ** 2),
                            lambda t: t / np.sqrt(alpha + t ** 2),
                            lambda t: alpha / (alpha + t ** 2) ** 1.5,
                            lo, hi, points, 1.0, f"cosh cylinder alpha={alpha:g}")


@dataclass(frozen=True)
class HarmonicRadialForm:
    """Phi(t) = c1 + c2 int_0^t eta^{1-n}; xi = d Phi."""

    c1: float
    c2: float

    def derivative(self, w: WarpedCylinder) -> np.ndarray:
        return self.c2 * w.eta ** (1 - w.n)

    def norm(self, w: WarpedCylinder) -> np.ndarray:
        return np.abs(self.derivative(w))

    def values(self, w: WarpedCylinder) -> np.ndarray:
        """Phi on the grid (cumulative Simpson from the grid point nearest 0)."""
        d = self.derivative(w)
        i0 = int(np.argmin(np.abs(w.t)))
        cum = integrate.cumulative_simpson(d, x=w.t, initial=0.0)
        return self.c1 + cum - cum[i0]

    def harmonicity_residual(self, w: WarpedCylinder) -> float:
        return float(np.abs(w.eta ** (w.n - 1) * self.derivative(w) - self.c2).max()
                     / max(abs(self.c2), 1e-300))


@dataclass(frozen=True, eq=False)
class HessianData:
    a: np.ndarray
    eigenvalues: np.ndarray
    trace: np.ndarray


def hessian_structure(w: WarpedCylinder, f: HarmonicRadialForm, t=None) -> HessianData:
    """Hessian of Phi: a on the n-1 fiber directions and -(n-1) a along d/dt.

    Without ``t`` the whole grid is used. A single ``t`` needs closed forms, or
    an interior grid node of a sampled warp.
    """
    n = w.n
    if t is None:
        e, de = w.eta, w.deta
    elif w.closed is not None:
        e, de = np.atleast_1d(w.closed[0](t)), np.atleast_1d(w.closed[1](t))
    else:
        idx = np.flatnonzero(np.isclose(w.t, t, rtol=0, atol=1e-12 * max(1.0, abs(t))))
        if idx.size == 0:
            raise ValueError(f"t={t} is not a grid node")
        if idx[0] in (0, w.t.size - 1):
            raise ValueError("eta' undefined at grid edge")
        e, de = w.eta[idx[:1]], w.deta[idx[:1]]
    a = f.c2 * de * e ** (-n)
    eig = np.concatenate([np.repeat(a[:, None], n - 1, axis=1), (-(n - 1) * a)[:, None]], axis=1)
    return HessianData(a, eig, eig.sum(axis=1))


@dataclass(frozen=True, eq=False)
class KatoReport:
    n: int
    defined: bool
    ratios: np.ndarray
    mask: np.ndarray
    max_error: float


def kato_ratio(w: WarpedCylinder, f: HarmonicRadialForm, crit_tol: float = 1e-12) -> KatoReport:
    """|d|xi||^2 / |nabla xi|^2 at non-critical points of eta; (n-1)/n is the equality value."""
    if f.c2 == 0:
        raise ValueError("need c2 != 0")
    n = w.n
    hess = hessian_structure(w, f)
    grad_xi_sq = np.sum(hess.eigenvalues ** 2, axis=1)
    # d/dt |c2| eta^{1-n}
    d_norm = abs(f.c2) * (1 - n) * w.eta ** (-n) * w.deta
    scale = np.max(np.abs(w.deta)) if w.deta.size else 0.0
    mask = np.abs(w.deta) > crit_tol * max(1.0, scale)
    if not mask.any():
        return KatoReport(n, False, np.array([]), mask, float("nan"))
    ratios = d_norm[mask] ** 2 / grad_xi_sq[mask]
    return KatoReport(n, True, ratios, mask, float(np.abs(ratios - (n - 1) / n).max()))


def _d1(h, u):
    return (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * h)


def _d2(h, u):
    return (-u[:-4] + 16 * u[1:-3] - 30 * u[2:-2] + 16 * u[3:-1] - u[4:]) / (12 * h * h)


def radial_laplacian(w: WarpedCylinder, u: np.ndarray) -> np.ndarray:
    """-(u'' + (n-1)(eta'/eta) u') on interior nodes, fourth-order differences."""
    h = w.h
    return -(_d2(h, u) + (w.n - 1) * (w.deta / w.eta)[2:-2] * _d1(h, u))


@dataclass(frozen=True, eq=False)
class BasineqReport:
    n: int
    eps: float
    max_violation: float
    min_slack: float
    lhs: np.ndarray
    rhs: np.ndarray
    exact_gap: np.ndarray
    fd_error: float


def basineq_verify(w: WarpedCylinder, eps: float, f: HarmonicRadialForm | None = None,
                   k: int = 1) -> BasineqReport:
    """LHS - RHS of the degree-one Bochner inequality for u = f_eps^p on a radial model.

    Delta u comes from finite differences. ``exact_gap`` is the same quantity with
    Delta u computed from the Bochner formula, and ``fd_error`` compares the two.
    """
    if k != 1:
        raise ValueError("only k = 1 is supported on radial models")
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = w.n
    f = f or HarmonicRadialForm(0.0, 1.0)
    xi = f.norm(w)
    fe = np.sqrt(xi ** 2 + eps ** 2)
    p = (n - 1 - k) / (n - k)
    u = fe ** p
    lap = radial_laplacian(w, u)
    core = (fe ** (p - 2) * xi ** 2)[2:-2]
    scal, r1 = w.scalar()[2:-2], w.r1()[2:-2]
    lhs = lap + k * (n - 1 - k) / (n * (n - 1)) * scal * core
    rhs = p * r1 * core
    gap = lhs - rhs
    exact = _exact_gap(w, f, eps, p)[2:-2]
    scale = max(1.0, float(np.abs(rhs).max()))
    return BasineqReport(n, eps, float(gap.max()), float(gap.min()), lhs, rhs, exact,
                         float(np.abs(gap - exact).max() / scale))


def _exact_gap(w: WarpedCylinder, f: HarmonicRadialForm, eps: float, p: float) -> np.ndarray:
    """Closed form of LHS - RHS using Delta of f_eps^p and the curvature of the model.

    For a radial harmonic xi the Bochner formula gives
    Delta |xi|^2/2 = -|nabla xi|^2 - Ric(xi, xi), so everything is explicit.
    """
    n = w.n
    xi = f.norm(w)
    d_xi = abs(f.c2) * (1 - n) * w.eta ** (-n) * w.deta
    a = f.c2 * w.deta * w.eta ** (-n)
    nabla_sq = n * (n - 1) * a ** 2
    radial, _ = w.ricci()
    ric_xi = radial * xi ** 2
    lap_half_sq = -nabla_sq - ric_xi
    fe2 = xi ** 2 + eps ** 2
    # Delta f^p with f^2 = xi^2 + eps^2 and |d f|^2 = xi^2 |d|xi||^2 / f^2
    lap_f2 = 2 * lap_half_sq
    lap_fp = (p / 2) * fe2 ** (p / 2 - 1) * lap_f2 \
        - (p / 2) * (p / 2 - 1) * fe2 ** (p / 2 - 2) * (2 * xi * d_xi) ** 2
    core = fe2 ** (p / 2 - 1) * xi ** 2
    scal, r1 = w.scalar(), w.r1()
    return lap_fp + (n - 2) / (n * (n - 1)) * scal * core - p * r1 * core


def flat_laplacian_audit(points: int = 2001) -> tuple[float, float]:
    """Delta of a constant and of t^2 on the flat cylinder (expected 0 and -2)."""
    w = constant_warp(4, points=points, lo=-1.0, hi=1.0)
    c = radial_laplacian(w, np.ones_like(w.t))
    q = radial_laplacian(w, w.t ** 2)
    return float(np.abs(c).max()), float(np.mean(q))


def slack_identity_residual(w: WarpedCylinder, eps: float) -> float:
    """Compare the closed-form gap with -p(2-p) f^{p-2} |d|xi||^2 eps^2/f^2 on equality models."""
    n = w.n
    f = HarmonicRadialForm(0.0, 1.0)
    p = (n - 2) / (n - 1)
    xi = f.norm(w)
    d_xi = (1 - n) * w.eta ** (-n) * w.deta
    fe2 = xi ** 2 + eps ** 2
    formula = -p * (2 - p) * fe2 ** (p / 2 - 1) * d_xi ** 2 * eps ** 2 / fe2
    exact = _exact_gap(w, f, eps, p)
    return float(np.abs(formula - exact).max() / max(1e-300, np.abs(exact).max()))

