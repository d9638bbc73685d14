"""Yamabe invariants of model spaces and one-dimensional Yamabe checks.

Closed forms are only used behind a certificate (Einstein, small constant
scalar curvature product, cylinder over an Einstein base). Anything obtained
by evaluating the functional on test functions is an upper bound and is
labelled as such.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import roots_jacobi

from .curvature import Circle, CoshCylinder, ModelSpace, Sphere, curvature_of_model, \
    normalize_base, ricci_decompose

EINSTEIN_TOL = 1e-10
GOLDEN = (math.sqrt(5) - 1) / 2

EINSTEIN = "einstein_closed_form"
CSC = "csc_minimizer_closed_form"
CYLINDER = "cylinder_closed_form"
UPPER = "test_function_upper_bound"


class YamabeUnavailable(ValueError):
    pass


@dataclass(frozen=True)
class YamabeValue:
    value: float
    provenance: str
    model: str
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    s: np.ndarray
    values: np.ndarray
    decay: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if s.ndim != 1 or s.shape != v.shape:
            raise ValueError("profile grid and samples must be 1-D of equal length")
        if np.any(np.diff(s) <= 0):
            raise ValueError("profile grid must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile samples must be finite")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "values", v)


def sphere_volume(m: int) -> float:
    return Sphere(m, 1.0).volume()


def y_sphere(n: int) -> float:
    return n * (n - 1) * sphere_volume(n) ** (2 / n)


def _einstein_data(model: ModelSpace):
    dec = ricci_decompose(curvature_of_model(model))
    scale = max(1.0, abs(dec.R))
    return dec, float(np.abs(dec.ric0).max()) <= EINSTEIN_TOL * scale


def yamabe_einstein(model: ModelSpace) -> YamabeValue:
    if not isinstance(model, ModelSpace):
        raise TypeError("Einstein closed form needs a closed product model")
    dec, ok = _einstein_data(model)
    if not ok:
        raise YamabeUnavailable(f"{model.dsl()} is not Einstein")
    if not dec.R > 0:
        raise YamabeUnavailable(f"{model.dsl()} has non-positive scalar curvature")
    n = model.dim
    return YamabeValue(dec.R * model.volume() ** (2 / n), EINSTEIN, model.dsl(),
                       {"R": dec.R, "volume": model.volume()})


def csc_threshold(n: int, kappa: float = 1.0) -> float:
    """Largest T^2 for which S^{n-1}(kappa) x S^1(T) is Yamabe minimizing."""
    return 4 * math.pi ** 2 / ((n - 2) * kappa)


def yamabe_csc_minimizer(model: ModelSpace) -> YamabeValue:
    facs = model.factors
    if (len(facs) != 2 or not isinstance(facs[0], Sphere) or not isinstance(facs[1], Circle)):
        raise YamabeUnavailable("constant scalar curvature certificate needs S(n-1,k) x Circ(T)")
    sph, circ = facs
    n = model.dim
    if circ.T ** 2 > csc_threshold(n, sph.kappa) * (1 + 1e-14):
        raise YamabeUnavailable("minimizer certificate unavailable: "
                                f"T^2 = {circ.T ** 2:g} > 4 pi^2/((n-2) kappa)")
    scal = (n - 1) * (n - 2) * sph.kappa
    return YamabeValue(scal * model.volume() ** (2 / n), CSC, model.dsl(),
                       {"R": scal, "volume": model.volume()})


def yamabe_of(model) -> YamabeValue:
    """Dispatch to whichever certificate applies; raises YamabeUnavailable otherwise."""
    if isinstance(model, CoshCylinder):
        return cylinder_yamabe_quadrature(model.base)
    _, einstein = _einstein_data(model)
    if einstein:
        return yamabe_einstein(model)
    return yamabe_csc_minimizer(model)


# --------------------------------------------------------------------------
# modified Yamabe functional on test functions


@dataclass(frozen=True, eq=False)
class ProbeResult:
    beta: float
    Y: float
    constant_value: float
    sampled_min: float
    values: np.ndarray
    factor: str
    provenance: str = UPPER

    @property
    def violations(self) -> int:
        return int(np.sum(self.values < self.beta * self.Y - 1e-8 * max(1.0, self.Y)))


class _Sampler:
    """Quadrature nodes on one factor, with |d psi|^2 computed from closed forms."""

    def __init__(self, factor, nodes=96):
        self.factor = factor
        if isinstance(factor, Sphere):
            a = (factor.m - 2) / 2
            z, w = roots_jacobi(nodes, a, a)
            self.x, self.w = z, w / w.sum()
        elif isinstance(factor, Circle):
            self.x = np.linspace(0, 2 * np.pi, 2 * nodes, endpoint=False)
            self.w = np.full(self.x.size, 1 / self.x.size)
        else:
            self.x, self.w = np.zeros(1), np.ones(1)

    def random_perturbation(self, rng, degree=4):
        """(psi, |d psi|^2) at the nodes, scaled so that max |psi| = 1."""
        f = self.factor
        if isinstance(f, Sphere):
            c = rng.standard_normal(degree)
            powers = np.arange(1, degree + 1)
            psi = np.polynomial.polynomial.polyval(self.x, np.concatenate([[0.0], c]))
            dpsi = np.polynomial.polynomial.polyval(self.x, np.concatenate([c * powers]))
            grad = f.kappa * (1 - self.x ** 2) * dpsi ** 2
        elif isinstance(f, Circle):
            c = rng.standard_normal((degree, 2))
            ell = np.arange(1, degree + 1)[:, None]
            ang = ell * self.x[None, :]
            psi = (c[:, :1] * np.cos(ang) + c[:, 1:] * np.sin(ang)).sum(0)
            dpsi = (ell * (-c[:, :1] * np.sin(ang) + c[:, 1:] * np.cos(ang))).sum(0)
            grad = (2 * np.pi / f.T) ** 2 * dpsi ** 2
        else:
            return np.zeros_like(self.x), np.zeros_like(self.x)
        scale = np.abs(psi).max()
        return psi / scale, grad / scale ** 2


def modified_functional(n, scal, volume, beta, phi, grad_sq, weights) -> float:
    """beta-weighted Yamabe quotient from averages over a factor (others constant)."""
    num = volume * np.sum(weights * (4 * (n - 1) / (n - 2) * grad_sq + beta * scal * phi ** 2))
    den = (volume * np.sum(weights * np.abs(phi) ** (2 * n / (n - 2)))) ** ((n - 2) / n)
    return float(num / den)


def modified_yamabe_probe(model: ModelSpace, beta: float, trials: int,
                          rng: np.random.Generator, amplitude: float = 0.5) -> ProbeResult:
    if not 0 <= beta <= 1:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    y = yamabe_of(model)
    n, scal, vol = model.dim, y.detail["R"], y.detail["volume"]
    factor = next((f for f in model.factors if isinstance(f, (Sphere, Circle))), None)
    sampler = _Sampler(factor)
    w = sampler.w
    const = modified_functional(n, scal, vol, beta, np.ones_like(w), np.zeros_like(w), w)
    vals = [const]
    if factor is not None:
        for _ in range(trials):
            psi, grad = sampler.random_perturbation(rng)
            eps = amplitude * rng.uniform(0.05, 1.0)
            vals.append(modified_functional(n, scal, vol, beta, 1 + eps * psi,
                                            eps ** 2 * grad, w))
    vals = np.array(vals)
    if vals.size == 0:
        raise ValueError("empty test family")
    return ProbeResult(beta, y.value, const, float(vals.min()), vals,
                       factor.dsl() if factor is not None else "none")


def probe_concavity(model: ModelSpace, betas, trials: int, seed: int) -> float:
    """Worst midpoint-concavity defect of beta -> min over a fixed test family."""
    betas = np.asarray(betas, dtype=float)
    mins = np.array([modified_yamabe_probe(model, b, trials, np.random.default_rng(seed)).sampled_min
                     for b in betas])
    mid = 0.5 * (mins[:-2] + mins[2:])
    return float(np.max(mid - mins[1:-1], initial=-np.inf))


# --------------------------------------------------------------------------
# cylinders


def sech(x):
    """1/cosh without overflow."""
    e = math.exp(-abs(x))
    return 2 * e / (1 + e * e)


def _truncation(n, lam, tol):
    """S with e^{-(n-2) lam S} below 0.1 tol, the slowest tail of the radial integrands."""
    return math.log(10.0 / tol) / ((n - 2) * lam) + 1.0


def radial_quotient(n: int, lam: float, tol: float = 1e-13) -> float:
    """Yamabe quotient on N x R (R_h = (n-2)(n-1)) of cosh(lam s)^{-(n-2)/2}, per vol(N)^{2/n}."""
    p = (n - 2) / 2
    big = _truncation(n, lam, tol)
    opts = dict(epsabs=0, epsrel=1e-13, limit=200)

    def grad(s):
        return (p * lam * math.tanh(lam * s)) ** 2 * sech(lam * s) ** (2 * p)

    def mass(s):
        return sech(lam * s) ** (2 * p)

    def crit(s):
        return sech(lam * s) ** n

    g = 2 * integrate.quad(grad, 0, big, **opts)[0]
    m = 2 * integrate.quad(mass, 0, big, **opts)[0]
    c = 2 * integrate.quad(crit, 0, big, **opts)[0]
    return (4 * (n - 1) / (n - 2) * g + (n - 2) * (n - 1) * m) / c ** ((n - 2) / n)


def golden_min(f, lo, hi, xtol=1e-9):
    a, b = lo, hi
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def suspension_residual(n_points: int = 2001, span: float = 12.0) -> float:
    """r = 2 arctan(e^s) turns dr^2 + sin^2 r g_S into sech^2 s (ds^2 + g_S)."""
    s = np.linspace(-span, span, n_points)
    r = 2 * np.arctan(np.exp(s))
    sech = 1 / np.cosh(s)
    dr = 2 * np.exp(s) / (1 + np.exp(2 * s))
    return float(max(np.abs(np.sin(r) - sech).max(), np.abs(dr - sech).max()))


def radial_minimum(n: int):
    lam, q = golden_min(lambda x: radial_quotient(n, x), 0.25, 4.0)
    return lam, q


def cylinder_yamabe_quadrature(base: ModelSpace, require_einstein: bool = True) -> YamabeValue:
    """Y(N x R, [h + ds^2]) from radial test functions.

    For an Einstein base the radial extremal is optimal and the value is
    certified; otherwise the number is a test-function upper bound.
    """
    nb, lam_scale = normalize_base(base)
    _, einstein = _einstein_data(nb)
    if require_einstein and not einstein:
        raise YamabeUnavailable(f"cylinder base {base.dsl()} is not Einstein")
    n = nb.dim + 1
    lam, q = radial_minimum(n)
    vol_n = nb.volume()
    value = vol_n ** (2 / n) * q
    closed = y_sphere(n) * (vol_n / sphere_volume(n - 1)) ** (2 / n)
    return YamabeValue(value, CYLINDER if einstein else UPPER, f"{base.dsl()}xR", {
        "lambda": lam, "s0": 0.0, "closed_form": closed, "base_scale": lam_scale,
        "base_volume": vol_n, "relative_error": abs(value - closed) / closed,
        "suspension_residual": suspension_residual()})


# --------------------------------------------------------------------------
# Yamabe ODE


def _d1(h, w):
    return (w[:-4] - 8 * w[1:-3] + 8 * w[3:-1] - w[4:]) / (12 * h)


def _d2(h, w):
    return (-w[:-4] + 16 * w[1:-3] - 30 * w[2:-2] + 16 * w[3:-1] - w[4:]) / (12 * h * h)


def cosh_profile(n: int, mu: float, s0: float = 0.0, points: int = 10_000,
                 span: float = 20.0) -> RadialProfile:
    """w = phi^{-(n-2)/2} with phi = sqrt(mu/(n(n-1))) cosh(s - s0)."""
    s = np.linspace(-span, span, points)
    amp = math.sqrt(mu / (n * (n - 1)))
    w = (amp * np.cosh(s - s0)) ** (-(n - 2) / 2)
    return RadialProfile(s, w, {"amplitude": amp, "s0": s0, "rate": (n - 2) / 2})


@dataclass(frozen=True)
class OdeCheck:
    residual: float
    first_integral: float
    drift: float
    phi_identity: float | None


def phi_identity_residual(profile: RadialProfile) -> float:
    """max |phi^2 - phi'^2 - A^2| / phi^2 for the closed-form cosh parameters."""
    amp, s0 = profile.decay["amplitude"], profile.decay["s0"]
    x = profile.s - s0
    phi, dphi = amp * np.cosh(x), amp * np.sinh(x)
    return float(np.max(np.abs(phi ** 2 - dphi ** 2 - amp ** 2) / phi ** 2))


def yamabe_ode_check(profile: RadialProfile, n: int, R_h: float, mu: float) -> OdeCheck:
    """Residual of -4(n-1)/(n-2) w'' + R_h w = mu w^{(n+2)/(n-2)} and drift of its first integral.

    Derivatives use fourth-order central differences on interior nodes; the
    residual is relative to max |R_h w|.
    """
    s, w = profile.s, profile.values
    h = np.diff(s)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("ODE check needs a uniform grid")
    h = h[0]
    if w.size < 5:
        raise ValueError("grid too coarse")
    c = 4 * (n - 1) / (n - 2)
    wi = w[2:-2]
    res = -c * _d2(h, w) + R_h * wi - mu * wi ** ((n + 2) / (n - 2))
    scale = max(abs(R_h) * np.abs(w).max(), 1e-300)
    fi = -c * _d1(h, w) ** 2 + R_h * wi ** 2 - (n - 2) / n * mu * wi ** (2 * n / (n - 2))
    fscale = max(abs(R_h) * np.max(w ** 2), 1e-300)
    phi = phi_identity_residual(profile) if "amplitude" in profile.decay else None
    return OdeCheck(float(np.abs(res).max() / scale), float(fi.mean()),
                    float((fi.max() - fi.min()) / fscale), phi)


# --------------------------------------------------------------------------
# cosh cylinder constant


def sech_power_integral(n: int) -> float:
    """Integral of cosh(t)^{-n} over the real line by quadrature."""
    return 2 * integrate.quad(lambda t: sech(t) ** n, 0, np.inf,
                              epsabs=0, epsrel=1e-13, limit=200)[0]


def sech_power_recurrence(n: int) -> float:
    if n == 1:
        return math.pi
    if n == 2:
        return 2.0
    return (n - 2) / (n - 1) * sech_power_recurrence(n - 2)


@dataclass(frozen=True)
class CoshCylinderConstant:
    n: int
    alpha: float
    C: float
    C_closed: float
    lower_bound: bool
    r1_base: float
    lhs: float
    rhs: float
    einstein_base: bool
    yamabe: YamabeValue
    integral_error: float


def cosh_cylinder_C(base: ModelSpace, alpha: float = 1.0) -> CoshCylinderConstant:
    """Ratio of the two sides of the non-compact degree-one pinching on a cosh cylinder.

    LHS = ||r_1||_{n/2} + (n-4)/(4n) ||R_g||_{n/2} from the closed-form curvatures
    (both are K / (alpha cosh^4 t), so the L^{n/2} norm is K (vol N I_n)^{2/n}),
    RHS = Y/4. For a non-Einstein base only a radial upper bound of Y is known,
    so C is then a lower bound.
    """
    nb, _ = normalize_base(base)
    n = nb.dim + 1
    dec_h, einstein = _einstein_data(nb)
    r1_h = 0.0 if einstein else float(-np.linalg.eigvalsh(dec_h.ric0)[0])
    i_n = sech_power_integral(n)
    i_err = abs(i_n - sech_power_recurrence(n)) / sech_power_recurrence(n)
    vol_n = nb.volume()
    k_r1 = r1_h + 2 * (n - 2) * (n - 1) / n
    k_scal = (n - 1) * (n - 4)
    lhs = (k_r1 + (n - 4) / (4 * n) * abs(k_scal)) * (vol_n * i_n) ** (2 / n)
    y = cylinder_yamabe_quadrature(base, require_einstein=False)
    rhs = y.value / 4
    closed = ((1 + 4 * r1_h / (n * (n - 1))) * (vol_n / sphere_volume(n - 1)) ** (2 / n)
              * y_sphere(n) / y.value)
    return CoshCylinderConstant(n, alpha, lhs / rhs, closed, not einstein, r1_h, lhs, rhs,
                                einstein, y, i_err)

