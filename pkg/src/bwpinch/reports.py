"""Theorem-by-theorem pinching verdicts on model spaces, Betti tables and report output."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from itertools import combinations_with_replacement

import numpy as np
from scipy.stats import special_ortho_group

from .bochner import build_bw, lemma_rk_check, middle_degree_split, pinch_constants, r_k_of, \
    theorem_constant
from .curvature import Circle, ComplexProjective, CoshCylinder, ModelSpace, Sphere, \
    curvature_of_model, rho_of, ricci_decompose
from .yamabe import YamabeUnavailable, cosh_cylinder_C, yamabe_of

SCHEMA = 1
DEFAULT_TOL = 1e-8
FRAME_TOL = 1e-10

STRICT = "strict"
EQUALITY = "equality"
VIOLATED = "violated"
INDETERMINATE = "boundary-indeterminate"
UNAVAILABLE = "yamabe-unavailable"

THEOREMS = ("Gallot", "degrekcompact", "degre1compactnorm", "degre3compact", "NormPinch",
            "gursky1", "gursky2", "wplus4D", "pinchingchang", "degre1completeigen")


def verdict(lhs: float, rhs: float, tol: float = DEFAULT_TOL) -> str:
    """Three-valued comparison of LHS <= RHS by relative slack (RHS - LHS)/RHS.

    Slack within tol is equality, below -tol a violation, above 100 tol strict;
    the band in between is left undecided.
    """
    if rhs <= 0:
        raise ValueError("right-hand side must be positive")
    s = (rhs - lhs) / rhs
    if abs(s) <= tol:
        return EQUALITY
    if s < -tol:
        return VIOLATED
    if s > 100 * tol:
        return STRICT
    return INDETERMINATE


# --------------------------------------------------------------------------
# Betti numbers


@dataclass(frozen=True)
class BettiTable:
    betti: tuple
    signature: int | None = None

    @property
    def n(self) -> int:
        return len(self.betti) - 1

    def __getitem__(self, k):
        return self.betti[k]

    def poincare_ok(self) -> bool:
        return self.betti == self.betti[::-1]

    @property
    def b2_plus(self) -> int | None:
        if self.n != 4 or self.signature is None:
            return None
        return (self.betti[2] + self.signature) // 2


def _factor_betti(f):
    if isinstance(f, Sphere):
        b = [0] * (f.m + 1)
        b[0] = b[f.m] = 1
        sig = 0 if f.m % 4 == 0 else None
        return b, sig
    if isinstance(f, ComplexProjective):
        b = [1 if i % 2 == 0 else 0 for i in range(2 * f.m + 1)]
        sig = 1 if f.m % 2 == 0 else None
        return b, sig
    if isinstance(f, Circle):
        return [1, 1], None
    raise TypeError(f"unsupported factor {f!r}")


def betti_of(model) -> BettiTable:
    """Künneth product of factor tables; signature multiplies over factors of dimension 4j."""
    if isinstance(model, CoshCylinder):
        raise ValueError("Betti table needs a closed model")
    b = np.array([1], dtype=np.int64)
    sig, sig_known = 1, True
    for f in model.factors:
        fb, fs = _factor_betti(f)
        b = np.convolve(b, np.array(fb, dtype=np.int64))
        if fs is None:
            sig_known = False
        else:
            sig *= fs
    n = model.dim
    signature = sig if sig_known else (0 if n % 4 == 0 else None)
    return BettiTable(tuple(int(x) for x in b), signature)


# --------------------------------------------------------------------------
# reports


@dataclass
class PinchReport:
    theorem: str
    model: str
    n: int
    lhs: float
    rhs: float | None
    ratio: float | None
    verdict: str
    k: int | None = None
    tol: float = DEFAULT_TOL
    yamabe_provenance: str | None = None
    yamabe_value: float | None = None
    betti: list = field(default_factory=list)
    betti_degrees: list = field(default_factory=list)
    betti_consistent: bool = True
    contradiction: bool = False
    pointwise: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    readings: dict = field(default_factory=dict)
    schema: int = SCHEMA

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PinchReport":
        names = {f.name for f in fields(cls)}
        extra = set(d) - names
        if extra:
            raise ValueError(f"unknown report fields {sorted(extra)}")
        if d.get("schema", SCHEMA) != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "PinchReport":
        return cls.from_dict(json.loads(s))

    def to_markdown(self) -> str:
        thm = self.theorem if self.k is None else f"{self.theorem}(k={self.k})"
        lines = [f"### {thm} on `{self.model}`", "",
                 "| quantity | value |", "|---|---|",
                 f"| LHS | {_fmt(self.lhs)} |", f"| RHS | {_fmt(self.rhs)} |",
                 f"| LHS/RHS | {_fmt(self.ratio)} |", f"| verdict | **{self.verdict}** |",
                 f"| Yamabe | {_fmt(self.yamabe_value)} ({self.yamabe_provenance}) |",
                 f"| Betti | {self.betti} (degrees {self.betti_degrees}) |",
                 f"| consistent | {self.betti_consistent and not self.contradiction} |"]
        for key, val in self.pointwise.items():
            lines.append(f"| {key} | {_fmt(val)} |")
        for name, val in self.readings.items():
            lines.append(f"| reading {name} | {val} |")
        lines.extend(f"\n- {note}" for note in self.notes)
        return "\n".join(lines)

    def csv_row(self) -> dict:
        return {"theorem": self.theorem, "k": self.k, "model": self.model, "n": self.n,
                "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio, "verdict": self.verdict,
                "yamabe": self.yamabe_provenance, "betti": " ".join(map(str, self.betti)),
                "contradiction": self.contradiction}


def _fmt(x):
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    rows = [r.csv_row() for r in reports]
    if not rows:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


# --------------------------------------------------------------------------
# pointwise data


@dataclass(frozen=True)
class Pointwise:
    n: int
    R: float
    rho: float
    ric0: float
    weyl: float
    r: dict
    w_plus: float | None


def pointwise_data(rm, ks=()) -> Pointwise:
    dec = ricci_decompose(rm)
    n = rm.n
    rs = {k: r_k_of(build_bw(dec, k)).r_k + 0.0 for k in ks}
    w_plus = None
    if n == 4:
        w_plus = middle_degree_split(build_bw(dec, 2), dec.weyl).w_plus
    return Pointwise(n, dec.R, rho_of(rm) + 0.0, math.sqrt(dec.ric0_norm_sq),
                     math.sqrt(dec.weyl_norm_sq), rs, w_plus)


def _frame_check(rm, ks, seed, samples=3):
    """Pointwise invariants must not depend on the orthonormal frame."""
    base = pointwise_data(rm, ks)
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        q = special_ortho_group.rvs(rm.n, random_state=rng)
        other = pointwise_data(rm.rotated(q), ks)
        pairs = [(base.rho, other.rho), (base.ric0, other.ric0), (base.weyl, other.weyl),
                 (base.R, other.R)] + [(base.r[k], other.r[k]) for k in ks]
        if base.w_plus is not None:
            pairs.append((base.w_plus, other.w_plus))
        scale = max(1.0, abs(base.R))
        for a, b in pairs:
            if abs(a - b) > FRAME_TOL * scale:
                raise ArithmeticError(f"frame dependence {a} vs {b}: assembly bug")
    return base


# --------------------------------------------------------------------------
# theorem evaluation


def _theorem_degrees(theorem, n, k):
    if theorem == "Gallot":
        return [j for j in range(1, n) if j <= (n - 3) / 2 or 2 * j == n]
    if theorem in ("degrekcompact", "NormPinch"):
        return [k]
    if theorem in ("degre1compactnorm", "gursky1"):
        return [1]
    if theorem == "degre3compact":
        return [3]
    if theorem == "gursky2":
        return [2]
    if theorem == "pinchingchang":
        return [1, 2]
    return []


def _check_dims(theorem, n, k):
    need = {"degre3compact": 6, "gursky1": 4, "gursky2": 4, "wplus4D": 4, "pinchingchang": 4}
    if theorem in need and n != need[theorem]:
        raise ValueError(f"{theorem} needs n = {need[theorem]}, model has n = {n}")
    if theorem in ("Gallot", "degre1compactnorm", "degrekcompact", "NormPinch") and n < 4:
        raise ValueError(f"{theorem} needs n >= 4")
    if theorem in ("degrekcompact", "NormPinch"):
        if k is None or not 1 <= k <= n / 2:
            raise ValueError(f"{theorem} needs 1 <= k <= n/2")
        if theorem == "NormPinch" and 2 * k == n - 1:
            raise ValueError("NormPinch excludes k = (n-1)/2")


def evaluate_theorem(theorem: str, model, k: int | None = None, tol: float = DEFAULT_TOL,
                     seed: int = 42) -> PinchReport:
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem id {theorem!r}; choose from {THEOREMS}")
    if theorem == "degre1completeigen":
        return _evaluate_cylinder(model, tol)
    if isinstance(model, CoshCylinder):
        raise ValueError(f"{theorem} needs a closed model")
    n = model.dim
    _check_dims(theorem, n, k)
    ks = [k] if theorem in ("degrekcompact", "NormPinch") else []
    rm = curvature_of_model(model)
    pw = _frame_check(rm, ks, seed)
    vol = model.volume()
    vn = vol ** (2 / n)
    notes, readings = [], {}

    try:
        y = yamabe_of(model)
        yv, prov = y.value, y.provenance
    except YamabeUnavailable as exc:
        y, yv, prov = None, None, None
        notes.append(f"no Yamabe certificate: {exc}")

    if theorem == "Gallot":
        lhs, rhs = pw.rho * vn, _mul(yv, 1 / (n * (n - 1)))
    elif theorem == "degrekcompact":
        lhs, rhs = pw.r[k] * vn, _mul(yv, float(theorem_constant(n, k)))
    elif theorem == "degre1compactnorm":
        lhs, rhs = pw.ric0 * vn, _mul(yv, 1 / math.sqrt(n * (n - 1)))
        if n == 4:
            notes.append("n = 4 is allowed here; it is the square root of the gursky1 pinching")
    elif theorem == "degre3compact":
        lhs, rhs = pw.weyl * vn, _mul(yv, 1 / (2 * math.sqrt(10)))
    elif theorem == "NormPinch":
        pc = pinch_constants(n, k)
        a = pc.a_mid if 2 * k == n else pc.a
        lhs = math.sqrt(float(a) * pw.weyl ** 2 + float(pc.b) * pw.ric0 ** 2) * vn
        rhs = _mul(yv, float(pc.theorem_constant))
        dec = ricci_decompose(rm)
        if 1 <= k <= (n - 1) / 2 or 2 * k == n:
            lem = lemma_rk_check(dec, k, tol)
            readings["lemma"] = (f"r_k^2 = {lem.lhs:.12g}, bound = {lem.rhs:.12g}, "
                                 f"equality = {lem.equality}")
        if k == 2 and n >= 7:
            readings.update(norm_pinch_readings(n, tol))
    elif theorem == "gursky1":
        lhs, rhs = pw.ric0 ** 2 * vol, _sq(yv, 1 / 12)
    elif theorem == "gursky2":
        lhs, rhs = pw.weyl ** 2 * vol, _sq(yv, 1 / 24)
    elif theorem == "wplus4D":
        lhs, rhs = pw.w_plus * vol ** 0.5, _mul(yv, 1 / 6)
    elif theorem == "pinchingchang":
        lhs = (pw.weyl ** 2 + 0.5 * pw.ric0 ** 2) * vol
        rhs = pw.R ** 2 * vol / 24
        prov = prov or "not needed"
    else:  # pragma: no cover
        raise AssertionError(theorem)

    pointwise = {"R": pw.R, "rho": pw.rho, "ric0_norm": pw.ric0, "weyl_norm": pw.weyl,
                 "volume": vol}
    if ks:
        pointwise[f"r_{k}"] = pw.r[k]
    if pw.w_plus is not None:
        pointwise["w+"] = pw.w_plus
    report = PinchReport(theorem=theorem, model=model.dsl(), n=n, lhs=float(lhs),
                         rhs=None if rhs is None else float(rhs), ratio=None, verdict=UNAVAILABLE,
                         k=k if ks else None, tol=tol, yamabe_provenance=prov, yamabe_value=yv,
                         notes=notes, readings=readings, pointwise=pointwise)
    if rhs is not None:
        report.ratio = float(lhs / rhs)
        report.verdict = verdict(lhs, rhs, tol)
    _attach_betti(report, model, theorem, n, k)
    return report


def _mul(y, c):
    return None if y is None else y * c


def _sq(y, c):
    return None if y is None else y * y * c


def _attach_betti(report, model, theorem, n, k):
    table = betti_of(model)
    report.betti = list(table.betti)
    degrees = _theorem_degrees(theorem, n, k)
    report.betti_degrees = degrees
    report.betti_consistent = table.poincare_ok() and table[0] == 1
    if theorem == "wplus4D":
        nonzero = bool(table.b2_plus)
        report.pointwise["b2+"] = table.b2_plus
    else:
        nonzero = any(table[j] for j in degrees)
    if report.verdict == STRICT and nonzero:
        report.contradiction = True
        report.notes.append("strict pinching with a nonzero Betti number: this should never happen")


def norm_pinch_readings(n: int, tol: float = DEFAULT_TOL) -> dict:
    """Lemma r_2 bound on both scalings of the degree-two equality model."""
    out = {}
    for label, kap2, kap_rest in (("S2(n-5) x S^(n-2)(1)", n - 5.0, 1.0),
                                  ("S2(1) x S^(n-2)(n-5)", 1.0, n - 5.0)):
        model = ModelSpace((Sphere(2, kap2), Sphere(n - 2, kap_rest)))
        dec = ricci_decompose(curvature_of_model(model))
        lem = lemma_rk_check(dec, 2, tol)
        spec = r_k_of(build_bw(dec, 2)).traceless_eigenvalues
        two_point = len(spec) == 2 and spec[0][1] == 1
        out[label] = (f"equality = {lem.equality}, slack = {lem.slack:.3e}, "
                      f"two-point simple-lowest = {two_point}")
    return out


def _evaluate_cylinder(model, tol) -> PinchReport:
    if not isinstance(model, CoshCylinder):
        raise ValueError("degre1completeigen is evaluated on cosh cylinders only")
    c = cosh_cylinder_C(model.base, model.alpha)
    v = verdict(c.lhs, c.rhs, tol)
    notes = []
    if c.lower_bound:
        notes.append("base is not Einstein: Y is a radial upper bound, so LHS/RHS is a lower bound")
    report = PinchReport(theorem="degre1completeigen", model=model.dsl(), n=c.n, lhs=c.lhs,
                         rhs=c.rhs, ratio=c.C, verdict=v, tol=tol,
                         yamabe_provenance=c.yamabe.provenance, yamabe_value=c.yamabe.value,
                         betti=[], betti_degrees=[], notes=notes,
                         pointwise={"C_closed_form": c.C_closed, "r1(h)": c.r1_base,
                                    "I_n_error": c.integral_error})
    # N x R has two ends, so compactly supported H^1 is nonzero
    report.pointwise["ends"] = 2
    if v == STRICT:
        report.contradiction = True
    return report


# --------------------------------------------------------------------------
# sweep


def _factor_choices(n):
    out = [("S", d) for d in range(2, n + 1)]
    out += [("CP", 2 * m) for m in range(2, n // 2 + 1)]
    return out


def factor_partitions(n):
    choices = _factor_choices(n)
    for r in range(1, n // 2 + 1):
        for combo in combinations_with_replacement(choices, r):
            if sum(d for _, d in combo) == n:
                yield combo


def partial_dims(combo):
    sums = {0}
    for kind, d in combo:
        opts = [0, d] if kind == "S" else list(range(0, d + 1, 2))
        sums = {s + o for s in sums for o in opts}
    return sums


def einstein_product(combo, n, alpha=None) -> ModelSpace:
    """Product with R_i = alpha n_i / n on each factor (alpha = n(n-1) by default)."""
    alpha = n * (n - 1) if alpha is None else alpha
    facs = []
    for kind, d in combo:
        if kind == "S":
            facs.append(Sphere(d, alpha / (n * (d - 1))))
        else:
            m = d // 2
            facs.append(ComplexProjective(m, 2 * alpha / (n * (m + 1))))
    return ModelSpace(tuple(facs))


def sweep_equality_family(n: int, k: int, tol: float = DEFAULT_TOL, max_n: int = 12):
    if n > max_n:
        raise ValueError(f"n={n} exceeds the cap {max_n}")
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n-1")
    reports = []
    for combo in factor_partitions(n):
        if len(combo) < 2 or k not in partial_dims(combo):
            continue
        model = einstein_product(combo, n)
        kk = min(k, n - k)
        for thm, kv in (("Gallot", None), ("degrekcompact", kk)):
            reports.append(evaluate_theorem(thm, model, kv, tol))
        reports[-1].notes.append(f"b_{k} = {betti_of(model)[k]}")
    return reports
