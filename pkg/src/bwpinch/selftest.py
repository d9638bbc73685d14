"""Acceptance checks, one function per criterion, shared by the CLI and the test suite."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import bochner as bw
from .curvature import Circle, ComplexProjective, ModelSpace, Sphere, curvature_of_model, \
    random_curvature, ricci_decompose
from .reports import EQUALITY, betti_of, einstein_product, evaluate_theorem, \
    factor_partitions
from .warped import HarmonicRadialForm, basineq_verify, cosh_cylinder_warp, cosh_warp, \
    kato_ratio, sine_warp
from .yamabe import cosh_cylinder_C, cosh_profile, cylinder_yamabe_quadrature, y_sphere, \
    yamabe_ode_check


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    limit: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        limit = f" (limit {self.limit:g} s)" if self.limit else ""
        return f"[{status}] criterion {self.number}: {self.name} | {self.detail} | " \
               f"{self.elapsed:.2f} s{limit}"


def _run(number, name, fn, limit=None, **kw) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn(**kw)
    except Exception as exc:  # a crash is a failure with its message
        ok, detail = False, f"error: {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0
    if limit is not None and elapsed > limit:
        ok, detail = False, detail + f"; exceeded {limit:g} s"
    return CriterionResult(number, name, ok, detail, elapsed, limit)


def _nonround_einstein_bases(m):
    """Einstein products of spheres and CP factors of dimension m other than the round sphere."""
    out = []
    for combo in factor_partitions(m):
        if len(combo) == 1 and combo[0][0] == "S":
            continue
        out.append(einstein_product(combo, m))
    return out


# --------------------------------------------------------------------------


def _c1():
    links = bw.constant_chain()
    bad = [l.label for l in links if not l.exact]
    return not bad, f"{len(links) - len(bad)}/{len(links)} exact" + (f"; off: {bad}" if bad else "")


def _c2(seed, trials):
    rng = np.random.default_rng(seed)
    worst, count = 0.0, 0
    for n in range(3, 11):
        for _ in range(trials):
            dec = ricci_decompose(random_curvature(n, rng))
            for k in range(1, n):
                try:
                    op = bw.build_bw(dec, k)
                except ArithmeticError:
                    return False, f"trace check raised at n={n}, k={k}"
                expected = bw.trace_formula(n, k, dec.R)
                scale = max(abs(expected), float(np.linalg.norm(op.matrix)))
                worst = max(worst, abs(np.trace(op.matrix) - expected) / scale)
                count += 1
    return worst <= 1e-10, f"{count} operators, worst relative error {worst:.2e}"


def _c3(seed, trials):
    rng = np.random.default_rng(seed)
    viol, worst_eq = 0, 0.0
    for d in range(2, 21):
        rep = bw.lemma_eigenendo_check(d, trials, rng)
        viol += rep.violations
        worst_eq = max(worst_eq, rep.equality_slack)
    return viol == 0 and worst_eq <= 1e-12, \
        f"violations {viol}, equality-matrix slack {worst_eq:.1e}"


def _c4(seed, trials):
    rng = np.random.default_rng(seed)
    viol, gm_viol, worst, count = 0, 0, 0.0, 0
    for n in range(4, 9):
        for k in range(1, n // 2 + 1):
            for _ in range(trials):
                rm = random_curvature(n, rng)
                res = bw.lemma_rk_check(ricci_decompose(rm), k)
                scale = max(1.0, res.rhs)
                if res.slack < -1e-9 * scale:
                    viol += 1
                worst = max(worst, res.lhs / res.rhs)
                r_k, gm = bw.gallot_meyer_check(rm, k)
                if r_k > gm + 1e-9 * max(1.0, gm):
                    gm_viol += 1
                count += 1
    return viol == 0 and gm_viol == 0, \
        f"{count} samples, lemma violations {viol}, Gallot-Meyer violations {gm_viol}, " \
        f"max r_k^2/bound {worst:.4f}"


def _c5(seed, trials):
    rng = np.random.default_rng(seed)
    worst, bad, cases = 0.0, [], 0
    two_point_ok = True
    for n in range(5, 11):
        for k in range(2, min(4, (n - 1) // 2) + 1):
            for _ in range(trials):
                a, b, g = rng.uniform(-2, 2, 3)
                rep = bw.equality_spectrum_check(a, b, g, n, k)
                worst = max(worst, rep.max_error)
                if not rep.matches:
                    bad.append(rep.discrepancy)
                cases += 1
            v = bw.two_point_directions(n, k)
            if k == 2:
                two_point_ok &= v is not None and abs(v[0] - (n - 5) * v[1]) < 1e-12
                rep = bw.equality_spectrum_check(n - 5.0, 1.0, 0.0, n, k)
                two_point_ok &= rep.two_point and rep.lowest_simple
            else:
                two_point_ok &= v is None
    control = bw.equality_spectrum_check(1.0, 1.0, 0.0, 8, 2)
    two_point_ok &= not control.two_point
    detail = f"{cases} spectra, worst error {worst:.1e}; two-point only for k=2, alpha=(n-5)beta: " \
             f"{two_point_ok}"
    if bad:
        detail += f"; discrepancy: {bad[0]}"
    return not bad and worst <= 1e-10 and two_point_ok, detail


def _ratio_ok(rep, tol=1e-9):
    return rep.verdict == EQUALITY and abs(rep.ratio - 1) <= tol


def _c6():
    fails = []
    s3s3 = ModelSpace((Sphere(3, 1.0), Sphere(3, 1.0)))
    rep = evaluate_theorem("degre3compact", s3s3)
    if not (_ratio_ok(rep) and betti_of(s3s3)[3] == 2):
        fails.append("S3xS3")
    cp2 = ModelSpace((ComplexProjective(2, 4.0),))
    for thm in ("gursky2", "wplus4D"):
        rep = evaluate_theorem(thm, cp2)
        if not _ratio_ok(rep):
            fails.append(f"CP2 {thm}")
    dec = ricci_decompose(curvature_of_model(cp2))
    split = bw.middle_degree_split(bw.build_bw(dec, 2), dec.weyl)
    if split.weyl_minus_norm > 1e-12 or betti_of(cp2).b2_plus != 1:
        fails.append("CP2 W- or b2+")
    if abs(split.r_plus - 2 * split.w_plus) > 1e-12 * max(1.0, split.r_plus):
        fails.append("CP2 r2+ = 2w+")
    for n in range(4, 11):
        for t in (2 * math.pi / math.sqrt(n - 2), 1.0):
            m = ModelSpace((Sphere(n - 1, 1.0), Circle(t)))
            for thm in ("degre1compactnorm", "Gallot"):
                if not _ratio_ok(evaluate_theorem(thm, m)):
                    fails.append(f"{m.dsl()} {thm}")
            if betti_of(m)[1] != 1:
                fails.append(f"{m.dsl()} b1")
    for n in range(7, 11):
        m = ModelSpace((Sphere(2, n - 5.0), Sphere(n - 2, 1.0)))
        dec = ricci_decompose(curvature_of_model(m))
        res = bw.lemma_rk_check(dec, 2, tol=1e-9)
        spec = bw.r_k_of(bw.build_bw(dec, 2)).traceless_eigenvalues
        if not (res.equality and len(spec) == 2 and spec[0][1] == 1):
            fails.append(m.dsl())
    return not fails, "all model equalities hold" if not fails else f"failed: {fails}"


def _c7():
    worst, strict_ok, slowest, cases = 0.0, True, 0.0, 0
    for n in range(4, 9):
        bases = [ModelSpace((Sphere(n - 1, 1.0),))] + _nonround_einstein_bases(n - 1)
        for base in bases:
            t0 = time.perf_counter()
            y = cylinder_yamabe_quadrature(base)
            slowest = max(slowest, time.perf_counter() - t0)
            worst = max(worst, y.detail["relative_error"])
            if len(base.factors) > 1 or not isinstance(base.factors[0], Sphere):
                strict_ok &= y.value < y_sphere(n) * (1 - 1e-6)
            cases += 1
    ok = worst <= 1e-6 and strict_ok and slowest < 10
    return ok, f"{cases} bases, worst relative error {worst:.1e}, strict below Y(S^n) for " \
               f"non-round: {strict_ok}, slowest case {slowest:.2f} s"


def _c8():
    worst_phi, worst_res, worst_drift = 0.0, 0.0, 0.0
    for n in range(3, 11):
        for mu, s0 in ((n * (n - 1), 0.0), (1.7, 0.4)):
            prof = cosh_profile(n, mu, s0, points=10_000)
            chk = yamabe_ode_check(prof, n, (n - 2) * (n - 1), mu)
            worst_phi = max(worst_phi, chk.phi_identity)
            if mu == n * (n - 1):
                worst_res = max(worst_res, chk.residual)
                worst_drift = max(worst_drift, chk.drift)
    ok = worst_phi <= 1e-12 and worst_res <= 1e-6
    return ok, f"first integral {worst_phi:.1e}, ODE residual {worst_res:.1e}, " \
               f"finite-difference drift {worst_drift:.1e}"


def _c9():
    worst = 0.0
    for n in range(4, 9):
        bases = [ModelSpace((Sphere(n - 1, 1.0),))] + _nonround_einstein_bases(n - 1)
        for base in bases:
            worst = max(worst, abs(cosh_cylinder_C(base).C - 1))
    non = cosh_cylinder_C(ModelSpace((Sphere(2, 1.0), Sphere(2, 3.0))))
    ok = worst <= 1e-6 and non.C > 1 + 1e-6 and non.r1_base > 0
    return ok, f"Einstein bases |C-1| <= {worst:.1e}; S(2,1)xS(2,3): C >= {non.C:.6f} " \
               f"(lower bound, r_1(h) = {non.r1_base:.3f})"


def _c10():
    worst = 0.0
    f = HarmonicRadialForm(0.0, 1.0)
    for n in range(4, 11):
        for w in (sine_warp(n), cosh_warp(n)):
            rep = kato_ratio(w, f)
            if not rep.defined:
                return False, f"ratio undefined for {w.label}"
            worst = max(worst, rep.max_error)
    return worst <= 1e-10, f"max |ratio - (n-1)/n| = {worst:.1e}"


def _c11():
    worst = -np.inf
    for n in range(4, 11):
        for alpha in (1.0, 2.5):
            rep = basineq_verify(cosh_cylinder_warp(n, alpha, points=10_000), 1e-3)
            worst = max(worst, rep.max_violation)
    return worst <= 1e-6, f"max(LHS-RHS) = {worst:.2e}"


CRITERIA = [
    (1, "constant chain", _c1, 1.0, False),
    (2, "trace identity", _c2, 30.0, True),
    (3, "traceless endomorphism lemma", _c3, None, True),
    (4, "r_k lemma and Gallot-Meyer", _c4, None, True),
    (5, "product equality spectrum", _c5, None, True),
    (6, "model equalities", _c6, None, False),
    (7, "cylinder Yamabe quadrature", _c7, None, False),
    (8, "Yamabe ODE", _c8, None, False),
    (9, "cosh cylinder constant", _c9, None, False),
    (10, "Kato equality", _c10, None, False),
    (11, "radial Bochner inequality", _c11, None, False),
]

DEFAULT_TRIALS = {2: 500, 3: 1000, 4: 500, 5: 100}


def run_criterion(number: int, seed: int = 42, trials: int | None = None) -> CriterionResult:
    for num, name, fn, limit, randomized in CRITERIA:
        if num == number:
            kw = {}
            if randomized:
                kw = {"seed": seed, "trials": trials or DEFAULT_TRIALS[num]}
            return _run(num, name, fn, limit, **kw)
    raise ValueError(f"no criterion {number}")


def run_all(seed: int = 42, trials: int | None = None) -> list[CriterionResult]:
    return [run_criterion(num, seed, trials) for num, *_ in CRITERIA]

