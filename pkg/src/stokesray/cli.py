"""Command-line front door: evaluate spectral functions, run certified root
searches and verification suites, and check ray-system admissibility.

Documents stream to stdout as JSON (CSV for grid evaluations); logs go to
stderr. Exit status: 0 success, 1 check failure, 2 usage error, 3 numerical
failure. Output is byte-identical for identical (command, config, seed)
unless --timing is given.
"""
from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .ode import StepSizeUnderflowError
from .raysystem import (LabeledRaySystem, admissibility_check,
                        classify_two_lines, three_ray_check)
from .rootfinder import (BoundaryProblem, Disk, Rectangle, RootRecord,
                         RootSearchBudgetError, WindingError, eigenvalues_nk,
                         find_roots, order_estimate, predicted_ray,
                         verify_radial)
from .sibuya import (AnchorRadiusError, DomainError, ProblemSpec, evaluate_y0)
from .spectral import (InternalConsistencyError, SPECTRAL_TAGS,
                       connection_residual, make_handle, f_minus_one,
                       spectral_f, spectral_g, spectral_h, stokes_C,
                       w01_constant, wronskian, _omega_pow, _rot)

SCHEMA_VERSION = "stokesray-result/1"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

ENV_PREFIX = "STOKESRAY_"
ENV_DEFAULTS = {
    "rel_tol": (ENV_PREFIX + "REL_TOL", 1e-12),
    "residual_floor": (ENV_PREFIX + "RESIDUAL_FLOOR", 1e-9),
    "angular_tol": (ENV_PREFIX + "ANGULAR_TOL", 1e-6),
}

_COMPLEX_RE = re.compile(
    r"^\s*(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?"
    r"(?P<im>(?:[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|[+-])?"
    r"(?P<i>i)?\s*$")

_PI_RE = re.compile(
    r"^\s*(?P<sign>[+-]?)(?P<num>\d+\.?\d*|\.\d+)?"
    r"(?:/(?P<den>\d+\.?\d*|\.\d+))?pi\s*$")


class UsageError(ValueError):
    pass


def parse_complex(text: str) -> complex:
    """Parse 'a+bi' with optional scientific notation ('3', '-2i', '1.5e-3+2i')."""
    m = _COMPLEX_RE.match(text)
    if not m or (m.group("re") is None and m.group("im") is None
                 and m.group("i") is None):
        raise UsageError(f"cannot parse complex number {text!r}")
    re_s, im_s, has_i = m.group("re"), m.group("im"), m.group("i")
    if has_i:
        if im_s is None:
            # forms like '2i', 'i', '-i': the leading number is imaginary
            im = float(re_s) if re_s not in (None, "+", "-") else \
                (-1.0 if re_s == "-" else 1.0)
            return complex(0.0, im)
        if im_s in ("+", "-"):
            im_s += "1"
        return complex(float(re_s or 0.0), float(im_s))
    if im_s is not None:
        raise UsageError(f"cannot parse complex number {text!r}")
    return complex(float(re_s), 0.0)


def parse_angle(text: str) -> float:
    """Radians, or a rational multiple of pi like '2/5pi', '-pi', '0.5pi'."""
    m = _PI_RE.match(text)
    if m:
        num = float(m.group("num")) if m.group("num") else 1.0
        den = float(m.group("den")) if m.group("den") else 1.0
        val = math.pi * num / den
        return -val if m.group("sign") == "-" else val
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}") from None


def _cjson(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _record_json(r: RootRecord) -> dict:
    out = {"location": _cjson(r.location),
           "winding_certificate": r.winding_certificate,
           "residual": r.residual}
    if r.angular_deviation is not None:
        out["angular_deviation"] = r.angular_deviation
    return out


def _radial_json(rep) -> dict:
    return {"angle": rep.angle, "angular_tol": rep.angular_tol,
            "max_deviation": rep.max_deviation, "passed": rep.passed,
            "n_checked": rep.n_checked, "n_skipped": rep.n_skipped}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _env_default(key: str) -> float:
    name, fallback = ENV_DEFAULTS[key]
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"environment variable {name}={raw!r} is not a number")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stokesray",
        description=("Stokes multipliers, spectral determinants and ray-system "
                     "admissibility for -y'' + (z^m + E) y = 0"))
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(q, need_m=True):
        if need_m:
            q.add_argument("--m", type=int, required=True,
                           help="potential degree, integer >= 3")
        q.add_argument("--rel-tol", type=float, default=None,
                       help="integration tolerance per unit path length")
        q.add_argument("--residual-floor", type=float, default=None,
                       help="certified-root relative residual floor")
        q.add_argument("--angular-tol", type=float, default=None,
                       help="ray-verification angle tolerance (radians)")
        q.add_argument("--seed", type=int, default=2026,
                       help="seed for randomized verification grids")
        q.add_argument("--jobs", type=int, default=1,
                       help="parallel evaluation bound")
        q.add_argument("--timing", action="store_true",
                       help="include wall-clock timing (breaks byte-identical output)")

    q = sub.add_parser("eval", help="evaluate a spectral function")
    common(q)
    q.add_argument("--fn", required=True, choices=SPECTRAL_TAGS)
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--k", type=int, default=None)
    q.add_argument("--E", action="append", default=[],
                   help="energy as a+bi (repeatable)")
    q.add_argument("--grid-circle", nargs=2, metavar=("RADIUS", "COUNT"),
                   default=None)
    q.add_argument("--grid-segment", nargs=3, metavar=("FROM", "TO", "COUNT"),
                   default=None)
    q.add_argument("--format", choices=("json", "csv"), default="json")

    q = sub.add_parser("roots", help="find certified zeros in a region")
    common(q)
    q.add_argument("--fn", choices=SPECTRAL_TAGS, default=None)
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--k", type=int, default=None)
    q.add_argument("--eig", nargs=2, type=int, metavar=("N", "K"),
                   default=None, help="eigenvalues of the (n,k) problem")
    q.add_argument("--disk", nargs=2, metavar=("CENTER", "RADIUS"),
                   default=None)
    q.add_argument("--rect", nargs=4, type=float,
                   metavar=("X0", "X1", "Y0", "Y1"), default=None)
    q.add_argument("--max-roots", type=int, default=64)

    q = sub.add_parser("verify", help="run a verification suite")
    common(q)
    q.add_argument("--suite", required=True,
                   choices=("thm2", "consistency", "oracles"))
    q.add_argument("--radius", type=float, default=30.0,
                   help="search radius for the thm2 suite")

    q = sub.add_parser("rays", help="ray-system admissibility tools")
    rsub = q.add_subparsers(dest="rays_command", required=True)
    rq = rsub.add_parser("check")
    rq.add_argument("--a", required=True,
                    help="comma-separated zero-ray angles (radians or '2/5pi')")
    rq.add_argument("--b", required=True,
                    help="comma-separated one-point-ray angles")
    rq.add_argument("--angle-tol", type=float, default=1e-9)
    rq.add_argument("--all-partitions", action="store_true")
    rq.add_argument("--timing", action="store_true")
    rq = rsub.add_parser("classify-lines")
    rq.add_argument("--angle1", default="0")
    rq.add_argument("--angle2", default="0")
    rq.add_argument("--zeros-on", type=int, choices=(1, 2), default=1)
    group = rq.add_mutually_exclusive_group()
    group.add_argument("--parallel", action="store_true",
                       help="distinct parallel lines (angles equal)")
    group.add_argument("--identical", action="store_true")
    rq.add_argument("--timing", action="store_true")
    rq = rsub.add_parser("three-ray")
    rq.add_argument("--alpha", required=True,
                    help="half-angle of the symmetric 1-point rays")
    rq.add_argument("--angle-tol", type=float, default=1e-9)
    rq.add_argument("--timing", action="store_true")
    return p


def _config_echo(args) -> dict:
    cfg = {}
    for key in ("m", "suite", "radius", "fn", "n", "k", "seed", "jobs"):
        if hasattr(args, key) and getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    for key in ("rel_tol", "residual_floor", "angular_tol"):
        if hasattr(args, key):
            val = getattr(args, key)
            cfg[key] = _env_default(key) if val is None else val
    return cfg


def _tolerances(args):
    rel_tol = args.rel_tol if getattr(args, "rel_tol", None) is not None \
        else _env_default("rel_tol")
    floor = args.residual_floor if getattr(args, "residual_floor", None) is not None \
        else _env_default("residual_floor")
    ang = args.angular_tol if getattr(args, "angular_tol", None) is not None \
        else _env_default("angular_tol")
    return rel_tol, floor, ang


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _expand_grid(args) -> list[complex]:
    es = [parse_complex(t) for t in args.E]
    if args.grid_circle:
        r = float(args.grid_circle[0])
        n = int(args.grid_circle[1])
        if r <= 0 or n < 1:
            raise UsageError("--grid-circle needs RADIUS > 0 and COUNT >= 1")
        es += [r * cmath.exp(2j * cmath.pi * j / n) for j in range(n)]
    if args.grid_segment:
        a = parse_complex(args.grid_segment[0])
        b = parse_complex(args.grid_segment[1])
        n = int(args.grid_segment[2])
        if n < 2:
            raise UsageError("--grid-segment needs COUNT >= 2")
        es += [a + (b - a) * j / (n - 1) for j in range(n)]
    if not es:
        raise UsageError("no energies given: use --E or a grid option")
    return es


def cmd_eval(args) -> tuple[dict, int]:
    rel_tol, _, _ = _tolerances(args)
    if args.m < 3:
        raise UsageError("m must be >= 3")
    if args.fn == "W" and (args.n is None or args.k is None):
        raise UsageError("--fn W requires --n and --k")
    if args.format == "csv" and not (args.grid_circle or args.grid_segment):
        raise UsageError("csv output is limited to grid evaluations")
    handle = make_handle(args.m, args.fn, args.n, args.k, rel_tol=rel_tol)
    energies = _expand_grid(args)

    def one(E):
        sv = handle.spectral_value(E)
        return {"E": _cjson(E), "value": _cjson(sv.value),
                "err_estimate": sv.err_estimate}

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as ex:
            values = list(ex.map(one, energies))
    else:
        values = [one(E) for E in energies]
    payload = {"function": args.fn, "values": values}
    if args.fn == "W":
        payload["n"], payload["k"] = args.n, args.k
    return {"payload": payload}, EXIT_OK


def _region_from_args(args):
    if (args.disk is None) == (args.rect is None):
        raise UsageError("give exactly one of --disk or --rect")
    if args.disk is not None:
        center = parse_complex(args.disk[0])
        radius = float(args.disk[1])
        return Disk(center, radius), {"kind": "disk", "center": _cjson(center),
                                      "radius": radius}
    x0, x1, y0, y1 = args.rect
    return (Rectangle(x0, x1, y0, y1),
            {"kind": "rectangle", "x0": x0, "x1": x1, "y0": y0, "y1": y1})


def cmd_roots(args) -> tuple[dict, int]:
    rel_tol, floor, ang_tol = _tolerances(args)
    if args.m < 3:
        raise UsageError("m must be >= 3")
    region, region_json = _region_from_args(args)
    if (args.eig is None) == (args.fn is None):
        raise UsageError("give exactly one of --fn or --eig")
    if args.eig is not None:
        n, k = args.eig
        problem = BoundaryProblem(args.m, n, k)
        records = eigenvalues_nk(problem, region, rel_tol=rel_tol)
        rays = [predicted_ray(args.m, n, k)]
        label = f"W({n},{k})"
    else:
        if args.fn == "W":
            if args.n is None or args.k is None:
                raise UsageError("--fn W requires --n and --k")
            problem = BoundaryProblem(args.m, args.n, args.k)
        handle = make_handle(args.m, args.fn, args.n, args.k, rel_tol=rel_tol)
        coarse = handle.with_tolerances(rel_tol=min(1e-6, rel_tol * 1e6),
                                        target_rel=None)
        refine = handle.with_tolerances(rel_tol=min(1e-13, rel_tol),
                                        target_rel=1e-11)
        records = find_roots(handle, region, max_roots=args.max_roots,
                             dF=handle.derivative, coarse=coarse,
                             refine=refine, residual_floor=floor)
        rays = handle.predicted_zero_rays()
        label = args.fn
    reports = []
    status = EXIT_OK
    if rays and records:
        groups = {angle: [] for angle in rays}
        for rec in records:
            angle = min(rays, key=lambda a: abs(math.remainder(
                cmath.phase(rec.location) - a, 2 * math.pi)))
            groups[angle].append(rec)
        for angle, group in groups.items():
            if not group:
                continue
            rep = verify_radial(group, angle, ang_tol)
            reports.append(_radial_json(rep))
            if not rep.passed:
                status = EXIT_CHECK_FAILED
    payload = {"function": label, "region": region_json,
               "count": len(records),
               "roots": [_record_json(r) for r in records],
               "radial_reports": reports}
    return {"payload": payload}, status


# --- verification suites ---------------------------------------------------

def _check(name, passed, detail=None):
    entry = {"name": name, "passed": bool(passed)}
    if detail is not None:
        entry["detail"] = detail
    return entry


def _suite_oracles(m, rel_tol, rng) -> list[dict]:
    import mpmath  # test-grade dependency, used for the Airy oracle only
    checks = []
    om = _omega_pow(m, 1)
    spec0 = ProblemSpec(m, 0j)
    C0 = stokes_C(spec0, rel_tol)
    checks.append(_check("C(0) == 1+omega",
                         abs(C0.value - (1 + om)) <= 1e-9 * abs(1 + om),
                         {"value": _cjson(C0.value)}))
    f0 = spectral_f(spec0, rel_tol)
    f0_target = 1.0 - 4.0 * math.cos(math.pi / (m + 2)) ** 2
    checks.append(_check("f(0) == 1-4cos^2(pi/(m+2))",
                         abs(f0.value - f0_target) <= 1e-9 * abs(f0_target),
                         {"value": _cjson(f0.value), "target": f0_target}))
    h0 = spectral_h(spec0, rel_tol)
    h0_target = 2.0 * math.cos(math.pi / (m + 2))
    checks.append(_check("h(0) == 2cos(pi/(m+2))",
                         abs(h0.value - h0_target) <= 1e-9 * abs(h0_target)))
    g0 = spectral_g(spec0, rel_tol)
    g0_target = 1 + om + om * om
    checks.append(_check("g(0) == 1+omega+omega^2",
                         abs(g0.value - g0_target) <= 1e-8 * max(1.0, abs(g0_target))))
    nu = 1.0 / (m + 2)
    fr = evaluate_y0(spec0, 0, rel_tol)
    y, dy = fr.value()
    A = math.gamma(nu) * (m + 2) ** (nu - 0.5) / math.sqrt(math.pi)
    B = math.gamma(-nu) * (m + 2) ** (-nu - 0.5) / math.sqrt(math.pi)
    checks.append(_check("y0(0,0), y0'(0,0) == Bessel closed form",
                         abs(y - A) <= 1e-9 * abs(A)
                         and abs(dy - B) <= 1e-9 * abs(B),
                         {"y": _cjson(y), "target": A}))
    target = w01_constant(m)
    worst = 0.0
    for _ in range(100):
        E = complex(rng.uniform(-50, 50), rng.uniform(-50, 50))
        if abs(E) > 50:
            E *= 50 / abs(E)
        w = wronskian(ProblemSpec(m, E), 0, 1, rel_tol)
        worst = max(worst, abs(w.value - target) / abs(target))
    checks.append(_check("W01(E) == 2i omega^-1/2 on 100 random |E|<=50",
                         worst <= 1e-8, {"worst_rel_dev": worst}))
    # Airy transport: Q = z, frame from z=0 to z=1
    from .ode import PolynomialPotential, Path, SolutionFrame, integrate_path
    ai0 = complex(mpmath.airyai(0))
    dai0 = complex(mpmath.airyai(0, 1))
    frame = integrate_path(PolynomialPotential((0, 1)), Path.line(0, 1),
                           SolutionFrame(0, ai0, dai0), rel_tol)
    yv, dyv = frame.value()
    ai1 = 0.13529241631288141552414742351546630
    dai1 = -0.15914744129679321278750025249722970
    checks.append(_check("Airy frame transport 0 -> 1",
                         abs(yv - ai1) <= 1e-10 and abs(dyv - dai1) <= 1e-10,
                         {"Ai(1)": _cjson(yv)}))
    if m == 4:
        lams = (1.0603620904841829, 3.7996730297977828, 7.4556979379867383)
        recs = eigenvalues_nk(BoundaryProblem(4, 0, 3),
                              Rectangle(-10.0, -0.5, -1.0, 1.0),
                              rel_tol=rel_tol)
        ok = len(recs) == 3 and all(
            abs(r.location - (-lam)) <= 1e-6 * max(1.0, lam)
            for r, lam in zip(recs, lams))
        ok = ok and abs(predicted_ray(4, 0, 3) - math.pi) <= 1e-12
        checks.append(_check("quartic oscillator eigenvalues (0,3)",
                             ok, {"found": [_cjson(r.location) for r in recs]}))
    return checks


def _suite_consistency(m, rel_tol, rng) -> list[dict]:
    checks = []
    # connection identity at 20 random (E, z)
    worst = 0.0
    for _ in range(20):
        E = complex(rng.uniform(-8, 8), rng.uniform(-8, 8))
        r = rng.uniform(0.3, 1.2)
        th = rng.uniform(-0.5, 0.5) * math.pi / (m + 2)
        z = r * cmath.exp(1j * th)
        worst = max(worst, connection_residual(ProblemSpec(m, E), z, rel_tol))
    checks.append(_check("connection identity residual < 1e-8 (20 samples)",
                         worst < 1e-8, {"worst": worst}))
    target = w01_constant(m)
    worst = 0.0
    for _ in range(100):
        E = complex(rng.uniform(-50, 50), rng.uniform(-50, 50))
        if abs(E) > 50:
            E *= 50 / abs(E)
        w = wronskian(ProblemSpec(m, E), 0, 1, rel_tol)
        worst = max(worst, abs(w.value - target) / abs(target))
    checks.append(_check("W01 constancy over 100 random E", worst < 1e-8,
                         {"worst_rel_dev": worst}))
    # branch independence of f under epsilon -> -epsilon (exact)
    E = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
    eps = cmath.exp(1j * cmath.pi / (m + 2))
    c1 = stokes_C(ProblemSpec(m, _rot(m, E, -1)), rel_tol).value
    c2 = stokes_C(ProblemSpec(m, _rot(m, E, 1)), rel_tol).value
    fa = 1 - (c1 / eps) * (c2 / eps)
    fb = 1 - (c1 / (-eps)) * (c2 / (-eps))
    checks.append(_check("f invariant under sqrt-branch flip (exact)",
                         fa == fb))
    # conjugation symmetry of C/C(0) and f
    C0 = stokes_C(ProblemSpec(m, 0j), rel_tol).value
    worst = 0.0
    worst_f = 0.0
    for _ in range(10):
        E = complex(rng.uniform(-10, 10), rng.uniform(-10, 10))
        a = stokes_C(ProblemSpec(m, E), rel_tol).value / C0
        b = stokes_C(ProblemSpec(m, E.conjugate()), rel_tol).value / C0
        worst = max(worst, abs(b - a.conjugate()) / max(1.0, abs(a)))
        fa = spectral_f(ProblemSpec(m, E), rel_tol).value
        fb = spectral_f(ProblemSpec(m, E.conjugate()), rel_tol).value
        worst_f = max(worst_f, abs(fb - fa.conjugate()) / max(1.0, abs(fa)))
    checks.append(_check("conjugation symmetry of C/C(0)", worst < 1e-8,
                         {"worst": worst}))
    checks.append(_check("conjugation symmetry of f", worst_f < 1e-8,
                         {"worst": worst_f}))
    # independent integrations agree: repeat g at a relaxed tolerance, and
    # repeat y0 from a pushed-out anchor radius
    from .sibuya import AnchorPolicy
    E = complex(rng.uniform(-10, 10), rng.uniform(-10, 10))
    g1 = spectral_g(ProblemSpec(m, E), rel_tol)
    g2 = spectral_g(ProblemSpec(m, E), min(1e-8, rel_tol * 1e3))
    budget = 10 * (g1.err_estimate + g2.err_estimate + 1e-13) \
        * max(1.0, abs(g1.value))
    checks.append(_check("g agrees across independent integrations",
                         abs(g1.value - g2.value) <= budget,
                         {"difference": abs(g1.value - g2.value)}))
    fr1 = evaluate_y0(ProblemSpec(m, E), 0, rel_tol)
    fr2 = evaluate_y0(ProblemSpec(m, E), 0, rel_tol,
                      policy=AnchorPolicy(r_min=12.0))
    y1v, _ = fr1.value()
    y2v, _ = fr2.value()
    checks.append(_check("y0 anchor-radius independence (10 rel_tol)",
                         abs(y1v - y2v) <= 10 * rel_tol * abs(y1v)
                         + 1e-12 * abs(y1v),
                         {"rel_difference": abs(y1v - y2v) / abs(y1v)}))
    return checks


def _suite_thm2(m, rel_tol, floor, ang_tol, radius, rng) -> list[dict]:
    checks = []
    om = _omega_pow(m, 1)
    step = 2 * math.pi / (m + 2)

    def search(tag):
        handle = make_handle(m, tag, rel_tol=rel_tol)
        coarse = handle.with_tolerances(rel_tol=1e-6, target_rel=None)
        refine = handle.with_tolerances(rel_tol=min(1e-13, rel_tol),
                                        target_rel=1e-11)
        return find_roots(handle, Disk(0, radius), max_roots=128,
                          dF=handle.derivative, coarse=coarse, refine=refine,
                          residual_floor=floor)

    zf = search("f")
    rep = verify_radial(zf, 0.0, ang_tol) if zf else None
    checks.append(_check("zeros of f on the positive ray",
                         rep is not None and rep.passed,
                         _radial_json(rep) if rep else None))
    zc = search("C")
    repc = verify_radial(zc, 0.0, ang_tol) if zc else None
    checks.append(_check("zeros of C positive",
                         repc is not None and repc.passed,
                         _radial_json(repc) if repc else None))
    z1 = search("f-1")
    plus = [r for r in z1 if r.location.imag >= 0]
    minus = [r for r in z1 if r.location.imag < 0]
    ok = bool(plus) and bool(minus)
    details = {}
    if ok:
        rp = verify_radial(plus, step, ang_tol)
        rm = verify_radial(minus, -step, ang_tol)
        ok = rp.passed and rm.passed
        details = {"plus": _radial_json(rp), "minus": _radial_json(rm)}
    checks.append(_check("1-points of f on arg E = +-2pi/(m+2)", ok, details))
    worst_pair = None
    if z1 and zc:
        worst_pair = 0.0
        for r in z1:
            dev = min(min(abs(r.location - om * c.location),
                          abs(r.location - c.location / om))
                      for c in zc) / abs(r.location)
            worst_pair = max(worst_pair, dev)
    checks.append(_check("1-points pair with omega^+-1 c_j to 1e-8",
                         worst_pair is not None and worst_pair <= 1e-8,
                         {"worst_rel": worst_pair}))
    handle = make_handle(m, "C", rel_tol=1e-8, target_rel=None)
    slope = order_estimate(handle, [6.25, 12.5, 25.0, 50.0])
    rho = 0.5 + 1.0 / m
    checks.append(_check("order estimate within 0.1 of 1/2 + 1/m",
                         abs(slope - rho) <= 0.1,
                         {"slope": slope, "rho": rho}))
    return checks


def cmd_verify(args) -> tuple[dict, int]:
    rel_tol, floor, ang_tol = _tolerances(args)
    if args.m < 3:
        raise UsageError("m must be >= 3 (no such construction below m=3)")
    rng = np.random.default_rng(args.seed)
    if args.suite == "oracles":
        checks = _suite_oracles(args.m, rel_tol, rng)
    elif args.suite == "consistency":
        checks = _suite_consistency(args.m, rel_tol, rng)
    else:
        checks = _suite_thm2(args.m, rel_tol, floor, ang_tol, args.radius, rng)
    passed = all(c["passed"] for c in checks)
    payload = {"suite": args.suite, "m": args.m, "passed": passed,
               "checks": checks}
    return {"payload": payload}, EXIT_OK if passed else EXIT_CHECK_FAILED


def _admissibility_json(rep) -> dict:
    out = {"admissible": rep.admissible, "rho": rep.rho,
           "omega_gap": rep.omega_gap,
           "partition": [{"angle": a, "following_sector": par}
                         for a, par in rep.partition],
           "failure_witness": rep.failure_witness,
           "sectors": [{
               "index": s.index, "parity": s.parity,
               "start_angle": s.start_angle, "end_angle": s.end_angle,
               "opening": s.opening,
               "boundary_labels": list(s.boundary_labels),
               "interior": [{"angle": a, "label": l} for a, l in s.interior],
               "conditions_passed": list(s.passed),
               "conditions_failed": list(s.failed),
           } for s in rep.sector_diagnostics]}
    if rep.notes:
        out["notes"] = list(rep.notes)
    if rep.all_partitions:
        out["all_partitions"] = [
            [{"angle": a, "following_sector": p} for a, p in part]
            for part in rep.all_partitions]
    return out


def cmd_rays(args) -> tuple[dict, int]:
    if args.rays_command == "check":
        a = [parse_angle(t) for t in args.a.split(",") if t.strip()]
        b = [parse_angle(t) for t in args.b.split(",") if t.strip()]
        system = LabeledRaySystem.from_sets(a, b)
        rep = admissibility_check(system, angle_tol=args.angle_tol,
                                  all_solutions=args.all_partitions)
        payload = {"tool": "check",
                   "rays": [{"angle": r.angle, "label": r.label}
                            for r in system.rays],
                   "report": _admissibility_json(rep)}
        return {"payload": payload}, EXIT_OK
    if args.rays_command == "classify-lines":
        a1 = parse_angle(args.angle1)
        a2 = parse_angle(args.angle2)
        if args.parallel and abs(math.remainder(a1 - a2, math.pi)) > 1e-9:
            raise UsageError("--parallel requires equal direction angles")
        cls = classify_two_lines(a1, a2, zeros_on=args.zeros_on,
                                 coincident=args.identical)
        payload = {"tool": "classify-lines", "case": cls.case,
                   "zeros_on": cls.zeros_on,
                   "permitted_transcendental": list(cls.permitted_transcendental),
                   "permitted_polynomial": list(cls.permitted_polynomial),
                   "note": cls.note}
        return {"payload": payload}, EXIT_OK
    rep = three_ray_check(parse_angle(args.alpha), angle_tol=args.angle_tol)
    payload = {"tool": "three-ray", "alpha": rep.alpha,
               "verdict": rep.verdict, "rho": rep.rho,
               "exact_rays_possible": rep.exact_rays_possible,
               "existence_note": rep.existence_note,
               "admissibility": _admissibility_json(rep.admissibility)}
    return {"payload": payload}, EXIT_OK


# ---------------------------------------------------------------------------
# document assembly and entry point
# ---------------------------------------------------------------------------

def _emit_json(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, allow_nan=True) + "\n")


def _emit_csv(doc) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["re_E", "im_E", "re_value", "im_value", "err"])
    for row in doc["payload"]["values"]:
        writer.writerow([repr(row["E"]["re"]), repr(row["E"]["im"]),
                         repr(row["value"]["re"]), repr(row["value"]["im"]),
                         repr(row["err_estimate"])])
    sys.stdout.write(buf.getvalue())


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    doc = {"schema_version": SCHEMA_VERSION,
           "command": args.command, "argv": argv,
           "config": None, "payload": None, "status": "ok", "timing": None}
    t0 = time.perf_counter()
    try:
        doc["config"] = _config_echo(args)
        handler = {"eval": cmd_eval, "roots": cmd_roots,
                   "verify": cmd_verify, "rays": cmd_rays}[args.command]
        body, status = handler(args)
        doc.update(body)
        if status == EXIT_CHECK_FAILED:
            doc["status"] = "check_failed"
    except (UsageError, ValueError) as e:
        doc["status"] = "error"
        doc["error"] = {"type": type(e).__name__, "message": str(e)}
        print(f"error: {e}", file=sys.stderr)
        _emit_json(doc)
        return EXIT_USAGE
    except (WindingError, RootSearchBudgetError, StepSizeUnderflowError,
            AnchorRadiusError, DomainError, InternalConsistencyError) as e:
        doc["status"] = "error"
        doc["error"] = {"type": type(e).__name__, "message": str(e)}
        print(f"numerical failure: {e}", file=sys.stderr)
        _emit_json(doc)
        return EXIT_NUMERICAL
    if getattr(args, "timing", False):
        doc["timing"] = {"elapsed_seconds": time.perf_counter() - t0}
    if getattr(args, "format", "json") == "csv":
        _emit_csv(doc)
    else:
        _emit_json(doc)
    return status


if __name__ == "__main__":
    sys.exit(main())
