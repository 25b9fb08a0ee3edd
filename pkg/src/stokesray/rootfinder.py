"""Certified zero location for analytic functions on E-plane regions.

Counting uses the argument principle along adaptively refined contours
(phase increment per step < pi/2), location uses quad-tree subdivision plus
Newton refinement, and every simple root is certified by a winding-number-one
isolating circle. Also: predicted eigenvalue rays, radial-distribution
verification, and growth-order estimation.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .sibuya import ProblemSpec
from .spectral import make_handle

__all__ = [
    "Region",
    "Rectangle",
    "Disk",
    "RootRecord",
    "BoundaryProblem",
    "RadialReport",
    "WindingError",
    "RootSearchBudgetError",
    "OrderEstimateError",
    "winding_count",
    "find_roots",
    "eigenvalues_nk",
    "predicted_ray",
    "verify_radial",
    "order_estimate",
]


class WindingError(RuntimeError):
    """Could not certify a winding number (boundary zero or refinement cap)."""


class RootSearchBudgetError(RuntimeError):
    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


class OrderEstimateError(RuntimeError):
    pass


class Region:
    kind = "region"


@dataclass(frozen=True)
class Rectangle(Region):
    x0: float
    x1: float
    y0: float
    y1: float
    kind = "rectangle"

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("rectangle must have positive area")

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    @property
    def diameter(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.x0 - pad <= z.real <= self.x1 + pad
                and self.y0 - pad <= z.imag <= self.y1 + pad)

    def boundary_point(self, t: float) -> complex:
        """Counterclockwise, t in [0, 1), corners at t = 0, .25, .5, .75."""
        t = t % 1.0
        w, h = self.x1 - self.x0, self.y1 - self.y0
        s = 4.0 * t
        if s < 1.0:
            return complex(self.x0 + s * w, self.y0)
        if s < 2.0:
            return complex(self.x1, self.y0 + (s - 1.0) * h)
        if s < 3.0:
            return complex(self.x1 - (s - 2.0) * w, self.y1)
        return complex(self.x0, self.y1 - (s - 3.0) * h)

    def inflated(self, amount: float) -> "Rectangle":
        return Rectangle(self.x0 - amount, self.x1 + amount,
                         self.y0 - amount, self.y1 + amount)

    def split(self, fx: float = 0.5, fy: float = 0.5):
        xm = self.x0 + fx * (self.x1 - self.x0)
        ym = self.y0 + fy * (self.y1 - self.y0)
        return (Rectangle(self.x0, xm, self.y0, ym),
                Rectangle(xm, self.x1, self.y0, ym),
                Rectangle(self.x0, xm, ym, self.y1),
                Rectangle(xm, self.x1, ym, self.y1))


@dataclass(frozen=True)
class Disk(Region):
    center_point: complex
    radius: float
    kind = "disk"

    def __post_init__(self):
        object.__setattr__(self, "center_point", complex(self.center_point))
        if not self.radius > 0:
            raise ValueError("disk must have positive radius")

    @property
    def center(self) -> complex:
        return self.center_point

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return abs(z - self.center_point) <= self.radius + pad

    def boundary_point(self, t: float) -> complex:
        return self.center_point + self.radius * cmath.exp(2j * cmath.pi * t)

    def inflated(self, amount: float) -> "Disk":
        return Disk(self.center_point, self.radius + amount)

    def bounding_rectangle(self) -> Rectangle:
        c, r = self.center_point, self.radius
        return Rectangle(c.real - r, c.real + r, c.imag - r, c.imag + r)


@dataclass
class RootRecord:
    location: complex
    winding_certificate: int
    residual: float
    angular_deviation: float | None = None

    def sort_key(self):
        return (abs(self.location), cmath.phase(self.location))


@dataclass(frozen=True)
class BoundaryProblem:
    """Boundary condition y -> 0 in S_n and S_k; discrete spectrum requires
    the sectors to be neither equal nor adjacent (mod m+2)."""

    m: int
    n: int
    k: int

    def __post_init__(self):
        if self.m < 3:
            raise ValueError("m must be >= 3")
        p = self.m + 2
        n, k = self.n % p, self.k % p
        if n == k or n == (k + 1) % p or n == (k - 1) % p:
            raise ValueError(
                f"boundary problem ({self.n},{self.k}) has no discrete "
                f"spectrum: sectors must satisfy n != k, k+-1 (mod {p})")


# ---------------------------------------------------------------------------
# Winding numbers
# ---------------------------------------------------------------------------

_PHASE_CAP = math.pi / 2
_MAG_CAP = 1.2          # max |d log|F|| per step; guards phase aliasing
_GOLDEN = 0.3819660112501051   # 2 - golden ratio: irrational split fraction
_MAX_CONTOUR_EVALS = 60_000
_BOUNDARY_NUDGES = 3


def _winding_once(F, region: Region, floor_rel: float, n0: int):
    """Total phase change / 2pi along the boundary, refined until each step
    moves the phase by < pi/2 *and* log|F| by < _MAG_CAP (the phase criterion
    alone aliases full turns on oscillatory stretches).

    Raises WindingError on a suspected boundary zero.
    """
    # Staggered initial grid (golden-ratio offsets): a uniform grid can alias
    # an exact multiple of 2pi per step into "small" increments.
    ts = sorted({(i + f) / n0 for i in range(n0) for f in (0.0, _GOLDEN)})
    ts.append(1.0)
    vals = [F(region.boundary_point(t)) for t in ts]
    nevals = len(ts)
    if max(abs(v) for v in vals) == 0.0:
        raise WindingError("function vanishes identically on contour samples")
    i = 0
    total = 0.0
    while i < len(ts) - 1:
        v0, v1 = vals[i], vals[i + 1]
        a0, a1 = abs(v0), abs(v1)
        # |F| legitimately swings over many e-folds along these contours, so
        # zero detection is local: an adjacent-sample collapse or an exact zero
        if min(a0, a1) <= floor_rel * max(a0, a1):
            raise WindingError("suspected zero on the contour")
        ratio = v1 / v0
        dphi = cmath.phase(ratio)
        if abs(dphi) < _PHASE_CAP and abs(math.log(abs(ratio))) < _MAG_CAP:
            total += dphi
            i += 1
            continue
        if (ts[i + 1] - ts[i]) < 1.0 / _MAX_CONTOUR_EVALS:
            raise WindingError("unresolvable phase jump: zero on the contour?")
        if nevals >= _MAX_CONTOUR_EVALS:
            raise WindingError("contour refinement cap exceeded")
        tm = ts[i] + _GOLDEN * (ts[i + 1] - ts[i])
        ts.insert(i + 1, tm)
        vals.insert(i + 1, F(region.boundary_point(tm)))
        nevals += 1
    w = total / (2 * math.pi)
    wr = round(w)
    if abs(w - wr) > 0.25:
        raise WindingError(f"winding {w} did not settle near an integer")
    return int(wr)


def winding_count(F, region: Region, tol: float = 1e-12, n0: int = 31,
                  max_nudges: int = _BOUNDARY_NUDGES) -> int:
    """Number of zeros (with multiplicity) of F inside the region.

    F must be analytic on the closure; zeros on the boundary are dodged by
    inflating the contour a few times before giving up. Nudging must be
    disabled (max_nudges=0) when counts over a partition have to add up.
    """
    current = region
    for attempt in range(max_nudges + 1):
        try:
            return _winding_once(F, current, tol, n0)
        except WindingError:
            if attempt == max_nudges:
                raise
            current = region.inflated(1e-3 * region.diameter * 3 ** attempt)
    raise WindingError("unreachable")


# ---------------------------------------------------------------------------
# Root search
# ---------------------------------------------------------------------------

def _newton(F, dF, x0, tol, max_iter=60, bound=None):
    """Newton iteration; returns (x, f_at_x, converged, last_step).

    With `bound` = (center, radius), iterates escaping the trust disk abort
    early (the caller subdivides instead of chasing a foreign basin).
    """
    x = complex(x0)
    fx = F(x)
    last = math.inf
    for _ in range(max_iter):
        d = dF(x)
        if d == 0:
            return x, fx, False, last
        step = fx / d
        x1 = x - step
        if bound is not None and abs(x1 - bound[0]) > bound[1]:
            return x, fx, False, last
        fx1 = F(x1)
        last = abs(step)
        x, fx = x1, fx1
        if last <= tol * (1.0 + abs(x)):
            return x, fx, True, last
    return x, fx, False, last


def _central_diff(F):
    def dF(E):
        h = 1e-6 * (1.0 + abs(E))
        return (F(E + h) - F(E - h)) / (2 * h)
    return dF


def _split_consistent(F, cell: Rectangle, parent_count, tol, budget):
    """Split a cell into 4 children whose winding counts add up to the parent;
    shifts the split lines when a zero sits on them."""
    n0 = max(13, 2 * parent_count)
    for off in (0.0, 0.037, -0.053, 0.081, 0.124, -0.139):
        children = cell.split(0.5 + off, 0.5 + off)
        try:
            counts = [winding_count(F, ch, tol, n0=n0, max_nudges=0)
                      for ch in children]
        except WindingError:
            continue
        budget["evals"] += 4
        if sum(counts) == parent_count:
            return children, counts
    raise WindingError(f"could not split cell {cell} consistently")


def _unresolved_record(F, cell, count) -> RootRecord:
    """Record for a cell that cannot be split further: a multiple root or a
    cluster below resolution, reported without Newton refinement."""
    scale = max(abs(F(cell.boundary_point(i / 8))) for i in range(8))
    resid = abs(F(cell.center)) / scale if scale > 0 else math.inf
    return RootRecord(cell.center, count, resid)


def _certify(F, root, count_hint, cell_diam, residual_floor, refine, tol):
    """Isolating circle around a refined root: winding 1 and a residual
    measured against the local scale max|F| on the circle."""
    rc = max(1e-3 * (1.0 + abs(root)), 1e3 * tol * (1.0 + abs(root)))
    rc = min(rc, max(cell_diam, 1e-6))
    circle = Disk(root, rc)
    w = winding_count(F, circle, tol=1e-13, n0=13)
    samples = [abs(F(circle.boundary_point(i / 16))) for i in range(16)]
    scale = max(samples)
    fval = abs((refine or F)(root))
    residual = fval / scale if scale > 0 else math.inf
    return w, residual


def find_roots(F, region: Region, max_roots: int = 64, tol: float = 1e-10,
               dF=None, coarse=None, refine=None,
               residual_floor: float = 1e-9,
               max_cells: int = 4096) -> list[RootRecord]:
    """Locate all zeros of F in the region as certified RootRecords.

    Subdivides until each cell holds one zero, then polishes by Newton using
    dF (falling back to central differences) and certifies on a final circle.
    `coarse` (cheap F) drives counting; `refine` (high-accuracy F) drives the
    final residual. Records are sorted by modulus, then argument.
    """
    Fc = coarse or F
    dF = dF or _central_diff(F)
    base = region.bounding_rectangle() if isinstance(region, Disk) else region
    total = winding_count(Fc, base, tol=1e-13, n0=61)
    if total > max_roots:
        raise ValueError(f"{total} zeros counted, exceeding max_roots={max_roots}")
    budget = {"evals": 0}
    work = [(base, total)]
    found: list[RootRecord] = []
    cells_seen = 0
    min_diam = max(tol * 100, 1e-9) * (1.0 + abs(base.center))

    while work:
        work.sort(key=lambda wc: wc[0].diameter, reverse=True)
        cell, count = work.pop(0)
        cells_seen += 1
        if cells_seen > max_cells:
            raise RootSearchBudgetError("cell budget exhausted",
                                        partial=sorted(found, key=RootRecord.sort_key))
        if count == 0:
            continue
        if count == 1:
            root, fval, ok, last = _newton(F, dF, cell.center, tol,
                                           max_iter=60,
                                           bound=(cell.center, cell.diameter))
            inside = cell.contains(root)
            if ok and inside:
                w, residual = _certify(F, root, count, cell.diameter,
                                       residual_floor, refine, tol)
                if w >= 1:
                    # w > 1 happens when a multiple zero sits on a split line
                    # and each side counted a half-turn share; the isolating
                    # circle is the authoritative count
                    found.append(RootRecord(root, w, residual))
                    continue
        if cell.diameter < min_diam:
            # multiple root (or cluster below resolution): no Newton polish
            found.append(_unresolved_record(F, cell, count))
            continue
        try:
            children, counts = _split_consistent(Fc, cell, count, 1e-13,
                                                 budget)
        except WindingError:
            # every candidate split line runs into the zero set: the cell
            # itself is the multiplicity witness
            found.append(_unresolved_record(F, cell, count))
            continue
        work.extend((ch, c) for ch, c in zip(children, counts) if c > 0)

    # de-duplicate (overlapping Newton basins near shared cell edges)
    found.sort(key=RootRecord.sort_key)
    dedup: list[RootRecord] = []
    for rec in found:
        dup = next((r for r in dedup
                    if abs(r.location - rec.location)
                    <= 1e-6 * (1.0 + abs(rec.location))), None)
        if dup is None:
            dedup.append(rec)
        elif (rec.winding_certificate, -rec.residual) > \
                (dup.winding_certificate, -dup.residual):
            dedup[dedup.index(dup)] = rec
    accounted = sum(r.winding_certificate for r in dedup)
    if accounted != total:
        raise WindingError(
            f"root accounting mismatch: counted {total}, certified {accounted}")
    if isinstance(region, Disk):
        dedup = [r for r in dedup
                 if region.contains(r.location, pad=1e-9 * region.radius)]
    return dedup


def eigenvalues_nk(problem: BoundaryProblem, region: Region,
                   tol: float = 1e-10,
                   rel_tol: float = 1e-12) -> list[RootRecord]:
    """Certified zeros of E -> W_{n,k}(E): the spectrum of the boundary
    problem requiring decay in S_n and S_k."""
    handle = make_handle(problem.m, "W", problem.n, problem.k,
                         rel_tol=rel_tol)
    coarse = handle.with_tolerances(rel_tol=1e-6, target_rel=None)
    refine = handle.with_tolerances(target_rel=1e-12)
    return find_roots(handle, region, max_roots=256, tol=tol,
                      dF=handle.derivative, coarse=coarse, refine=refine)


def predicted_ray(m: int, n: int, k: int) -> float:
    """Angle of the ray carrying the (n,k) eigenvalues: the argument of
    1/(omega1 omega2) for the unit bisectors of S_n, S_k, in (-pi, pi]."""
    BoundaryProblem(m, n, k)   # validates the discreteness condition
    angle = -2.0 * math.pi * (n + k) / (m + 2)
    wrapped = math.remainder(angle, 2 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    return wrapped


@dataclass
class RadialReport:
    angle: float
    angular_tol: float
    max_deviation: float
    passed: bool
    n_checked: int
    n_skipped: int
    deviations: list = field(default_factory=list)


def verify_radial(roots: list[RootRecord], angle: float,
                  angular_tol: float = 1e-6) -> RadialReport:
    """Check that roots lie on the ray at `angle`; fills angular_deviation.

    Roots with |location| <= 1e-6 are skipped (argument undefined at 0).
    """
    if not roots:
        raise ValueError("empty root list")
    max_dev = 0.0
    checked = skipped = 0
    devs = []
    for rec in roots:
        if abs(rec.location) <= 1e-6:
            skipped += 1
            continue
        dev = abs(math.remainder(cmath.phase(rec.location) - angle,
                                 2 * math.pi))
        rec.angular_deviation = dev
        devs.append(dev)
        max_dev = max(max_dev, dev)
        checked += 1
    return RadialReport(angle=angle, angular_tol=angular_tol,
                        max_deviation=max_dev,
                        passed=(checked > 0 and max_dev <= angular_tol),
                        n_checked=checked, n_skipped=skipped,
                        deviations=devs)


def order_estimate(F, radii, samples_per_unit: float = 4.0) -> float:
    """Least-squares slope of log log M(r) against log r, M(r) = max |F| over
    a sampled circle of radius r (sample count grows with r).

    Radii with M(r) <= 1 are dropped; at least three must survive.
    """
    radii = sorted(float(r) for r in radii)
    if len(radii) < 3:
        raise OrderEstimateError("need at least three radii")
    xs, ys = [], []
    for r in radii:
        n = max(32, int(math.ceil(samples_per_unit * r)))
        mr = max(abs(F(r * cmath.exp(2j * cmath.pi * i / n)))
                 for i in range(n))
        if mr <= 1.0:
            continue
        xs.append(math.log(r))
        ys.append(math.log(math.log(mr)))
    if len(xs) < 3:
        raise OrderEstimateError(
            "fewer than three radii with M(r) > 1; cannot estimate order")
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope
