"""Decision procedures for labeled ray systems: which configurations of
zero-rays (A) and one-point rays (B) are structurally possible for a
transcendental entire function of finite order.

The admissibility conditions on a candidate partition of the plane into 2m
sectors by rays C_1..C_2m taken from A u B, at order rho = pi / (largest
angular gap), are:

  (i)   even sectors open exactly pi/rho, odd sectors at most pi/rho;
  (ii)  both boundary rays of an odd sector carry the same label;
  (iii) even sectors contain no rays of A u B in their interior;
  (iv)  rays inside an odd sector carry the label opposite to its boundary;
  (v)   odd sectors with empty interior open exactly pi/rho.

The checker enumerates partitions by increasing size and returns the first
satisfying assignment, or diagnostics for the attempt that got furthest.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

__all__ = [
    "Ray",
    "LabeledRaySystem",
    "SectorDiagnostics",
    "AdmissibilityReport",
    "TwoLineClassification",
    "ThreeRayReport",
    "admissibility_check",
    "classify_two_lines",
    "three_ray_check",
]

_TWO_PI = 2.0 * math.pi
CONDITION_ORDER = ("(i)", "(ii)", "(iii)", "(iv)", "(v)")


def _norm_angle(a: float) -> float:
    a = math.fmod(a, _TWO_PI)
    return a + _TWO_PI if a < 0 else a


@dataclass(frozen=True)
class Ray:
    angle: float           # [0, 2pi)
    label: str             # 'A' or 'B'

    def __post_init__(self):
        if self.label not in ("A", "B"):
            raise ValueError("ray label must be 'A' or 'B'")
        object.__setattr__(self, "angle", _norm_angle(self.angle))


@dataclass(frozen=True)
class LabeledRaySystem:
    """Finite set of labeled rays through the origin, sorted by angle.

    Every listed ray is assumed minimal (it carries infinitely many points of
    the corresponding set); that hypothesis cannot be checked here.
    """

    rays: tuple

    def __post_init__(self):
        rays = tuple(sorted((r if isinstance(r, Ray) else Ray(*r)
                             for r in self.rays), key=lambda r: r.angle))
        if not rays:
            raise ValueError("at least one ray is required")
        for r1, r2 in zip(rays, rays[1:]):
            if math.isclose(r1.angle, r2.angle, abs_tol=1e-12):
                raise ValueError(f"duplicate ray angle {r1.angle}")
        object.__setattr__(self, "rays", rays)

    @classmethod
    def from_sets(cls, a_angles, b_angles) -> "LabeledRaySystem":
        rays = [Ray(a, "A") for a in a_angles] + [Ray(b, "B") for b in b_angles]
        return cls(tuple(rays))

    @property
    def angles(self):
        return tuple(r.angle for r in self.rays)

    def largest_gap(self) -> float:
        ang = self.angles
        if len(ang) == 1:
            return _TWO_PI
        gaps = [b - a for a, b in zip(ang, ang[1:])]
        gaps.append(ang[0] + _TWO_PI - ang[-1])
        return max(gaps)

    def rotated(self, delta: float) -> "LabeledRaySystem":
        return LabeledRaySystem(tuple(Ray(r.angle + delta, r.label)
                                      for r in self.rays))

    def label_swapped(self) -> "LabeledRaySystem":
        flip = {"A": "B", "B": "A"}
        return LabeledRaySystem(tuple(Ray(r.angle, flip[r.label])
                                      for r in self.rays))


@dataclass
class SectorDiagnostics:
    index: int
    parity: str                    # 'even' or 'odd'
    start_angle: float
    end_angle: float
    opening: float
    boundary_labels: tuple
    interior: tuple                # ((angle, label), ...)
    passed: tuple = ()
    failed: tuple = ()


@dataclass
class AdmissibilityReport:
    admissible: bool
    rho: float | None
    omega_gap: float
    partition: tuple = ()          # ((angle, parity-of-following-sector), ...)
    sector_diagnostics: list = field(default_factory=list)
    failure_witness: str | None = None
    notes: tuple = ()
    all_partitions: list = field(default_factory=list)


def _try_partition(system: LabeledRaySystem, subset, parity_offset,
                   rho, angle_tol):
    """Evaluate conditions (i)-(v) for one partition/parity choice.

    Returns (ok, first_failed_condition, n_conditions_passed, sectors).
    """
    rays = system.rays
    n = len(rays)
    k = len(subset)
    target = math.pi / rho
    sectors = []
    for si in range(k):
        i0, i1 = subset[si], subset[(si + 1) % k]
        a0 = rays[i0].angle
        a1 = rays[i1].angle if si + 1 < k else rays[i1].angle + _TWO_PI
        opening = a1 - a0 if a1 > a0 else a1 - a0 + _TWO_PI
        interior = []
        for j in range(n):
            if j in subset:
                continue
            aj = rays[j].angle
            rel = (aj - a0) % _TWO_PI
            if angle_tol < rel < opening - angle_tol:
                interior.append((aj, rays[j].label))
        sectors.append(SectorDiagnostics(
            index=si + 1,
            parity="odd" if si % 2 == parity_offset else "even",
            start_angle=a0, end_angle=a1 % _TWO_PI, opening=opening,
            boundary_labels=(rays[i0].label, rays[i1].label),
            interior=tuple(interior)))

    def cond_i():
        for s in sectors:
            if s.parity == "even":
                if abs(s.opening - target) > angle_tol:
                    return False
            elif s.opening > target + angle_tol:
                return False
        return True

    def cond_ii():
        return all(s.boundary_labels[0] == s.boundary_labels[1]
                   for s in sectors if s.parity == "odd")

    def cond_iii():
        return all(not s.interior for s in sectors if s.parity == "even")

    def cond_iv():
        for s in sectors:
            if s.parity == "odd" and s.interior:
                boundary = s.boundary_labels[0]
                if any(lab == boundary for _, lab in s.interior):
                    return False
        return True

    def cond_v():
        return all(abs(s.opening - target) <= angle_tol
                   for s in sectors if s.parity == "odd" and not s.interior)

    checks = dict(zip(CONDITION_ORDER, (cond_i, cond_ii, cond_iii,
                                        cond_iv, cond_v)))
    passed = []
    for name in CONDITION_ORDER:
        if checks[name]():
            passed.append(name)
        else:
            for s in sectors:
                s.passed = tuple(passed)
                s.failed = (name,)
            return False, name, len(passed), sectors
    for s in sectors:
        s.passed = tuple(passed)
    return True, None, len(passed), sectors


def admissibility_check(system: LabeledRaySystem,
                        angle_tol: float = 1e-9,
                        all_solutions: bool = False) -> AdmissibilityReport:
    """Decide admissibility at the forced order rho = pi / largest gap.

    Partitions are tried in increasing cardinality; the first success is
    reported. When everything fails, the witness is the first violated
    condition of the attempt that passed the longest prefix of (i)-(v).
    """
    if angle_tol <= 0:
        raise ValueError("angle_tol must be positive")
    gap = system.largest_gap()
    rho = math.pi / gap
    report = AdmissibilityReport(admissible=False, rho=None, omega_gap=gap)
    if rho <= 0.5 + angle_tol:
        report.failure_witness = "rho_bound"
        report.notes = ("required order pi/omega_gap does not exceed 1/2",)
        return report

    n = len(system.rays)
    best = (-1, None, None)      # (prefix length, condition, sectors)
    for size in range(2, n + 1, 2):
        for subset in itertools.combinations(range(n), size):
            for parity_offset in (0, 1):
                ok, failed, npass, sectors = _try_partition(
                    system, subset, parity_offset, rho, angle_tol)
                if ok:
                    partition = tuple(
                        (system.rays[i].angle, sectors[si].parity)
                        for si, i in enumerate(subset))
                    if not report.admissible:
                        report.admissible = True
                        report.rho = rho
                        report.partition = partition
                        report.sector_diagnostics = sectors
                        report.failure_witness = None
                    report.all_partitions.append(partition)
                    if not all_solutions:
                        return report
                elif npass > best[0]:
                    best = (npass, failed, sectors)
    if report.admissible:
        return report
    report.failure_witness = best[1] if best[1] is not None else "(i)"
    report.sector_diagnostics = best[2] or []
    return report


@dataclass(frozen=True)
class TwoLineClassification:
    case: str                      # parallel | intersecting | identical
    zeros_on: int
    permitted_transcendental: tuple
    permitted_polynomial: tuple
    note: str = ""


def classify_two_lines(line1_angle: float, line2_angle: float,
                       zeros_on: int = 1, coincident: bool = False,
                       angle_tol: float = 1e-9) -> TwoLineClassification:
    """Exhaustive list of entire functions with all zeros on one full line and
    all 1-points on another.

    Two distinct parallel lines admit only P(e^{az}); two intersecting lines
    only e^{az+b}, 1-e^{az+b}, and polynomials of degree at most 2. Identical
    lines are outside both statements.
    """
    if zeros_on not in (1, 2):
        raise ValueError("zeros_on must be 1 or 2")
    d = abs(math.remainder(line1_angle - line2_angle, math.pi))
    parallel = d <= angle_tol or abs(d - math.pi) <= angle_tol
    if parallel and coincident:
        return TwoLineClassification(
            case="identical", zeros_on=zeros_on,
            permitted_transcendental=(), permitted_polynomial=(),
            note="identical lines: unconstrained by these theorems")
    if parallel:
        return TwoLineClassification(
            case="parallel", zeros_on=zeros_on,
            permitted_transcendental=("P(exp(a*z)), P a polynomial, a complex",),
            permitted_polynomial=(),
            note="distinct parallel lines")
    return TwoLineClassification(
        case="intersecting", zeros_on=zeros_on,
        permitted_transcendental=("exp(a*z+b)", "1-exp(a*z+b)"),
        permitted_polynomial=("polynomial of degree <= 2",),
        note="distinct intersecting lines")


@dataclass
class ThreeRayReport:
    alpha: float
    verdict: str                   # admissible | boundary | inadmissible
    rho: float | None
    exact_rays_possible: bool | None
    existence_note: str
    admissibility: AdmissibilityReport


def three_ray_check(alpha: float, angle_tol: float = 1e-9) -> ThreeRayReport:
    """The symmetric configuration: zeros on the positive ray, 1-points on
    the pair at angles +-alpha.

    alpha < pi/2: structurally admissible at order pi/(2 pi - 2 alpha);
    alpha = pi/2: impossible exactly on the rays, possible close to them at
    order 1 (the 1/Gamma(-z) configuration); alpha > pi/2: impossible even
    close to the rays.
    """
    if not 0.0 < alpha < math.pi:
        raise ValueError("alpha must lie in (0, pi)")
    system = LabeledRaySystem.from_sets([0.0], [alpha, _TWO_PI - alpha])
    rep = admissibility_check(system, angle_tol)
    if abs(alpha - math.pi / 2) <= angle_tol:
        return ThreeRayReport(
            alpha=alpha, verdict="boundary", rho=1.0,
            exact_rays_possible=False,
            existence_note=("no transcendental entire function with zeros and "
                            "1-points exactly on these rays; close to the rays "
                            "order 1 occurs (reciprocal-Gamma family)"),
            admissibility=rep)
    if alpha > math.pi / 2:
        return ThreeRayReport(
            alpha=alpha, verdict="inadmissible", rho=None,
            exact_rays_possible=False,
            existence_note="excluded even for zeros/1-points close to the rays",
            admissibility=rep)
    rho = math.pi / (_TWO_PI - 2.0 * alpha)
    m_exact = _matching_sector_count(alpha, angle_tol)
    if m_exact is not None:
        note = (f"realized exactly on the rays by the m={m_exact} "
                "Stokes-multiplier construction")
    else:
        note = ("structurally admissible; existence exactly on the rays is "
                "open at this angle")
    return ThreeRayReport(alpha=alpha, verdict="admissible", rho=rho,
                          exact_rays_possible=None if m_exact is None else True,
                          existence_note=note, admissibility=rep)


def _matching_sector_count(alpha: float, tol: float):
    """m >= 3 with alpha = 2 pi/(m+2), if one exists within tolerance."""
    m = round(_TWO_PI / alpha) - 2
    if m >= 3 and abs(alpha - _TWO_PI / (m + 2)) <= max(tol, 1e-9):
        return m
    return None
