"""Wronskians, the Stokes multiplier C(E) = W_{-1,1}/W_{0,1}, and the derived
entire functions g, f, h, with internal consistency checks.

Conditioning notes. Every pair (i, j) reduces by rotation covariance to
W_{i,j}(E) = omega^{-i} W_{0,d}(omega^{2i} E) with d = j - i. For adjacent
pairs (d = 1) the two Wronskian terms have exponentially cancelling leading
behavior at every z, so W_{0,1} is evaluated from pure asymptotic-series
frames at the S0/S1 boundary angle, where the exponential factors drop out
structurally; this is accurate to ~1e-13 at all phases of E. For other d the
Wronskian is assembled from frames at z = 0, where term magnitudes are
smallest, and the loss to cancellation is *measured* per evaluation; when the
estimated error exceeds the requested target the frames are recomputed in
extended precision (gmpy2) at a reduced anchor radius. Near the positive real
axis, where C's zeros lie, this loss reaches ~10^6, so double precision alone
cannot certify those roots to spec tolerances.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

from .backend import BUILTIN, gmp_context, precision_guard
from .ode import DEFAULT_REL_TOL
from .sibuya import (AnchorPolicy, DEFAULT_POLICY, ProblemSpec, anchor_radius,
                     _seed_frame_raw, _seed_truncation_estimate, _y0_origin,
                     evaluate_y0, _make_qfun)

__all__ = [
    "SpectralValue",
    "InternalConsistencyError",
    "ConventionError",
    "wronskian",
    "stokes_C",
    "spectral_g",
    "spectral_f",
    "spectral_h",
    "connection_residual",
    "SpectralFunction",
    "make_handle",
    "SPECTRAL_TAGS",
]

DEFAULT_TARGET_REL = 1e-10

# Escalation ladder: (backend bits or None for f64, integration rel_tol,
# anchor policy). The extended rungs use a smaller anchor radius with a
# deeper series: fewer e-folds to integrate at the expensive precision.
_EXTENDED_POLICY = AnchorPolicy(r_min=4.0, transport_order=26, xi_order=30)
_LADDER = ((None, None, None),
           (113, 1e-17, _EXTENDED_POLICY),
           (166, 1e-21, _EXTENDED_POLICY))

# Safety factor applied to accumulated frame error estimates (they track
# local truncation, not global amplification).
_ERR_SAFETY = 10.0


class InternalConsistencyError(RuntimeError):
    """A mathematically guaranteed identity failed beyond its error budget."""


class ConventionError(InternalConsistencyError):
    """Startup self-test detected a flipped sign/rotation convention."""


@dataclass(frozen=True)
class SpectralValue:
    E: complex
    value: complex
    err_estimate: float  # relative to |value|


def _omega_pow(m: int, j: int) -> complex:
    """omega^j = exp(2 pi i j / (m+2)), canonicalized."""
    j %= m + 2
    if j == 0:
        return 1.0 + 0j
    return cmath.exp(2j * cmath.pi * j / (m + 2))


def _rot(m: int, E: complex, j: int) -> complex:
    """omega^j * E with deterministic floats for caching."""
    j %= m + 2
    if j == 0:
        return complex(E)
    return _omega_pow(m, j) * E


# ---------------------------------------------------------------------------
# W_{0,1} from boundary-angle seed frames (cancellation-free at all phases)
# ---------------------------------------------------------------------------

def _w01_seed(m: int, E: complex, rel_tol: float,
              policy: AnchorPolicy = DEFAULT_POLICY):
    """W_{0,1}(E) = exp(-W0 - W1) (p0 - omega^-1 p1) at the S0/S1 boundary.

    W0, p0 belong to y0(., E) at z* = R e^{i pi/(m+2)}; W1, p1 to
    y0(., omega^2 E) at omega^-1 z*. Both are pure seed evaluations.
    """
    ctx = BUILTIN
    R = anchor_radius(ProblemSpec(m, E), rel_tol, policy, ctx)
    nmax, jmax = policy.orders_for(ctx)
    est = _seed_truncation_estimate(m, nmax, jmax, R, abs(E))
    zstar = R * cmath.exp(1j * math.pi / (m + 2))
    omega = _omega_pow(m, 1)
    (one0, mp0), negW0 = _seed_frame_raw(m, complex(E), zstar, ctx, nmax, jmax)
    E1 = _rot(m, E, 2)
    (one1, mp1), negW1 = _seed_frame_raw(m, E1, zstar / omega, ctx, nmax, jmax)
    p0, p1 = -mp0, -mp1
    diff = p0 - p1 / omega
    val = cmath.exp(negW0 + negW1) * diff
    psum = abs(p0) + abs(p1)
    cond = psum / abs(diff) if diff != 0 else math.inf
    err = 2 * est * (1.0 + cond) + ctx.eps * (2.0 + abs(negW0 + negW1) + cond)
    return val, err


def w01_constant(m: int) -> complex:
    """The exact adjacent-pair Wronskian 2i omega^{-1/2} (validation target)."""
    return 2j * cmath.exp(-1j * cmath.pi / (m + 2))


# ---------------------------------------------------------------------------
# General W_{0,d} from frames at the origin, with precision escalation
# ---------------------------------------------------------------------------

def _w0d_frames(m: int, E: complex, d: int, rel_tol: float, rung: int,
                with_var: bool):
    """Raw Wronskian data for (0, d) at one precision rung.

    Returns (value, rel_err_estimate, maxterm, derivative or None).
    """
    bits, tol, policy = _LADDER[rung]
    if bits is None:
        ctx, tol, policy = BUILTIN, rel_tol, DEFAULT_POLICY
    else:
        ctx = gmp_context(bits)
    Ed = _rot(m, E, 2 * d)
    b0, v0 = _y0_origin(ProblemSpec(m, complex(E)), tol, ctx=ctx,
                        policy=policy, with_var=with_var)
    bd, vd = _y0_origin(ProblemSpec(m, Ed), tol, ctx=ctx,
                        policy=policy, with_var=with_var)
    chain = _omega_pow(m, -d)
    with precision_guard(ctx):
        w_off = ctx.exp(b0.off + bd.off)
        t1 = b0.y * (chain * bd.dy) * w_off
        t2 = b0.dy * bd.y * w_off
        w = t1 - t2
        value = ctx.to_complex(w)
        maxterm = max(ctx.absval(t1), ctx.absval(t2))
        deriv = None
        if with_var:
            rot2d = _omega_pow(m, 2 * d)
            dw = (v0.y * (chain * bd.dy) + b0.y * (chain * rot2d * vd.dy)
                  - v0.dy * bd.y - b0.dy * (rot2d * vd.y)) * w_off
            deriv = ctx.to_complex(dw)
    frame_err = b0.err + bd.err + ctx.eps * (2.0 + abs(complex(b0.off + bd.off)))
    if value == 0:
        rel = math.inf
    else:
        rel = _ERR_SAFETY * frame_err * maxterm / abs(value)
    return value, rel, maxterm, deriv


def _w0d(m: int, E: complex, d: int, rel_tol: float, target_rel,
         with_var: bool = False, min_rung: int = 0):
    """W_{0,d}(E) escalating through the precision ladder until the measured
    cancellation-amplified error is below target_rel (or the ladder ends)."""
    rung = min_rung
    while True:
        value, rel, maxterm, deriv = _w0d_frames(m, E, d, rel_tol, rung,
                                                 with_var)
        if target_rel is None or rel <= target_rel or rung == len(_LADDER) - 1:
            return value, rel, deriv
        rung += 1


def wronskian(spec: ProblemSpec, i: int, j: int,
              rel_tol: float = DEFAULT_REL_TOL,
              target_rel: float | None = DEFAULT_TARGET_REL) -> SpectralValue:
    """W_{i,j}(E) = y_i(0) y_j'(0) - y_i'(0) y_j(0), an entire function of E.

    Reduced to W_{0, j-i} at rotated energy; adjacent pairs go through the
    boundary-angle seed route, others through origin frames with automatic
    extended-precision escalation.
    """
    m = spec.m
    d = (j - i) % (m + 2)
    if d == 0:
        return SpectralValue(spec.E, 0j, 0.0)
    sign = 1.0
    if d > (m + 2) - d:          # W_{0,d} = -W_{d,0} rotated: use smaller gap
        i, j = j, i
        d = (m + 2) - d
        sign = -1.0
    Ei = _rot(m, spec.E, 2 * (i % (m + 2)))
    pref = sign * _omega_pow(m, -i)
    if d == 1:
        val, err = _w01_seed(m, Ei, rel_tol)
        return SpectralValue(spec.E, pref * val, err)
    val, err, _ = _w0d(m, Ei, d, rel_tol, target_rel)
    return SpectralValue(spec.E, pref * val, err)


# ---------------------------------------------------------------------------
# Stokes multiplier and derived entire functions
# ---------------------------------------------------------------------------

def _stokes_C_raw(m: int, E: complex, rel_tol: float, target_rel,
                  with_var: bool = False, min_rung: int = 0):
    """C(E) = W_{-1,1}/W_{0,1}; optionally also dC/dE. Returns (C, rel_err, C')."""
    E_m1 = _rot(m, E, -2)
    num, nerr, nderiv = _w0d(m, E_m1, 2, rel_tol, target_rel,
                             with_var=with_var, min_rung=min_rung)
    om = _omega_pow(m, 1)
    num_full = om * num
    den, derr = _w01_seed(m, E, rel_tol)
    C = num_full / den
    err = nerr + derr
    dC = None
    if with_var:
        # d/dE [omega W_{0,2}(omega^-2 E)] = omega^-1 W_{0,2}'(omega^-2 E)
        dC = (nderiv / om) / den
    return C, err, dC


def _c_pair_product(m: int, E: complex, j1: int, j2: int, rel_tol: float,
                    target_rel):
    """C(omega^{j1} E) * C(omega^{j2} E) with escalation driven by the
    *product's* cancellation against the combination it enters.

    Returns (c1, c2, e1, e2) at the chosen precision rung. Functions of the
    form a - product (g, f, f-1) are exponentially smaller than the product
    in their decay sectors, so the factors may need more digits than their
    own conditioning would demand; callers re-invoke with a higher min_rung
    via the closure this returns.
    """
    def at_rung(rung):
        c1, e1, _ = _stokes_C_raw(m, _rot(m, E, j1), rel_tol, target_rel,
                                  min_rung=rung)
        c2, e2, _ = _stokes_C_raw(m, _rot(m, E, j2), rel_tol, target_rel,
                                  min_rung=rung)
        return c1, c2, e1, e2
    return at_rung


def _escalated_product_minus(m, E, j1, j2, shift, pref, rel_tol, target_rel):
    """pref * (C(w^j1 E) C(w^j2 E) - shift), recomputing the factors at higher
    precision when the subtraction cancels below target_rel."""
    at_rung = _c_pair_product(m, E, j1, j2, rel_tol, target_rel)
    rung = 0
    while True:
        c1, c2, e1, e2 = at_rung(rung)
        prod = c1 * c2
        val = pref * (prod - shift)
        if val == 0:
            err = math.inf
        else:
            err = (e1 + e2 + _LADDER_EPS[rung]) * abs(prod) / abs(val)
        if target_rel is None or err <= target_rel or rung == len(_LADDER) - 1:
            return val, err
        rung += 1


# spare relative error of each rung's arithmetic (enters even when the
# Wronskian assembly itself did not need escalation)
_LADDER_EPS = (2.0 ** -50, 2.0 ** -110, 2.0 ** -160)


@lru_cache(maxsize=None)
def _convention_selftest(m: int) -> bool:
    """C(0) must equal 1 + omega; the conjugate/reciprocal patterns flag a
    flipped Wronskian sign or rotation direction."""
    C0, _, _ = _stokes_C_raw(m, 0j, 1e-10, None)
    target = 1 + _omega_pow(m, 1)
    if abs(C0 - target) <= 1e-6 * abs(target):
        return True
    for label, pattern in (("conjugate", target.conjugate()),
                           ("reciprocal", 1 / target),
                           ("conjugate-reciprocal", 1 / target.conjugate())):
        if abs(C0 - pattern) <= 1e-6 * abs(pattern):
            raise ConventionError(
                f"C(0) for m={m} matches the {label} of 1+omega: "
                "Wronskian sign or rotation direction is flipped")
    raise InternalConsistencyError(
        f"C(0) for m={m} is {C0}, expected {target}")


def stokes_C(spec: ProblemSpec, rel_tol: float = DEFAULT_REL_TOL,
             target_rel: float | None = DEFAULT_TARGET_REL) -> SpectralValue:
    """The Stokes multiplier in y_{-1} = C(E) y_0 - omega y_1."""
    _convention_selftest(spec.m)
    den, derr = _w01_seed(spec.m, spec.E, rel_tol)
    if abs(den) < 1e-6 * abs(w01_constant(spec.m)):
        raise InternalConsistencyError(
            f"|W_01({spec.E})| = {abs(den)} collapsed; integration failure")
    C, err, _ = _stokes_C_raw(spec.m, spec.E, rel_tol, target_rel)
    return SpectralValue(spec.E, C, err)


def spectral_g(spec: ProblemSpec, rel_tol: float = DEFAULT_REL_TOL,
               target_rel: float | None = DEFAULT_TARGET_REL) -> SpectralValue:
    """g(E) = C(E) C(omega^2 E) - omega; zeros on the ray arg E = -2pi/(m+2)."""
    m = spec.m
    _convention_selftest(m)
    c1, e1, _ = _stokes_C_raw(m, spec.E, rel_tol, target_rel)
    c2, e2, _ = _stokes_C_raw(m, _rot(m, spec.E, 2), rel_tol, target_rel)
    prod = c1 * c2
    val = prod - _omega_pow(m, 1)
    err = (e1 + e2) * abs(prod) / abs(val) if val != 0 else math.inf
    return SpectralValue(spec.E, val, err)


def spectral_h(spec: ProblemSpec, rel_tol: float = DEFAULT_REL_TOL,
               target_rel: float | None = DEFAULT_TARGET_REL) -> SpectralValue:
    """h(E) = C(E)/sqrt(omega), with the fixed branch epsilon = e^{i pi/(m+2)}."""
    c = stokes_C(spec, rel_tol, target_rel)
    eps = cmath.exp(1j * cmath.pi / (spec.m + 2))
    return SpectralValue(spec.E, c.value / eps, c.err_estimate)


def spectral_f(spec: ProblemSpec, rel_tol: float = DEFAULT_REL_TOL,
               target_rel: float | None = DEFAULT_TARGET_REL) -> SpectralValue:
    """f(E) = -omega^-1 g(omega^-1 E); zeros positive, 1-points on
    arg E = +-2pi/(m+2). The identity f = 1 - h(omega^-1 E) h(omega E) is
    recomputed as a mandatory cross-check."""
    m = spec.m
    _convention_selftest(m)
    om = _omega_pow(m, 1)
    g = spectral_g(spec.with_energy(_rot(m, spec.E, -1)), rel_tol, target_rel)
    val = -g.value / om
    err = g.err_estimate
    # cross-check path through h
    h1 = spectral_h(spec.with_energy(_rot(m, spec.E, -1)), rel_tol, target_rel)
    h2 = spectral_h(spec.with_energy(_rot(m, spec.E, 1)), rel_tol, target_rel)
    alt = 1 - h1.value * h2.value
    scale = max(abs(val), 1e-300)
    budget = (err + h1.err_estimate + h2.err_estimate
              + 1e-12) * max(scale, abs(h1.value * h2.value))
    if abs(val - alt) > budget:
        raise InternalConsistencyError(
            f"f({spec.E}) cross-check mismatch: {val} vs {alt}")
    return SpectralValue(spec.E, val, err)


def f_minus_one(spec: ProblemSpec, rel_tol: float = DEFAULT_REL_TOL,
                target_rel: float | None = DEFAULT_TARGET_REL) -> SpectralValue:
    """f(E) - 1 = -omega^-1 C(omega^-1 E) C(omega E), computed as the direct
    product (no subtraction), so it stays well conditioned near 1-points."""
    m = spec.m
    _convention_selftest(m)
    c1, e1, _ = _stokes_C_raw(m, _rot(m, spec.E, -1), rel_tol, target_rel)
    c2, e2, _ = _stokes_C_raw(m, _rot(m, spec.E, 1), rel_tol, target_rel)
    val = -(c1 * c2) / _omega_pow(m, 1)
    return SpectralValue(spec.E, val, e1 + e2)


def connection_residual(spec: ProblemSpec, z: complex,
                        rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Scaled residual of y_{-1} = C y_0 - omega y_1 and its z-derivative at z,
    all five ingredients from independent evaluations."""
    m = spec.m
    om = _omega_pow(m, 1)
    C = stokes_C(spec, rel_tol).value
    vals = {}
    for k in (-1, 0, 1):
        w = _omega_pow(m, -k) * complex(z)
        fr = evaluate_y0(spec.with_energy(_rot(m, spec.E, 2 * k)), w, rel_tol)
        y, dy = fr.value()
        chain = _omega_pow(m, -k)
        vals[k] = (y, chain * dy)
    r0 = vals[-1][0] - C * vals[0][0] + om * vals[1][0]
    r1 = vals[-1][1] - C * vals[0][1] + om * vals[1][1]
    scale = max(abs(vals[-1][0]), abs(C * vals[0][0]), abs(om * vals[1][0]),
                abs(vals[-1][1]), abs(C * vals[0][1]), abs(om * vals[1][1]))
    return max(abs(r0), abs(r1)) / scale


# ---------------------------------------------------------------------------
# Function handles for root finding and the CLI
# ---------------------------------------------------------------------------

SPECTRAL_TAGS = ("C", "g", "f", "h", "f-1", "W")


class SpectralFunction:
    """Callable E -> complex for one of the spectral functions, with an
    energy derivative (variational) and per-call precision targets."""

    def __init__(self, m: int, tag: str, n: int | None = None,
                 k: int | None = None, rel_tol: float = DEFAULT_REL_TOL,
                 target_rel: float | None = DEFAULT_TARGET_REL):
        if tag not in SPECTRAL_TAGS:
            raise ValueError(f"unknown spectral function tag {tag!r}")
        if tag == "W":
            if n is None or k is None:
                raise ValueError("W requires sector indices n and k")
            n %= m + 2
            k %= m + 2
        self.m = m
        self.tag = tag
        self.n = n
        self.k = k
        self.rel_tol = rel_tol
        self.target_rel = target_rel
        self._eps = cmath.exp(1j * cmath.pi / (m + 2))

    def with_tolerances(self, rel_tol=None, target_rel="unset"):
        return SpectralFunction(
            self.m, self.tag, self.n, self.k,
            self.rel_tol if rel_tol is None else rel_tol,
            self.target_rel if target_rel == "unset" else target_rel)

    def spectral_value(self, E: complex) -> SpectralValue:
        spec = ProblemSpec(self.m, complex(E))
        if self.tag == "C":
            return stokes_C(spec, self.rel_tol, self.target_rel)
        if self.tag == "g":
            return spectral_g(spec, self.rel_tol, self.target_rel)
        if self.tag == "f":
            return spectral_f(spec, self.rel_tol, self.target_rel)
        if self.tag == "h":
            return spectral_h(spec, self.rel_tol, self.target_rel)
        if self.tag == "f-1":
            return f_minus_one(spec, self.rel_tol, self.target_rel)
        return wronskian(spec, self.n, self.k, self.rel_tol, self.target_rel)

    def __call__(self, E: complex) -> complex:
        return self.spectral_value(E).value

    def derivative(self, E: complex) -> complex:
        """dF/dE via the variational system (no finite differences)."""
        m = self.m
        E = complex(E)
        om = _omega_pow(m, 1)
        if self.tag in ("C", "h"):
            _, _, dC = _stokes_C_raw(m, E, self.rel_tol, self.target_rel,
                                     with_var=True)
            return dC / self._eps if self.tag == "h" else dC
        if self.tag == "g":
            return self._g_derivative(E)
        if self.tag in ("f", "f-1"):
            # f - 1 = -omega^-1 C(omega^-1 E) C(omega E)
            e1 = _rot(m, E, -1)
            e2 = _rot(m, E, 1)
            c1, _, d1 = _stokes_C_raw(m, e1, self.rel_tol, self.target_rel,
                                      with_var=True)
            c2, _, d2 = _stokes_C_raw(m, e2, self.rel_tol, self.target_rel,
                                      with_var=True)
            return -(d1 / om * c2 + c1 * d2 * om) / om
        # W(n, k)
        d = (self.k - self.n) % (m + 2)
        n = self.n
        if d > (m + 2) - d:
            n, d = self.k, (m + 2) - d
            sign = -1.0
        else:
            sign = 1.0
        En = _rot(m, E, 2 * n)
        if d == 1:
            h = 1e-7 * (1 + abs(E))   # adjacent Wronskians are ~constant in E
            return (self(E + h) - self(E - h)) / (2 * h)
        _, _, dW = _w0d(m, En, d, self.rel_tol, self.target_rel, with_var=True)
        return sign * _omega_pow(m, -n) * _omega_pow(m, 2 * n) * dW

    def _g_derivative(self, E: complex) -> complex:
        m = self.m
        c1, _, d1 = _stokes_C_raw(m, E, self.rel_tol, self.target_rel,
                                  with_var=True)
        e2 = _rot(m, E, 2)
        c2, _, d2 = _stokes_C_raw(m, e2, self.rel_tol, self.target_rel,
                                  with_var=True)
        om2 = _omega_pow(m, 2)
        return d1 * c2 + c1 * d2 * om2

    def predicted_zero_rays(self) -> list[float] | None:
        """Ray angles (radians) on which this function's zeros are predicted."""
        m = self.m
        step = 2 * math.pi / (m + 2)
        if self.tag in ("C", "h", "f"):
            return [0.0]
        if self.tag == "g":
            return [-step]
        if self.tag == "f-1":
            return [step, -step]
        from .rootfinder import predicted_ray
        try:
            return [predicted_ray(m, self.n, self.k)]
        except ValueError:
            return None

    def __repr__(self):
        extra = f", n={self.n}, k={self.k}" if self.tag == "W" else ""
        return f"SpectralFunction(m={self.m}, tag={self.tag!r}{extra})"


def make_handle(m: int, tag: str, n: int | None = None, k: int | None = None,
                rel_tol: float = DEFAULT_REL_TOL,
                target_rel: float | None = DEFAULT_TARGET_REL) -> SpectralFunction:
    return SpectralFunction(m, tag, n, k, rel_tol, target_rel)
