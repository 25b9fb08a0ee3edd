"""The normalized subdominant solution y0(z, E) of y'' = (z^m + E) y and its
sector rotations y_k(z, E) = y0(omega^-k z, omega^{2k} E).

y0 is pinned down by the large-z normalization

    y0(z, E) = (1 + o(1)) z^{-m/4} exp(-(2/(m+2)) z^{(m+2)/2}),

valid in the open sector |arg z| < 3 pi/(m+2). Seeding happens at an anchor
radius R where an asymptotic log-series for y0 is accurate to the requested
tolerance; the frame is then integrated inward (the numerically stable
direction, since y0 grows toward the origin inside S0).

The seed series solves the Riccati equation p^2 - p' = Q order by order:
p_0 = sqrt(Q), p_n = (p_{n-1}' - sum_{i=1}^{n-1} p_i p_{n-i}) / (2 p_0).
Writing xi = E z^-m, each order is p_n = z^{m/2 - n(m+2)/2} f_n(xi) with
rational polynomial data f_n, so log y0 = -W integrates in closed form:

    W(z, E) = (m/4) log z + sum_n z^{e_n + 1} P_n(xi),

with P_0 starting at (2/(m+2)) z^{(m+2)/2}. The spec's two-term action is the
(n=0, j<=1) truncation; the full table is required to reach 1e-12 seeds at
moderate anchor radii. Coefficients are exact rationals, shared between the
double and extended-precision backends.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .backend import BUILTIN, NumericContext, gmp_context, precision_guard
from .ode import (DEFAULT_REL_TOL, SolutionFrame, _propagate)

__all__ = [
    "ProblemSpec",
    "StokesSector",
    "AnchorPolicy",
    "DomainError",
    "AnchorRadiusError",
    "anchor_radius",
    "wkb_seed",
    "evaluate_y0",
    "yk_at_origin",
    "rotate_energy",
]


class DomainError(ValueError):
    """Point outside the region where y0's asymptotic normalization holds."""


class AnchorRadiusError(RuntimeError):
    """No admissible anchor radius below the configured maximum."""


@dataclass(frozen=True)
class ProblemSpec:
    """One ODE instance -y'' + (z^m + E) y = 0 (the paper's sign, ell = 0)."""

    m: int
    E: complex = 0j

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 3:
            raise ValueError("m must be an integer >= 3")
        object.__setattr__(self, "E", complex(self.E))

    @property
    def omega_root(self) -> complex:
        return cmath.exp(2j * cmath.pi / (self.m + 2))

    @property
    def epsilon_root(self) -> complex:
        return cmath.exp(1j * cmath.pi / (self.m + 2))

    def with_energy(self, E: complex) -> "ProblemSpec":
        return ProblemSpec(self.m, complex(E))


def rotate_energy(m: int, E: complex, k: int) -> complex:
    """omega^{2k} E, the energy entering y_k."""
    if k == 0:
        return complex(E)
    return cmath.exp(4j * cmath.pi * k / (m + 2)) * E


@dataclass(frozen=True)
class StokesSector:
    """S_k = omega^k S_0 where S_0 = {|arg z| < pi/(m+2)}."""

    m: int
    k: int

    @property
    def bisector_angle(self) -> float:
        return 2.0 * math.pi * self.k / (self.m + 2)

    @property
    def half_opening(self) -> float:
        return math.pi / (self.m + 2)

    def contains(self, z: complex) -> bool:
        if z == 0:
            return False
        d = math.remainder(cmath.phase(z) - self.bisector_angle, 2 * math.pi)
        return abs(d) < self.half_opening


@dataclass(frozen=True)
class AnchorPolicy:
    """Controls where the WKB seed is placed.

    eta bounds |E| <= eta * R^m so the xi-series converges fast; the anchor
    only moves past r_min when the estimated first omitted series term at
    (R, E) exceeds the requested tolerance.
    """

    eta: float = 0.1
    r_min: float = 8.0
    r_max: float = 512.0
    transport_order: int | None = None   # rows of the Riccati series
    xi_order: int | None = None          # powers of xi = E z^-m

    def orders_for(self, ctx: NumericContext):
        n = self.transport_order if self.transport_order is not None \
            else (12 if ctx.prec_bits <= 53 else 20)
        j = self.xi_order if self.xi_order is not None \
            else (18 if ctx.prec_bits <= 53 else 26)
        return n, j


DEFAULT_POLICY = AnchorPolicy()


# ---------------------------------------------------------------------------
# Riccati series tables (exact rationals, cached per m and truncation order)
# ---------------------------------------------------------------------------

def _binom_series(alpha: Fraction, jmax: int):
    c = [Fraction(1)]
    for j in range(1, jmax + 1):
        c.append(c[-1] * (alpha - (j - 1)) / j)
    return c


def _conv(a, b, jmax):
    out = [Fraction(0)] * (jmax + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(jmax + 1 - i):
            bj = b[j]
            if bj != 0:
                out[i + j] += ai * bj
    return out


@lru_cache(maxsize=None)
def _riccati_table(m: int, nmax: int, jmax: int):
    """f_n(xi) coefficient rows (exact) for p_n = z^{e_n} f_n(xi)."""
    inv_sqrt = _binom_series(Fraction(-1, 2), jmax)
    f = [_binom_series(Fraction(1, 2), jmax)]
    e = [Fraction(m, 2)]
    for n in range(1, nmax + 1):
        en1 = e[-1]
        g = [(en1 - m * j) * f[n - 1][j] for j in range(jmax + 1)]
        for i in range(1, n):
            pij = _conv(f[i], f[n - i], jmax)
            g = [gj - pj for gj, pj in zip(g, pij)]
        half = _conv(g, inv_sqrt, jmax)
        f.append([x / 2 for x in half])
        e.append(en1 - Fraction(m + 2, 2))
    return f, e


@lru_cache(maxsize=None)
def _seed_tables(m: int, nmax: int, jmax: int, ctx_name: str, prec: int):
    """Per-backend numeric tables: for each retained row n, the xi-polynomial
    coefficients of p, W = integral of p, and their E-derivatives; plus the
    magnitudes of the first omitted row/column for truncation estimates."""
    ctx = BUILTIN if ctx_name == "f64" else gmp_context(prec)
    f, e = _riccati_table(m, nmax, jmax)
    conv = ctx.from_fraction
    rows = []
    for n in range(nmax):
        en = e[n]
        p_coef = [conv(f[n][j]) for j in range(jmax)]
        w_coef = []
        for j in range(jmax):
            kappa = en - m * j + 1
            if kappa == 0:
                w_coef.append(None)      # the log term, n == 1, j == 0
            else:
                w_coef.append(conv(f[n][j] / kappa))
        rows.append((float(en), p_coef, w_coef))
    # omitted-term data (plain floats, magnitudes only)
    est_row = [abs(float(f[nmax][j] / (e[nmax] - m * j + 1))) for j in range(jmax + 1)]
    est_col = [abs(float(f[n][jmax] / (e[n] - m * jmax + 1)))
               if (e[n] - m * jmax + 1) != 0 else 0.0 for n in range(nmax)]
    log_coef = conv(Fraction(m, 4))
    return rows, log_coef, float(e[nmax]), est_row, est_col


def _seed_truncation_estimate(m, nmax, jmax, r, absE):
    """Magnitude of the first omitted series contributions at radius r."""
    _, _, e_last, est_row, est_col = _seed_tables(m, nmax, jmax, "f64", 53)
    xi = absE / r ** m
    row = sum(c * xi ** j for j, c in enumerate(est_row)) * r ** (e_last + 1.0)
    _, e = _riccati_table(m, nmax, jmax)
    col = sum(est_col[n] * r ** (float(e[n]) + 1.0) for n in range(nmax)) * xi ** jmax
    return row + col / max(1e-300, 1.0 - min(0.5, xi))


def _seed_eval(m, E, z0, ctx: NumericContext, nmax, jmax, with_var=False):
    """W, p (and dW/dE, dp/dE) at z0: y0 = exp(-W), y0' = -p y0."""
    rows, log_coef, _, _, _ = _seed_tables(m, nmax, jmax, ctx.name, ctx.prec_bits)
    zi = ctx.powr(z0, float(-m))
    xi = E * zi
    W = log_coef * ctx.log(z0)
    p = W * 0.0
    dW = dp = None
    if with_var:
        dW = W * 0.0
        dp = W * 0.0
    for en, p_coef, w_coef in rows:
        zp = ctx.powr(z0, en)
        zw = zp * z0
        # Horner in xi, split so the log-term slot (None) is skipped
        pacc = p_coef[-1]
        for c in reversed(p_coef[:-1]):
            pacc = pacc * xi + c
        p = p + zp * pacc
        wacc = W * 0.0
        for c in reversed(w_coef):
            wacc = wacc * xi
            if c is not None:
                wacc = wacc + c
        W = W + zw * wacc
        if with_var:
            # d/dE = z^-m d/dxi
            dp_acc = W * 0.0
            for j in range(len(p_coef) - 1, 0, -1):
                dp_acc = dp_acc * xi + j * p_coef[j]
            dp = dp + zp * zi * dp_acc
            dw_acc = W * 0.0
            for j in range(len(w_coef) - 1, 0, -1):
                dw_acc = dw_acc * xi
                if w_coef[j] is not None:
                    dw_acc = dw_acc + j * w_coef[j]
            dW = dW + zw * zi * dw_acc
    return W, p, dW, dp


# ---------------------------------------------------------------------------
# Anchor selection and seeding
# ---------------------------------------------------------------------------

def anchor_radius(spec: ProblemSpec, rel_tol: float = DEFAULT_REL_TOL,
                  policy: AnchorPolicy = DEFAULT_POLICY,
                  ctx: NumericContext = BUILTIN) -> float:
    """Smallest admissible seed radius: |E| <= eta R^m and the first omitted
    series term at (R, E) below rel_tol."""
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    nmax, jmax = policy.orders_for(ctx)
    absE = abs(spec.E)
    r = max(policy.r_min, (absE / policy.eta) ** (1.0 / spec.m))
    while _seed_truncation_estimate(spec.m, nmax, jmax, r, absE) > 0.5 * rel_tol:
        r *= 1.25
        if r > policy.r_max:
            raise AnchorRadiusError(
                f"anchor radius above cap {policy.r_max} for E={spec.E}, "
                f"rel_tol={rel_tol}")
    return r


def _seed_frame_raw(m, E_ctx, z0_ctx, ctx, nmax, jmax, with_var=False):
    """Raw seed components ((y, dy), offset) with y=1, dy=-p, off=-W."""
    W, p, dW, dp = _seed_eval(m, E_ctx, z0_ctx, ctx, nmax, jmax, with_var)
    one = ctx.make(1.0)
    if not with_var:
        return (one, -p), -W
    # d/dE of y = exp(-W): v = -dW * y ; of y' = -p y: dv = (-dp + p dW) y
    return (one, -p, -dW, -dp + p * dW), -W


def wkb_seed(spec: ProblemSpec, z0: complex,
             rel_tol: float = DEFAULT_REL_TOL,
             policy: AnchorPolicy = DEFAULT_POLICY) -> SolutionFrame:
    """Asymptotic-series frame for y0 at z0 (principal branches throughout).

    z0 must lie in |arg z0| < 3 pi/(m+2); accuracy requires |z0| at or beyond
    the anchor radius for E, which is reflected in err_estimate rather than
    enforced.
    """
    z0 = complex(z0)
    if z0 == 0 or abs(cmath.phase(z0)) >= 3 * math.pi / (spec.m + 2) - 1e-12:
        raise DomainError(f"seed point {z0} outside the asymptotic sector")
    ctx = BUILTIN
    nmax, jmax = policy.orders_for(ctx)
    est = _seed_truncation_estimate(spec.m, nmax, jmax, abs(z0), abs(spec.E))
    comps, off = _seed_frame_raw(spec.m, spec.E, z0, ctx, nmax, jmax)
    err = est + ctx.eps * (1.0 + abs(off))
    frame = SolutionFrame(z=z0, y_mantissa=comps[0], dy_mantissa=comps[1],
                          log_offset=off, err_estimate=err)
    return frame.renormalized()


# ---------------------------------------------------------------------------
# y0 evaluation (cached at the origin) and rotated solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RawFrame:
    """Internal frame in backend arithmetic: value = (y, dy) * exp(off)."""

    y: object
    dy: object
    off: object
    err: float

    def to_frame(self, z: complex) -> SolutionFrame:
        return SolutionFrame(
            z=z, y_mantissa=complex(self.y), dy_mantissa=complex(self.dy),
            log_offset=complex(self.off), err_estimate=self.err).renormalized()


def _ctx_by_name(name: str) -> NumericContext:
    return BUILTIN if name == "f64" else gmp_context(int(name[3:]))


@lru_cache(maxsize=1 << 17)
def _y0_origin_cached(m: int, E: complex, rot_j: int, rel_tol: float,
                      ctx_name: str, policy: AnchorPolicy, with_var: bool):
    """Origin frame of y0(., omega^rot_j E).

    The rotation is applied *inside* at working precision: for the extended
    backends a pre-rotated double energy would already carry a 1e-16 relative
    wobble, which dominates exactly the combinations that need those rungs.
    """
    ctx = _ctx_by_name(ctx_name)
    with precision_guard(ctx):
        nmax, jmax = policy.orders_for(ctx)
        R = anchor_radius(ProblemSpec(m, E), rel_tol, policy, ctx)
        est = _seed_truncation_estimate(m, nmax, jmax, R, abs(E))
        E_ctx = ctx.make(E.real, E.imag)
        if rot_j % (m + 2):
            E_ctx = E_ctx * ctx.unit_phase(rot_j % (m + 2), m + 2)
        z0 = ctx.make(R)
        comps, off = _seed_frame_raw(m, E_ctx, z0, ctx, nmax, jmax,
                                     with_var=with_var)
        err = est + ctx.eps * (1.0 + ctx.absval(off))
        qfun = _make_qfun(m, E_ctx)
        state, doff, ierr, _ = _propagate(qfun, z0, ctx.make(0.0), comps,
                                          rel_tol, ctx, variation=with_var)
        off = off + doff
        err = err + ierr
        base = RawFrame(state[0], state[1], off, err)
        var = RawFrame(state[2], state[3], off, err) if with_var else None
        return base, var


def _make_qfun(m, E_ctx):
    def qfun(z):
        return z ** m + E_ctx
    return qfun


def _y0_origin(spec: ProblemSpec, rel_tol: float, ctx: NumericContext = BUILTIN,
               policy: AnchorPolicy = DEFAULT_POLICY, with_var: bool = False,
               rot_j: int = 0):
    return _y0_origin_cached(spec.m, spec.E, rot_j % (spec.m + 2), rel_tol,
                             ctx.name, policy, with_var)


def evaluate_y0(spec: ProblemSpec, z: complex,
                rel_tol: float = DEFAULT_REL_TOL,
                policy: AnchorPolicy = DEFAULT_POLICY) -> SolutionFrame:
    """Frame of y0 at z, for |arg z| < 3 pi/(m+2) or z = 0.

    Inside the closed sector |arg z| <= pi/(m+2) the frame is seeded at the
    anchor radius on the ray through z and integrated inward along that ray
    (y0 grows inward there, so this is stable). Farther out, inward
    integration along the ray would be exponentially unstable, so the frame
    is taken at the origin first and then continued out to z; the points this
    library needs in that zone all have moderate |z|.
    """
    z = complex(z)
    m = spec.m
    theta = 0.0 if z == 0 else cmath.phase(z)
    if z != 0 and abs(theta) >= 3 * math.pi / (m + 2):
        raise DomainError(f"z={z} outside |arg z| < 3 pi/(m+2)")
    ctx = BUILTIN
    if abs(theta) <= math.pi / (m + 2) + 1e-12:
        R = max(anchor_radius(spec, rel_tol, policy), abs(z))
        nmax, jmax = policy.orders_for(ctx)
        est = _seed_truncation_estimate(m, nmax, jmax, R, abs(spec.E))
        z0 = R * cmath.exp(1j * theta)
        comps, off = _seed_frame_raw(m, spec.E, z0, ctx, nmax, jmax)
        err = est + ctx.eps * (1.0 + abs(off))
        if abs(z0 - z) > 1e-14 * R:
            state, doff, ierr, _ = _propagate(_make_qfun(m, spec.E), z0, z,
                                              comps, rel_tol, ctx)
            comps, off, err = state, off + doff, err + ierr
        return RawFrame(comps[0], comps[1], off, err).to_frame(z)
    base, _ = _y0_origin(spec, rel_tol, policy=policy)
    state, doff, ierr, _ = _propagate(_make_qfun(m, spec.E), 0j, z,
                                      (base.y, base.dy), rel_tol, ctx)
    return RawFrame(state[0], state[1], base.off + doff,
                    base.err + ierr).to_frame(z)


def yk_at_origin(spec: ProblemSpec, k: int,
                 rel_tol: float = DEFAULT_REL_TOL,
                 policy: AnchorPolicy = DEFAULT_POLICY) -> SolutionFrame:
    """Frame (y_k(0,E), y_k'(0,E)) via the rotation y_k(z) = y0(w^-k z, w^2k E).

    The chain-rule factor omega^-k applies to the derivative component only.
    """
    m = spec.m
    k = k % (m + 2)
    base, _ = _y0_origin(spec, rel_tol, policy=policy, rot_j=2 * k)
    chain = cmath.exp(-2j * cmath.pi * k / (m + 2))
    return SolutionFrame(z=0j, y_mantissa=complex(base.y),
                         dy_mantissa=complex(base.dy) * chain,
                         log_offset=complex(base.off),
                         err_estimate=base.err).renormalized()
