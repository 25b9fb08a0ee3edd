"""Numeric backends: plain ``complex`` arithmetic and optional multiprecision.

The integrator and seed evaluation are written against ordinary arithmetic
operators plus the tiny function set below, so the same code runs on builtin
``complex`` (fast path) and on ``gmpy2.mpc`` (extended path, used when a
spectral combination loses too many digits to cancellation).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

try:
    import gmpy2
except ImportError:  # pragma: no cover - gmpy2 is a hard dependency in practice
    gmpy2 = None


@dataclass(frozen=True)
class NumericContext:
    """Dispatch table for the handful of transcendental ops the solvers need."""

    name: str
    prec_bits: int
    eps: float
    make: Callable          # (re, im=0) -> number
    from_fraction: Callable  # Fraction -> real number
    exp: Callable
    log: Callable
    sqrt: Callable
    powr: Callable          # z ** (real exponent), principal branch
    absval: Callable        # |z| as float
    to_complex: Callable
    pi: Callable            # pi at working precision

    def __repr__(self):
        return f"NumericContext({self.name})"

    def unit_phase(self, num: int, den: int):
        """exp(2 pi i num/den) at working precision."""
        angle = 2 * self.pi() * num / den
        return self.exp(self.make(0.0, 1.0) * angle)


def _builtin():
    return NumericContext(
        name="f64",
        prec_bits=53,
        eps=2.0 ** -52,
        make=lambda re, im=0.0: complex(re, im),
        from_fraction=float,
        exp=cmath.exp,
        log=cmath.log,
        sqrt=cmath.sqrt,
        powr=lambda z, a: complex(z) ** a,
        absval=abs,
        to_complex=complex,
        pi=lambda: math.pi,
    )


BUILTIN = _builtin()

_GMP_CACHE: dict[int, NumericContext] = {}


def gmp_context(bits: int) -> NumericContext:
    """Multiprecision context at ``bits`` of mantissa (gmpy2-backed).

    gmpy2's rounding context is thread-local; callers must enter
    ``precision_guard(ctx)`` around any computation using this context.
    """
    if gmpy2 is None:
        raise RuntimeError("gmpy2 is required for extended-precision evaluation")
    ctx = _GMP_CACHE.get(bits)
    if ctx is not None:
        return ctx

    def make(re, im=0.0):
        return gmpy2.mpc(gmpy2.mpfr(re), gmpy2.mpfr(im))

    def from_fraction(q: Fraction):
        return gmpy2.mpfr(gmpy2.mpq(q.numerator, q.denominator))

    ctx = NumericContext(
        name=f"gmp{bits}",
        prec_bits=bits,
        eps=2.0 ** (1 - bits),
        make=make,
        from_fraction=from_fraction,
        exp=gmpy2.exp,
        log=gmpy2.log,
        sqrt=gmpy2.sqrt,
        powr=lambda z, a: z ** gmpy2.mpfr(a),
        absval=lambda z: float(abs(z)),
        to_complex=complex,
        pi=gmpy2.const_pi,
    )
    _GMP_CACHE[bits] = ctx
    return ctx


class precision_guard:
    """Set the thread-local gmpy2 precision for the duration of a block."""

    def __init__(self, ctx: NumericContext):
        self.ctx = ctx
        self._saved = None

    def __enter__(self):
        if self.ctx.name != "f64":
            self._saved = gmpy2.get_context()
            work = self._saved.copy()
            work.precision = self.ctx.prec_bits
            gmpy2.set_context(work)
        return self.ctx

    def __exit__(self, *exc):
        if self._saved is not None:
            gmpy2.set_context(self._saved)
        return False
