"""Independent oracles used across the test suite.

Everything here is computed by a route different from the library's own:
power series summed in mpmath arbitrary precision, Bessel closed forms, and
a Fourier-grid diagonalization for the real-line quartic oscillator. Values
frozen as literals were produced by these same routines at >= 40 digits.
"""
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 40

# Frozen: Airy function at 0 and 1, from direct power-series summation of
# y'' = z y (cross-checked against mpmath.airyai to 35 digits).
AI0 = 0.35502805388781723926006318600418318
DAI0 = -0.25881940379280679840518356018920396
AI1 = 0.13529241631288141552414742351546631
DAI1 = -0.15914744129679321278750025249722969

# Frozen: particular solution of u'' = z u + Ai(z), u(0) = u'(0) = 0, at z=1
# (series summation, cross-checked by variation-of-parameters quadrature).
INHOM_AIRY_U1 = 0.14426653801992574114278315451344459
INHOM_AIRY_DU1 = 0.27351099372733153688399341562957075

# Frozen: real-line quartic oscillator -u'' + x^4 u = lambda u, lowest
# eigenvalues (Fourier-grid diagonalization, stable to ~1e-10 across grids).
QUARTIC_LAMBDAS = (1.0603620904841829, 3.7996730297977828, 7.4556979379867383)


def airy_series(z, nterms=150):
    """(Ai(z), Ai'(z)) by summing the Taylor series of y'' = z y."""
    z = mp.mpf(z) if not isinstance(z, mp.mpf) else z
    a = {0: mp.mpf(AI0), 1: mp.mpf(DAI0), 2: mp.mpf(0)}
    # exact initial data, not the float literals
    a[0] = mp.mpf(3) ** mp.mpf("-2/3") / mp.gamma(mp.mpf(2) / 3)
    a[1] = -(mp.mpf(3) ** mp.mpf("-1/3")) / mp.gamma(mp.mpf(1) / 3)
    for n in range(0, nterms):
        a[n + 3] = a[n] / ((n + 3) * (n + 2))
    y = sum(a[n] * z ** n for n in sorted(a))
    dy = sum(n * a[n] * z ** (n - 1) for n in sorted(a) if n >= 1)
    return y, dy


def y0_closed_form(m, z):
    """y0(z, 0) = (2/sqrt(pi(m+2))) sqrt(z) K_nu(t), the E=0 Bessel form."""
    nu = mp.mpf(1) / (m + 2)
    t = mp.mpf(2) / (m + 2) * mp.mpf(z) ** (mp.mpf(m + 2) / 2)
    return 2 / mp.sqrt(mp.pi * (m + 2)) * mp.sqrt(z) * mp.besselk(nu, t)


def y0_at_origin(m):
    """(y0(0,0), y0'(0,0)) from the small-argument Bessel expansion."""
    nu = 1.0 / (m + 2)
    A = math.gamma(nu) * (m + 2) ** (nu - 0.5) / math.sqrt(math.pi)
    B = math.gamma(-nu) * (m + 2) ** (-nu - 0.5) / math.sqrt(math.pi)
    return A, B


def quartic_eigenvalues(nmax=4, N=800, L=7.5):
    """Lowest eigenvalues of -u'' + x^4 u on the real line, by Fourier-grid
    Hamiltonian diagonalization (spectral kinetic energy, dense eigh)."""
    x = np.linspace(-L, L, N, endpoint=False)
    dx = x[1] - x[0]
    k = 2 * np.pi * np.fft.fftfreq(N, d=dx)
    F = np.fft.fft(np.eye(N), axis=0)
    T = (np.fft.ifft(np.diag(k ** 2) @ F, axis=0)).real
    H = T + np.diag(x ** 4)
    w = np.linalg.eigvalsh(H)
    return w[:nmax]
