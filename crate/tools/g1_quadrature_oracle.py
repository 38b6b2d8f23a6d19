"""Offline oracle for the Faddeev-type Green's function g1.

g1(w) = (2*pi)^-2 * Int_{R^2} exp(i w.xi) / (|xi|^2 + 2 (xi1 + i xi2)) dxi

evaluated by nested adaptive quadrature in polar coordinates xi = rho e^{i alpha}:

g1(w) = (4 pi^2)^-1 Int_0^{2pi} dalpha Int_0^inf exp(i rho c) / (rho + 2 e^{i alpha}) drho,
c = |w| cos(alpha - arg w).

The inner semi-infinite oscillatory integral uses QUADPACK's Fourier-weighted
routine past a finite head interval. No special functions are used, so the
values are independent of the exponential-integral closed form used at runtime.
"""
import json
import sys

import numpy as np
from scipy import integrate

HEAD = 8.0


def inner(c, a):
    def fr(r):
        return (1.0 / (r + a)).real

    def fi(r):
        return (1.0 / (r + a)).imag

    sgn = 1.0 if c > 0 else -1.0
    om = abs(c)
    # head [0, HEAD]: plain adaptive quadrature, complex integrand
    def hr(r):
        return (np.exp(1j * c * r) / (r + a)).real

    def hi(r):
        return (np.exp(1j * c * r) / (r + a)).imag

    pts = [2.0] if abs(a + 2.0) < 0.5 else None
    kw = dict(limit=2000, epsabs=1e-11, epsrel=1e-10)
    head = integrate.quad(hr, 0, HEAD, points=pts, **kw)[0] + 1j * integrate.quad(hi, 0, HEAD, points=pts, **kw)[0]
    # tail [HEAD, inf): substitute r = HEAD + u
    def gr(u):
        return fr(HEAD + u)

    def gi(u):
        return fi(HEAD + u)

    kwf = dict(limlst=100, limit=500, epsabs=1e-11)
    ccr = integrate.quad(gr, 0, np.inf, weight="cos", wvar=om, **kwf)[0]
    csr = integrate.quad(gr, 0, np.inf, weight="sin", wvar=om, **kwf)[0]
    cci = integrate.quad(gi, 0, np.inf, weight="cos", wvar=om, **kwf)[0]
    csi = integrate.quad(gi, 0, np.inf, weight="sin", wvar=om, **kwf)[0]
    # exp(i c (HEAD+u)) = exp(i c HEAD) (cos(om u) + i sgn sin(om u))
    f_cos = ccr + 1j * cci
    f_sin = csr + 1j * csi
    tail = np.exp(1j * c * HEAD) * (f_cos + 1j * sgn * f_sin)
    return head + tail


def g1_quad(w, scale=1.0):
    """Quadrature of (2pi)^-2 Int e^{i w.xi}/(|xi|^2 + 2 scale xi) dxi.

    `scale` is the complex parameter k; k=1 gives g1.
    """
    w = complex(w)
    r, phi = abs(w), np.angle(w)
    k = complex(scale)

    def integrand(alpha, part):
        c = r * np.cos(alpha - phi)
        if abs(c) < 1e-14:
            c = 1e-14
        # |xi|^2 + 2 k xi = rho (rho + 2 k e^{i alpha})
        val = inner(c, 2.0 * k * np.exp(1j * alpha))
        return val.real if part == 0 else val.imag

    brk = sorted({(phi + np.pi / 2) % (2 * np.pi), (phi - np.pi / 2) % (2 * np.pi),
                  (np.pi - np.angle(k)) % (2 * np.pi)})
    edges = [0.0] + [b for b in brk if 1e-12 < b < 2 * np.pi - 1e-12] + [2 * np.pi]
    total = 0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        kw = dict(limit=200, epsabs=1e-9, epsrel=1e-8)
        total += integrate.quad(integrand, lo, hi, args=(0,), **kw)[0]
        total += 1j * integrate.quad(integrand, lo, hi, args=(1,), **kw)[0]
    return total / (4 * np.pi ** 2)


if __name__ == "__main__":
    pts = [complex(x) for x in sys.argv[1:]] or [1.0]
    for w in pts:
        print(w, g1_quad(w))
