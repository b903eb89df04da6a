"""Integer-order Bessel functions of the first kind and friends.

Self-contained (no scipy): backward-recurrence J_n for the propagator
kernels, the many-argument generalization J_nu({beta_m}) that shows up for
multi-harmonic driving, and positive zeros of J_n for the dynamic
localization condition.
"""

from __future__ import annotations

import numpy as np

__all__ = ["bessel_j", "bessel_j_array", "bessel_j_multivar", "bessel_zero"]

_MAX_ARG = 1e6
_RESCALE = 1e250


def bessel_j_array(nmax: int, x: float) -> np.ndarray:
    """Return ``[J_0(x), J_1(x), ..., J_nmax(x)]``.

    Backward (Miller) recurrence started well past the turning point,
    normalized with the even-order sum identity J_0 + 2*sum_k J_2k = 1.
    Absolute accuracy is ~1e-14 over |x| <= 1e6. Orders whose true value
    underflows double precision come out as exact zeros.
    """
    nmax = int(nmax)
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    x = float(x)
    ax = abs(x)
    if not np.isfinite(ax) or ax > _MAX_ARG:
        raise ValueError(f"|x| = {ax} outside supported range (< {_MAX_ARG:g})")

    out = np.zeros(nmax + 1)
    if ax < 1e-8:
        # leading power-series term; the first correction is O(x^2) ~ 1e-16
        out[0] = 1.0 - 0.25 * ax * ax
        term = 1.0
        for n in range(1, nmax + 1):
            term *= 0.5 * ax / n
            if term == 0.0:
                break
            out[n] = term
    else:
        start = int(max(nmax, ax) + 12.0 * max(ax, 1.0) ** (1.0 / 3.0)) + 42
        jp = 0.0       # J_{k+1}, unnormalized
        jc = 1e-30     # J_k
        even_sum = 2.0 * jc if start % 2 == 0 else 0.0
        if start <= nmax:
            out[start] = jc
        for k in range(start, 0, -1):
            jm = (2.0 * k / ax) * jc - jp
            jp, jc = jc, jm
            n = k - 1
            if n <= nmax:
                out[n] = jc
            if n == 0:
                even_sum += jc
            elif n % 2 == 0:
                even_sum += 2.0 * jc
            if abs(jc) > _RESCALE:
                jp /= _RESCALE
                jc /= _RESCALE
                even_sum /= _RESCALE
                out /= _RESCALE
        out /= even_sum

    if x < 0.0:
        out[1::2] *= -1.0
    return out


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for integer n (any sign), using J_{-n}(x) = (-1)^n J_n(x)."""
    n = int(n)
    an = abs(n)
    val = bessel_j_array(an, x)[an]
    if n < 0 and an % 2 == 1:
        val = -val
    return float(val)


def bessel_j_multivar(nu: int, betas, tol: float = 1e-11,
                      max_nodes: int = 2 ** 21) -> float:
    """Many-argument Bessel function J_nu({beta_m}).

    Defined as the Fourier coefficient

        (1/2pi) * int_0^{2pi} exp(i * sum_m beta_m sin(m u) - i nu u) du,

    m running from 1 to len(betas). Evaluated by trapezoidal quadrature on
    the periodic grid with node doubling until two successive refinements
    agree to ``tol``; the integrand is periodic and analytic, so the
    convergence is spectral.

    Raises ValueError if the node cap is hit before convergence or if
    sum |beta_m| >= 1e3.
    """
    nu = int(nu)
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    if betas.ndim != 1 or betas.size < 1:
        raise ValueError("betas must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(betas)):
        raise ValueError("betas must be finite")
    if np.sum(np.abs(betas)) >= 1e3:
        raise ValueError("sum |beta_m| out of supported range (< 1e3)")

    m = np.arange(1, betas.size + 1)

    def coefficient(nodes: int) -> complex:
        u = 2.0 * np.pi * np.arange(nodes) / nodes
        phase = betas @ np.sin(np.outer(m, u)) - nu * u
        return complex(np.exp(1j * phase).mean())

    # keep the first grid past the integrand bandwidth to avoid aliasing
    bandwidth = float(np.sum(m * np.abs(betas))) + abs(nu)
    nodes = 64
    while nodes < 4 * (bandwidth + 8):
        nodes *= 2
    prev = coefficient(nodes)
    while nodes <= max_nodes:
        nodes *= 2
        cur = coefficient(nodes)
        if abs(cur - prev) < tol:
            return float(cur.real)
        prev = cur
    raise ValueError(f"quadrature did not converge within {max_nodes} nodes")


def bessel_zero(n: int, k: int) -> float:
    """The k-th positive zero of J_n, for 0 <= n <= 50, 1 <= k <= 50.

    Zeros are bracketed by a sign scan starting below the first zero
    (J_n is positive there) and refined by bisection to machine precision,
    so |J_n(root)| < 1e-12.
    """
    n = int(n)
    k = int(k)
    if not 0 <= n <= 50:
        raise ValueError("order n must be in [0, 50]")
    if not 1 <= k <= 50:
        raise ValueError("zero index k must be in [1, 50]")

    # J_n grows monotonically up to the turning point near x = n, so the
    # scan can start there; consecutive zeros are never closer than ~2.9.
    x = max(float(n), 0.5)
    step = 0.5
    fa = bessel_j(n, x)
    found = 0
    for _ in range(20000):
        xb = x + step
        fb = bessel_j(n, xb)
        if fa == 0.0:
            found += 1
            if found == k:
                return x
        elif fa * fb < 0.0:
            found += 1
            if found == k:
                a, b = x, xb
                for _ in range(200):
                    mid = 0.5 * (a + b)
                    if mid == a or mid == b:
                        break
                    fm = bessel_j(n, mid)
                    if fm == 0.0:
                        return mid
                    if fa * fm < 0.0:
                        b = mid
                    else:
                        a, fa = mid, fm
                return 0.5 * (a + b)
        x, fa = xb, fb
    raise ValueError(f"failed to bracket zero {k} of J_{n}")
