"""
Macdonald function K0 and the planar free-resolvent kernel.

Two evaluation regimes are used:

* ``x <= 2``: the ascending series
  ``K0(x) = -(ln(x/2) + gamma) I0(x) + sum_k H_k (x^2/4)^k / (k!)^2``
* ``x > 2``: Steed's continued fraction (the CF2 recursion of Temme's
  algorithm) for ``sqrt(2x/pi) exp(x) K0(x)``.

Both are accurate to a few ulps on their ranges. Nothing here depends on
an external special-function library.
"""

import numpy as np

EULER_GAMMA = 0.57721566490153286061

_SERIES_CUTOFF = 2.0
_CF_MAXITER = 500


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


def _check_positive(x, name="x"):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError(f"{name} must be strictly positive (got min {np.min(x)!r})")
    return x


def _series_terms(xmax):
    # smallest K with (xmax^2/4)^K / (K!)^2 below 1e-18 of the leading term
    t = 0.25 * xmax * xmax
    term, k = 1.0, 0
    while k < 200:
        k += 1
        term *= t / (k * k)
        if term < 1e-18 and k > t ** 0.5:
            break
    return k + 1


def _series_parts(x):
    # returns (I0(x), sum_k H_k (x^2/4)^k / (k!)^2)
    t = 0.25 * x * x
    term = np.ones_like(x)
    i0 = np.ones_like(x)
    tail = np.zeros_like(x)
    harmonic = 0.0
    nterms = _series_terms(float(np.max(x))) if x.size else 1
    for k in range(1, nterms):
        term = term * t / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        tail = tail + harmonic * term
    return i0, tail


def _k0_series(x):
    i0, tail = _series_parts(x)
    return -(np.log(0.5 * x) + EULER_GAMMA) * i0 + tail


def _k0_continued_fraction(x):
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _CF_MAXITER):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) < 1e-17 * np.abs(s)):
            break
    return np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s


def bessel_k0(x):
    """Modified Bessel function of the second kind, order zero.

    Parameters
    ----------
    x : float or array_like
        Strictly positive argument(s).

    Returns
    -------
    float or ndarray
        ``K0(x)``; values beyond ``x ~ 705`` underflow to 0.

    Raises
    ------
    DomainError
        If any argument is ``<= 0`` or NaN.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(_check_positive(x))
    out = np.empty_like(x)
    small = x <= _SERIES_CUTOFF
    if np.any(small):
        out[small] = _k0_series(x[small])
    large = ~small
    if np.any(large):
        with np.errstate(under="ignore"):
            out[large] = _k0_continued_fraction(x[large])
    return float(out[0]) if scalar else out


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero, for ``0 <= x <= 30``.

    Only used for the log-split of the kernel, where arguments stay small.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 30):
        raise DomainError("bessel_i0 is only provided on [0, 30]")
    i0, _ = _series_parts(x)
    return i0


def k0_i0(x):
    """``(K0(x), I0(x))`` sharing the ascending series where it applies.

    Array-only helper for kernel assembly; ``I0`` is restricted to ``x <= 30``.
    """
    x = _check_positive(x)
    k0 = np.empty_like(x)
    i0 = np.empty_like(x)
    small = x <= _SERIES_CUTOFF
    xs = x[small]
    i0s, tail = _series_parts(xs)
    k0[small] = -(np.log(0.5 * xs) + EULER_GAMMA) * i0s + tail
    i0[small] = i0s
    large = ~small
    if np.any(large):
        xl = x[large]
        with np.errstate(under="ignore"):
            k0[large] = _k0_continued_fraction(xl)
        i0[large] = bessel_i0(np.minimum(xl, 30.0))
    return k0, i0


def free_kernel(kappa, d):
    """Free resolvent kernel ``K0(kappa d) / (2 pi)`` at energy ``-kappa**2``."""
    kappa = _check_positive(kappa, "kappa")
    d = _check_positive(d, "d")
    return bessel_k0(kappa * d) / (2.0 * np.pi)
