"""
Second-order expansion of the squared chord moment around the circle.

A loop of length ``L`` with curvature ``gamma = 2 pi / L + g`` has

    c2(u) = 2 int_0^u dx (u - x) int_0^L dz cos(int_{z-x/2}^{z+x/2} gamma)
          = (L^3 / pi^2) sin^2(pi u / L) - I_g(u) + O(|Lg|^3),

    I_g(u) = int_0^u dx (u - x) cos(2 pi x / L) int_0^L dz (int_{z-x/2}^{z+x/2} g)^2.

For ``g = sum a_n sin(2 pi n s / L) + b_n cos(2 pi n s / L)`` the inner
z-integral is ``(L^3 / pi^2) (a_n^2 + b_n^2) / n^2 sin^2(pi n x / L)``, so

    I_g(u) = (L^5 / 2 pi^4) sum_n (a_n^2 + b_n^2) / n^2 * K_n(pi u / L),
    K_n(v) = int_0^v (v - y) cos 2y sin^2(n y) dy.

``F_n(v) = int_0^v (v - y) cos 2y sin(n y) dy`` is provided separately with
its own closed forms.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, PreconditionError
from .geometry import CurvatureSpec

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_X_PANELS = 8

AUDIT_RATIO_MIN = 6.0
AUDIT_RATIO_MAX = 10.0
AUDIT_SUP_NORM = 0.1


def _check_v(v):
    arr = np.asarray(v, dtype=float)
    if np.any(~(arr > 0)) or np.any(arr > 0.5 * np.pi * (1 + 1e-15)):
        raise ArgumentError("v must lie in (0, pi/2]")
    return arr


def _check_n(n):
    if int(n) != n or n < 1:
        raise ArgumentError(f"mode index must be a positive integer, got {n!r}")
    return int(n)


def _check_u(spec, u):
    if not (0 < u <= 0.5 * spec.length * (1 + 1e-12)):
        raise ArgumentError(f"u must lie in (0, L/2], got {u!r}")
    return float(u)


def F_n(n, v):
    """Closed form of ``int_0^v (v - y) cos(2y) sin(n y) dy`` for ``0 < v <= pi/2``."""
    n = _check_n(n)
    v = _check_v(v)
    if n == 1:
        out = (9 * np.sin(v) - np.sin(3 * v) - 6 * v) / 18
    elif n == 2:
        out = (4 * v - np.sin(4 * v)) / 32
    else:
        out = (
            n * v / (n * n - 4)
            - np.sin((n - 2) * v) / (2 * (n - 2) ** 2)
            - np.sin((n + 2) * v) / (2 * (n + 2) ** 2)
        )
    return float(out) if out.ndim == 0 else out


def mode_kernel(n, v):
    """Closed form of ``int_0^v (v - y) cos(2y) sin^2(n y) dy``, the weight of
    mode ``n`` in ``I_g``. Unlike ``F_n`` this is not positive for ``n = 1``
    near ``v = pi/2``."""
    n = _check_n(n)
    v = _check_v(v)
    out = np.sin(v) ** 2 / 4 - np.sin((n + 1) * v) ** 2 / (8 * (n + 1) ** 2)
    if n == 1:
        out = out - v**2 / 8
    else:
        out = out - np.sin((n - 1) * v) ** 2 / (8 * (n - 1) ** 2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ModeContribution:
    n: int
    a: float
    b: float
    weight: float
    F_value: float
    contribution: float


@dataclass(frozen=True)
class IgResult:
    total: float
    per_mode: tuple
    u: float

    def __iter__(self):
        # allows ``total, modes = I_g(spec, u)``
        return iter((self.total, list(self.per_mode)))


def I_g(spec: CurvatureSpec, u) -> IgResult:
    """Closed-form mode sum for ``I_g(u)``; modes summed in ascending ``n``."""
    u = _check_u(spec, u)
    L = spec.length
    v = min(math.pi * u / L, 0.5 * math.pi)
    pref = L**5 / (2 * math.pi**4)
    modes = []
    total = 0.0
    for n, a, b in spec.modes:
        weight = (a * a + b * b) / (n * n)
        k = mode_kernel(n, v)
        contribution = pref * weight * k
        total += contribution
        modes.append(ModeContribution(n, a, b, weight, k, contribution))
    return IgResult(total, tuple(modes), u)


def _x_rule(u):
    # Gauss-Legendre panels on [0, u]
    edges = np.linspace(0.0, u, _X_PANELS + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return x, w


def _z_count(spec, minimum):
    top = max((n for n, _, _ in spec.modes), default=0)
    return max(minimum, 16 * top + 16)


def I_g_direct(spec: CurvatureSpec, u, nz: int = None) -> float:
    """``I_g(u)`` from its defining double integral (Gauss-Legendre in x,
    periodic trapezoid in z)."""
    u = _check_u(spec, u)
    L = spec.length
    x, wx = _x_rule(u)
    nz = nz or _z_count(spec, 64)
    z = np.arange(nz) * (L / nz)
    inner = np.empty_like(x)
    for i, xi in enumerate(x):
        d = spec.g_primitive(z + 0.5 * xi) - spec.g_primitive(z - 0.5 * xi)
        inner[i] = (L / nz) * np.sum(d * d)
    return float(np.sum(wx * (u - x) * np.cos(2 * np.pi * x / L) * inner))


def c2_from_curvature(spec: CurvatureSpec, u, nz: int = None) -> float:
    """``c2(u) = 2 int_0^u (u - x) int_0^L cos(beta(z + x/2) - beta(z - x/2)) dz dx``."""
    u = _check_u(spec, u)
    L = spec.length
    x, wx = _x_rule(u)
    nz = nz or _z_count(spec, 512)
    z = np.arange(nz) * (L / nz)
    inner = np.empty_like(x)
    for i, xi in enumerate(x):
        angle = spec.bending_angle(z + 0.5 * xi) - spec.bending_angle(z - 0.5 * xi)
        inner[i] = (L / nz) * np.sum(np.cos(angle))
    return float(2 * np.sum(wx * (u - x) * inner))


def circle_c2(L, u) -> float:
    return L**3 / math.pi**2 * math.sin(math.pi * u / L) ** 2


@dataclass(frozen=True)
class ExpansionAudit:
    """Residuals ``R(eps) = c2(eps g) - [circle - I_{eps g}]`` at ``eps0`` and ``eps0 / 2``."""

    u: float
    eps0: float
    residual_full: float
    residual_half: float
    ratio: float
    verdict: str


def second_order_expansion_audit(spec: CurvatureSpec, u, eps0: float = 1.0) -> ExpansionAudit:
    """Check that the remainder of the quadratic expansion scales cubically.

    ``spec`` is scaled by ``eps0`` and by ``eps0 / 2``; the verdict is
    ``"consistent"`` when ``|R(eps0)| / |R(eps0/2)| >= 6`` (or both residuals
    vanish, as for ``g = 0``). The ratio is 8 for a generic cubic remainder
    and 16 when the cubic term cancels.
    """
    u = _check_u(spec, u)
    full = spec.scaled(eps0)
    if full.sup_norm() > AUDIT_SUP_NORM * (1 + 1e-12):
        raise PreconditionError(f"|L g| = {full.sup_norm():.3g} exceeds {AUDIT_SUP_NORM}")
    base = circle_c2(spec.length, u)

    def residual(s):
        return c2_from_curvature(s, u) - (base - I_g(s, u).total)

    r_full = residual(full)
    r_half = residual(spec.scaled(0.5 * eps0))
    if r_full == 0 and r_half == 0:
        return ExpansionAudit(u, eps0, 0.0, 0.0, math.inf, "consistent")
    ratio = abs(r_full) / abs(r_half) if r_half != 0 else math.inf
    verdict = "consistent" if ratio >= AUDIT_RATIO_MIN else "inconsistent"
    return ExpansionAudit(u, eps0, r_full, r_half, ratio, verdict)


MODE_TABLE_FIELDS = ("n", "a", "b", "weight", "F", "contribution")


def mode_table_csv(result: IgResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MODE_TABLE_FIELDS)
    for m in result.per_mode:
        writer.writerow([m.n, repr(m.a), repr(m.b), repr(m.weight), repr(m.F_value), repr(m.contribution)])
    return buf.getvalue()
