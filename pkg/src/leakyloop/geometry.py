"""
Closed planar curves sampled on a uniform arc-length grid, and polygons.

Every curve is stored as ``N`` samples ``Gamma(s_i)``, ``s_i = i L / N``.
Shifts past the end of the period use the translation-periodic extension
``Gamma(s + L) = Gamma(s) + offset`` so that curves which only satisfy
``beta(L) = beta(0) + 2 pi`` (no positional closure) still have a
well-defined chord function.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ArgumentError, NonClosableError

_FINE_GRID = 4096


def _check_grid(N):
    if int(N) != N or N < 16 or N % 2:
        raise ArgumentError(f"grid size must be an even integer >= 16, got {N!r}")
    return int(N)


def _check_positive(value, name):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value) and value > 0):
        raise ArgumentError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


# --------------------------------------------------------------------------
# curve types


@dataclass(frozen=True, eq=False)
class ArcLengthCurve:
    """Arc-length samples of a planar loop.

    Attributes
    ----------
    length : float
        Total arc length ``L``.
    points : ndarray, shape (N, 2)
        Samples at ``s_i = i L / N``.
    closure_defect : float
        ``|Gamma(L) - Gamma(0)|`` as constructed.
    tangent_defect : float
        ``|beta(L) - beta(0) - 2 pi w|``.
    offset : ndarray, shape (2,)
        ``Gamma(L) - Gamma(0)``; used for shifts past the period end.
    breaks : tuple of float
        Arc positions where the curvature is discontinuous (corners included).
    corners : tuple of float
        Subset of ``breaks`` where the tangent itself jumps.
    source : str
        Provenance tag written to curve files.
    evaluate : callable, optional
        Exact evaluator ``s -> (len(s), 2)`` array for analytically built curves.
    """

    length: float
    points: np.ndarray
    closure_defect: float = 0.0
    tangent_defect: float = 0.0
    offset: np.ndarray = field(default_factory=lambda: np.zeros(2))
    breaks: tuple = ()
    corners: tuple = ()
    source: str = "file"
    evaluate: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ArgumentError("points must have shape (N, 2)")
        _check_grid(pts.shape[0])
        _check_positive(self.length, "length")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        off = np.asarray(self.offset, dtype=float).reshape(2)
        off.setflags(write=False)
        object.__setattr__(self, "offset", off)

    @property
    def grid_size(self) -> int:
        return self.points.shape[0]

    @property
    def step(self) -> float:
        return self.length / self.grid_size

    @property
    def arc_parameters(self) -> np.ndarray:
        return np.arange(self.grid_size) * self.step

    @property
    def is_closed(self) -> bool:
        return self.closure_defect <= 1e-10 * self.length

    def shifted(self, m: int) -> np.ndarray:
        """Samples ``Gamma(s_i + m h)`` using the translation-periodic extension."""
        N = self.grid_size
        idx = np.arange(N) + m
        wraps = np.floor_divide(idx, N)
        return self.points[idx % N] + wraps[:, None] * self.offset

    def chords(self, m: int) -> np.ndarray:
        """``|Gamma(s_i + m h) - Gamma(s_i)|`` for all grid nodes."""
        return np.hypot(*(self.shifted(m) - self.points).T)

    def grid_index(self, u: float, rtol: float = 1e-9) -> Optional[int]:
        """Return ``m`` with ``u = m h`` or None when ``u`` is off-grid."""
        m = round(u / self.step)
        if abs(m * self.step - u) <= rtol * max(self.step, abs(u)):
            return int(m)
        return None

    def polyline_length(self) -> float:
        ext = np.vstack([self.points, self.points[:1] + self.offset])
        return float(np.sum(np.hypot(*np.diff(ext, axis=0).T)))

    def transformed(self, rotation: float, translation: Sequence[float]) -> "ArcLengthCurve":
        """Apply a rigid motion (rotation angle, then translation)."""
        c, s = math.cos(rotation), math.sin(rotation)
        rot = np.array([[c, -s], [s, c]])
        shift = np.asarray(translation, dtype=float)
        ev = None
        if self.evaluate is not None:
            inner = self.evaluate
            ev = lambda arc: inner(arc) @ rot.T + shift  # noqa: E731
        return replace(self, points=self.points @ rot.T + shift, offset=self.offset @ rot.T, evaluate=ev)

    def scaled(self, factor: float) -> "ArcLengthCurve":
        factor = _check_positive(factor, "factor")
        ev = None
        if self.evaluate is not None:
            inner = self.evaluate
            ev = lambda arc: factor * inner(arc / factor)  # noqa: E731
        return replace(
            self,
            length=self.length * factor,
            points=self.points * factor,
            offset=self.offset * factor,
            closure_defect=self.closure_defect * factor,
            breaks=tuple(b * factor for b in self.breaks),
            corners=tuple(c * factor for c in self.corners),
            evaluate=ev,
        )

    def self_intersects(self) -> bool:
        """Segment sweep over the sampled polyline (non-adjacent pairs only)."""
        return _polyline_self_intersects(self.points, closed=self.is_closed)


def _polyline_self_intersects(points, closed=True, block=256):
    P = np.asarray(points)
    Q = np.roll(P, -1, axis=0)
    N = len(P)
    nseg = N if closed else N - 1
    P, Q = P[:nseg], Q[:nseg]

    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    idx = np.arange(nseg)
    for start in range(0, nseg, block):
        rows = idx[start:start + block]
        a, b = P[rows, None, :], Q[rows, None, :]
        c, d = P[None, :, :], Q[None, :, :]
        d1 = orient(a, b, c)
        d2 = orient(a, b, d)
        d3 = orient(c, d, a)
        d4 = orient(c, d, b)
        hit = (d1 * d2 < 0) & (d3 * d4 < 0)
        gap = np.abs(rows[:, None] - idx[None, :])
        if closed:
            gap = np.minimum(gap, nseg - gap)
        hit &= gap > 1
        if np.any(hit):
            return True
    return False


@dataclass(frozen=True)
class CurvatureSpec:
    """Curvature ``gamma(s) = 2 pi / L + g(s)`` with a finite Fourier perturbation.

    ``g(s) = sum_n a_n sin(2 pi n s / L) + b_n cos(2 pi n s / L)``; the zero mode
    is absent so ``int_0^L g = 0``.
    """

    length: float
    modes: tuple = ()

    def __post_init__(self):
        _check_positive(self.length, "length")
        clean = []
        seen = set()
        for mode in self.modes:
            n, a, b = mode
            if int(n) != n or n < 1:
                raise ArgumentError(f"mode index must be an integer >= 1, got {n!r}")
            if n in seen:
                raise ArgumentError(f"duplicate mode index {n}")
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ArgumentError("mode coefficients must be finite")
            seen.add(int(n))
            clean.append((int(n), float(a), float(b)))
        object.__setattr__(self, "modes", tuple(sorted(clean)))

    @property
    def sup_norm_bound(self) -> float:
        """Upper bound ``sum (|a_n| + |b_n|) L`` on ``||L g||_inf``."""
        return sum(abs(a) + abs(b) for _, a, b in self.modes) * self.length

    def sup_norm(self, samples: int = _FINE_GRID) -> float:
        """``||L g||_inf`` measured on a fine grid."""
        s = np.arange(samples) * self.length / samples
        return float(np.max(np.abs(self.g(s)))) * self.length

    def g(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for n, a, b in self.modes:
            k = 2 * np.pi * n / self.length
            out = out + a * np.sin(k * s) + b * np.cos(k * s)
        return out

    def curvature(self, s):
        return 2 * np.pi / self.length + self.g(s)

    def g_primitive(self, s):
        """``int_0^s g``."""
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for n, a, b in self.modes:
            k = 2 * np.pi * n / self.length
            out = out + (a * (1 - np.cos(k * s)) + b * np.sin(k * s)) / k
        return out

    def bending_angle(self, s):
        """``beta(s) = 2 pi s / L + int_0^s g``."""
        s = np.asarray(s, dtype=float)
        return 2 * np.pi * s / self.length + self.g_primitive(s)

    def scaled(self, eps: float) -> "CurvatureSpec":
        return CurvatureSpec(self.length, tuple((n, eps * a, eps * b) for n, a, b in self.modes))

    def with_mode(self, n: int, a: float, b: float) -> "CurvatureSpec":
        rest = [m for m in self.modes if m[0] != n]
        if a != 0.0 or b != 0.0:
            rest.append((n, a, b))
        return CurvatureSpec(self.length, tuple(rest))

    def mode(self, n: int):
        for k, a, b in self.modes:
            if k == n:
                return a, b
        return 0.0, 0.0


def random_curvature_spec(rng, length, modes=(1, 2, 3, 4, 5), sup_norm=0.05):
    """Random coefficients on ``modes``, scaled so that ``||L g||_inf == sup_norm``."""
    coeffs = rng.standard_normal((len(modes), 2))
    spec = CurvatureSpec(length, tuple((n, a, b) for n, (a, b) in zip(modes, coeffs)))
    if sup_norm == 0:
        return CurvatureSpec(length)
    return spec.scaled(sup_norm / spec.sup_norm())


@dataclass(frozen=True, eq=False)
class Polygon:
    """Equilateral polygon; vertex indices are taken modulo ``N``."""

    vertices: np.ndarray
    side_length: float
    equilateral_tolerance: float = 1e-12

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ArgumentError("polygon needs at least 3 vertices of shape (N, 2)")
        _check_positive(self.side_length, "side_length")
        sides = np.hypot(*(np.roll(v, -1, axis=0) - v).T)
        worst = np.max(np.abs(sides - self.side_length))
        if worst > self.equilateral_tolerance * self.side_length:
            raise ArgumentError(f"polygon is not equilateral within tolerance (max deviation {worst:.3e})")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def diagonals(self, m: int) -> np.ndarray:
        """``|y_{n+m} - y_n|`` for ``n = 0..N-1``."""
        return np.hypot(*(np.roll(self.vertices, -m, axis=0) - self.vertices).T)


# --------------------------------------------------------------------------
# sampling helpers


class _FourierPrimitive:
    """Spectral primitive ``F(s) = int_0^s f`` of a periodic sampled function."""

    def __init__(self, samples, length):
        M = len(samples)
        self.length = length
        self.coef = np.fft.fft(samples) / M
        self.mean = self.coef[0]
        k = np.fft.fftfreq(M, d=1.0 / M)
        k[M // 2] = 0.0
        self.omega = 2 * np.pi * k / length
        self.k = k
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(k != 0, self.coef / (1j * self.omega), 0.0)
        c[M // 2] = 0.0
        self.prim = c
        self.base = np.sum(c)

    def on_grid(self, stride=1):
        M = len(self.coef)
        vals = np.fft.ifft(self.prim) * M - self.base
        s = np.arange(M) * self.length / M
        return (self.mean * s + vals)[::stride]

    def __call__(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty(s.shape, dtype=complex)
        for lo in range(0, s.size, 512):
            chunk = s[lo:lo + 512]
            phase = np.exp(1j * np.outer(chunk, self.omega))
            out[lo:lo + 512] = self.mean * chunk + phase @ self.prim - self.base
        return out


def _fine_size(N):
    return N * max(1, -(-_FINE_GRID // N))


def _as_xy(z):
    z = np.asarray(z)
    return np.column_stack([z.real, z.imag])


def _make_curve(evaluate, length, N, source, breaks=(), corners=(), offset=(0.0, 0.0),
                closure_defect=None, tangent_defect=0.0):
    N = _check_grid(N)
    s = np.arange(N) * length / N
    offset = np.asarray(offset, dtype=float)
    if closure_defect is None:
        closure_defect = float(np.hypot(*offset))
    return ArcLengthCurve(
        length=length,
        points=evaluate(s),
        closure_defect=closure_defect,
        tangent_defect=tangent_defect,
        offset=offset,
        breaks=tuple(breaks),
        corners=tuple(corners),
        source=source,
        evaluate=evaluate,
    )


# --------------------------------------------------------------------------
# builders


def build_circle(L, N) -> ArcLengthCurve:
    """Circle of length ``L`` centred at the origin, starting at ``(L/2pi, 0)``."""
    L = _check_positive(L, "L")
    radius = L / (2 * np.pi)

    def evaluate(s):
        t = 2 * np.pi * np.asarray(s, dtype=float) / L
        return radius * np.column_stack([np.cos(t), np.sin(t)])

    return _make_curve(evaluate, L, N, "circle")


def build_from_curvature(spec: CurvatureSpec, N) -> ArcLengthCurve:
    """Integrate ``Gamma(s) = int_0^s (cos beta, sin beta)`` spectrally.

    Closure is recorded in ``closure_defect`` but not enforced; see
    :func:`close_curve`.
    """
    N = _check_grid(N)
    L = spec.length
    M = _fine_size(N)
    s_fine = np.arange(M) * L / M
    prim = _FourierPrimitive(np.exp(1j * spec.bending_angle(s_fine)), L)
    offset = prim.mean * L
    pts = _as_xy(prim.on_grid(stride=M // N))

    def evaluate(s):
        return _as_xy(prim(s))

    return ArcLengthCurve(
        length=L,
        points=pts,
        closure_defect=float(abs(offset)),
        tangent_defect=0.0,
        offset=np.array([offset.real, offset.imag]),
        source="curvature",
        evaluate=evaluate,
    )


def closure_integrals(spec: CurvatureSpec, samples: int = _FINE_GRID) -> complex:
    """``int_0^L exp(i beta)`` by the periodic trapezoid rule."""
    s = np.arange(samples) * spec.length / samples
    return complex(np.sum(np.exp(1j * spec.bending_angle(s))) * spec.length / samples)


def close_curve(curve: ArcLengthCurve, spec: CurvatureSpec, max_iter: int = 50, tol: float = 1e-13):
    """Restore positional closure by adjusting the ``n = 1`` mode pair.

    Newton iteration on the two closure integrals in ``(a_1, b_1)``. The
    curvature parametrisation is unit speed, so the length stays exactly ``L``
    and the final uniform rescale is the identity.

    Returns
    -------
    (ArcLengthCurve, CurvatureSpec)

    Raises
    ------
    NonClosableError
        If Newton does not reach ``|defect| <= tol L`` within ``max_iter`` steps.
    """
    L = spec.length
    if not math.isfinite(curve.closure_defect):
        raise ArgumentError("closure defect of the input curve is not finite")
    if abs(curve.length - L) > 1e-12 * L:
        raise ArgumentError("curve and spec lengths differ")
    M = _FINE_GRID
    s = np.arange(M) * L / M
    h = L / M
    da = (1 - np.cos(2 * np.pi * s / L)) * L / (2 * np.pi)
    db = np.sin(2 * np.pi * s / L) * L / (2 * np.pi)
    a1, b1 = spec.mode(1)
    current = spec
    for it in range(max_iter + 1):
        phase = np.exp(1j * current.bending_angle(s))
        J = np.sum(phase) * h
        if abs(J) <= tol * L:
            break
        if it == max_iter:
            raise NonClosableError(
                f"closure projection did not converge in {max_iter} iterations (defect {abs(J):.3e})"
            )
        dJa = np.sum(1j * phase * da) * h
        dJb = np.sum(1j * phase * db) * h
        jac = np.array([[dJa.real, dJb.real], [dJa.imag, dJb.imag]])
        try:
            step = np.linalg.solve(jac, -np.array([J.real, J.imag]))
        except np.linalg.LinAlgError as exc:
            raise NonClosableError("singular closure Jacobian") from exc
        a1, b1 = a1 + step[0], b1 + step[1]
        if not (math.isfinite(a1) and math.isfinite(b1)):
            raise NonClosableError("closure iteration diverged")
        current = spec.with_mode(1, a1, b1)
    closed = build_from_curvature(current, curve.grid_size)
    # unit-speed construction: the rescale to L is the identity
    return replace(closed, closure_defect=float(abs(J)), offset=np.zeros(2)), current


def build_closed_from_curvature(spec: CurvatureSpec, N, max_iter: int = 50):
    """Convenience: build then close; returns ``(curve, adjusted_spec)``."""
    return close_curve(build_from_curvature(spec, N), spec, max_iter=max_iter)


def build_lens(R, L, N) -> ArcLengthCurve:
    """Two circular arcs of radius ``R``, each of length ``L/2``.

    Corners sit on the y-axis at ``s = 0`` and ``s = L/2``. ``R > L/2pi``
    gives a convex lens, ``L/4pi < R < L/2pi`` an apple with reflex corners.
    """
    R = _check_positive(R, "R")
    L = _check_positive(L, "L")
    if R <= L / (4 * np.pi):
        raise ArgumentError(f"lens needs R > L/(4 pi) = {L / (4 * np.pi)!r}")
    half = L / (4 * R)
    shift = R * math.cos(half)

    def evaluate(s):
        s = np.mod(np.asarray(s, dtype=float), L)
        right = s < L / 2
        ang = np.where(right, -half + s / R, np.pi - half + (s - L / 2) / R)
        cx = np.where(right, -shift, shift)
        return np.column_stack([cx + R * np.cos(ang), R * np.sin(ang)])

    corners = (0.0, L / 2)
    return _make_curve(evaluate, L, N, "lens", breaks=corners, corners=corners)


def build_paperclip(a, b, r, N) -> ArcLengthCurve:
    """Segment of length ``a``, U-turn of radius ``r``, back ``b``, second U-turn.

    ``beta(L) = beta(0) + 2 pi`` but the endpoint misses the start by ``|a - b|``.
    """
    a = _check_positive(a, "a")
    b = _check_positive(b, "b")
    r = _check_positive(r, "r")
    L = a + b + 2 * np.pi * r
    k1 = a
    k2 = a + np.pi * r
    k3 = k2 + b

    def evaluate(s):
        s = np.asarray(s, dtype=float)
        x = np.empty_like(s)
        y = np.empty_like(s)
        p0 = s <= k1
        p1 = (s > k1) & (s <= k2)
        p2 = (s > k2) & (s <= k3)
        p3 = s > k3
        x[p0], y[p0] = s[p0], 0.0
        t = (s[p1] - k1) / r
        x[p1], y[p1] = a + r * np.sin(t), r - r * np.cos(t)
        x[p2], y[p2] = a - (s[p2] - k2), 2 * r
        t = (s[p3] - k3) / r
        x[p3], y[p3] = a - b - r * np.sin(t), r + r * np.cos(t)
        return np.column_stack([x, y])

    offset = (a - b, 0.0)
    return _make_curve(evaluate, L, N, "paperclip", breaks=(0.0, k1, k2, k3), offset=offset)


def build_ellipse(ratio, L, N) -> ArcLengthCurve:
    """Ellipse with axis ratio ``ratio >= 1`` and perimeter ``L``, resampled to arc length."""
    ratio = _check_positive(ratio, "ratio")
    L = _check_positive(L, "L")
    N = _check_grid(N)
    M = 1024
    t = 2 * np.pi * np.arange(M) / M
    speed = np.hypot(ratio * np.sin(t), np.cos(t))
    prim = _FourierPrimitive(speed, 2 * np.pi)
    perimeter = prim.mean.real * 2 * np.pi
    scale = L / perimeter
    ax, ay = ratio * scale, scale

    def param_of_arc(s):
        # Newton on S(t) = s / scale with S the unit-ellipse arc length
        s = np.asarray(s, dtype=float) / scale
        tt = s / prim.mean.real
        for _ in range(30):
            resid = prim(tt).real - s
            tt = tt - resid / np.hypot(ratio * np.sin(tt), np.cos(tt))
            if np.max(np.abs(resid)) < 1e-15 * perimeter:
                break
        return tt

    def evaluate(s):
        tt = param_of_arc(s)
        return np.column_stack([ax * np.cos(tt), ay * np.sin(tt)])

    return _make_curve(evaluate, L, N, "ellipse")


def polygon_curve(polygon: Polygon, N) -> ArcLengthCurve:
    """Arc-length traversal of a polygon's boundary."""
    v = polygon.vertices
    nxt = np.roll(v, -1, axis=0)
    lens = np.hypot(*(nxt - v).T)
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    L = float(cum[-1])

    def evaluate(s):
        s = np.mod(np.asarray(s, dtype=float), L)
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(v) - 1)
        frac = ((s - cum[k]) / lens[k])[:, None]
        return v[k] + frac * (nxt[k] - v[k])

    corners = tuple(float(c) for c in cum[:-1])
    return _make_curve(evaluate, L, N, "polygon", breaks=corners, corners=corners)


def resample(curve: ArcLengthCurve, N) -> ArcLengthCurve:
    """Resample on a new uniform grid (exact evaluator or trigonometric interpolation)."""
    N = _check_grid(N)
    if curve.evaluate is not None:
        s = np.arange(N) * curve.length / N
        return replace(curve, points=curve.evaluate(s))
    if curve.breaks:
        raise ArgumentError("cannot resample a curve with breaks and no exact evaluator")
    old = curve.grid_size
    drift = np.outer(curve.arc_parameters / curve.length, curve.offset)
    z = (curve.points - drift) @ np.array([1.0, 1j])
    coef = np.fft.fft(z) / old
    freq = np.rint(np.fft.fftfreq(old, d=1.0 / old)).astype(int)
    target = np.zeros(N, dtype=complex)
    limit = min(old, N) // 2
    for c, k in zip(coef, freq):
        if abs(k) < limit:
            target[k % N] += c
        elif abs(k) == limit:
            # split the shared Nyquist coefficient symmetrically
            target[limit % N] += 0.5 * c
            target[-limit % N] += 0.5 * c
    periodic = _as_xy(np.fft.ifft(target) * N)
    s_new = np.arange(N) * curve.length / N
    return replace(curve, points=periodic + np.outer(s_new / curve.length, curve.offset), evaluate=None)


def build_regular_polygon(n_vertices, side) -> Polygon:
    """Regular polygon with circumradius ``side / (2 sin(pi/N))``."""
    if int(n_vertices) != n_vertices or n_vertices < 3:
        raise ArgumentError("regular polygon needs an integer N >= 3")
    side = _check_positive(side, "side")
    n = int(n_vertices)
    rad = side / (2 * math.sin(math.pi / n))
    ang = 2 * np.pi * np.arange(n) / n
    return Polygon(rad * np.column_stack([np.cos(ang), np.sin(ang)]), side)


def rhomboid(phi, side) -> Polygon:
    """Rhombus of side ``side`` with diagonals ``2 side cos(phi)`` (x) and ``2 side sin(phi)`` (y)."""
    if not (0 < phi <= math.pi / 2):
        raise ArgumentError("rhomboid angle must lie in (0, pi/2]")
    side = _check_positive(side, "side")
    c, s = side * math.cos(phi), side * math.sin(phi)
    return Polygon(np.array([[c, 0.0], [0.0, s], [-c, 0.0], [0.0, -s]]), side)


def equilateral_reprojection(vertices, side) -> Polygon:
    """Rescale each edge direction to ``side``, re-accumulate, close by spreading the gap.

    The uniform gap correction perturbs side lengths at second order, so a few
    sweeps are applied until the polygon is equilateral to roundoff.
    """
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    for _ in range(200):
        edges = np.roll(v, -1, axis=0) - v
        edges *= side / np.hypot(*edges.T)[:, None]
        pts = np.vstack([v[:1], v[:1] + np.cumsum(edges[:-1], axis=0)])
        gap = v[0] - (pts[-1] + edges[-1])
        v = pts + np.outer(np.arange(n) / n, gap)
        sides = np.hypot(*(np.roll(v, -1, axis=0) - v).T)
        if np.max(np.abs(sides - side)) <= 1e-13 * side:
            break
    return Polygon(v, side, equilateral_tolerance=1e-11)


def perturbed_polygon(base: Polygon, amplitude, rng) -> Polygon:
    """Small random vertex displacement of ``base`` projected back to equilateral."""
    noise = amplitude * base.side_length * rng.standard_normal(base.vertices.shape)
    return equilateral_reprojection(base.vertices + noise, base.side_length)


# --------------------------------------------------------------------------
# file formats


def curve_to_dict(curve: ArcLengthCurve) -> dict:
    out = {
        "length": curve.length,
        "n": curve.grid_size,
        "points": curve.points.tolist(),
        "closure_defect": curve.closure_defect,
        "source": curve.source,
    }
    if np.any(curve.offset != 0):
        out["offset"] = curve.offset.tolist()
    if curve.breaks:
        out["breaks"] = list(curve.breaks)
    if curve.corners:
        out["corners"] = list(curve.corners)
    return out


def curve_from_dict(data: dict) -> ArcLengthCurve:
    try:
        points = np.asarray(data["points"], dtype=float)
        length = float(data["length"])
        n = int(data.get("n", len(points)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ArgumentError(f"malformed curve record: {exc}") from exc
    if n != len(points):
        raise ArgumentError(f"curve record declares n={n} but holds {len(points)} points")
    offset = np.asarray(data.get("offset", (0.0, 0.0)), dtype=float)
    defect = float(data.get("closure_defect", np.hypot(*offset)))
    return ArcLengthCurve(
        length=length,
        points=points,
        closure_defect=defect,
        offset=offset,
        breaks=tuple(data.get("breaks", ())),
        corners=tuple(data.get("corners", ())),
        source=str(data.get("source", "file")),
    )


def spec_to_dict(spec: CurvatureSpec) -> dict:
    return {"length": spec.length, "modes": [{"n": n, "a": a, "b": b} for n, a, b in spec.modes]}


def spec_from_dict(data: dict) -> CurvatureSpec:
    try:
        modes = tuple((int(m["n"]), float(m.get("a", 0.0)), float(m.get("b", 0.0))) for m in data.get("modes", []))
        return CurvatureSpec(float(data["length"]), modes)
    except (KeyError, TypeError, ValueError) as exc:
        raise ArgumentError(f"malformed curvature spec: {exc}") from exc


def polygon_to_dict(polygon: Polygon) -> dict:
    return {"side": polygon.side_length, "vertices": polygon.vertices.tolist()}


def polygon_from_dict(data: dict, tolerance: float = 1e-9) -> Polygon:
    try:
        return Polygon(np.asarray(data["vertices"], dtype=float), float(data["side"]), tolerance)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ArgumentError):
            raise
        raise ArgumentError(f"malformed polygon record: {exc}") from exc


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"{path}: invalid JSON ({exc})") from exc


def load_curve(path) -> ArcLengthCurve:
    return curve_from_dict(_load_json(path))


def load_spec(path) -> CurvatureSpec:
    return spec_from_dict(_load_json(path))


def load_polygon(path) -> Polygon:
    return polygon_from_dict(_load_json(path))
