"""
Birman-Schwinger ground state of ``-Laplace - alpha delta(x - Gamma)``.

The bound-state energy is ``-kappa*^2`` where ``kappa*`` solves
``lambda_max(kappa) = 1`` for the integral operator on ``L^2([0, L])`` with
kernel ``(alpha / 2 pi) K0(kappa |Gamma(s) - Gamma(s')|)``.

Nystrom discretisation
----------------------
The log singularity is split off as

    K0(kappa r) = A(s, s') ln(4 sin^2(pi (s - s') / L)) + B(s, s'),
    A = -I0(kappa r) chi(s - s') / 2,

and the log factor is integrated with Kress' periodic product weights while
``B`` uses the periodic trapezoid rule. ``chi`` is a smooth cutoff that is
identically one near the diagonal and limits ``kappa r`` to a range where
``I0`` stays moderate; without it the two parts cancel catastrophically at
large ``kappa L``. For curves with corners the grid is graded towards the
corners by Kress' polynomial substitution when an exact evaluator exists.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ArgumentError,
    ConvergenceError,
    NoBoundStateError,
    OnSupportError,
    PreconditionError,
)
from .geometry import ArcLengthCurve, CurvatureSpec
from .specfun import EULER_GAMMA, bessel_i0, bessel_k0, k0_i0

DEFAULT_GRID = 512
DEFAULT_KAPPA_TOL = 1e-8
DEFAULT_EIG_TOL = 1e-12
GRADING_ORDER = 6
_I0_WINDOW = 8.0
_BRACKET_BUDGET = 60
_DENSE_FALLBACK = 1024
_EARLY_FALLBACK = 300  # small matrices switch to the dense solver after this many steps


# --------------------------------------------------------------------------
# quadrature pieces


def kress_log_weights(N: int, length: float) -> np.ndarray:
    """Circulant Kress weights for ``int_0^L ln(4 sin^2(pi (s_i - s)/L)) f(s) ds``.

    Returns the first row ``w[d]`` for index difference ``d = (i - j) mod N``.
    """
    if N % 2:
        raise ArgumentError("Kress weights need an even number of nodes")
    n = N // 2
    d = np.arange(N)
    t = np.pi * d / n
    m = np.arange(1, n)
    row = -(2 * np.pi / n) * (np.cos(np.outer(t, m)) @ (1.0 / m)) - (np.pi / n**2) * np.cos(n * t)
    return row * length / (2 * np.pi)


def _kress_grading(t, p=GRADING_ORDER):
    # Kress' sigmoidal substitution on [0, 2 pi]; derivatives of order < p vanish at the ends
    def v(x):
        return (1 / p - 0.5) * ((np.pi - x) / np.pi) ** 3 + (x - np.pi) / (p * np.pi) + 0.5

    def dv(x):
        return -3 * (1 / p - 0.5) * (np.pi - x) ** 2 / np.pi**3 + 1 / (p * np.pi)

    v1, v2 = v(t), v(2 * np.pi - t)
    V1, V2 = v1**p, v2**p
    dV1 = p * v1 ** (p - 1) * dv(t)
    dV2 = -p * v2 ** (p - 1) * dv(2 * np.pi - t)
    w = 2 * np.pi * V1 / (V1 + V2)
    dw = 2 * np.pi * (dV1 * V2 - V1 * dV2) / (V1 + V2) ** 2
    return w, dw


def _smooth_cutoff(t, inner, outer):
    # C-infinity, 1 on |t| <= inner, 0 on |t| >= outer
    x = np.clip((np.abs(t) - inner) / (outer - inner), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1 - x, 1.0)), 0.0)
    return 1.0 - a / (a + b)


class _Discretisation:
    """Curve-dependent (kappa-independent) parts of the Nystrom matrix."""

    def __init__(self, curve: ArcLengthCurve):
        L = curve.length
        N = curve.grid_size
        h = L / N
        self.curve = curve
        self.length = L
        self.size = N
        self.graded = bool(curve.corners) and curve.evaluate is not None
        sigma = np.arange(N) * h
        if self.graded:
            sigma = sigma + 0.5 * h
            nodes, speed = self._graded_nodes(sigma, sorted(c % L for c in curve.corners), L)
            points = curve.evaluate(nodes)
            self.scheme = "kress-graded"
        else:
            if curve.corners:
                warnings.warn("cornered curve without exact evaluator: ungraded Kress rule, reduced accuracy")
            nodes, speed, points = sigma, np.ones(N), curve.points
            self.scheme = "kress"
        self.nodes = nodes
        self.points = points
        self.speed = speed
        self.weights = h * speed
        iu = np.triu_indices(N, 1)
        self.upper = iu
        self.dist = np.hypot(*(points[iu[0]] - points[iu[1]]).T)
        if np.any(self.dist <= 0):
            raise PreconditionError("curve touches itself at sample resolution (zero chord)")
        self.kress_diag = kress_log_weights(N, L)[0]
        self.kress = kress_log_weights(N, L)[(iu[0] - iu[1]) % N]
        self.tau = (sigma[iu[0]] - sigma[iu[1]] + 0.5 * L) % L - 0.5 * L
        self.logsin = np.log(4 * np.sin(np.pi * self.tau / L) ** 2)
        self.max_speed = float(np.max(speed))
        self.self_intersecting = curve.self_intersects()

    @staticmethod
    def _graded_nodes(sigma, corners, L):
        edges = list(corners) + [corners[0] + L]
        nodes = np.empty_like(sigma)
        speed = np.empty_like(sigma)
        shifted = (sigma - corners[0]) % L + corners[0]
        for lo, hi in zip(edges[:-1], edges[1:]):
            sel = (shifted >= lo) & (shifted < hi)
            width = hi - lo
            w, dw = _kress_grading(2 * np.pi * (shifted[sel] - lo) / width)
            nodes[sel] = (lo + width * w / (2 * np.pi)) % L
            speed[sel] = dw
        return nodes, speed

    def kernel(self, alpha, kappa):
        """Symmetrised Nystrom matrix ``sqrt(w_i) K_ij sqrt(w_j)``."""
        L, N = self.length, self.size
        h = L / N
        reach = _I0_WINDOW / (kappa * self.max_speed)
        z = kappa * self.dist
        if reach >= 0.5 * L:
            K0, I0 = k0_i0(z)
            A = -0.5 * I0
        else:
            K0 = bessel_k0(z)
            chi = _smooth_cutoff(self.tau, 0.5 * reach, reach)
            near = chi > 0
            A = np.zeros_like(z)
            A[near] = -0.5 * bessel_i0(z[near]) * chi[near]
        upper = (A * self.kress / h) + K0 - A * self.logsin
        diag = np.log(4 * np.pi / (kappa * self.speed * L)) - EULER_GAMMA - 0.5 * self.kress_diag / h
        sw = np.sqrt(self.weights)
        mat = np.empty((N, N))
        i, j = self.upper
        vals = (alpha / (2 * np.pi)) * upper * sw[i] * sw[j]
        mat[i, j] = vals
        mat[j, i] = vals
        np.fill_diagonal(mat, (alpha / (2 * np.pi)) * diag * self.weights)
        return mat


# --------------------------------------------------------------------------
# public types


@dataclass(frozen=True, eq=False)
class BSMatrix:
    """Symmetrised Nystrom matrix of ``alpha R^kappa`` on a curve.

    ``matrix[i, j] = sqrt(w_i) K(s_i, s_j) sqrt(w_j)`` with quadrature weights
    ``w``; eigenvectors ``y`` map to function samples ``y / sqrt(w)``.
    """

    matrix: np.ndarray
    kappa: float
    alpha: float
    curve: ArcLengthCurve = field(repr=False)
    scheme: str
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    node_points: np.ndarray = field(repr=False)
    self_intersecting: bool = False

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class GroundStateResult:
    """Outcome of the ground-state solve; ``energy == -kappa_star**2``."""

    kappa_star: float
    eigenvector: np.ndarray
    lambda_residual: float
    bisection_iterations: int
    grid_size: int
    alpha: Optional[float] = None
    nodes: Optional[np.ndarray] = field(default=None, repr=False)
    weights: Optional[np.ndarray] = field(default=None, repr=False)
    node_points: Optional[np.ndarray] = field(default=None, repr=False)
    self_intersecting: bool = False

    @property
    def energy(self) -> float:
        return -self.kappa_star**2

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa_star,
            "energy": self.energy,
            "residual": self.lambda_residual,
            "iterations": self.bisection_iterations,
            "grid": self.grid_size,
            "eigenvector": self.eigenvector.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundStateResult":
        try:
            vec = np.asarray(data["eigenvector"], dtype=float)
            kappa = float(data["kappa"])
            return cls(
                kappa_star=kappa,
                eigenvector=vec,
                lambda_residual=float(data.get("residual", 0.0)),
                bisection_iterations=int(data.get("iterations", 0)),
                grid_size=int(data.get("grid", len(vec))),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ArgumentError(f"malformed ground-state record: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# --------------------------------------------------------------------------
# operations


def _require_closed(curve):
    if not curve.is_closed:
        raise PreconditionError(
            f"curve is not closed (closure defect {curve.closure_defect:.3e} > 1e-10 L)"
        )


def _check_coupling(value, name):
    if not (math.isfinite(value) and value > 0):
        raise ArgumentError(f"{name} must be positive, got {value!r}")
    return float(value)


def _bsmatrix(disc, alpha, kappa):
    return BSMatrix(
        matrix=disc.kernel(alpha, kappa),
        kappa=kappa,
        alpha=alpha,
        curve=disc.curve,
        scheme=disc.scheme,
        nodes=disc.nodes,
        weights=disc.weights,
        node_points=disc.points,
        self_intersecting=disc.self_intersecting,
    )


def assemble_bs_matrix(curve: ArcLengthCurve, alpha, kappa) -> BSMatrix:
    """Nystrom matrix of ``(alpha / 2 pi) K0(kappa |Gamma(s) - Gamma(s')|)``."""
    _require_closed(curve)
    alpha = _check_coupling(alpha, "alpha")
    kappa = _check_coupling(kappa, "kappa")
    return _bsmatrix(_Discretisation(curve), alpha, kappa)


def _power_iteration(S, start=None, tol=DEFAULT_EIG_TOL, max_iter=5000, shift=0.0):
    N = S.shape[0]
    y = np.ones(N) if start is None else np.abs(np.asarray(start, dtype=float))
    y = y / np.linalg.norm(y)
    res_target = math.sqrt(tol) * 0.1
    lam_prev = None
    for it in range(1, max_iter + 1):
        z = S @ y
        lam = float(y @ z)
        res = float(np.linalg.norm(z - lam * y))
        if res <= res_target * abs(lam) or (
            lam_prev is not None and abs(lam - lam_prev) <= 0.1 * tol * abs(lam) and res <= 1e3 * res_target * abs(lam)
        ):
            return lam, y, it, res
        lam_prev = lam
        z = z - shift * y
        y = z / np.linalg.norm(z)
    raise ConvergenceError("power iteration budget exhausted", iterations=max_iter, residual=res, estimate=lam)


def max_eigenpair(matrix: BSMatrix, tol=DEFAULT_EIG_TOL, max_iter=5000, start=None):
    """Perron eigenpair of the Birman-Schwinger matrix.

    Power iteration from the all-ones vector with a residual stop; a dense
    symmetric eigensolve is used as fallback for ``N <= 1024``.

    Returns
    -------
    lam : float
    phi : ndarray
        Positive samples of the eigenfunction at the quadrature nodes,
        normalised so that ``sum(w * phi**2) == 1``.
    """
    S = matrix.matrix
    sw = np.sqrt(matrix.weights)
    y0 = sw if start is None else np.abs(start) * sw
    budget = max_iter if matrix.size > _DENSE_FALLBACK else min(max_iter, _EARLY_FALLBACK)
    try:
        lam, y, _, _ = _power_iteration(S, start=y0, tol=tol, max_iter=budget)
    except ConvergenceError:
        if matrix.size > _DENSE_FALLBACK:
            raise
        vals, vecs = np.linalg.eigh(S)
        lam, y = float(vals[-1]), vecs[:, -1]
    if np.sum(y) < 0:
        y = -y
    y = y / np.linalg.norm(y)
    return lam, y / sw


def _lambda_max(disc, alpha, kappa, start=None):
    mat = _bsmatrix(disc, alpha, kappa)
    return max_eigenpair(mat, start=start)


def ground_state(curve: ArcLengthCurve, alpha, tol=DEFAULT_KAPPA_TOL) -> GroundStateResult:
    """Locate ``kappa*`` with ``lambda_max(kappa*) = 1`` by bisection.

    The bracket starts at ``kappa_hi = alpha`` (doubled while
    ``lambda_max >= 1``) and ``kappa_lo = kappa_hi / 2`` (halved while
    ``lambda_max <= 1``), each with a 60-step budget. The final estimate is the
    secant point inside the last bracket of width ``<= tol``.

    Raises
    ------
    NoBoundStateError
        If no ``kappa_lo`` with ``lambda_max > 1`` is found.
    """
    _require_closed(curve)
    alpha = _check_coupling(alpha, "alpha")
    tol = _check_coupling(tol, "tol")
    disc = _Discretisation(curve)
    if disc.self_intersecting:
        warnings.warn("curve self-intersects at sample resolution")

    hi = alpha
    lam_hi, vec = _lambda_max(disc, alpha, hi)
    steps = 0
    while lam_hi >= 1.0:
        steps += 1
        if steps > _BRACKET_BUDGET:
            raise ConvergenceError("upper bracket expansion exhausted", kappa=hi, lam=lam_hi)
        hi *= 2.0
        lam_hi, vec = _lambda_max(disc, alpha, hi, vec)
    lo = hi / 2.0
    lam_lo, vec = _lambda_max(disc, alpha, lo, vec)
    steps = 0
    while lam_lo <= 1.0:
        steps += 1
        if steps > _BRACKET_BUDGET:
            raise NoBoundStateError(
                f"lambda_max <= 1 down to kappa = {lo:.3e}; grid too coarse for alpha = {alpha}"
            )
        hi, lam_hi = lo, lam_lo
        lo /= 2.0
        lam_lo, vec = _lambda_max(disc, alpha, lo, vec)

    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lam_mid, vec = _lambda_max(disc, alpha, mid, vec)
        iterations += 1
        if lam_mid > 1.0:
            lo, lam_lo = mid, lam_mid
        else:
            hi, lam_hi = mid, lam_mid
    kappa = lo + (lam_lo - 1.0) * (hi - lo) / (lam_lo - lam_hi)
    lam, phi = _lambda_max(disc, alpha, kappa, vec)
    residual = abs(lam - 1.0)
    if residual > max(tol, 1e-10):
        raise ConvergenceError("eigenvalue residual above tolerance", residual=residual, kappa=kappa)
    return GroundStateResult(
        kappa_star=kappa,
        eigenvector=phi,
        lambda_residual=residual,
        bisection_iterations=iterations,
        grid_size=curve.grid_size,
        alpha=alpha,
        nodes=disc.nodes,
        weights=disc.weights,
        node_points=disc.points,
        self_intersecting=disc.self_intersecting,
    )


def lambda_max_curve(curve: ArcLengthCurve, alpha, kappas):
    """``lambda_max`` on a sequence of ``kappa`` values (shares the geometry setup)."""
    _require_closed(curve)
    disc = _Discretisation(curve)
    out = []
    vec = None
    for kappa in kappas:
        lam, vec = _lambda_max(disc, alpha, float(kappa), vec)
        out.append(lam)
    return np.array(out)


def eigenfunction_at(result: GroundStateResult, curve: ArcLengthCurve, x) -> np.ndarray:
    """Planar eigenfunction ``psi(x) = sum_i w_i K0(kappa |x - Gamma(s_i)|) phi_i / (2 pi)``.

    ``x`` may be a single point or an ``(M, 2)`` array.

    Raises
    ------
    OnSupportError
        If a point lies within ``1e-8 L`` of a sample of the curve.
    """
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if result.node_points is not None:
        nodes, weights = result.node_points, result.weights
    else:
        if curve.grid_size != result.grid_size:
            raise ArgumentError("curve grid does not match the stored eigenvector")
        nodes, weights = curve.points, np.full(curve.grid_size, curve.step)
    out = np.empty(len(pts))
    for lo in range(0, len(pts), 256):
        chunk = pts[lo:lo + 256]
        d = np.hypot(chunk[:, None, 0] - nodes[None, :, 0], chunk[:, None, 1] - nodes[None, :, 1])
        if np.any(d <= 1e-8 * curve.length):
            raise OnSupportError("evaluation point lies on the curve")
        out[lo:lo + 256] = (bessel_k0(result.kappa_star * d) @ (weights * result.eigenvector)) / (2 * np.pi)
    return float(out[0]) if single else out


def strong_coupling_reference(spec: CurvatureSpec, M: int = 64) -> float:
    """Lowest eigenvalue of ``-d^2/ds^2 - gamma(s)^2 / 4`` with periodic conditions.

    Fourier-Galerkin on ``2M + 1`` exponentials; the potential is a
    trigonometric polynomial so its coefficients are computed exactly by FFT.
    """
    if int(M) != M or M < 1:
        raise ArgumentError("mode cutoff must be a positive integer")
    L = spec.length
    top = max([n for n, _, _ in spec.modes], default=0)
    samples = 4 * M + 8 * top + 8
    s = np.arange(samples) * L / samples
    pot = -0.25 * spec.curvature(s) ** 2
    coef = np.fft.fft(pot) / samples
    k = np.arange(-M, M + 1)
    diff = k[:, None] - k[None, :]
    H = coef[diff % samples]
    H = H + np.diag((2 * np.pi * k / L) ** 2)
    vals, vecs = np.linalg.eigh(H)
    # Rayleigh quotient: eigh is only accurate to eps * ||H|| ~ eps * M^2 in absolute terms
    v = vecs[:, 0]
    return float(np.real(np.vdot(v, H @ v)) / np.real(np.vdot(v, v)))
