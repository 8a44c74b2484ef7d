"""
Mean-chord functionals and the inequality family built on them.

Continuous (curve) forms, for ``0 < u <= L/2`` and ``p > 0``::

    C+p:  int_0^L |Gamma(s+u) - Gamma(s)|^p  ds <= L^(1+p) / pi^p * sin^p(pi u / L)
    C-p:  int_0^L |Gamma(s+u) - Gamma(s)|^-p ds >= pi^p L^(1-p) / sin^p(pi u / L)

Discrete (equilateral polygon) forms, for ``1 <= m <= N // 2``::

    D+p:  sum_n |y_{n+m} - y_n|^p  <= N l^p sin^p(pi m / N) / sin^p(pi / N)
    D-p:  sum_n |y_{n+m} - y_n|^-p >= N sin^p(pi / N) / (l^p sin^p(pi m / N))

The right-hand sides are the circle and regular-polygon values. The
negative-power families are lower bounds: by the Cauchy-Schwarz inequality
``int d^-p >= L^2 / int d^p``, so ``+p`` implies ``-p`` in this direction.
Every report stores ``margin`` with the sign convention "positive means the
inequality holds": ``rhs - lhs`` for ``+p`` and ``lhs - rhs`` for ``-p``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from math import comb
from typing import Optional, Union

import numpy as np

from .errors import ArgumentError, PreconditionError, SingularChordError
from .geometry import ArcLengthCurve, Polygon, build_paperclip
from .specfun import bessel_k0

HOLDS = "holds"
VIOLATED = "violated"
EQUALITY = "equality-within-tol"

SMOOTH_RTOL = 1e-8
CORNERED_RTOL = 1e-6
DISCRETE_RTOL = 1e-12

_GREGORY = (1 / 12, 1 / 24, 19 / 720, 3 / 160, 863 / 60480, 275 / 24192)


# --------------------------------------------------------------------------
# quadrature on the arc grid


def gregory_weights(n: int, order: int = 6) -> np.ndarray:
    """Gregory end-corrected trapezoid weights on ``n + 1`` unit-spaced nodes."""
    order = max(0, min(order, len(_GREGORY), (n - 1) // 2))
    w = np.ones(n + 1)
    w[0] = w[-1] = 0.5
    for k in range(1, order + 1):
        g = _GREGORY[k - 1]
        for j in range(k + 1):
            c = comb(k, j)
            w[n - j] -= g * (-1) ** j * c
            w[j] -= g * (-1) ** j * c
    return w


def _panel_weights(N, break_indices):
    """Periodic weights, trapezoid inside panels with Gregory ends at the breaks."""
    cuts = sorted(set(int(b) % N for b in break_indices))
    if not cuts:
        return np.ones(N)
    w = np.zeros(N)
    edges = cuts + [cuts[0] + N]
    for lo, hi in zip(edges[:-1], edges[1:]):
        n = hi - lo
        if n == 0:
            continue
        idx = np.arange(lo, hi + 1) % N
        np.add.at(w, idx, gregory_weights(n))
    return w


def _chord_weights(curve: ArcLengthCurve, m: int) -> np.ndarray:
    # kinks of s -> |Gamma(s+u) - Gamma(s)| sit at s = b and s = b - u
    if not curve.breaks:
        return np.ones(curve.grid_size)
    idx = []
    for b in curve.breaks:
        k = curve.grid_index(b % curve.length)
        if k is None:
            return np.ones(curve.grid_size)
        idx.extend([k, k - m])
    return _panel_weights(curve.grid_size, idx)


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class ChordMoment:
    """``c^p_Gamma(u) = int_0^L |Gamma(s+u) - Gamma(s)|^p ds``."""

    curve: ArcLengthCurve = field(repr=False)
    u: float
    p: float
    value: float


@dataclass(frozen=True)
class InequalityReport:
    """One instance of a mean-chord inequality.

    ``margin`` is ``rhs - lhs`` for the ``+p`` families and ``lhs - rhs`` for
    the ``-p`` lower bounds, so ``holds`` always means ``margin >= -tolerance``.
    """

    family: str
    parameter: float
    p: float
    lhs: float
    rhs: float
    margin: float
    verdict: str
    tolerance: float
    scale: tuple = ()

    @property
    def holds(self) -> bool:
        return self.verdict != VIOLATED

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs

    def row(self) -> dict:
        return {
            "family": self.family,
            "u_or_m": self.parameter,
            "p": self.p,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "verdict": self.verdict,
        }


REPORT_FIELDS = ("family", "u_or_m", "p", "lhs", "rhs", "margin", "verdict")


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in rep.row().items()})
    return buf.getvalue()


def reports_to_jsonl(reports) -> str:
    return "".join(json.dumps(rep.row()) + "\n" for rep in reports)


def _verdict(lhs, rhs, tol, sign="+"):
    margin = rhs - lhs if sign == "+" else lhs - rhs
    if abs(margin) <= tol:
        verdict = EQUALITY
    elif margin >= -tol:
        verdict = HOLDS
    else:
        verdict = VIOLATED
    return margin, verdict


def _check_exponent(p):
    if not (math.isfinite(p) and p != 0):
        raise ArgumentError(f"exponent must be finite and nonzero, got {p!r}")
    return float(p)


def _check_sign(sign):
    if sign not in ("+", "-"):
        raise ArgumentError(f"sign must be '+' or '-', got {sign!r}")
    return sign


# --------------------------------------------------------------------------
# continuous family


def chord_moment(curve: ArcLengthCurve, u, p) -> ChordMoment:
    """``int_0^L |Gamma(s+u) - Gamma(s)|^p ds`` on the sample grid.

    ``u`` must be a multiple of the grid step. Curves with breaks at grid
    nodes are integrated panel-wise with Gregory end corrections; all others
    use the periodic trapezoid rule.

    Raises
    ------
    ArgumentError
        ``u`` outside ``(0, L/2]``, off-grid, or ``p == 0``.
    SingularChordError
        A zero chord is met with ``p < 0``.
    """
    p = _check_exponent(p)
    L = curve.length
    if not (0 < u <= 0.5 * L * (1 + 1e-12)):
        raise ArgumentError(f"u must lie in (0, L/2], got {u!r}")
    m = curve.grid_index(u)
    if m is None:
        raise ArgumentError(f"u = {u!r} is not a multiple of the grid step {curve.step!r}; resample first")
    chords = curve.chords(m)
    if p < 0 and np.any(chords <= 0):
        raise SingularChordError(f"zero chord at separation u = {u!r}")
    w = _chord_weights(curve, m)
    value = float(curve.step * np.dot(w, chords**p))
    return ChordMoment(curve=curve, u=m * curve.step, p=p, value=value)


def circle_bound(L, u, p, sign="+"):
    """Right-hand side of ``C+p`` / ``C-p`` (the circle value)."""
    s = math.sin(math.pi * u / L)
    if sign == "+":
        return L ** (1 + p) / math.pi**p * s**p
    return math.pi**p * L ** (1 - p) / s**p


def default_tolerance(curve: ArcLengthCurve) -> float:
    return CORNERED_RTOL if curve.corners else SMOOTH_RTOL


def check_continuous(curve: ArcLengthCurve, u, p, sign="+", rtol: Optional[float] = None) -> InequalityReport:
    """Evaluate ``C+p`` (``sign='+'``) or ``C-p`` (``sign='-'``) for ``p > 0``."""
    sign = _check_sign(sign)
    p = _check_exponent(p)
    if p <= 0:
        raise ArgumentError("p must be positive; the sign argument selects the family")
    moment = chord_moment(curve, u, p if sign == "+" else -p)
    rhs = circle_bound(curve.length, moment.u, p, sign)
    tol = (default_tolerance(curve) if rtol is None else rtol) * rhs
    margin, verdict = _verdict(moment.value, rhs, tol, sign)
    return InequalityReport(f"C{sign}p", moment.u, p, moment.value, rhs, margin, verdict, tol, (curve.length,))


def lens_c2_closed_form(R, L, u) -> float:
    """Closed-form ``c^2(u)`` for the two-arc lens/apple of radius ``R``."""
    if not (R > L / (4 * math.pi)):
        raise ArgumentError("lens needs R > L / (4 pi)")
    if not (0 < u <= 0.5 * L * (1 + 1e-12)):
        raise ArgumentError("u must lie in (0, L/2]")
    x = u / (2 * R)
    return 8 * R**3 * (
        L / (2 * R) * math.sin(x) ** 2
        + 4 * (x * math.cos(x) - math.sin(x)) * math.cos(L / (4 * R)) * math.cos((L - 2 * u) / (4 * R))
    )


def degenerate_lens_c2(L, u) -> float:
    """``R -> infinity`` limit of the lens moment: doubled segment of length ``L/2``."""
    return L * u**2 - 4.0 / 3.0 * u**3


# --------------------------------------------------------------------------
# discrete family


def polygon_bound(N, side, m, p, sign="+"):
    """Right-hand side of ``D+p`` / ``D-p`` (the regular-polygon value)."""
    ratio = math.sin(math.pi * m / N) / math.sin(math.pi / N)
    if sign == "+":
        return N * side**p * ratio**p
    return N / (side**p * ratio**p)


def check_discrete(polygon: Polygon, m, p, sign="+", rtol: float = DISCRETE_RTOL) -> InequalityReport:
    """Evaluate ``D+p`` or ``D-p`` as an exact finite sum."""
    sign = _check_sign(sign)
    p = _check_exponent(p)
    if p <= 0:
        raise ArgumentError("p must be positive; the sign argument selects the family")
    N = polygon.n_vertices
    if int(m) != m or not (1 <= m <= N // 2):
        raise ArgumentError(f"m must be an integer in [1, {N // 2}], got {m!r}")
    m = int(m)
    diag = polygon.diagonals(m)
    if sign == "-" and np.any(diag <= 0):
        raise SingularChordError(f"zero diagonal at m = {m}")
    lhs = float(np.sum(diag ** (p if sign == "+" else -p)))
    rhs = polygon_bound(N, polygon.side_length, m, p, sign)
    tol = rtol * rhs
    margin, verdict = _verdict(lhs, rhs, tol, sign)
    return InequalityReport(f"D{sign}p", m, p, lhs, rhs, margin, verdict, tol, (N, polygon.side_length))


# --------------------------------------------------------------------------
# audits


@dataclass(frozen=True)
class ImplicationAudit:
    """Reports for ``(p, p', -p, -p')`` and whether the verdicts respect the
    monotonicity (``p => p'``) and inversion (``+q => -q``) implications."""

    reports: dict
    consistent: bool
    broken: tuple = ()


def implication_audit(target: Union[ArcLengthCurve, Polygon], u_or_m, p, p_prime, rtol=None) -> ImplicationAudit:
    if not (p > p_prime > 0):
        raise ArgumentError("need p > p' > 0")
    if isinstance(target, Polygon):
        def check(q, sign):
            return check_discrete(target, u_or_m, q, sign, **({} if rtol is None else {"rtol": rtol}))
    else:
        def check(q, sign):
            return check_continuous(target, u_or_m, q, sign, rtol)
    reports = {
        "+p": check(p, "+"),
        "+p'": check(p_prime, "+"),
        "-p": check(p, "-"),
        "-p'": check(p_prime, "-"),
    }
    rules = [("+p", "+p'"), ("+p", "-p"), ("+p'", "-p'"), ("+p", "-p'")]
    broken = tuple(f"{a} => {b}" for a, b in rules if reports[a].holds and not reports[b].holds)
    return ImplicationAudit(reports, not broken, broken)


@dataclass(frozen=True)
class JensenAudit:
    """``F_kappa(Gamma)`` against its Jensen lower bound (times ``L``)."""

    kappa: float
    functional: float
    bound: float
    tolerance: float
    chain_holds: bool
    c1_holds_everywhere: bool
    bound_nonnegative: bool

    @property
    def consistent(self) -> bool:
        return self.chain_holds and (self.bound_nonnegative or not self.c1_holds_everywhere)


def jensen_chain_audit(curve: ArcLengthCurve, kappa, tol=1e-8) -> JensenAudit:
    """Compare ``F_kappa`` with ``L * int_0^{L/2} [K0(kappa c1(u)/L) - K0(kappa L sin(pi u/L)/pi)] du``.

    ``F_kappa = int_0^{L/2} du int_0^L ds [K0(kappa |Gamma(s+u) - Gamma(s)|)
    - K0(kappa |C(s+u) - C(s)|)]`` with ``C`` the circle of the same length.
    Both u-integrals use the trapezoid rule on the grid; the integrands vanish
    at ``u = 0``.
    """
    if not (kappa > 0):
        raise ArgumentError("kappa must be positive")
    if not curve.is_closed:
        raise PreconditionError("the Jensen audit needs a closed curve")
    L, N, h = curve.length, curve.grid_size, curve.step
    half = N // 2
    inner = np.zeros(half + 1)
    jensen = np.zeros(half + 1)
    c1_ok = True
    for m in range(1, half + 1):
        u = m * h
        chords = curve.chords(m)
        if np.any(chords <= 0):
            raise SingularChordError(f"zero chord at separation u = {u!r}")
        ref = bessel_k0(kappa * L / math.pi * math.sin(math.pi * u / L))
        inner[m] = h * np.sum(bessel_k0(kappa * chords) - ref)
        c1 = h * np.sum(chords)
        jensen[m] = bessel_k0(kappa * c1 / L) - ref
        if c1 > circle_bound(L, u, 1.0) * (1 + SMOOTH_RTOL):
            c1_ok = False
    w = np.ones(half + 1)
    w[0] = w[-1] = 0.5
    F = float(h * np.dot(w, inner))
    bound = float(h * np.dot(w, jensen))
    chain = F / L >= bound - tol
    return JensenAudit(float(kappa), F, bound, tol, bool(chain), c1_ok, bound >= -tol)


# --------------------------------------------------------------------------
# paperclip probe


@dataclass(frozen=True)
class PaperclipSample:
    a: float
    b: float
    r: float
    length: float
    c2_half: float

    @property
    def constant(self) -> float:
        """``c^2(L/2) / L^3``."""
        return self.c2_half / self.length**3

    @property
    def exceeds_circle(self) -> bool:
        return self.constant > 1 / math.pi**2


def paperclip_sample(a, b, r, N=8192) -> PaperclipSample:
    curve = build_paperclip(a, b, r, N)
    value = chord_moment(curve, curve.length / 2, 2).value
    return PaperclipSample(a, b, r, curve.length, value)


def paperclip_scan(b_fractions=(1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01), r_values=(0.01, 0.005, 0.001), N=8192):
    """``c^2(L/2) / L^3`` over paperclips with long leg ``a = 1``."""
    return [paperclip_sample(1.0, b, r, N) for b in b_fractions for r in r_values]


def report_dict(rep) -> dict:
    return asdict(rep)
