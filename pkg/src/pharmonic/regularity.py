"""Regularity curves in the ``(theta, tau)`` plane and the degree-2 observations.

Coordinates: ``theta = 1/p`` and ``tau = (gamma - 1)/p' = (1 - theta)(gamma - 1)``.
For the degree-2 maps ``tau`` is the upper root of

    tau^2 + tau (1 + theta (n-2)) - theta (1-theta)(n+1) = 0,

and the homogeneities of the stress ``A`` and of ``V`` are ``a = tau/theta``
and ``nu = tau / (2 theta (1-theta))``.

Homogeneity is used as a proxy for regularity throughout; if ``gamma - k`` is
a nonnegative even integer the map is smooth even though its homogeneity is
finite.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .pmap import exact_sqrt, gamma

FIGURES = ("thetaalpha", "conjectures", "R2R2", "n_to_infty")
N_TO_INFTY_DIMS = (2, 8, 32, 128, 512, 2048)
MARGIN = 1e-10


# -- scalar benchmark (n = 2, N = 1) ---------------------------------------------


def alpha_scalar_2d(p):
    """Optimal Hoelder exponent of ``grad u`` for planar scalar p-harmonic functions.

    ``alpha = (1 + 1/(p-1) + sqrt(1 + 14/(p-1) + 1/(p-1)^2)) / 6``.  A rational
    ``p`` (int or Fraction) gives an exact Fraction when the root is rational.
    """
    if isinstance(p, (int, Fraction)):
        p = Fraction(p)
        if p <= 1:
            raise ValueError("alpha needs p > 1")
        s = 1 / (p - 1)
        root = exact_sqrt(1 + 14 * s + s * s)
        if root is not None:
            return (1 + s + root) / 6
        return (1 + float(s) + math.sqrt(float(1 + 14 * s + s * s))) / 6
    p = float(p)
    if not p > 1:
        raise ValueError("alpha needs p > 1")
    s = 1 / (p - 1)
    return (1 + s + math.sqrt(1 + 14 * s + s * s)) / 6


def tau_scalar(theta: float) -> float:
    """``tau = alpha/p' = (1 + sqrt(1 + 12 theta - 12 theta^2)) / 6``, an arc of an ellipse."""
    return (1 + math.sqrt(1 + 12 * theta * (1 - theta))) / 6


def alpha_scalar_theta(theta: float) -> float:
    """``alpha`` as a function of ``theta``; infinite at ``theta = 1``."""
    if theta >= 1:
        return math.inf
    return tau_scalar(theta) / (1 - theta)


def scalar_ellipse_residual(theta: float, tau: float) -> float:
    """``3 tau^2 - tau + theta^2 - theta``; zero on the scalar ellipse."""
    return 3 * tau * tau - tau + theta * theta - theta


# -- degree-k examples -----------------------------------------------------------


def tau_curve(n: int, theta: float, k: int = 2) -> float:
    """Upper root of ``tau^2 + tau (1 + theta(n-2)) + theta(1-theta)(n-1-k(k+n-2)) = 0``.

    Written in rationalized form so it is stable at ``theta -> 0``.
    """
    b = 1 + theta * (n - 2)
    c = theta * (1 - theta) * (k * (k + n - 2) - (n - 1))
    return 2 * c / (b + math.sqrt(b * b + 4 * c))


def tau_residual(n: int, theta: float, tau: float, k: int = 2) -> float:
    return tau * tau + tau * (1 + theta * (n - 2)) + theta * (1 - theta) * (n - 1 - k * (k + n - 2))


def v_c1_boundary(theta: float) -> float:
    """``tau`` at which ``nu = 1``: ``tau = 2 theta (1 - theta)``."""
    return 2 * theta * (1 - theta)


# -- curves ----------------------------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    theta: float
    series: str
    value: float
    n: int | None = None
    k: int | None = None


def _theta_grid(grid: int) -> list[float]:
    if grid < 2:
        raise ValueError("grid needs at least 2 points")
    return [i / (grid - 1) for i in range(grid)]


def _series(figure: str) -> list[tuple[str, int | None, object]]:
    """``(label, n, f(theta))`` for each curve of a figure."""
    if figure == "thetaalpha":
        return [
            ("alpha", 2, alpha_scalar_theta),
            ("tau_scalar", 2, tau_scalar),
        ]
    if figure == "conjectures":
        return [
            ("grad_u", 2, alpha_scalar_theta),
            ("A", 2, lambda t: math.inf if t == 0 else alpha_scalar_theta(t) * (1 / t - 1)),
            ("V", 2, lambda t: math.inf if t == 0 else alpha_scalar_theta(t) / (2 * t)),
            ("C1", None, lambda t: 1.0),
        ]
    if figure == "R2R2":
        return [
            ("tau_scalar", 2, tau_scalar),
            ("V_C1_boundary", None, v_c1_boundary),
        ] + [(f"tau_n{n}", n, lambda t, n=n: tau_curve(n, t)) for n in (2, 3, 4)]
    if figure == "n_to_infty":
        return [(f"tau_n{n}", n, lambda t, n=n: tau_curve(n, t)) for n in N_TO_INFTY_DIMS] + [
            ("limit", None, lambda t: 1 - t)
        ]
    raise ValueError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")


def curve_points(figure: str, grid: int) -> list[CurvePoint]:
    """All points of a figure, ordered by ``theta`` and then by series."""
    series = _series(figure)
    pts = []
    for theta in _theta_grid(grid):
        for label, n, f in series:
            pts.append(CurvePoint(theta, label, float(f(theta)), n, 2 if n else None))
    return pts


def _fmt(v: float) -> str:
    return "%.17g" % v


def curves_csv(figure: str, grid: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "series", "value"])
    for pt in curve_points(figure, grid):
        w.writerow([_fmt(pt.theta), pt.series, _fmt(pt.value)])
    return buf.getvalue()


def emit_curves(figure: str, grid: int, out=None) -> str:
    """CSV text for ``figure``; also written to ``out`` (a path) when given."""
    text = curves_csv(figure, grid)
    if out is not None:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


# -- observations B1..B5 (k = 2) -------------------------------------------------


def cubic(theta: Fraction) -> Fraction:
    """``2 theta^3 - 5 theta^2 + 4 theta - 1 = (theta - 1)^2 (2 theta - 1)``."""
    return 2 * theta ** 3 - 5 * theta ** 2 + 4 * theta - 1


@dataclass
class Observation:
    name: str
    ok: bool = True
    failures: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def require(self, cond: bool, msg: str):
        if not cond:
            self.ok = False
            if len(self.failures) < 20:
                self.failures.append(msg)

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "failures": self.failures, "details": self.details}


@dataclass
class BReport:
    observations: dict[str, Observation]
    n_range: tuple[int, ...]
    grid_size: int

    @property
    def ok(self) -> bool:
        return all(o.ok for o in self.observations.values())

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "n_range": list(self.n_range),
            "grid_size": self.grid_size,
            "observations": {k: v.to_json() for k, v in self.observations.items()},
        }


def default_theta_grid(points: int = 1000) -> list[Fraction]:
    """``i/(points+1)`` for ``i = 1..points``: interior, rational, avoids ``theta = 1/2``."""
    return [Fraction(i, points + 1) for i in range(1, points + 1)]


def check_B(n_range: Iterable[int] = range(2, 13), theta_grid: Iterable[Fraction] | None = None,
            far_dims: Iterable[int] = N_TO_INFTY_DIMS) -> BReport:
    """Check the degree-2 regularity observations on a ``theta`` grid.

    B1: ``gamma`` decreasing in ``p`` from ``2n/(n-1)`` to ``1``.
    B2: ``a`` increasing in ``p`` from ``0`` to ``n+1``.
    B3: ``gamma > 2`` for ``p < 2``, ``gamma(2) = 2``, and ``gamma - 2 -> 0`` as ``n`` grows.
    B4: ``a >= 1`` for ``p >= 2`` and ``a(2) = 1``.
    B5: ``nu < 1`` for ``n >= 3`` and ``p`` in ``(1, 2)``; for ``n = 2``, ``nu >= 1``.

    Grid monotonicity is checked with margin ``MARGIN`` between neighbours and
    cross-checked against the sign of the implicit-derivative identities.
    """
    n_range = tuple(n_range)
    thetas = sorted(default_theta_grid() if theta_grid is None else theta_grid)
    if any(n < 2 for n in n_range):
        raise ValueError("n must be at least 2")
    obs = {name: Observation(name) for name in ("B1", "B2", "B3", "B4", "B5")}
    b1, b2, b3, b4, b5 = obs.values()
    half = Fraction(1, 2)

    for n in n_range:
        profiles = [gamma(n, 2, 1 / t) for t in thetas]
        gs = [float(pr.gamma) for pr in profiles]
        as_ = [float(pr.a) for pr in profiles]
        nus = [float(pr.nu) for pr in profiles]

        # B1: along increasing theta (decreasing p) gamma increases
        for i in range(1, len(thetas)):
            b1.require(gs[i] - gs[i - 1] > MARGIN, f"n={n}: gamma not increasing in theta at {thetas[i]}")
            b2.require(as_[i - 1] - as_[i] > MARGIN, f"n={n}: a not decreasing in theta at {thetas[i]}")
        for t, g, a in zip(thetas, gs, as_):
            p, th = 1 / float(t), float(t)
            dg_dp = -(g * g - g) / (2 * g * (p - 1) + n - p)
            b1.require(dg_dp < 0, f"n={n}: d gamma/dp >= 0 at theta={t}")
            da_dth = -(a * a + a * (n - 2) + (n + 1)) / (2 * a * th + 1 + th * (n - 2))
            b2.require(da_dth < 0, f"n={n}: da/dtheta >= 0 at theta={t}")
            b2.require(abs(a * a * th + a * (1 + th * (n - 2)) - (1 - th) * (n + 1)) < 1e-9 * (1 + a * a),
                       f"n={n}: a off its quadratic at theta={t}")
        b1.require(gamma(n, 2, 1).gamma == Fraction(2 * n, n - 1), f"n={n}: gamma(p=1) != 2n/(n-1)")
        b1.require(gamma(n, 2, math.inf).gamma == 1, f"n={n}: gamma(p=inf) != 1")
        b2.require(gamma(n, 2, 1).a == 0, f"n={n}: a(p=1) != 0")
        b2.require(gamma(n, 2, math.inf).a == n + 1, f"n={n}: a(p=inf) != n+1")

        # B3 / B4 around p = 2
        p2 = gamma(n, 2, 2)
        b3.require(p2.gamma == 2, f"n={n}: gamma(2) != 2")
        b4.require(p2.a == 1, f"n={n}: a(2) != 1")
        for t, g, a, nu in zip(thetas, gs, as_, nus):
            if t > half:
                b3.require(g > 2, f"n={n}: gamma <= 2 at theta={t}")
            else:
                b4.require(a >= 1, f"n={n}: a < 1 at theta={t}")
            if half < t < 1:
                if n >= 3:
                    b5.require(nu < 1, f"n={n}: nu >= 1 at theta={t}")
                else:
                    b5.require(nu >= 1, f"n=2: nu < 1 at theta={t}")

        # B5 mechanism: d gamma/dn = (2 - gamma) / (2 gamma (p-1) + n - p) < 0 for p < 2
        for t, g in zip(thetas, gs):
            if t > half:
                p = 1 / float(t)
                b5.require((2 - g) / (2 * g * (p - 1) + n - p) < 0, f"n={n}: d gamma/dn >= 0 at theta={t}")

    # B5 certificate for n = 3, exact in rationals
    upper = [t for t in thetas if half < t < 1]
    b5.require(all(cubic(t) > 0 for t in upper), "cubic not positive on (1/2, 1)")
    b5.details["cubic_points_checked"] = len(upper)
    b5.details["cubic_factorization_holds"] = all(
        cubic(t) == (t - 1) ** 2 * (2 * t - 1) for t in thetas
    )
    b5.require(b5.details["cubic_factorization_holds"], "cubic factorization mismatch")

    # B3 surrogate: inf over n of gamma - 2 at fixed p < 2 tends to 0
    dims = sorted(set(n_range) | set(far_dims))
    surrogate = {}
    for p in (Fraction(3, 2), Fraction(5, 4), Fraction(19, 10)):
        gaps = [float(gamma(n, 2, p).gamma) - 2 for n in dims]
        b3.require(all(x > 0 for x in gaps), f"gamma <= 2 at p={p}")
        b3.require(all(gaps[i] < gaps[i - 1] for i in range(1, len(gaps))),
                   f"gamma - 2 not decreasing in n at p={p}")
        surrogate[str(p)] = dict(zip(map(str, dims), gaps))
    b3.details["gamma_minus_2_by_n"] = surrogate
    b3.details["note"] = ("the statement that C^{1,eps} fails for some example is checked through "
                          "gamma - 2 decreasing towards 0 as n grows")
    return BReport(obs, n_range, len(thetas))
