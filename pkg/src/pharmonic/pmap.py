"""Homogeneity exponents and the maps ``u(x) = |x|^(gamma - k) h(x)``.

``gamma`` is the larger root of ``gamma^2 (p-1) + gamma (n-p) - k(k+n-2)``
for ``1 < p < inf``, ``k(k+n-2)/(n-1)`` at ``p = 1`` and ``1`` at
``p = inf``.  Derived quantities, with ``theta = 1/p``:

* ``tau = (1 - theta)(gamma - 1)``
* ``a = (gamma - 1)(p - 1)``, the homogeneity of ``|grad u|^(p-2) grad u``
* ``nu = (gamma - 1) p / 2``, the homogeneity of ``|grad u|^((p-2)/2) grad u``

At ``p = inf`` the values of ``a`` and ``nu`` are the limits
``k(k+n-2) - (n-1)`` and half of that.

p is kept exact whenever possible: integers, fractions and even floats are
converted to :class:`~fractions.Fraction` (floats are dyadic rationals), so
``gamma`` is returned as an exact rational whenever the discriminant is a
perfect square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Union

import numpy as np

from .construct import HarmonicCandidate, verify
from .polyalg import MultiPoly

INF = math.inf
Real = Union[Fraction, float]


class AdmissibilityError(ValueError):
    """The polynomial map fails one of the admissibility identities."""


def parse_p(value) -> Real:
    """Parse ``p`` from ``'inf'``, ``'3/2'``, ``'1.5'``, numbers; ``inf`` stays a float."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "+inf", "oo"):
            return INF
        return Fraction(text)
    if isinstance(value, float) and math.isinf(value):
        if value < 0:
            raise ValueError("p must be at least 1")
        return INF
    return Fraction(value)


def format_p(p: Real) -> str:
    return "inf" if is_inf(p) else str(Fraction(p))


def is_inf(p) -> bool:
    return isinstance(p, float) and math.isinf(p)


def exact_sqrt(q: Fraction) -> Fraction | None:
    """Square root of a nonnegative rational if it is rational."""
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class ExponentProfile:
    n: int
    k: int
    p: Real
    theta: Real
    gamma: Real
    tau: Real
    a: Real
    nu: Real

    @property
    def exact(self) -> bool:
        return isinstance(self.gamma, Fraction)

    @property
    def c(self) -> int:
        """``k(k+n-2)``."""
        return self.k * (self.k + self.n - 2)

    def quadratic_residual(self, gamma: Real | None = None) -> float:
        """Residual of the defining quadratic at ``gamma``, evaluated exactly.

        For ``p = inf`` the quadratic is divided by ``p`` first
        (``gamma^2 (1-theta) + gamma (n theta - 1) - c theta`` at ``theta = 0``).
        """
        g = Fraction(self.gamma if gamma is None else gamma)
        n, c = self.n, self.c
        if is_inf(self.p):
            return float(g * g - g)
        p = Fraction(self.p)
        return float(g * g * (p - 1) + g * (n - p) - c)

    def tau_residual(self) -> float:
        t, th = Fraction(self.tau), Fraction(self.theta)
        n, c = self.n, self.c
        return float(t * t + t * (1 + th * (n - 2)) + th * (1 - th) * (n - 1 - c))

    def to_json(self) -> dict:
        def num(v):
            if isinstance(v, Fraction):
                return {"value": float(v), "exact": str(v)}
            if is_inf(v):
                return {"value": "inf", "exact": "inf"}
            return {"value": float(v)}

        return {
            "n": self.n,
            "k": self.k,
            "p": format_p(self.p),
            "theta": num(self.theta),
            "gamma": num(self.gamma),
            "tau": num(self.tau),
            "a": num(self.a),
            "nu": num(self.nu),
            "exact": self.exact,
            "note": "regularity is reported as homogeneity; if gamma - k is a nonnegative "
                    "even integer the map is smooth despite homogeneity gamma",
        }


def _larger_root(p: Fraction, n: int, c: int) -> Real:
    qa, qb = p - 1, Fraction(n) - p
    disc = qb * qb + 4 * qa * c
    root = exact_sqrt(disc)
    if root is not None:
        # both forms are exact here; the rationalized one also covers qa -> 0
        return 2 * c / (qb + root) if qb > 0 else (root - qb) / (2 * qa)
    sq = math.sqrt(disc)
    fa, fb = float(qa), float(qb)
    if fb > 0:
        return 2.0 * c / (fb + sq)
    return (sq - fb) / (2.0 * fa)


def gamma(n: int, k: int, p) -> ExponentProfile:
    """Exponent profile for dimension ``n``, degree ``k`` and ``p`` in ``[1, inf]``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if k < 1:
        raise ValueError("k must be at least 1")
    p = parse_p(p)
    c = k * (k + n - 2)
    if is_inf(p):
        a = Fraction(c - (n - 1))
        return ExponentProfile(n, k, p, Fraction(0), Fraction(1), Fraction(0), a, a / 2)
    if p < 1:
        raise ValueError(f"p must be at least 1, got {p}")
    if p == 1:
        g = Fraction(c, n - 1)
        return ExponentProfile(n, k, p, Fraction(1), g, Fraction(0), Fraction(0), (g - 1) / 2)
    g = Fraction(1) if k == 1 else _larger_root(p, n, c)
    theta = 1 / p
    if isinstance(g, Fraction):
        return ExponentProfile(n, k, p, theta, g, (1 - theta) * (g - 1), (g - 1) * (p - 1),
                               (g - 1) * p / 2)
    pf, tf = float(p), float(theta)
    return ExponentProfile(n, k, p, theta, g, (1 - tf) * (g - 1), (g - 1) * (pf - 1),
                           (g - 1) * pf / 2)


def other_root(profile: ExponentProfile) -> float:
    """The smaller root of the quadratic (``p`` finite, ``p > 1``)."""
    p = float(profile.p)
    return -(float(profile.n) - p) / (p - 1) - float(profile.gamma)


@dataclass(frozen=True)
class PMap:
    """``u(x) = |x|^(gamma - k) h(x)`` for an admissible ``h``."""

    candidate: HarmonicCandidate
    p: Real
    profile: ExponentProfile

    @property
    def n(self) -> int:
        return self.candidate.n

    @property
    def N(self) -> int:
        return self.candidate.N

    @property
    def k(self) -> int:
        return self.candidate.k

    @property
    def gamma(self) -> float:
        return float(self.profile.gamma)

    def with_gamma(self, g) -> "PMap":
        """Same ``h`` with a different exponent (for negative controls)."""
        return replace(self, profile=replace(self.profile, gamma=g))

    def value(self, x) -> np.ndarray:
        """``u`` at a point ``(n,)`` or a batch ``(M, n)``; returns ``(N,)`` or ``(M, N)``."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        h = self.candidate.eval_float(x)
        return (r ** (self.gamma - self.k))[..., None] * h

    def gradient(self, x) -> np.ndarray:
        """Analytic ``(grad u)_{ij} = d_i u_j`` from the product rule, shape ``(n, N)``."""
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        if r == 0:
            raise ValueError("gradient is not defined at the origin")
        g, k = self.gamma, self.k
        h = self.candidate.eval_float(x)
        grad_h = np.array(
            [[c.factor() * c.poly.partial(i).eval_float(x) for c in self.candidate.components]
             for i in range(self.n)]
        )
        return (g - k) * r ** (g - k - 2) * np.outer(x, h) + r ** (g - k) * grad_h

    def to_json(self) -> dict:
        return {
            "p": format_p(self.p),
            "profile": self.profile.to_json(),
            "candidate": self.candidate.to_json(),
        }

    @classmethod
    def from_json(cls, data) -> "PMap":
        cand = HarmonicCandidate.from_json(data["candidate"])
        p = parse_p(data["p"])
        return cls(cand, p, gamma(cand.n, cand.k, p))


def _require_admissible(h: HarmonicCandidate):
    report = verify(h)
    if not report.ok:
        raise AdmissibilityError(f"candidate fails {', '.join(report.failures())}")


def assemble(h: HarmonicCandidate, p) -> PMap:
    _require_admissible(h)
    p = parse_p(p)
    return PMap(h, p, gamma(h.n, h.k, p))


def infinity_map(h: HarmonicCandidate) -> PMap:
    """``u(x) = |x|^(1-k) h(x)``, solving the infinity-Laplace system."""
    return assemble(h, INF)


def grad_norm_sq_constant(u: PMap) -> float:
    """``gamma^2 + k(k+n-2)``: ``|grad u|^2 = |x|^(2(gamma-1))`` times this."""
    return float(u.profile.gamma) ** 2 + u.profile.c


def proof_terms(u: PMap) -> dict[str, float]:
    """Coefficients of ``|x|^r h(x)`` in the three parts of the divergence.

    With ``r = gamma p - p - gamma - k``: ``I = (gamma-k) r``,
    ``II = (gamma-k)(n+k)`` and ``III = k (r+2)``.
    """
    if is_inf(u.p) or u.p <= 1:
        raise ValueError("proof terms need 1 < p < inf")
    g, p, n, k = float(u.profile.gamma), float(u.p), u.n, u.k
    r = g * p - p - g - k
    return {"r": r, "I": (g - k) * r, "II": (g - k) * (n + k), "III": k * (r + 2)}


def symbolic_residual(u: PMap) -> float:
    """``I + II + III``; vanishes exactly when ``gamma`` solves the quadratic."""
    t = proof_terms(u)
    return t["I"] + t["II"] + t["III"]


def locally_p_harmonic_identity() -> tuple[MultiPoly, MultiPoly]:
    """Both sides of the pointwise identity as polynomials in ``(gamma, p, n, k)``.

    Left: ``(gamma-k)(r+n+k) + k(r+2)`` with ``r = gamma p - p - gamma - k``.
    Right: ``gamma^2 (p-1) + gamma (n-p) - k(n+k-2)``.
    """
    g, p, n, k = (MultiPoly.var(4, i) for i in range(4))
    r = g * p - p - g - k
    lhs = (g - k) * (r + n + k) + k * (r + 2)
    rhs = g * g * (p - 1) + g * (n - p) - k * (n + k - 2)
    return lhs, rhs


def gradient_norm_identity(u: PMap, x) -> tuple[float, float]:
    """``(|grad u(x)|^2, |x|^(2(gamma-1)) (gamma^2 + k(k+n-2)))``."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0:
        raise ValueError("x must be nonzero")
    lhs = float(np.sum(u.gradient(x) ** 2))
    rhs = r ** (2 * (u.gamma - 1)) * grad_norm_sq_constant(u)
    return lhs, rhs
