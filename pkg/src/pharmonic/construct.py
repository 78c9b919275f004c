"""Harmonic homogeneous polynomial maps ``h`` with ``|h(x)| = |x|^k``.

Each builder returns a :class:`HarmonicCandidate`; :func:`verify` checks the
four polynomial identities exactly:

* h1: every component is harmonic,
* h2: the squared components sum to ``|x|^(2k)``,
* h3: ``|grad h|^2 = (kn + k(2k - 2)) |x|^(2k - 2)``,
* h4: ``x . grad h_j = k h_j`` for every component (Euler's identity).
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import hurwitz
from .hurwitz import HurwitzFamily
from .polyalg import Component, MultiPoly, component_square_sum, radial_power

METHODS = ("simple", "even", "hurwitz", "higher", "spherical")


@dataclass(frozen=True)
class HarmonicCandidate:
    n: int
    N: int
    k: int
    components: tuple[Component, ...]
    provenance: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("domain dimension n must be at least 2")
        if self.k < 1:
            raise ValueError("degree k must be at least 1")
        if len(self.components) != self.N:
            raise ValueError(f"expected {self.N} components, got {len(self.components)}")
        for c in self.components:
            if c.nvars != self.n:
                raise ValueError(f"component in {c.nvars} variables, expected {self.n}")
            if not c.poly.is_homogeneous(self.k):
                raise ValueError(f"component {c} is not homogeneous of degree {self.k}")

    @classmethod
    def of(cls, n: int, k: int, components: Iterable[Component], provenance: str = ""):
        comps = tuple(components)
        return cls(n, len(comps), k, comps, provenance)

    def eval_float(self, x):
        """Values of all components at ``x`` (shape ``(N,)`` or ``(M, N)``)."""
        import numpy as np

        return np.stack([c.eval_float(x) for c in self.components], axis=-1)

    def padded(self, extra: int) -> "HarmonicCandidate":
        """Append ``extra`` zero components."""
        zero = Component.rational(MultiPoly.zero(self.n))
        return HarmonicCandidate.of(self.n, self.k, self.components + (zero,) * extra,
                                    self.provenance + f"+{extra}zero")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "k": self.k,
            "provenance": self.provenance,
            "components": [c.to_json() for c in self.components],
        }

    @classmethod
    def from_json(cls, data) -> "HarmonicCandidate":
        comps = tuple(Component.from_json(c) for c in data["components"])
        return cls(int(data["n"]), int(data["N"]), int(data["k"]), comps, data.get("provenance", ""))


@dataclass
class AdmissibilityReport:
    h1_ok: bool
    h2_ok: bool
    h3_ok: bool
    h4_ok: bool
    witnesses: dict[str, list] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.h1_ok and self.h2_ok and self.h3_ok and self.h4_ok

    @property
    def implication_holds(self) -> bool:
        """h1 and h2 imply h3 and h4."""
        return not (self.h1_ok and self.h2_ok) or (self.h3_ok and self.h4_ok)

    def failures(self) -> list[str]:
        return [name for name in ("h1", "h2", "h3", "h4") if not getattr(self, f"{name}_ok")]

    def to_json(self) -> dict:
        return {
            "h1": self.h1_ok,
            "h2": self.h2_ok,
            "h3": self.h3_ok,
            "h4": self.h4_ok,
            "witnesses": {
                key: [{"component": j, "poly": p.to_json(), "text": str(p)} for j, p in items]
                for key, items in self.witnesses.items()
            },
        }


def verify(h: HarmonicCandidate) -> AdmissibilityReport:
    n, k = h.n, h.k
    witnesses: dict[str, list] = {}

    bad = [(j, c.poly.laplacian()) for j, c in enumerate(h.components)]
    bad = [(j, p) for j, p in bad if not p.is_zero() and h.components[j].scale != 0]
    if bad:
        witnesses["h1"] = bad

    diff2 = component_square_sum(h.components) - radial_power(n, 2 * k)
    if not diff2.is_zero():
        witnesses["h2"] = [(-1, diff2)]

    grad_sq = MultiPoly.zero(n)
    for c in h.components:
        weight = c.scale ** 2 * c.radicand
        if not weight:
            continue
        for i in range(n):
            grad_sq = grad_sq + c.poly.partial(i).square().scale(weight)
    target = radial_power(n, 2 * k - 2).scale(k * n + k * (2 * k - 2))
    diff3 = grad_sq - target
    if not diff3.is_zero():
        witnesses["h3"] = [(-1, diff3)]

    bad = []
    for j, c in enumerate(h.components):
        euler = sum((MultiPoly.var(n, i) * c.poly.partial(i) for i in range(n)), MultiPoly.zero(n))
        d = euler - c.poly.scale(k)
        if not d.is_zero():
            bad.append((j, d))
    if bad:
        witnesses["h4"] = bad

    return AdmissibilityReport(
        "h1" not in witnesses, "h2" not in witnesses, "h3" not in witnesses, "h4" not in witnesses,
        witnesses,
    )


# -- builders ------------------------------------------------------------------


def _x(n: int) -> list[MultiPoly]:
    return [MultiPoly.var(n, i) for i in range(n)]


def _sq_sum(xs: Sequence[MultiPoly], n: int) -> MultiPoly:
    return sum((v.square() for v in xs), MultiPoly.zero(n))


def build_simple(n: int) -> HarmonicCandidate:
    """Components ``x_i^2 - x_j^2`` and ``2 x_i x_j`` for all ``i < j``; ``N = n(n-1)``.

    For ``n > 2`` the two groups need the weights ``1/(n-1)`` and
    ``n/(2(n-1))`` on their squares to sum to ``|x|^4``, so the components
    carry the radicals ``sqrt(n-1)/(n-1)`` and ``sqrt(2n(n-1))/(2(n-1))``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    x = _x(n)
    pairs = list(itertools.combinations(range(n), 2))
    diff_scale, diff_rad = Fraction(1, n - 1), n - 1
    prod_scale, prod_rad = Fraction(1, 2 * (n - 1)), 2 * n * (n - 1)
    comps = [Component(diff_scale, diff_rad, x[i].square() - x[j].square()) for i, j in pairs]
    comps += [Component(prod_scale, prod_rad, (x[i] * x[j]).scale(2)) for i, j in pairs]
    return HarmonicCandidate.of(n, 2, comps, "simple")


def build_even_simple(n: int) -> HarmonicCandidate:
    """``(|y|^2 - |z|^2, 2 y_i z_j)`` for ``x = (y, z)``; ``N = 1 + n^2/4``."""
    if n < 2 or n % 2:
        raise ValueError(f"even-simple construction needs even n >= 2, got {n}")
    m = n // 2
    x = _x(n)
    y, z = x[:m], x[m:]
    comps = [Component.rational(_sq_sum(y, n) - _sq_sum(z, n))]
    comps += [Component.rational((yi * zj).scale(2)) for yi in y for zj in z]
    return HarmonicCandidate.of(n, 2, comps, "even")


def _check_square_family(F: HurwitzFamily, m: int):
    if (F.r, F.s) != (m, m):
        raise ValueError(f"need a Hurwitz family with r = s = {m}, got [{F.r},{F.s},{F.t}]")
    if not F.matrix_equations_hold():
        raise ValueError("Hurwitz family fails the matrix equations")


def build_hurwitz_even(n: int, F: HurwitzFamily | None = None) -> HarmonicCandidate:
    """``(|y|^2 - |z|^2, 2F(y, z))`` with ``N = 1 + t``."""
    if n < 2 or n % 2:
        raise ValueError(f"Hurwitz even construction needs even n >= 2, got {n}")
    m = n // 2
    if F is None:
        F = hurwitz.family_for(m, m)
    _check_square_family(F, m)
    x = _x(n)
    comps = [Component.rational(_sq_sum(x[:m], n) - _sq_sum(x[m:], n))]
    comps += [Component.rational(f.scale(2)) for f in F.bilinear_polys(n, range(m), range(m, n))]
    return HarmonicCandidate.of(n, 2, comps, f"hurwitz[{F.r},{F.s},{F.t}]")


def build_hurwitz_odd(n: int, F: HurwitzFamily | None = None) -> HarmonicCandidate:
    """Odd ``n = 2m + 1`` built from ``F_{m,m}``; ``N = 1 + t + n``.

    Components, all divided by ``2m``:
    ``sqrt(4m^2-1)(|y|^2 - |z|^2)``, ``|(y,z)|^2 - 2m x_n^2``,
    ``2 sqrt(4m^2-1) F(y, z)`` and ``2 sqrt(2m^2+m) x_i x_n``.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError(f"Hurwitz odd construction needs odd n >= 3, got {n}")
    m = (n - 1) // 2
    if F is None:
        F = hurwitz.family_for(m, m)
    _check_square_family(F, m)
    x = _x(n)
    y, z, last = x[:m], x[m:2 * m], x[n - 1]
    inv = Fraction(1, 2 * m)
    r1 = 4 * m * m - 1
    r2 = 2 * m * m + m
    comps = [Component(inv, r1, _sq_sum(y, n) - _sq_sum(z, n))]
    comps.append(Component.rational(_sq_sum(y + z, n) - last.square().scale(2 * m), inv))
    comps += [Component(2 * inv, r1, f) for f in F.bilinear_polys(n, range(m), range(m, 2 * m))]
    comps += [Component(2 * inv, r2, xi * last) for xi in x[:2 * m]]
    return HarmonicCandidate.of(n, 2, comps, f"hurwitz-odd[{F.r},{F.s},{F.t}]")


def _multinomial(k: int, alpha: Sequence[int]) -> int:
    out = math.factorial(k)
    for a in alpha:
        out //= math.factorial(a)
    return out


def _compositions(k: int, parts: int):
    """All ``alpha`` with ``len(alpha) == parts`` and ``sum(alpha) == k``, in lex order."""
    if parts == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(k - first, parts - 1):
            yield (first,) + rest


def build_higher_order(n: int, k: int) -> HarmonicCandidate:
    """Real and imaginary parts of ``z^alpha`` for ``|alpha| = k``, ``z_j = x_{2j-1} + i x_{2j}``.

    Each part is weighted by the square root of the multinomial coefficient
    of ``alpha``; ``N = 2 binom(n/2 + k - 1, k)``.
    """
    if n < 2 or n % 2:
        raise ValueError(f"higher-order construction needs even n >= 2, got {n}")
    if k < 2:
        raise ValueError(f"higher-order construction needs k >= 2, got {k}")
    m = n // 2
    x = _x(n)
    one = MultiPoly.constant(n, 1)
    zero = MultiPoly.zero(n)
    re_parts, im_parts = [], []
    for alpha in _compositions(k, m):
        re, im = one, zero
        for j, a in enumerate(alpha):
            zr, zi = x[2 * j], x[2 * j + 1]
            for _ in range(a):
                re, im = re * zr - im * zi, re * zi + im * zr
        w = _multinomial(k, alpha)
        re_parts.append(Component(Fraction(1), w, re))
        im_parts.append(Component(Fraction(1), w, im))
    comps = [c for pair in zip(re_parts, im_parts) for c in pair]
    return HarmonicCandidate.of(n, k, comps, f"higher(k={k})")


def _harmonic_basis(n: int, k: int) -> list[MultiPoly]:
    """A basis of the degree-``k`` harmonic polynomials in ``n`` variables.

    For each monomial ``m = x_1^e x'^beta`` with ``e`` in ``{0, 1}`` the sum
    ``sum_j (-1)^j x_1^(2j+e) / (2j+e)! * lap'^j(x'^beta)`` is harmonic, where
    ``lap'`` is the Laplacian in ``x_2 .. x_n``.
    """
    x1 = MultiPoly.var(n, 0)
    basis = []
    for e in (0, 1):
        for beta in _compositions(k - e, n - 1):
            term = MultiPoly.monomial((0,) + tuple(beta))
            poly = MultiPoly.zero(n)
            j = 0
            while not term.is_zero():
                coeff = Fraction((-1) ** j, math.factorial(2 * j + e))
                poly = poly + (x1 ** (2 * j + e)) * term.scale(coeff)
                term = sum((term.partial(i).partial(i) for i in range(1, n)), MultiPoly.zero(n))
                j += 1
            basis.append(poly)
    return basis


def _fischer(a: MultiPoly, b: MultiPoly) -> Fraction:
    """``<x^alpha, x^beta> = alpha! delta``, an O(n)-invariant inner product."""
    total = Fraction(0)
    for exp, c in a.items():
        d = b.terms.get(exp)
        if d is not None:
            total += c * d * math.prod(math.factorial(e) for e in exp)
    return total


def build_spherical(n: int, k: int) -> HarmonicCandidate:
    """An orthonormal basis of degree-``k`` spherical harmonics, suitably scaled.

    Any basis orthonormal for an O(n)-invariant inner product has an invariant
    square sum, hence a multiple of ``|x|^(2k)``.  Works for every ``n`` and
    ``k`` with ``N = binom(n+k-1, k) - binom(n+k-3, k-2)``; the scales carry
    square roots.
    """
    if n < 2 or k < 1:
        raise ValueError(f"spherical construction needs n >= 2 and k >= 1, got n={n}, k={k}")
    ortho: list[tuple[MultiPoly, Fraction]] = []
    for v in _harmonic_basis(n, k):
        for w, q in ortho:
            v = v - w.scale(_fischer(v, w) / q)
        ortho.append((v, _fischer(v, v)))
    # square sum is c |x|^(2k); read c off the x_1^(2k) coefficient
    lead = (2 * k,) + (0,) * (n - 1)
    c = sum((w.square().terms.get(lead, Fraction(0)) / q for w, q in ortho), Fraction(0))
    comps = []
    for w, q in ortho:
        # w / sqrt(q c) = w sqrt(num den) / num  with  q c = num / den
        qc = q * c
        comps.append(Component(Fraction(1, qc.numerator), qc.numerator * qc.denominator, w))
    return HarmonicCandidate.of(n, k, comps, f"spherical(k={k})")


def build(n: int, method: str = "hurwitz", k: int = 2) -> HarmonicCandidate:
    """Dispatch on the construction name."""
    if method == "higher":
        return build_higher_order(n, k)
    if method == "spherical":
        return build_spherical(n, k)
    if k != 2:
        raise ValueError(f"method {method!r} only builds degree-2 maps (got k={k})")
    if method == "simple":
        return build_simple(n)
    if method == "even":
        return build_even_simple(n)
    if method == "hurwitz":
        return build_hurwitz_even(n) if n % 2 == 0 else build_hurwitz_odd(n)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


# -- rational mixing (used by property tests) ------------------------------------


def rotate_components(h: HarmonicCandidate, i: int, j: int, cos: Fraction, sin: Fraction) -> HarmonicCandidate:
    """Apply a rational plane rotation to components ``i`` and ``j``.

    Both components must share the radicand; the result keeps it and moves
    the scales into the polynomials.
    """
    if cos * cos + sin * sin != 1:
        raise ValueError("(cos, sin) must lie on the unit circle")
    a, b = h.components[i], h.components[j]
    if a.radicand != b.radicand:
        raise ValueError("can only mix components with equal radicands")
    pa, pb = a.poly.scale(a.scale), b.poly.scale(b.scale)
    comps = list(h.components)
    comps[i] = Component(Fraction(1), a.radicand, pa.scale(cos) - pb.scale(sin))
    comps[j] = Component(Fraction(1), a.radicand, pa.scale(sin) + pb.scale(cos))
    return HarmonicCandidate.of(h.n, h.k, comps, h.provenance + "+rot")


# -- admissible pairs table ------------------------------------------------------

# Admissible pairs (n, N) reported in the literature for n = 2..32.
REFERENCE_TABLE = {
    2: 2, 4: 3, 6: 5, 8: 5, 10: 9, 12: 9, 14: 9, 16: 9, 18: 17, 20: 17, 22: 27, 24: 27,
    26: 29, 28: 33, 30: 33, 32: 33,
    3: 5, 5: 8, 7: 12, 9: 14, 11: 20, 13: 22, 15: 24, 17: 26, 19: 36, 21: 38, 23: 50,
    25: 52, 27: 56, 29: 62, 31: 64,
}


@dataclass(frozen=True)
class TableRow:
    n: int
    N_constructed: int
    N_paper: int | None
    method: str
    candidate: HarmonicCandidate = field(repr=False, compare=False)

    @property
    def gap(self) -> int | None:
        return None if self.N_paper is None else self.N_constructed - self.N_paper


def best_candidate(n: int, budget: int = hurwitz.DEFAULT_BUDGET) -> HarmonicCandidate:
    """Smallest-N verified candidate for degree 2 among all constructions."""
    m = n // 2
    options = []
    t, plan = hurwitz.best_t(m, m, budget) if m >= 1 else (None, None)
    if n % 2 == 0:
        options.append((1 + t, "hurwitz", lambda: build_hurwitz_even(n, plan.replay())))
        options.append((1 + n * n // 4, "even", lambda: build_even_simple(n)))
    else:
        options.append((1 + t + n, "hurwitz", lambda: build_hurwitz_odd(n, plan.replay())))
    options.append((n * (n - 1), "simple", lambda: build_simple(n)))
    options.sort(key=lambda o: o[0])
    for size, _, make in options:
        cand = make()
        assert cand.N == size
        if verify(cand).ok:
            return cand
    raise RuntimeError(f"no construction verified for n={n}")


def n_table(max_n: int, budget: int = hurwitz.DEFAULT_BUDGET) -> list[TableRow]:
    if max_n < 2:
        raise ValueError("max_n must be at least 2")
    rows = []
    for n in range(2, max_n + 1):
        cand = best_candidate(n, budget)
        rows.append(TableRow(n, cand.N, REFERENCE_TABLE.get(n), cand.provenance, cand))
    return rows


TABLE_COLUMNS = ("n", "N_constructed", "N_paper", "gap")


def table_csv(rows: Sequence[TableRow]) -> str:
    """CSV with header ``n,N_constructed,N_paper,gap``; unknown reference values are left empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for row in rows:
        ref = "" if row.N_paper is None else row.N_paper
        gap = "" if row.gap is None else row.gap
        w.writerow([row.n, row.N_constructed, ref, gap])
    return buf.getvalue()
