"""Exact sparse multivariate polynomials over the rationals.

A :class:`MultiPoly` maps exponent tuples to nonzero :class:`~fractions.Fraction`
coefficients.  Values are immutable; every operation returns a new canonical
polynomial (no stored zero coefficients).

A :class:`Component` is ``scale * sqrt(radicand) * poly``.  Only squares of
components are ever compared, so the single radical never has to be
manipulated symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"exact coefficient required, got {type(c).__name__}")


def _grlex_key(exp: Exponent):
    return (-sum(exp), tuple(-e for e in exp))


class MultiPoly:
    """Polynomial in ``nvars`` variables with exact rational coefficients."""

    __slots__ = ("_nvars", "_terms", "_hash", "_compiled")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        clean: dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} does not have length {nvars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = _as_fraction(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self._nvars = nvars
        self._terms = clean
        self._hash = None
        self._compiled = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict[Exponent, Fraction]) -> "MultiPoly":
        # terms must already be canonical
        p = cls.__new__(cls)
        p._nvars = nvars
        p._terms = terms
        p._hash = None
        p._compiled = None
        return p

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c=1) -> "MultiPoly":
        c = _as_fraction(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def var(cls, nvars: int, i: int) -> "MultiPoly":
        """The coordinate ``x_i`` (0-based index)."""
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        exp = [0] * nvars
        exp[i] = 1
        return cls._raw(nvars, {tuple(exp): Fraction(1)})

    @classmethod
    def monomial(cls, exp: Sequence[int], c=1) -> "MultiPoly":
        return cls(len(exp), {tuple(exp): c})

    # -- basic protocol ---------------------------------------------------

    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self._nvars == other._nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == MultiPoly.constant(self._nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._nvars, frozenset(self._terms.items())))
        return self._hash

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def is_homogeneous(self, k: int | None = None) -> bool:
        degs = {sum(e) for e in self._terms}
        if not degs:
            return True
        if len(degs) > 1:
            return False
        return k is None or degs == {k}

    def _check(self, other: "MultiPoly"):
        if self._nvars != other._nvars:
            raise ValueError(f"dimension mismatch: {self._nvars} vs {other._nvars} variables")

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.constant(self._nvars, other)
        return NotImplemented

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for exp, c in other._terms.items():
            v = out.get(exp)
            if v is None:
                out[exp] = c
            else:
                v += c
                if v:
                    out[exp] = v
                else:
                    del out[exp]
        return MultiPoly._raw(self._nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self._nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "MultiPoly":
        c = _as_fraction(c)
        if not c:
            return MultiPoly.zero(self._nvars)
        return MultiPoly._raw(self._nvars, {e: v * c for e, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly._raw(self._nvars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result = MultiPoly.constant(self._nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def square(self) -> "MultiPoly":
        # cross terms computed once each
        items = list(self._terms.items())
        out: dict[Exponent, Fraction] = {}
        for a, (e1, c1) in enumerate(items):
            e = tuple(2 * v for v in e1)
            out[e] = out.get(e, 0) + c1 * c1
            for e2, c2 in items[a + 1:]:
                e = tuple(u + v for u, v in zip(e1, e2))
                out[e] = out.get(e, 0) + 2 * c1 * c2
        return MultiPoly._raw(self._nvars, {e: c for e, c in out.items() if c})

    # -- calculus ---------------------------------------------------------

    def partial(self, i: int) -> "MultiPoly":
        """Formal derivative with respect to ``x_i`` (0-based)."""
        if not 0 <= i < self._nvars:
            raise IndexError(f"variable index {i} out of range for {self._nvars} variables")
        out = {}
        for exp, c in self._terms.items():
            if exp[i]:
                e = list(exp)
                e[i] -= 1
                out[tuple(e)] = c * exp[i]
        return MultiPoly._raw(self._nvars, out)

    def laplacian(self) -> "MultiPoly":
        out: dict[Exponent, Fraction] = {}
        for exp, c in self._terms.items():
            for i, a in enumerate(exp):
                if a >= 2:
                    e = list(exp)
                    e[i] -= 2
                    e = tuple(e)
                    out[e] = out.get(e, 0) + c * a * (a - 1)
        return MultiPoly._raw(self._nvars, {e: c for e, c in out.items() if c})

    def euler(self) -> "MultiPoly":
        """``sum_i x_i d_i p``; equals ``k p`` for homogeneous ``p`` of degree k."""
        return MultiPoly._raw(
            self._nvars, {e: c * sum(e) for e, c in self._terms.items() if sum(e)}
        )

    def substitute_linear(self, rows: Sequence[Sequence]) -> "MultiPoly":
        """Compose with a linear map: ``x_i -> sum_j rows[i][j] * x_j``."""
        if len(rows) != self._nvars:
            raise ValueError("substitution needs one row per variable")
        images = [
            sum((MultiPoly.var(self._nvars, j).scale(c) for j, c in enumerate(r) if c),
                MultiPoly.zero(self._nvars))
            for r in rows
        ]
        out = MultiPoly.zero(self._nvars)
        for exp, c in self._terms.items():
            term = MultiPoly.constant(self._nvars, c)
            for i, a in enumerate(exp):
                if a:
                    term = term * images[i] ** a
            out = out + term
        return out

    # -- evaluation -------------------------------------------------------

    def eval_exact(self, x: Sequence) -> Fraction:
        if len(x) != self._nvars:
            raise ValueError(f"point has {len(x)} coordinates, expected {self._nvars}")
        x = [_as_fraction(v) for v in x]
        total = Fraction(0)
        for exp, c in self._terms.items():
            term = c
            for v, a in zip(x, exp):
                if a:
                    term *= v ** a
            total += term
        return total

    def _compile(self):
        if self._compiled is None:
            if self._terms:
                exps = np.array(list(self._terms.keys()), dtype=np.int64)
                coefs = np.array([float(c) for c in self._terms.values()])
            else:
                exps = np.zeros((0, self._nvars), dtype=np.int64)
                coefs = np.zeros(0)
            self._compiled = (exps, coefs)
        return self._compiled

    def eval_float(self, x) -> np.ndarray | float:
        """Float evaluation at a point ``(nvars,)`` or a batch ``(M, nvars)``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self._nvars:
            raise ValueError(f"point has {x.shape[-1]} coordinates, expected {self._nvars}")
        exps, coefs = self._compile()
        mons = np.prod(x[..., None, :] ** exps, axis=-1)
        out = mons @ coefs
        return float(out) if out.ndim == 0 else out

    def __call__(self, x):
        if all(isinstance(v, (int, Fraction)) for v in x):
            return self.eval_exact(x)
        return self.eval_float(x)

    # -- display / serialization ------------------------------------------

    def __repr__(self):
        return f"MultiPoly({self._nvars}, {self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for exp, c in self.sorted_terms():
            mon = "*".join(
                f"x{i + 1}" if a == 1 else f"x{i + 1}^{a}" for i, a in enumerate(exp) if a
            )
            if not mon:
                parts.append(str(c))
            elif c == 1:
                parts.append(mon)
            elif c == -1:
                parts.append("-" + mon)
            else:
                parts.append(f"{c}*{mon}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {
            "nvars": self._nvars,
            "terms": [
                {"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)}
                for e, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiPoly":
        nvars = int(data["nvars"])
        terms = {}
        for t in data["terms"]:
            exp = tuple(int(e) for e in t["exp"])
            if exp in terms:
                raise ValueError(f"duplicate exponent {exp}")
            terms[exp] = Fraction(int(t["num"]), int(t["den"]))
        return cls(nvars, terms)


# -- functional API -----------------------------------------------------


def add(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    return a + b


def mul(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    return a * b


def partial(p: MultiPoly, i: int) -> MultiPoly:
    """Derivative in the 1-based variable ``x_i``."""
    if not 1 <= i <= p.nvars:
        raise IndexError(f"variable index {i} out of range 1..{p.nvars}")
    return p.partial(i - 1)


def laplacian(p: MultiPoly) -> MultiPoly:
    return p.laplacian()


def radial_power(nvars: int, m: int) -> MultiPoly:
    """``|x|^m`` as a polynomial; ``m`` must be even."""
    if m < 0 or m % 2:
        raise ValueError(f"|x|^{m} is not a polynomial (need even m >= 0)")
    r2 = MultiPoly._raw(
        nvars, {tuple(2 if j == i else 0 for j in range(nvars)): Fraction(1) for i in range(nvars)}
    )
    return r2 ** (m // 2)


def evaluate(p: MultiPoly, x):
    return p(x)


def variables(nvars: int) -> list[MultiPoly]:
    return [MultiPoly.var(nvars, i) for i in range(nvars)]


def _split_square(d: int) -> tuple[int, int]:
    """Write ``d = a^2 * b`` with ``b`` squarefree; returns ``(a, b)``."""
    a, b = 1, d
    f = 2
    while f * f <= b:
        while b % (f * f) == 0:
            b //= f * f
            a *= f
        f += 1
    return a, b


@dataclass(frozen=True)
class Component:
    """One coordinate ``scale * sqrt(radicand) * poly`` of a polynomial map.

    The radicand is reduced to its squarefree part on construction, with the
    square factor moved into ``scale``.
    """

    scale: Fraction
    radicand: int
    poly: MultiPoly

    def __post_init__(self):
        scale = _as_fraction(self.scale)
        d = int(self.radicand)
        if d < 1:
            raise ValueError("radicand must be a positive integer")
        a, d = _split_square(d)
        object.__setattr__(self, "scale", scale * a)
        object.__setattr__(self, "radicand", d)

    @classmethod
    def rational(cls, poly: MultiPoly, scale=1) -> "Component":
        return cls(_as_fraction(scale), 1, poly)

    @property
    def nvars(self) -> int:
        return self.poly.nvars

    def square(self) -> MultiPoly:
        """The exact rational polynomial ``scale^2 * radicand * poly^2``."""
        return self.poly.square().scale(self.scale ** 2 * self.radicand)

    def factor(self) -> float:
        return float(self.scale) * math.sqrt(self.radicand)

    def eval_float(self, x):
        return self.factor() * self.poly.eval_float(x)

    def __neg__(self):
        return Component(-self.scale, self.radicand, self.poly)

    def __str__(self):
        rad = f"*sqrt({self.radicand})" if self.radicand != 1 else ""
        return f"{self.scale}{rad}*({self.poly})"

    def to_json(self) -> dict:
        data = self.poly.to_json()
        data["scale"] = {"num": str(self.scale.numerator), "den": str(self.scale.denominator)}
        data["radicand"] = self.radicand
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> "Component":
        scale = Fraction(int(data["scale"]["num"]), int(data["scale"]["den"]))
        return cls(scale, int(data["radicand"]), MultiPoly.from_json(data))


def component_square_sum(cs: Iterable[Component]) -> MultiPoly:
    cs = list(cs)
    if not cs:
        raise ValueError("no components")
    nvars = cs[0].nvars
    total = MultiPoly.zero(nvars)
    for c in cs:
        if c.nvars != nvars:
            raise ValueError(f"dimension mismatch: {c.nvars} vs {nvars} variables")
        total = total + c.square()
    return total
