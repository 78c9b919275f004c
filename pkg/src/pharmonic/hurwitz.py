"""Bilinear maps ``F: R^r x R^s -> R^t`` with ``|F(x, y)| = |x| |y|``.

A family is stored as ``r`` matrices ``A_l`` of shape ``t x s`` so that
``F(x, y) = sum_l x_l * (A_l @ y)``.  The norm identity is equivalent to the
Hurwitz matrix equations ``A_i^T A_j + A_j^T A_i = 2 delta_ij I_s``.

Families are composed from the four normed algebras with a small rule set
(swap, restrict, direct sum, doubling); :func:`best_t` searches the rules for
the smallest ``t`` reachable for a given ``(r, s)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .polyalg import MultiPoly

Matrix = tuple[tuple[Fraction, ...], ...]


class HurwitzError(ValueError):
    """A requested composition is not available for the given family."""


def _mat(rows) -> Matrix:
    return tuple(tuple(Fraction(v) for v in row) for row in rows)


def _identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col) if x and y) for col in bt) for row in a)


def _transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def _neg(a: Matrix) -> Matrix:
    return tuple(tuple(-v for v in row) for row in a)


def _zeros(rows: int, cols: int) -> Matrix:
    return tuple((Fraction(0),) * cols for _ in range(rows))


@dataclass(frozen=True)
class HurwitzFamily:
    r: int
    s: int
    t: int
    matrices: tuple[Matrix, ...]

    def __post_init__(self):
        if min(self.r, self.s, self.t) < 1:
            raise ValueError("r, s, t must be positive")
        if len(self.matrices) != self.r:
            raise ValueError(f"expected {self.r} matrices, got {len(self.matrices)}")
        for a in self.matrices:
            if len(a) != self.t or any(len(row) != self.s for row in a):
                raise ValueError(f"matrices must be {self.t} x {self.s}")

    @classmethod
    def from_rows(cls, matrices: Sequence) -> "HurwitzFamily":
        mats = tuple(_mat(a) for a in matrices)
        return cls(len(mats), len(mats[0][0]), len(mats[0]), mats)

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.r, self.s, self.t)

    def __call__(self, x: Sequence, y: Sequence) -> list:
        out = [0] * self.t
        for xl, a in zip(x, self.matrices):
            if not xl:
                continue
            for i, row in enumerate(a):
                out[i] += xl * sum(v * w for v, w in zip(row, y) if v)
        return out

    def bilinear_polys(self, nvars: int, x_vars: Sequence[int], y_vars: Sequence[int]) -> list[MultiPoly]:
        """Components ``F_i`` as polynomials; ``x_vars``/``y_vars`` are 0-based variable slots."""
        if len(x_vars) != self.r or len(y_vars) != self.s:
            raise ValueError("variable slots do not match (r, s)")
        comps = []
        for i in range(self.t):
            terms = {}
            for l, a in enumerate(self.matrices):
                for m, v in enumerate(a[i]):
                    if v:
                        exp = [0] * nvars
                        exp[x_vars[l]] += 1
                        exp[y_vars[m]] += 1
                        exp = tuple(exp)
                        terms[exp] = terms.get(exp, 0) + v
            comps.append(MultiPoly(nvars, terms))
        return comps

    def integer_form(self) -> tuple[np.ndarray, int]:
        """``(M, D)`` with integer array ``M`` of shape ``(r, t, s)`` and ``A_l = M_l / D``."""
        den = 1
        for a in self.matrices:
            for row in a:
                for v in row:
                    den = den * v.denominator // math.gcd(den, v.denominator)
        big = den * den * self.t >= 2 ** 62 or any(
            abs(v.numerator) * (den // v.denominator) > 2 ** 20
            for a in self.matrices for row in a for v in row
        )
        dtype = object if big else np.int64
        m = np.array(
            [[[v.numerator * (den // v.denominator) for v in row] for row in a] for a in self.matrices],
            dtype=dtype,
        )
        return m, den

    def matrix_equations_hold(self) -> bool:
        """Exact check of ``A_i^T A_j + A_j^T A_i = 2 delta_ij I``."""
        m, den = self.integer_form()
        gram = np.einsum("ktm,ltn->klmn", m, m)  # gram[i, j] = M_i^T M_j
        sym = gram + gram.transpose(1, 0, 2, 3)
        want = np.zeros_like(sym)
        for i in range(self.r):
            for a in range(self.s):
                want[i, i, a, a] = 2 * den * den
        return bool(np.array_equal(sym, want))

    def identity_residual(self) -> MultiPoly:
        """``|F(x,y)|^2 - |x|^2 |y|^2`` in ``r + s`` variables (zero iff valid)."""
        n = self.r + self.s
        comps = self.bilinear_polys(n, range(self.r), range(self.r, n))
        total = MultiPoly.zero(n)
        for c in comps:
            total = total + c.square()
        x2 = sum((MultiPoly.var(n, i).square() for i in range(self.r)), MultiPoly.zero(n))
        y2 = sum((MultiPoly.var(n, i).square() for i in range(self.r, n)), MultiPoly.zero(n))
        return total - x2 * y2

    def identity_holds(self) -> bool:
        return self.identity_residual().is_zero()

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "s": self.s,
            "t": self.t,
            "matrices": [[[str(v) for v in row] for row in a] for a in self.matrices],
        }

    @classmethod
    def from_json(cls, data) -> "HurwitzFamily":
        mats = tuple(_mat([[Fraction(v) for v in row] for row in a]) for a in data["matrices"])
        return cls(int(data["r"]), int(data["s"]), int(data["t"]), mats)


# -- base algebras ------------------------------------------------------------


def _cd_mult(a: tuple, b: tuple) -> tuple:
    """Cayley-Dickson product ``(p,q)(r,s) = (pr - s*q, sp + qr*)``."""
    n = len(a)
    if n == 1:
        return (a[0] * b[0],)
    h = n // 2
    p, q, r, s = a[:h], a[h:], b[:h], b[h:]
    left = _vsub(_cd_mult(p, r), _cd_mult(_conj(s), q))
    right = _vadd(_cd_mult(s, p), _cd_mult(q, _conj(r)))
    return left + right


def _conj(a: tuple) -> tuple:
    return (a[0],) + tuple(-v for v in a[1:])


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


@lru_cache(maxsize=None)
def base_algebra(dim: int) -> HurwitzFamily:
    """Multiplication in R, C, H or O as a ``[dim, dim, dim]`` family.

    ``A_l`` is left multiplication by the basis unit ``e_l`` (Cayley-Dickson
    sign convention); for ``dim == 2`` this is complex multiplication.
    """
    if dim not in (1, 2, 4, 8):
        raise HurwitzError(f"no normed algebra of dimension {dim} (need 1, 2, 4 or 8)")
    basis = [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    mats = []
    for el in basis:
        cols = [_cd_mult(el, em) for em in basis]
        mats.append(_mat(list(zip(*cols))))
    fam = HurwitzFamily(dim, dim, dim, tuple(mats))
    _require_valid(fam, "base_algebra")
    return fam


def _require_valid(fam: HurwitzFamily, where: str) -> HurwitzFamily:
    if not fam.matrix_equations_hold():
        raise RuntimeError(f"{where} produced a family violating the Hurwitz equations")
    return fam


# -- composition rules --------------------------------------------------------


def restrict(F: HurwitzFamily, r: int, s: int) -> HurwitzFamily:
    if not (1 <= r <= F.r and 1 <= s <= F.s):
        raise HurwitzError(f"cannot restrict [{F.r},{F.s},{F.t}] to r={r}, s={s}")
    mats = tuple(tuple(row[:s] for row in a) for a in F.matrices[:r])
    return HurwitzFamily(r, s, F.t, mats)


def swap(F: HurwitzFamily) -> HurwitzFamily:
    """Family for ``F'(y, x) = F(x, y)``."""
    mats = tuple(
        tuple(tuple(F.matrices[l][i][m] for l in range(F.r)) for i in range(F.t))
        for m in range(F.s)
    )
    return HurwitzFamily(F.s, F.r, F.t, mats)


def direct_sum(F1: HurwitzFamily, F2: HurwitzFamily) -> HurwitzFamily:
    """``G((x, x'), y) = (F1(x, y), F2(x', y))``."""
    if F1.s != F2.s:
        raise HurwitzError(f"direct sum needs equal s, got {F1.s} and {F2.s}")
    s = F1.s
    top = tuple(a + _zeros(F2.t, s) for a in F1.matrices)
    bottom = tuple(_zeros(F1.t, s) + a for a in F2.matrices)
    return HurwitzFamily(F1.r + F2.r, s, F1.t + F2.t, top + bottom)


_E = _mat([[0, -1], [1, 0]])
_Q = _mat([[0, 1], [1, 0]])
_P = _mat([[1, 0], [0, -1]])


def _kron(a: Matrix, b: Matrix) -> Matrix:
    return tuple(
        tuple(x * y for x in ra for y in rb) for ra in a for rb in b
    )


def complex_structures(F: HurwitzFamily) -> list[Matrix]:
    """Normalize a square family to ``A_1 = I`` and return ``A_2 .. A_r``.

    The returned matrices are skew, square to ``-I`` and pairwise anticommute.
    """
    if F.s != F.t:
        raise HurwitzError(f"need a square family (s == t), got [{F.r},{F.s},{F.t}]")
    a1t = _transpose(F.matrices[0])
    return [_matmul(a, a1t) for a in F.matrices[1:]]


SignedPerm = tuple[tuple[int, ...], tuple[int, ...]]  # J e_c = sign[c] e_{sigma[c]}


def _as_signed_perm(m: Matrix) -> SignedPerm | None:
    t = len(m)
    sigma, sign = [-1] * t, [0] * t
    for i, row in enumerate(m):
        nz = [(c, v) for c, v in enumerate(row) if v]
        if len(nz) != 1 or abs(nz[0][1]) != 1:
            return None
        c, v = nz[0]
        if sigma[c] != -1:
            return None
        sigma[c], sign[c] = i, int(v)
    return tuple(sigma), tuple(sign)


def _sp_mul(a: SignedPerm, b: SignedPerm) -> SignedPerm:
    """Composition ``a @ b``."""
    (sa, ga), (sb, gb) = a, b
    return tuple(sa[sb[c]] for c in range(len(sb))), tuple(gb[c] * ga[sb[c]] for c in range(len(sb)))


def _sp_matrix(p: SignedPerm) -> Matrix:
    sigma, sign = p
    t = len(sigma)
    rows = [[Fraction(0)] * t for _ in range(t)]
    for c in range(t):
        rows[sigma[c]][c] = Fraction(sign[c])
    return tuple(tuple(r) for r in rows)


def _sp_is_complex_structure(p: SignedPerm) -> bool:
    """Skew with square ``-I`` (for a signed permutation skewness follows from the square)."""
    sigma, sign = p
    return all(sigma[c] != c and sigma[sigma[c]] == c and sign[c] * sign[sigma[c]] == -1
               for c in range(len(sigma)))


def _commuting_structure(js: list[Matrix], t: int) -> Matrix | None:
    """A skew ``S`` with ``S^2 = -I`` commuting with every ``J`` in ``js``."""
    perms = [_as_signed_perm(j) for j in js]
    if any(p is None for p in perms):
        # general families: only the product of an odd number of structures is tried
        if len(js) % 2 == 1:
            omega = js[0]
            for j in js[1:]:
                omega = _matmul(omega, j)
            if (_transpose(omega) == _neg(omega) and _matmul(omega, omega) == _neg(_identity(t))
                    and all(_matmul(omega, j) == _matmul(j, omega) for j in js)):
                return omega
        return None
    candidates: list[SignedPerm] = []
    if perms and len(perms) % 2 == 1:
        # the product of an odd number of anticommuting structures commutes with each
        omega = perms[0]
        for p in perms[1:]:
            omega = _sp_mul(omega, p)
        candidates.append(omega)
    candidates.extend(_signed_commutant(perms, t))
    for c in candidates:
        if _sp_is_complex_structure(c) and all(_sp_mul(c, p) == _sp_mul(p, c) for p in perms):
            return _sp_matrix(c)
    return None


def _signed_commutant(perms: list[SignedPerm], t: int) -> list[SignedPerm]:
    """Signed permutations among the orbit sums spanning the commutant.

    Conjugation by a signed permutation moves matrix entries around up to
    sign, so the commutant is spanned by sign-consistent orbit sums of the
    matrix units.  Only orbit sums that are themselves signed permutations
    are returned.
    """
    seen: set[tuple[int, int]] = set()
    found = []
    for a in range(t):
        for b in range(t):
            if (a, b) in seen:
                continue
            orbit = {(a, b): 1}
            stack = [(a, b)]
            consistent = True
            while stack:
                u, v = stack.pop()
                su = orbit[(u, v)]
                for sigma, sign in perms:
                    # J E_uv J^T = sign_u sign_v E_{sigma u, sigma v}
                    img = (sigma[u], sigma[v])
                    sv = su * sign[u] * sign[v]
                    if img in orbit:
                        consistent = consistent and orbit[img] == sv
                    else:
                        orbit[img] = sv
                        stack.append(img)
            seen.update(orbit)
            if not consistent or len(orbit) != t:
                continue
            sigma, sign = [-1] * t, [0] * t
            ok = True
            for (u, v), sv in orbit.items():
                # entry (u, v): column v maps to row u
                if sigma[v] != -1:
                    ok = False
                    break
                sigma[v], sign[v] = u, sv
            if ok and -1 not in sigma:
                found.append((tuple(sigma), tuple(sign)))
    return found


def _assemble_doubled(js: list[Matrix], t: int, extra: Matrix | None) -> HurwitzFamily:
    ks = [_kron(_E, _identity(t))] + [_kron(_Q, j) for j in js]
    if extra is not None:
        ks.append(_kron(_P, extra))
    mats = (_identity(2 * t),) + tuple(ks)
    return HurwitzFamily(len(mats), 2 * t, 2 * t, mats)


def double(F: HurwitzFamily) -> HurwitzFamily:
    """``[r, t, t] -> [r + 2, 2t, 2t]``.

    With ``J_i`` the normalized complex structures of ``F`` and ``S`` a complex
    structure commuting with all of them, the new family is ``I``,
    ``E (x) I``, ``Q (x) J_i`` and ``P (x) S`` with the 2x2 blocks
    ``E = [[0,-1],[1,0]]``, ``Q = [[0,1],[1,0]]``, ``P = [[1,0],[0,-1]]``.
    Raises :class:`HurwitzError` when no such ``S`` is found (for example
    ``[8, 8, 8]``, since ``[10, 16, 16]`` does not exist).
    """
    js = complex_structures(F)
    s = _commuting_structure(js, F.t)
    if s is None:
        raise HurwitzError(
            f"no complex structure commutes with [{F.r},{F.s},{F.t}]; cannot double"
        )
    return _require_valid(_assemble_doubled(js, F.t, s), "double")


def extend(F: HurwitzFamily) -> HurwitzFamily:
    """``[r, t, t] -> [r + 1, 2t, 2t]``; always available for square families."""
    js = complex_structures(F)
    return _require_valid(_assemble_doubled(js, F.t, None), "extend")


# -- derivations and planner ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class TriplePlan:
    """Derivation tree producing a ``[r, s, t]`` family."""

    r: int
    s: int
    t: int
    rule: str  # base | swap | restrict | direct_sum | double | extend
    children: tuple["TriplePlan", ...] = ()
    dim: int | None = None  # base algebra dimension
    _key: str = field(init=False, repr=False)
    _depth: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.rule == "base":
            key = f"base({self.dim})"
        elif self.rule == "restrict":
            key = f"restrict({self.children[0]._key},{self.r},{self.s})"
        else:
            key = f"{self.rule}({','.join(c._key for c in self.children)})"
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_depth", 1 + max((c._depth for c in self.children), default=0))

    def __eq__(self, other):
        return isinstance(other, TriplePlan) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.r, self.s, self.t)

    def depth(self) -> int:
        return self._depth

    def key(self) -> str:
        return self._key

    def replay(self) -> HurwitzFamily:
        return _replay(self)

    def to_json(self) -> dict:
        data = {"r": self.r, "s": self.s, "t": self.t, "rule": self.rule}
        if self.dim is not None:
            data["dim"] = self.dim
        if self.children:
            data["children"] = [c.to_json() for c in self.children]
        return data

    @classmethod
    def from_json(cls, data) -> "TriplePlan":
        return cls(
            int(data["r"]), int(data["s"]), int(data["t"]), data["rule"],
            tuple(cls.from_json(c) for c in data.get("children", ())),
            data.get("dim"),
        )

    # convenience constructors
    @classmethod
    def base(cls, dim: int) -> "TriplePlan":
        return cls(dim, dim, dim, "base", (), dim)

    def swapped(self) -> "TriplePlan":
        return TriplePlan(self.s, self.r, self.t, "swap", (self,))

    def restricted(self, r: int, s: int) -> "TriplePlan":
        if (r, s) == (self.r, self.s):
            return self
        return TriplePlan(r, s, self.t, "restrict", (self,))

    def summed(self, other: "TriplePlan") -> "TriplePlan":
        return TriplePlan(self.r + other.r, self.s, self.t + other.t, "direct_sum", (self, other))

    def doubled(self) -> "TriplePlan":
        return TriplePlan(self.r + 2, 2 * self.t, 2 * self.t, "double", (self,))

    def extended(self) -> "TriplePlan":
        return TriplePlan(self.r + 1, 2 * self.t, 2 * self.t, "extend", (self,))


@lru_cache(maxsize=4096)
def _replay(plan: TriplePlan) -> HurwitzFamily:
    rule = plan.rule
    if rule == "base":
        fam = base_algebra(plan.dim)
    elif rule == "swap":
        fam = swap(_replay(plan.children[0]))
    elif rule == "restrict":
        fam = restrict(_replay(plan.children[0]), plan.r, plan.s)
    elif rule == "direct_sum":
        fam = direct_sum(_replay(plan.children[0]), _replay(plan.children[1]))
    elif rule == "double":
        fam = double(_replay(plan.children[0]))
    elif rule == "extend":
        fam = extend(_replay(plan.children[0]))
    else:
        raise ValueError(f"unknown rule {rule!r}")
    if fam.triple != plan.triple:
        raise RuntimeError(f"plan {plan.key()} replayed to {fam.triple}, expected {plan.triple}")
    return fam


@lru_cache(maxsize=None)
def _can_double(plan: TriplePlan) -> bool:
    try:
        _replay(plan.doubled())
    except HurwitzError:
        return False
    return True


DEFAULT_BUDGET = 4
MAX_SQUARE_T = 32  # largest t fed to double/extend during search


def _better(a: TriplePlan | None, b: TriplePlan) -> bool:
    if a is None:
        return True
    return (b.t, b._depth, b._key) < (a.t, a._depth, a._key)


@lru_cache(maxsize=None)
def _search(cap: int, tcap: int, budget: int) -> dict:
    """Best plan per ``(r, s)`` with ``r, s <= cap`` after ``budget`` rounds."""
    best: dict[tuple[int, int], TriplePlan] = {}

    def offer(p: TriplePlan):
        if p.r > cap or p.s > cap or p.t > tcap:
            return
        if _better(best.get((p.r, p.s)), p):
            best[(p.r, p.s)] = p

    def close():
        # restriction closure: dominate from (r+1, s) and (r, s+1)
        for r in range(cap, 0, -1):
            for s in range(cap, 0, -1):
                for src in ((r + 1, s), (r, s + 1)):
                    p = best.get(src)
                    if p is not None:
                        root = p.children[0] if p.rule == "restrict" else p
                        offer(root.restricted(r, s))

    for dim in (1, 2, 4, 8):
        offer(TriplePlan.base(dim))
    close()
    for _ in range(budget):
        current = sorted(best.values(), key=lambda p: (p.r, p.s))
        for p in current:
            offer(p.swapped())
            if p.s == p.t and p.t <= MAX_SQUARE_T:
                offer(p.extended())
                if _can_double(p):
                    offer(p.doubled())
        by_s: dict[int, list[TriplePlan]] = {}
        for p in current:
            by_s.setdefault(p.s, []).append(p)
        for s, plans in by_s.items():
            for p1, p2 in itertools.combinations_with_replacement(plans, 2):
                offer(p1.summed(p2))
        close()
    return best


def best_t(r: int, s: int, budget: int = DEFAULT_BUDGET) -> tuple[int, TriplePlan]:
    """Smallest ``t`` reachable for ``(r, s)`` by the composition rules.

    This is an upper bound on ``t_min(r, s)``, with a replayable derivation.
    """
    if r < 1 or s < 1:
        raise ValueError("r and s must be positive")
    cap = max(2 * max(r, s), 8)
    table = _search(cap, cap * cap, budget)
    cands = []
    if (r, s) in table:
        cands.append(table[(r, s)])
    if (s, r) in table:
        cands.append(table[(s, r)].swapped())
    # [r, s, rs] always exists: rs copies of [1,1,1]
    cands.append(_trivial_plan(r, s))
    plan = min(cands, key=lambda p: (p.t, p.depth(), p.key()))
    return plan.t, plan


def _trivial_plan(r: int, s: int) -> TriplePlan:
    one = TriplePlan.base(1)
    col = one
    for _ in range(r - 1):
        col = col.summed(one)  # [r, 1, r]
    row = col.swapped()  # [1, r, r]
    acc = row
    for _ in range(s - 1):
        acc = acc.summed(row)  # [s, r, rs]
    return acc.swapped()


def family_for(r: int, s: int, budget: int = DEFAULT_BUDGET) -> HurwitzFamily:
    """Replay and validate the best plan for ``(r, s)``."""
    _, plan = best_t(r, s, budget)
    fam = plan.replay()
    return _require_valid(fam, plan.key())
