"""Acceptance suite: ten end-to-end criteria at their stated tolerances.

Each criterion prints one ``criterion N: PASS|FAIL`` line.  Run it through
pytest (``pytest tests/test_acceptance.py -s``) or directly as a script
(``python tests/test_acceptance.py``).
"""

import math
import random
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from pharmonic import construct as C
from pharmonic import hurwitz as H
from pharmonic import numeric as Nm
from pharmonic import pmap as P
from pharmonic import regularity as R
from pharmonic.polyalg import MultiPoly


def criterion_1():
    start = time.perf_counter()
    cands = [C.build_simple(n) for n in range(2, 9)]
    cands += [C.build_even_simple(n) for n in range(2, 11, 2)]
    cands += [C.build_hurwitz_even(n) for n in range(4, 17, 2)]
    cands += [C.build_hurwitz_odd(n) for n in (3, 5, 7, 9)]
    cands += [C.build_higher_order(n, k) for n in (2, 4) for k in (2, 3, 4)]
    bad = [(h.n, h.k, h.provenance, C.verify(h).failures()) for h in cands]
    bad = [b for b in bad if b[3]]
    elapsed = time.perf_counter() - start
    return not bad and elapsed < 60, f"{len(cands)} constructions, {len(bad)} failing, {elapsed:.1f} s"


def criterion_2():
    rows = {r.n: r for r in C.n_table(32)}
    even = [rows[n].N_constructed for n in range(2, 17, 2)]
    odd = [rows[n].N_constructed for n in (3, 5, 7, 9)]
    verified = all(C.verify(r.candidate).ok and r.candidate.N == r.N_constructed for r in rows.values())
    # every row with a reference value carries its gap; none is silently dropped
    flagged = all(r.gap == (None if r.N_paper is None else r.N_constructed - r.N_paper)
                  for r in rows.values())
    text = C.table_csv(list(rows.values()))
    gaps = [r.n for r in rows.values() if r.gap]
    ok = even == [2, 3, 5, 5, 9, 9, 9, 9] and odd == [5, 8, 12, 14] and verified and flagged
    ok = ok and text.count("\n") == len(rows) + 1
    return ok, f"even {even}, odd {odd}, gaps flagged at n={gaps}"


GRID3 = [1, Fraction(101, 100), Fraction(3, 2), 2, 3, 10, 100, math.inf]


def criterion_3():
    worst_q = worst_t = 0.0
    ok = True
    for n in range(2, 13):
        for k in range(1, 6):
            for p in GRID3:
                prof = P.gamma(n, k, p)
                worst_q = max(worst_q, abs(float(prof.quadratic_residual())))
                worst_t = max(worst_t, abs(float(prof.tau_residual())))
                if k == 1:
                    ok &= prof.gamma == 1 and isinstance(prof.gamma, (int, Fraction))
                if p == 1:
                    ok &= prof.gamma == Fraction(k * (k + n - 2), n - 1)
    ok &= worst_q < 1e-12 and worst_t < 1e-12
    return ok, f"max quadratic residual {worst_q:.1e}, max tau residual {worst_t:.1e}"


def criterion_4():
    lhs, rhs = P.locally_p_harmonic_identity()
    diff = lhs - rhs
    return diff.is_zero() and isinstance(diff, MultiPoly), f"difference has {len(diff.terms)} terms"


def criterion_5():
    cfg = Nm.FDConfig()
    worst, worst_neg, slopes, exact_p2 = 0.0, math.inf, [], True
    for n in (2, 3, 4, 5):
        h = C.best_candidate(n)
        for p in (Fraction(3, 2), 2, 3, 10):
            u = P.assemble(h, p)
            worst = max(worst, Nm.residual_report(u, cfg).max_residual)
            neg = u.with_gamma(float(u.gamma) + 0.1)
            worst_neg = min(worst_neg, Nm.residual_report(neg, cfg).max_residual)
            if p == 2:
                # u = h is a quadratic polynomial: the central stencil is exact
                exact_p2 &= float(np.max(Nm.gradient_errors(u, (4e-2, 1e-2), cfg))) < 1e-12
            else:
                slopes.append(Nm.convergence_order(u, cfg=cfg))
    ok = worst < 1e-4 and worst_neg > 1e-2 and all(1.8 <= s <= 2.2 for s in slopes) and exact_p2
    return ok, (f"max scaled residual {worst:.1e}, weakest negative control {worst_neg:.1e}, "
                f"orders {min(slopes):.3f}..{max(slopes):.3f}, p=2 stencil exact: {exact_p2}")


def _maps_for_6():
    cands = [C.best_candidate(n) for n in (2, 3, 4, 5)]
    cands += [C.build_higher_order(2, 3), C.build_spherical(3, 3), C.build_higher_order(4, 3)]
    for h in cands:
        for p in (Fraction(3, 2), 2, 3, 10, math.inf):
            yield P.infinity_map(h) if p == math.inf else P.assemble(h, p)


def criterion_6():
    rng = np.random.default_rng(Nm.DEFAULT_SEED)
    worst, count = 0.0, 0
    for u in _maps_for_6():
        for x in rng.standard_normal((100, u.n)):
            lhs, rhs = P.gradient_norm_identity(u, x)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
        count += 1
    return worst < 1e-10, f"{count} maps x 100 points, max relative error {worst:.1e}"


INF_CANDIDATES = {
    (2, 2): lambda: C.build_simple(2),
    (2, 3): lambda: C.build_higher_order(2, 3),
    (3, 2): lambda: C.build_hurwitz_odd(3),
    (3, 3): lambda: C.build_spherical(3, 3),
    (4, 2): lambda: C.build_hurwitz_even(4),
    (4, 3): lambda: C.build_higher_order(4, 3),
}


def criterion_7():
    cfg = Nm.FDConfig()
    ok, worst_var, worst_mean, worst_res = True, 0.0, 0.0, 0.0
    for (n, k), make in INF_CANDIDATES.items():
        u = P.infinity_map(make())
        sq = Nm.grad_norm_sq_samples(u, cfg)
        target = 1 + k * (k + n - 2)
        worst_var = max(worst_var, float(np.var(sq)))
        worst_mean = max(worst_mean, abs(float(np.mean(sq)) - target))
        worst_res = max(worst_res, Nm.residual_report(u, cfg).max_residual)
        ok &= u.n == n and u.k == k
    ok &= worst_var < 1e-10 and worst_mean < 1e-8 and worst_res < 1e-6
    return ok, f"max variance {worst_var:.1e}, max mean error {worst_mean:.1e}, max residual {worst_res:.1e}"


def criterion_8():
    rep = R.check_B(range(2, 13), R.default_theta_grid(1000))
    failed = [name for name, obs in rep.observations.items() if not obs.ok]
    return rep.ok, f"{len(rep.observations)} observations on {rep.grid_size} points, failing: {failed or 'none'}"


def criterion_9():
    a2 = R.alpha_scalar_2d(2)
    far = abs(float(R.alpha_scalar_2d(10 ** 9)) - 1 / 3)
    pts = [pt for pt in R.curve_points("thetaalpha", 1001) if pt.series == "tau_scalar"]
    legend = max(abs(R.scalar_ellipse_residual(pt.theta, pt.value)) for pt in pts)
    sym = max(abs(a.value - b.value) for a, b in zip(pts, reversed(pts)))
    mirrored = all(abs(a.theta + b.theta - 1) < 1e-15 for a, b in zip(pts, reversed(pts)))
    ok = a2 == 1 and isinstance(a2, Fraction) and far < 1e-6 and legend < 1e-12 and sym < 1e-12 and mirrored
    return ok, f"alpha(2) = {a2}, |alpha(1e9) - 1/3| = {far:.1e}, legend {legend:.1e}, symmetry {sym:.1e}"


MAX_R, MAX_S, MAX_T = 10, 10, 64


def _fits(F):
    return F.r <= MAX_R and F.s <= MAX_S and F.t <= MAX_T


def _random_family(rng, depth):
    """A random derivation: a base algebra followed by ``depth`` rule applications."""
    F = H.base_algebra(rng.choice([1, 2, 4, 8]))
    for _ in range(depth):
        rule = rng.choice(["restrict", "swap", "direct_sum", "double", "extend"])
        try:
            if rule == "restrict":
                G = H.restrict(F, rng.randint(1, F.r), rng.randint(1, F.s))
            elif rule == "swap":
                G = H.swap(F)
            elif rule == "direct_sum":
                # second summand: a restricted algebra or a restricted copy of F, same s
                dims = [d for d in (1, 2, 4, 8) if d >= F.s]
                E = H.base_algebra(rng.choice(dims)) if dims and rng.random() < 0.5 else F
                G = H.direct_sum(F, H.restrict(E, rng.randint(1, E.r), F.s))
            elif rule == "double":
                G = H.double(F)
            else:
                G = H.extend(F)
        except (H.HurwitzError, ValueError):
            continue  # rule not applicable to this family
        if _fits(G):
            F = G
    return F


def criterion_10(derivations=500, seed=Nm.DEFAULT_SEED):
    rng = random.Random(seed)
    checked, bad = {}, []
    for _ in range(derivations):
        F = _random_family(rng, rng.randint(1, 8))
        if F not in checked:
            checked[F] = F.matrix_equations_hold() and F.identity_holds()
        if not checked[F]:
            bad.append(F.triple)
    wants = {(2, 2): 2, (3, 3): 4, (4, 4): 4, (8, 8): 8, (5, 5): 8, (6, 6): 8, (7, 7): 8}
    got = {rs: H.best_t(*rs)[0] for rs in wants}
    triples = sorted({F.triple for F in checked})
    ok = not bad and got == wants
    return ok, (f"{derivations} derivations, {len(checked)} distinct families, {len(triples)} triples, "
                f"largest t {max(t for _, _, t in triples)}, best_t {got}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _report(index, ok, detail, stream):
    print(f"criterion {index}: {'PASS' if ok else 'FAIL'} ({detail})", file=stream)


@pytest.mark.parametrize("index", range(1, len(CRITERIA) + 1))
def test_criterion(index, capsys):
    ok, detail = CRITERIA[index - 1]()
    with capsys.disabled():
        _report(index, ok, detail, sys.stdout)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for i, crit in enumerate(CRITERIA, 1):
        ok, detail = crit()
        _report(i, ok, detail, sys.stdout)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
