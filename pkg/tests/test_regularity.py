import csv
import io
import math
from fractions import Fraction

import pytest

from pharmonic import pmap as P
from pharmonic import regularity as R


def test_alpha_examples():
    assert R.alpha_scalar_2d(2) == 1 and isinstance(R.alpha_scalar_2d(2), Fraction)
    assert abs(R.alpha_scalar_2d(10 ** 9) - Fraction(1, 3)) < 1e-6
    assert R.alpha_scalar_2d(1.000001) > 100
    with pytest.raises(ValueError):
        R.alpha_scalar_2d(1)
    with pytest.raises(ValueError):
        R.alpha_scalar_2d(0.5)


@pytest.mark.parametrize("p", [1.1, 1.5, 2.0, 3.0, 10.0, 1000.0])
def test_tau_is_alpha_over_conjugate(p):
    theta = 1 / p
    assert R.alpha_scalar_2d(p) * (1 - theta) == pytest.approx(R.tau_scalar(theta), abs=1e-12)


def test_tau_scalar_endpoints_and_symmetry():
    assert R.tau_scalar(0) == pytest.approx(1 / 3, abs=1e-15)
    assert R.tau_scalar(0.5) == pytest.approx(0.5)
    for i in range(101):
        t = i / 100
        assert abs(R.tau_scalar(t) - R.tau_scalar(1 - t)) < 1e-12
        assert abs(R.scalar_ellipse_residual(t, R.tau_scalar(t))) < 1e-12


def test_cubic_example():
    assert R.cubic(Fraction(3, 4)) == Fraction(1, 32)


def test_tau_curve_matches_profile():
    for n in (2, 3, 4, 9):
        for k in (1, 2, 3):
            for p in (Fraction(11, 10), Fraction(3, 2), 2, 5, 40):
                prof = P.gamma(n, k, p)
                t = R.tau_curve(n, float(prof.theta), k)
                assert abs(t - float(prof.tau)) < 1e-12
                assert abs(R.tau_residual(n, float(prof.theta), t, k)) < 1e-12


def test_r2r2_value():
    assert R.tau_curve(2, 0.5) == pytest.approx(0.5, abs=1e-15)
    assert R.tau_curve(2, 0.3) == pytest.approx(0.5 * (-1 + math.sqrt(1 + 12 * 0.3 * 0.7)), abs=1e-15)
    assert R.tau_curve(3, 0.3) == pytest.approx(0.5 * (-0.3 - 1 + math.sqrt(1 + 18 * 0.3 - 15 * 0.09)))


def test_n_to_infty_approaches_limit():
    grid = [i / 200 for i in range(201)]
    gaps = [max(abs(R.tau_curve(n, t) - (1 - t)) for t in grid[1:]) for n in R.N_TO_INFTY_DIMS]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert abs(R.tau_curve(2048, 0.5) - 0.5) < 0.02


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize("figure", R.FIGURES)
def test_curves_layout(figure):
    text = R.curves_csv(figure, 11)
    rows = _rows(text)
    series = sorted({r["series"] for r in rows})
    assert len(rows) == 11 * len(series)
    thetas = [float(r["theta"]) for r in rows]
    assert thetas == sorted(thetas)
    assert text.startswith("theta,series,value\n")


def test_curves_rows_per_series():
    rows = _rows(R.curves_csv("R2R2", 101))
    for label in ("tau_scalar", "V_C1_boundary", "tau_n2", "tau_n3", "tau_n4"):
        assert sum(r["series"] == label for r in rows) == 101


def test_curve_values():
    rows = _rows(R.curves_csv("thetaalpha", 3))
    get = {(r["theta"], r["series"]): r["value"] for r in rows}
    assert float(get[("0", "tau_scalar")]) == pytest.approx(1 / 3, abs=1e-15)
    assert get[("1", "alpha")] == "inf"
    rows = _rows(R.curves_csv("R2R2", 3))
    get = {(r["theta"], r["series"]): float(r["value"]) for r in rows}
    assert get[("0.5", "tau_n2")] == 0.5 and get[("0.5", "V_C1_boundary")] == 0.5


def test_emitted_pairs_satisfy_their_quadratics():
    for figure in ("thetaalpha", "R2R2", "n_to_infty"):
        for pt in R.curve_points(figure, 201):
            if pt.series == "tau_scalar":
                assert abs(R.scalar_ellipse_residual(pt.theta, pt.value)) < 1e-12
            elif pt.series.startswith("tau_n"):
                assert abs(R.tau_residual(pt.n, pt.theta, pt.value)) < 1e-12 * max(1, pt.n)


def test_seventeen_digits():
    rows = _rows(R.curves_csv("thetaalpha", 4))
    v = [r["value"] for r in rows if r["series"] == "tau_scalar"][1]
    assert float(v) == R.tau_scalar(1 / 3)


def test_unknown_figure_and_tiny_grid():
    with pytest.raises(ValueError):
        R.curves_csv("nope", 10)
    with pytest.raises(ValueError):
        R.curves_csv("R2R2", 1)


def test_emit_curves_writes_file(tmp_path):
    out = tmp_path / "c.csv"
    text = R.emit_curves("conjectures", 5, out)
    assert out.read_text() == text


def test_check_b_small():
    rep = R.check_B(range(2, 6), R.default_theta_grid(99))
    assert rep.ok, rep.to_json()
    assert rep.observations["B5"].details["cubic_factorization_holds"]


def test_check_b_detects_wrong_exponents(monkeypatch):
    from dataclasses import replace

    def shifted(n, k, p):
        prof = P.gamma(n, k, p)
        return replace(prof, gamma=float(prof.gamma) - 0.5)

    monkeypatch.setattr(R, "gamma", shifted)
    rep = R.check_B([3], R.default_theta_grid(49))
    assert not rep.ok
    assert not rep.observations["B1"].ok and not rep.observations["B3"].ok


def test_check_b_n2_only():
    assert R.check_B([2], [Fraction(i, 10) for i in range(1, 10)]).ok


def test_nu_on_n2_stays_above_one():
    for i in range(1, 1000):
        t = Fraction(i, 1000)
        if t > Fraction(1, 2):
            assert float(P.gamma(2, 2, 1 / t).nu) >= 1 - 1e-15
    assert P.gamma(2, 2, 2).nu == 1
