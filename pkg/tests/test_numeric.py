import math
from fractions import Fraction

import numpy as np
import pytest

from pharmonic import construct as C
from pharmonic import numeric as Nm
from pharmonic import pmap as P

CFG = Nm.FDConfig(seed=42, sample_count=25)


def test_config_validation():
    with pytest.raises(ValueError):
        Nm.FDConfig(annulus=(2.0, 0.5))
    with pytest.raises(ValueError):
        Nm.FDConfig(step=0.3)
    with pytest.raises(ValueError):
        Nm.FDConfig(nested_order=3)
    with pytest.raises(ValueError):
        Nm.FDConfig(sample_count=0)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("PHARMONIC_SEED", "7")
    assert Nm.FDConfig().seed == 7
    monkeypatch.delenv("PHARMONIC_SEED")
    assert Nm.FDConfig().seed == 42


def test_sampling_in_annulus_and_deterministic():
    a = Nm.sample_annulus(3, Nm.FDConfig(seed=3))
    b = Nm.sample_annulus(3, Nm.FDConfig(seed=3))
    assert a.shape == (100, 3) and np.array_equal(a, b)
    r = np.linalg.norm(a, axis=1)
    assert r.min() >= 0.5 and r.max() <= 2.0
    assert not np.array_equal(a, Nm.sample_annulus(3, Nm.FDConfig(seed=4)))


def test_fd_gradient_linear_exact():
    u = P.assemble(C.build_spherical(3, 1), 3)
    x = np.array([0.7, -0.4, 0.9])
    assert np.allclose(Nm.fd_gradient(u, x), u.gradient(x), atol=1e-10)


def test_fd_gradient_matches_analytic_n2():
    u = P.assemble(C.build_simple(2), 2)
    x = np.array([1.0, 0.0])
    assert np.allclose(Nm.fd_gradient(u, x), u.gradient(x), atol=1e-8)
    assert np.allclose(u.gradient(x), [[2.0, 0.0], [0.0, 2.0]])


def test_fd_gradient_homogeneity():
    u = P.assemble(C.build_hurwitz_odd(3), 3)
    x = np.array([0.4, 0.5, -0.3])
    g2 = Nm.fd_gradient(u, 2 * x)
    assert np.allclose(g2, 2 ** (u.gamma - 1) * Nm.fd_gradient(u, x), rtol=1e-7, atol=1e-7)


def test_fd_gradient_rejects_origin():
    u = P.assemble(C.build_simple(2), 3)
    with pytest.raises(ValueError):
        Nm.fd_gradient(u, [0.01, 0.0])


def test_plap_residual_n2_p3():
    u = P.assemble(C.build_simple(2), 3)
    rep = Nm.residual_report(u, Nm.FDConfig())
    assert rep.kind == "p-laplace" and len(rep.per_point) == 100
    assert rep.max_residual < 1e-4 and rep.ok


def test_plap_negative_control():
    u = P.assemble(C.build_simple(2), 3).with_gamma(P.gamma(2, 2, 3).gamma + 0.1)
    assert Nm.residual_report(u, CFG).max_residual > 1e-2


def test_p2_residual_is_laplacian_of_h():
    for n in (3, 4, 6):
        u = P.assemble(C.best_candidate(n), 2)
        assert Nm.residual_report(u, CFG, tol=1e-9).ok


def test_plap_requires_finite_p():
    u = P.infinity_map(C.build_simple(2))
    with pytest.raises(ValueError):
        Nm.fd_plap_residual(u, [1.0, 0.0])


def test_inflap_residual():
    u = P.infinity_map(C.build_simple(2))
    rep = Nm.residual_report(u, Nm.FDConfig())
    assert rep.kind == "inf-laplace" and rep.max_residual < 1e-6
    lin = P.infinity_map(C.build_spherical(3, 1))
    assert np.max(np.abs(Nm.fd_inflap_residual(lin, [0.3, 0.9, -0.2]))) < 1e-12


def test_inflap_detects_non_constant_gradient():
    u = P.infinity_map(C.build_simple(2)).with_gamma(Fraction(3, 2))
    assert Nm.residual_report(u, CFG).max_residual > 1e-2


def test_grad_norm_constant_on_annulus():
    for n, h in [(2, C.build_simple(2)), (3, C.build_hurwitz_odd(3))]:
        sq = Nm.grad_norm_sq_samples(P.infinity_map(h))
        assert np.var(sq) < 1e-10
        assert abs(np.mean(sq) - (1 + 2 * n)) < 1e-8


@pytest.mark.parametrize("p", [Fraction(3, 2), 3, 10])
def test_convergence_order(p):
    u = P.assemble(C.build_hurwitz_odd(3), p)
    assert 1.8 <= Nm.convergence_order(u, cfg=CFG) <= 2.2


def test_residual_shrinks_with_step():
    # second-order nested stencils: shrinking the steps reduces the residual
    u = P.assemble(C.build_simple(2), 3)
    coarse = Nm.FDConfig(sample_count=10, nested_order=2, inner_step=4e-2, outer_step=4e-2)
    fine = Nm.FDConfig(sample_count=10, nested_order=2, inner_step=1e-2, outer_step=1e-2)
    r1 = Nm.residual_report(u, coarse).max_residual
    r2 = Nm.residual_report(u, fine).max_residual
    assert r2 < r1 / 8


def test_report_json_and_determinism():
    u = P.assemble(C.build_hurwitz_even(4), Fraction(3, 2))
    a = Nm.residual_report(u, CFG).to_json()
    b = Nm.residual_report(u, CFG).to_json()
    assert a == b
    assert set(a) >= {"max_residual", "mean_residual", "per_point", "ok"}
    assert math.isclose(a["max_residual"], max(a["per_point"]))
