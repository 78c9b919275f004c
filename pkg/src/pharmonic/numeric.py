"""Finite-difference oracle for the p-Laplace and infinity-Laplace systems.

Everything here goes through :meth:`PMap.value` only, i.e. floating-point
evaluation of the polynomial components times ``|x|^(gamma-k)``.  No symbolic
derivative is reused, so agreement with the analytic formulas is an
independent check.

Gradients follow the convention ``(grad u)_{ij} = d_i u_j``: rows are domain
directions, columns target components, and ``div`` acts column-wise.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .pmap import PMap, is_inf

DEFAULT_SEED = 42


def default_seed() -> int:
    env = os.environ.get("PHARMONIC_SEED")
    return int(env) if env else DEFAULT_SEED


@dataclass(frozen=True)
class FDConfig:
    """Central-difference step, sampling annulus, sample count and seed.

    ``step`` drives the plain second-order gradient.  The nested operators
    (p-Laplacian, infinity-Laplacian) difference values that already carry
    ``eps/step`` rounding noise, and at large p that noise is amplified by
    ``|grad u|^(p-2)``; they use higher-order stencils of order
    ``nested_order`` with the larger steps ``inner_step`` and ``outer_step``.
    """

    step: float = 1e-5
    sample_count: int = 100
    annulus: tuple[float, float] = (0.5, 2.0)
    seed: int = field(default_factory=default_seed)
    inner_step: float = 3e-3
    outer_step: float = 1e-2
    nested_order: int = 6
    tol: float = 1e-4

    def __post_init__(self):
        lo, hi = self.annulus
        if not 0 < lo < hi:
            raise ValueError("annulus needs 0 < r_min < r_max")
        steps = (self.step, self.inner_step, self.outer_step)
        if not all(0 < h <= lo / 10 for h in steps):
            raise ValueError("steps must be positive and well below r_min")
        _weights(self.nested_order)
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")

    def with_step(self, step: float) -> "FDConfig":
        return replace(self, step=step)


def sample_annulus(n: int, cfg: FDConfig) -> np.ndarray:
    """``sample_count`` points uniformly distributed in the annulus, shape ``(M, n)``."""
    rng = np.random.default_rng(cfg.seed)
    d = rng.standard_normal((cfg.sample_count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    lo, hi = cfg.annulus
    r = (lo ** n + rng.random(cfg.sample_count) * (hi ** n - lo ** n)) ** (1.0 / n)
    return d * r[:, None]


def _check_point(x: np.ndarray, cfg: FDConfig):
    if np.linalg.norm(x) <= cfg.annulus[0] - 1e-12:
        raise ValueError("point too close to the origin for finite differences")


# one-sided halves of the antisymmetric central first-derivative stencils
_WEIGHTS = {
    2: (0.5,),
    4: (2 / 3, -1 / 12),
    6: (3 / 4, -3 / 20, 1 / 60),
}


def _weights(order: int):
    if order not in _WEIGHTS:
        raise ValueError(f"stencil order must be one of {sorted(_WEIGHTS)}")
    return _WEIGHTS[order]


def _diff(f, pts: np.ndarray, h: float, order: int) -> np.ndarray:
    """Central derivatives of ``f`` (batch ``(M, n) -> (M, ...)``) along every axis.

    Returns ``(M, n, ...)``; all shifted points go through ``f`` in one batch.
    """
    m, n = pts.shape
    w = _weights(order)
    offsets = [j * s for j in range(1, len(w) + 1) for s in (1, -1)]
    eye = np.eye(n)
    shifted = pts[:, None, None, :] + h * np.array(offsets)[None, :, None, None] * eye
    vals = f(shifted.reshape(-1, n))
    vals = vals.reshape((m, len(offsets), n) + vals.shape[1:])
    out = 0.0
    for j, wj in enumerate(w):
        out = out + wj * (vals[:, 2 * j] - vals[:, 2 * j + 1])
    return out / h


def _gradients_at(u: PMap, pts: np.ndarray, h: float, order: int = 2) -> np.ndarray:
    """FD gradients at every row of ``pts``, shape ``(M, n, N)``."""
    return _diff(u.value, pts, h, order)


def fd_gradient(u: PMap, x, cfg: FDConfig | None = None) -> np.ndarray:
    """Central-difference gradient, shape ``(n, N)``."""
    cfg = cfg or FDConfig()
    x = np.asarray(x, dtype=float)
    _check_point(x, cfg)
    return _gradients_at(u, x[None, :], cfg.step)[0]


def _stress(grads: np.ndarray, p: float) -> np.ndarray:
    norm = np.sqrt(np.sum(grads ** 2, axis=(1, 2)))
    return norm[:, None, None] ** (p - 2) * grads


def fd_plap_residual(u: PMap, x, p=None, cfg: FDConfig | None = None) -> np.ndarray:
    """``-div(|grad u|^(p-2) grad u)`` at ``x`` by nested central differences."""
    cfg = cfg or FDConfig()
    p = float(u.p if p is None else p)
    if not 1 < p < math.inf:
        raise ValueError("p-Laplace residual needs 1 < p < inf")
    x = np.asarray(x, dtype=float)
    _check_point(x, cfg)
    order = cfg.nested_order

    def stress(pts):
        return _stress(_gradients_at(u, pts, cfg.inner_step, order), p)

    da = _diff(stress, x[None, :], cfg.outer_step, order)[0]  # da[l, i, j] = d_l A_ij
    return -np.trace(da, axis1=0, axis2=1)


def residual_scale(u: PMap, x, p=None) -> float:
    """``1 + |x|^r`` with ``r = gamma p - p - gamma - k``, the natural size of the divergence."""
    p = float(u.p if p is None else p)
    g, k = u.gamma, u.k
    r = g * p - p - g - k
    return 1.0 + float(np.linalg.norm(x)) ** r


def fd_inflap_residual(u: PMap, x, cfg: FDConfig | None = None) -> np.ndarray:
    """``1/2 sum_j d_j(|grad u|^2) d_j u`` at ``x`` by nested central differences."""
    cfg = cfg or FDConfig()
    x = np.asarray(x, dtype=float)
    _check_point(x, cfg)
    order = cfg.nested_order

    def norm_sq(pts):
        return np.sum(_gradients_at(u, pts, cfg.inner_step, order) ** 2, axis=(1, 2))

    d_sq = _diff(norm_sq, x[None, :], cfg.outer_step, order)[0]
    grad = _gradients_at(u, x[None, :], cfg.inner_step, order)[0]
    return 0.5 * d_sq @ grad


def grad_norm_sq_samples(u: PMap, cfg: FDConfig | None = None) -> np.ndarray:
    """``|grad u|^2`` at the sample points, from FD gradients."""
    cfg = cfg or FDConfig()
    pts = sample_annulus(u.n, cfg)
    return np.sum(_gradients_at(u, pts, cfg.step) ** 2, axis=(1, 2))


@dataclass(frozen=True)
class ResidualReport:
    kind: str
    max_residual: float
    mean_residual: float
    per_point: tuple[float, ...]
    tol: float

    @property
    def ok(self) -> bool:
        return bool(self.max_residual < self.tol)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tol": self.tol,
            "ok": self.ok,
            "per_point": list(self.per_point),
        }


def residual_report(u: PMap, cfg: FDConfig | None = None, tol: float | None = None) -> ResidualReport:
    """Scaled residual over the sample points; the infinity-Laplacian when ``p = inf``."""
    cfg = cfg or FDConfig()
    tol = cfg.tol if tol is None else tol
    pts = sample_annulus(u.n, cfg)
    if is_inf(u.p):
        kind = "inf-laplace"
        vals = [float(np.max(np.abs(fd_inflap_residual(u, x, cfg)))) for x in pts]
    else:
        kind = "p-laplace"
        vals = [float(np.max(np.abs(fd_plap_residual(u, x, cfg=cfg)))) / residual_scale(u, x)
                for x in pts]
    return ResidualReport(kind, max(vals), float(np.mean(vals)), tuple(vals), tol)


def gradient_errors(u: PMap, steps, cfg: FDConfig | None = None) -> np.ndarray:
    """Max relative FD-vs-analytic gradient error over the samples, for each step."""
    cfg = cfg or FDConfig()
    pts = sample_annulus(u.n, cfg)
    exact = np.array([u.gradient(x) for x in pts])
    scale = np.max(np.abs(exact), axis=(1, 2))
    out = []
    for h in steps:
        err = np.max(np.abs(_gradients_at(u, pts, h) - exact), axis=(1, 2)) / scale
        out.append(float(np.max(err)))
    return np.array(out)


def convergence_order(u: PMap, steps=(4e-2, 2e-2, 1e-2, 5e-3), cfg: FDConfig | None = None) -> float:
    """Least-squares slope of ``log(error)`` against ``log(step)``.

    Steps are large enough that truncation dominates rounding; a second-order
    scheme gives a slope close to 2.
    """
    errs = gradient_errors(u, steps, cfg)
    slope, _ = np.polyfit(np.log(steps), np.log(errs), 1)
    return float(slope)
