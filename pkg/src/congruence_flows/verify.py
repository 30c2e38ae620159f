"""Finite-difference checks of the incompressible Euler equations.

Residuals are taken in Euclidean coordinates.  The metric pulled back to
congruence coordinates, its Christoffel symbols and the covariant divergence
are provided for the coordinate-frame divergence check.
"""
from __future__ import annotations

import math
import os
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .congruence import CongruenceSpec
from .errors import DegenerateJacobian, SingularityTooClose
from .flows import FlowField

_STENCILS = {
    "central2": ((-1, -0.5), (1, 0.5)),
    "central4": ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)),
}


@dataclass(frozen=True)
class FDConfig:
    step: float = 1e-5
    scheme: str = "central2"
    time_step: float = 1e-5

    def __post_init__(self):
        if not 1e-9 <= self.step <= 1e-2:
            raise ValueError(f"step {self.step!r} outside [1e-9, 1e-2]")
        if self.scheme not in _STENCILS:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def reach(self) -> int:
        return max(abs(o) for o, _ in _STENCILS[self.scheme])

    def derivative(self, f: Callable, x: np.ndarray, direction: np.ndarray, h=None):
        h = self.step if h is None else h
        return sum(w * f(x + o * h * direction) for o, w in _STENCILS[self.scheme]) / h


def _guard(flow: FlowField, p, cfg: FDConfig, hint=None):
    d = flow.singular_distance(p, hint)
    if d < 10.0 * cfg.step * cfg.reach:
        raise SingularityTooClose(f"{np.asarray(p).tolist()} is {d:.3g} from a singularity")


def velocity_gradient(flow: FlowField, p, t: float, cfg: FDConfig, hint=None) -> np.ndarray:
    """``G[i, j] = dV_i / dx_j``."""
    f = lambda q: flow.velocity(q, t, hint)
    return np.stack([cfg.derivative(f, p, e) for e in np.eye(3)], axis=1)


def euclidean_divergence(flow: FlowField, p, t: float = 0.0, cfg: FDConfig = FDConfig()) -> float:
    p = geometry.as_point(p)
    hint = flow.coords(p)
    _guard(flow, p, cfg, hint)
    return float(np.trace(velocity_gradient(flow, p, t, cfg, hint)))


def euler_residual(flow: FlowField, p, t: float = 0.0, cfg: FDConfig = FDConfig()) -> np.ndarray:
    """``dV/dt + (V . grad) V + grad p`` at one point."""
    if flow.pressure_form == "none" or flow.pressure_fn is None:
        raise ValueError("no pressure to verify")
    p = geometry.as_point(p)
    hint = flow.coords(p)
    _guard(flow, p, cfg, hint)
    return _residual(flow, p, t, cfg, hint)[0]


def _residual(flow, p, t, cfg, hint):
    v = flow.velocity(p, t, hint)
    grad_v = velocity_gradient(flow, p, t, cfg, hint)
    dvdt = flow.velocity_dt(p, t, hint)
    if dvdt is None:
        f = lambda s: flow.velocity(p, s[0], hint)
        dvdt = FDConfig(cfg.time_step, cfg.scheme).derivative(
            f, np.array([t]), np.array([1.0]), h=cfg.time_step)
    pr = lambda q: flow.pressure(q, t, hint)
    grad_p = np.array([cfg.derivative(pr, p, e) for e in np.eye(3)])
    return dvdt + grad_v @ v + grad_p, float(np.trace(grad_v))


@dataclass
class ResidualReport:
    """Per-sample residuals plus sup norms; ``merge`` is order independent."""

    samples: list = field(default_factory=list)

    @property
    def sup_momentum(self) -> float:
        return max((s[2] for s in self.samples), default=0.0)

    @property
    def sup_divergence(self) -> float:
        return max((abs(s[4]) for s in self.samples), default=0.0)

    def add(self, point, t: float, residual, divergence: float) -> None:
        res = tuple(float(r) for r in residual)
        self.samples.append((tuple(float(c) for c in point), float(t),
                             float(np.linalg.norm(res)), res, float(divergence)))

    def merge(self, other: ResidualReport) -> ResidualReport:
        return ResidualReport(sorted(self.samples + other.samples, key=lambda s: (s[1], s[0])))

    def sorted(self) -> ResidualReport:
        return ResidualReport(sorted(self.samples, key=lambda s: (s[1], s[0])))


def sample_box(bounds: Sequence[Sequence[float]], grid: Sequence[int]) -> np.ndarray:
    axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(bounds, grid)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("CONGRUENCE_FLOWS_THREADS", "1")))
    except ValueError:
        return 1


def verify_flow(flow: FlowField, points: Iterable, times: Iterable[float],
                cfg: FDConfig = FDConfig(), workers: int | None = None) -> ResidualReport:
    """Euler and divergence residuals over every (point, time) pair."""
    if flow.pressure_form == "none" or flow.pressure_fn is None:
        raise ValueError("no pressure to verify")
    jobs = [(geometry.as_point(p), float(t)) for t in times for p in points]

    def run(chunk):
        rep = ResidualReport()
        for p, t in chunk:
            hint = flow.coords(p)
            _guard(flow, p, cfg, hint)
            res, div = _residual(flow, p, t, cfg, hint)
            rep.add(p, t, res, div)
        return rep

    workers = workers or _worker_count()
    if workers <= 1 or len(jobs) < 2:
        return run(jobs).sorted()
    chunks = [jobs[i::workers] for i in range(workers)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, chunks))
    out = ResidualReport()
    for part in parts:
        out = out.merge(part)
    return out


# --- congruence coordinates ------------------------------------------------------


def pullback_metric(spec: CongruenceSpec, coords) -> np.ndarray:
    """Flat metric in congruence coordinates ``(p1, p2, r)``."""
    J = spec.jacobian(np.asarray(coords, dtype=float))
    g = J.T @ J
    return 0.5 * (g + g.T)


def christoffels(spec: CongruenceSpec, coords, cfg: FDConfig = FDConfig()) -> np.ndarray:
    """``gamma[k, i, j]`` from finite-difference derivatives of the metric."""
    q = np.asarray(coords, dtype=float)
    g = pullback_metric(spec, q)
    if abs(np.linalg.det(g)) < 1e-14:
        raise DegenerateJacobian(f"metric degenerate at {q.tolist()}")
    dg = np.stack([cfg.derivative(lambda c: pullback_metric(spec, c), q, e)
                   for e in np.eye(3)])  # dg[l, i, j] = d_l g_ij
    ginv = np.linalg.inv(g)
    # lower[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    lower = (np.einsum("ijl->ijl", dg) + np.einsum("jil->ijl", dg)
             - np.einsum("lij->ijl", dg))
    return 0.5 * np.einsum("kl,ijl->kij", ginv, lower)


def covariant_divergence(spec: CongruenceSpec, components: Callable, coords,
                         cfg: FDConfig = FDConfig()) -> float:
    """``d_k V^k + Gamma^k_kl V^l`` for ``components(coords) -> V^k``."""
    q = np.asarray(coords, dtype=float)
    gam = christoffels(spec, q, cfg)
    partial = sum(cfg.derivative(lambda c: components(c)[k], q, np.eye(3)[k])
                  for k in range(3))
    return float(partial + np.einsum("kkl,l->", gam, np.asarray(components(q))))


# --- streamlines -------------------------------------------------------------------


def trace_streamline(flow: FlowField, start, t: float = 0.0, arclength: float = 1.0,
                     steps: int = 100, guard: float = 1e-6) -> np.ndarray:
    """RK4 integration of ``dx/ds = V/|V|`` at frozen time; returns ``(steps+1, 3)``."""
    x = geometry.as_point(start)
    if steps < 1 or arclength == 0.0:
        if flow.singular_distance(x) < guard:
            raise SingularityTooClose("streamline seed on a singularity")
        return x[None, :].copy()
    h = arclength / steps
    hint = [flow.coords(x) if flow.locates else None]

    def unit(p):
        if flow.singular_distance(p, hint[0]) < guard:
            raise SingularityTooClose(f"streamline reached a singularity near {p.tolist()}")
        v = flow.velocity(p, t, hint[0])
        n = np.linalg.norm(v)
        if n == 0.0 or not math.isfinite(n):
            raise SingularityTooClose(f"velocity vanishes or blows up at {p.tolist()}")
        return v / n

    out = [x]
    for _ in range(steps):
        k1 = unit(x)
        k2 = unit(x + 0.5 * h * k1)
        k3 = unit(x + 0.5 * h * k2)
        k4 = unit(x + h * k3)
        x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if flow.locates:
            hint[0] = flow.coords(x, hint[0])
        out.append(x)
    return np.array(out)


def chord_deviation(polyline: np.ndarray) -> float:
    """Largest distance from a polyline vertex to the chord joining its ends."""
    a, b = polyline[0], polyline[-1]
    d = b - a
    n = np.linalg.norm(d)
    if n == 0.0:
        return float(max(np.linalg.norm(polyline - a, axis=1)))
    e = d / n
    rel = polyline - a
    perp = rel - np.outer(rel @ e, e)
    return float(np.max(np.linalg.norm(perp, axis=1)))
