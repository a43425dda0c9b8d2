"""Total-degree homotopy continuation for square polynomial systems.

Systems are given as homogeneous polynomials in m variables together with an
affine chart u = p + N y, y in C^n, with n equal to the number of equations.
The start system y_i^{d_i} = 1 is deformed into the target through
H(y, t) = (1 - t) gamma G(y) + t F(y) with a random complex gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ..poly import CompiledPoly, HomogeneousPoly

PATH_CAP = 100_000

Status = Literal["tracking", "converged", "diverged", "singular-endpoint", "failed"]


class TooManyPaths(RuntimeError):
    pass


@dataclass
class TrackerOptions:
    tol: float = 1e-8
    dedup_tol: float = 1e-6
    divergence: float = 1e8
    max_paths: int = PATH_CAP
    h_init: float = 0.02
    h_max: float = 0.1
    h_min: float = 1e-12
    max_steps: int = 20_000
    corrector_iters: int = 3
    endgame_iters: int = 30


@dataclass
class PathPoint:
    t: float
    x: np.ndarray
    status: Status = "tracking"
    residual: float = math.inf
    steps: int = 0


@dataclass
class AffineChart:
    """u = base + dirs @ y."""
    base: np.ndarray
    dirs: np.ndarray

    @classmethod
    def standard(cls, m: int) -> "AffineChart":
        """u = (y_1, ..., y_{m-1}, 1)."""
        base = np.zeros(m, dtype=complex)
        base[-1] = 1
        return cls(base, np.eye(m, m - 1, dtype=complex))

    @classmethod
    def random(cls, m: int, rng: np.random.Generator) -> "AffineChart":
        base = _crandn(rng, m)
        dirs = _crandn(rng, (m, m - 1))
        return cls(base / np.linalg.norm(base), dirs / np.linalg.norm(dirs, axis=0))

    def __call__(self, y) -> np.ndarray:
        return self.base + self.dirs @ y

    @property
    def dim(self) -> int:
        return self.dirs.shape[1]


def _crandn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


@dataclass
class _System:
    compiled: CompiledPoly
    chart: AffineChart
    degrees: np.ndarray
    scales: np.ndarray = field(default=None)

    def F(self, y):
        return self.compiled(self.chart(y))

    def J(self, y):
        return self.compiled.jacobian(self.chart(y)) @ self.chart.dirs

    def residual(self, y) -> float:
        """Largest |f_i(u)| / (||f_i|| ||u||^d_i)."""
        u = self.chart(y)
        nu = max(np.linalg.norm(u), 1e-300)
        return float(np.max(np.abs(self.compiled(u)) / (self.scales * nu ** self.degrees)))


def _build(polys, chart) -> _System:
    polys = list(polys)
    if not polys:
        raise ValueError("empty system")
    m = polys[0].nvars
    chart = chart if chart is not None else AffineChart.standard(m)
    if chart.dim != len(polys):
        raise ValueError(f"{len(polys)} equations in a chart of dimension {chart.dim}")
    degrees = np.array([p.degree for p in polys])
    if (degrees < 1).any():
        raise ValueError("every polynomial needs degree >= 1")
    scales = np.array([max(p.norm(), 1e-300) for p in polys])
    return _System(CompiledPoly.from_polys(polys), chart, degrees, scales)


def start_points(degrees) -> list[np.ndarray]:
    """All solutions of y_i^{d_i} = 1."""
    roots = [np.exp(2j * np.pi * np.arange(d) / d) for d in degrees]
    grids = np.meshgrid(*roots, indexing="ij")
    return list(np.stack([g.reshape(-1) for g in grids], axis=1))


def _newton(f, jac, x, iters, tol):
    """Plain Newton; returns (x, last step norm, converged)."""
    dx_norm = math.inf
    for _ in range(iters):
        try:
            dx = np.linalg.solve(jac(x), -f(x))
        except np.linalg.LinAlgError:
            return x, math.inf, False
        x = x + dx
        dx_norm = float(np.linalg.norm(dx))
        if dx_norm <= tol * (1 + np.linalg.norm(x)):
            return x, dx_norm, True
    return x, dx_norm, False


def _track(sys: _System, gamma: complex, y0, opts: TrackerOptions) -> PathPoint:
    d = sys.degrees

    def H(y, t):
        return (1 - t) * gamma * (y ** d - 1) + t * sys.F(y)

    def Hy(y, t):
        return (1 - t) * gamma * np.diag(d * y ** (d - 1)) + t * sys.J(y)

    def Ht(y):
        return sys.F(y) - gamma * (y ** d - 1)

    y, t, h = np.array(y0, dtype=complex), 0.0, opts.h_init
    streak = 0
    for step in range(opts.max_steps):
        if t >= 1.0:
            break
        h = min(h, 1.0 - t)
        t1 = t + h
        try:
            dy = np.linalg.solve(Hy(y, t), -Ht(y))
        except np.linalg.LinAlgError:
            return PathPoint(t, y, "failed", steps=step)
        pred = y + h * dy
        scale = 1 + np.linalg.norm(pred)
        ok = True
        z = pred
        prev = math.inf
        for _ in range(opts.corrector_iters):
            try:
                dz = np.linalg.solve(Hy(z, t1), -H(z, t1))
            except np.linalg.LinAlgError:
                ok = False
                break
            n = float(np.linalg.norm(dz))
            # large or non-contracting corrections signal a jump between paths
            if n > 0.1 * scale or n > 0.5 * prev:
                ok = False
                break
            z, prev = z + dz, n
            if n <= 1e-10 * scale:
                break
        if ok and prev > 1e-6 * scale:
            ok = False
        if ok:
            y, t = z, t1
            streak += 1
            if streak >= 3:
                h, streak = min(2 * h, opts.h_max), 0
            if np.linalg.norm(y) > opts.divergence:
                return PathPoint(t, y, "diverged", steps=step)
        else:
            h /= 2
            streak = 0
            if h < opts.h_min:
                status = "diverged" if np.linalg.norm(y) > math.sqrt(opts.divergence) else "failed"
                return PathPoint(t, y, status, steps=step)
    else:
        return PathPoint(t, y, "failed", steps=opts.max_steps)
    y, _, _ = _newton(sys.F, sys.J, y, opts.endgame_iters, 1e-15)
    if not np.all(np.isfinite(y)) or np.linalg.norm(y) > opts.divergence:
        return PathPoint(1.0, y, "diverged", steps=step)
    res = sys.residual(y)
    status = "converged" if res <= opts.tol else "singular-endpoint"
    return PathPoint(1.0, y, status, residual=res, steps=step)


def track_paths(polys, chart: AffineChart | None = None, opts: TrackerOptions | None = None,
                seed: int = 0) -> list[PathPoint]:
    """Track every total-degree path; one PathPoint per start solution."""
    opts = opts or TrackerOptions()
    sys = _build(polys, chart)
    n_paths = math.prod(int(k) for k in sys.degrees)
    if n_paths > opts.max_paths:
        raise TooManyPaths(f"{n_paths} paths exceed the cap of {opts.max_paths}")
    rng = np.random.default_rng(seed)
    gamma = complex(np.exp(2j * np.pi * rng.uniform()))
    return [_track(sys, gamma, y0, opts) for y0 in start_points(sys.degrees)]


def dedup(points, tol: float = 1e-6) -> list[np.ndarray]:
    """Drop points within relative distance tol of an earlier one, after lexicographic sorting."""
    pts = sorted((np.asarray(p) for p in points),
                 key=lambda p: tuple(v for z in p for v in (round(z.real, 6), round(z.imag, 6))))
    out: list[np.ndarray] = []
    for p in pts:
        if all(np.linalg.norm(p - q) > tol * max(1.0, np.linalg.norm(q)) for q in out):
            out.append(p)
    return out


def solve_square_system(polys, chart: AffineChart | None = None, opts: TrackerOptions | None = None,
                        seed: int = 0) -> list[np.ndarray]:
    """Isolated solutions y of polys(chart(y)) = 0 reached by converged paths."""
    opts = opts or TrackerOptions()
    ends = track_paths(polys, chart, opts, seed)
    return dedup([p.x for p in ends if p.status == "converged"], opts.dedup_tol)


def homogenize(nvars: int, terms: dict) -> HomogeneousPoly:
    """Affine polynomial {exponent: coeff} in nvars variables, homogenized by a trailing variable.

    Pairs with AffineChart.standard(nvars + 1).
    """
    deg = max(sum(e) for e in terms)
    return HomogeneousPoly(nvars + 1, deg, {tuple(e) + (deg - sum(e),): c for e, c in terms.items()})


__all__ = ["AffineChart", "PathPoint", "TooManyPaths", "TrackerOptions", "dedup", "homogenize", "solve_square_system",
           "start_points", "track_paths"]
