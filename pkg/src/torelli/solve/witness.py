"""Witness points of the variety cut out by a list of quartics, sliced by a random hyperplane."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from ..poly import HomogeneousPoly
from .homotopy import AffineChart, TrackerOptions, _crandn, track_paths


@dataclass
class WitnessReport:
    count: int
    points: list[np.ndarray]
    paths_tracked: int
    failures: int
    residual_max: float
    candidates: int = 0
    rejected_residuals: list[float] = field(default_factory=list)


def _unit(u) -> np.ndarray:
    """Projective representative: unit norm, largest entry real positive."""
    u = np.asarray(u, dtype=complex)
    u = u / np.linalg.norm(u)
    k = int(np.argmax(np.abs(u)))
    return u * (abs(u[k]) / u[k])


def relative_residual(polys, u) -> float:
    u = _unit(u)
    return max(abs(p.evaluate(u)) / p.norm() for p in polys)


def witness_count(quartics, seed: int = 0, opts: TrackerOptions | None = None) -> WitnessReport:
    """Points of {all quartics = 0} on a random hyperplane of P^{g-1}.

    g - 2 random combinations of the quartics give a square system on the
    hyperplane; endpoints are checked against every quartic and kept only if
    each one has relative residual at most opts.tol.  Endpoints are not
    refined against the full system: least-squares steps would drag spurious
    endpoints onto nearby points of the variety.
    """
    opts = opts or TrackerOptions()
    quartics = [p for p in quartics if not p.is_zero()]
    if not quartics:
        raise ValueError("need at least one nonzero polynomial")
    g = quartics[0].nvars
    if g < 3:
        raise ValueError("need at least three variables")
    if any(p.nvars != g for p in quartics):
        raise ValueError("polynomials differ in nvars")
    rng = np.random.default_rng(seed)
    L = _crandn(rng, g)
    B = null_space(L[None, :])  # g x (g-1), orthonormal
    inner = AffineChart.random(g - 1, rng)
    chart = AffineChart(B @ inner.base, B @ inner.dirs)
    n = g - 2
    scaled = [HomogeneousPoly(p.nvars, p.degree, {e: c / p.norm() for e, c in p.coeffs.items()}) for p in quartics]
    mix = _crandn(rng, (n, len(scaled)))
    square = []
    for row in mix:
        acc = HomogeneousPoly.zero(g, scaled[0].degree)
        for c, p in zip(row, scaled):
            acc = acc + c * p
        square.append(acc)
    ends = track_paths(square, chart, opts, seed=int(rng.integers(2**32)))
    failures = sum(p.status in ("failed", "diverged") for p in ends)
    accepted, rejected = [], []
    for p in ends:
        if p.status not in ("converged", "singular-endpoint"):
            continue
        u = chart(p.x)
        r = relative_residual(scaled, u)
        if r <= opts.tol:
            accepted.append((_unit(u), r))
        else:
            rejected.append(r)
    accepted.sort(key=lambda ur: tuple(np.round(np.concatenate([ur[0].real, ur[0].imag]), 6)))
    points, resids = [], []
    for u, r in accepted:
        if all(np.linalg.norm(u - v) > opts.dedup_tol for v in points):
            points.append(u)
            resids.append(r)
    return WitnessReport(len(points), points, len(ends), failures, max(resids, default=0.0),
                         len(accepted) + len(rejected), sorted(rejected))


__all__ = ["WitnessReport", "relative_residual", "witness_count"]
