"""Quadrics Q whose square lies in the span of a list of quartics."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..poly import HomogeneousPoly, monomials, proportional
from .homotopy import _crandn
from .lm import LMOptions, NoProgress, ResidualMap, levenberg_marquardt


@dataclass
class QuadricOptions:
    tol: float = 1e-8
    dedup_tol: float = 1e-6
    max_iter: int = 2000


@lru_cache(maxsize=None)
def square_tensor(nvars: int) -> np.ndarray:
    """M with coeff(Q^2)[m] = sum_ab M[m, a, b] q_a q_b, symmetric in (a, b)."""
    quad = monomials(nvars, 2)
    index = {e: i for i, e in enumerate(monomials(nvars, 4))}
    M = np.zeros((len(index), len(quad), len(quad)))
    for a, ea in enumerate(quad):
        for b, eb in enumerate(quad):
            M[index[tuple(x + y for x, y in zip(ea, eb))], a, b] += 1
    return M


def _complex_map(k: int, nq: int, basis: np.ndarray, M: np.ndarray, r: np.ndarray) -> ResidualMap:
    """Residual (B lam - coeff(Q^2), r.lam - 1) over real unknowns [Re lam, Re q, Im lam, Im q]."""
    n = k + nq

    def unpack(x):
        z = x[:n] + 1j * x[n:]
        return z[:k], z[k:]

    def residual_c(x):
        lam, q = unpack(x)
        sq = np.einsum("mab,a,b->m", M, q, q)
        return np.concatenate([basis @ lam - sq, [r @ lam - 1]])

    def jac_c(x):
        _, q = unpack(x)
        Jq = -2 * np.einsum("mab,b->ma", M, q)
        top = np.hstack([basis, Jq])
        bottom = np.concatenate([r, np.zeros(nq)])[None, :]
        return np.vstack([top, bottom])

    def ev(x):
        R = residual_c(x)
        return np.concatenate([R.real, R.imag])

    def jac(x):
        J = jac_c(x)
        return np.block([[J.real, -J.imag], [J.imag, J.real]])

    m = basis.shape[0] + 1
    return ResidualMap(2 * n, 2 * m, ev, jac)


def extract_quadrics(quartics, attempts: int = 50, opts: QuadricOptions | None = None,
                     seed: int = 0) -> list[HomogeneousPoly]:
    """Quadrics Q with Q^2 in span(quartics), from random LM starts, up to scale."""
    opts = opts or QuadricOptions()
    quartics = list(quartics)
    if not quartics:
        return []
    g = quartics[0].nvars
    if any(p.nvars != g or p.degree != 4 for p in quartics):
        raise ValueError("expected quartics in a common set of variables")
    vecs = np.column_stack([p.coeff_vector() for p in quartics])
    U, s, _ = np.linalg.svd(vecs, full_matrices=False)
    basis = U[:, s > 1e-10 * s[0]] if s.size and s[0] > 0 else U[:, :0]
    k = basis.shape[1]
    if k == 0:
        return []
    M = square_tensor(g)
    nq = M.shape[1]
    rng = np.random.default_rng(seed)
    r = _crandn(rng, k)
    F = _complex_map(k, nq, basis, M, r)
    found: list[HomogeneousPoly] = []
    for _ in range(attempts):
        x0 = rng.standard_normal(F.dim_in)
        # run to stagnation: near rank-deficient squares the residual is quadratic
        # in the error, so a residual threshold alone leaves visible contamination
        try:
            res = levenberg_marquardt(F, x0, LMOptions(max_iter=opts.max_iter, tol=0.0))
            x = res.x
        except NoProgress as exc:
            x = exc.x
        n = k + nq
        q = x[k:n] + 1j * x[n + k:]
        sq_norm = np.linalg.norm(np.einsum("mab,a,b->m", M, q, q))
        if sq_norm == 0 or np.linalg.norm(F(x)) > opts.tol * sq_norm:
            continue
        Q = HomogeneousPoly.from_coeff_vector(g, 2, q)
        if not any(proportional(Q, P, opts.dedup_tol)[0] for P in found):
            found.append(Q)
    return found


__all__ = ["QuadricOptions", "extract_quadrics", "square_tensor"]
