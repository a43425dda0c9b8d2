"""Singular points of the theta divisor and random Riemann matrices."""
from __future__ import annotations

import numpy as np

from ..theta import DEFAULT_ABS_TOL, RiemannMatrix, singular_residual, theta_jet
from .lm import LMOptions, NoProgress, ResidualMap, levenberg_marquardt


class GenusTooSmall(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    def __init__(self, message: str, best_z: np.ndarray | None, best_residual: float):
        super().__init__(message)
        self.best_z = best_z
        self.best_residual = best_residual


GRADIENT_WEIGHT = 1 / (2 * np.pi)


def singular_system(tau: RiemannMatrix, abs_tol: float = DEFAULT_ABS_TOL,
                    gradient_weight: float = GRADIENT_WEIGHT) -> ResidualMap:
    """(theta, w * grad theta) at z = a + tau b as a real map of (a, b).

    Values are normalized by exp(-pi b^T Im(tau) b), so the residual measures
    the same quantity wherever in the lattice the point sits.  The gradient
    carries factors 2 pi i per derivative; weighting it by 1/(2 pi) balances
    the two blocks and greatly enlarges the basins of the true zeros.
    """
    g = tau.genus
    Y = tau.Y
    weights = np.array([1.0] + [gradient_weight] * g)

    def split(x):
        a, b = x[:g], x[g:]
        return a + tau.tau @ b, b

    def values(x):
        z, _ = split(x)
        jet = theta_jet(z, tau, 2, abs_tol, normalized=True)
        f = np.concatenate([[jet.values[(0,) * g]], jet.gradient()])
        return jet, f

    def residual(x):
        _, f = values(x)
        f = weights * f
        return np.concatenate([f.real, f.imag])

    def jacobian(x):
        jet, f = values(x)
        _, b = split(x)
        Jc = np.vstack([jet.gradient()[None, :], jet.hessian()])
        Ja = Jc
        Jb = Jc @ tau.tau + np.outer(f, -2 * np.pi * (Y @ b))
        Jfull = weights[:, None] * np.hstack([Ja, Jb])
        return np.vstack([Jfull.real, Jfull.imag])

    return ResidualMap(2 * g, 2 * (g + 1), residual, jacobian)


def find_singular_point(tau: RiemannMatrix, seed: int = 0, tol: float = 1e-10, budget: int = 50,
                        max_iter: int = 200, abs_tol: float = DEFAULT_ABS_TOL) -> np.ndarray:
    """A point z0 where theta and its gradient vanish, from random starts z = a + tau b, a, b in [0,1)^g."""
    g = tau.genus
    if g < 4:
        raise GenusTooSmall(f"genus {g}: the theta divisor of a non-hyperelliptic Jacobian is smooth below genus 4")
    rng = np.random.default_rng(seed)
    F = singular_system(tau, abs_tol)
    # the weighted residual bounds the plain one up to the factor 1/weight
    lm_tol = tol * min(1.0, GRADIENT_WEIGHT)
    best_z, best_res = None, np.inf
    for _ in range(budget):
        x0 = rng.uniform(0.0, 1.0, 2 * g)
        try:
            x = levenberg_marquardt(F, x0, LMOptions(max_iter=max_iter, tol=lm_tol)).x
        except NoProgress as exc:
            x = exc.x
        z = x[:g] + tau.tau @ x[g:]
        r = singular_residual(z, tau, abs_tol)
        if r < best_res:
            best_z, best_res = z, r
        if r <= tol:
            return z
    raise BudgetExhausted(f"no singular point within {budget} restarts (best residual {best_res:.3e})",
                          best_z, float(best_res))


def random_riemann_matrix(g: int, seed: int = 0, scale: float = 1.0) -> RiemannMatrix:
    """Re: symmetric uniform(-1/2, 1/2); Im: scale * (B^T B + g I) with B standard normal."""
    if g < 1:
        raise ValueError("genus must be positive")
    rng = np.random.default_rng(seed)
    X = rng.uniform(-0.5, 0.5, (g, g))
    X = np.triu(X) + np.triu(X, 1).T
    B = rng.standard_normal((g, g))
    Y = scale * (B.T @ B + g * np.eye(g))
    Y = (Y + Y.T) / 2
    return RiemannMatrix(X + 1j * Y)


__all__ = ["BudgetExhausted", "GenusTooSmall", "find_singular_point", "random_riemann_matrix",
           "singular_residual", "singular_system"]
