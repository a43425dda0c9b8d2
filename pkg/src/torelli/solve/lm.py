"""Levenberg-Marquardt for real nonlinear least squares."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class NoProgress(RuntimeError):
    def __init__(self, message: str, x: np.ndarray, residual: float):
        super().__init__(message)
        self.x = x
        self.residual = residual


@dataclass
class ResidualMap:
    dim_in: int
    dim_out: int
    eval: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray] | None = None
    fd_step: float = 1e-7

    def __call__(self, x) -> np.ndarray:
        r = np.asarray(self.eval(x), dtype=float).reshape(-1)
        if r.shape[0] != self.dim_out:
            raise ValueError(f"residual has length {r.shape[0]}, expected {self.dim_out}")
        return r

    def jacobian(self, x, r0=None) -> np.ndarray:
        if self.jac is not None:
            return np.asarray(self.jac(x), dtype=float)
        r0 = self(x) if r0 is None else r0
        J = np.empty((self.dim_out, self.dim_in))
        for k in range(self.dim_in):
            h = self.fd_step * max(1.0, abs(x[k]))
            xp = x.copy()
            xp[k] += h
            J[:, k] = (self(xp) - r0) / h
        return J


@dataclass
class LMOptions:
    max_iter: int = 500
    tol: float = 1e-12
    lambda0: float = 1e-3
    stall_iters: int = 20
    stall_rel: float = 1e-14


@dataclass
class LMResult:
    x: np.ndarray
    residual: float
    iters: int
    converged: bool
    history: list[float] = field(default_factory=list)

    def __iter__(self):
        return iter((self.x, self.residual, self.iters))


def levenberg_marquardt(F: ResidualMap, x0, opts: LMOptions | None = None, **overrides) -> LMResult:
    """Minimise ||F(x)|| starting from x0.

    Damping is multiplied by 10 after a rejected step and divided by 10 after
    an accepted one.  Raises NoProgress when the residual fails to drop by a
    relative 1e-14 for ``stall_iters`` consecutive iterations.
    """
    opts = opts or LMOptions()
    for k, v in overrides.items():
        setattr(opts, k, v)
    x = np.array(x0, dtype=float).reshape(-1)
    if x.shape[0] != F.dim_in:
        raise ValueError(f"x0 has length {x.shape[0]}, expected {F.dim_in}")
    r = F(x)
    cost = float(np.linalg.norm(r))
    history = [cost]
    lam = opts.lambda0
    stall = 0
    J = None
    it = 0
    while it < opts.max_iter and cost > opts.tol:
        it += 1
        if J is None:
            J = F.jacobian(x, r)
        A = J.T @ J
        grad = J.T @ r
        diag = np.maximum(np.diag(A), 1e-12 * max(np.diag(A).max(), 1e-300))
        try:
            step = np.linalg.solve(A + lam * np.diag(diag), -grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(A + lam * np.diag(diag), -grad, rcond=None)[0]
        x_new = x + step
        r_new = F(x_new)
        cost_new = float(np.linalg.norm(r_new))
        if np.isfinite(cost_new) and cost_new < cost:
            rel = (cost - cost_new) / cost
            x, r, J = x_new, r_new, None
            cost = cost_new
            history.append(cost)
            lam = max(lam / 10, 1e-15)
        else:
            rel = 0.0
            lam = min(lam * 10, 1e16)
        stall = stall + 1 if rel < opts.stall_rel else 0
        if stall >= opts.stall_iters:
            raise NoProgress(f"residual stalled at {cost:.3e}", x, cost)
    return LMResult(x, cost, it, cost <= opts.tol, history)
