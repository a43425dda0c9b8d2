"""Theta constants, the quartic elimination system and the quartics it yields.

The doubled functions ``theta_hat[eps](z) = theta[eps; 0](z | 2 tau)`` and their
even derivatives at 0 are collected in a ThetaConstantTable.  Vectors lambda
annihilating both the Hessians Q[eps] and the values theta_hat[eps](0) give
quartics ``sum_eps lambda_eps d_U^4 theta_hat[eps](0)`` in the ideal of the
canonical curve.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .poly import GradedPoly, HomogeneousPoly, monomials, normalize
from .theta import (DEFAULT_ABS_TOL, RiemannMatrix, _lattice_sum, characteristics,
                    multi_indices, singular_residual, theta_jet)

SINGULAR_THRESHOLD = 1e-8


class NotSingularPoint(ValueError):
    pass


class DimensionMismatchWarning(UserWarning):
    pass


def expected_dimension(g: int) -> int:
    return 2**g - g * (g + 1) // 2 - 1


def _alpha_to_indices(alpha) -> tuple[int, ...]:
    return tuple(i for i, k in enumerate(alpha) for _ in range(k))


def _indices_to_alpha(idx, g) -> tuple[int, ...]:
    alpha = [0] * g
    for i in idx:
        alpha[i] += 1
    return tuple(alpha)


@dataclass
class CharEntry:
    value0: complex | None = None
    hessian: np.ndarray | None = None
    fourth: dict[tuple[int, int, int, int], complex] = field(default_factory=dict)

    def fourth_values(self, g: int) -> dict[tuple[int, ...], complex]:
        """Fourth derivatives keyed by exponent vector."""
        return {_indices_to_alpha(k, g): v for k, v in self.fourth.items()}


@dataclass
class ThetaConstantTable:
    genus: int
    entries: dict[tuple[int, ...], CharEntry]
    abs_tol: float
    orders: tuple[int, ...] = (0, 2, 4)
    timings: dict[int, float] = field(default_factory=dict)

    def count_value_and_hessian(self) -> int:
        n = 0
        for e in self.entries.values():
            n += (e.value0 is not None) + (0 if e.hessian is None else len(np.triu_indices(self.genus)[0]))
        return n

    def count_fourth(self) -> int:
        return sum(len(e.fourth) for e in self.entries.values())

    def __getitem__(self, eps) -> CharEntry:
        return self.entries[tuple(eps)]


def build_table(tau: RiemannMatrix, abs_tol: float = DEFAULT_ABS_TOL,
                orders: tuple[int, ...] = (0, 2, 4)) -> ThetaConstantTable:
    """Even-order theta constants of theta_hat[eps] for every eps in {0,1}^g."""
    import time

    g = tau.genus
    doubled = tau.doubled()
    orders = tuple(sorted(set(orders)))
    if any(k not in (0, 2, 4) for k in orders):
        raise ValueError("orders must be drawn from 0, 2, 4")
    entries = {}
    timings = {k: 0.0 for k in orders}
    for eps in characteristics(g):
        entry = CharEntry()
        for k in orders:
            alphas = multi_indices(g, k)
            t0 = time.perf_counter()
            vals = _lattice_sum(np.zeros(g), doubled, eps, (0,) * g, alphas, abs_tol)
            timings[k] += time.perf_counter() - t0
            by_alpha = dict(zip(alphas, vals))
            if k == 0:
                entry.value0 = complex(vals[0])
            elif k == 2:
                H = np.empty((g, g), dtype=complex)
                for i in range(g):
                    for j in range(g):
                        H[i, j] = by_alpha[_indices_to_alpha((i, j), g)]
                entry.hessian = H
            else:
                entry.fourth = {_alpha_to_indices(a): v for a, v in by_alpha.items()}
        entries[eps] = entry
    return ThetaConstantTable(g, entries, abs_tol, orders, timings)


def lemma_matrix(table: ThetaConstantTable) -> np.ndarray:
    """Rows: upper-triangular entries of Q[eps], then theta_hat[eps](0); columns: eps in binary order."""
    g = table.genus
    iu, ju = np.triu_indices(g)
    cols = []
    for eps in characteristics(g):
        e = table[eps]
        cols.append(np.concatenate([e.hessian[iu, ju], [e.value0]]))
    return np.column_stack(cols)


def fourth_derivative_quartic(table: ThetaConstantTable, eps) -> HomogeneousPoly:
    """d_U^4 theta_hat[eps](0) as a quartic form in U."""
    g = table.genus
    return HomogeneousPoly.from_symmetric_values(g, 4, table[eps].fourth_values(g))


@dataclass
class RecoveryResult:
    quartics: list[HomogeneousPoly]
    lambda_basis: list[np.ndarray]
    expected_dim: int
    singular_values: np.ndarray
    table: ThetaConstantTable | None = None

    @property
    def dim(self) -> int:
        return len(self.quartics)

    @property
    def dimension_ok(self) -> bool:
        return self.dim == self.expected_dim


def combine_quartics(table: ThetaConstantTable, lam) -> HomogeneousPoly:
    g = table.genus
    total = np.zeros(len(monomials(g, 4)), dtype=complex)
    for coef, eps in zip(lam, characteristics(g)):
        total += coef * fourth_derivative_quartic(table, eps).coeff_vector()
    return HomogeneousPoly.from_coeff_vector(g, 4, total)


def recover_quartics(tau: RiemannMatrix, abs_tol: float = DEFAULT_ABS_TOL,
                     rel_tol: float = linalg.DEFAULT_RANK_TOL,
                     table: ThetaConstantTable | None = None) -> RecoveryResult:
    """Quartics spanning the eliminated space for tau.

    A nullspace dimension other than 2^g - g(g+1)/2 - 1 only triggers a
    DimensionMismatchWarning: non-Jacobian matrices go through the same path.
    """
    if table is None:
        table = build_table(tau, abs_tol)
    g = table.genus
    ns = linalg.nullspace(lemma_matrix(table), rel_tol)
    quartics = [normalize(combine_quartics(table, lam)) for lam in ns.basis]
    result = RecoveryResult(quartics, list(ns.basis), expected_dimension(g), ns.singular_values, table)
    if not result.dimension_ok:
        warnings.warn(f"nullspace dimension {result.dim} differs from the expected {result.expected_dim}",
                      DimensionMismatchWarning, stacklevel=2)
    return result


def dubrovin_quartic(table: ThetaConstantTable, eps) -> GradedPoly:
    """d_U^4 - d_U d_W + (3/2) c d_U^2 + (3/4) d_V^2 + d, applied to theta_hat[eps] at 0."""
    g = table.genus
    entry = table[eps]
    Q = entry.hessian
    u = GradedPoly.embed(fourth_derivative_quartic(table, eps), "u", g)
    uw = {}
    for i in range(g):
        for j in range(g):
            e = [0] * (3 * g + 2)
            e[i] += 1
            e[2 * g + j] += 1
            uw[tuple(e)] = -Q[i, j]
    c = GradedPoly.scalar_variable("c", g)
    d = GradedPoly.scalar_variable("d", g)
    quad = HomogeneousPoly.quadratic_form(Q)
    return (u + GradedPoly(g, uw) + 1.5 * c * GradedPoly.embed(quad, "u", g)
            + 0.75 * GradedPoly.embed(quad, "v", g) + entry.value0 * d)


def _mixed(left, right, g, group_left, group_right) -> GradedPoly:
    """sum_ij M_ij x_i y_j with x, y in two (possibly equal) variable groups, M = outer(left, right) or matrix."""
    M = left if right is None else np.outer(left, right)
    out = {}
    offs = {"u": 0, "v": g, "w": 2 * g}
    for i in range(g):
        for j in range(g):
            e = [0] * (3 * g + 2)
            e[offs[group_left] + i] += 1
            e[offs[group_right] + j] += 1
            out[tuple(e)] = out.get(tuple(e), 0) + M[i, j]
    return GradedPoly(g, out)


def hirota_quartic(z, tau: RiemannMatrix, abs_tol: float = DEFAULT_ABS_TOL, normalized: bool = False) -> GradedPoly:
    """The Hirota quartic H_z assembled from the order-4 jet of theta at z."""
    g = tau.genus
    jet = theta_jet(z, tau, 4, abs_tol, normalized=normalized)
    t0 = jet.values[(0,) * g]
    G = jet.gradient()
    H = jet.hessian()
    by_order = {k: HomogeneousPoly.from_symmetric_values(g, k, jet.values) for k in (1, 2, 3, 4)}
    U = {k: GradedPoly.embed(p, "u", g) for k, p in by_order.items()}
    c = GradedPoly.scalar_variable("c", g)
    d = GradedPoly.scalar_variable("d", g)
    GG = np.outer(G, G)
    return (t0 * U[4] - 4 * U[3] * U[1] + 3 * U[2] * U[2]
            + 4 * _mixed(GG - t0 * H, None, g, "u", "w")
            + 6 * c * _mixed(t0 * H - GG, None, g, "u", "u")
            + 3 * _mixed(t0 * H - GG, None, g, "v", "v")
            + 8 * t0 * t0 * d)


def _singular_jet(z0, tau, abs_tol, order, threshold):
    res = singular_residual(z0, tau, abs_tol)
    if res > threshold:
        raise NotSingularPoint(f"(theta, grad theta) residual {res:.3e} exceeds {threshold:.1e}")
    return theta_jet(z0, tau, order, abs_tol, normalized=True)


def quadric_from_singular(z0, tau: RiemannMatrix, abs_tol: float = DEFAULT_ABS_TOL,
                          threshold: float = SINGULAR_THRESHOLD) -> HomogeneousPoly:
    """U^T Hess(theta)(z0) U for a singular point z0 of the theta divisor."""
    jet = _singular_jet(z0, tau, abs_tol, 2, threshold)
    return HomogeneousPoly.quadratic_form(jet.hessian())


def cubic_from_singular(z0, tau: RiemannMatrix, abs_tol: float = DEFAULT_ABS_TOL,
                        threshold: float = SINGULAR_THRESHOLD) -> HomogeneousPoly:
    """d_U^3 theta(z0) as a cubic form."""
    jet = _singular_jet(z0, tau, abs_tol, 3, threshold)
    return HomogeneousPoly.from_symmetric_values(tau.genus, 3, jet.values)


def membership_residual(polys, points) -> float:
    """max |p(x)| / (||p|| ||x||^deg) over polynomials and points."""
    points = [np.asarray(x, dtype=complex) for x in points]
    if not points:
        raise ValueError("need at least one point")
    worst = 0.0
    for p in polys:
        n = p.norm()
        if n == 0:
            continue
        for x in points:
            worst = max(worst, abs(p.evaluate(x)) / (n * np.linalg.norm(x) ** p.degree))
    return worst


def span_residual(basis_polys, p) -> float:
    """Relative distance of p's coefficient vector from the span of basis_polys."""
    return linalg.span_residual([q.coeff_vector() for q in basis_polys], p.coeff_vector())


def same_span(a, b, tol: float = 1e-6) -> bool:
    """Mutual span containment of two lists of polynomials."""
    return (all(span_residual(a, p) <= tol for p in b)
            and all(span_residual(b, p) <= tol for p in a))

