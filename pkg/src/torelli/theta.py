"""Riemann theta functions with characteristics and their derivatives.

All sums run over the lattice points of an ellipsoid chosen so that the
discarded tail is provably below the requested tolerance.  Derivatives are
taken with respect to z and carry the literal factors ``(2 pi i (n + eps/2))^alpha``.

For complex z = x + iy the sum is evaluated in the form
``exp(pi y^T Y^-1 y) * (oscillatory part)``; the tolerance applies to the
oscillatory part, so it is an absolute tolerance for real z (in particular
for theta constants) and a relative one in general.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gamma, gammaincc

from .linalg import LinalgError, cholesky_pd

DEFAULT_ABS_TOL = 1e-12
RADIUS_CAP = 30.0
POINT_CAP = 10**8
MAX_ORDER = 4


class ThetaError(ValueError):
    pass


class InvalidRiemannMatrix(ThetaError):
    pass


class TargetUnreachable(ThetaError):
    pass


class LatticeOverflow(ThetaError):
    pass


class OrderExceeded(ThetaError):
    pass


@dataclass(frozen=True, eq=False)
class RiemannMatrix:
    """Symmetric complex matrix with positive definite imaginary part."""

    tau: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        t = np.array(self.tau, dtype=complex)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise InvalidRiemannMatrix(f"tau must be a non-empty square matrix, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise InvalidRiemannMatrix("tau has non-finite entries")
        if np.abs(t - t.T).max() > 1e-10 * (1 + np.abs(t).max()):
            raise InvalidRiemannMatrix("tau is not symmetric")
        t = (t + t.T) / 2
        try:
            cholesky_pd(t.imag)
        except LinalgError as exc:
            raise InvalidRiemannMatrix(f"Im(tau) is not positive definite: {exc}") from exc
        t.setflags(write=False)
        object.__setattr__(self, "tau", t)

    @property
    def genus(self) -> int:
        return self.tau.shape[0]

    @cached_property
    def Y(self) -> np.ndarray:
        return self.tau.imag

    @cached_property
    def Yinv(self) -> np.ndarray:
        return np.linalg.inv(self.Y)

    @cached_property
    def T(self) -> np.ndarray:
        # upper triangular, T^T T = pi Y
        return np.linalg.cholesky(np.pi * self.Y).T

    @cached_property
    def sigma_min(self) -> float:
        return float(np.sqrt(np.pi * np.linalg.eigvalsh(self.Y).min()))

    def doubled(self) -> "RiemannMatrix":
        if "doubled" not in self._cache:
            self._cache["doubled"] = RiemannMatrix(2 * self.tau)
        return self._cache["doubled"]

    def digest(self) -> bytes:
        return self.tau.tobytes()


@dataclass(frozen=True)
class Characteristic:
    eps: tuple[int, ...]
    delta: tuple[int, ...]

    def __post_init__(self):
        eps, delta = tuple(int(e) for e in self.eps), tuple(int(d) for d in self.delta)
        if len(eps) != len(delta):
            raise ThetaError("eps and delta must have equal length")
        if any(e not in (0, 1) for e in eps + delta):
            raise ThetaError("characteristic entries must be 0 or 1")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "delta", delta)

    @classmethod
    def zero(cls, g: int) -> "Characteristic":
        return cls((0,) * g, (0,) * g)

    @property
    def genus(self) -> int:
        return len(self.eps)


def characteristics(g: int) -> list[tuple[int, ...]]:
    """All eps in {0,1}^g in binary order (first entry most significant)."""
    return [tuple(e) for e in itertools.product((0, 1), repeat=g)]


def multi_indices(g: int, order: int) -> list[tuple[int, ...]]:
    """Exponent vectors of total degree ``order``, graded-lex descending."""
    if g == 1:
        return [(order,)]
    out = []
    for first in range(order, -1, -1):
        out.extend((first,) + rest for rest in multi_indices(g - 1, order - first))
    return out


def all_multi_indices(g: int, max_order: int) -> list[tuple[int, ...]]:
    return [a for k in range(max_order + 1) for a in multi_indices(g, k)]


@dataclass(frozen=True)
class ThetaRequest:
    z: np.ndarray
    tau: RiemannMatrix
    char: Characteristic | None = None
    deriv: tuple[int, ...] | None = None
    abs_tol: float = DEFAULT_ABS_TOL

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex).reshape(-1)
        if z.shape[0] != self.tau.genus:
            raise ThetaError(f"z has length {z.shape[0]}, genus is {self.tau.genus}")
        object.__setattr__(self, "z", z)
        g = self.tau.genus
        char = self.char or Characteristic.zero(g)
        if char.genus != g:
            raise ThetaError("characteristic length does not match genus")
        object.__setattr__(self, "char", char)
        deriv = tuple(self.deriv) if self.deriv is not None else (0,) * g
        if len(deriv) != g or any(a < 0 for a in deriv):
            raise ThetaError("derivative multi-index must have genus entries, all >= 0")
        if sum(deriv) > MAX_ORDER:
            raise OrderExceeded(f"derivative order {sum(deriv)} exceeds {MAX_ORDER}")
        object.__setattr__(self, "deriv", deriv)
        if self.abs_tol < 1e-14:
            raise ThetaError("abs_tol must be at least 1e-14")


def _tail_bound(R: float, g: int, sigma: float, order: int, offset: float) -> float:
    """Bound on sum over ||T(n+c)|| > R of exp(-||T(n+c)||^2) * max(1, 2 pi ||n+c'||)^order.

    Lattice points of T Z^g are at least ``sigma`` apart, so balls of radius
    sigma/2 around them are disjoint; comparing the sum with the integral of a
    radially decreasing majorant over the complement of the ball of radius
    R - sigma/2 gives a one-dimensional integral, evaluated in closed form via
    incomplete gamma functions.  ``offset`` bounds ||c - c'||.
    """
    lower = R - sigma
    if lower < 0:
        return math.inf
    a, b = 1 + 2 * np.pi * offset, 2 * np.pi / sigma
    poly = P.polypow([a, b], order) if order else np.array([1.0])
    poly = P.polymul(poly, P.polypow([sigma / 2, 1.0], g - 1))
    total = 0.0
    for m, c in enumerate(poly):
        s = (m + 1) / 2
        total += c * 0.5 * gamma(s) * gammaincc(s, lower * lower)
    return float(g / (sigma / 2) ** g * total)


def truncation_radius(tau: RiemannMatrix, abs_tol: float = DEFAULT_ABS_TOL, max_order: int = 0,
                      *, offset: float | None = None, cap: float = RADIUS_CAP) -> float:
    """Ellipsoid radius in T-coordinates (T^T T = pi Im tau) for a given tail tolerance.

    ``offset`` bounds the distance between the ellipsoid centre and the
    characteristic shift; the default sqrt(g) covers every shift in [-1, 1]^g.
    """
    if not 0 <= max_order <= MAX_ORDER:
        raise OrderExceeded(f"max_order must be in 0..{MAX_ORDER}")
    g = tau.genus
    offset = math.sqrt(g) if offset is None else float(offset)
    key = ("radius", abs_tol, max_order, offset, cap)
    if key in tau._cache:
        return tau._cache[key]
    sigma = tau.sigma_min
    a, b = 1 + 2 * np.pi * offset, 2 * np.pi / sigma
    # majorant exp(-s^2) (a + b s)^k is decreasing beyond s_star
    s_star = (-2 * a + math.sqrt(4 * a * a + 8 * b * b * max_order)) / (4 * b) if max_order else 0.0
    lo = s_star + sigma
    if _tail_bound(cap, g, sigma, max_order, offset) > abs_tol:
        raise TargetUnreachable(f"tolerance {abs_tol:g} needs a radius beyond the cap {cap}")
    if _tail_bound(lo, g, sigma, max_order, offset) <= abs_tol:
        hi = lo
    else:
        hi = cap
        while hi - lo > 1e-3:
            mid = (lo + hi) / 2
            if _tail_bound(mid, g, sigma, max_order, offset) <= abs_tol:
                hi = mid
            else:
                lo = mid
    # guard band against boundary rounding in the enumeration
    R = hi + sigma / 2
    tau._cache[key] = R
    return R


def lattice_points(tau: RiemannMatrix, R: float, shift=None, cap: int = POINT_CAP) -> np.ndarray:
    """All n in Z^g with ||T (n + shift)|| <= R, as an (N, g) integer array."""
    if R <= 0:
        raise ThetaError("radius must be positive")
    g = tau.genus
    T = tau.T
    shift = np.zeros(g) if shift is None else np.asarray(shift, dtype=float).reshape(-1)
    pts = np.zeros((1, 0), dtype=np.int64)
    partial = np.zeros(1)
    R2 = R * R
    for i in reversed(range(g)):
        known = pts + shift[i + 1:]
        off = known @ T[i, i + 1:] if i + 1 < g else np.zeros(len(pts))
        half = np.sqrt(np.maximum(R2 - partial, 0.0)) / T[i, i]
        centre = -off / T[i, i] - shift[i]
        lo = np.ceil(centre - half).astype(np.int64)
        hi = np.floor(centre + half).astype(np.int64)
        counts = np.maximum(hi - lo + 1, 0)
        total = int(counts.sum())
        if total > cap:
            raise LatticeOverflow(f"{total} lattice points exceed the cap {cap}")
        idx = np.repeat(np.arange(len(pts)), counts)
        starts = np.cumsum(counts) - counts
        ni = lo[idx] + (np.arange(total) - starts[idx])
        row = T[i, i] * (ni + shift[i]) + off[idx]
        partial = partial[idx] + row * row
        pts = np.column_stack([ni, pts[idx]])
    return pts[partial <= R2 * (1 + 1e-14)]


def _lattice_sum(z, tau: RiemannMatrix, eps, delta, alphas, abs_tol, normalized=False):
    """Values of d^alpha theta[eps; delta](z | tau) for each alpha in ``alphas``."""
    g = tau.genus
    z = np.asarray(z, dtype=complex)
    eps = np.asarray(eps, dtype=float)
    delta = np.asarray(delta, dtype=float)
    max_order = max((sum(a) for a in alphas), default=0)
    b = tau.Yinv @ z.imag
    offset = math.ceil(np.linalg.norm(b) * 4 + 1e-12) / 4
    R = truncation_radius(tau, abs_tol, max_order, offset=offset)
    shift = eps / 2 + b
    if not z.imag.any():
        key = ("points", R, shift.tobytes())
        pts = tau._cache.get(key)
        if pts is None:
            pts = tau._cache[key] = lattice_points(tau, R, shift)
    else:
        pts = lattice_points(tau, R, shift)
    v = pts + eps / 2
    quad = np.einsum("ni,ij,nj->n", v, tau.tau, v)
    expo = 1j * np.pi * quad + 2j * np.pi * (v @ (z + delta / 2)) - np.pi * (z.imag @ b)
    terms = np.exp(expo)
    w = 2j * np.pi * v
    powers = [np.ones_like(w)]
    for _ in range(max_order):
        powers.append(powers[-1] * w)
    out = np.empty(len(alphas), dtype=complex)
    for k, alpha in enumerate(alphas):
        factor = terms
        for j, a in enumerate(alpha):
            if a:
                factor = factor * powers[a][:, j]
        out[k] = factor.sum()
    if not normalized:
        out *= np.exp(np.pi * (z.imag @ b))
    return out


def theta_eval(req: ThetaRequest) -> complex:
    """d^alpha theta[eps; delta](z | tau) for a single request."""
    return complex(_lattice_sum(req.z, req.tau, req.char.eps, req.char.delta, [req.deriv], req.abs_tol)[0])


def theta(z, tau: RiemannMatrix, eps=None, delta=None, deriv=None, abs_tol: float = DEFAULT_ABS_TOL) -> complex:
    g = tau.genus
    char = Characteristic(eps if eps is not None else (0,) * g, delta if delta is not None else (0,) * g)
    return theta_eval(ThetaRequest(np.asarray(z), tau, char, deriv, abs_tol))


def theta_hat(tau: RiemannMatrix, eps, deriv=None, abs_tol: float = DEFAULT_ABS_TOL) -> complex:
    """Derivative at 0 of theta[eps; 0](. | 2 tau)."""
    g = tau.genus
    return theta(np.zeros(g), tau.doubled(), eps, (0,) * g, deriv, abs_tol)


@dataclass(frozen=True)
class ThetaJet:
    """All partial derivatives up to ``max_order`` of one theta function at one point."""

    genus: int
    max_order: int
    values: dict[tuple[int, ...], complex]

    def __getitem__(self, alpha) -> complex:
        return self.values[tuple(alpha)]

    def tensor(self, order: int) -> np.ndarray:
        """Symmetric derivative tensor of the given order as a dense g^order array."""
        if order > self.max_order:
            raise OrderExceeded(f"jet holds derivatives up to order {self.max_order}")
        g = self.genus
        out = np.empty((g,) * order, dtype=complex)
        for idx in itertools.product(range(g), repeat=order):
            alpha = [0] * g
            for i in idx:
                alpha[i] += 1
            out[idx] = self.values[tuple(alpha)]
        return out

    def gradient(self) -> np.ndarray:
        return self.tensor(1)

    def hessian(self) -> np.ndarray:
        return self.tensor(2)


def theta_jet(z, tau: RiemannMatrix, max_order: int = 2, abs_tol: float = DEFAULT_ABS_TOL,
              eps=None, delta=None, normalized: bool = False) -> ThetaJet:
    """Every d^alpha theta[eps; delta](z) with |alpha| <= max_order from one lattice pass.

    With ``normalized`` the values are multiplied by exp(-pi y^T Y^-1 y),
    which makes their moduli (at zeros of theta) invariant under lattice
    translation of z.
    """
    if not 0 <= max_order <= MAX_ORDER:
        raise OrderExceeded(f"max_order must be in 0..{MAX_ORDER}")
    g = tau.genus
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != g:
        raise ThetaError(f"z has length {z.shape[0]}, genus is {g}")
    eps = (0,) * g if eps is None else eps
    delta = (0,) * g if delta is None else delta
    alphas = all_multi_indices(g, max_order)
    vals = _lattice_sum(z, tau, eps, delta, alphas, abs_tol, normalized=normalized)
    return ThetaJet(g, max_order, dict(zip(alphas, vals)))


def directional(jet: ThetaJet, dirs) -> complex:
    """Contract the jet with direction vectors: d_U^a d_V^b ... theta.

    ``dirs`` is a list of (vector, multiplicity) pairs.
    """
    vecs = []
    for vec, mult in dirs:
        vecs.extend([np.asarray(vec, dtype=complex)] * int(mult))
    order = len(vecs)
    if order > jet.max_order:
        raise OrderExceeded(f"contraction of order {order} exceeds jet order {jet.max_order}")
    t = jet.tensor(order)
    for v in vecs:
        t = np.tensordot(t, v, axes=([0], [0]))
    return complex(t)


def singular_residual(z, tau: RiemannMatrix, abs_tol: float = DEFAULT_ABS_TOL) -> float:
    """Euclidean norm of the normalized (theta, grad theta) at z."""
    jet = theta_jet(z, tau, 1, abs_tol, normalized=True)
    vec = np.concatenate([[jet.values[(0,) * tau.genus]], jet.gradient()])
    return float(np.linalg.norm(vec))


def lattice_equivalent(z1, z2, tau: RiemannMatrix, tol: float = 1e-6, up_to_sign: bool = False) -> bool:
    """Whether z1 - z2 (or z1 + z2 with ``up_to_sign``) lies in Z^g + tau Z^g."""
    z1, z2 = np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex)
    diffs = [z1 - z2] + ([z1 + z2] if up_to_sign else [])
    for d in diffs:
        b = tau.Yinv @ d.imag
        a = (d - tau.tau @ b).real
        if np.abs(b - np.round(b)).max() < tol and np.abs(a - np.round(a)).max() < tol:
            return True
    return False
