"""Homogeneous polynomials with complex coefficients.

Polynomials are stored sparsely, keyed by exponent vectors; dense coefficient
vectors follow graded-lex order (``u1^d, u1^(d-1) u2, ...``), which is also
the serialization order.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np


class PolyError(ValueError):
    pass


class DimensionMismatch(PolyError):
    pass


class ZeroPolynomial(PolyError):
    pass


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Exponent vectors of the given degree in graded-lex (descending) order."""
    if nvars == 0:
        return ((),) if degree == 0 else ()
    if nvars == 1:
        return ((degree,),)
    out = []
    for first in range(degree, -1, -1):
        out.extend((first,) + rest for rest in monomials(nvars - 1, degree - first))
    return tuple(out)


@lru_cache(maxsize=None)
def _monomial_index(nvars: int, degree: int) -> dict:
    return {e: k for k, e in enumerate(monomials(nvars, degree))}


def multinomial(alpha: Iterable[int]) -> int:
    alpha = tuple(alpha)
    out = math.factorial(sum(alpha))
    for a in alpha:
        out //= math.factorial(a)
    return out


def _sorted_key(e):
    # graded-lex descending == lexicographic descending within a degree
    return tuple(-x for x in e)


def _mul_dicts(a: Mapping, b: Mapping) -> dict:
    out: dict = defaultdict(complex)
    for ea, ca in a.items():
        for eb, cb in b.items():
            out[tuple(x + y for x, y in zip(ea, eb))] += ca * cb
    return out


@dataclass(frozen=True, eq=False)
class HomogeneousPoly:
    nvars: int
    degree: int
    coeffs: Mapping[tuple[int, ...], complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for e, c in self.coeffs.items():
            e = tuple(int(x) for x in e)
            if len(e) != self.nvars:
                raise DimensionMismatch(f"exponent {e} has wrong length for {self.nvars} variables")
            if sum(e) != self.degree or min(e, default=0) < 0:
                raise PolyError(f"exponent {e} is not of degree {self.degree}")
            c = complex(c)
            if c != 0:
                clean[e] = clean.get(e, 0) + c
        object.__setattr__(self, "coeffs", {e: c for e, c in clean.items() if c != 0})

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int, degree: int) -> "HomogeneousPoly":
        return cls(nvars, degree, {})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "HomogeneousPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, 1, {tuple(e): 1})

    @classmethod
    def from_coeff_vector(cls, nvars: int, degree: int, vec) -> "HomogeneousPoly":
        mons = monomials(nvars, degree)
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if len(vec) != len(mons):
            raise DimensionMismatch(f"expected {len(mons)} coefficients, got {len(vec)}")
        return cls(nvars, degree, dict(zip(mons, vec)))

    @classmethod
    def linear_form(cls, vec) -> "HomogeneousPoly":
        vec = np.asarray(vec, dtype=complex)
        return cls.from_coeff_vector(len(vec), 1, vec)

    @classmethod
    def quadratic_form(cls, M) -> "HomogeneousPoly":
        """x^T M x; the coefficient of x_i x_j (i < j) collects M_ij + M_ji."""
        M = np.asarray(M, dtype=complex)
        g = M.shape[0]
        coeffs: dict = defaultdict(complex)
        for i in range(g):
            for j in range(g):
                e = [0] * g
                e[i] += 1
                e[j] += 1
                coeffs[tuple(e)] += M[i, j]
        return cls(g, 2, coeffs)

    @classmethod
    def from_symmetric_values(cls, nvars: int, degree: int, values: Mapping) -> "HomogeneousPoly":
        """Form sum over index tuples of T[i1..id] x_i1...x_id from T given by multi-index.

        ``values`` maps each exponent vector alpha to the tensor entry; the
        monomial coefficient is the multinomial count d!/alpha! times it.
        """
        return cls(nvars, degree, {a: multinomial(a) * values[a] for a in monomials(nvars, degree)})

    # views ----------------------------------------------------------------
    def coeff_vector(self) -> np.ndarray:
        return np.array([self.coeffs.get(e, 0) for e in monomials(self.nvars, self.degree)], dtype=complex)

    def terms(self) -> list[tuple[tuple[int, ...], complex]]:
        return sorted(self.coeffs.items(), key=lambda t: _sorted_key(t[0]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeff_vector()))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self) -> str:
        if not self.coeffs:
            return f"HomogeneousPoly(0; nvars={self.nvars}, degree={self.degree})"
        return " + ".join(f"({c:.6g})*{_monomial_str(e)}" for e, c in self.terms())

    # arithmetic -----------------------------------------------------------
    def _check_compatible(self, other: "HomogeneousPoly"):
        if other.nvars != self.nvars or other.degree != self.degree:
            raise DimensionMismatch("polynomials differ in nvars or degree")

    def __add__(self, other: "HomogeneousPoly") -> "HomogeneousPoly":
        self._check_compatible(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return HomogeneousPoly(self.nvars, self.degree, out)

    def __neg__(self) -> "HomogeneousPoly":
        return HomogeneousPoly(self.nvars, self.degree, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other: "HomogeneousPoly") -> "HomogeneousPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, HomogeneousPoly):
            if other.nvars != self.nvars:
                raise DimensionMismatch("polynomials differ in nvars")
            return HomogeneousPoly(self.nvars, self.degree + other.degree, _mul_dicts(self.coeffs, other.coeffs))
        s = complex(other)
        return HomogeneousPoly(self.nvars, self.degree, {e: s * c for e, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "HomogeneousPoly":
        out = HomogeneousPoly(self.nvars, 0, {(0,) * self.nvars: 1})
        for _ in range(k):
            out = out * self
        return out

    # evaluation -----------------------------------------------------------
    def evaluate(self, x) -> complex:
        """Sum of coeff * prod x_i^e_i with compensated accumulation."""
        x = np.asarray(x, dtype=complex).reshape(-1)
        if x.shape[0] != self.nvars:
            raise DimensionMismatch(f"point has length {x.shape[0]}, polynomial has {self.nvars} variables")
        vals = [c * np.prod(x ** np.array(e)) for e, c in self.coeffs.items()]
        return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))

    __call__ = evaluate

    def compiled(self) -> "CompiledPoly":
        return CompiledPoly.from_polys([self])

    def gradient(self, x) -> np.ndarray:
        return self.compiled().jacobian(np.asarray(x, dtype=complex))[0]

    def substitute_linear(self, A) -> "HomogeneousPoly":
        return substitute_linear(self, A)

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {"nvars": self.nvars, "degree": self.degree,
                "terms": [{"exp": list(e), "re": float(c.real), "im": float(c.imag)} for e, c in self.terms()]}

    @classmethod
    def from_json(cls, doc: Mapping) -> "HomogeneousPoly":
        try:
            terms = {tuple(t["exp"]): complex(t["re"], t.get("im", 0.0)) for t in doc["terms"]}
            return cls(int(doc["nvars"]), int(doc["degree"]), terms)
        except (KeyError, TypeError) as exc:
            raise PolyError(f"malformed polynomial JSON: {exc}") from exc


def _monomial_str(e) -> str:
    parts = [f"u{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k]
    return "*".join(parts) or "1"


class CompiledPoly:
    """Vectorised evaluation and Jacobian of a list of polynomials in the same variables."""

    def __init__(self, exps: list[np.ndarray], coefs: list[np.ndarray], nvars: int):
        self.exps, self.coefs, self.nvars = exps, coefs, nvars
        self.maxdeg = max((int(e.max()) for e in exps if e.size), default=0)
        self.degrees = [int(e.sum(axis=1).max()) if e.size else 0 for e in exps]

    @classmethod
    def from_polys(cls, polys) -> "CompiledPoly":
        polys = list(polys)
        nvars = polys[0].nvars
        exps, coefs = [], []
        for p in polys:
            if p.nvars != nvars:
                raise DimensionMismatch("polynomials differ in nvars")
            items = p.terms()
            exps.append(np.array([e for e, _ in items], dtype=int).reshape(-1, nvars))
            coefs.append(np.array([c for _, c in items], dtype=complex))
        return cls(exps, coefs, nvars)

    def _powers(self, x):
        pw = np.ones((self.maxdeg + 1, self.nvars), dtype=complex)
        for k in range(1, self.maxdeg + 1):
            pw[k] = pw[k - 1] * x
        return pw

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        pw = self._powers(x)
        cols = np.arange(self.nvars)
        return np.array([c @ np.prod(pw[e, cols], axis=1) if len(c) else 0j
                         for e, c in zip(self.exps, self.coefs)])

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        pw = self._powers(x)
        cols = np.arange(self.nvars)
        J = np.zeros((len(self.exps), self.nvars), dtype=complex)
        for r, (e, c) in enumerate(zip(self.exps, self.coefs)):
            if not len(c):
                continue
            base = pw[e, cols]
            for j in range(self.nvars):
                ej = e[:, j]
                mask = ej > 0
                if not mask.any():
                    continue
                b = base[mask].copy()
                b[:, j] = ej[mask] * pw[ej[mask] - 1, j]
                J[r, j] = c[mask] @ np.prod(b, axis=1)
        return J


def evaluate(p: HomogeneousPoly, x) -> complex:
    return p.evaluate(x)


def substitute_linear(p: HomogeneousPoly, A) -> HomogeneousPoly:
    """The polynomial x -> p(A x)."""
    A = np.asarray(A, dtype=complex)
    g = p.nvars
    if A.shape != (g, g):
        raise DimensionMismatch(f"substitution matrix must be {g}x{g}, got {A.shape}")
    rows = [HomogeneousPoly.linear_form(A[i]) for i in range(g)]
    powers = [[HomogeneousPoly(g, 0, {(0,) * g: 1})] for _ in range(g)]
    for i in range(g):
        for _ in range(p.degree):
            powers[i].append(powers[i][-1] * rows[i])
    out: dict = defaultdict(complex)
    for e, c in p.coeffs.items():
        term = {(0,) * g: c}
        for i, k in enumerate(e):
            if k:
                term = _mul_dicts(term, powers[i][k].coeffs)
        for ee, cc in term.items():
            out[ee] += cc
    return HomogeneousPoly(g, p.degree, out)


def normalize(p: HomogeneousPoly) -> HomogeneousPoly:
    """Divide by the largest coefficient (earliest monomial on ties); it becomes exactly 1."""
    if p.is_zero():
        raise ZeroPolynomial("cannot normalize the zero polynomial")
    terms = p.terms()
    big = max(abs(c) for _, c in terms)
    lead_e, lead = next((e, c) for e, c in terms if abs(c) >= big * (1 - 1e-12))
    out = {e: c / lead for e, c in terms}
    out[lead_e] = 1.0
    return HomogeneousPoly(p.nvars, p.degree, out)


def proportional(p: HomogeneousPoly, q: HomogeneousPoly, tol: float = 1e-6) -> tuple[bool, complex, float]:
    """Best complex scale s minimising ||p - s q|| and the relative distance ||p - s q|| / ||p||."""
    p._check_compatible(q)
    a, b = p.coeff_vector(), q.coeff_vector()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroPolynomial("proportionality test needs nonzero polynomials")
    s = np.vdot(b, a) / np.vdot(b, b)
    dist = float(np.linalg.norm(a - s * b) / na)
    return dist <= tol, complex(s), dist


def coeff_vector(p: HomogeneousPoly) -> np.ndarray:
    return p.coeff_vector()


def from_coeff_vector(nvars: int, degree: int, vec) -> HomogeneousPoly:
    return HomogeneousPoly.from_coeff_vector(nvars, degree, vec)


def round_to_integers(p: HomogeneousPoly, max_multiplier: int = 10000, tol: float = 1e-6,
                      noise: float = 1e-8) -> tuple[HomogeneousPoly, float] | None:
    """Scale p so its coefficients become integers, if such a small scale exists.

    Coefficients below ``noise`` times the largest are treated as zero.  The
    smallest remaining coefficient is rotated onto the positive reals and set
    to 1; the least multiplier m <= max_multiplier bringing every coefficient
    within ``tol`` of a real integer wins.  The tolerance is absolute: a
    relative one would let continued-fraction convergents of irrational
    ratios pass once m grows.
    Returns (integer polynomial, largest rounding error) or None.
    """
    if p.is_zero():
        raise ZeroPolynomial("cannot round the zero polynomial")
    big = max(abs(c) for c in p.coeffs.values())
    kept = {e: c for e, c in p.coeffs.items() if abs(c) > noise * big}
    ref = min(kept.values(), key=abs)
    scaled = {e: c / ref for e, c in kept.items()}
    for m in range(1, max_multiplier + 1):
        errs = [abs(m * c - round((m * c).real)) for c in scaled.values()]
        if max(errs) <= tol:
            out = HomogeneousPoly(p.nvars, p.degree, {e: float(round((m * c).real)) for e, c in scaled.items()})
            # sign convention: leading term positive
            if out.terms()[0][1].real < 0:
                out = -out
            return out, max(errs)
    return None


class GradedPoly:
    """Weighted-homogeneous polynomial in (U, V, W, c, d) with weights (1, 2, 3, 2, 4).

    Variables are laid out as u_1..u_g, v_1..v_g, w_1..w_g, c, d.
    """

    GROUPS = ("u", "v", "w", "c", "d")

    def __init__(self, genus: int, coeffs: Mapping | None = None):
        self.genus = genus
        self.nvars = 3 * genus + 2
        self.weights = (1,) * genus + (2,) * genus + (3,) * genus + (2, 4)
        clean = {}
        for e, c in (coeffs or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != self.nvars:
                raise DimensionMismatch("exponent vector has wrong length")
            c = complex(c)
            if c != 0:
                clean[e] = clean.get(e, 0) + c
        self.coeffs = {e: c for e, c in clean.items() if c != 0}

    def group_slice(self, name: str) -> slice:
        g = self.genus
        return {"u": slice(0, g), "v": slice(g, 2 * g), "w": slice(2 * g, 3 * g),
                "c": slice(3 * g, 3 * g + 1), "d": slice(3 * g + 1, 3 * g + 2)}[name]

    def weighted_degree(self, e) -> int:
        return sum(w * k for w, k in zip(self.weights, e))

    def is_weighted_homogeneous(self, degree: int = 4) -> bool:
        return all(self.weighted_degree(e) == degree for e in self.coeffs)

    @classmethod
    def embed(cls, p: HomogeneousPoly, group: str, genus: int) -> "GradedPoly":
        """Place a polynomial in g variables onto the U, V or W block."""
        out = cls(genus)
        sl = out.group_slice(group)
        coeffs = {}
        for e, c in p.coeffs.items():
            full = [0] * out.nvars
            full[sl] = e
            coeffs[tuple(full)] = c
        return cls(genus, coeffs)

    @classmethod
    def scalar_variable(cls, name: str, genus: int) -> "GradedPoly":
        out = cls(genus)
        e = [0] * out.nvars
        e[out.group_slice(name).start] = 1
        return cls(genus, {tuple(e): 1})

    def __add__(self, other: "GradedPoly") -> "GradedPoly":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return GradedPoly(self.genus, out)

    def __mul__(self, other):
        if isinstance(other, GradedPoly):
            return GradedPoly(self.genus, _mul_dicts(self.coeffs, other.coeffs))
        s = complex(other)
        return GradedPoly(self.genus, {e: s * c for e, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "GradedPoly":
        return self * -1

    def __sub__(self, other: "GradedPoly") -> "GradedPoly":
        return self + (-other)

    def coefficient(self, e) -> complex:
        return self.coeffs.get(tuple(e), 0j)

    def evaluate(self, U, V, W, c, d) -> complex:
        x = np.concatenate([np.asarray(U, dtype=complex), np.asarray(V, dtype=complex),
                            np.asarray(W, dtype=complex), [c, d]])
        return complex(sum(cf * np.prod(x ** np.array(e)) for e, cf in self.coeffs.items()))

    def involves(self, e, group: str) -> bool:
        return any(e[self.group_slice(group)])

    def u_part(self) -> HomogeneousPoly:
        """Terms in U alone, as a quartic in g variables."""
        g = self.genus
        out = {e[:g]: c for e, c in self.coeffs.items() if not any(e[g:])}
        degrees = {sum(e) for e in out}
        degree = degrees.pop() if len(degrees) == 1 else 4
        return HomogeneousPoly(g, degree, out)

    def non_u_part(self) -> "GradedPoly":
        g = self.genus
        return GradedPoly(g, {e: c for e, c in self.coeffs.items() if any(e[g:])})

    def coeff_vector(self, degree: int = 4) -> np.ndarray:
        return np.array([self.coeffs.get(e, 0) for e in weighted_monomials(self.genus, degree)], dtype=complex)

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)


@lru_cache(maxsize=None)
def weighted_monomials(genus: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Exponent vectors of weighted degree ``degree`` in (U, V, W, c, d)."""
    weights = (1,) * genus + (2,) * genus + (3,) * genus + (2, 4)
    out = []

    def rec(i, remaining, prefix):
        if i == len(weights):
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for k in range(remaining // weights[i], -1, -1):
            rec(i + 1, remaining - k * weights[i], prefix + [k])

    rec(0, degree, [])
    return tuple(out)
