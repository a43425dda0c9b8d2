import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torelli.poly import (DimensionMismatch, GradedPoly, HomogeneousPoly, PolyError, ZeroPolynomial, monomials,
                          normalize, proportional, round_to_integers, substitute_linear)

u = [HomogeneousPoly.variable(4, i) for i in range(4)]


def random_poly(r, g, d):
    n = len(monomials(g, d))
    return HomogeneousPoly.from_coeff_vector(g, d, r.standard_normal(n) + 1j * r.standard_normal(n))


def test_canonical_form():
    p = HomogeneousPoly(2, 2, {(2, 0): 1, (1, 1): 0})
    assert list(p.coeffs) == [(2, 0)]
    with pytest.raises(PolyError):
        HomogeneousPoly(2, 2, {(1, 0): 1})
    with pytest.raises(DimensionMismatch):
        HomogeneousPoly(2, 1, {(1, 0, 0): 1})


def test_evaluate_examples(rng):
    assert (u[0] * u[3] - u[1] * u[2]).evaluate([1, 1, 1, 1]) == 0
    p = random_poly(rng, 3, 4)
    assert p.evaluate(np.zeros(3)) == 0
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    t = 0.7 - 1.3j
    assert abs(p(t * x) - t**4 * p(x)) <= 1e-12 * abs(t**4 * p(x))


def test_monomial_order_and_lengths():
    assert monomials(2, 2) == ((2, 0), (1, 1), (0, 2))
    assert len(monomials(4, 4)) == 35
    for g in range(1, 9):
        for d in range(6):
            assert len(monomials(g, d)) == math.comb(g - 1 + d, d)


def test_coeff_vector_round_trip(rng):
    p = random_poly(rng, 4, 3)
    q = HomogeneousPoly.from_coeff_vector(4, 3, p.coeff_vector())
    assert q.coeffs == p.coeffs


def test_substitute_linear_examples(rng):
    p = random_poly(rng, 3, 3)
    assert np.allclose(substitute_linear(p, np.eye(3)).coeff_vector(), p.coeff_vector())
    sq = HomogeneousPoly(2, 2, {(2, 0): 1})
    swapped = substitute_linear(sq, [[0, 1], [1, 0]])
    assert swapped.coeffs == {(0, 2): 1}


def test_substitute_linear_inverse_and_evaluation(rng):
    for _ in range(10):
        p = random_poly(rng, 3, 4)
        A = np.eye(3) + 0.3 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        back = substitute_linear(substitute_linear(p, A), np.linalg.inv(A))
        assert np.abs(back.coeff_vector() - p.coeff_vector()).max() <= 1e-9 * np.abs(p.coeff_vector()).max()
        x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v = p(A @ x)
        assert abs(substitute_linear(p, A)(x) - v) <= 1e-10 * abs(v)


def test_normalize_examples(rng):
    assert normalize(HomogeneousPoly(2, 2, {(2, 0): 2})).coeffs == {(2, 0): 1}
    p = HomogeneousPoly(2, 2, {(1, 1): 1j, (0, 2): 1})
    assert normalize(p).coeffs == pytest.approx({(1, 1): 1, (0, 2): -1j})
    for _ in range(100):
        q = normalize(random_poly(rng, 3, 2))
        assert normalize(q).coeffs == q.coeffs
    with pytest.raises(ZeroPolynomial):
        normalize(HomogeneousPoly.zero(2, 2))


def test_proportional_examples(rng):
    q = random_poly(rng, 3, 4)
    ok, s, dist = proportional(3 * q, q)
    assert ok and s == pytest.approx(3) and dist <= 1e-15
    a = HomogeneousPoly(2, 2, {(2, 0): 1})
    b = HomogeneousPoly(2, 2, {(0, 2): 1})
    ok, s, dist = proportional(a, b)
    assert not ok and s == 0 and dist == pytest.approx(1)
    e = random_poly(rng, 3, 4)
    e = e * (1 / e.norm())
    ok, s, dist = proportional(q + 1e-9 * e, q)
    assert ok and dist == pytest.approx(1e-9 / q.norm(), rel=0.5)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
def test_proportional_recovers_scale(re, im, seed):
    s = complex(re, im)
    if abs(s) < 1e-3:
        s = 1.0
    p = random_poly(np.random.default_rng(seed), 3, 3)
    _, scale, _ = proportional(s * p, p)
    assert abs(scale - s) <= 1e-12 * max(1, abs(s))


def test_json_round_trip(rng):
    p = random_poly(rng, 4, 4)
    doc = json.loads(json.dumps(p.to_json()))
    assert doc["nvars"] == 4 and doc["degree"] == 4
    assert HomogeneousPoly.from_json(doc).coeffs == p.coeffs
    with pytest.raises(PolyError):
        HomogeneousPoly.from_json({"nvars": 2})


def test_round_to_integers():
    target = HomogeneousPoly(3, 2, {(2, 0, 0): 3, (1, 1, 0): -5, (0, 0, 2): 7})
    noisy = HomogeneousPoly(3, 2, {e: (0.2 - 0.9j) * c * (1 + 1e-11) for e, c in target.coeffs.items()})
    noisy = noisy + HomogeneousPoly(3, 2, {(0, 2, 0): 1e-14})
    out, err = round_to_integers(noisy)
    assert out.coeffs == target.coeffs and err < 1e-9
    assert round_to_integers(HomogeneousPoly(2, 1, {(1, 0): 1, (0, 1): math.pi})) is None


def test_compiled_jacobian_matches_gradient(rng):
    p = random_poly(rng, 3, 4)
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    h = 1e-6
    fd = [(p(x + h * e) - p(x - h * e)) / (2 * h) for e in np.eye(3)]
    assert np.allclose(p.gradient(x), fd, rtol=1e-6)


def test_graded_poly_blocks():
    g = 2
    c = GradedPoly.scalar_variable("c", g)
    d = GradedPoly.scalar_variable("d", g)
    quad = GradedPoly.embed(HomogeneousPoly(g, 2, {(1, 1): 1}), "u", g)
    F = c * quad + d + GradedPoly.embed(HomogeneousPoly(g, 2, {(2, 0): 1}), "v", g)
    assert F.is_weighted_homogeneous(4)
    assert F.u_part().is_zero()
    assert F.evaluate([1, 2], [3, 0], [0, 0], 5, 7) == 5 * 2 + 7 + 9
