import itertools
import math
import warnings

import numpy as np
import pytest

from torelli.dubrovin import DimensionMismatchWarning, quadric_from_singular, recover_quartics
from torelli.linalg import cholesky_pd
from torelli.poly import HomogeneousPoly, monomials, proportional
from torelli.solve import (AffineChart, BudgetExhausted, GenusTooSmall, LMOptions, NoProgress, ResidualMap,
                           TooManyPaths, TrackerOptions, extract_quadrics, find_singular_point, homogenize,
                           levenberg_marquardt, random_riemann_matrix, solve_square_system, track_paths,
                           witness_count)
from torelli.theta import lattice_equivalent, singular_residual

u = [HomogeneousPoly.variable(4, i) for i in range(4)]


# ---------------------------------------------------------------- LM
def test_lm_scalar_root():
    F = ResidualMap(1, 1, lambda x: x**2 - 2, lambda x: np.array([[2 * x[0]]]))
    res = levenberg_marquardt(F, [1.0])
    assert res.converged and res.x[0] == pytest.approx(math.sqrt(2), abs=1e-10)
    x, r, iters = res
    assert r <= 1e-12 and iters > 0


def test_lm_rosenbrock_with_finite_differences():
    F = ResidualMap(2, 2, lambda x: np.array([1 - x[0], 10 * (x[1] - x[0] ** 2)]))
    res = levenberg_marquardt(F, [-1.2, 1.0])
    assert np.abs(res.x - 1).max() <= 1e-8
    assert all(a >= b for a, b in zip(res.history, res.history[1:]))


def test_lm_stall_raises():
    # |x|^2 + 1 has no root; the residual stagnates at 1
    F = ResidualMap(1, 1, lambda x: x**2 + 1)
    with pytest.raises(NoProgress) as info:
        levenberg_marquardt(F, [0.3])
    assert info.value.residual == pytest.approx(1, abs=1e-6)


def test_lm_checks_lengths():
    F = ResidualMap(2, 1, lambda x: np.array([x[0], x[1]]))
    with pytest.raises(ValueError):
        levenberg_marquardt(F, [1.0])
    with pytest.raises(ValueError):
        F(np.zeros(2))


def test_lm_max_iter_returns_best():
    F = ResidualMap(2, 2, lambda x: np.array([1 - x[0], 10 * (x[1] - x[0] ** 2)]))
    res = levenberg_marquardt(F, [-1.2, 1.0], LMOptions(max_iter=3))
    assert not res.converged and res.iters == 3


# ---------------------------------------------------------------- singular points
def test_random_riemann_matrix():
    for seed in range(5):
        tau = random_riemann_matrix(4, seed=seed, scale=0.7)
        assert np.array_equal(tau.tau, tau.tau.T)
        cholesky_pd(tau.Y)
    assert np.abs(random_riemann_matrix(3, 0).tau - random_riemann_matrix(3, 1).tau).max() > 1e-3
    with pytest.raises(ValueError):
        random_riemann_matrix(0)


def test_singular_point_genus4(fixture_files):
    tau = fixture_files["genus4"].riemann_matrix()
    z0 = find_singular_point(tau, seed=0)
    assert singular_residual(z0, tau) <= 1e-10
    quadric_from_singular(z0, tau)  # passes the residual gate


def test_singular_point_genus_too_small(fixture_files):
    with pytest.raises(GenusTooSmall):
        find_singular_point(fixture_files["trott"].riemann_matrix())


def test_singular_point_budget(fixture_files):
    tau = fixture_files["genus4"].riemann_matrix()
    with pytest.raises(BudgetExhausted) as info:
        find_singular_point(tau, seed=0, budget=1, max_iter=2)
    assert info.value.best_residual > 1e-10 and info.value.best_z is not None


def test_three_singular_points_genus5(fixture_files):
    tau = fixture_files["genus5"].riemann_matrix()
    pts = [find_singular_point(tau, seed=s) for s in range(3)]
    for z in pts:
        assert singular_residual(z, tau) <= 1e-10
    for a, b in itertools.combinations(pts, 2):
        assert not lattice_equivalent(a, b, tau, 1e-6, up_to_sign=True)


# ---------------------------------------------------------------- homotopy
def _sorted(points):
    return sorted((np.round(p, 8) for p in points), key=lambda p: tuple(np.concatenate([p.real, p.imag])))


def test_homotopy_small_examples():
    sols = solve_square_system([homogenize(1, {(2,): 1, (0,): -1})])
    assert np.allclose(sorted(s[0].real for s in sols), [-1, 1]) and len(sols) == 2
    sols = solve_square_system([homogenize(2, {(2, 0): 1, (0, 2): 1, (0, 0): -2}),
                                homogenize(2, {(1, 0): 1, (0, 1): -1})])
    assert len(sols) == 2
    assert np.allclose(sorted(s[0].real for s in sols), [-1, 1])
    assert all(abs(s[0] - s[1]) < 1e-10 for s in sols)
    sols = solve_square_system([homogenize(2, {(3, 0): 1, (0, 0): -1}), homogenize(2, {(0, 1): 1, (1, 0): -1})])
    roots = np.exp(2j * np.pi * np.arange(3) / 3)
    assert len(sols) == 3
    for s in sols:
        assert np.min(np.abs(roots - s[0])) < 1e-10 and abs(s[0] - s[1]) < 1e-10


def test_path_tracker_on_products_of_linear_forms():
    r = np.random.default_rng(2024)
    for _ in range(20):
        n = int(r.integers(1, 4))
        while True:
            degs = r.integers(1, 4, n)
            if math.prod(degs) <= 27:
                break
        factors = [[r.standard_normal(n + 1) + 1j * r.standard_normal(n + 1) for _ in range(d)] for d in degs]
        polys = []
        for fs in factors:
            p = HomogeneousPoly.linear_form(fs[0])
            for f in fs[1:]:
                p = p * HomogeneousPoly.linear_form(f)
            polys.append(p)
        expected = []
        for choice in itertools.product(*factors):
            A = np.array([c[:n] for c in choice])
            b = -np.array([c[n] for c in choice])
            expected.append(np.linalg.solve(A, b))
        sols = solve_square_system(polys, seed=int(r.integers(1000)))
        assert len(sols) == len(expected)
        for e in expected:
            assert min(np.linalg.norm(s - e) for s in sols) <= 1e-8 * max(1, np.linalg.norm(e))


def test_path_cap():
    polys = [homogenize(2, {(7, 0): 1, (0, 0): -1}), homogenize(2, {(0, 7): 1, (0, 0): -1})]
    with pytest.raises(TooManyPaths):
        track_paths(polys, opts=TrackerOptions(max_paths=40))


def test_diverging_paths_are_dropped():
    # x*y = 1, x = 0 has no affine solution; the single path must not be reported
    polys = [homogenize(2, {(1, 1): 1, (0, 0): -1}), homogenize(2, {(1, 0): 1})]
    ends = track_paths(polys)
    assert all(p.status != "converged" for p in ends)
    assert solve_square_system(polys) == []


def test_chart_dimension_checked():
    with pytest.raises(ValueError):
        solve_square_system([homogenize(2, {(1, 0): 1, (0, 0): 1})])


# ---------------------------------------------------------------- witness sets
def test_witness_twisted_cubic():
    """The twisted cubic is cut out by three quadrics and has degree 3."""
    x = [HomogeneousPoly.variable(4, i) for i in range(4)]
    quadrics = [x[0] * x[2] - x[1] * x[1], x[1] * x[3] - x[2] * x[2], x[0] * x[3] - x[1] * x[2]]
    rep = witness_count(quadrics, seed=3)
    assert rep.count == 3 and rep.paths_tracked == 4


def test_witness_genus4_stable(recovered):
    for seed in range(5):
        rep = witness_count(recovered["genus4"].quartics, seed=seed)
        assert rep.count == 6
        assert rep.residual_max <= 1e-8


def test_witness_random_matrices_have_no_common_points():
    # verdicts at Im tau >= I must not hinge on pairing the slice seed with the matrix seed
    for k in range(5):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DimensionMismatchWarning)
            res = recover_quartics(random_riemann_matrix(4, seed=k, scale=0.25))
        assert res.dim == 5
        for seed in (k + 1, k + 7):
            assert witness_count(res.quartics, seed=seed).count == 0


def test_witness_input_checks():
    with pytest.raises(ValueError):
        witness_count([])
    with pytest.raises(ValueError):
        witness_count([HomogeneousPoly(2, 2, {(1, 1): 1})])


# ---------------------------------------------------------------- quadric extraction
def test_extract_constructed_squares():
    qs = extract_quadrics([(u[0] * u[1]) ** 2, u[0] ** 4])
    targets = [u[0] * u[1], u[0] ** 2]
    assert len(qs) == 2
    for t in targets:
        assert any(proportional(q, t, 1e-6)[0] for q in qs)


def _univariate_roots(p, rng):
    """Roots of p restricted to a random line through two random points."""
    a, b = (rng.standard_normal(p.nvars) + 1j * rng.standard_normal(p.nvars) for _ in range(2))
    ts = np.exp(2j * np.pi * np.arange(p.degree + 1) / (p.degree + 1))
    vals = [p(a + t * b) for t in ts]
    coeffs = np.linalg.solve(np.vander(ts, p.degree + 1), vals)
    return np.roots(coeffs)


def test_generic_quartic_is_not_a_square(rng):
    n = len(monomials(4, 4))
    R = HomogeneousPoly.from_coeff_vector(4, 4, rng.standard_normal(n) + 1j * rng.standard_normal(n))
    # a square restricts to lines with double roots; R does not
    roots = _univariate_roots(R, rng)
    gaps = [abs(a - b) for a, b in itertools.combinations(roots, 2)]
    assert min(gaps) > 1e-3 * max(1, np.abs(roots).max())
    square = _univariate_roots((u[0] * u[1] + u[2] * u[3]) ** 2, rng)
    assert min(abs(a - b) for a, b in itertools.combinations(square, 2)) < 1e-6
    assert extract_quadrics([R], attempts=50) == []


def test_extract_genus4_quadric(recovered, fixture_files):
    qs = extract_quadrics(recovered["genus4"].quartics)
    assert len(qs) == 1
    user = qs[0].substitute_linear(fixture_files["genus4"].to_user)
    assert proportional(user, u[0] * u[3] - u[1] * u[2], 1e-6)[0]


def test_chart_standard():
    ch = AffineChart.standard(3)
    assert np.allclose(ch(np.array([2, 3])), [2, 3, 1])
