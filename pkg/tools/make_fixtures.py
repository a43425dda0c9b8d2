"""Generate the bundled tau fixtures.

Needs a Sage environment with ``sage.schemes.riemann_surfaces`` (the
``passagemath-schemes`` wheels are enough).  Run once; the outputs are
frozen under ``src/torelli/data``::

    python tools/make_fixtures.py src/torelli/data

The Trott matrix is the one printed in the literature.  Its a-period matrix
is obtained by computing periods in Sage's own symplectic basis and then
searching (LLL) for the integral symplectic change of basis that carries
Sage's Riemann matrix onto the printed one.
"""
import itertools
import json
import sys
from pathlib import Path

import numpy as np
from sage.all__sagemath_schemes import (QQ, ZZ, ComplexField, PolynomialRing,
                                        block_matrix, identity_matrix, matrix,
                                        vector, zero_matrix)
from sage.schemes.riemann_surfaces.riemann_surface import RiemannSurface

PREC = 200
R = PolynomialRing(QQ, "x,y")
x, y = R.gens()

TROTT_TAU = [
    ["1.06848368471179 + 0.723452867814272*I", "-0.305886633614305 + 0.123618182281837*I",
     "-0.160517941389541 - 0.206682546926085*I"],
    ["-0.305886633614305 + 0.123618182281837*I", "0.776859918461210 + 1.25292663517205*I",
     "-0.626922516393387 - 0.289746911570334*I"],
    ["-0.160517941389541 - 0.206682546926085*I", "-0.626922516393387 - 0.289746911570334*I",
     "0.376235735801471 + 0.484440302728207*I"],
]


def cmat(M):
    g = M.nrows()
    return {"re": [[float(M[i, j].real()) for j in range(M.ncols())] for i in range(g)],
            "im": [[float(M[i, j].imag()) for j in range(M.ncols())] for i in range(g)]}


def sample_points(f, numerators, n, seed):
    """Points of the canonical model in the coordinates of ``numerators``."""
    rng = np.random.default_rng(seed)
    fy = f.polynomial(y)
    pts = []
    while len(pts) < n:
        x0 = complex(*rng.normal(size=2))
        coeffs = [complex(fy[k](x=x0, y=0)) for k in range(fy.degree(), -1, -1)]
        for y0 in np.roots(coeffs):
            # polish in extended precision
            CC = ComplexField(PREC)
            X, Y = CC(x0.real, x0.imag), CC(y0.real, y0.imag)
            for _ in range(8):
                Y = Y - f(X, Y) / f.derivative(y)(X, Y)
            u = np.array([complex(h(X, Y)) for h in numerators])
            u /= np.linalg.norm(u)
            pts.append(u)
            if len(pts) == n:
                break
    return [{"re": p.real.tolist(), "im": p.imag.tolist()} for p in pts]


def trott(out):
    f = 144 * (x**4 + y**4) - 225 * (x**2 + y**2) + 350 * x**2 * y**2 + 81
    diffs = [R(1), x, y]
    S = RiemannSurface(f, prec=PREC, differentials=diffs)
    PM = S.period_matrix()
    CC = ComplexField(PREC)
    taus = S.riemann_matrix()
    taup = matrix(CC, 3, 3, lambda i, j: CC(TROTT_TAU[i][j]))

    def residual(n):
        N = [matrix(ZZ, 3, 3, n[9 * k:9 * k + 9]) for k in range(4)]
        M = (N[0] + taus * N[2]) * taup - N[1] - taus * N[3]
        return [c for z in M.list() for c in (z.real(), z.imag())]

    cols = [residual([int(i == k) for i in range(36)]) for k in range(36)]
    K = 10**11
    B = matrix(ZZ, 36, 54, lambda i, j: int(i == j) if j < 36 else (K * cols[i][j - 36]).round())
    kernel = [vector(ZZ, r[:36]) for r in B.LLL().rows() if max(abs(c) for c in r[36:]) < 1000]
    J = block_matrix([[zero_matrix(ZZ, 3), identity_matrix(ZZ, 3)],
                      [-identity_matrix(ZZ, 3), zero_matrix(ZZ, 3)]])
    N = None
    for coeffs in itertools.product(range(-1, 2), repeat=len(kernel)):
        v = sum(c * k for c, k in zip(coeffs, kernel))
        if v == 0:
            continue
        blocks = [matrix(ZZ, 3, 3, list(v[9 * k:9 * k + 9])) for k in range(4)]
        cand = block_matrix([[blocks[0], blocks[1]], [blocks[2], blocks[3]]])
        if cand.det() == 1 and cand.transpose() * J * cand == J:
            N = cand
            break
    assert N is not None, "no symplectic change of basis found"
    Nc = N.change_ring(CC)
    A, Bp = PM[:, :3], PM[:, 3:]
    pa = A * Nc[:3, :3] + Bp * Nc[3:, :3]
    pb = A * Nc[:3, 3:] + Bp * Nc[3:, 3:]
    err = max(abs(c) for c in (pa.inverse() * pb - taup).list())
    print("trott: printed tau reproduced to", float(err))
    tau = {"re": [[float(taup[i, j].real()) for j in range(3)] for i in range(3)],
           "im": [[float(taup[i, j].imag()) for j in range(3)] for i in range(3)]}
    doc = {"label": "Trott quartic 144(x^4+y^4)-225(x^2+y^2)+350x^2y^2+81, differentials (1,x,y)/f_y dx",
           "genus": 3, **tau, "pi_a": cmat(pa),
           "sample_points": sample_points(f, diffs, 30, 3)}
    (out / "trott_tau.json").write_text(json.dumps(doc, indent=1))


def plane(out, name, f, diffs, label, seed):
    S = RiemannSurface(f, prec=PREC, differentials=diffs)
    PM = S.period_matrix()
    g = S.genus
    pa = PM[:, :g]
    tau = S.riemann_matrix()
    sym = max(abs(tau[i, j] - tau[j, i]) for i in range(g) for j in range(g))
    print(name, "genus", g, "symmetry defect", float(sym))
    tau = (tau + tau.transpose()) / 2
    doc = {"label": label, "genus": g, **cmat(tau), "pi_a": cmat(pa),
           "sample_points": sample_points(f, diffs, 50, seed)}
    (out / f"{name}_tau.json").write_text(json.dumps(doc, indent=1))


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "src/torelli/data")
    out.mkdir(parents=True, exist_ok=True)
    trott(out)
    plane(out, "genus4", 1 - x**3 - y**3 - x**3 * y**3, [-R(1), -x, -y, -x * y],
          "genus 4: 1-x^3-y^3-x^3y^3, differentials -(1,x,y,xy)/f_y dx", 4)
    plane(out, "genus5", x**2 * y**4 + x**4 + x + 3, [R(1), x, x * y, x * y**2, x**2],
          "genus 5: x^2y^4+x^4+x+3, differentials (1,x,xy,xy^2,x^2)/f_y dx", 5)


if __name__ == "__main__":
    main()
