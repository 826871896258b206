import math

import numpy as np
import pytest

from spinlab import rng
from spinlab.ensembles import CorrelationLadder, OverlapLadder, TreeShape, kappa_level
from spinlab.errors import ArgumentError, NumericError
from spinlab.mixture import Mixture, pure, xi_eval
from spinlab.parisi import (
    PiecewiseZeta,
    alg_is_numeric,
    parisi_is,
    phi_multidim_mc,
    shift_identity_check,
    solve_parisi_pde,
)
from spinlab.parisi.pde import quadrature_log2cosh_mean

M2 = pure(2)
Z0 = PiecewiseZeta.zero()
GRID = (6.0, 0.002)
COARSE = (6.0, 0.01)


def folded_mean(mu, s):
    return s * math.sqrt(2 / math.pi) * math.exp(-mu * mu / (2 * s * s)) + mu * (
        1 - math.erfc(mu / (s * math.sqrt(2)))
    )


def test_folded_normal_closed_form():
    sol = solve_parisi_pde(M2, Z0, grid=GRID)
    s = math.sqrt(2.0)
    assert sol.eval(0.0, 0.0) == pytest.approx(s * math.sqrt(2 / math.pi), abs=1e-5)
    for h in (0.5, 1.0):
        sol = solve_parisi_pde(M2, Z0, grid=GRID, center=h)
        assert sol.eval(0.0, h) == pytest.approx(folded_mean(h, s), abs=1e-5)


def test_terminal_beta_gap_identity():
    solb = solve_parisi_pde(M2, Z0, beta=4.0, grid=COARSE)
    soli = solve_parisi_pde(M2, Z0, grid=COARSE)
    i0 = int(np.argmin(np.abs(solb.grid)))
    gap = solb.values[1.0][i0] - soli.values[1.0][i0]
    assert gap == pytest.approx(math.log(2.0) / 4.0, abs=1e-12)


def test_beta_gap_bound():
    z = PiecewiseZeta((0.0, 0.3, 0.7), (0.4, 1.0, 0.6))
    for beta in (4.0, 32.0):
        gb = solve_parisi_pde(M2, z, beta=beta, grid=GRID).eval(0.0, 0.0)
        gi = solve_parisi_pde(M2, z, grid=GRID).eval(0.0, 0.0)
        assert 0.0 <= gb - gi <= math.log(2.0) / beta + 1e-5


def test_grid_precondition():
    with pytest.raises(ArgumentError):
        solve_parisi_pde(M2, Z0, grid=(5.0, 0.2))
    with pytest.raises(ArgumentError):
        solve_parisi_pde(M2, Z0, a=1.5)


def test_self_check_fires_on_coarse_quadrature():
    # many closely spaced steps + few nodes under-resolve the quadrature
    z = PiecewiseZeta(tuple(np.linspace(0, 0.95, 12)), tuple(np.linspace(0.2, 2.0, 12)))
    with pytest.raises(NumericError):
        solve_parisi_pde(M2, z, grid=(6.0, 0.06), gh_nodes=4)


def test_solution_invariants_convex_lipschitz():
    z = PiecewiseZeta((0.0, 0.3, 0.7), (0.4, 1.0, 0.6))
    sol = solve_parisi_pde(M2, z, a=0.5, beta=8.0, grid=GRID)
    for t in sol.times:
        vals = sol.values[t]
        assert np.diff(vals, 2).min() >= -1e-8
        slopes = np.diff(vals) / np.diff(sol.grid)
        assert np.max(np.abs(slopes)) <= 1.5 + 1e-9


def test_exact_method_agrees_with_gh():
    z = PiecewiseZeta((0.0, 0.4), (0.3, 0.9))
    a = solve_parisi_pde(M2, z, grid=GRID, self_check=False).eval(0.0, 0.0)
    b = solve_parisi_pde(M2, z, grid=GRID, method="exact", self_check=False).eval(0.0, 0.0)
    assert a == pytest.approx(b, abs=1e-6)


def test_parisi_is_values():
    assert parisi_is(Z0, M2, grid=GRID) == pytest.approx(2 / math.sqrt(math.pi), abs=1e-5)
    m_field = Mixture({2: 1.0}, h=10.0)
    got = parisi_is(Z0, m_field, grid=(14.0, 0.002))
    assert got == pytest.approx(folded_mean(10.0, math.sqrt(2.0)), abs=1e-3)


def test_monotone_in_zeta():
    base = PiecewiseZeta((0.0, 0.5), (0.2, 0.6))
    gen = rng.stream(61)
    phi0 = solve_parisi_pde(M2, base, grid=COARSE, self_check=False).eval(0.0, 0.0)
    for _ in range(5):
        bump = PiecewiseZeta(
            (0.0, 0.5), (0.2 + gen.uniform(0, 1), 0.6 + gen.uniform(0, 1))
        )
        phi1 = solve_parisi_pde(M2, bump, grid=COARSE, self_check=False).eval(0.0, 0.0)
        assert phi1 >= phi0 - 1e-9


def test_lipschitz_in_zeta():
    gen = rng.stream(62)
    for _ in range(4):
        nb1, nb2 = int(gen.integers(1, 4)), int(gen.integers(1, 4))
        b1 = np.concatenate([[0.0], np.sort(gen.uniform(0.05, 0.9, nb1 - 1))])
        b2 = np.concatenate([[0.0], np.sort(gen.uniform(0.05, 0.9, nb2 - 1))])
        za = PiecewiseZeta(tuple(b1), tuple(gen.uniform(0, 2, nb1)))
        zb = PiecewiseZeta(tuple(b2), tuple(gen.uniform(0, 2, nb2)))
        lhs = abs(
            solve_parisi_pde(M2, za, grid=GRID).eval(0.0, 0.0)
            - solve_parisi_pde(M2, zb, grid=GRID).eval(0.0, 0.0)
        )
        merged = sorted(set(za.breaks) | set(zb.breaks))
        bound = sum(
            abs(za(a) - zb(a)) * (xi_eval(M2, b, 1) - xi_eval(M2, a, 1))
            for a, b in zip(merged, merged[1:] + [1.0])
        )
        assert lhs <= bound + 5e-4


def test_shift_identity():
    assert shift_identity_check(M2, Z0, 0.0, 0.4, grid=COARSE) <= 1e-9
    assert shift_identity_check(M2, Z0, 1.0, 0.7, grid=COARSE) <= 1e-5
    gen = rng.stream(63)
    for _ in range(3):
        nb = int(gen.integers(2, 4))
        breaks = np.concatenate([[0.0], np.sort(gen.uniform(0.05, 0.9, nb - 1))])
        z = PiecewiseZeta(tuple(breaks), tuple(gen.uniform(0, 2, nb)))
        r = shift_identity_check(M2, z, float(gen.uniform(-1, 1)), float(gen.uniform(-1, 1)), grid=GRID)
        assert r <= 1e-4


def test_alg_is_feasible_bound():
    msk = Mixture({2: math.sqrt(0.5)})
    z0_val = parisi_is(Z0, msk, grid=(8.0, 0.04), self_check=False)
    got = alg_is_numeric(msk, knots=8, sweeps_max=3)
    assert got <= z0_val + 1e-9
    with pytest.raises(ArgumentError):
        alg_is_numeric(msk, knots=4)


def test_phi_multidim_k1_matches_solver():
    m = Mixture({2: 0.8, 4: 0.4})
    shape1 = TreeShape((1,))
    pl1 = CorrelationLadder((0.0, 1.0))
    ql1 = OverlapLadder((0.3, 1.0))
    est = phi_multidim_mc(shape1, pl1, ql1, [0.5], a=0.2, x=[0.7], m=m, samples=200_000, seed=3)
    z = PiecewiseZeta((0.0, 0.3), (0.0, 0.5))
    ref = solve_parisi_pde(m, z, a=0.2, beta=1.0, grid=(8.0, 0.002), center=0.7).eval(0.0, 0.7)
    assert abs(est.value - ref) <= 3 * (est.se + abs(est.bias))


def test_phi_multidim_zero_levels_quadrature():
    m = Mixture({2: 0.8, 4: 0.4})
    shape2 = TreeShape((2,))
    pl2 = CorrelationLadder((0.0, 1.0))
    ql2 = OverlapLadder((0.0, 1.0))
    x = np.array([0.4, -0.9])
    est = phi_multidim_mc(shape2, pl2, ql2, [0.0], a=0.3, x=x, m=m, samples=200_000, seed=5)
    s = math.sqrt(m.xi(1.0, 1))
    want = sum(quadrature_log2cosh_mean(xi, s) - 0.3 * xi for xi in x)
    assert abs(est.value - want) <= 3 * (est.se + abs(est.bias)) + 1e-6


def test_phi_multidim_upper_bound_by_1d():
    # correlated K = 2 tree: leaves (1,1), (1,2) share a depth-1 node
    m = Mixture({2: 0.8, 4: 0.4})
    shape = TreeShape((1, 2))
    pl = CorrelationLadder((0.0, 0.5, 1.0))
    ql = OverlapLadder((0.2, 0.6, 1.0))
    levels = [0.4, 0.8]
    x = np.array([0.4, -0.9])
    est = phi_multidim_mc(shape, pl, ql, levels, a=-0.4, x=x, m=m, samples=300_000, seed=7)
    breaks = (0.0, *ql.qs[:-1])
    values = (0.0, *(kappa_level(shape, pl, d + 1) * levels[d] for d in range(2)))
    zk = PiecewiseZeta(breaks, values)
    total = sum(
        solve_parisi_pde(m, zk, a=-0.4, beta=1.0, grid=(8.0, 0.002), center=float(xi)).eval(0.0, float(xi))
        for xi in x
    )
    assert est.value <= total + 3 * (est.se + abs(est.bias))


def test_phi_multidim_preconditions():
    with pytest.raises(ArgumentError):
        phi_multidim_mc(
            TreeShape((5,)),
            CorrelationLadder((0.0, 1.0)),
            OverlapLadder((0.0, 1.0)),
            [0.5],
            0.0,
            np.zeros(5),
            M2,
        )
