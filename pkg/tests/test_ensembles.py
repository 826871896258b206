import math

import numpy as np
import pytest

from spinlab import rng
from spinlab.ensembles import (
    CorrelationLadder,
    OverlapLadder,
    TreeShape,
    chi_align,
    constrained_membership,
    grand_energy,
    kappa,
    kappa_level,
    lca_depth,
    leaf_weights,
    load_manifest,
    m_matrix,
    m_of_q,
    pair_correlated,
    sample_ensemble,
    save_manifest,
    target_overlap_matrix,
    underline_target_matrix,
    underline_view,
)
from spinlab.errors import ArgumentError, ResourceError
from spinlab.hamiltonian import energy
from spinlab.mixture import Mixture, pure
from spinlab.points import sphere_point


def test_lca_depth_examples():
    assert lca_depth((1, 1), (1, 2)) == 1
    assert lca_depth((1, 2), (1, 2)) == 2
    assert lca_depth((2, 1, 1), (3, 1, 1)) == 0
    with pytest.raises(ArgumentError):
        lca_depth((1, 2), (1,))


def test_ladder_invariants():
    with pytest.raises(ArgumentError):
        CorrelationLadder((0.1, 1.0))
    with pytest.raises(ArgumentError):
        CorrelationLadder((0.0, 0.5, 0.4, 1.0))
    with pytest.raises(ArgumentError):
        OverlapLadder((0.0, 0.5, 0.5, 1.0))
    with pytest.raises(ArgumentError):
        OverlapLadder((0.0, 0.9))


def _weight_gram(shape, ladder):
    nodes = shape.nodes()
    idx = {nd: i for i, nd in enumerate(nodes)}
    leaves = shape.leaves()
    w = np.zeros((len(leaves), len(nodes)))
    for i, u in enumerate(leaves):
        for nd, wt in leaf_weights(shape, ladder, u).items():
            w[i, idx[nd]] = wt
    return w @ w.T, leaves


def test_weight_gram_exact():
    shape = TreeShape((2, 2))
    ladder = CorrelationLadder((0.0, 0.3, 1.0))
    gram, leaves = _weight_gram(shape, ladder)
    target = np.array([[ladder.ps[lca_depth(u, v)] for v in leaves] for u in leaves])
    assert np.max(np.abs(gram - target)) <= 1e-12


def test_ensemble_iid_and_shared():
    m = pure(2)
    # p = (0, 1): leaves i.i.d.; weight Gram = identity
    shape = TreeShape((3,))
    gram, _ = _weight_gram(shape, CorrelationLadder((0.0, 1.0)))
    assert np.allclose(gram, np.eye(3))
    # p_d = 1 for all d >= 1 with a single first arm: all leaves identical
    shape = TreeShape((1, 3))
    ens = sample_ensemble(m, 6, shape, CorrelationLadder((0.0, 1.0, 1.0)), seed=5)
    hams = [ens.leaf_hamiltonian(u) for u in shape.leaves()]
    for other in hams[1:]:
        assert np.array_equal(hams[0].tensors[2], other.tensors[2])


def test_ensemble_budget():
    with pytest.raises(ResourceError):
        sample_ensemble(pure(4), 200, TreeShape((3, 3)), CorrelationLadder((0.0, 0.5, 1.0)), seed=0)


def test_pair_correlated():
    m = pure(2)
    h1, h2 = pair_correlated(m, 8, 1.0, seed=4)
    assert np.array_equal(h1.tensors[2], h2.tensors[2])
    h1, h2 = pair_correlated(m, 64, 0.0, seed=4)
    c = np.corrcoef(h1.coefficients, h2.coefficients)[0, 1]
    assert abs(c) <= 4 / math.sqrt(64 * 64)
    h1, h2 = pair_correlated(m, 64, 0.5, seed=4)
    c = np.corrcoef(h1.coefficients, h2.coefficients)[0, 1]
    assert abs(c - 0.5) <= 4 / math.sqrt(64 * 64)
    with pytest.raises(ArgumentError):
        pair_correlated(m, 8, 1.5, seed=0)


def test_target_overlap_matrix():
    shape = TreeShape((2,))
    q = target_overlap_matrix(shape, OverlapLadder((0.3, 1.0)))
    assert np.allclose(q, [[1.0, 0.3], [0.3, 1.0]])
    assert target_overlap_matrix(TreeShape((1, 1)), OverlapLadder((0.0, 0.5, 1.0))).shape == (1, 1)
    q = target_overlap_matrix(TreeShape((2, 2)), OverlapLadder((0.0, 0.4, 1.0)))
    assert q[0, 1] == 0.4 and q[0, 2] == 0.0 and q[2, 3] == 0.4


def test_m_matrix_examples_and_bruteforce(gen):
    shape = TreeShape((2,))
    pladder = CorrelationLadder((0.0, 1.0))
    assert np.allclose(m_matrix(shape, pladder, 1), np.eye(2))
    # d = D gives the identity
    shape = TreeShape((2, 3))
    pladder = CorrelationLadder((0.0, 0.6, 1.0))
    assert np.allclose(m_matrix(shape, pladder, 2), np.eye(6))
    for _ in range(10):
        depth = int(gen.integers(1, 4))
        ks = tuple(int(gen.integers(1, 4)) for _ in range(depth))
        ps = (0.0, *np.sort(gen.uniform(0, 1, depth - 1)), 1.0)
        shape, pladder = TreeShape(ks), CorrelationLadder(ps)
        d = int(gen.integers(1, depth + 1))
        got = m_matrix(shape, pladder, d)
        leaves = shape.leaves()
        brute = np.zeros((len(leaves), len(leaves)))
        for i, u in enumerate(leaves):
            for j, v in enumerate(leaves):
                w = lca_depth(u, v)
                brute[i, j] = pladder.ps[w] if w >= d else 0.0
        assert np.array_equal(got, brute)


def test_kappa_examples_and_sum_identity(gen):
    # D = 1: kappa = 1 on [q0, 1)
    shape = TreeShape((4,))
    pl = CorrelationLadder((0.0, 1.0))
    ql = OverlapLadder((0.2, 1.0))
    assert kappa(shape, pl, ql, 0.5) == 1.0
    # D = 2, k = (1, k2): kappa = (k2 - 1) p1 + 1 on [q0, q1)
    shape = TreeShape((1, 5))
    pl = CorrelationLadder((0.0, 0.3, 1.0))
    ql = OverlapLadder((0.0, 0.5, 1.0))
    assert kappa(shape, pl, ql, 0.2) == pytest.approx(4 * 0.3 + 1.0)
    for _ in range(30):
        depth = int(gen.integers(1, 4))
        ks = tuple(int(gen.integers(1, 4)) for _ in range(depth))
        ps = (0.0, *np.sort(gen.uniform(0, 1, depth - 1)), 1.0)
        qs = np.sort(gen.uniform(0, 0.95, depth))
        while len(set(qs)) < depth:
            qs = np.sort(gen.uniform(0, 0.95, depth))
        shape, pl, ql = TreeShape(ks), CorrelationLadder(ps), OverlapLadder((*qs, 1.0))
        q = float(gen.uniform(ql.qs[0], 1.0 - 1e-12))
        assert kappa(shape, pl, ql, q) == pytest.approx(
            m_of_q(shape, pl, ql, q).sum() / shape.n_leaves, abs=1e-12
        )
    with pytest.raises(ArgumentError):
        kappa(shape, pl, ql, 1.0)


def test_kappa_piecewise_monotone():
    shape = TreeShape((2, 3))
    pl = CorrelationLadder((0.0, 0.5, 1.0))
    ql = OverlapLadder((0.1, 0.6, 1.0))
    k_lo = kappa(shape, pl, ql, 0.2)
    k_hi = kappa(shape, pl, ql, 0.8)
    assert k_lo >= k_hi
    assert kappa(shape, pl, ql, ql.qs[-2]) == 1.0  # kappa(q_{D-1}) = p_D = 1


def test_loewner_and_psd(gen):
    for _ in range(10):
        depth = int(gen.integers(1, 3))
        ks = tuple(int(gen.integers(1, 4)) for _ in range(depth))
        shape = TreeShape(ks)
        if shape.n_leaves > 16:
            continue
        ps = (0.0, *np.sort(gen.uniform(0, 1, depth - 1)), 1.0)
        qs = np.sort(gen.uniform(0, 0.9, depth))
        while len(set(qs)) < depth:
            qs = np.sort(gen.uniform(0, 0.9, depth))
        pl, ql = CorrelationLadder(ps), OverlapLadder((*qs, 1.0))
        q = float(gen.uniform(ql.qs[0], 0.99))
        mat = m_of_q(shape, pl, ql, q)
        assert np.linalg.eigvalsh(mat).min() >= -1e-10
        assert np.linalg.eigvalsh(mat).max() <= kappa(shape, pl, ql, q) + 1e-10
        assert np.linalg.eigvalsh(target_overlap_matrix(shape, ql)).min() >= -1e-10


def test_chi_align():
    ql = OverlapLadder((0.0, 0.4, 1.0))
    assert chi_align(lambda p: p, ql).ps == pytest.approx((0.0, 0.4, 1.0), abs=1e-10)
    ql2 = OverlapLadder((0.2, 0.6, 1.0))
    assert chi_align(lambda p: 0.2, ql2).ps == (0.0, 1.0, 1.0)
    ql3 = OverlapLadder((0.0, 0.49, 1.0))
    assert chi_align(lambda p: p * p, ql3).ps[1] == pytest.approx(0.7, abs=1e-10)
    with pytest.raises(ArgumentError):
        chi_align(lambda p: 1.0 - p, ql3)


def test_grand_energy():
    m = pure(2)
    shape = TreeShape((2, 2))
    pl = CorrelationLadder((0.0, 0.3, 1.0))
    ens = sample_ensemble(m, 8, shape, pl, seed=11)
    zeros = [np.zeros(8)] * 4
    assert grand_energy(ens, zeros) == 0.0
    # K = 1 equals the single leaf energy
    ens1 = sample_ensemble(m, 8, TreeShape((1,)), CorrelationLadder((0.0, 1.0)), seed=3)
    x = rng.stream(40).standard_normal(8) * 0.4
    assert grand_energy(ens1, [x]) == pytest.approx(ens1.leaf_energy((1,), x))
    # identical leaves: K * energy
    ens_same = sample_ensemble(m, 8, TreeShape((1, 3)), CorrelationLadder((0.0, 1.0, 1.0)), seed=3)
    val = grand_energy(ens_same, [x] * 3)
    assert val == pytest.approx(3 * ens_same.leaf_energy((1, 1), x))
    with pytest.raises(ArgumentError):
        grand_energy(ens, zeros[:2])


def test_leaf_energy_matches_materialized():
    m = Mixture({2: 0.8, 4: 0.4}, h=0.3)
    shape = TreeShape((2, 2))
    pl = CorrelationLadder((0.0, 0.4, 1.0))
    ens = sample_ensemble(m, 6, shape, pl, seed=2)
    x = rng.stream(41).standard_normal(6) * 0.5
    for u in shape.leaves():
        assert ens.leaf_energy(u, x) == pytest.approx(energy(ens.leaf_hamiltonian(u), x), abs=1e-10)


def test_constrained_membership():
    n = 32
    gen = rng.stream(42)
    s1 = sphere_point(gen.standard_normal(n))
    s2 = sphere_point(gen.standard_normal(n))
    q = np.array([[1.0, 0.0], [0.0, 1.0]])
    rep = constrained_membership([s1, s2], q, np.zeros(n), eta=2.0, domain="sphere")
    assert rep.ok  # eta = 2 dominates any overlap deviation
    rep = constrained_membership([0.5 * s1, s2], q, np.zeros(n), eta=2.0, domain="sphere")
    assert not rep.ok and "sphere norm" in rep.worst_constraint
    corners = np.where(gen.random(n) < 0.5, -1.0, 1.0)
    rep = constrained_membership([corners], np.array([[1.0]]), np.zeros(n), eta=0.5, domain="cube")
    assert rep.ok
    with pytest.raises(ArgumentError):
        constrained_membership([s1], np.array([[1.0]]), np.zeros(n), 0.1, domain="torus")


def test_underline_view_and_target():
    shape = TreeShape((2, 3, 2))
    pl = CorrelationLadder((0.0, 0.4, 1.0, 1.0))
    ql = OverlapLadder((0.0, 0.3, 0.7, 1.0))
    sub_shape, sub_p, sub_q = underline_view(shape, pl, ql)
    assert sub_shape.ks == (2, 3)
    assert sub_p.ps == (0.0, 0.4, 1.0)
    assert sub_q.qs == (0.0, 0.3, 1.0)
    q_ul = underline_target_matrix(shape, pl, ql, chi1=0.6)
    assert q_ul.shape == (6, 6)
    assert q_ul[0, 0] == 0.6  # diagonal q_{D_ul} ^ chi(1)
    assert q_ul[0, 1] == 0.3


def test_manifest_roundtrip(tmp_path):
    m = Mixture({2: 0.9}, h=0.1)
    shape = TreeShape((2, 2))
    pl = CorrelationLadder((0.0, 0.3, 1.0))
    ens = sample_ensemble(m, 5, shape, pl, seed=77)
    save_manifest(ens, tmp_path)
    back = load_manifest(tmp_path)
    assert back.shape.ks == shape.ks
    assert back.ladder.ps == pl.ps
    assert back.seed == 77
    x = rng.stream(43).standard_normal(5) * 0.4
    for u in shape.leaves():
        assert back.leaf_energy(u, x) == ens.leaf_energy(u, x)
