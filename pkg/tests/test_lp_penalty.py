import numpy as np
import pytest

from fairshare.instance import Instance, Link, Path, Request
from fairshare.lp import LPError, maximize, maximize_by_vertices
from fairshare.penalty import BoundError, lambda_star, penalty_bound, utopic_allocation
from conftest import linear_network, single_link, two_disjoint
from oracles import lp_max


def test_lp_small_example():
    # max x + y, x + 2y <= 4, 3x + y <= 6  ->  (1.6, 1.2)
    res = maximize([1, 1], [[1, 2], [3, 1]], [4, 6])
    assert res.value == pytest.approx(2.8, rel=1e-12)
    assert np.allclose(res.x, [1.6, 1.2])


def test_lp_matches_scipy_and_vertices():
    rng = np.random.default_rng(0)
    for _ in range(60):
        m, n = rng.integers(1, 6), rng.integers(1, 5)
        A = rng.integers(0, 2, size=(m, n)).astype(float)
        A[:, A.sum(axis=0) == 0] = 1.0
        b = rng.uniform(1, 10, m)
        c = rng.uniform(0.1, 2, n)
        ours = maximize(c, A, b)
        ref, _ = lp_max(c, A, b)
        assert ours.value == pytest.approx(ref, rel=1e-9)
        assert maximize_by_vertices(c, A, b).value == pytest.approx(ref, rel=1e-9)
        assert np.all(A @ ours.x <= b + 1e-9)


def test_lp_errors():
    with pytest.raises(LPError, match="unbounded"):
        maximize([1.0, 1.0], [[1.0, 0.0]], [1.0])
    with pytest.raises(LPError):
        maximize([1.0], [[1.0]], [-1.0])
    with pytest.raises(ValueError):
        maximize_by_vertices(np.ones(7), np.ones((1, 7)), [1.0])


def test_utopic_allocations():
    assert utopic_allocation(two_disjoint(), "r") == pytest.approx(8.0)
    inst = linear_network()
    assert [utopic_allocation(inst, r) for r in ("r0", "r1", "r2")] == pytest.approx([1, 1, 1])
    assert utopic_allocation(two_disjoint(), "r", use_vertices=True) == pytest.approx(8.0)


def test_linear_network_bound():
    pb = penalty_bound(linear_network())
    assert pb.rho == pytest.approx({"r0": 1 / 3, "r1": 1 / 2, "r2": 1 / 2})
    assert pb.d == pytest.approx({"r0": 1 / 3, "r1": 1 / 2, "r2": 1 / 2})
    assert pb.lambda_star == pytest.approx(1 / 3, rel=1e-12)
    assert [row[0] for row in pb.table()] == ["r0", "r1", "r2"]


def test_single_link_lambda():
    assert lambda_star(single_link(10.0)) == pytest.approx(100.0, rel=1e-12)


def test_lambda_scales_with_alpha():
    # single request: a = rho = d, so lambda* = alpha * a^(alpha+1) / w
    inst = single_link(2.0, alpha=3.0)
    assert lambda_star(inst) == pytest.approx(3.0 * 2.0 ** 4, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_bound_below_utopia(alpha):
    pb = penalty_bound(linear_network(alpha=alpha, weights=(2.0, 1.0, 0.5)))
    for r in pb.a:
        assert 0 < pb.d[r] <= pb.a[r] + 1e-12


def test_bound_errors():
    with pytest.raises(BoundError):
        penalty_bound(Instance((Link("j", 1.0),), (), (), 1.0))
