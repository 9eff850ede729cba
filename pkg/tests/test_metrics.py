import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apml import (
    EmdNormalization,
    OracleLimit,
    chamfer_l1,
    chamfer_l2,
    compute_metrics,
    emd_bruteforce,
    emd_exact,
    f1_score,
)
from apml.metrics import chamfer_loss_and_grad
from _oracles import central_difference, scalar_cost

A, B = [[0.0, 0.0, 0.0]], [[3.0, 4.0, 0.0]]
SQ_A = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]
SQ_B = [[0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]


def _chamfer_loops(x, y, power):
    C = scalar_cost(x, y)
    fwd = sum(min(r) ** power for r in C) / len(C)
    bwd = sum(min(C[i][j] for i in range(len(C))) ** power for j in range(len(C[0]))) / len(C[0])
    return fwd + bwd


class TestChamfer:
    def test_l1_example(self):
        assert chamfer_l1(A, B) == 10.0

    def test_l2_example(self):
        assert chamfer_l2(A, B) == 50.0

    def test_identical(self, rng):
        x = rng.random((20, 3))
        assert chamfer_l1(x, x) == 0.0 and chamfer_l2(x, x) == 0.0

    def test_against_loops(self, rng):
        x, y = rng.random((9, 3)), rng.random((13, 3))
        assert chamfer_l1(x, y) == pytest.approx(_chamfer_loops(x, y, 1), rel=1e-12)
        assert chamfer_l2(x, y) == pytest.approx(_chamfer_loops(x, y, 2), rel=1e-12)

    @pytest.mark.parametrize("squared", [False, True])
    def test_loss_and_grad(self, rng, squared):
        x, y = rng.random((7, 3)), rng.random((5, 3))
        loss, grad = chamfer_loss_and_grad(x, y, squared)
        assert loss == pytest.approx((chamfer_l2 if squared else chamfer_l1)(x, y), rel=1e-12)
        numeric = central_difference(lambda z: chamfer_loss_and_grad(z, y, squared)[0], x)
        np.testing.assert_allclose(grad, numeric, rtol=1e-6, atol=1e-8)


class TestEmd:
    def test_square_example(self):
        assert emd_exact(SQ_A, SQ_B, EmdNormalization.SUM) == pytest.approx(2.0, abs=1e-12)
        assert emd_exact(SQ_A, SQ_B, EmdNormalization.MEAN_PER_POINT) == pytest.approx(1.0, abs=1e-12)
        assert emd_bruteforce(SQ_A, SQ_B) == pytest.approx(2.0, abs=1e-12)

    def test_identical(self, rng):
        x = rng.random((10, 3))
        assert emd_exact(x, x) == 0.0

    def test_bruteforce_singleton(self):
        assert emd_bruteforce(A, B) == 5.0

    def test_bruteforce_coincident(self, rng):
        x = rng.random((3, 3))
        assert emd_bruteforce(x, x) == 0.0

    def test_bruteforce_limits(self, rng):
        with pytest.raises(OracleLimit):
            emd_bruteforce(rng.random((3, 3)), rng.random((4, 3)))
        with pytest.raises(OracleLimit):
            emd_bruteforce(rng.random((9, 3)), rng.random((9, 3)))

    def test_bruteforce_against_loops(self, rng):
        x, y = rng.random((5, 2)), rng.random((5, 2))
        C = scalar_cost(x, y)
        best = min(sum(C[i][p[i]] for i in range(5)) for p in itertools.permutations(range(5)))
        assert emd_bruteforce(x, y) == pytest.approx(best, abs=1e-12)

    def test_unequal_sizes_subsample(self, rng):
        x, y = rng.random((12, 3)), rng.random((8, 3))
        a = emd_exact(x, y, seed=3)
        assert a == emd_exact(x, y, seed=3)
        # the larger set is reduced by a seeded draw without replacement
        idx = np.sort(np.random.default_rng(3).choice(12, 8, replace=False))
        assert a == emd_exact(x[idx], y)
        assert emd_exact(y, x, seed=3) == pytest.approx(a, rel=1e-14)

    def test_permutation_invariance(self, rng):
        x, y = rng.random((15, 3)), rng.random((15, 3))
        assert emd_exact(x[rng.permutation(15)], y) == pytest.approx(emd_exact(x, y), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_emd_exact_equals_bruteforce(n, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(n, 3)), rng.normal(size=(n, 3))
    assert abs(emd_exact(x, y) - emd_bruteforce(x, y)) <= 1e-9


class TestF1:
    def test_identical(self, rng):
        x = rng.random((10, 3))
        f1, p, r = f1_score(x, x, 0.01)
        assert p == r == 1.0
        assert f1 == pytest.approx(1.0, abs=1e-7)

    def test_disjoint(self):
        assert f1_score([[0.0, 0, 0]], [[1.0, 0, 0]], 0.01) == (0.0, 0.0, 0.0)

    def test_half_precision(self):
        f1, p, r = f1_score([[0.0, 0, 0], [1.0, 0, 0]], [[0.005, 0, 0]], 0.01)
        assert (p, r) == (0.5, 1.0)
        assert f1 == pytest.approx(2 / 3, abs=1e-7)

    def test_strict_threshold(self):
        # exactly at tau does not count as a match
        assert f1_score([[0.0, 0.0]], [[0.5, 0.0]], 0.5)[1] == 0.0

    def test_bad_tau(self):
        with pytest.raises(ValueError):
            f1_score(A, B, 0.0)


def test_compute_metrics(rng):
    x, y = rng.random((16, 3)), rng.random((16, 3))
    rep = compute_metrics(x, y)
    assert rep.emd == pytest.approx(emd_exact(x, y) / 16, rel=1e-14)
    assert rep.emd_times_100 == pytest.approx(100 * rep.emd)
    assert rep.cd_l1 == chamfer_l1(x, y) and rep.cd_l2 == chamfer_l2(x, y)
    assert rep.f1 == f1_score(x, y)[0]
    assert set(rep.as_dict()) >= {"cd_l1", "cd_l2", "emd", "f1", "tau"}


def test_metric_symmetry(rng):
    x, y = rng.random((6, 3)), rng.random((9, 3))
    assert chamfer_l1(x, y) == pytest.approx(chamfer_l1(y, x), rel=1e-14)
    assert math.isclose(chamfer_l2(x, y), chamfer_l2(y, x), rel_tol=1e-14)
