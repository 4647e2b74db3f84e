import math

import numpy as np
import pytest

from regop.cpmaps import LinearMap
from regop.extension import SubspaceBasis, extend, subspace_regular_lower
from regop.linalg import LinalgError, schatten_norm
from regop.randgen import complex_gaussian, random_cp_choi, rng_from
from regop.regular import regular_upper
from regop.search import SearchBudget


def e(n, i, j):
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


def full_basis(n):
    return SubspaceBasis(n, [e(n, i, j) for i in range(n) for j in range(n)])


def triangular_basis(n):
    return SubspaceBasis(n, [e(n, i, j) for i in range(n) for j in range(n) if i <= j])


class TestSubspaceBasis:
    def test_complement_dims(self):
        s = triangular_basis(2)
        assert len(s.complement()) == 1

    def test_rejects_dependent(self):
        with pytest.raises(LinalgError):
            SubspaceBasis(2, [e(2, 0, 0), e(2, 0, 0)])

    def test_contains(self):
        s = triangular_basis(2)
        assert s.contains_matrix(np.eye(2))
        assert not s.contains_matrix(e(2, 1, 0))


class TestExtend:
    def test_full_space_reproduces_map(self):
        rng = rng_from(0)
        u = LinearMap(2, 2, random_cp_choi(rng, 2, 2))
        basis = full_basis(2)
        images = [u(b) for b in basis.mats]
        for p in [2, math.inf]:
            res = extend(basis, images, p, budget=SearchBudget(seed=1))
            assert res.restriction_residual <= 1e-8
            up, _ = regular_upper(u, p)
            assert res.upper <= up + 1e-4

    def test_span_e11_rank_one(self):
        basis = SubspaceBasis(2, [e(2, 0, 0)])
        images = [e(2, 0, 0)]
        for p in [1, 2, math.inf]:
            res = extend(basis, images, p, budget=SearchBudget(seed=2))
            assert res.restriction_residual <= 1e-8
            assert res.upper <= 1 + 1e-4
            assert res.subspace_lower >= 1 - 1e-6
            assert res.gap <= 1e-3

    def test_span_e11_scaled_projector(self):
        rng = rng_from(3)
        v = complex_gaussian(rng, 2, 1).ravel()
        v = v / np.linalg.norm(v)
        b_img = 1.7 * np.outer(v, np.conj(v))
        basis = SubspaceBasis(2, [e(2, 0, 0)])
        for p in [1, 2, math.inf]:
            res = extend(basis, [b_img], p, budget=SearchBudget(seed=4))
            # rank-one Hermitian image: all Schatten norms coincide at 1.7
            assert res.upper == pytest.approx(1.7, abs=2e-4)
            assert res.gap <= 1e-3

    def test_triangular_restriction_of_channel(self):
        rng = rng_from(5)
        ws = [np.linalg.qr(complex_gaussian(rng, 2))[0] for _ in range(2)]
        u = LinearMap.from_kraus([w / math.sqrt(2) for w in ws], 2, 2)
        basis = triangular_basis(2)
        images = [u(b) for b in basis.mats]
        for p in [1, 2, math.inf]:
            res = extend(basis, images, p, budget=SearchBudget(seed=6))
            assert res.restriction_residual <= 1e-8
            assert res.subspace_lower > 0
            assert res.gap <= 0.15 * res.subspace_lower


class TestSubspaceLower:
    def test_identity_on_diagonal_span(self):
        basis = SubspaceBasis(2, [np.eye(2)])
        val = subspace_regular_lower(basis, [np.eye(2)], 2)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_schatten_scaling_on_e11(self):
        basis = SubspaceBasis(2, [e(2, 0, 0)])
        b_img = np.diag([2.0, 1.0])
        for p in [1, 2]:
            val = subspace_regular_lower(basis, [b_img], p)
            assert val <= schatten_norm(b_img, p) + 1e-8
            assert val >= 0.9 * schatten_norm(b_img, p)
