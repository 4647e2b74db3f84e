import math

import numpy as np
import pytest

from regop.linalg import BlockMatrix, kron, op_norm, schatten_norm
from regop.randgen import complex_gaussian, random_block, random_unitary, rng_from
from regop.vnorm import (
    Factorization,
    fubini_reshuffle,
    pair_dual,
    vnorm_bracket,
    vnorm_lower,
    vnorm_upper,
)


def elementary(a0, e):
    return BlockMatrix.from_tensor(a0, e)


class TestUpper:
    def test_p_inf_exact(self):
        rng = rng_from(0)
        x = random_block(rng, 2, 3)
        val, fact = vnorm_upper(x, math.inf)
        assert val == op_norm(x.body)
        assert np.allclose(fact.a, np.eye(2)) and np.allclose(fact.b, np.eye(2))

    def test_scalar_outer(self):
        # n = 1: the norm is the operator norm of the inner matrix, any p
        rng = rng_from(1)
        e = complex_gaussian(rng, 3)
        x = BlockMatrix(1, 3, e)
        for p in [1, 2, 3]:
            val, _ = vnorm_upper(x, p, restarts=2)
            assert val == pytest.approx(op_norm(e), rel=1e-8)

    def test_scalar_inner_is_schatten(self):
        # m = 1: the norm is the Schatten p-norm of the outer matrix
        rng = rng_from(2)
        a = complex_gaussian(rng, 3)
        x = BlockMatrix(3, 1, a)
        for p in [1, 2, 3]:
            val, _ = vnorm_upper(x, p, restarts=4)
            assert val == pytest.approx(schatten_norm(a, p), rel=1e-7)

    def test_elementary_crossnorm(self):
        rng = rng_from(3)
        a0 = complex_gaussian(rng, 2)
        e = complex_gaussian(rng, 2)
        for p in [1, 2, 3]:
            val, fact = vnorm_upper(elementary(a0, e), p, restarts=2)
            target = schatten_norm(a0, p) * op_norm(e)
            assert val <= target + 1e-6
            assert fact.residual(elementary(a0, e)) <= 1e-8

    def test_witness_always_feasible(self):
        rng = rng_from(4)
        for p in [1, 2, 4]:
            x = random_block(rng, 2, 2)
            val, fact = vnorm_upper(x, p, restarts=4)
            assert fact.residual(x) <= 1e-8
            assert val == pytest.approx(fact.value)

    def test_p1_sdp_matches_alternating_on_elementary(self):
        rng = rng_from(5)
        a0 = complex_gaussian(rng, 2)
        e = complex_gaussian(rng, 2)
        val, _ = vnorm_upper(elementary(a0, e), 1, restarts=2)
        assert val == pytest.approx(schatten_norm(a0, 1) * op_norm(e), rel=1e-5)

    def test_zero(self):
        x = BlockMatrix(2, 2, np.zeros((4, 4)))
        val, _ = vnorm_upper(x, 2)
        assert val == 0.0


class TestLower:
    def test_p_inf_exact(self):
        rng = rng_from(6)
        x = random_block(rng, 3, 2)
        assert vnorm_lower(x, math.inf) == op_norm(x.body)

    def test_scalar_outer_exact(self):
        rng = rng_from(7)
        e = complex_gaussian(rng, 3)
        x = BlockMatrix(1, 3, e)
        for p in [1, 2, 3]:
            assert vnorm_lower(x, p) == pytest.approx(op_norm(e), rel=1e-9)

    def test_elementary_crossnorm_reached(self):
        rng = rng_from(8)
        a0 = complex_gaussian(rng, 2)
        e = complex_gaussian(rng, 2)
        x = elementary(a0, e)
        for p in [1, 2, 3]:
            target = schatten_norm(a0, p) * op_norm(e)
            assert vnorm_lower(x, p) >= 0.95 * target

    def test_bracket_sound(self):
        rng = rng_from(9)
        for p in [1, 4 / 3, 2, 3, math.inf]:
            x = random_block(rng, 2, 2)
            br = vnorm_bracket(x, p, restarts=6)
            assert br.lower <= br.upper + 1e-9


class TestUnitaryInvariance:
    def test_upper_and_lower_invariant(self):
        rng = rng_from(10)
        x = random_block(rng, 2, 2)
        u = random_unitary(rng, 2)
        v = random_unitary(rng, 2)
        m = np.eye(2)
        moved = BlockMatrix(2, 2, kron(u, m) @ x.body @ kron(v, m))
        for p in [1, 2]:
            v_up, _ = vnorm_upper(x, p, restarts=0)
            m_up, _ = vnorm_upper(moved, p, restarts=0)
            assert m_up == pytest.approx(v_up, abs=1e-8)
            assert vnorm_lower(moved, p) == pytest.approx(
                vnorm_lower(x, p), abs=1e-8)


class TestContractionMonotonicity:
    def test_compression_shrinks_upper(self):
        # w(e) = V* e W with contractions V, W, pushed through the witness
        rng = rng_from(11)
        x = random_block(rng, 2, 3)
        vv = random_unitary(rng, 3)[:, :2]
        ww = random_unitary(rng, 3)[:, :2]
        for p in [1, 2]:
            up_x, fact = vnorm_upper(x, p, restarts=4)
            image = BlockMatrix(2, 2,
                                kron(np.eye(2), vv.conj().T) @ x.body @ kron(np.eye(2), ww))
            up_img, _ = vnorm_upper(image, p, restarts=4,
                                    starts=[(fact.a, fact.b)])
            assert up_img <= up_x + 1e-6


class TestTriangle:
    def test_upper_triangle_p1_and_inf(self):
        rng = rng_from(12)
        x = random_block(rng, 2, 2)
        y = random_block(rng, 2, 2)
        z = BlockMatrix(2, 2, x.body + y.body)
        for p in [1, math.inf]:
            ux, fx = vnorm_upper(x, p, restarts=4)
            uy, fy = vnorm_upper(y, p, restarts=4)
            uz, _ = vnorm_upper(z, p, restarts=4,
                                starts=[(fx.a, fx.b), (fy.a, fy.b)])
            assert uz <= ux + uy + 1e-6


class TestFubini:
    def test_identity_fixed(self):
        x = BlockMatrix(4, 2, np.eye(8))
        y = fubini_reshuffle(x, (2, 2))
        assert np.allclose(y.body, np.eye(8))

    def test_involutive(self):
        rng = rng_from(13)
        x = random_block(rng, 6, 2)
        y = fubini_reshuffle(fubini_reshuffle(x, (2, 3)), (3, 2))
        assert np.allclose(y.body, x.body)

    def test_elementary_reindexed(self):
        rng = rng_from(14)
        a = complex_gaussian(rng, 2)
        b = complex_gaussian(rng, 3)
        e = complex_gaussian(rng, 2)
        x = BlockMatrix(6, 2, kron(kron(a, b), e))
        y = fubini_reshuffle(x, (2, 3))
        assert np.allclose(y.body, kron(kron(b, a), e))
        for p in [1, 2, math.inf]:
            assert schatten_norm(y.body, p) == pytest.approx(
                schatten_norm(x.body, p), abs=1e-10)

    def test_bracket_overlap(self):
        rng = rng_from(15)
        x = random_block(rng, 4, 2)
        y = fubini_reshuffle(x, (2, 2))
        bx = vnorm_bracket(x, 2, restarts=6)
        by = vnorm_bracket(y, 2, restarts=6)
        assert bx.overlaps(by, widen=1e-4)

    def test_rejects_bad_dims(self):
        x = BlockMatrix(4, 2, np.zeros((8, 8)))
        with pytest.raises(Exception):
            fubini_reshuffle(x, (3, 2))


class TestPairDual:
    def test_elementary(self):
        rng = rng_from(16)
        a, b = complex_gaussian(rng, 2), complex_gaussian(rng, 2)
        e, f = complex_gaussian(rng, 3), complex_gaussian(rng, 3)
        x = BlockMatrix.from_tensor(a, e)
        w = BlockMatrix.from_tensor(b, f)
        expected = np.trace(a.T @ b) * np.trace(e.T @ f)
        assert pair_dual(x, w) == pytest.approx(complex(expected), abs=1e-10)
