import math

import numpy as np
import pytest

from regop.cpmaps import (
    LinearMap,
    adjoint_map,
    cb_norm,
    hs_adjoint,
    is_cp,
    kraus,
    sp_op_norm,
)
from regop.linalg import LinalgError, dagger, op_norm
from regop.randgen import (
    complex_gaussian,
    random_cp_choi,
    random_map_choi,
    random_unitary,
    rng_from,
)
from regop.search import SearchBudget


def cp_map(rng, n, m=None, rank=None):
    m = n if m is None else m
    return LinearMap(n, m, random_cp_choi(rng, n, m, rank))


class TestChoi:
    def test_identity_choi(self):
        u = LinearMap.identity(2)
        w = np.linalg.eigvalsh(u.choi)
        assert np.allclose(sorted(w), [0, 0, 0, 2], atol=1e-12)

    def test_transpose_choi_is_swap(self):
        t = LinearMap.transpose_map(2)
        w = np.linalg.eigvalsh(t.choi)
        assert np.allclose(sorted(w), [-1, 1, 1, 1], atol=1e-12)

    def test_diag_map_choi(self):
        u = LinearMap.from_action(lambda x: np.diag(np.diag(x)), 2, 2)
        assert np.linalg.eigvalsh(u.choi).min() >= -1e-12
        assert np.allclose(u.choi, np.diag(np.diag(u.choi)))

    def test_action_reconstruction(self):
        rng = rng_from(0)
        u = LinearMap(2, 3, random_map_choi(rng, 2, 3))
        x = complex_gaussian(rng, 2)
        direct = sum(
            x[i, j] * u.choi[i * 3:(i + 1) * 3, j * 3:(j + 1) * 3]
            for i in range(2) for j in range(2))
        assert np.allclose(u(x), direct, atol=1e-10)

    def test_choi_linearity(self):
        rng = rng_from(1)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        v = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        w = LinearMap.from_action(lambda x: 2.0 * u(x) + 3.0 * v(x), 2, 2)
        assert np.allclose(w.choi, 2 * u.choi + 3 * v.choi, atol=1e-12)


class TestIsCp:
    def test_identity(self):
        verdict = is_cp(LinearMap.identity(2))
        assert verdict.is_cp and abs(verdict.margin) < 1e-12

    def test_transpose(self):
        verdict = is_cp(LinearMap.transpose_map(2))
        assert not verdict.is_cp
        assert verdict.margin == pytest.approx(-1.0, abs=1e-9)

    def test_conjugation(self):
        rng = rng_from(2)
        v = complex_gaussian(rng, 3)
        u = LinearMap.from_kraus([v], 3, 3)
        assert is_cp(u).is_cp

    def test_composition_stays_cp(self):
        rng = rng_from(3)
        u, v = cp_map(rng, 2), cp_map(rng, 2)
        w = LinearMap.from_action(lambda x: u(v(x)), 2, 2)
        assert is_cp(w, tol=2e-9).margin >= -2e-9


class TestKraus:
    def test_identity_single_op(self):
        ks = kraus(LinearMap.identity(2))
        assert len(ks.ops) == 1
        y = ks.ops[0]
        assert np.allclose(y / y[0, 0], np.eye(2))

    def test_conjugation_single_op(self):
        rng = rng_from(4)
        v = complex_gaussian(rng, 2)
        ks = kraus(LinearMap.from_kraus([v], 2, 2))
        assert len(ks.ops) == 1
        phase = ks.ops[0][0, 0] / v[0, 0]
        assert abs(abs(phase) - 1) < 1e-10
        assert np.allclose(ks.ops[0], phase * v, atol=1e-10)

    def test_reconstruction(self):
        rng = rng_from(5)
        u = cp_map(rng, 3)
        ks = kraus(u)
        x = complex_gaussian(rng, 3)
        assert np.linalg.norm(ks.apply(x) - u(x)) < 1e-8

    def test_rejects_non_cp(self):
        with pytest.raises(LinalgError):
            kraus(LinearMap.transpose_map(2))


class TestAdjoint:
    def test_identity(self):
        u = LinearMap.identity(3)
        assert np.allclose(adjoint_map(u).choi, u.choi)

    def test_involutive(self):
        rng = rng_from(6)
        u = LinearMap(2, 3, random_map_choi(rng, 2, 3))
        assert np.allclose(adjoint_map(adjoint_map(u)).choi, u.choi)

    def test_pairing_on_basis(self):
        rng = rng_from(7)
        u = LinearMap(2, 3, random_map_choi(rng, 2, 3))
        ua = adjoint_map(u)
        for i in range(2):
            for j in range(2):
                x = np.zeros((2, 2))
                x[i, j] = 1.0
                for k in range(3):
                    for l in range(3):
                        y = np.zeros((3, 3))
                        y[k, l] = 1.0
                        lhs = np.trace(u(x) @ y.T)
                        rhs = np.trace(x @ ua(y).T)
                        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_sandwich_map_adjoint(self):
        # adjoint of x -> a x b is y -> a^T y b^T under the transpose pairing
        rng = rng_from(8)
        a, b = complex_gaussian(rng, 2), complex_gaussian(rng, 2)
        u = LinearMap.from_action(lambda x: a @ x @ b, 2, 2)
        ua = adjoint_map(u)
        expected = LinearMap.from_action(lambda y: a.T @ y @ b.T, 2, 2)
        assert np.allclose(ua.choi, expected.choi, atol=1e-12)

    def test_adjoint_preserves_cp(self):
        rng = rng_from(9)
        u = cp_map(rng, 2, 3)
        m_u = is_cp(u).margin
        m_a = is_cp(adjoint_map(u)).margin
        assert abs(m_u - m_a) < 1e-10

    def test_hs_adjoint_pairing(self):
        rng = rng_from(10)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        ha = hs_adjoint(u)
        x, y = complex_gaussian(rng, 2), complex_gaussian(rng, 2)
        lhs = np.trace(dagger(u(x)) @ y)
        rhs = np.trace(dagger(x) @ ha(y))
        assert lhs == pytest.approx(rhs, abs=1e-10)


class TestCbNorm:
    def test_identity(self):
        assert cb_norm(LinearMap.identity(2)) == pytest.approx(1.0, abs=1e-6)

    def test_transpose_is_two(self):
        assert cb_norm(LinearMap.transpose_map(2)) == pytest.approx(2.0, abs=1e-5)

    def test_cp_map_attains_at_identity(self):
        rng = rng_from(11)
        for _ in range(3):
            u = cp_map(rng, 2)
            assert cb_norm(u) == pytest.approx(op_norm(u.on_identity()), abs=1e-5)

    def test_dominates_amplified_norm(self):
        rng = rng_from(12)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        amp = sp_op_norm(u.tensor_id(2), math.inf, SearchBudget(seed=1))
        assert cb_norm(u) >= amp.lower - 1e-5

    def test_unitary_conjugation(self):
        rng = rng_from(13)
        v = random_unitary(rng, 3)
        u = LinearMap.from_kraus([v], 3, 3)
        assert cb_norm(u) == pytest.approx(1.0, abs=1e-6)


class TestSpOpNorm:
    def test_identity_bracket(self):
        for p in [1, 2, 4, math.inf]:
            br = sp_op_norm(LinearMap.identity(2), p)
            assert br.lower == pytest.approx(1.0, abs=1e-6)
            assert br.upper == pytest.approx(1.0, abs=1e-6)

    def test_unitary_conjugation_bracket(self):
        rng = rng_from(14)
        v = random_unitary(rng, 2)
        u = LinearMap.from_kraus([v], 2, 2)
        for p in [1, 2, math.inf]:
            br = sp_op_norm(u, p)
            assert br.lower == pytest.approx(1.0, abs=1e-6)
            assert br.upper == pytest.approx(1.0, abs=1e-6)

    def test_cp_bracket_sound(self):
        rng = rng_from(15)
        u = cp_map(rng, 2)
        br = sp_op_norm(u, 2, SearchBudget(seed=2))
        assert br.lower <= br.upper + 1e-9
        # identity input is always available
        ratio = (np.linalg.svd(u(np.eye(2)), compute_uv=False) ** 2).sum() ** 0.5 \
            / math.sqrt(2)
        assert br.lower >= ratio - 1e-9
