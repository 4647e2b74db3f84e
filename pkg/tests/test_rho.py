import math

import numpy as np
import pytest

from regop.cpmaps import LinearMap
from regop.linalg import BlockMatrix, flip_factors
from regop.randgen import complex_gaussian, random_map_choi, rng_from
from regop.rho import PairingElement, pairing_direct, pairing_value, rho_upper
from regop.vnorm import vnorm_upper


def elem(n, m, p, body):
    return PairingElement.from_body(body, n, m, p)


def e11(n):
    e = np.zeros((n, n))
    e[0, 0] = 1.0
    return e


class TestRhoUpper:
    def test_scalar(self):
        a = elem(1, 1, 2, np.array([[3.0 - 4.0j]]))
        val, w = rho_upper(a, restarts=2)
        assert val == pytest.approx(5.0, rel=1e-6)
        assert w.residual(a) <= 1e-8

    def test_rank_one_unit(self):
        for p in [1, 2, 3, math.inf]:
            a = elem(2, 2, p, np.kron(e11(2), e11(2)))
            val, _ = rho_upper(a, restarts=4)
            assert val == pytest.approx(1.0, abs=2e-4)

    def test_homogeneity(self):
        rng = rng_from(0)
        body = complex_gaussian(rng, 4)
        lam = 0.37 - 1.2j
        for p in [1, 2, math.inf]:
            v1, _ = rho_upper(elem(2, 2, p, body), restarts=4, seed=5)
            v2, _ = rho_upper(elem(2, 2, p, lam * body), restarts=4, seed=5)
            assert v2 == pytest.approx(abs(lam) * v1, rel=1e-9)

    def test_endpoint_identity_vs_flipped_vnorm(self):
        # at p = inf the pairing norm is the inner-trace vector norm of the
        # factor-flipped element
        rng = rng_from(1)
        body = complex_gaussian(rng, 4)
        a = elem(2, 2, math.inf, body)
        val, _ = rho_upper(a, restarts=4)
        flipped = flip_factors(BlockMatrix(2, 2, body))
        ref, _ = vnorm_upper(flipped, 1, restarts=4)
        assert val == pytest.approx(ref, abs=1e-4)

    def test_witness_feasible(self):
        rng = rng_from(2)
        a = elem(2, 2, 2, complex_gaussian(rng, 4))
        val, w = rho_upper(a, restarts=4)
        assert w.residual(a) <= 1e-8
        assert val == pytest.approx(w.value)

    def test_triangle_at_endpoints(self):
        rng = rng_from(3)
        x = complex_gaussian(rng, 4)
        y = complex_gaussian(rng, 4)
        for p in [1, math.inf]:
            vx, _ = rho_upper(elem(2, 2, p, x), restarts=4)
            vy, _ = rho_upper(elem(2, 2, p, y), restarts=4)
            vz, _ = rho_upper(elem(2, 2, p, x + y), restarts=4)
            assert vz <= vx + vy + 1e-5


class TestPairing:
    def test_identity_rank_one(self):
        u = LinearMap.identity(2)
        a = elem(2, 2, 2, np.kron(e11(2), e11(2)))
        rep = pairing_value(u, a)
        assert rep.value == pytest.approx(1.0, abs=1e-9)
        assert rep.duality_ok
        assert rep.ratio >= 0.9  # equality instance for the duality bound

    def test_zero_tensor(self):
        rng = rng_from(4)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        a = elem(2, 2, 2, np.zeros((4, 4)))
        rep = pairing_value(u, a)
        assert rep.value == 0

    def test_routes_agree(self):
        rng = rng_from(5)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        a = elem(2, 2, 2, complex_gaussian(rng, 4))
        rep = pairing_value(u, a)
        assert abs(rep.value - rep.witness_route) <= 1e-9 * max(1.0, abs(rep.value))
        assert rep.route_agreement <= 1e-9

    def test_duality_inequality(self):
        rng = rng_from(6)
        for p in [2, 3]:
            u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
            a = elem(2, 2, p, complex_gaussian(rng, 4))
            rep = pairing_value(u, a)
            assert rep.duality_ok

    def test_transposed_pairing_formula(self):
        # <u, x (x) y> = tr(u(x)^T y) on elementary tensors
        rng = rng_from(7)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        x, y = complex_gaussian(rng, 2), complex_gaussian(rng, 2)
        a = elem(2, 2, 2, np.kron(x, y))
        expected = np.trace(u(x).T @ y)
        assert pairing_direct(u, a) == pytest.approx(complex(expected), abs=1e-10)
