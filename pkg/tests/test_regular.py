import math

import numpy as np
import pytest

from regop.cpmaps import LinearMap, cb_norm, is_cp
from regop.linalg import op_norm, schatten_norm
from regop.randgen import (
    complex_gaussian,
    random_cp_choi,
    random_map_choi,
    random_unitary,
    rng_from,
)
from regop.regular import (
    amplification_lower,
    decompose_cp,
    embed_lattice_map,
    lattice_matrix,
    lattice_regular_oracle,
    regular_bracket,
    regular_lower,
    regular_upper,
)
from regop.search import SearchBudget


def cp_map(rng, n, rank=None):
    return LinearMap(n, n, random_cp_choi(rng, n, n, rank))


class TestRegularLower:
    def test_identity_all_levels(self):
        u = LinearMap.identity(2)
        for p in [1, 2, math.inf]:
            rep = regular_lower(u, p, levels=3)
            assert all(v >= 1 - 1e-6 and v <= 1 + 1e-6 for v in rep.levels)

    def test_transpose_level_two(self):
        rep = regular_lower(LinearMap.transpose_map(2), math.inf, levels=2)
        assert rep.lower >= 1.99

    def test_unitary_conjugation(self):
        rng = rng_from(0)
        v = random_unitary(rng, 2)
        u = LinearMap.from_kraus([v], 2, 2)
        for p in [2, math.inf]:
            rep = regular_lower(u, p, levels=2)
            assert rep.levels == pytest.approx([1.0, 1.0], abs=1e-6)

    def test_monotone_envelope(self):
        rng = rng_from(1)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        rep = regular_lower(u, 2, levels=3)
        assert all(x <= y + 1e-12 for x, y in zip(rep.levels, rep.levels[1:]))


class TestRegularUpper:
    def test_identity(self):
        for p in [1, 2, 4]:
            val, _ = regular_upper(LinearMap.identity(2), p)
            assert val <= 1 + 1e-5
            assert val >= 1 - 1e-6

    def test_p_inf_is_cb(self):
        t = LinearMap.transpose_map(2)
        val, cert = regular_upper(t, math.inf)
        assert val == pytest.approx(2.0, abs=1e-4)
        assert cert == "cb-norm SDP"

    def test_cp_single_block(self):
        rng = rng_from(2)
        for p in [1, 2, 4]:
            u = cp_map(rng, 2)
            cap = max(op_norm(u.on_identity()), op_norm(u.adjoint_on_identity()))
            val, _ = regular_upper(u, p)
            assert val <= cap + 1e-5

    def test_bracket_sound(self):
        rng = rng_from(3)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        for p in [1, 2, math.inf]:
            rep = regular_bracket(u, p, levels=2)
            assert rep.lower <= rep.upper + 1e-5


class TestDecompose:
    def test_recombination_exact(self):
        rng = rng_from(4)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        dec = decompose_cp(u, 2)
        assert np.linalg.norm(dec.recombined().choi - u.choi) <= 1e-10
        for part in dec.parts:
            assert is_cp(part, tol=1e-7).is_cp

    def test_cp_input_single_part(self):
        rng = rng_from(5)
        u = cp_map(rng, 2)
        dec = decompose_cp(u, 2)
        for j in (1, 2, 3):
            assert np.linalg.norm(dec.parts[j].choi) <= 1e-5

    def test_hermitian_choi_no_imaginary_parts(self):
        rng = rng_from(6)
        h = complex_gaussian(rng, 4)
        h = (h + np.conj(h.T)) / 2
        u = LinearMap(2, 2, h)
        dec = decompose_cp(u, 2)
        assert np.linalg.norm(dec.parts[2].choi) <= 1e-5
        assert np.linalg.norm(dec.parts[3].choi) <= 1e-5

    def test_i_times_cp(self):
        rng = rng_from(7)
        u = cp_map(rng, 2)
        dec = decompose_cp(u.scaled(1j), 2)
        for j in (0, 1, 3):
            assert np.linalg.norm(dec.parts[j].choi) <= 1e-5

    def test_certificate_matches_regular_upper(self):
        rng = rng_from(8)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        dec = decompose_cp(u, 2)
        val, _ = regular_upper(u, 2)
        assert val == pytest.approx(dec.certificate, abs=1e-12)


class TestProp22Ordering:
    def test_amplification_below_upper(self):
        rng = rng_from(9)
        for p in [4 / 3, 2, 4]:
            u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
            amp = amplification_lower(u, p, levels=2, budget=SearchBudget(seed=3))
            up, _ = regular_upper(u, p)
            assert amp <= up + 1e-4


class TestAdjointSymmetry:
    def test_brackets_overlap(self):
        from regop.cpmaps import adjoint_map

        rng = rng_from(10)
        u = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        for p in [4 / 3, 2]:
            q = 1.0 / (1.0 - 1.0 / p)
            bu = regular_bracket(u, p, levels=2)
            ba = regular_bracket(adjoint_map(u), q, levels=2)
            assert bu.bracket().overlaps(ba.bracket(), widen=1e-4)


class TestLattice:
    def test_identity(self):
        u = embed_lattice_map(np.eye(2))
        for p in [1, 2, math.inf]:
            assert lattice_regular_oracle(u, p) == pytest.approx(1.0, abs=1e-9)

    def test_row_sum_at_inf(self):
        m = np.array([[1.0, -1.0], [0.0, 1.0]])
        u = embed_lattice_map(m)
        assert lattice_regular_oracle(u, math.inf) == pytest.approx(2.0, abs=1e-12)

    def test_column_sum_at_one(self):
        rng = rng_from(11)
        m = np.abs(rng.standard_normal((3, 3)))
        u = embed_lattice_map(m)
        assert lattice_regular_oracle(u, 1) == pytest.approx(
            m.sum(axis=0).max(), abs=1e-12)

    def test_interior_p_between_endpoints(self):
        rng = rng_from(12)
        m = np.abs(rng.standard_normal((2, 2)))
        v1 = lattice_regular_oracle(embed_lattice_map(m), 1)
        vi = lattice_regular_oracle(embed_lattice_map(m), math.inf)
        v2 = lattice_regular_oracle(embed_lattice_map(m), 2)
        assert v2 <= max(v1, vi) + 1e-9
        assert v2 >= min(v1, vi) * 0.5

    def test_matrix_extraction_rejects(self):
        u = LinearMap.transpose_map(2)
        lattice_matrix(u)  # transpose preserves diagonals
        rng = rng_from(13)
        w = LinearMap(2, 2, random_map_choi(rng, 2, 2))
        with pytest.raises(Exception):
            lattice_matrix(w)

    def test_bracket_contains_oracle(self):
        rng = rng_from(14)
        m = complex_gaussian(rng, 2)
        u = embed_lattice_map(m)
        for p in [1, math.inf]:
            oracle = lattice_regular_oracle(u, p)
            rep = regular_bracket(u, p, levels=2)
            assert rep.lower - 1e-3 <= oracle <= rep.upper + 1e-3
