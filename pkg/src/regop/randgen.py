"""Seeded instance generators shared by the CLI, the tests and the
acceptance suite.  Every draw goes through one numpy Generator, so a seed
fully determines every instance."""

from __future__ import annotations

import numpy as np

from .linalg import BlockMatrix, dagger, partial_trace


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_gaussian(rng, rows, cols=None) -> np.ndarray:
    cols = rows if cols is None else cols
    return (rng.standard_normal((rows, cols))
            + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def random_hermitian(rng, n) -> np.ndarray:
    a = complex_gaussian(rng, n)
    return (a + dagger(a)) / 2.0


def random_psd(rng, n, rank=None) -> np.ndarray:
    rank = n if rank is None else rank
    w = complex_gaussian(rng, n, rank)
    return w @ dagger(w)


def random_unitary(rng, n) -> np.ndarray:
    q, r = np.linalg.qr(complex_gaussian(rng, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_block(rng, n, m) -> BlockMatrix:
    return BlockMatrix(n, m, complex_gaussian(rng, n * m))


def random_map_choi(rng, n, m) -> np.ndarray:
    """Choi matrix of a generic (non-CP) map, normalized to unit Frobenius."""
    c = complex_gaussian(rng, n * m)
    return c / np.linalg.norm(c)


def random_cp_choi(rng, n, m, rank=None) -> np.ndarray:
    """Choi of a random CP map, scaled so ||u(I)|| is about 1."""
    rank = n * m if rank is None else rank
    c = random_psd(rng, n * m, rank)
    uofi = partial_trace(c, n, m, keep="inner")
    scale = np.linalg.norm(uofi, 2)
    return c / scale
