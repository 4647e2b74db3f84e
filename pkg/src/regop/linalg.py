"""Dense complex linear algebra: exponents, block matrices, Schatten norms
and the trace-pairing identities everything else is built on.

Matrices are plain complex numpy arrays.  The only structured carriers are
``PExp`` (an exponent in [1, inf] with its conjugate) and ``BlockMatrix``
(an element of a matrix space over a matrix space, stored as one dense
body together with its block structure).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

HERM_TOL = 1e-12


class LinalgError(ValueError):
    """Raised when an input violates a structural precondition."""


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a 2-d complex array (the universal matrix carrier)."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise LinalgError(f"expected a matrix, got array of ndim {m.ndim}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a.T)


def is_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> bool:
    a = as_cmatrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    return float(np.abs(a - dagger(a)).max(initial=0.0)) <= tol * scale


@dataclass(frozen=True)
class PExp:
    """Exponent p in [1, inf]; infinity is the exact float ``inf``.

    The conjugate exponent and theta = 1/p are always derived from ``value``
    so the three can never disagree.
    """

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not (v >= 1.0):
            raise LinalgError(f"exponent must satisfy p >= 1, got {v}")
        object.__setattr__(self, "value", v)

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.value)

    @property
    def conjugate(self) -> float:
        if self.is_inf:
            return 1.0
        if self.value == 1.0:
            return math.inf
        return self.value / (self.value - 1.0)

    @property
    def theta(self) -> float:
        return 0.0 if self.is_inf else 1.0 / self.value

    def conj_exp(self) -> "PExp":
        return PExp(self.conjugate)

    def doubled(self) -> float:
        """2p as an extended real (used for the outer factors of splittings)."""
        return math.inf if self.is_inf else 2.0 * self.value

    @staticmethod
    def parse(text) -> "PExp":
        if isinstance(text, PExp):
            return text
        if isinstance(text, (int, float)):
            return PExp(float(text))
        s = str(text).strip().lower()
        if s in ("inf", "infinity", "oo"):
            return PExp(math.inf)
        if "/" in s:
            num, den = s.split("/", 1)
            return PExp(float(num) / float(den))
        return PExp(float(s))

    def __str__(self):
        return "inf" if self.is_inf else repr(self.value)


@dataclass
class BlockMatrix:
    """An ``outer_dim x outer_dim`` matrix of ``inner_dim x inner_dim`` blocks.

    ``body`` is the flattened (outer*inner) square matrix; ``factor_order``
    records which tensor factor is the slow (outer) index, so a value can be
    carried through the outer/inner swap without copying conventions around.
    """

    outer_dim: int
    inner_dim: int
    body: np.ndarray
    factor_order: str = "outer-inner"

    def __post_init__(self):
        self.body = as_cmatrix(self.body)
        d = self.outer_dim * self.inner_dim
        if self.body.shape != (d, d):
            raise LinalgError(
                f"body is {self.body.shape}, expected {(d, d)} for "
                f"outer_dim={self.outer_dim}, inner_dim={self.inner_dim}"
            )
        if self.factor_order not in ("outer-inner", "inner-outer"):
            raise LinalgError(f"unknown factor_order {self.factor_order!r}")

    def block(self, i: int, j: int) -> np.ndarray:
        m = self.inner_dim
        return self.body[i * m:(i + 1) * m, j * m:(j + 1) * m]

    def blocks(self) -> np.ndarray:
        """View of the body as an (outer, outer, inner, inner) tensor."""
        n, m = self.outer_dim, self.inner_dim
        return self.body.reshape(n, m, n, m).transpose(0, 2, 1, 3)

    def copy(self) -> "BlockMatrix":
        return replace(self, body=self.body.copy())

    @staticmethod
    def from_blocks(blocks: np.ndarray, factor_order: str = "outer-inner") -> "BlockMatrix":
        n, n2, m, m2 = blocks.shape
        if n != n2 or m != m2:
            raise LinalgError("block tensor must be (n, n, m, m)")
        body = blocks.transpose(0, 2, 1, 3).reshape(n * m, n * m)
        return BlockMatrix(n, m, body, factor_order)

    @staticmethod
    def from_tensor(outer: np.ndarray, inner: np.ndarray) -> "BlockMatrix":
        """Elementary tensor outer (x) inner."""
        outer = as_cmatrix(outer)
        inner = as_cmatrix(inner)
        return BlockMatrix(outer.shape[0], inner.shape[0], np.kron(outer, inner))


def hermitian_eig(a: np.ndarray, tol: float = HERM_TOL):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, v)`` with ``a = v @ diag(w) @ v*``.  Inputs that are not
    Hermitian within ``tol`` (relative, max-entry norm) are rejected.
    """
    a = as_cmatrix(a)
    if not is_hermitian(a, tol):
        dev = float(np.abs(a - dagger(a)).max(initial=0.0))
        raise LinalgError(f"matrix is not Hermitian: max |A - A*| entry = {dev:.3e}")
    w, v = np.linalg.eigh((a + dagger(a)) / 2.0)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def singular_values(a: np.ndarray) -> np.ndarray:
    return np.linalg.svd(as_cmatrix(a), compute_uv=False)


def schatten_norm(a: np.ndarray, p) -> float:
    """Schatten p-norm (sum of p-th powers of singular values)^(1/p).

    ``p = inf`` is the operator norm, an exact branch rather than a limit.
    """
    p = PExp.parse(p)
    s = singular_values(a)
    if s.size == 0:
        return 0.0
    if p.is_inf:
        return float(s[0])
    if p.value == 1.0:
        return float(s.sum())
    if p.value == 2.0:
        return float(np.sqrt((s * s).sum()))
    return float((s ** p.value).sum() ** (1.0 / p.value))


def op_norm(a: np.ndarray) -> float:
    return schatten_norm(a, math.inf)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(as_cmatrix(a), as_cmatrix(b))


def psd_power(a: np.ndarray, exponent: float, cutoff: float = 1e-12) -> np.ndarray:
    """a**exponent for Hermitian PSD ``a``; eigenvalues below
    ``cutoff * max`` are treated as zero (and stay zero for negative powers).
    """
    w, v = hermitian_eig(a)
    w = np.clip(w.real, 0.0, None)
    top = w.max(initial=0.0)
    out = np.zeros_like(w)
    keep = w > cutoff * top if top > 0 else np.zeros_like(w, dtype=bool)
    out[keep] = w[keep] ** exponent
    return (v * out) @ dagger(v)


def pinv_hermitian(a: np.ndarray, cutoff: float = 1e-12) -> np.ndarray:
    return psd_power(a, -1.0, cutoff)


def trace_pair(z: BlockMatrix) -> complex:
    """Trace functional on a square-in-both-factors block matrix:
    sum_ij <e_i, z_ij e_j>.  For z = a (x) b this equals tr(a^T b).
    """
    if z.outer_dim != z.inner_dim:
        raise LinalgError(
            f"trace_pair needs outer_dim == inner_dim, got {z.outer_dim} != {z.inner_dim}"
        )
    n = z.outer_dim
    idx = np.arange(n)
    rows = idx * n + idx
    t = z.body[np.ix_(rows, rows)]
    return complex(t.sum())


def _flip_perm(n: int, m: int) -> np.ndarray:
    # permutation sending index i*m + k  ->  k*n + i
    idx = np.arange(n * m).reshape(n, m)
    return idx.T.reshape(-1)


def flip_body(a: np.ndarray, n: int, m: int) -> np.ndarray:
    """Permutation similarity swapping the tensor factors of an (n*m) matrix."""
    perm = _flip_perm(n, m)
    return as_cmatrix(a)[np.ix_(perm, perm)]


def flip_factors(x: BlockMatrix) -> BlockMatrix:
    """Swap the tensor factors (a (x) b -> b (x) a); involutive."""
    body = flip_body(x.body, x.outer_dim, x.inner_dim)
    order = "inner-outer" if x.factor_order == "outer-inner" else "outer-inner"
    return BlockMatrix(x.inner_dim, x.outer_dim, body, order)


@dataclass
class NormBracket:
    """Certified interval [lower, upper] around a norm value, with the
    provenance of each side."""

    lower: float
    upper: float
    lower_witness: str = ""
    upper_witness: object = None

    def __post_init__(self):
        if self.lower > self.upper + 1e-9 * max(1.0, abs(self.upper)):
            raise LinalgError(
                f"invalid bracket: lower {self.lower} exceeds upper {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def overlaps(self, other: "NormBracket", widen: float = 0.0) -> bool:
        return (self.lower - widen <= other.upper + widen
                and other.lower - widen <= self.upper + widen)


def partial_trace(a: np.ndarray, n: int, m: int, keep: str) -> np.ndarray:
    """Partial trace of an (n*m) square matrix over one tensor factor.

    ``keep='outer'`` traces out the inner (m) factor and returns an n x n
    matrix; ``keep='inner'`` traces out the outer factor.
    """
    a = as_cmatrix(a)
    t = a.reshape(n, m, n, m)
    if keep == "outer":
        return np.einsum("ikjk->ij", t)
    if keep == "inner":
        return np.einsum("ikil->kl", t)
    raise LinalgError(f"keep must be 'outer' or 'inner', got {keep!r}")


def sandwich(x: BlockMatrix, left: np.ndarray, right: np.ndarray,
             side: str = "outer") -> BlockMatrix:
    """(left (x) I) x (right (x) I) for side='outer', or with I on the left
    factor for side='inner'.  Dimensions of the untouched factor are kept.
    """
    if side == "outer":
        l = kron(left, np.eye(x.inner_dim))
        r = kron(right, np.eye(x.inner_dim))
        n = as_cmatrix(left).shape[0]
        return BlockMatrix(n, x.inner_dim, l @ x.body @ r, x.factor_order)
    if side == "inner":
        l = kron(np.eye(x.outer_dim), left)
        r = kron(np.eye(x.outer_dim), right)
        m = as_cmatrix(left).shape[0]
        return BlockMatrix(x.outer_dim, m, l @ x.body @ r, x.factor_order)
    raise LinalgError(f"side must be 'outer' or 'inner', got {side!r}")
