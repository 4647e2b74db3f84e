"""Choi-matrix analytics for linear maps between matrix spaces: complete
positivity, Kraus decompositions, adjoints, the completely bounded norm
(by semidefinite programming) and Schatten operator-norm brackets.

Conventions.  A map u from n x n to m x m matrices is stored through its
Choi matrix C, the (n*m) x (n*m) block matrix whose (i, j) block is
u(e_ij).  Adjoints are taken with respect to the bilinear trace pairing
<x, y> = tr(x y^T); under that pairing the Choi of u* is the factor-flip
(permutation conjugation) of the Choi of u, with no complex conjugation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import conic
from .linalg import (
    LinalgError,
    NormBracket,
    PExp,
    as_cmatrix,
    dagger,
    flip_body,
    hermitian_eig,
    op_norm,
    partial_trace,
    schatten_norm,
)
from .search import SearchBudget, opnorm_lower, schatten_ascent

CP_TOL = 1e-9


@dataclass
class LinearMap:
    in_dim: int
    out_dim: int
    choi: np.ndarray
    _kraus: list | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.choi = as_cmatrix(self.choi)
        d = self.in_dim * self.out_dim
        if self.choi.shape != (d, d):
            raise LinalgError(
                f"Choi matrix is {self.choi.shape}, expected {(d, d)}")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_action(fn, in_dim: int, out_dim: int) -> "LinearMap":
        n, m = in_dim, out_dim
        choi = np.zeros((n * m, n * m), dtype=complex)
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[i, j] = 1.0
                choi[i * m:(i + 1) * m, j * m:(j + 1) * m] = as_cmatrix(fn(e))
        return LinearMap(n, m, choi)

    @staticmethod
    def from_kraus(ops, in_dim: int, out_dim: int) -> "LinearMap":
        u = LinearMap.from_action(
            lambda x: sum(y @ x @ dagger(y) for y in ops), in_dim, out_dim)
        u._kraus = [as_cmatrix(y) for y in ops]
        return u

    @staticmethod
    def identity(n: int) -> "LinearMap":
        return LinearMap.from_kraus([np.eye(n)], n, n)

    @staticmethod
    def transpose_map(n: int) -> "LinearMap":
        return LinearMap.from_action(lambda x: x.T, n, n)

    # -- action ------------------------------------------------------------

    def choi_tensor(self) -> np.ndarray:
        n, m = self.in_dim, self.out_dim
        return self.choi.reshape(n, m, n, m)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = as_cmatrix(x)
        return np.einsum("ij,ikjl->kl", x, self.choi_tensor())

    def on_identity(self) -> np.ndarray:
        """u(I), the partial trace of the Choi over the input factor."""
        return partial_trace(self.choi, self.in_dim, self.out_dim, keep="inner")

    def adjoint_on_identity(self) -> np.ndarray:
        """u*(I), the partial trace of the Choi over the output factor."""
        return partial_trace(self.choi, self.in_dim, self.out_dim, keep="outer")

    def tensor_id(self, k: int) -> "LinearMap":
        """u (x) id on M_k, acting on (n*k) x (n*k) matrices."""
        n, m = self.in_dim, self.out_dim
        c4 = self.choi_tensor()
        big = np.einsum("ikjl,ac,bd->iakcjbld", c4, np.eye(k), np.eye(k))
        d = n * k * m * k
        return LinearMap(n * k, m * k, big.reshape(d, d))

    def scaled(self, s: complex) -> "LinearMap":
        return LinearMap(self.in_dim, self.out_dim, s * self.choi)

    def plus(self, other: "LinearMap") -> "LinearMap":
        return LinearMap(self.in_dim, self.out_dim, self.choi + other.choi)


def choi(u: LinearMap) -> np.ndarray:
    return u.choi


def adjoint_map(u: LinearMap) -> LinearMap:
    """Adjoint under the bilinear pairing tr(u(x) y^T) = tr(x u*(y)^T)."""
    return LinearMap(u.out_dim, u.in_dim, flip_body(u.choi, u.in_dim, u.out_dim))


def hs_adjoint(u: LinearMap) -> LinearMap:
    """Adjoint under the sesquilinear pairing tr(u(x)* y) = tr(x* u#(y))."""
    return LinearMap(u.out_dim, u.in_dim,
                     np.conj(flip_body(u.choi, u.in_dim, u.out_dim)))


class CpVerdict(NamedTuple):
    is_cp: bool
    margin: float


def is_cp(u: LinearMap, tol: float = CP_TOL) -> CpVerdict:
    """Complete positivity via Choi positivity; margin is the smallest
    eigenvalue of the Hermitian part (non-Hermitian deviation also counts
    against the margin)."""
    c = u.choi
    herm = (c + dagger(c)) / 2.0
    dev = float(np.abs(c - dagger(c)).max(initial=0.0))
    margin = float(np.linalg.eigvalsh(herm).min())
    margin = min(margin, margin - dev) if dev > tol else margin
    return CpVerdict(bool(margin >= -tol and dev <= tol), margin)


@dataclass
class KrausSet:
    ops: list

    def apply(self, x: np.ndarray) -> np.ndarray:
        return sum(y @ as_cmatrix(x) @ dagger(y) for y in self.ops)


def kraus(u: LinearMap, tol: float = CP_TOL) -> KrausSet:
    """Kraus operators from the spectral decomposition of the Choi matrix,
    eigenvalues below 1e-10 * max dropped, ordered by decreasing weight."""
    verdict = is_cp(u, tol)
    if not verdict.is_cp:
        raise LinalgError(
            f"map is not completely positive (margin {verdict.margin:.3e})")
    n, m = u.in_dim, u.out_dim
    w, v = hermitian_eig((u.choi + dagger(u.choi)) / 2.0)
    top = max(w.max(initial=0.0), 0.0)
    ops = []
    for lam, vec in zip(w, v.T):
        if lam <= 1e-10 * top or lam <= 0:
            continue
        y = math.sqrt(lam) * vec.reshape(n, m).T  # vec index (i, k) -> y[k, i]
        # deterministic phase: largest entry made real positive
        flat = y.ravel()
        pivot = flat[np.argmax(np.abs(flat))]
        if abs(pivot) > 0:
            y = y * (abs(pivot) / pivot)
        ops.append(y)
    return KrausSet(ops)


def _cb_program(J: np.ndarray, n: int, m: int, extension_basis=()):
    """Paulsen off-diagonal SDP: minimize t with

        [[C1, J], [J*, C2]] >= 0,   ptr_in(C1) <= t I,   ptr_in(C2) <= t I.

    ``extension_basis`` adds free variables theta_v with J replaced by
    J + sum theta_v J_v (used for norm-minimal extensions).
    """
    d = n * m
    b = conic.Builder()
    g = b.psd(2 * d)
    s1 = b.psd(m)
    s2 = b.psd(m)
    (t,) = b.free(1)
    theta = b.free(2 * len(extension_basis)) if extension_basis else []

    free_mats = []
    for v, jv in enumerate(extension_basis):
        big = np.zeros((2 * d, 2 * d), dtype=complex)
        big[:d, d:] = as_cmatrix(jv)  # indexed like the pinned corner of G
        free_mats.append((theta[2 * v], big))
        free_mats.append((theta[2 * v + 1], 1j * big))
    entries = [(r, d + c, J[r, c]) for r in range(d) for c in range(d)]
    b.pin_entries(g, entries, free_mat_terms=free_mats)

    def corner(which):
        def transform(e):
            big = np.zeros((2 * d, 2 * d), dtype=complex)
            k = np.kron(np.eye(n), e)
            if which == 0:
                big[:d, :d] = k
            else:
                big[d:, d:] = k
            return big
        return transform

    b.eq_herm([(g, corner(0)), (s1, None)], [(t, -np.eye(m))], dim=m)
    b.eq_herm([(g, corner(1)), (s2, None)], [(t, -np.eye(m))], dim=m)
    b.objective_free(t, 1.0)
    return b, g, t, theta


def cb_norm(u: LinearMap, tol: float = 1e-8, max_iter: int = 50000) -> float:
    """Completely bounded norm of u as a map between operator-norm matrix
    spaces, computed by the off-diagonal SDP over the Choi matrix."""
    scale = float(np.linalg.norm(u.choi))
    if scale == 0:
        return 0.0
    J = u.choi / scale
    b, _, _, _ = _cb_program(J, u.in_dim, u.out_dim)
    rep = conic.solve(b.build(), tol=tol, max_iter=max_iter)
    if not rep.ok:
        raise conic.SolverError(f"cb-norm SDP ended with status {rep.status}")
    return rep.primal * scale


def _interp_upper(u: LinearMap, p: PExp) -> float:
    """For CP maps: ||u||_{p->p} <= ||u(I)||^(1-theta) ||u*(I)||^theta."""
    a = op_norm(u.on_identity())
    c = op_norm(u.adjoint_on_identity())
    th = p.theta
    if a == 0 or c == 0:
        return 0.0
    return a ** (1.0 - th) * c ** th


def sp_op_norm(u: LinearMap, p, budget: SearchBudget = SearchBudget()) -> NormBracket:
    """Bracket for ||u||_{S_p -> S_p}.

    Lower bound from optimized inputs.  Upper bound: endpoint interpolation
    for CP maps, otherwise the sum of interpolation bounds over a CP
    decomposition (which also dominates the norm).
    """
    p = PExp.parse(p)
    n = u.in_dim
    candidates = [np.eye(n), u.adjoint_on_identity().T.conj()]
    if p.is_inf:
        adj = adjoint_map(u)
        lo, _ = opnorm_lower(
            lambda x: u(x),
            lambda eta, xi: adj(np.outer(np.conj(eta), xi)),
            n, budget, candidates)
    else:
        hadj = hs_adjoint(u)
        lo, _ = schatten_ascent(
            lambda x: u(x), lambda g: hadj(g), n, p, budget, candidates)
    verdict = is_cp(u)
    if verdict.is_cp:
        hi = _interp_upper(u, p)
        hi_src = "endpoint interpolation of a CP map"
    else:
        from .regular import decompose_cp

        parts = decompose_cp(u, p)
        hi = parts.certificate
        hi_src = "CP-decomposition certificate"
    hi = max(hi, lo)
    return NormBracket(lower=lo, upper=hi,
                       lower_witness="optimized input ratio", upper_witness=hi_src)
