"""Norm-minimal extensions of maps given on a subspace of a matrix space.

The extension theorem guarantees a regular extension with unchanged regular
norm.  Here the extension is found by making the unknown values on a
trace-orthogonal complement part of the upper-bound program itself: the
Choi matrix of the extension is affine in the unknowns, and both upper
bounds (the cb SDP at p = inf, the CP-decomposition SDP otherwise) are
jointly convex in those unknowns, so one solve minimizes the bound exactly.
The achieved gap against a subspace lower bound is reported, not assumed
zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import conic
from .cpmaps import LinearMap
from .linalg import BlockMatrix, LinalgError, PExp, as_cmatrix
from .randgen import complex_gaussian, rng_from
from .regular import (
    Decomposition,
    _decompose_sdp,
    _geo_certificate,
    _repair_blocks,
)
from .search import SearchBudget
from .vnorm import vnorm_lower, vnorm_upper


@dataclass
class SubspaceBasis:
    """Linearly independent matrices spanning a subspace of M_n."""

    ambient: int
    mats: list

    def __post_init__(self):
        self.mats = [as_cmatrix(m) for m in self.mats]
        n = self.ambient
        for m in self.mats:
            if m.shape != (n, n):
                raise LinalgError(f"basis matrix of shape {m.shape}, ambient {n}")
        v = self.vecs()
        gram = np.conj(v.T) @ v
        cond = np.linalg.cond(gram)
        if cond > 1e8:
            raise LinalgError(f"ill-conditioned subspace basis (gram cond {cond:.2e})")

    def vecs(self) -> np.ndarray:
        return np.stack([m.ravel() for m in self.mats], axis=1)

    def dim(self) -> int:
        return len(self.mats)

    def complement(self) -> list[np.ndarray]:
        """Orthonormal trace-orthogonal complement basis."""
        n = self.ambient
        v = self.vecs()
        q, _ = np.linalg.qr(v)
        proj = np.eye(n * n) - q @ np.conj(q.T)
        w, vecs = np.linalg.eigh((proj + np.conj(proj.T)) / 2.0)
        comp = [vecs[:, i].reshape(n, n) for i in range(n * n) if w[i] > 0.5]
        return comp

    def contains_matrix(self, x: np.ndarray, tol: float = 1e-10) -> bool:
        v = self.vecs()
        coef, res, *_ = np.linalg.lstsq(v, as_cmatrix(x).ravel(), rcond=None)
        recon = (v @ coef).reshape(self.ambient, self.ambient)
        return float(np.linalg.norm(recon - x)) <= tol * max(1.0, np.linalg.norm(x))


@dataclass
class ExtensionResult:
    extension: LinearMap
    restriction_residual: float
    upper: float
    subspace_lower: float
    gap: float
    certificate: object = None


def _dual_functionals(space: SubspaceBasis):
    """Matrices F_k with f_k(x) = sum_ij F_k[i,j] x[i,j] the dual basis of
    (subspace basis + orthonormal complement)."""
    n = space.ambient
    comp = space.complement()
    cols = [m.ravel() for m in space.mats] + [m.ravel() for m in comp]
    q = np.stack(cols, axis=1)
    qinv = np.linalg.inv(q)
    funcs = [qinv[k].reshape(n, n) for k in range(n * n)]
    return funcs, comp


def extend(space: SubspaceBasis, images: list, p,
           out_dim: int | None = None, tol: float = 1e-7,
           levels: int = 2, budget: SearchBudget = SearchBudget()) -> ExtensionResult:
    """Extend a map given on a subspace basis to the whole matrix space,
    minimizing the regular-norm upper bound over all extensions."""
    p = PExp.parse(p)
    n = space.ambient
    images = [as_cmatrix(v) for v in images]
    if len(images) != space.dim():
        raise LinalgError("one image per basis matrix required")
    m = out_dim if out_dim is not None else images[0].shape[0]

    funcs, comp = _dual_functionals(space)
    j0 = np.zeros((n * m, n * m), dtype=complex)
    for k, img in enumerate(images):
        j0 += np.kron(funcs[k], img)
    dirs = []
    for k in range(space.dim(), n * n):
        for r in range(m):
            for t in range(m):
                e = np.zeros((m, m), dtype=complex)
                e[r, t] = 1.0
                dirs.append(np.kron(funcs[k], e))

    if p.is_inf:
        ext_choi, upper, cert = _extend_inf(j0, dirs, n, m, tol)
    else:
        ext_choi, upper, cert = _extend_finite(j0, dirs, n, m, p, tol)
    ext = LinearMap(n, m, ext_choi)

    res = 0.0
    for base, img in zip(space.mats, images):
        scale = max(np.linalg.norm(img), 1.0)
        res = max(res, float(np.linalg.norm(ext(base) - img)) / scale)

    sub_lower = subspace_regular_lower(space, images, p, levels=levels, budget=budget)
    return ExtensionResult(extension=ext, restriction_residual=res, upper=upper,
                           subspace_lower=sub_lower, gap=upper - sub_lower,
                           certificate=cert)


def _extend_inf(j0, dirs, n, m, tol):
    from .cpmaps import _cb_program

    scale = max(float(np.linalg.norm(j0)), 1.0)
    b, g, t, theta = _cb_program(j0 / scale, n, m,
                                 extension_basis=[d / scale for d in dirs])
    prog = b.build()
    rep = conic.solve(prog, tol=min(tol, 1e-8))
    if not rep.ok:
        raise conic.SolverError(f"extension cb SDP status {rep.status}")
    th = prog.free_of(rep.x)[1:]
    choi = j0.copy()
    for v, d in enumerate(dirs):
        choi += complex(th[2 * v], th[2 * v + 1]) * d
    return choi, rep.primal * scale, "cb-norm SDP over extensions"


def _extend_finite(j0, dirs, n, m, p, tol):
    u0 = LinearMap(n, m, j0)
    blocks, coeffs, _ = _decompose_sdp(u0, tol, 50000, extension_dirs=dirs)
    choi = j0.copy()
    for c, d in zip(coeffs, dirs):
        choi += c * d
    blocks = _repair_blocks(blocks, choi)
    parts = [LinearMap(n, m, blk) for blk in blocks]
    cert = Decomposition(parts=parts, certificate=_geo_certificate(parts, p),
                         surrogate=0.0, p=p)
    return choi, cert.certificate, cert


def subspace_regular_lower(space: SubspaceBasis, images: list, p,
                           levels: int = 2,
                           budget: SearchBudget = SearchBudget()) -> float:
    """Sound lower bound on the regular norm of the map defined on the
    subspace only: amplified inputs are drawn inside (subspace x M_k)."""
    p = PExp.parse(p)
    n = space.ambient
    m = images[0].shape[0]
    s = space.dim()
    rng = rng_from(budget.seed)
    eye_coeff = None
    v = space.vecs()
    coef, *_ = np.linalg.lstsq(v, np.eye(n).ravel(), rcond=None)
    if np.linalg.norm((v @ coef).reshape(n, n) - np.eye(n)) <= 1e-10:
        eye_coeff = coef

    best = 0.0
    for k in range(1, levels + 1):
        gs = [np.eye(k)] + [complex_gaussian(rng, k) for _ in range(2)]
        cand_coeffs = []
        for a in range(s):
            e = np.zeros(s)
            e[a] = 1.0
            cand_coeffs.append(e)
        if eye_coeff is not None:
            cand_coeffs.append(eye_coeff)
        for _ in range(2):
            cand_coeffs.append(complex_gaussian(rng, s, 1).ravel())
        for coeffs in cand_coeffs:
            for g in gs:
                x_body = sum(c * np.kron(base, g)
                             for c, base in zip(coeffs, space.mats))
                img_body = sum(c * np.kron(imgmat, g)
                               for c, imgmat in zip(coeffs, images))
                x = BlockMatrix(n, k, x_body)
                den, _ = vnorm_upper(x, p, restarts=2, iters=40)
                if den <= 1e-14:
                    continue
                num = vnorm_lower(BlockMatrix(m, k, img_body), p,
                                  with_dual_witness=False)
                best = max(best, num / den)
    return best
