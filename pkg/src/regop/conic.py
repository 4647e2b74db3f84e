"""A small deterministic SDP kernel.

Solves   minimize  c'x   subject to  Ax = b,  x in K

where K is a product of (complex-Hermitian) PSD cones and free coordinates.
Hermitian blocks are stored in an isometric real parametrization ("svec":
diagonal entries, then sqrt(2) * Re / Im of the upper triangle), so the whole
iterate is one real vector and the cone projection is one Hermitian
eigendecomposition per block.

The method is ADMM with a fixed penalty and over-relaxation 1.5: the x-step
is the exact projection onto the affine constraints (AA' is factorized once),
the z-step is the cone projection.  Everything is deterministic for fixed
input data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .linalg import dagger


class SolverError(RuntimeError):
    pass


_LAYOUT: dict[int, tuple] = {}


def _layout(d: int):
    if d not in _LAYOUT:
        _LAYOUT[d] = np.triu_indices(d, k=1)
    return _LAYOUT[d]


def svec(x: np.ndarray) -> np.ndarray:
    """Isometric real vector of a Hermitian matrix (length d*d)."""
    d = x.shape[0]
    iu = _layout(d)
    out = np.empty(d * d)
    out[:d] = x.diagonal().real
    k = d * (d - 1) // 2
    off = x[iu]
    out[d:d + k] = math.sqrt(2.0) * off.real
    out[d + k:] = math.sqrt(2.0) * off.imag
    return out


def unsvec(v: np.ndarray, d: int) -> np.ndarray:
    iu = _layout(d)
    k = d * (d - 1) // 2
    x = np.zeros((d, d), dtype=complex)
    x[np.arange(d), np.arange(d)] = v[:d]
    off = (v[d:d + k] + 1j * v[d + k:]) / math.sqrt(2.0)
    x[iu] = off
    x[iu[1], iu[0]] = np.conj(off)
    return x


def _project_psd(x: np.ndarray) -> np.ndarray:
    w, q = np.linalg.eigh((x + dagger(x)) / 2.0)
    w = np.clip(w, 0.0, None)
    return (q * w) @ dagger(q)


def _basis_elem(d: int, s: int) -> np.ndarray:
    v = np.zeros(d * d)
    v[s] = 1.0
    return unsvec(v, d)


@dataclass
class SolveReport:
    primal: float
    dual: float
    primal_res: float
    dual_res: float
    gap: float
    iterations: int
    status: str
    x: np.ndarray = field(repr=False, default=None)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class ConicProgram:
    """Blocks plus sparse equality constraints; build with :class:`Builder`."""

    def __init__(self, psd_dims, n_free, rows, cols, vals, rhs, obj):
        self.psd_dims = list(psd_dims)
        self.n_free = n_free
        self.block_offsets = []
        off = 0
        for d in self.psd_dims:
            self.block_offsets.append(off)
            off += d * d
        self.free_offset = off
        self.n_vars = off + n_free
        m = len(rhs)
        self.A = sp.csr_matrix(
            (np.asarray(vals), (np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))),
            shape=(m, self.n_vars),
        )
        self.b = np.asarray(rhs, dtype=float)
        self.c = np.asarray(obj, dtype=float)

    def block_of(self, x: np.ndarray, handle: int) -> np.ndarray:
        d = self.psd_dims[handle]
        off = self.block_offsets[handle]
        return unsvec(x[off:off + d * d], d)

    def free_of(self, x: np.ndarray) -> np.ndarray:
        return x[self.free_offset:]

    def dump(self, path):
        """Debug dump of the program data (dense) as structured text."""
        import json

        doc = {
            "psd_dims": self.psd_dims,
            "n_free": self.n_free,
            "A": self.A.toarray().tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)


class Builder:
    """Assembles a ConicProgram from PSD blocks, free scalars and equality rows.

    Sign conventions: every equality is written  <terms> = rhs  with all
    variable terms on the left.
    """

    def __init__(self):
        self._psd_dims = []
        self._n_free = 0
        self._rows = []
        self._cols = []
        self._vals = []
        self._rhs = []
        self._obj = {}

    def psd(self, dim: int) -> int:
        self._psd_dims.append(dim)
        return len(self._psd_dims) - 1

    def free(self, count: int = 1) -> list[int]:
        idx = list(range(self._n_free, self._n_free + count))
        self._n_free += count
        return idx

    def add_row(self, psd_terms=(), free_terms=(), rhs: float = 0.0):
        """One equality row: sum <K_h, X_h> + sum coeff_i * t_i = rhs."""
        r = len(self._rhs)
        for handle, kmat in psd_terms:
            v = svec(np.asarray(kmat, dtype=complex))
            for j in np.nonzero(np.abs(v) > 0.0)[0]:
                self._rows.append(r)
                self._cols.append(("psd", handle, int(j)))
                self._vals.append(float(v[j]))
        for idx, coeff in free_terms:
            if coeff != 0.0:
                self._rows.append(r)
                self._cols.append(("free", idx, 0))
                self._vals.append(float(coeff))
        self._rhs.append(float(rhs))

    def eq_herm(self, psd_terms=(), free_mat_terms=(), target=None, dim: int | None = None):
        """d*d rows equating a Hermitian expression to ``target``:

            sum_h T_h(X_h) + sum_i t_i * M_i = target

        ``psd_terms`` holds (handle, transform) with ``transform`` the adjoint
        action on small-space basis elements (None = identity, a scalar s
        means s * E).  ``free_mat_terms`` holds (free index, Hermitian M).
        """
        if target is None:
            if dim is None:
                raise ValueError("need target or dim")
            target = np.zeros((dim, dim), dtype=complex)
        target = np.asarray(target, dtype=complex)
        d = target.shape[0]
        tvec = svec(target)
        fvecs = [(idx, svec(np.asarray(m, dtype=complex))) for idx, m in free_mat_terms]
        for s in range(d * d):
            e = _basis_elem(d, s)
            terms = []
            for handle, transform in psd_terms:
                if transform is None:
                    k = e
                elif np.isscalar(transform):
                    k = transform * e
                else:
                    k = transform(e)
                terms.append((handle, k))
            free = [(idx, fv[s]) for idx, fv in fvecs]
            self.add_row(terms, free, tvec[s])

    def pin_entries(self, handle: int, entries, free_mat_terms=()):
        """Pin complex entries of a Hermitian block:

            X[r, c] - sum_i t_i * M_i[r, c] = v     for (r, c, v) in entries

        Realized through the Hermitian functionals picking out Re and Im.
        """
        d = self._psd_dims[handle]
        for r, c, v in entries:
            v = complex(v)
            kre = np.zeros((d, d), dtype=complex)
            kre[r, c] += 0.5
            kre[c, r] += 0.5
            fre = [(idx, -np.asarray(m)[r, c].real) for idx, m in free_mat_terms]
            self.add_row([(handle, kre)], fre, v.real)
            if r != c:
                kim = np.zeros((d, d), dtype=complex)
                kim[r, c] += 0.5j
                kim[c, r] += -0.5j
                fim = [(idx, -np.asarray(m)[r, c].imag) for idx, m in free_mat_terms]
                self.add_row([(handle, kim)], fim, v.imag)

    def objective_psd(self, handle: int, kmat: np.ndarray):
        v = svec(np.asarray(kmat, dtype=complex))
        for j in np.nonzero(np.abs(v) > 0.0)[0]:
            key = ("psd", handle, int(j))
            self._obj[key] = self._obj.get(key, 0.0) + float(v[j])

    def objective_free(self, idx: int, coeff: float):
        key = ("free", idx, 0)
        self._obj[key] = self._obj.get(key, 0.0) + float(coeff)

    def build(self) -> ConicProgram:
        psd_total = sum(d * d for d in self._psd_dims)
        offsets = {}
        off = 0
        for h, d in enumerate(self._psd_dims):
            offsets[h] = off
            off += d * d

        def resolve(key):
            kind, handle, local = key
            if kind == "psd":
                return offsets[handle] + local
            return psd_total + handle

        cols = [resolve(k) for k in self._cols]
        obj = np.zeros(psd_total + self._n_free)
        for key, val in self._obj.items():
            obj[resolve(key)] = val
        return ConicProgram(self._psd_dims, self._n_free,
                            self._rows, cols, self._vals, self._rhs, obj)


def solve(prog: ConicProgram, tol: float = 1e-7, max_iter: int = 50000) -> SolveReport:
    """ADMM with exact affine projection; fixed penalty, over-relaxation 1.5."""
    n = prog.n_vars
    m_rows = prog.A.shape[0]
    c = prog.c.copy()
    c_scale = float(np.linalg.norm(c))
    if c_scale > 0:
        c = c / c_scale
    else:
        c_scale = 1.0

    if m_rows > 0:
        row_norms = np.sqrt(np.asarray(prog.A.multiply(prog.A).sum(axis=1)).ravel())
        row_norms[row_norms == 0] = 1.0
        d_scale = sp.diags(1.0 / row_norms)
        A = (d_scale @ prog.A).tocsr()
        b = prog.b / row_norms
        gram = (A @ A.T).tocsc() + 1e-12 * sp.eye(m_rows, format="csc")
        lu = spla.splu(gram, permc_spec="COLAMD")
        At = A.T.tocsr()

        def project_affine(v):
            w = lu.solve(A @ v - b)
            return v - At @ w, w
    else:
        A = None
        b = np.zeros(0)

        def project_affine(v):
            return v, np.zeros(0)

    rho = 1.0
    alpha = 1.5
    x = np.zeros(n)
    z = np.zeros(n)
    u = np.zeros(n)
    dz = np.zeros(n)

    def cone_project(v):
        out = v.copy()
        for h, d in enumerate(prog.psd_dims):
            off = prog.block_offsets[h]
            blk = unsvec(v[off:off + d * d], d)
            out[off:off + d * d] = svec(_project_psd(blk))
        return out

    b_scale = 1.0 + float(np.linalg.norm(b))
    status = "max-iter"
    it = 0
    nu = np.zeros(m_rows)
    check_every = 25
    for it in range(1, max_iter + 1):
        v = z - u - c / rho
        x, w = project_affine(v)
        x_rel = alpha * x + (1.0 - alpha) * z
        z_new = cone_project(x_rel + u)
        u = u + x_rel - z_new
        dz = z_new - z
        z = z_new
        if it % check_every == 0 or it == max_iter:
            if m_rows and it == check_every:
                # x is the exact affine projection, so a persistent equality
                # residual on x itself means the system is inconsistent
                if float(np.linalg.norm(A @ x - b)) > 1e-6 * b_scale:
                    status = "infeasible-suspected"
                    break
            nu = rho * w
            primal = float(c @ z) * c_scale
            dual = (-float(b @ nu) * c_scale) if m_rows else 0.0
            feas = float(np.linalg.norm(A @ z - b)) if m_rows else 0.0
            cons = float(np.linalg.norm(x - z))
            dual_res = rho * float(np.linalg.norm(dz))
            gap = abs(primal - dual) / (1.0 + abs(primal))
            scale_x = 1.0 + float(np.linalg.norm(z))
            if (feas <= tol * b_scale and cons <= tol * scale_x
                    and dual_res <= 10 * tol * scale_x and gap <= tol):
                status = "optimal"
                break

    primal = float(prog.c @ z)
    dual = (-float(b @ nu) * c_scale) if m_rows else primal
    feas = float(np.linalg.norm(A @ z - b)) if m_rows else 0.0
    cons = float(np.linalg.norm(x - z))
    gap = abs(primal - dual) / (1.0 + abs(primal))
    return SolveReport(primal=primal, dual=dual,
                       primal_res=max(feas, cons), dual_res=rho * float(np.linalg.norm(dz)),
                       gap=gap, iterations=it, status=status, x=z)
