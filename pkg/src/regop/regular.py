"""Regular-norm machinery: level-k amplification lower bounds, the
CP-decomposition SDP upper bound with its interpolation certificate, and the
commutative lattice cross-check.

Upper bounds.  Any splitting of a map into four completely positive parts
u = u1 - u2 + i(u3 - u4) bounds the regular norm by

    sum_j ||u_j(I)||^(1-theta) * ||u_j*(I)||^theta,       theta = 1/p,

because a CP map's regular norm is dominated by its operator norm, and its
operator norm interpolates between the two endpoint values, which are the
partial traces of the Choi matrix.  The SDP minimizes the (p-independent)
surrogate sum_j max(||u_j(I)||, ||u_j*(I)||); the geometric-mean certificate
is evaluated on the optimizer as a post-pass.  At p = inf the regular norm
equals the cb norm and is computed by the cb SDP instead.

Lower bounds.  For each amplification level k the bound is a maximum of
ratios  vnorm_lower((u (x) id)(x)) / vnorm_upper(x)  over optimized inputs;
at p = inf both vector norms collapse to operator norms and the search is a
monotone alternating ascent.  Per-level values are reported as a monotone
envelope (a level-k witness embeds into level k+1 by padding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import conic
from .cpmaps import LinearMap, adjoint_map, cb_norm, hs_adjoint, is_cp
from .linalg import (
    BlockMatrix,
    LinalgError,
    NormBracket,
    PExp,
    as_cmatrix,
    dagger,
    op_norm,
    schatten_norm,
)
from .randgen import complex_gaussian, rng_from
from .search import SearchBudget, opnorm_lower, schatten_ascent
from .vnorm import vnorm_lower, vnorm_upper

TRACE_TIEBREAK = 1e-8


@dataclass
class Decomposition:
    """Four CP parts recombining exactly to the decomposed map."""

    parts: list  # [u1, u2, u3, u4]
    certificate: float
    surrogate: float  # SDP objective sum_j max(partial-trace norms)
    p: PExp

    def recombined(self) -> LinearMap:
        c = (self.parts[0].choi - self.parts[1].choi
             + 1j * (self.parts[2].choi - self.parts[3].choi))
        return LinearMap(self.parts[0].in_dim, self.parts[0].out_dim, c)


def _jordan_split(h: np.ndarray):
    w, v = np.linalg.eigh((h + dagger(h)) / 2.0)
    pos = (v * np.clip(w, 0, None)) @ dagger(v)
    neg = (v * np.clip(-w, 0, None)) @ dagger(v)
    return pos, neg


def _geo_certificate(parts, p: PExp) -> float:
    th = p.theta
    total = 0.0
    for part in parts:
        a = op_norm(part.on_identity())
        c = op_norm(part.adjoint_on_identity())
        if a <= 0 or c <= 0:
            continue
        total += a ** (1.0 - th) * c ** th
    return total


_DECOMP_CACHE: dict = {}


def _decompose_sdp(u: LinearMap, tol: float, max_iter: int, extension_dirs=()):
    """Solve the 4-block decomposition SDP; returns raw PSD blocks and, when
    extension directions are present, the optimal direction coefficients."""
    n, m = u.in_dim, u.out_dim
    d = n * m
    scale = float(np.linalg.norm(u.choi))
    dirs = [as_cmatrix(j) for j in extension_dirs]
    if scale == 0 and not dirs:
        z = np.zeros((d, d), dtype=complex)
        return [z, z, z, z], [], 0.0
    scale = scale if scale > 0 else 1.0
    J = u.choi / scale

    b = conic.Builder()
    cs = [b.psd(d) for _ in range(4)]
    slack_out = [b.psd(m) for _ in range(4)]
    slack_in = [b.psd(n) for _ in range(4)]
    ts = b.free(4)
    theta = b.free(2 * len(dirs)) if dirs else []

    herm = (J + dagger(J)) / 2.0
    anti = (J - dagger(J)) / (2.0j)
    free_herm = []
    free_anti = []
    for v, jv in enumerate(dirs):
        jv = jv / scale
        for w, jj in ((2 * v, jv), (2 * v + 1, 1j * jv)):
            free_herm.append((theta[w], -(jj + dagger(jj)) / 2.0))
            free_anti.append((theta[w], -(jj - dagger(jj)) / 2.0j))
    b.eq_herm([(cs[0], None), (cs[1], -1.0)], free_herm, target=herm)
    b.eq_herm([(cs[2], None), (cs[3], -1.0)], free_anti, target=anti)

    for j in range(4):
        # u_j(I) + S_out = t_j I_m   and   u_j*(I) + S_in = t_j I_n
        def ptr_in_adj(e):
            return np.kron(np.eye(n), e)

        def ptr_out_adj(e):
            return np.kron(e, np.eye(m))

        b.eq_herm([(cs[j], ptr_in_adj), (slack_out[j], None)],
                  [(ts[j], -np.eye(m))], dim=m)
        b.eq_herm([(cs[j], ptr_out_adj), (slack_in[j], None)],
                  [(ts[j], -np.eye(n))], dim=n)
        b.objective_free(ts[j], 1.0)
        b.objective_psd(cs[j], TRACE_TIEBREAK * np.eye(d))

    prog = b.build()
    rep = conic.solve(prog, tol=tol, max_iter=max_iter)
    if rep.status == "max-iter":
        # best effort iterate; the exact repair below keeps it feasible
        pass
    elif not rep.ok:
        raise conic.SolverError(f"decomposition SDP status {rep.status}")
    blocks = [prog.block_of(rep.x, h) * scale for h in cs]
    coeffs = []
    if dirs:
        # the direction matrices were scaled along with J, so the scalar
        # coefficients transfer to the unscaled directions unchanged
        th = prog.free_of(rep.x)[-2 * len(dirs):]
        coeffs = [complex(th[2 * v], th[2 * v + 1]) for v in range(len(dirs))]
    surrogate = float(sum(prog.free_of(rep.x)[:4])) * scale
    return blocks, coeffs, surrogate


def _repair_blocks(blocks, target_choi):
    """Shift the PSD blocks by the Jordan split of the equality residual so
    the recombination is exact to rounding; parts stay PSD."""
    c = blocks[0] - blocks[1] + 1j * (blocks[2] - blocks[3])
    r = target_choi - c
    hp, hn = _jordan_split((r + dagger(r)) / 2.0)
    ap, an = _jordan_split((r - dagger(r)) / 2.0j)
    return [blocks[0] + hp, blocks[1] + hn, blocks[2] + ap, blocks[3] + an]


def decompose_cp(u: LinearMap, p, tol: float = 1e-7,
                 max_iter: int = 50000) -> Decomposition:
    """Optimal four-part CP decomposition with its regular-norm certificate.

    The SDP itself does not depend on p (only the certificate does), so the
    solve is cached per Choi matrix.
    """
    p = PExp.parse(p)
    key = (u.choi.tobytes(), u.in_dim, u.out_dim, tol)
    if key not in _DECOMP_CACHE:
        blocks, _, surrogate = _decompose_sdp(u, tol, max_iter)
        blocks = _repair_blocks(blocks, u.choi)
        _DECOMP_CACHE[key] = (blocks, surrogate)
    blocks, surrogate = _DECOMP_CACHE[key]
    parts = [LinearMap(u.in_dim, u.out_dim, blk) for blk in blocks]
    return Decomposition(parts=parts, certificate=_geo_certificate(parts, p),
                         surrogate=surrogate, p=p)


def regular_upper(u: LinearMap, p, tol: float = 1e-7,
                  max_iter: int = 50000):
    """Sound upper bound on the regular norm: the cb norm at p = inf,
    otherwise the decomposition certificate.  Returns (value, certificate)."""
    p = PExp.parse(p)
    if p.is_inf:
        return cb_norm(u, tol=min(tol, 1e-8), max_iter=max_iter), "cb-norm SDP"
    dec = decompose_cp(u, p, tol=tol, max_iter=max_iter)
    return dec.certificate, dec


# ---------------------------------------------------------------------------
# lower bounds
# ---------------------------------------------------------------------------

@dataclass
class RegularReport:
    p: PExp
    levels: list[float]
    lower: float
    lower_level: int
    lower_witness: BlockMatrix | None
    upper: float | None = None
    upper_certificate: object = None

    def bracket(self) -> NormBracket:
        return NormBracket(lower=self.lower, upper=self.upper,
                           lower_witness=f"level-{self.lower_level} amplified input",
                           upper_witness=self.upper_certificate)


def _apply_tensor(u: LinearMap, x: BlockMatrix) -> BlockMatrix:
    """(u (x) id)(x) for x with outer factor in u's input space."""
    if x.outer_dim != u.in_dim:
        raise LinalgError("outer dimension does not match the map input")
    n, k = x.outer_dim, x.inner_dim
    x4 = x.body.reshape(n, k, n, k)
    z4 = np.einsum("ikjl,iajb->kalb", u.choi_tensor(), x4)
    m = u.out_dim
    return BlockMatrix(m, k, z4.reshape(m * k, m * k))


def _pad_witness(x: BlockMatrix, k: int) -> BlockMatrix:
    """Corner-embed an inner factor of size k0 into size k (complete isometry)."""
    n, k0 = x.outer_dim, x.inner_dim
    body = np.zeros((n * k, n * k), dtype=complex)
    blocks = x.blocks()
    for i in range(n):
        for j in range(n):
            body[i * k:i * k + k0, j * k:j * k + k0] = blocks[i, j]
    return BlockMatrix(n, k, body)


def _level_candidates(u: LinearMap, k: int, prev: BlockMatrix | None,
                      rng) -> list[BlockMatrix]:
    n = u.in_dim
    cands = [BlockMatrix(n, k, np.eye(n * k))]
    if k == n:
        ent = np.zeros((n * k, n * k), dtype=complex)
        swap = np.zeros((n * k, n * k), dtype=complex)
        for i in range(n):
            for j in range(n):
                ent[i * k + i, j * k + j] = 1.0
                swap[i * k + j, j * k + i] = 1.0
        cands.append(BlockMatrix(n, k, ent))
        cands.append(BlockMatrix(n, k, swap))
    if prev is not None and prev.inner_dim <= k:
        cands.append(_pad_witness(prev, k))
    for _ in range(3):
        cands.append(BlockMatrix(n, k, complex_gaussian(rng, n * k)))
    for _ in range(2):
        c = complex_gaussian(rng, n)
        g = complex_gaussian(rng, k)
        cands.append(BlockMatrix.from_tensor(c, g))
    return cands


def _ratio(u: LinearMap, x: BlockMatrix, p: PExp) -> float:
    den, _ = vnorm_upper(x, p, restarts=2, iters=40)
    if den <= 0:
        return 0.0
    num = vnorm_lower(_apply_tensor(u, x), p, with_dual_witness=False)
    return num / den


def _level_lower_inf(u: LinearMap, k: int, prev, budget: SearchBudget):
    amp = u.tensor_id(k)
    adj = adjoint_map(amp)
    cands = [c.body for c in _level_candidates(u, k, prev, rng_from(budget.seed))]
    val, x = opnorm_lower(
        lambda t: amp(t),
        lambda eta, xi: adj(np.outer(np.conj(eta), xi)),
        u.in_dim * k, budget, cands)
    return val, BlockMatrix(u.in_dim, k, x) if x is not None else None


def _level_lower_p(u: LinearMap, k: int, p: PExp, prev, budget: SearchBudget):
    rng = rng_from(budget.seed)
    best_val, best_x = 0.0, None
    for x in _level_candidates(u, k, prev, rng):
        val = _ratio(u, x, p)
        if val > best_val:
            best_val, best_x = val, x
    # local polish of the best input by accepted random perturbations
    if best_x is not None:
        step = 0.3
        for _ in range(budget.iters // 4):
            pert = complex_gaussian(rng, u.in_dim * k)
            cand = BlockMatrix(u.in_dim, k,
                               best_x.body + step * pert * np.linalg.norm(best_x.body)
                               / max(np.linalg.norm(pert), 1e-300))
            val = _ratio(u, cand, p)
            if val > best_val:
                best_val, best_x = val, cand
            else:
                step *= 0.7
                if step < 1e-3:
                    break
    return best_val, best_x


def regular_lower(u: LinearMap, p, levels: int = 3,
                  budget: SearchBudget = SearchBudget()) -> RegularReport:
    """Per-level sound lower bounds on the regular norm, reported as a
    monotone envelope over amplification levels 1..levels."""
    p = PExp.parse(p)
    if levels < 1:
        raise LinalgError("need at least one amplification level")
    vals: list[float] = []
    best_val, witness, best_level = -1.0, None, 1
    prev = None
    for k in range(1, levels + 1):
        b = budget.with_seed((budget.seed, k))
        if p.is_inf:
            val, x = _level_lower_inf(u, k, prev, b)
        else:
            val, x = _level_lower_p(u, k, p, prev, b)
        if x is not None:
            prev = x
        if val > best_val:
            best_val, witness, best_level = val, x, k
        vals.append(max(val, vals[-1]) if vals else val)
    return RegularReport(p=p, levels=vals, lower=vals[-1],
                         lower_level=best_level, lower_witness=witness)


def regular_bracket(u: LinearMap, p, levels: int = 3,
                    budget: SearchBudget = SearchBudget(),
                    tol: float = 1e-7) -> RegularReport:
    rep = regular_lower(u, p, levels=levels, budget=budget)
    upper, cert = regular_upper(u, p, tol=tol)
    rep.upper = upper
    rep.upper_certificate = cert
    return rep


def amplification_lower(u: LinearMap, p, levels: int = 3,
                        budget: SearchBudget = SearchBudget()) -> float:
    """Lower bound on the cb norm through flat Schatten amplifications
    (the iterated vector-valued space over a tensor index is plainly the
    bigger Schatten space, so the amplified norm is a flat p -> p norm)."""
    p = PExp.parse(p)
    best = 0.0
    for k in range(1, levels + 1):
        amp = u.tensor_id(k)
        b = budget.with_seed((budget.seed, 1000 + k))
        if p.is_inf:
            adj = adjoint_map(amp)
            val, _ = opnorm_lower(
                lambda t: amp(t),
                lambda eta, xi: adj(np.outer(np.conj(eta), xi)),
                amp.in_dim, b, [np.eye(amp.in_dim)])
        else:
            hadj = hs_adjoint(amp)
            val, _ = schatten_ascent(
                lambda t: amp(t), lambda g: hadj(g), amp.in_dim, p, b,
                [np.eye(amp.in_dim)])
        best = max(best, val)
    return best


# ---------------------------------------------------------------------------
# lattice cross-check
# ---------------------------------------------------------------------------

def lattice_matrix(u: LinearMap, tol: float = 1e-10) -> np.ndarray:
    """The matrix acting on diagonals: M[i, j] = u(e_jj)[i, i].

    Rejects maps that do not send diagonal matrices to diagonal matrices.
    """
    n, m = u.in_dim, u.out_dim
    mat = np.zeros((m, n), dtype=complex)
    for j in range(n):
        e = np.zeros((n, n))
        e[j, j] = 1.0
        img = u(e)
        off = img - np.diag(np.diag(img))
        if np.abs(off).max(initial=0.0) > tol * max(1.0, np.abs(img).max(initial=0.0)):
            raise LinalgError("map is not diagonal-preserving")
        mat[:, j] = np.diag(img)
    return mat


def embed_lattice_map(mat: np.ndarray) -> LinearMap:
    """The matrix on diagonals, viewed as a map on full matrix space by
    compressing to the diagonal on both sides."""
    mat = as_cmatrix(mat)
    m, n = mat.shape
    return LinearMap.from_action(lambda x: np.diag(mat @ np.diag(x)), n, m)


def lattice_regular_oracle(u: LinearMap, p, restarts: int = 12,
                           seed: int = 0) -> float:
    """|| |M| ||_{l_p -> l_p} for the diagonal action of a diagonal-preserving
    map: brute force over sign patterns at the endpoints, projected power
    ascent at interior p."""
    p = PExp.parse(p)
    mat = np.abs(lattice_matrix(u))
    m, n = mat.shape
    if p.is_inf:
        best = 0.0
        for bits in range(1 << n):
            x = np.array([1.0 if bits & (1 << i) else -1.0 for i in range(n)])
            best = max(best, float(np.abs(mat @ x).max()))
        return best
    if p.value == 1.0:
        best = 0.0
        for j in range(n):
            for s in (1.0, -1.0):
                best = max(best, float(np.abs(mat[:, j] * s).sum()))
        return best
    rng = rng_from(seed)
    pv = p.value

    def pnorm(v):
        return float((np.abs(v) ** pv).sum() ** (1.0 / pv))

    best = 0.0
    starts = [np.ones(n)] + [np.abs(rng.standard_normal(n)) for _ in range(restarts)]
    for x in starts:
        x = x / pnorm(x)
        val = pnorm(mat @ x)
        for _ in range(200):
            y = mat @ x
            grad = mat.T @ (y ** (pv - 1.0))
            x_new = grad ** (1.0 / (pv - 1.0)) if pv > 1 else grad
            nrm = pnorm(x_new)
            if nrm <= 0:
                break
            x_new = x_new / nrm
            val_new = pnorm(mat @ x_new)
            if val_new <= val * (1 + 1e-13):
                break
            x, val = x_new, val_new
        best = max(best, val)
    return best
