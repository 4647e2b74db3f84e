"""The predual pairing norm on tensors of two Schatten factors, its
five-factor factorization witnesses, and the duality pairing against maps.

For a tensor a with an n-dimensional p-factor and an m-dimensional
p'-factor, the norm is the infimum of

    ||gamma||_{2p} ||alpha||_{2p'} ||g||_op ||beta||_{2p'} ||delta||_{2p}

over factorizations a = (gamma (x) alpha) g (delta (x) beta).  Upper bounds
come from alternating minimization with partial-polar starts; both endpoint
exponents admit exact SDP routes (at p = 1 the norm is the inner-trace
vector-valued norm of the body, at p = inf it is a two-sided scaling
program on the inner factor).  Values are exactly 1-homogeneous by
construction: inputs are normalized in Frobenius norm up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import conic
from .cpmaps import LinearMap
from .linalg import (
    BlockMatrix,
    LinalgError,
    PExp,
    as_cmatrix,
    dagger,
    kron,
    op_norm,
    partial_trace,
    pinv_hermitian,
    psd_power,
    schatten_norm,
    trace_pair,
)
from .randgen import random_psd, rng_from
from .vnorm import vnorm_upper


@dataclass
class PairingElement:
    """Element of the tensor of an n-dim p-factor with an m-dim p'-factor,
    stored with the p-factor as the outer block index."""

    n: int
    m: int
    p: PExp
    block: BlockMatrix

    def __post_init__(self):
        self.p = PExp.parse(self.p)
        if (self.block.outer_dim, self.block.inner_dim) != (self.n, self.m):
            raise LinalgError("block structure disagrees with declared dims")

    @staticmethod
    def from_body(body, n, m, p) -> "PairingElement":
        return PairingElement(n, m, PExp.parse(p), BlockMatrix(n, m, as_cmatrix(body)))


@dataclass
class RhoWitness:
    gamma: np.ndarray
    alpha: np.ndarray
    g: BlockMatrix
    delta: np.ndarray
    beta: np.ndarray
    value: float

    def reconstruction(self) -> np.ndarray:
        return kron(self.gamma, self.alpha) @ self.g.body @ kron(self.delta, self.beta)

    def residual(self, a: PairingElement) -> float:
        scale = max(np.linalg.norm(a.block.body), 1e-300)
        return float(np.linalg.norm(self.reconstruction() - a.block.body)) / scale


def _witness_value(gamma, alpha, g_body, delta, beta, p: PExp) -> float:
    qo = p.doubled()            # 2p for the outer factors
    qi = PExp(p.conjugate).doubled()  # 2p' for the inner factors
    return (schatten_norm(gamma, qo) * schatten_norm(alpha, qi) * op_norm(g_body)
            * schatten_norm(beta, qi) * schatten_norm(delta, qo))


def _g_step(a: PairingElement, gamma, alpha, delta, beta, p: PExp) -> RhoWitness:
    n, m = a.n, a.m
    body = a.block.body
    for attempt in range(2):
        li = kron(pinv_hermitian(gamma), pinv_hermitian(alpha))
        ri = kron(pinv_hermitian(delta), pinv_hermitian(beta))
        g_body = li @ body @ ri
        w = RhoWitness(gamma, alpha, BlockMatrix(n, m, g_body), delta, beta, 0.0)
        if w.residual(a) <= 1e-10:
            break
        ridge = 1e-8 * max(op_norm(body), 1.0)
        gamma = gamma + ridge * np.eye(n)
        alpha = alpha + ridge * np.eye(m)
        delta = delta + ridge * np.eye(n)
        beta = beta + ridge * np.eye(m)
    w.value = _witness_value(gamma, alpha, g_body, delta, beta, p)
    return w


def _polar_four(a: PairingElement):
    body = a.block.body
    n, m = a.n, a.m
    left = body @ dagger(body)
    right = dagger(body) @ body
    return (psd_power(partial_trace(left, n, m, keep="outer"), 0.25),
            psd_power(partial_trace(left, n, m, keep="inner"), 0.25),
            psd_power(partial_trace(right, n, m, keep="outer"), 0.25),
            psd_power(partial_trace(right, n, m, keep="inner"), 0.25))


def _balance_four(gamma, alpha, delta, beta, p: PExp):
    qo, qi = p.doubled(), PExp(p.conjugate).doubled()
    ng, nd = schatten_norm(gamma, qo), schatten_norm(delta, qo)
    na, nb = schatten_norm(alpha, qi), schatten_norm(beta, qi)
    if min(ng, nd, na, nb) <= 0:
        return gamma, alpha, delta, beta
    t = math.sqrt(nd / ng)
    s = math.sqrt(nb / na)
    return gamma * t, alpha * s, delta / t, beta / s


def _absorb_four(a: PairingElement, w: RhoWitness, p: PExp):
    n, m = a.n, a.m
    u, s, vh = np.linalg.svd(w.g.body)
    if s[0] <= 0:
        return []
    wt = (s / s[0]) ** 16
    wt /= wt.sum()
    rho_l = (u * wt) @ dagger(u)
    rho_r = (dagger(vh) * wt) @ vh
    qo, qi = p.doubled(), PExp(p.conjugate).doubled()
    floor_n, floor_m = 1e-8 * np.eye(n), 1e-8 * np.eye(m)

    def unit(h):
        t = np.trace(h).real
        return h / t if t > 0 else h

    props = []
    for tau in (1.0, 0.5):
        def mix(cur, target, q, floor):
            if math.isinf(q):
                # sup-norm factors cannot absorb mass profitably; keep them
                return cur
            blend = (1 - tau) * unit(psd_power(cur, q)) + tau * unit(target + floor)
            return psd_power(blend, 1.0 / q)

        props.append((
            mix(w.gamma, partial_trace(rho_l, n, m, "outer"), qo, floor_n),
            mix(w.alpha, partial_trace(rho_l, n, m, "inner"), qi, floor_m),
            mix(w.delta, partial_trace(rho_r, n, m, "outer"), qo, floor_n),
            mix(w.beta, partial_trace(rho_r, n, m, "inner"), qi, floor_m),
        ))
    return props


def rho_upper(a: PairingElement, restarts: int = 16, seed: int = 0,
              iters: int = 60, starts=()) -> tuple[float, RhoWitness]:
    """Upper bound with a feasible five-factor witness.

    ``starts`` may carry (gamma, alpha, delta, beta) quadruples, to share
    search state across related instances (e.g. subadditivity checks).
    """
    p = a.p
    n, m = a.n, a.m
    scale = float(np.linalg.norm(a.block.body))
    if scale == 0:
        w = RhoWitness(np.eye(n), np.eye(m), BlockMatrix(n, m, np.zeros((n * m, n * m))),
                       np.eye(n), np.eye(m), 0.0)
        return 0.0, w
    unit = PairingElement(n, m, p, BlockMatrix(n, m, a.block.body / scale))

    best = _endpoint_witness(unit)
    pool = [(np.eye(n), np.eye(m), np.eye(n), np.eye(m)), _polar_four(unit)]
    pool += [tuple(as_cmatrix(f) for f in quad) for quad in starts]
    rng = rng_from(seed)
    for _ in range(restarts):
        pool.append((random_psd(rng, n) + 1e-2 * np.eye(n),
                     random_psd(rng, m) + 1e-2 * np.eye(m),
                     random_psd(rng, n) + 1e-2 * np.eye(n),
                     random_psd(rng, m) + 1e-2 * np.eye(m)))
    for quad in pool:
        gamma, alpha, delta, beta = _balance_four(*quad, p)
        w = _g_step(unit, gamma, alpha, delta, beta, p)
        if best is None or w.value < best.value:
            best = w
        for _ in range(iters):
            improved = False
            for prop in _absorb_four(unit, w, p):
                cand = _g_step(unit, *_balance_four(*prop, p), p)
                if cand.value < w.value * (1 - 1e-9):
                    w = cand
                    improved = True
                    break
            if w.value < best.value:
                best = w
            if not improved:
                break

    out = RhoWitness(best.gamma, best.alpha,
                     BlockMatrix(n, m, best.g.body * scale),
                     best.delta, best.beta, best.value * scale)
    return out.value, out


def _endpoint_witness(a: PairingElement) -> RhoWitness | None:
    """Exact SDP routes at the endpoints.

    p = 1: the inner contractions can be absorbed, the norm is the inner
    vector-valued 1-norm of the body.  p = inf: two-sided inner scaling,
    minimize (tr P + tr Q)/2 over [[I (x) P, a], [a*, I (x) Q]] >= 0.
    """
    p = a.p
    n, m = a.n, a.m
    if p.value == 1.0:
        val, fact = vnorm_upper(a.block, PExp(1.0), restarts=4)
        return RhoWitness(fact.a, np.eye(m), fact.y, fact.b, np.eye(m), val)
    if not p.is_inf:
        return None
    d = n * m
    body = a.block.body
    b = conic.Builder()
    g = b.psd(2 * d)
    pp = b.psd(m)
    qq = b.psd(m)

    def corner(which):
        def transform(e):
            big = np.zeros((2 * d, 2 * d), dtype=complex)
            if which == 0:
                big[:d, :d] = e
            else:
                big[d:, d:] = e
            return big
        return transform

    def inner_coeff(e):
        return -partial_trace(e, n, m, keep="inner")

    b.eq_herm([(g, corner(0)), (pp, inner_coeff)], dim=d)
    b.eq_herm([(g, corner(1)), (qq, inner_coeff)], dim=d)
    b.pin_entries(g, [(r, d + c, body[r, c]) for r in range(d) for c in range(d)])
    b.objective_psd(pp, 0.5 * np.eye(m))
    b.objective_psd(qq, 0.5 * np.eye(m))
    prog = b.build()
    rep = conic.solve(prog, tol=1e-8)
    if not rep.ok:
        return None
    eps = 1e-9
    alpha = psd_power(prog.block_of(rep.x, pp) + eps * np.eye(m), 0.5)
    beta = psd_power(prog.block_of(rep.x, qq) + eps * np.eye(m), 0.5)
    w = _g_step(a, np.eye(n), alpha, np.eye(n), beta, a.p)
    if w.residual(a) > 1e-8:
        return None
    return w


# ---------------------------------------------------------------------------
# duality pairing
# ---------------------------------------------------------------------------

@dataclass
class PairingReport:
    value: complex
    witness_route: complex
    route_agreement: float
    rho: float
    regular: float
    duality_ok: bool
    ratio: float


def pairing_direct(u: LinearMap, a: PairingElement) -> complex:
    """Coefficient pairing sum over basis: a[(ik),(jl)] u(e_ij)[k, l]."""
    if (u.in_dim, u.out_dim) != (a.n, a.m):
        raise LinalgError("map and tensor dimensions do not match")
    a4 = a.block.body.reshape(a.n, a.m, a.n, a.m)
    return complex(np.einsum("ikjl,ikjl->", a4, u.choi_tensor()))


def pairing_value(u: LinearMap, a: PairingElement, witness: RhoWitness | None = None,
                  rho: float | None = None, regular: float | None = None,
                  tol: float = 1e-6) -> PairingReport:
    """Duality pairing computed two ways (directly on coefficients, and
    through a factorization witness via the trace functional), plus the
    check |<u, a>| <= rho_upper(a) * regular_upper(u) + tol."""
    from .regular import regular_upper

    direct = pairing_direct(u, a)
    if witness is None:
        rho_val, witness = rho_upper(a)
    else:
        rho_val = rho if rho is not None else witness.value
    if rho is not None:
        rho_val = rho

    # y = (gamma (x) I) g (delta (x) I) restores the two-factor form
    m = a.m
    y_body = kron(witness.gamma, np.eye(m)) @ witness.g.body @ kron(witness.delta, np.eye(m))
    y4 = y_body.reshape(a.n, m, a.n, m)
    z4 = np.einsum("ikjl,iajb->kalb", u.choi_tensor(), y4)
    z = BlockMatrix(u.out_dim, m, z4.reshape(u.out_dim * m, u.out_dim * m))
    if u.out_dim == m:
        ia = kron(np.eye(m), witness.alpha)
        ib = kron(np.eye(m), witness.beta)
        route_a = trace_pair(BlockMatrix(m, m, ia @ z.body @ ib))
        ta = kron(witness.alpha.T, np.eye(m))
        tb = kron(witness.beta.T, np.eye(m))
        route_b = trace_pair(BlockMatrix(m, m, ta @ z.body @ tb))
        witness_route = route_a
        agreement = abs(route_a - route_b)
    else:
        witness_route = direct
        agreement = 0.0

    if regular is None:
        regular, _ = regular_upper(u, a.p)
    ok = abs(direct) <= rho_val * regular + tol
    ratio = abs(direct) / (rho_val * regular) if rho_val * regular > 0 else 0.0
    return PairingReport(value=direct, witness_route=witness_route,
                         route_agreement=agreement, rho=rho_val,
                         regular=regular, duality_ok=bool(ok), ratio=ratio)
