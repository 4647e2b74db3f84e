"""The acceptance suite: fourteen numbered criteria, each deterministic for
a fixed seed, each returning a pass/fail verdict plus detail lines.

Every tolerance below is fixed here, once.  Checks that the theory
guarantees only in one direction (sound bounds) are asserted in that
direction; quantities the package measures but cannot certify (duality
ratios, interior-exponent subadditivity defects of non-convex upper bounds)
are reported in the details without deciding the verdict, and say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cpmaps import LinearMap, adjoint_map, cb_norm, is_cp
from .extension import SubspaceBasis, extend
from .linalg import BlockMatrix, PExp, dagger, kron, op_norm, schatten_norm, trace_pair
from .randgen import (
    complex_gaussian,
    random_block,
    random_cp_choi,
    random_map_choi,
    random_unitary,
    rng_from,
)
from .regular import (
    amplification_lower,
    decompose_cp,
    embed_lattice_map,
    lattice_regular_oracle,
    regular_bracket,
    regular_lower,
    regular_upper,
)
from .rho import PairingElement, pairing_direct, pairing_value, rho_upper
from .search import SearchBudget
from .vnorm import fubini_reshuffle, vnorm_bracket, vnorm_lower, vnorm_upper

INF = math.inf


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    details: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} criterion {self.index:02d}: {self.name}"


def _sub_rng(seed, index):
    return rng_from((int(seed), int(index)))


def _rand_map(rng, n, m=None) -> LinearMap:
    m = n if m is None else m
    return LinearMap(n, m, random_map_choi(rng, n, m))


def _rand_cp(rng, n) -> LinearMap:
    return LinearMap(n, n, random_cp_choi(rng, n, n))


# ---------------------------------------------------------------------------

def criterion_01(seed=7) -> CriterionResult:
    """Endpoint collapse at p = inf: the upper bound equals the cb norm and
    the level-2 lower bound recovers at least 99 percent of it."""
    rng = _sub_rng(seed, 1)
    details, ok = [], True
    worst_rel, worst_ratio = 0.0, 1.0
    for i in range(20):
        u = _rand_map(rng, 2)
        cb = cb_norm(u)
        up, _ = regular_upper(u, INF)
        rel = abs(up - cb) / cb
        lo = regular_lower(u, INF, levels=2,
                           budget=SearchBudget(restarts=8, iters=60, seed=(seed, 1, i))).lower
        ratio = lo / cb
        worst_rel = max(worst_rel, rel)
        worst_ratio = min(worst_ratio, ratio)
        if rel > 1e-4 or ratio < 0.99:
            ok = False
    details.append(f"max |upper - cb|/cb = {worst_rel:.3e} (tol 1e-4)")
    details.append(f"min lower/cb at K=2 = {worst_ratio:.6f} (need >= 0.99)")
    return CriterionResult(1, "endpoint collapse of the regular bracket", ok, details)


def criterion_02(seed=7) -> CriterionResult:
    """Transpose benchmark on 2x2 matrices."""
    t = LinearMap.transpose_map(2)
    verdict = is_cp(t)
    cb = cb_norm(t)
    rep = regular_bracket(t, INF, levels=2,
                          budget=SearchBudget(restarts=8, iters=60, seed=(seed, 2)))
    ok = (not verdict.is_cp and abs(verdict.margin + 1.0) <= 1e-9
          and abs(cb - 2.0) <= 1e-4
          and rep.lower <= 2.0 + 1e-9 and rep.upper >= 2.0 - 1e-4)
    details = [
        f"is_cp margin = {verdict.margin:.12f} (want -1 within 1e-9)",
        f"cb norm = {cb:.8f} (want 2 within 1e-4)",
        f"regular bracket at p=inf = [{rep.lower:.8f}, {rep.upper:.8f}] (must contain 2)",
    ]
    return CriterionResult(2, "transpose benchmark", ok, details)


def criterion_03(seed=7) -> CriterionResult:
    """CP maps: upper bound below max(||u(I)||, ||u*(I)||), bracket sound."""
    rng = _sub_rng(seed, 3)
    details, ok = [], True
    worst_excess, worst_gap = -math.inf, -math.inf
    for i in range(20):
        n = 2 if i < 10 else 3
        u = _rand_cp(rng, n)
        cap = max(op_norm(u.on_identity()), op_norm(u.adjoint_on_identity()))
        for p in (1, 2, 4, INF):
            up, _ = regular_upper(u, p)
            lo = regular_lower(u, p, levels=2,
                               budget=SearchBudget(restarts=4, iters=24,
                                                   seed=(seed, 3, i))).lower
            worst_excess = max(worst_excess, up - cap)
            worst_gap = max(worst_gap, lo - up)
            if up > cap + 1e-4 or lo > up + 1e-5:
                ok = False
    details.append(f"max upper - max(||u(I)||,||u*(I)||) = {worst_excess:.3e} (tol 1e-4)")
    details.append(f"max lower - upper = {worst_gap:.3e} (tol 1e-5)")
    return CriterionResult(3, "CP bound on the regular norm", ok, details)


def _c4_instances(seed):
    rng = _sub_rng(seed, 4)
    return [_rand_map(rng, 2) for _ in range(10)]


def criterion_04(seed=7) -> CriterionResult:
    """Adjoint symmetry: brackets of (u, p) and (u*, p') overlap."""
    details, ok = [], True
    maps = _c4_instances(seed)
    for i, u in enumerate(maps):
        ua = adjoint_map(u)
        for p in (4 / 3, 2, 4):
            q = PExp(p).conjugate
            bu = regular_bracket(u, p, levels=2,
                                 budget=SearchBudget(restarts=4, iters=24,
                                                     seed=(seed, 4, i, 0)))
            ba = regular_bracket(ua, q, levels=2,
                                 budget=SearchBudget(restarts=4, iters=24,
                                                     seed=(seed, 4, i, 1)))
            if not bu.bracket().overlaps(ba.bracket(), widen=1e-4):
                ok = False
                details.append(
                    f"instance {i}, p={p}: [{bu.lower:.6f},{bu.upper:.6f}] vs "
                    f"adjoint [{ba.lower:.6f},{ba.upper:.6f}] disjoint")
    if ok:
        details.append("all 10 instances overlap at p in {4/3, 2, 4} after 1e-4 widening")
    return CriterionResult(4, "adjoint symmetry of brackets", ok, details)


def criterion_05(seed=7) -> CriterionResult:
    """Amplified flat-Schatten lower bound never exceeds the regular upper."""
    details, ok = [], True
    worst = -math.inf
    maps = _c4_instances(seed)
    for i, u in enumerate(maps):
        for p in (4 / 3, 2, 4):
            amp = amplification_lower(u, p, levels=2,
                                      budget=SearchBudget(restarts=6, iters=40,
                                                          seed=(seed, 5, i)))
            up, _ = regular_upper(u, p)
            worst = max(worst, amp - up)
            if amp > up + 1e-4:
                ok = False
    details.append(f"max amplification lower - regular upper = {worst:.3e} (tol 1e-4)")
    return CriterionResult(5, "cb-amplification below the regular upper bound", ok, details)


def criterion_06(seed=7) -> CriterionResult:
    """Vector norm endpoint exactness at p = inf."""
    rng = _sub_rng(seed, 6)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 4))
        x = random_block(rng, n, m)
        ref = op_norm(x.body)
        up, _ = vnorm_upper(x, INF)
        lo = vnorm_lower(x, INF)
        worst = max(worst, abs(up - ref), abs(lo - ref))
    ok = worst <= 1e-6
    return CriterionResult(6, "vector-norm endpoint exactness",
                           ok, [f"max deviation from operator norm = {worst:.3e} (tol 1e-6)"])


def criterion_07(seed=7) -> CriterionResult:
    """Crossnorm on elementary tensors at p in {1, 2, 3}."""
    rng = _sub_rng(seed, 7)
    details, ok = [], True
    worst_up, worst_lo = -math.inf, math.inf
    for i in range(10):
        a0 = complex_gaussian(rng, 2)
        e = complex_gaussian(rng, 2)
        x = BlockMatrix.from_tensor(a0, e)
        for p in (1, 2, 3):
            target = schatten_norm(a0, p) * op_norm(e)
            up, _ = vnorm_upper(x, p, restarts=4, seed=(seed, 7, i))
            lo = vnorm_lower(x, p)
            worst_up = max(worst_up, up - target)
            worst_lo = min(worst_lo, lo / target)
            if up > target + 1e-4 or lo < 0.9 * target:
                ok = False
    details.append(f"max upper - crossnorm = {worst_up:.3e} (tol 1e-4)")
    details.append(f"min lower/crossnorm = {worst_lo:.6f} (need >= 0.9)")
    return CriterionResult(7, "crossnorm on elementary tensors", ok, details)


def criterion_08(seed=7) -> CriterionResult:
    """Brackets are stable under the outer-factor reshuffle."""
    rng = _sub_rng(seed, 8)
    details, ok = [], True
    for i in range(10):
        x = random_block(rng, 4, 2)
        y = fubini_reshuffle(x, (2, 2))
        bx = vnorm_bracket(x, 2, restarts=6, seed=(seed, 8, i, 0))
        by = vnorm_bracket(y, 2, restarts=6, seed=(seed, 8, i, 1))
        if not bx.overlaps(by, widen=1e-4):
            ok = False
            details.append(
                f"instance {i}: [{bx.lower:.6f},{bx.upper:.6f}] vs "
                f"reshuffled [{by.lower:.6f},{by.upper:.6f}] disjoint")
    if ok:
        details.append("all 10 reshuffled brackets overlap after 1e-4 widening")
    return CriterionResult(8, "reshuffle invariance of brackets", ok, details)


def criterion_09(seed=7) -> CriterionResult:
    """Trace-pairing inequality and the two conjugation identities."""
    rng = _sub_rng(seed, 9)
    details, ok = [], True
    worst_ineq, worst_conj, worst_elem = -math.inf, 0.0, 0.0
    for i in range(50):
        m = 2
        z = random_block(rng, m, m)
        tp = abs(trace_pair(z))
        up, _ = vnorm_upper(z, 1, restarts=2, seed=(seed, 9, i))
        worst_ineq = max(worst_ineq, tp - up)
        if tp > up + 1e-6:
            ok = False
        alpha = complex_gaussian(rng, m)
        beta = complex_gaussian(rng, m)
        ident = np.eye(m)
        left = trace_pair(BlockMatrix(m, m, kron(alpha, ident) @ z.body @ kron(beta, ident)))
        right = trace_pair(BlockMatrix(m, m, kron(ident, alpha.T) @ z.body @ kron(ident, beta.T)))
        worst_conj = max(worst_conj, abs(left - right))
        if abs(left - right) > 1e-9:
            ok = False
        a = complex_gaussian(rng, m)
        b = complex_gaussian(rng, m)
        elem = trace_pair(BlockMatrix.from_tensor(a, b))
        worst_elem = max(worst_elem, abs(elem - np.trace(a.T @ b)))
        if abs(elem - np.trace(a.T @ b)) > 1e-10:
            ok = False
    details.append(f"max |trace_pair| - upper(p=1) = {worst_ineq:.3e} (tol 1e-6)")
    details.append(f"max conjugation-identity mismatch = {worst_conj:.3e} (tol 1e-9)")
    details.append(f"max elementary-tensor trace mismatch = {worst_elem:.3e} (tol 1e-10)")
    return CriterionResult(9, "trace pairing inequality and identities", ok, details)


def _duality_candidates(rng, n, count):
    """CP candidate maps with cheap sound upper bounds on the regular norm."""
    cands = []
    for _ in range(count // 2):
        v = random_unitary(rng, n)
        cands.append((LinearMap.from_kraus([v], n, n), 1.0))
    for _ in range(count - count // 2):
        a = complex_gaussian(rng, n)
        u = LinearMap.from_kraus([a], n, n)
        cands.append((u, op_norm(a) ** 2))
    return cands


def criterion_10(seed=7) -> CriterionResult:
    """Duality inequality, plus the measured (soft, reported) duality ratio."""
    rng = _sub_rng(seed, 10)
    details, ok = [], True
    worst = -math.inf
    strong = 0
    total = 0
    for i in range(20):
        p = 2 if i < 10 else 3
        a = PairingElement.from_body(complex_gaussian(rng, 4), 2, 2, p)
        rho_val, wit = rho_upper(a, restarts=8, seed=(seed, 10, i))
        u = _rand_map(rng, 2)
        rep = pairing_value(u, a, witness=wit, rho=rho_val)
        worst = max(worst, abs(rep.value) - rho_val * rep.regular)
        if abs(rep.value) > rho_val * rep.regular + 1e-5:
            ok = False
        if rep.route_agreement > 1e-9:
            ok = False
            details.append(f"instance {i}: pairing routes disagree by {rep.route_agreement:.2e}")
        best_u, best_surr = None, 0.0
        for cand, bound in _duality_candidates(rng, 2, 200):
            val = abs(pairing_direct(cand, a))
            surr = val / (rho_val * bound) if bound > 0 else 0.0
            if surr > best_surr:
                best_surr, best_u = surr, cand
        ratio = 0.0
        if best_u is not None:
            honest, _ = regular_upper(best_u, p)
            ratio = abs(pairing_direct(best_u, a)) / (rho_val * honest)
        total += 1
        if ratio > 0.5:
            strong += 1
    details.append(f"max |<u,a>| - rho*upper = {worst:.3e} (tol 1e-5)")
    details.append(
        f"measured duality ratio > 0.5 on {strong}/{total} instances "
        f"(reported, soft threshold; does not decide the verdict)")
    return CriterionResult(10, "duality inequality for the pairing norm", ok, details)


def criterion_11(seed=7) -> CriterionResult:
    """Decomposition into four CP parts: exactness and certificate equality."""
    rng = _sub_rng(seed, 11)
    details, ok = [], True
    worst_margin, worst_recon, worst_cert = 0.0, 0.0, 0.0
    for i in range(20):
        u = _rand_map(rng, 2)
        dec = decompose_cp(u, 2)
        for part in dec.parts:
            worst_margin = min(worst_margin, is_cp(part, tol=1e-7).margin)
            if not is_cp(part, tol=1e-7).is_cp:
                ok = False
        recon = np.linalg.norm(dec.recombined().choi - u.choi)
        worst_recon = max(worst_recon, recon)
        if recon > 1e-7:
            ok = False
        up, _ = regular_upper(u, 2)
        worst_cert = max(worst_cert, abs(up - dec.certificate))
        if abs(up - dec.certificate) > 1e-6:
            ok = False
    details.append(f"min CP margin over 80 parts = {worst_margin:.3e} (tol -1e-7)")
    details.append(f"max recombination residual = {worst_recon:.3e} (tol 1e-7)")
    details.append(f"max |certificate - upper| = {worst_cert:.3e} (tol 1e-6)")
    return CriterionResult(11, "four-part CP decomposition exactness", ok, details)


def criterion_12(seed=7) -> CriterionResult:
    """Extensions from a one-dimensional span and from the triangular
    subspace: exact restriction and small certified gap."""
    rng = _sub_rng(seed, 12)
    details, ok = [], True

    def e11():
        e = np.zeros((2, 2))
        e[0, 0] = 1.0
        return e

    worst_res, worst_span_gap, worst_tri_rel = 0.0, -math.inf, -math.inf
    for i in range(5):
        v = complex_gaussian(rng, 2, 1).ravel()
        v /= np.linalg.norm(v)
        lam = float(1.0 + rng.random()) * (1 if i % 2 == 0 else -1)
        image = lam * np.outer(v, np.conj(v))
        basis = SubspaceBasis(2, [e11()])
        for p in (1, 2, INF):
            res = extend(basis, [image], p,
                         budget=SearchBudget(restarts=4, iters=24, seed=(seed, 12, i)))
            worst_res = max(worst_res, res.restriction_residual)
            worst_span_gap = max(worst_span_gap, res.gap)
            if res.restriction_residual > 1e-8 or res.gap > 1e-3:
                ok = False
    for i in range(5):
        us = [random_unitary(rng, 2) for _ in range(2)]
        chan = LinearMap.from_kraus([w / math.sqrt(2) for w in us], 2, 2)
        tri = SubspaceBasis(2, [e11(),
                                np.array([[0.0, 1.0], [0.0, 0.0]]),
                                np.array([[0.0, 0.0], [0.0, 1.0]])])
        images = [chan(b) for b in tri.mats]
        for p in (1, 2, INF):
            res = extend(tri, images, p,
                         budget=SearchBudget(restarts=4, iters=24, seed=(seed, 12, 10 + i)))
            worst_res = max(worst_res, res.restriction_residual)
            rel = res.gap / res.subspace_lower if res.subspace_lower > 0 else math.inf
            worst_tri_rel = max(worst_tri_rel, rel)
            if res.restriction_residual > 1e-8 or res.gap > 0.15 * res.subspace_lower:
                ok = False
    details.append(f"max restriction residual = {worst_res:.3e} (tol 1e-8)")
    details.append(f"max gap on the span family = {worst_span_gap:.3e} (tol 1e-3)")
    details.append(f"max relative gap on the triangular family = {worst_tri_rel:.4f} (tol 0.15)")
    return CriterionResult(12, "norm-preserving extension", ok, details)


def criterion_13(seed=7) -> CriterionResult:
    """Lattice cross-check: the regular bracket contains the modulus norm."""
    rng = _sub_rng(seed, 13)
    details, ok = [], True
    worst_lo, worst_hi = -math.inf, -math.inf
    for i in range(10):
        n = 2 if i < 5 else 3
        mat = complex_gaussian(rng, n)
        u = embed_lattice_map(mat)
        for p in (1, INF):
            oracle = lattice_regular_oracle(u, p)
            rep = regular_bracket(u, p, levels=2,
                                  budget=SearchBudget(restarts=4, iters=24,
                                                      seed=(seed, 13, i)))
            worst_lo = max(worst_lo, rep.lower - oracle)
            worst_hi = max(worst_hi, oracle - rep.upper)
            if rep.lower - 1e-3 > oracle or oracle > rep.upper + 1e-3:
                ok = False
    details.append(f"max lower - oracle = {worst_lo:.3e} (tol 1e-3)")
    details.append(f"max oracle - upper = {worst_hi:.3e} (tol 1e-3)")
    return CriterionResult(13, "lattice reduction cross-check", ok, details)


def criterion_14(seed=7) -> CriterionResult:
    """Norm axioms of the pairing norm: exact homogeneity; subadditivity
    asserted at the endpoint exponents (where evaluation is certified) and
    reported at p = 2."""
    rng = _sub_rng(seed, 14)
    details, ok = [], True
    worst_hom, worst_tri = 0.0, -math.inf
    worst_tri_p2 = -math.inf
    for i in range(20):
        x = complex_gaussian(rng, 4)
        y = complex_gaussian(rng, 4)
        lam = complex(rng.standard_normal(), rng.standard_normal())
        for p in (1, 2, INF):
            v1, _ = rho_upper(PairingElement.from_body(x, 2, 2, p),
                              restarts=4, seed=(seed, 14, i))
            v2, _ = rho_upper(PairingElement.from_body(lam * x, 2, 2, p),
                              restarts=4, seed=(seed, 14, i))
            dev = abs(v2 - abs(lam) * v1) / max(1.0, abs(lam) * v1)
            worst_hom = max(worst_hom, dev)
            if dev > 1e-6:
                ok = False
        for p in (1, INF):
            vx, _ = rho_upper(PairingElement.from_body(x, 2, 2, p), restarts=4,
                              seed=(seed, 14, i, 0))
            vy, _ = rho_upper(PairingElement.from_body(y, 2, 2, p), restarts=4,
                              seed=(seed, 14, i, 1))
            vz, _ = rho_upper(PairingElement.from_body(x + y, 2, 2, p), restarts=4,
                              seed=(seed, 14, i, 2))
            worst_tri = max(worst_tri, vz - vx - vy)
            if vz > vx + vy + 1e-5:
                ok = False
        vx2, wx = rho_upper(PairingElement.from_body(x, 2, 2, 2), restarts=4,
                            seed=(seed, 14, i, 3))
        vy2, wy = rho_upper(PairingElement.from_body(y, 2, 2, 2), restarts=4,
                            seed=(seed, 14, i, 4))
        shared = [(wx.gamma, wx.alpha, wx.delta, wx.beta),
                  (wy.gamma, wy.alpha, wy.delta, wy.beta)]
        vz2, _ = rho_upper(PairingElement.from_body(x + y, 2, 2, 2), restarts=4,
                           seed=(seed, 14, i, 5), starts=shared)
        worst_tri_p2 = max(worst_tri_p2, vz2 - vx2 - vy2)
    details.append(f"max homogeneity deviation = {worst_hom:.3e} (tol 1e-6)")
    details.append(f"max triangle defect at p in {{1, inf}} = {worst_tri:.3e} (tol 1e-5)")
    details.append(
        f"max triangle defect of the p=2 upper bound with shared starts = "
        f"{worst_tri_p2:.3e} (reported; the interior-exponent upper bound is "
        f"a non-convex search and only the endpoint evaluations are certified)")
    return CriterionResult(14, "pairing-norm axioms", ok, details)


ALL_CRITERIA = [
    criterion_01, criterion_02, criterion_03, criterion_04, criterion_05,
    criterion_06, criterion_07, criterion_08, criterion_09, criterion_10,
    criterion_11, criterion_12, criterion_13, criterion_14,
]


def run_all(seed=7, indices=None):
    results = []
    for k, fn in enumerate(ALL_CRITERIA, start=1):
        if indices and k not in indices:
            continue
        results.append(fn(seed))
    return results
