"""Input searches producing sound lower bounds on map norms.

Two engines: an alternating scheme for operator-norm (p = inf) objectives,
which is monotone by construction, and projected gradient ascent on the
Schatten unit sphere for interior exponents.  Both are deterministic for a
fixed seed and both only ever return values they have actually evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import PExp, as_cmatrix, schatten_norm
from .randgen import complex_gaussian, rng_from


@dataclass(frozen=True)
class SearchBudget:
    restarts: int = 8
    iters: int = 60
    seed: int = 0

    def with_seed(self, seed) -> "SearchBudget":
        return SearchBudget(self.restarts, self.iters, seed)


def _top_pair(a: np.ndarray):
    u, s, vh = np.linalg.svd(a)
    return s[0], u[:, 0], np.conj(vh[0])


def _nuclear_maximizer(w: np.ndarray):
    """x with ||x||_inf <= 1 maximizing Re sum x_ij w_ij, and the value."""
    u, s, vh = np.linalg.svd(w)
    y = (np.conj(vh.T) @ np.conj(u.T))
    return y.T, float(s.sum())


def opnorm_lower(apply_fn, coeff_fn, in_dim: int, budget: SearchBudget,
                 candidates=()):
    """Lower bound on sup ||u(x)||_inf / ||x||_inf by alternating ascent.

    ``apply_fn(x)`` evaluates the map; ``coeff_fn(eta, xi)`` returns the
    matrix W with entries eta* u(e_ij) xi, the linear functional picked out
    by an output vector pair.  Each half-step is a closed-form maximization,
    so the objective never decreases.
    """
    rng = rng_from(budget.seed)
    starts = [as_cmatrix(c) for c in candidates]
    for _ in range(budget.restarts):
        starts.append(complex_gaussian(rng, in_dim))
    best_val, best_x = 0.0, None
    for x0 in starts:
        nx = np.linalg.norm(x0, 2)
        if nx == 0:
            continue
        x = x0 / nx
        val = 0.0
        for _ in range(budget.iters):
            a = apply_fn(x)
            sigma, eta, xi = _top_pair(a)
            w = coeff_fn(eta, xi)
            x_new, nuc = _nuclear_maximizer(w)
            if nuc <= sigma * (1 + 1e-12):
                val = sigma
                break
            x = x_new
            val = nuc
        val = schatten_norm(apply_fn(x), np.inf) / schatten_norm(x, np.inf)
        if val > best_val:
            best_val, best_x = val, x
    return best_val, best_x


def _schatten_subgradient(a: np.ndarray, p: PExp) -> np.ndarray:
    """G with d||A||_p = Re <G, dA> (Hilbert-Schmidt pairing)."""
    u, s, vh = np.linalg.svd(a)
    norm = schatten_norm(a, p)
    if norm == 0:
        return np.zeros_like(a)
    if p.is_inf:
        return np.outer(u[:, 0], vh[0])
    w = (s / norm) ** (p.value - 1.0)
    return (u * w) @ vh


def schatten_ascent(apply_fn, grad_pullback, in_dim: int, p, budget: SearchBudget,
                    candidates=()):
    """Lower bound on sup ||u(x)||_p / ||x||_p via ascent on the p-sphere.

    ``grad_pullback(g)`` applies the Hilbert-Schmidt adjoint of the map to a
    cotangent matrix g.  Step halving; only evaluated ratios are reported.
    """
    p = PExp.parse(p)
    rng = rng_from(budget.seed)
    starts = [as_cmatrix(c) for c in candidates]
    for _ in range(budget.restarts):
        starts.append(complex_gaussian(rng, in_dim))
    best_val, best_x = 0.0, None

    def ratio(x):
        nx = schatten_norm(x, p)
        if nx == 0:
            return 0.0
        return schatten_norm(apply_fn(x), p) / nx

    for x0 in starts:
        nx = schatten_norm(x0, p)
        if nx == 0:
            continue
        x = x0 / nx
        val = ratio(x)
        step = 0.5
        for _ in range(budget.iters):
            g_out = _schatten_subgradient(apply_fn(x), p)
            g = grad_pullback(g_out)
            gn = np.linalg.norm(g)
            if gn == 0:
                break
            improved = False
            while step > 1e-8:
                cand = x + step * g / gn
                cn = schatten_norm(cand, p)
                if cn > 0:
                    cand = cand / cn
                    cval = ratio(cand)
                    if cval > val * (1 + 1e-13):
                        x, val = cand, cval
                        improved = True
                        break
                step *= 0.5
            if not improved:
                break
        if val > best_val:
            best_val, best_x = val, x
    return best_val, best_x
