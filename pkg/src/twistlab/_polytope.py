"""Separable concave maximization over the positive part of the ``T`` ball.

Two objectives are supported on a support of size ``n``:

* ``"log"``:   ``sum c_j log t_j``      (Lozanovskii factorization)
* ``"power"``: ``sum c_j t_j^(1/p)``    (dual norms of ``T^p``)

subject to ``<f, t> <= 1`` for every nonnegative norming functional ``f``.
A log-barrier Newton method solves the problem over a facet list; when the
list is not known to be complete, violated facets are generated from the
Tsirelson DP until the iterate is feasible for the true norm.

Every answer carries a lower bound (objective at a feasible point) and an
upper bound (from the barrier multipliers), so its accuracy is certified
independently of how well Newton converged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class BallSolution:
    t: np.ndarray            # feasible point on the support, ||t||_T = 1
    weights: np.ndarray      # W = F^T mu / sum(mu), a convex combination of facets
    lower: float
    upper: float
    rounds: int
    candidates: list = field(default_factory=list)   # every dual weight vector tried


def _objective(c, t, kind, p):
    if kind == "log":
        return float(c @ np.log(t))
    return float(c @ t ** (1.0 / p))


def _derivs(c, t, kind, p):
    if kind == "log":
        return c / t, -c / t ** 2
    a = 1.0 / p
    return c * a * t ** (a - 1), c * a * (a - 1) * t ** (a - 2)


def _upper_bound(c, W, kind, p):
    """Dual bound from a convex combination ``W`` of facets."""
    if np.any(W <= 0):
        return np.inf
    if kind == "log":
        cs = c.sum()
        return float(c @ np.log(c / (cs * W)))
    if p == 1:
        return float(np.max(c / W))
    q = p / (p - 1.0)
    return float((c ** q @ W ** (1.0 - q)) ** (1.0 / q))


def _objective_change(c, t, d, kind, p):
    """``f(t + d) - f(t)`` without cancellation."""
    r = d / t
    if kind == "log":
        return float(c @ np.log1p(r))
    a = 1.0 / p
    return float(c @ (t ** a * np.expm1(a * np.log1p(r))))


def _barrier(F, c, kind, p, t, gap_tol, max_newton=60, done=None, tau0=1.0, center_tol=1e-10):
    """Log-barrier path following from the strictly feasible point ``t``.

    Returns the centered ``(t, mu)`` of every stage with at least modest
    accuracy: rounding in ``1 - F t`` eventually spoils the deepest stages,
    and any stage yields valid bounds, so the caller keeps the best.

    The line search compares barrier differences evaluated with ``log1p``,
    which stay accurate when ``tau * objective`` is large.
    """
    m, n = F.shape

    def dphi(x, dx, s, tau):
        # phi(x + dx) - phi(x), or -inf when the step leaves the domain
        ds = F @ dx
        if np.any(ds >= s) or np.any(dx <= -x):
            return -np.inf
        out = tau * _objective_change(c, x, dx, kind, p) + np.log1p(-ds / s).sum()
        return out + np.log1p(dx / x).sum() if pos_barrier else out

    # the log objective already keeps t positive
    pos_barrier = kind != "log"
    tau = tau0
    stages = []
    while True:
        best_dec, stalled = np.inf, 0
        for _ in range(max_newton):
            s = 1.0 - F @ t
            g1, g2 = _derivs(c, t, kind, p)
            grad = tau * g1 - F.T @ (1.0 / s)
            H = (F.T * (1.0 / s ** 2)) @ F
            H[np.diag_indices(n)] -= tau * g2
            if pos_barrier:
                grad += 1.0 / t
                H[np.diag_indices(n)] += 1.0 / t ** 2
            try:
                d = np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                d = np.linalg.lstsq(H, grad, rcond=None)[0]
            dec = float(grad @ d)
            if dec < center_tol:
                break
            # at the rounding floor the decrement stops shrinking
            stalled = stalled + 1 if dec > 0.5 * best_dec else 0
            best_dec = min(best_dec, dec)
            if stalled >= 3 and dec < 1e-4:
                break
            # largest step keeping t and the slacks positive, backed off a little
            ds = F @ d
            ratios = np.concatenate([s[ds > 0] / ds[ds > 0], -t[d < 0] / d[d < 0]])
            alpha = min(1.0, 0.99 * ratios.min()) if ratios.size else 1.0
            while alpha > 1e-12 and dphi(t, alpha * d, s, tau) < 0.25 * alpha * dec:
                alpha *= 0.5
            if alpha <= 1e-12:
                break
            t = t + alpha * d
        s = 1.0 - F @ t
        if np.all(s > 0):
            stages.append((t.copy(), 1.0 / (tau * s)))
            if done is not None and done(*stages[-1]):
                break
        if (m + (n if pos_barrier else 0)) / tau < gap_tol:
            break
        tau *= 50.0
    return stages


def _polish(F, c, kind, p, t, mu, threshold, iters=8):
    """Newton on the KKT system of the constraints with slack below ``threshold``.

    Solves ``g'(t) = F_A^T mu_A`` and ``F_A t = 1``; returns ``None`` when the
    result leaves the feasible cone.
    """
    s = 1.0 - F @ t
    A = np.nonzero(s < threshold)[0]
    if A.size == 0:
        return None
    FA = F[A]
    n, k = t.size, A.size
    muA = mu[A].copy()
    for _ in range(iters):
        g1, g2 = _derivs(c, t, kind, p)
        r = np.concatenate([g1 - FA.T @ muA, FA @ t - 1.0])
        J = np.zeros((n + k, n + k))
        J[:n, :n] = np.diag(g2)
        J[:n, n:] = -FA.T
        J[n:, :n] = FA
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        t = t + step[:n]
        muA = muA + step[n:]
        if np.any(t <= 0):
            return None
        if np.max(np.abs(r)) < 1e-15:
            break
    mu_full = np.zeros(F.shape[0])
    mu_full[A] = np.maximum(muA, 0.0)
    if mu_full.sum() <= 0:
        return None
    return t, mu_full


def linear_over_T_ball(c, support, facets=None, max_rounds=400) -> BallSolution:
    """``max <c, t>`` over the positive ``T`` ball by LP with cut generation.

    The LP over a facet subset is a relaxation, so its value is an upper
    bound; the optimizer rescaled by its true norm gives the lower bound.
    """
    from scipy.optimize import linprog
    from .tsirelson import norm_T_with_functional

    c = np.asarray(c, dtype=float)
    support = np.asarray(support, dtype=int)
    complete = facets is not None
    F = np.asarray(facets, dtype=float) if complete else np.eye(c.size)
    dim = int(support.max())
    rounds = 0
    while True:
        rounds += 1
        res = linprog(-c, A_ub=F, b_ub=np.ones(F.shape[0]), bounds=(0, None), method="highs")
        if res.status != 0:
            raise RuntimeError(f"LP failed: {res.message}")
        t = res.x
        upper = -float(res.fun)
        dense = np.zeros(dim)
        dense[support - 1] = t
        norm, row = norm_T_with_functional(dense)
        if complete or norm <= 1 + 1e-12 or rounds >= max_rounds:
            break
        F = np.vstack([F, row[support - 1]])
    W = -res.ineqlin.marginals @ F
    t_hat = t / max(norm, 1.0)
    return BallSolution(t_hat, W / max(W.sum(), 1e-300), float(c @ t_hat), upper, rounds)


def maximize_over_T_ball(c, support, kind, p=2.0, facets=None, tol=1e-9, max_rounds=400) -> BallSolution:
    """Maximize the separable objective with weights ``c`` on ``support``.

    ``support`` lists the 1-based coordinates carrying ``c``.  With
    ``facets=None`` the facet list starts from the unit functionals and grows
    by DP separation; otherwise ``facets`` must be the complete restricted
    list.
    """
    from .tsirelson import norm_T_with_functional

    c = np.asarray(c, dtype=float)
    support = np.asarray(support, dtype=int)
    n = c.size
    scale = c.sum()
    cn = c / scale
    complete = facets is not None
    F = np.asarray(facets, dtype=float) if complete else np.eye(n)
    dim = int(support.max())
    t = np.full(n, 0.5 / max(1.0, float(F.sum(axis=1).max())))
    rounds = 0
    gap_tol = 1e-11
    lower, upper = -np.inf, np.inf
    t_hat = W = None
    tried = []

    def true_norm(v):
        if complete:
            return float(np.max(F @ v))
        dense = np.zeros(dim)
        dense[support - 1] = v
        return norm_T_with_functional(dense)[0]

    def consider(tc, Wc):
        nonlocal lower, upper, t_hat, W
        tried.append(Wc)
        # the primal point recovered from the dual weights is exact at the
        # optimum and stays sensible on coordinates with negligible weight
        for v in (tc, _primal_from_dual(cn, Wc, kind, p)):
            if v is None or not np.all(v > 0):
                continue
            v = v / true_norm(v)
            lv = _objective(cn, v, kind, p)
            if lv > lower:
                lower, t_hat = lv, v
        uv = _upper_bound(cn, Wc, kind, p)
        if uv < upper:
            upper, W = uv, Wc

    def certified():
        return upper - lower <= 0.1 * tol * max(1.0, abs(upper))

    def polish_from(ts, ms):
        for threshold in (1e-5, 1e-3, 1e-2, 1e-1):
            polished = _polish(F, cn, kind, p, ts, ms, threshold)
            if polished is not None:
                tp, mup = polished
                consider(tp, F.T @ mup / mup.sum())
                if certified():
                    return

    def stage_done(ts, ms):
        # only meaningful once the facet list is final
        if not complete:
            return False
        consider(ts, F.T @ ms / ms.sum())
        if not certified() and upper - lower < 1e-3:
            # close enough for the active set to be visible
            polish_from(ts, ms)
        return certified()

    while True:
        rounds += 1
        stages = _barrier(F, cn, kind, p, t, gap_tol, done=stage_done)
        t, mu = stages[-1]
        if complete:
            break
        dense = np.zeros(dim)
        dense[support - 1] = t
        norm, row = norm_T_with_functional(dense)
        if norm <= float(np.max(F @ t)) * (1 + 1e-12) or rounds >= max_rounds:
            break
        F = np.vstack([F, row[support - 1]])
        t = 0.9 * t / norm
    if not complete:
        for ts, ms in stages:
            consider(ts, F.T @ ms / ms.sum())
    for ts, ms in stages[-3:]:
        if certified():
            break
        polish_from(ts, ms)
    return BallSolution(t_hat, W, scale * lower, scale * upper, rounds, tried)


def _primal_from_dual(c, W, kind, p):
    """Maximizer of the objective against the single constraint ``<W, t> <= 1``."""
    if np.any(W <= 0):
        return None
    if kind == "log":
        return c / W
    if p == 1:
        return None
    q = p / (p - 1.0)
    return (c / W) ** q
