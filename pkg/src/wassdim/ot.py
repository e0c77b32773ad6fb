"""Wasserstein-1 distance between uniform empirical measures.

Two solvers are provided. :func:`exact_w1` solves the square assignment
problem, which is exact for two clouds of equal size with uniform weights.
:func:`sinkhorn_w1` runs entropically regularized Sinkhorn iterations with
log-domain potentials and returns the transport cost of the resulting plan.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp

__all__ = [
    "TransportResult",
    "check_cost",
    "cost_from_metric",
    "default_max_iters",
    "exact_w1",
    "sinkhorn_w1",
    "w1",
]

EXACT = "exact_assignment"
SINKHORN = "sinkhorn"

# Scalings are folded into the potentials once they leave [1/T, T].
_ABSORB_THRESHOLD = 1e50


@dataclass
class TransportResult:
    w1: float
    method: str
    reg: float = None
    iterations_run: int = 0
    converged: bool = True
    marginal_error: float = 0.0
    history: list = field(default_factory=list)

    def to_dict(self):
        return {
            "w1": self.w1,
            "method": self.method,
            "reg": self.reg,
            "iterations_run": self.iterations_run,
            "converged": self.converged,
            "marginal_error": self.marginal_error,
        }


def check_cost(cost):
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] == 0 or cost.shape[1] == 0:
        raise ValueError(f"cost must be a nonempty 2-d matrix, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix has non-finite entries")
    if np.any(cost < 0):
        raise ValueError("cost matrix has negative entries")
    return cost


def exact_w1(cost):
    """W1 between two equal-size uniform measures via optimal assignment.

    Birkhoff's theorem guarantees a permutation is optimal among all
    couplings, so the value is ``mean(cost[i, sigma(i)])`` for the optimal
    assignment ``sigma``.
    """
    cost = check_cost(cost)
    n, m = cost.shape
    if n != m:
        raise ValueError(f"exact_w1 needs a square cost matrix, got {n}x{m}")
    rows, cols = linear_sum_assignment(cost)
    value = float(cost[rows, cols].sum() / n)
    return TransportResult(value, EXACT, None, 0, True, 0.0)


def default_max_iters(reg):
    return 30000 if reg <= 0.05 else 10000


def _plan(f, g, cost, reg):
    return np.exp((f[:, None] + g[None, :] - cost) / reg)


def sinkhorn_w1(cost, reg, max_iters=None, tol=1e-9, history_every=None):
    """Entropic OT between uniform marginals; returns ``<P, C>`` at the entropic plan.

    The iteration keeps dual potentials ``f, g`` and a kernel
    ``K = exp((f_i + g_j - C_ij) / reg)`` with scalings ``u, v``. Whenever a
    scaling leaves a safe range it is absorbed into the potentials and the
    kernel rebuilt, so ``reg`` far below the cost scale does not underflow.
    Iteration stops once both effective potentials ``f + reg log u`` and
    ``g + reg log v`` move by less than ``tol`` (sup norm) in one sweep.

    With ``history_every`` set, ``(iteration, transport cost, dual objective)``
    triples are recorded every that many iterations. The dual objective
    ``<f, a> + <g, b> - reg * sum(P)`` never decreases along the iterations.
    """
    cost = check_cost(cost)
    if not reg > 0:
        raise ValueError(f"reg must be positive, got {reg}")
    if max_iters is None:
        max_iters = default_max_iters(reg)
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    n, m = cost.shape
    log_a = -np.log(n)
    log_b = -np.log(m)

    # c-transform start: every row and column of K has a unit entry.
    f = cost.min(axis=1)
    g = (cost - f[:, None]).min(axis=0)
    kernel = _plan(f, g, cost, reg)
    u = np.ones(n)
    v = np.ones(m)
    f_eff = f.copy()
    g_eff = g.copy()
    history = []
    converged = False
    log_domain = False
    it = 0
    for it in range(1, max_iters + 1):
        if log_domain:
            # Slow but unconditionally stable fallback.
            f_new = reg * (log_a - logsumexp((g_eff[None, :] - cost) / reg, axis=1))
            g_new = reg * (log_b - logsumexp((f_new[:, None] - cost) / reg, axis=0))
        else:
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                u = (1.0 / n) / (kernel @ v)
                v = (1.0 / m) / (kernel.T @ u)
                ok = np.all(np.isfinite(u)) and np.all(np.isfinite(v)) and u.min() > 0 and v.min() > 0
            if not ok:
                log_domain = True
                f_new = reg * (log_a - logsumexp((g_eff[None, :] - cost) / reg, axis=1))
                g_new = reg * (log_b - logsumexp((f_new[:, None] - cost) / reg, axis=0))
            else:
                f_new = f + reg * np.log(u)
                g_new = g + reg * np.log(v)
        delta = max(np.abs(f_new - f_eff).max(), np.abs(g_new - g_eff).max())
        f_eff, g_eff = f_new, g_new
        if not log_domain and (
            max(u.max(), v.max()) > _ABSORB_THRESHOLD or min(u.min(), v.min()) < 1.0 / _ABSORB_THRESHOLD
        ):
            f, g = f_eff.copy(), g_eff.copy()
            kernel = _plan(f, g, cost, reg)
            u = np.ones(n)
            v = np.ones(m)
        if history_every and it % history_every == 0:
            plan = _plan(f_eff, g_eff, cost, reg)
            dual = f_eff.mean() + g_eff.mean() - reg * plan.sum()
            history.append((it, float(np.sum(plan * cost)), float(dual)))
        if delta < tol:
            converged = True
            break

    plan = _plan(f_eff, g_eff, cost, reg)
    value = float(np.sum(plan * cost))
    marginal_error = float(
        max(np.abs(plan.sum(axis=1) - 1.0 / n).max(), np.abs(plan.sum(axis=0) - 1.0 / m).max())
    )
    return TransportResult(value, SINKHORN, float(reg), it, converged, marginal_error, history)


def w1(cost, method="exact", reg=0.1, max_iters=None, tol=1e-9):
    """Dispatch to :func:`exact_w1` or :func:`sinkhorn_w1`."""
    if method == "exact":
        return exact_w1(cost)
    if method == "sinkhorn":
        return sinkhorn_w1(cost, reg, max_iters=max_iters, tol=tol)
    raise ValueError(f"method must be 'exact' or 'sinkhorn', got {method!r}")


def cost_from_metric(dist, idx_a, idx_b):
    """Cost matrix ``dist[idx_a[r], idx_b[c]]`` sliced from a pooled distance matrix."""
    values = getattr(dist, "values", dist)
    values = np.asarray(values)
    idx_a = np.asarray(idx_a, dtype=np.int64)
    idx_b = np.asarray(idx_b, dtype=np.int64)
    n = values.shape[0]
    for name, idx in (("idx_a", idx_a), ("idx_b", idx_b)):
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise IndexError(f"{name} has indices outside 0..{n - 1}")
    cost = values[np.ix_(idx_a, idx_b)]
    if np.isinf(cost).any():
        raise ValueError("cost slice has infinite entries (disconnected graph metric)")
    return cost
