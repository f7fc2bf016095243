"""Degree-distribution design trading decoding threshold against error floor.

The search space is the probability simplex over a small fixed support of
repetition degrees.  Raising mass on high degrees suppresses the error
floor, raising mass on degree 3 pushes the threshold up, so the two
figures of merit pull in opposite directions.  A scalarized objective
sweeps out the tradeoff curve.

`objective` is the raw scalarization -g* + eta*p_bar with eta weighting
the floor term.  `optimize` minimizes the mirrored form p_bar - eta*g*
(eta weighting the threshold), so that eta = 0 asks for the lowest floor
alone and returns the pure maximum-degree distribution; the two forms
trace the same Pareto frontier with eta <-> 1/eta.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .dist import DegreeDistribution
from .de import threshold
from .efapprox import ef_broadcast_plr

DEFAULT_SUPPORT = (2, 3, 4, 8)
_CACHE_DECIMALS = 10


@dataclass(frozen=True)
class OptConfig:
    support: tuple = DEFAULT_SUPPORT
    eta: float = 0.0
    n: int = 500
    g: float = 0.5
    eps: float = 0.0
    restarts: int = 20
    max_iterations: int = 300
    simplex_tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if len(self.support) < 2 or len(set(self.support)) != len(self.support):
            raise ValueError("support must hold distinct degrees")
        if min(self.support) < 2:
            raise ValueError("threshold undefined for degrees below 2")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative: {self.eta}")
        if not 0 < self.g <= 1 or self.n < 2:
            raise ValueError("load or frame length out of range")
        if self.restarts < 1:
            raise ValueError("need at least one start")

    @property
    def m(self):
        """Neighbor count implied by the load, as in broadcast mode."""
        return round(self.g * self.n) - 1


@dataclass(frozen=True)
class TradeoffPoint:
    eta: float
    dist: DegreeDistribution
    threshold: float
    ef: float


def _dist_from_weights(weights, support):
    coeffs = [0.0] * (max(support) + 1)
    for d, w in zip(support, weights):
        coeffs[d] = w
    return DegreeDistribution.from_coeffs(coeffs)


def _project(weights):
    w = np.clip(np.asarray(weights, dtype=float), 0.0, None)
    total = w.sum()
    if total <= 0.0:
        w = np.full(len(w), 1.0 / len(w))
        total = 1.0
    return w / total


def objective(dist, eta, n=500, g=0.5, eps=0.0):
    """Raw scalarization -g* + eta*p_bar; equals -threshold exactly when
    eta is zero."""
    value = -float(threshold(dist))
    if eta != 0.0:
        m = round(g * n) - 1
        value += eta * ef_broadcast_plr(dist, n, m, eps)
    return value


class _Evaluator:
    """Memoized threshold and floor lookups keyed on rounded weights."""

    def __init__(self, config):
        self.config = config
        self._cache = {}

    def scores(self, weights):
        key = tuple(np.round(weights, _CACHE_DECIMALS))
        hit = self._cache.get(key)
        if hit is None:
            dist = _dist_from_weights(key, self.config.support)
            g_star = float(threshold(dist)) if self.config.eta > 0 else 0.0
            ef = ef_broadcast_plr(dist, self.config.n, self.config.m,
                                  self.config.eps)
            hit = (g_star, ef)
            self._cache[key] = hit
        return hit

    def value(self, weights):
        g_star, ef = self.scores(weights)
        return ef - self.config.eta * g_star


def _free_to_full(x):
    x = np.asarray(x, dtype=float)
    return np.append(x, 1.0 - x.sum())


def _starts(config):
    k = len(config.support)
    pts = [np.eye(k)[i] for i in range(k)]
    pts.append(np.full(k, 1.0 / k))
    rng = np.random.default_rng(config.seed)
    while len(pts) < config.restarts:
        pts.append(rng.dirichlet(np.ones(k)))
    return pts[:config.restarts]


def optimize(config):
    """Best point found by multi-start Nelder-Mead over the free weights.

    Minimizes ef - eta*threshold; the sum-to-one constraint removes one
    weight and infeasible iterates are clipped back onto the simplex with
    a penalty proportional to the projection distance.
    """
    ev = _Evaluator(config)

    def penalized(x):
        full = _free_to_full(x)
        feasible = _project(full)
        return ev.value(feasible) + 10.0 * np.abs(full - feasible).sum()

    candidates = [_project(p) for p in _starts(config)]
    best_w, best_val = None, np.inf
    for start in candidates:
        res = minimize(penalized, start[:-1], method="Nelder-Mead",
                       options={"maxiter": config.max_iterations,
                                "xatol": 1e-6, "fatol": 1e-12})
        for w in (start, _project(_free_to_full(res.x))):
            val = ev.value(w)
            if val < best_val - 1e-15:
                best_w, best_val = w, val
    g_star, ef = ev.scores(best_w)
    if config.eta == 0:
        g_star = float(threshold(_dist_from_weights(best_w, config.support)))
    dist = _dist_from_weights(np.round(best_w, _CACHE_DECIMALS),
                              config.support)
    return TradeoffPoint(eta=config.eta, dist=dist, threshold=g_star, ef=ef)


def pareto_filter(points):
    """Drop points beaten on both threshold and floor by another point."""
    kept = []
    for p in points:
        dominated = any(
            (q.threshold >= p.threshold and q.ef <= p.ef)
            and (q.threshold > p.threshold or q.ef < p.ef)
            for q in points)
        if not dominated:
            kept.append(p)
    return kept


def tradeoff_sweep(eta_list, config):
    """One optimize call per eta, reduced to the Pareto set, sorted by
    threshold."""
    points = [optimize(replace(config, eta=eta)) for eta in eta_list]
    return sorted(pareto_filter(points), key=lambda p: p.threshold)


def default_eta_grid():
    # spans the indifference slopes between the pure floor optimum and
    # the high-threshold end of the frontier
    return [0.0] + list(np.logspace(-5, -1, 9))
