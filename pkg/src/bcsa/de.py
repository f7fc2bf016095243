"""Density evolution for the peeling decoder on the user/slot graph.

In the infinite frame length limit, the probability that an edge of the
collision graph remains unresolved after each peeling round follows a
scalar recursion driven by the channel load and the derivative of the
degree distribution.  Its fixed point gives per-degree asymptotic loss
rates; the largest load with a vanishing fixed point is the threshold.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dist import DegreeDistribution

CONVERGENCE_TOL = 1e-12
MAX_ITERATIONS = 100_000
# fixed point counts as "fully resolved" below this value
SUCCESS_XI = 1e-8
THRESHOLD_PRECISION = 1e-4


@njit(cache=True)
def _recursion(deriv, g, tol, max_iter, trace):
    xi = 1.0
    count = 0
    converged = False
    for it in range(max_iter):
        # Horner evaluation of the distribution derivative at xi
        acc = 0.0
        for j in range(deriv.shape[0] - 1, -1, -1):
            acc = acc * xi + deriv[j]
        nxt = 1.0 - np.exp(-g * acc)
        if trace.shape[0] > 0:
            trace[it] = nxt
        count = it + 1
        if abs(nxt - xi) < tol:
            xi = nxt
            converged = True
            break
        xi = nxt
    return xi, count, converged


@dataclass(frozen=True)
class DeResult:
    """Outcome of the fixed-point recursion at a single load."""

    xi: float
    trace: tuple
    converged: bool

    @property
    def iterations(self):
        return len(self.trace)


def _deriv_array(dist):
    return np.asarray(dist.derivative_coeffs(), dtype=np.float64)


def de_fixed_point(dist, g, tol=CONVERGENCE_TOL, max_iter=MAX_ITERATIONS):
    """Iterate the edge-erasure recursion from xi = 1 until it settles.

    Returns a DeResult carrying the final value, the per-iteration
    trajectory, and whether the stopping tolerance was met before the
    iteration cap.
    """
    if g < 0:
        raise ValueError(f"load must be nonnegative, got {g}")
    trace = np.empty(max_iter, dtype=np.float64)
    xi, count, converged = _recursion(_deriv_array(dist), float(g), tol,
                                      max_iter, trace)
    return DeResult(xi=float(xi), trace=tuple(trace[:count]),
                    converged=bool(converged))


def _fixed_point_value(dist, g, tol=CONVERGENCE_TOL, max_iter=MAX_ITERATIONS):
    # fast path used by the threshold bisection: no trace allocation
    empty = np.empty(0, dtype=np.float64)
    xi, _, _ = _recursion(_deriv_array(dist), float(g), tol, max_iter, empty)
    return float(xi)


def asymptotic_plr(dist, g, d):
    """Asymptotic loss rate for users of induced degree d at load g.

    Degree-0 users are never resolvable, so d = 0 returns 1.  For d >= 1
    the rate is the fixed point raised to the d-th power.
    """
    if d < 0:
        raise ValueError(f"degree must be nonnegative, got {d}")
    if d == 0:
        return 1.0
    return _fixed_point_value(dist, g) ** d


def asymptotic_plr_average(dist, g):
    """Degree-averaged asymptotic loss rate, including any degree-0 mass."""
    xi = _fixed_point_value(dist, g)
    coeffs = dist.coeffs
    return float(sum(lam * (1.0 if d == 0 else xi ** d)
                     for d, lam in enumerate(coeffs) if lam > 0.0))


@dataclass(frozen=True)
class ThresholdResult:
    """Load threshold with a flag for distributions that cannot converge.

    Any mass on degrees 0 or 1 leaves a positive fraction of users
    unresolved at every positive load, so the threshold degenerates to 0.
    """

    g_star: float
    degenerate: bool = False

    def __float__(self):
        return self.g_star


def threshold(dist, precision=THRESHOLD_PRECISION, success_xi=SUCCESS_XI):
    """Largest load in [0, 1] whose fixed point vanishes, by bisection."""
    coeffs = dist.coeffs
    if coeffs[0] > 0.0 or (len(coeffs) > 1 and coeffs[1] > 0.0):
        return ThresholdResult(g_star=0.0, degenerate=True)

    def resolved(g):
        return _fixed_point_value(dist, g) < success_xi

    lo, hi = 0.0, 1.0
    if resolved(hi):
        return ThresholdResult(g_star=1.0)
    while hi - lo > precision:
        mid = 0.5 * (lo + hi)
        if resolved(mid):
            lo = mid
        else:
            hi = mid
    return ThresholdResult(g_star=lo)
