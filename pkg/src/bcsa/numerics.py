"""Shared numeric helpers for binomial coefficients at large frame lengths.

Frame lengths can reach 1e7 while the upper entry of every binomial we need
(degree, receiver degree, slot count of a stopping set) stays tiny.  Computing
log C(n, k) as a short sum of logs instead of a difference of log-gamma values
keeps the relative error near machine precision even when n is huge.
"""

from __future__ import annotations

import math


def log_falling_factorial(n: float, k: int) -> float:
    """log(n * (n-1) * ... * (n-k+1)) for integer k >= 0."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if k == 0:
        return 0.0
    if n < k:
        return float("-inf")
    return float(sum(math.log(n - i) for i in range(k)))


def log_comb(n: float, k: int) -> float:
    """log C(n, k); -inf when the coefficient is zero."""
    if k < 0 or (n < k):
        return float("-inf")
    return log_falling_factorial(n, k) - math.lgamma(k + 1)


def comb_ratio(n_top: int, k_top: int, n_bot: int, k_bot: int, scale: int = 1) -> float:
    """scale * C(n_top, k_top) / C(n_bot, k_bot), stable for huge n."""
    if scale == 0:
        return 0.0
    log_num = log_comb(n_top, k_top)
    if log_num == float("-inf"):
        return 0.0
    return scale * math.exp(log_num - log_comb(n_bot, k_bot))
