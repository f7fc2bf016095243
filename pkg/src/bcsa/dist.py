"""Degree distributions and the transforms induced by erasures and broadcast.

A degree distribution assigns probability ``coeffs[l]`` to repetition degree
``l`` (the number of slots in which a user transmits a copy of its packet).
Three distributions matter in an all-to-all broadcast frame:

* the original distribution the users draw from,
* the distribution after each packet copy is erased independently by the
  channel (``pec_induced``),
* the distribution seen by one receiver after discarding the slots it spent
  transmitting itself (``broadcast_induced``).

``reverse_transform_plr`` walks the chain in the opposite direction: given
per-degree loss rates measured on the receiver's reduced frame, it recovers
the loss rate of a user as a function of its original degree.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

import numpy as np

from .numerics import log_comb

MAX_DEGREE = 64
SIMPLEX_TOL = 1e-9

_TERM_RE = re.compile(
    r"""^\s*
        (?P<coeff>[0-9.]+(?:[eE][+-]?[0-9]+)?)?   # optional coefficient
        \s*
        (?P<x>x(?:\^(?P<exp>[0-9]+))?)?           # optional x or x^k
        \s*$""",
    re.VERBOSE,
)


@dataclass(frozen=True)
class DegreeDistribution:
    """Probability vector over repetition degrees 0..q, q = len(coeffs) - 1."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("degree distribution needs at least one coefficient")
        if len(self.coeffs) - 1 > MAX_DEGREE:
            raise ValueError(
                f"max degree {len(self.coeffs) - 1} exceeds cap {MAX_DEGREE}"
            )
        for l, c in enumerate(self.coeffs):
            if not math.isfinite(c) or c < -SIMPLEX_TOL or c > 1.0 + SIMPLEX_TOL:
                raise ValueError(f"coefficient for degree {l} out of [0, 1]: {c}")
        total = math.fsum(self.coeffs)
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"coefficients sum to {total}, expected 1 within {SIMPLEX_TOL}")

    @property
    def q(self) -> int:
        return len(self.coeffs) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def probability(self, degree: int) -> float:
        if 0 <= degree <= self.q:
            return self.coeffs[degree]
        return 0.0

    def mean_degree(self) -> float:
        return float(sum(l * c for l, c in enumerate(self.coeffs)))

    def derivative_coeffs(self) -> np.ndarray:
        """Coefficients of d/dx sum_l coeffs[l] x^l, indexed by power 0..q-1."""
        if self.q == 0:
            return np.zeros(1)
        return np.array([l * c for l, c in enumerate(self.coeffs)][1:], dtype=float)

    def padded(self, q: int) -> "DegreeDistribution":
        if q < self.q:
            raise ValueError(f"cannot pad to q={q} below current q={self.q}")
        return DegreeDistribution(self.coeffs + (0.0,) * (q - self.q))

    def trimmed(self) -> "DegreeDistribution":
        last = max((l for l, c in enumerate(self.coeffs) if c > 0.0), default=0)
        return DegreeDistribution(self.coeffs[: last + 1])

    def renormalized(self) -> "DegreeDistribution":
        total = math.fsum(self.coeffs)
        if total <= 0:
            raise ValueError("cannot renormalize an all-zero vector")
        return DegreeDistribution(tuple(c / total for c in self.coeffs))

    def to_string(self) -> str:
        terms = []
        for l, c in enumerate(self.coeffs):
            if c == 0.0:
                continue
            if l == 0:
                terms.append(repr(c))
            elif l == 1:
                terms.append(f"{c!r}x")
            else:
                terms.append(f"{c!r}x^{l}")
        return " + ".join(terms) if terms else "0"

    @classmethod
    def from_coeffs(cls, coeffs) -> "DegreeDistribution":
        return cls(tuple(float(c) for c in coeffs))

    @classmethod
    def from_string(cls, text: str) -> "DegreeDistribution":
        """Parse a polynomial like '0.5x^2 + 0.5x^4', 'x^8' or '0.1 + 0.9x'."""
        if not text or not text.strip():
            raise ValueError("empty distribution string")
        by_degree: dict[int, float] = {}
        for raw in text.split("+"):
            m = _TERM_RE.match(raw)
            if m is None or (m.group("coeff") is None and m.group("x") is None):
                raise ValueError(f"cannot parse distribution term {raw!r}")
            coeff = float(m.group("coeff")) if m.group("coeff") is not None else 1.0
            if m.group("x") is None:
                degree = 0
            elif m.group("exp") is None:
                degree = 1
            else:
                degree = int(m.group("exp"))
            by_degree[degree] = by_degree.get(degree, 0.0) + coeff
        q = max(by_degree)
        return cls.from_coeffs([by_degree.get(l, 0.0) for l in range(q + 1)])

    @classmethod
    def parse(cls, source) -> "DegreeDistribution":
        """Accept a polynomial string, a JSON object string, a dict, or a sequence."""
        if isinstance(source, DegreeDistribution):
            return source
        if isinstance(source, dict):
            return cls.from_coeffs(source["coeffs"])
        if isinstance(source, str):
            stripped = source.strip()
            if stripped.startswith("{"):
                return cls.from_coeffs(json.loads(stripped)["coeffs"])
            return cls.from_string(stripped)
        return cls.from_coeffs(source)


def _check_eps(eps: float) -> None:
    if not (0.0 <= eps <= 1.0):
        raise ValueError(f"erasure probability must lie in [0, 1], got {eps}")


def pec_induced(dist: DegreeDistribution, eps: float) -> DegreeDistribution:
    """Degree distribution after each packet copy is erased independently.

    A user of original degree k keeps a Binomial(k, 1-eps) number of copies,
    so mass flows from each degree k down to every l <= k.
    """
    _check_eps(eps)
    q = dist.q
    out = [0.0] * (q + 1)
    for k, lam in enumerate(dist.coeffs):
        if lam == 0.0:
            continue
        for l in range(k + 1):
            out[l] += math.comb(k, l) * eps ** (k - l) * (1.0 - eps) ** l * lam
    return DegreeDistribution.from_coeffs(out)


def broadcast_induced(dist: DegreeDistribution, r: int, n: int) -> DegreeDistribution:
    """Degree distribution seen by a receiver that transmitted in r of n slots.

    The receiver cannot listen during its own r slots, so a user of (erasure
    reduced) degree l keeps the copies that landed in the other n - r slots.
    The slot subsets are uniform, hence the hypergeometric weights.
    """
    if r < 0 or r > n:
        raise ValueError(f"receiver degree r={r} outside [0, n={n}]")
    if n < dist.q:
        raise ValueError(f"frame length n={n} below max degree q={dist.q}")
    q = dist.q
    out = [0.0] * (q + 1)
    for l, lam in enumerate(dist.coeffs):
        if lam == 0.0:
            continue
        log_cn_l = log_comb(n, l)
        for d in range(max(0, l - r), l + 1):
            if d > n - r:
                continue
            weight = math.comb(r, l - d) * math.exp(log_comb(n - r, d) - log_cn_l)
            out[d] += weight * lam
    return DegreeDistribution.from_coeffs(out)


def reverse_transform_plr(
    p_d_table, l: int, r: int, eps: float, n: int
) -> float:
    """Loss rate of an original-degree-l user from per-induced-degree rates.

    ``p_d_table[d]`` is the loss probability of a user whose degree on the
    receiver's reduced frame is d (entry 0 conventionally equals 1).  The
    transform averages over the erasure channel and over how many surviving
    copies fell into the receiver's r slots.
    """
    _check_eps(eps)
    table = [float(p) for p in p_d_table]
    q = len(table) - 1
    if l < 0 or l > q:
        raise ValueError(f"degree l={l} outside table range 0..{q}")
    if r < 0 or r > n:
        raise ValueError(f"receiver degree r={r} outside [0, n={n}]")
    for d, p in enumerate(table):
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"table entry for degree {d} outside [0, 1]: {p}")
    total = 0.0
    for k in range(l + 1):
        # probability that k of the l copies survive the erasure channel
        surv = math.comb(l, k) * eps ** (l - k) * (1.0 - eps) ** k
        if surv == 0.0:
            continue
        log_cn_k = log_comb(n, k)
        inner = 0.0
        for d in range(max(k - r, 0), k + 1):
            if d > n - r:
                continue
            weight = math.comb(r, k - d) * math.exp(log_comb(n - r, d) - log_cn_k)
            inner += weight * table[d]
        total += surv * inner
    return min(max(total, 0.0), 1.0)
