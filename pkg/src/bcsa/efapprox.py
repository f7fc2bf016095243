"""Analytical error-floor machinery built on the minimal stopping-set catalog.

The low-load loss rate is dominated by small unresolvable collision
patterns.  Summing, over a catalog of minimal patterns, the expected
number of pattern occurrences gives a union-style bound on the expected
unresolved-user count, and dividing by the per-degree user population
yields a per-degree loss-rate approximation.  All products are evaluated
in log domain so frame lengths up to 1e7 are safe.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .dist import DegreeDistribution, broadcast_induced, pec_induced, reverse_transform_plr
from .numerics import log_comb, log_falling_factorial
from .stopsets import Catalog, default_catalog


@dataclass(frozen=True)
class EfInput:
    """A loss-rate query: the degree distribution actually seen by the
    receiver (original, post-erasure, or post slot-removal), the number
    of contending users m, and the frame length n."""

    dist: DegreeDistribution
    m: int
    n: int
    catalog: Catalog = field(default=None)

    def __post_init__(self):
        if self.catalog is None:
            object.__setattr__(self, "catalog", default_catalog())
        if self.m < 0:
            raise ValueError(f"user count must be nonnegative, got {self.m}")
        max_mu = max(r.mu for r in self.catalog.records)
        if self.n < self.catalog.q + max_mu:
            raise ValueError(
                f"frame length {self.n} too short for catalog with max "
                f"degree {self.catalog.q} and max CN count {max_mu}")


def log_alpha(record, dist, m):
    """Log expected number of ways to draw the record's user multiset
    from m users with the given degree distribution; -inf if impossible."""
    if m < record.nu:
        return -math.inf
    total = log_falling_factorial(m, record.nu)
    for d, v in enumerate(record.profile):
        if v == 0:
            continue
        lam = dist.probability(d)
        if lam <= 0.0:
            return -math.inf
        total += v * math.log(lam) - math.lgamma(v + 1)
    return total


def alpha(record, dist, m):
    return math.exp(log_alpha(record, dist, m))


def beta(record, n):
    """Number of ways to place the record's slots within the frame."""
    if n < record.mu:
        raise ValueError(f"frame length {n} < slot count {record.mu}")
    return math.comb(n, record.mu)


def log_beta(record, n):
    return log_comb(n, record.mu)


def log_gamma(record, n):
    total = math.log(record.c)
    for d, v in enumerate(record.profile):
        if v:
            total -= v * log_comb(n, d)
    return total


def gamma(record, n):
    """Probability that the selected users wire themselves to the selected
    slots so as to realize the record's pattern."""
    return math.exp(log_gamma(record, n))


def delta_bounds(record, n, m, q, graph_profile=None):
    """Lower bounds on the probability that the m - nu outside users do not
    extend the pattern.  Diagnostic only; the union bound sets this to 1.

    The sharper bound multiplies, per outside user of degree d, the chance
    that all d of its slots avoid the pattern's mu slots.  When the graph
    profile is unknown every outside user is assumed to have the worst-case
    degree q.  The closed-form bound exponentiates a crude per-slot rate.
    Returns (sharp, closed_form), with sharp >= closed_form.
    """
    if n < q + record.mu:
        raise ValueError(
            f"bounds require n >= q + mu, got n={n}, q={q}, mu={record.mu}")
    outside = max(m - record.nu, 0)
    if graph_profile is not None:
        log_tight = 0.0
        for d, v_g in enumerate(graph_profile):
            if d == 0:
                continue
            excess = max(v_g - (record.profile[d] if d < len(record.profile) else 0), 0)
            if excess:
                log_tight += excess * (log_falling_factorial(n - record.mu, d)
                                       - log_falling_factorial(n, d))
    else:
        log_tight = outside * (log_falling_factorial(n - record.mu, q)
                               - log_falling_factorial(n, q))
    loose = math.exp(-q * record.mu * outside / (n - q + 1 - record.mu))
    return math.exp(log_tight), loose


def union_bound_unresolved(ef_input, d):
    """Upper bound on the expected number of unresolved degree-d users,
    summing pattern occurrence rates over the catalog."""
    terms = []
    for record in ef_input.catalog.records:
        v_d = record.profile[d] if d < len(record.profile) else 0
        if v_d == 0:
            continue
        la = log_alpha(record, ef_input.dist, ef_input.m)
        if la == -math.inf:
            continue
        terms.append(math.log(v_d) + la + log_beta(record, ef_input.n)
                     + log_gamma(record, ef_input.n))
    if not terms:
        return 0.0
    return float(np.exp(logsumexp(terms)))


def ef_plr(ef_input, d):
    """Approximate loss rate for users of degree d, or None when the
    distribution puts no mass on d."""
    if not 1 <= d <= ef_input.catalog.q:
        raise ValueError(
            f"degree {d} outside catalog range 1..{ef_input.catalog.q}")
    lam = ef_input.dist.probability(d)
    if lam <= 0.0:
        return None
    if ef_input.m == 0:
        return None
    bound = union_bound_unresolved(ef_input, d)
    return min(bound / (ef_input.m * lam), 1.0)


def ef_plr_average(ef_input):
    """Degree-averaged approximate loss rate.

    Degree-0 users are lost with probability 1; degrees above the catalog
    cap contribute zero (no catalog pattern contains them), which slightly
    underestimates the average for heavy distributions.
    """
    dist = ef_input.dist
    total = dist.probability(0)
    for d in range(1, ef_input.catalog.q + 1):
        lam = dist.probability(d)
        if lam > 0.0:
            total += lam * ef_plr(ef_input, d)
    return min(total, 1.0)


def slotted_aloha_exact(n, g):
    """Exact loss rate for single-transmission random access: the chance
    that at least one of the other n*g - 1 users picks your slot."""
    return 1.0 - (1.0 - 1.0 / n) ** (n * g - 1.0)


def ef_plr_table(ef_input, max_d):
    """Per-degree loss table p[0..max_d] with p[0] = 1 and degrees above
    the catalog cap set to 0.  Raises if a needed in-range degree has no
    mass (the conditional rate is undefined there)."""
    table = [1.0]
    for d in range(1, max_d + 1):
        if d > ef_input.catalog.q:
            table.append(0.0)
            continue
        p = ef_plr(ef_input, d)
        if p is None:
            raise ValueError(
                f"degree {d} has no mass under the receiver-side "
                "distribution; conditional loss rate undefined")
        table.append(p)
    return table


def ef_plr_original_degree(original_dist, l, r, eps, n, m, catalog=None):
    """Approximate loss rate for a neighbor of original degree l as seen by
    a receiver of degree r: builds the receiver-side degree table from the
    catalog, then folds erasures and slot removal back onto degree l."""
    ideg = pec_induced(original_dist, eps)
    bdist = broadcast_induced(ideg, r, n)
    ef_input = EfInput(dist=bdist, m=m, n=n, catalog=catalog)
    table = ef_plr_table(ef_input, l)
    return reverse_transform_plr(table, l, r, eps, n)


def ef_broadcast_plr(original_dist, n, m, eps=0.0, catalog=None):
    """Network-averaged approximate loss rate for the all-to-all setting:
    average the receiver-side estimate over the receiver's own degree."""
    ideg = pec_induced(original_dist, eps)
    total = 0.0
    for r, weight in enumerate(original_dist.coeffs):
        if weight <= 0.0:
            continue
        bdist = broadcast_induced(ideg, r, n)
        total += weight * ef_plr_average(
            EfInput(dist=bdist, m=m, n=n, catalog=catalog))
    return min(total, 1.0)
