"""Frame-level Monte Carlo estimation of packet loss rates.

Frames are simulated in fixed-size batches; batch k draws its random
stream from SeedSequence(seed, spawn_key=(k,)), so results are
bitwise-identical for a given config no matter how many workers run the
batches.  Within a batch everything is vectorized numpy: degree draws,
distinct-slot sampling by rejection, erasures, receiver slot removal,
and a whole-batch peeling loop over global slot ids.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dist import DegreeDistribution

Z95 = 1.959963984540054

WORKERS_ENV = "BCSA_WORKERS"


@dataclass(frozen=True)
class SimConfig:
    original_dist: DegreeDistribution
    m: int                       # neighbors per receiver (receiver excluded)
    n: int                       # slots per frame
    eps: float = 0.0
    mode: str = "broadcast"      # "broadcast" or "unicast"
    frames: int = None           # fixed frame count; None = adaptive
    target_rel_ci: float = 0.1   # adaptive goal: CI half-width / estimate
    max_frames: int = 10_000_000
    batch_frames: int = 4096
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("broadcast", "unicast"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.m < 1:
            raise ValueError(f"need at least one neighbor, got m={self.m}")
        if self.n < self.original_dist.q:
            raise ValueError(
                f"frame length {self.n} below max degree {self.original_dist.q}")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"erasure probability out of range: {self.eps}")
        if self.frames is not None and self.frames < 1:
            raise ValueError("frame count must be positive")
        if self.batch_frames < 1:
            raise ValueError("batch size must be positive")

    @property
    def g(self):
        # the receiver also loads the channel in the all-to-all setting
        if self.mode == "broadcast":
            return (self.m + 1) / self.n
        return self.m / self.n


@dataclass(frozen=True)
class RateEstimate:
    value: float
    ci_low: float
    ci_high: float
    trials: int


def wilson_interval(successes, trials, z=Z95):
    """Vectorized Wilson score interval; NaN where trials == 0."""
    successes = np.asarray(successes, dtype=np.float64)
    trials = np.asarray(trials, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = successes / trials
        denom = 1.0 + z * z / trials
        center = (p + z * z / (2.0 * trials)) / denom
        half = (z / denom) * np.sqrt(p * (1.0 - p) / trials
                                     + z * z / (4.0 * trials * trials))
    return center - half, center + half


def plr_from_counts(unresolved, exposure, z=Z95):
    """Point estimate with Wilson 95% CI; None when there were no trials
    (no information, as opposed to an observed rate of zero)."""
    if unresolved < 0 or exposure < 0 or unresolved > exposure:
        raise ValueError(f"bad counts: {unresolved}/{exposure}")
    if exposure == 0:
        return None
    lo, hi = wilson_interval(unresolved, exposure, z)
    return RateEstimate(value=unresolved / exposure, ci_low=float(lo),
                        ci_high=float(hi), trials=exposure)


def _peel_batch(user_ids, slot_ids, n_users):
    """Peel every frame in a batch at once.

    user_ids/slot_ids describe edges with globally unique ids per user and
    per slot.  Repeatedly: find slots with exactly one remaining edge,
    mark their users resolved, drop all edges of resolved users.  Returns
    a boolean resolved array of length n_users; users with no edges stay
    unresolved (nothing to peel them from).
    """
    resolved = np.zeros(n_users, dtype=bool)
    if user_ids.size == 0:
        return resolved
    _, slot_compact = np.unique(slot_ids, return_inverse=True)
    n_slots = int(slot_compact.max()) + 1
    alive = np.ones(user_ids.size, dtype=bool)
    while True:
        deg = np.bincount(slot_compact[alive], minlength=n_slots)
        hit = alive & (deg[slot_compact] == 1)
        users = np.unique(user_ids[hit])
        if users.size == 0:
            return resolved
        resolved[users] = True
        alive &= ~resolved[user_ids]


def _sample_distinct_slots(rng, n, degrees, q):
    """Uniform distinct slot tuples per user via rejection.

    degrees has shape (frames, users); returns (frames, users, q) slot
    indices with positions beyond each user's degree left arbitrary.
    """
    shape = degrees.shape + (q,)
    slots = rng.integers(0, n, size=shape, dtype=np.int64)
    pos = np.arange(q)
    valid = pos < degrees[..., None]
    while True:
        bad = np.zeros(degrees.shape, dtype=bool)
        for i in range(q):
            for j in range(i + 1, q):
                bad |= (slots[..., i] == slots[..., j]) & valid[..., i] & valid[..., j]
        if not bad.any():
            return slots
        slots[bad] = rng.integers(0, n, size=(int(bad.sum()), q), dtype=np.int64)


def _simulate_batch(config, batch_index, batch_size):
    """Simulate one batch; returns the four count matrices.

    Matrix layout: rows are degree cells (induced degree d or original
    degree l), columns are the receiver's own degree r (column 0 holds
    everything in unicast mode).
    """
    rng = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(batch_index,)))
    coeffs = np.asarray(config.original_dist.coeffs)
    q = len(coeffs) - 1
    broadcast = config.mode == "broadcast"
    n_users = config.m + 1 if broadcast else config.m
    B, m, n = batch_size, config.m, config.n

    degrees = rng.choice(q + 1, size=(B, n_users), p=coeffs)
    slots = _sample_distinct_slots(rng, n, degrees, max(q, 1))
    pos_valid = np.arange(max(q, 1)) < degrees[..., None]
    if config.eps > 0.0:
        kept = pos_valid & (rng.random(slots.shape) >= config.eps)
    else:
        kept = pos_valid

    if broadcast:
        # the receiver (user 0) cannot listen in its own transmit slots
        rcv_deg = degrees[:, 0]
        rcv_busy = np.zeros((B, n), dtype=bool)
        rows = np.repeat(np.arange(B), rcv_deg)
        cols = slots[:, 0, :][pos_valid[:, 0, :]]
        rcv_busy[rows, cols] = True
        nb_slots = slots[:, 1:, :]
        frame_ix = np.arange(B)[:, None, None]
        clean = kept[:, 1:, :] & ~rcv_busy[frame_ix, nb_slots]
        original = degrees[:, 1:]
        r_col = np.broadcast_to(rcv_deg[:, None], (B, m))
    else:
        nb_slots = slots
        clean = kept
        original = degrees
        r_col = np.zeros((B, m), dtype=np.int64)

    induced = clean.sum(axis=2)

    f_ix, u_ix, s_ix = np.nonzero(clean)
    user_global = f_ix * m + u_ix
    slot_global = f_ix * n + nb_slots[f_ix, u_ix, s_ix]
    resolved = _peel_batch(user_global, slot_global, B * m)
    unresolved = ~resolved.reshape(B, m)

    n_cells = q + 1
    def tally(row_deg, weights=None):
        flat = (row_deg * n_cells + r_col).ravel()
        w = None if weights is None else weights.ravel()
        return np.bincount(flat, weights=w,
                           minlength=n_cells * n_cells).reshape(n_cells, n_cells)

    exposure_d_r = tally(induced)
    unresolved_d_r = tally(induced, unresolved)
    exposure_l_r = tally(original)
    unresolved_l_r = tally(original, unresolved)
    return (exposure_d_r.astype(np.int64), unresolved_d_r.astype(np.int64),
            exposure_l_r.astype(np.int64), unresolved_l_r.astype(np.int64))


@dataclass(frozen=True, eq=False)
class PlrReport:
    """All loss-rate estimates from one simulation, plus the raw counts.

    Cell matrices are indexed [degree, receiver_degree].  The row for
    induced degree 0 is pinned to exactly 1.0: a user with no surviving
    copies is lost by definition, not by measurement.  p_bar recombines
    the per-receiver-degree rates with the original distribution weights
    (restricted to observed receiver degrees); its CI is the Wilson
    interval of the pooled counts.
    """

    config: SimConfig
    frames: int
    ci_target_met: bool
    exposure_d_r: np.ndarray
    unresolved_d_r: np.ndarray
    exposure_l_r: np.ndarray
    unresolved_l_r: np.ndarray
    p_d_r: np.ndarray = field(init=False, default=None)
    p_d_r_low: np.ndarray = field(init=False, default=None)
    p_d_r_high: np.ndarray = field(init=False, default=None)
    p_l_r: np.ndarray = field(init=False, default=None)
    p_l_r_low: np.ndarray = field(init=False, default=None)
    p_l_r_high: np.ndarray = field(init=False, default=None)
    p_r: np.ndarray = field(init=False, default=None)
    p_r_low: np.ndarray = field(init=False, default=None)
    p_r_high: np.ndarray = field(init=False, default=None)
    p_bar: float = field(init=False, default=None)
    p_bar_low: float = field(init=False, default=None)
    p_bar_high: float = field(init=False, default=None)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)
        with np.errstate(invalid="ignore"):
            p = self.unresolved_d_r / self.exposure_d_r
        lo, hi = wilson_interval(self.unresolved_d_r, self.exposure_d_r)
        p[0, :], lo[0, :], hi[0, :] = 1.0, 1.0, 1.0
        set_("p_d_r", p), set_("p_d_r_low", lo), set_("p_d_r_high", hi)

        with np.errstate(invalid="ignore"):
            pl = self.unresolved_l_r / self.exposure_l_r
        lo, hi = wilson_interval(self.unresolved_l_r, self.exposure_l_r)
        set_("p_l_r", pl), set_("p_l_r_low", lo), set_("p_l_r_high", hi)

        exp_r = self.exposure_d_r.sum(axis=0)
        unr_r = self.unresolved_d_r.sum(axis=0)
        with np.errstate(invalid="ignore"):
            pr = unr_r / exp_r
        lo, hi = wilson_interval(unr_r, exp_r)
        set_("p_r", pr), set_("p_r_low", lo), set_("p_r_high", hi)

        if self.config.mode == "unicast":
            pooled = plr_from_counts(int(unr_r.sum()), int(exp_r.sum()))
            if pooled is not None:
                set_("p_bar", pooled.value), set_("p_bar_low", pooled.ci_low)
                set_("p_bar_high", pooled.ci_high)
            return
        weights = np.asarray(self.config.original_dist.coeffs)
        weights = weights[:len(exp_r)]
        observed = (exp_r > 0) & (weights > 0)
        if observed.any():
            wsum = weights[observed].sum()
            set_("p_bar", float((weights[observed] * pr[observed]).sum() / wsum))
            pooled = plr_from_counts(int(unr_r[observed].sum()),
                                     int(exp_r[observed].sum()))
            set_("p_bar_low", pooled.ci_low), set_("p_bar_high", pooled.ci_high)


def _worker_count():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _stop_satisfied(config, unresolved, exposure):
    if exposure == 0 or unresolved == 0:
        return False
    lo, hi = wilson_interval(unresolved, exposure)
    half = 0.5 * (float(hi) - float(lo))
    return half <= config.target_rel_ci * (unresolved / exposure)


def run(config):
    """Simulate frames until the fixed count or the CI target is reached.

    Batches are always processed in index order, so the report is
    reproducible bit for bit regardless of the worker count (workers only
    precompute future batches speculatively).
    """
    q = config.original_dist.q
    shape = (q + 1, q + 1)
    totals = [np.zeros(shape, dtype=np.int64) for _ in range(4)]
    frames_done = 0
    target_met = False
    fixed = config.frames
    budget = fixed if fixed is not None else config.max_frames

    def batch_sizes():
        k = 0
        remaining = budget
        while remaining > 0:
            size = min(config.batch_frames, remaining)
            yield k, size
            k += 1
            remaining -= size

    def consume(result):
        nonlocal frames_done, target_met
        for tot, part in zip(totals, result):
            tot += part
        if fixed is None:
            target_met = _stop_satisfied(config, int(totals[1].sum()),
                                         int(totals[0].sum()))

    workers = _worker_count()
    if workers == 1:
        for k, size in batch_sizes():
            consume(_simulate_batch(config, k, size))
            frames_done += size
            if fixed is None and target_met:
                break
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pending = {}
            it = iter(batch_sizes())
            exhausted = False
            next_k = 0
            sizes = {}
            while True:
                while not exhausted and len(pending) < workers + 1:
                    try:
                        k, size = next(it)
                    except StopIteration:
                        exhausted = True
                        break
                    pending[k] = pool.submit(_simulate_batch, config, k, size)
                    sizes[k] = size
                if next_k not in pending:
                    break
                consume(pending.pop(next_k).result())
                frames_done += sizes.pop(next_k)
                next_k += 1
                if fixed is None and target_met:
                    for fut in pending.values():
                        fut.cancel()
                    break

    if fixed is not None:
        target_met = True
    return PlrReport(config=config, frames=frames_done,
                     ci_target_met=target_met,
                     exposure_d_r=totals[0], unresolved_d_r=totals[1],
                     exposure_l_r=totals[2], unresolved_l_r=totals[3])
