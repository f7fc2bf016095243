"""Discrete-event CSMA/CA broadcast baseline over the erasure channel.

All m+1 users hear each other (no hidden terminals) and periodically
broadcast a packet, attempting kappa staggered copies per period.  A
sender listens for the arbitration gap (AIFS); if the channel is or
becomes busy it draws a backoff counter once, counts it down during idle
slots (frozen while busy), and transmits at zero.  Only simultaneous
starts collide, and collisions are destructive.  Erasures hit collision-
free receptions independently per receiver and never influence the MAC,
which uses a separate random stream.

Time is integer nanoseconds throughout; no float drift.
"""

import heapq
from dataclasses import dataclass

import numpy as np

US = 1000  # ns per microsecond

# Normative airtime per packet size in bytes.  The values include the
# preamble plus whole-symbol padding, so they sit slightly above
# preamble + payload / rate.
PACKET_AIRTIME_US = {200: 312, 400: 576}


@dataclass(frozen=True)
class CsmaConfig:
    m: int                        # neighbors; m+1 users contend
    packet_size: int = 200        # bytes, keys the airtime table
    kappa: int = 2                # transmission attempts per packet
    eps: float = 0.0
    cw: int = 511                 # backoff drawn uniformly from {0..cw}
    data_rate_mbps: float = 6.0
    preamble_us: float = 40.0
    csma_slot_us: float = 13.0
    aifs_us: float = 58.0
    frame_ms: float = 100.0
    guard_us: float = 5.0
    windows: int = 8              # measured frame periods per run
    runs: int = 16                # independent runs for the CI
    seed: int = 0

    def __post_init__(self):
        if self.packet_size not in PACKET_AIRTIME_US:
            raise ValueError(f"no airtime entry for {self.packet_size} bytes")
        if self.m < 0 or self.kappa < 1 or self.cw < 0:
            raise ValueError("m, kappa, cw out of range")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"erasure probability out of range: {self.eps}")
        if self.windows < 1 or self.runs < 1:
            raise ValueError("windows and runs must be positive")

    @property
    def t_pack_ns(self):
        return PACKET_AIRTIME_US[self.packet_size] * US

    @property
    def t_slot_ns(self):
        # slotted-frame equivalent: airtime plus guard
        return self.t_pack_ns + round(self.guard_us * US)

    @property
    def t_frame_ns(self):
        return round(self.frame_ms * 1e6)

    @property
    def t_aifs_ns(self):
        return round(self.aifs_us * US)

    @property
    def t_csma_ns(self):
        return round(self.csma_slot_us * US)

    @property
    def n(self):
        """Slot count of the equivalent slotted frame (load bookkeeping)."""
        return self.t_frame_ns // self.t_slot_ns

    @property
    def g(self):
        return (self.m + 1) / self.n

    @property
    def warmup_ns(self):
        # statistics start after two frame periods of transient
        return 2 * self.t_frame_ns


@dataclass(frozen=True)
class CsmaResult:
    plr: float            # None when m == 0 (nobody to receive)
    ci_low: float
    ci_high: float
    run_plrs: tuple
    attempted: int
    collided: int
    dropped: int
    erased: int
    skipped: int


class _Contender:
    __slots__ = ("pkt", "deadline", "align", "rem", "drew", "version")

    def __init__(self, pkt, deadline, align, rem, drew):
        self.pkt = pkt
        self.deadline = deadline
        self.align = align
        self.rem = rem
        self.drew = drew
        self.version = 0


def _run_once(config, run_index, trace=False):
    mac = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(run_index, 0)))
    erase = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(run_index, 1)))

    F = config.t_frame_ns
    TP = config.t_pack_ns
    AIFS = config.t_aifs_ns
    SLOT = config.t_csma_ns
    n_users = config.m + 1
    n_packets = 2 + config.windows + 1   # warmup + measured + spillover
    spacing = F // config.kappa

    tau = mac.integers(0, F, size=n_users)
    arrivals = []
    for j in range(n_users):
        for i in range(1, n_packets + 1):
            base = int(tau[j]) + (i - 1) * F
            for k in range(config.kappa):
                arrivals.append((base + k * spacing, j, i))
    arrivals.sort()

    def provisional(c):
        return c.align + AIFS + c.rem * SLOT

    contenders = {}
    heap = []   # (provisional_time, user, version)

    def push(user):
        c = contenders[user]
        c.version += 1
        heapq.heappush(heap, (provisional(c), user, c.version))

    busy_until = 0
    own_tx_end = [0] * n_users
    started = {}          # (user, pkt) -> copies transmitted
    txs = []              # (start, user, pkt, collided)
    counts = {"attempted": 0, "collided": 0, "skipped": 0}
    ai = 0

    def pop_next_tx():
        # earliest valid contender; cancels attempts that miss the deadline
        while heap:
            t, user, version = heap[0]
            c = contenders.get(user)
            if c is None or c.version != version:
                heapq.heappop(heap)
                continue
            if t >= c.deadline:
                heapq.heappop(heap)
                del contenders[user]
                continue
            return t
        return None

    while True:
        next_tx = pop_next_tx()
        next_arr = arrivals[ai][0] if ai < len(arrivals) else None
        if next_tx is None and next_arr is None:
            break

        if next_tx is not None and (next_arr is None or next_tx <= next_arr):
            t0 = next_tx
            tie = []
            while heap and heap[0][0] == t0:
                _, user, version = heapq.heappop(heap)
                c = contenders.get(user)
                if c is not None and c.version == version:
                    tie.append(user)
            tie.sort()
            collided = len(tie) > 1
            for user in tie:
                c = contenders.pop(user)
                txs.append((t0, user, c.pkt, collided))
                started[(user, c.pkt)] = started.get((user, c.pkt), 0) + 1
                own_tx_end[user] = t0 + TP
                counts["attempted"] += 1
                counts["collided"] += collided
            busy_until = t0 + TP
            for user in sorted(contenders):
                c = contenders[user]
                aifs_end = c.align + AIFS
                if t0 < aifs_end:
                    if not c.drew:
                        c.rem = int(mac.integers(0, config.cw + 1))
                        c.drew = True
                else:
                    # only whole idle backoff slots before the busy start count
                    c.rem -= (t0 - aifs_end) // SLOT
                c.align = busy_until
                push(user)
            continue

        t, user, pkt = arrivals[ai]
        ai += 1
        stale = contenders.get(user)
        if stale is not None and stale.deadline <= t:
            del contenders[user]
            stale = None
        if stale is not None or own_tx_end[user] > t:
            counts["skipped"] += 1   # radio still occupied by an earlier copy
            continue
        deadline = int(tau[user]) + pkt * F
        if t < busy_until:
            c = _Contender(pkt, deadline, busy_until,
                           int(mac.integers(0, config.cw + 1)), True)
        else:
            c = _Contender(pkt, deadline, t, 0, False)
        contenders[user] = c
        push(user)

    # receptions at the tagged receiver, user 0; a packet counts once, in
    # the window where its first clean copy finishes
    first_success = {}
    erased = 0
    for start, user, pkt, collided in txs:
        if user == 0 or collided:
            continue
        if erase.random() < config.eps:
            erased += 1
            continue
        key = (user, pkt)
        if key not in first_success:
            first_success[key] = start + TP

    t0 = config.warmup_ns
    span_hi = t0 + config.windows * F
    per_window = {}
    for (user, pkt), x in first_success.items():
        if t0 <= x < span_hi:
            key = (user, (x - t0) // F)
            per_window[key] = per_window.get(key, 0) + 1
    eta_total = sum(min(v, 2) for v in per_window.values())

    dropped = 0
    for j in range(n_users):
        for i in range(1, n_packets + 1):
            deadline = int(tau[j]) + i * F
            if t0 <= deadline < t0 + config.windows * F:
                if started.get((j, i), 0) == 0:
                    dropped += 1

    denom = config.m * config.windows
    plr = 1.0 - eta_total / denom if denom else None
    out = (plr, counts["attempted"], counts["collided"], dropped, erased,
           counts["skipped"])
    return out + (tuple(txs),) if trace else out


def csma_simulate(config):
    """Average the per-run loss rate over independent runs; the CI is a
    normal interval over the run means."""
    if config.m == 0:
        return CsmaResult(plr=None, ci_low=None, ci_high=None, run_plrs=(),
                          attempted=0, collided=0, dropped=0, erased=0,
                          skipped=0)
    plrs = []
    totals = [0] * 5
    for r in range(config.runs):
        plr, *counters = _run_once(config, r)
        plrs.append(plr)
        totals = [a + b for a, b in zip(totals, counters)]
    arr = np.asarray(plrs)
    mean = float(arr.mean())
    if len(arr) > 1:
        half = 1.959963984540054 * float(arr.std(ddof=1)) / len(arr) ** 0.5
    else:
        half = float("nan")
    # single runs can overshoot the window budget and dip negative; the
    # estimator is unbiased, so only the aggregate is clipped into range
    clipped = min(max(mean, 0.0), 1.0)
    return CsmaResult(plr=clipped, ci_low=max(mean - half, 0.0),
                      ci_high=min(max(mean + half, clipped), 1.0),
                      run_plrs=tuple(plrs),
                      attempted=totals[0], collided=totals[1],
                      dropped=totals[2], erased=totals[3], skipped=totals[4])
