"""Bipartite frame graphs: users (variable nodes) vs. slots (check nodes).

A frame is n slots; each user transmits copies of its packet in a small set
of distinct slots.  ``sample_original`` draws such a graph from a degree
distribution, ``apply_pec`` erases individual copies, and ``receiver_view``
drops the slots a receiver spent transmitting (reindexing the rest).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dist import DegreeDistribution


@dataclass(frozen=True)
class FrameGraph:
    """n_slots check nodes plus one sorted slot tuple per user."""

    n_slots: int
    users: tuple[tuple[int, ...], ...]
    original_degrees: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        if self.n_slots < 0:
            raise ValueError(f"negative slot count {self.n_slots}")
        for j, slots in enumerate(self.users):
            if any(s < 0 or s >= self.n_slots for s in slots):
                raise ValueError(f"user {j} has slots outside [0, {self.n_slots})")
            if len(set(slots)) != len(slots):
                raise ValueError(f"user {j} repeats a slot: {slots}")
            if tuple(sorted(slots)) != slots:
                raise ValueError(f"user {j} slots not sorted: {slots}")
        if self.original_degrees is not None and len(self.original_degrees) != len(self.users):
            raise ValueError("original_degrees length does not match user count")

    @property
    def n_users(self) -> int:
        return len(self.users)

    def degree(self, j: int) -> int:
        return len(self.users[j])

    def degrees(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.users)

    def to_json(self) -> str:
        return json.dumps({"n": self.n_slots, "users": [list(s) for s in self.users]})

    @classmethod
    def from_json(cls, text: str) -> "FrameGraph":
        obj = json.loads(text)
        return cls(obj["n"], tuple(tuple(s) for s in obj["users"]))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_slots(rng: np.random.Generator, n: int, degree: int) -> tuple[int, ...]:
    """Uniform degree-subset of [0, n) via sparse partial Fisher-Yates.

    Only the touched entries of the virtual permutation are stored, so cost
    is O(degree) even when n is 1e7.
    """
    if degree > n:
        raise ValueError(f"degree {degree} exceeds slot count {n}")
    touched: dict[int, int] = {}
    picked = []
    for i in range(degree):
        j = int(rng.integers(i, n))
        vi = touched.get(i, i)
        vj = touched.get(j, j)
        picked.append(vj)
        touched[j] = vi
        touched[i] = vj
    return tuple(sorted(picked))


def sample_original(
    dist: DegreeDistribution, m: int, n: int, seed
) -> FrameGraph:
    """Sample m users with i.i.d. degrees from dist and uniform slot subsets."""
    if m < 0:
        raise ValueError(f"negative user count {m}")
    if n < dist.q:
        raise ValueError(f"frame length n={n} below max degree q={dist.q}")
    rng = _as_rng(seed)
    degrees = rng.choice(dist.q + 1, size=m, p=dist.as_array())
    users = tuple(sample_slots(rng, n, int(d)) for d in degrees)
    return FrameGraph(n, users, tuple(int(d) for d in degrees))


def apply_pec(graph: FrameGraph, eps: float, seed) -> FrameGraph:
    """Erase each packet copy (edge) independently with probability eps."""
    if not (0.0 <= eps <= 1.0):
        raise ValueError(f"erasure probability must lie in [0, 1], got {eps}")
    rng = _as_rng(seed)
    users = []
    for slots in graph.users:
        if not slots:
            users.append(())
            continue
        keep = rng.random(len(slots)) >= eps
        users.append(tuple(s for s, k in zip(slots, keep) if k))
    degrees = graph.original_degrees
    if degrees is None:
        degrees = graph.degrees()
    return FrameGraph(graph.n_slots, tuple(users), degrees)


def receiver_view(graph: FrameGraph, receiver_slots) -> FrameGraph:
    """Remove the receiver's own slots and renumber the remaining ones."""
    removed = sorted(set(receiver_slots))
    for s in removed:
        if s < 0 or s >= graph.n_slots:
            raise ValueError(f"receiver slot {s} outside [0, {graph.n_slots})")
    removed_arr = np.asarray(removed, dtype=int)
    removed_set = set(removed)

    def new_index(s: int) -> int:
        return s - int(np.searchsorted(removed_arr, s))

    users = tuple(
        tuple(new_index(s) for s in slots if s not in removed_set)
        for slots in graph.users
    )
    degrees = graph.original_degrees
    if degrees is None:
        degrees = graph.degrees()
    return FrameGraph(graph.n_slots - len(removed), users, degrees)
