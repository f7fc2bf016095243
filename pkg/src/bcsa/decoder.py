"""Iterative peeling over a frame graph (successive interference cancellation).

A slot containing exactly one not-yet-resolved packet copy resolves that
user; all of the user's other copies are then subtracted, which may create
new singleton slots.  The fixpoint is independent of processing order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import FrameGraph


@dataclass(frozen=True)
class DecodeResult:
    resolved: tuple[bool, ...]
    iterations: int

    @property
    def n_resolved(self) -> int:
        return sum(self.resolved)


def peel(graph: FrameGraph, slot_order: str = "ascending") -> DecodeResult:
    """Run peeling to its fixpoint; iterations counts synchronous rounds."""
    if slot_order not in ("ascending", "descending"):
        raise ValueError(f"unknown slot_order {slot_order!r}")
    n = graph.n_slots
    slot_users: list[list[int]] = [[] for _ in range(n)]
    for j, slots in enumerate(graph.users):
        for s in slots:
            slot_users[s].append(j)
    slot_degree = [len(u) for u in slot_users]
    resolved = [False] * graph.n_users

    frontier = [s for s in range(n) if slot_degree[s] == 1]
    if slot_order == "descending":
        frontier.reverse()
    rounds = 0
    while frontier:
        rounds += 1
        next_frontier = []
        for s in frontier:
            if slot_degree[s] != 1:
                continue
            user = next(j for j in slot_users[s] if not resolved[j])
            resolved[user] = True
            for t in graph.users[user]:
                slot_degree[t] -= 1
                if slot_degree[t] == 1:
                    next_frontier.append(t)
        if slot_order == "descending":
            next_frontier.sort(reverse=True)
        frontier = next_frontier
    return DecodeResult(tuple(resolved), rounds)


def unresolved_users(graph: FrameGraph) -> tuple[int, ...]:
    result = peel(graph)
    return tuple(j for j, r in enumerate(result.resolved) if not r)
