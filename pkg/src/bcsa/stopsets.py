"""Enumeration and counting of minimal stopping sets.

A stopping set is a connected user/slot subgraph in which every slot holds
at least two packet copies; peeling can never resolve any of its users.  It
is minimal if no nonempty proper subset of its users forms a stopping set of
its own.  Error-floor analysis needs, for every isomorphism class S up to a
slot budget mu, the profile (users per degree), the slot count mu(S), and
the number c(S) of distinct ways labeled users can attach to labeled slots
to realize S.

Representation: with the slots of S labeled 0..mu-1, each user is a bitmask
over slots, and the (unlabeled) graph is the multiset of those bitmasks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from itertools import permutations

from .graph import FrameGraph

MAX_FEASIBLE_MU = 5


class EnumerationBudgetError(ValueError):
    """Requested slot budget is beyond what exhaustive search can handle."""


@dataclass(frozen=True)
class StoppingSetRecord:
    profile: tuple[int, ...]   # users per degree, index 0..q (index 0 always 0)
    mu: int                    # number of slots
    nu: int                    # number of users
    c: int                     # labeled attachment configurations
    vn_masks: tuple[int, ...]  # canonical user bitmasks over the mu slots

    def edges(self) -> tuple[tuple[int, int], ...]:
        out = []
        for v, mask in enumerate(self.vn_masks):
            for cn in range(self.mu):
                if mask >> cn & 1:
                    out.append((v, cn))
        return tuple(out)


@dataclass(frozen=True)
class Catalog:
    q: int
    max_mu: int
    records: tuple[StoppingSetRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def with_mu_at_most(self, mu: int) -> "Catalog":
        kept = tuple(r for r in self.records if r.mu <= mu)
        return Catalog(self.q, min(self.max_mu, mu), kept)

    def counts_by_mu(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for r in self.records:
            out[r.mu] = out.get(r.mu, 0) + 1
        return out


def _coverage(masks, mu: int) -> list[int]:
    counts = [0] * mu
    for mask in masks:
        for cn in range(mu):
            if mask >> cn & 1:
                counts[cn] += 1
    return counts


def _is_closed(masks, mu: int) -> bool:
    """Every covered slot is covered at least twice (and something is covered)."""
    if not masks:
        return False
    for count in _coverage(masks, mu):
        if count == 1:
            return False
    return True


def _is_connected(masks, mu: int) -> bool:
    touched = 0
    for mask in masks:
        touched |= mask
    if touched != (1 << mu) - 1:
        return False
    comp = masks[0]
    rest = list(masks[1:])
    changed = True
    while changed and rest:
        changed = False
        for mask in list(rest):
            if mask & comp:
                comp |= mask
                rest.remove(mask)
                changed = True
    return not rest


def canonical_masks(masks, mu: int) -> tuple[int, ...]:
    """Lexicographically smallest sorted bitmask tuple over slot relabelings."""
    best = None
    for perm in permutations(range(mu)):
        mapped = []
        for mask in masks:
            new = 0
            for cn in range(mu):
                if mask >> cn & 1:
                    new |= 1 << perm[cn]
            mapped.append(new)
        key = tuple(sorted(mapped))
        if best is None or key < best:
            best = key
    return best


def _automorphisms(masks, mu: int) -> int:
    """Size of the slot+user automorphism group of the unlabeled graph."""
    sorted_masks = tuple(sorted(masks))
    mult: dict[int, int] = {}
    for mask in sorted_masks:
        mult[mask] = mult.get(mask, 0) + 1
    mult_factor = math.prod(math.factorial(k) for k in mult.values())
    total = 0
    for perm in permutations(range(mu)):
        mapped = []
        for mask in sorted_masks:
            new = 0
            for cn in range(mu):
                if mask >> cn & 1:
                    new |= 1 << perm[cn]
            mapped.append(new)
        if tuple(sorted(mapped)) == sorted_masks:
            total += mult_factor
    return total


def count_configs(record_or_masks, mu: int | None = None) -> int:
    """Number of edge assignments of labeled users to labeled slots giving S.

    Users carry fixed degrees; slots are the mu chosen slots.  Counted via
    orbit size: mu! * prod_d v_d! / |Aut(S)|.
    """
    if isinstance(record_or_masks, StoppingSetRecord):
        masks = record_or_masks.vn_masks
        mu = record_or_masks.mu
    else:
        masks = tuple(record_or_masks)
        if mu is None:
            raise ValueError("mu required when passing raw masks")
    degree_counts: dict[int, int] = {}
    for mask in masks:
        d = bin(mask).count("1")
        degree_counts[d] = degree_counts.get(d, 0) + 1
    numerator = math.factorial(mu) * math.prod(
        math.factorial(v) for v in degree_counts.values()
    )
    aut = _automorphisms(masks, mu)
    assert numerator % aut == 0
    return numerator // aut


def _enumerate_for_mu(mu: int, q: int) -> list[StoppingSetRecord]:
    max_deg = min(q, mu)
    types = [m for m in range(1, 1 << mu) if 1 <= bin(m).count("1") <= max_deg]
    nu_cap = 2 * mu
    cn_deg_cap = 2 * mu
    found: dict[tuple[int, ...], StoppingSetRecord] = {}

    def closed_subset_state(stack: list[int]) -> str:
        """Classify sub-multisets containing the newest user: none closed,
        only the full set closed, or some proper subset closed."""
        k = len(stack)
        newest = stack[-1]
        rest = stack[:-1]
        full_closed = False
        for bits in range(1 << (k - 1)):
            subset = [newest]
            for i in range(k - 1):
                if bits >> i & 1:
                    subset.append(rest[i])
            if _is_closed(subset, mu):
                if len(subset) == k:
                    full_closed = True
                else:
                    return "proper"
        return "full" if full_closed else "none"

    def record(stack: list[int]) -> None:
        touched = 0
        for mask in stack:
            touched |= mask
        if touched != (1 << mu) - 1:
            return  # closes on fewer slots; belongs to a smaller mu
        if not _is_connected(stack, mu):
            return  # each component would be a smaller stopping set
        canon = canonical_masks(stack, mu)
        if canon in found:
            return
        profile = [0] * (q + 1)
        for mask in canon:
            profile[bin(mask).count("1")] += 1
        found[canon] = StoppingSetRecord(
            profile=tuple(profile),
            mu=mu,
            nu=len(canon),
            c=count_configs(canon, mu),
            vn_masks=canon,
        )

    def extend(stack: list[int], cn_deg: list[int], start: int) -> None:
        if len(stack) >= nu_cap:
            return
        for ti in range(start, len(types)):
            t = types[ti]
            ok = True
            for cn in range(mu):
                if t >> cn & 1 and cn_deg[cn] + 1 > cn_deg_cap:
                    ok = False
                    break
            if not ok:
                continue
            stack.append(t)
            state = closed_subset_state(stack)
            if state == "none":
                for cn in range(mu):
                    if t >> cn & 1:
                        cn_deg[cn] += 1
                extend(stack, cn_deg, ti)
                for cn in range(mu):
                    if t >> cn & 1:
                        cn_deg[cn] -= 1
            elif state == "full":
                record(stack)
            stack.pop()

    extend([], [0] * mu, 0)
    return sorted(found.values(), key=lambda r: (r.nu, r.profile, r.vn_masks))


def enumerate_minimal(max_mu: int, q: int) -> Catalog:
    """All minimal stopping sets with at most max_mu slots, user degrees <= q."""
    if max_mu < 1:
        raise ValueError(f"max_mu must be >= 1, got {max_mu}")
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if max_mu > MAX_FEASIBLE_MU:
        raise EnumerationBudgetError(
            f"max_mu={max_mu} beyond exhaustive-search budget {MAX_FEASIBLE_MU}"
        )
    records: list[StoppingSetRecord] = []
    for mu in range(1, max_mu + 1):
        records.extend(_enumerate_for_mu(mu, q))
    return Catalog(q=q, max_mu=max_mu, records=tuple(records))


def is_stopping_set(graph: FrameGraph, user_subset) -> bool:
    """True when the chosen users induce a connected subgraph whose touched
    slots all hold two or more copies."""
    users = sorted(set(user_subset))
    if not users:
        return False
    if any(j < 0 or j >= graph.n_users for j in users):
        raise ValueError("user index out of range")
    slot_deg: dict[int, int] = {}
    for j in users:
        for s in graph.users[j]:
            slot_deg[s] = slot_deg.get(s, 0) + 1
    if not slot_deg or any(d < 2 for d in slot_deg.values()):
        return False
    # connectivity over users and touched slots
    slot_ids = {s: i for i, s in enumerate(slot_deg)}
    masks = []
    for j in users:
        mask = 0
        for s in graph.users[j]:
            mask |= 1 << slot_ids[s]
        if mask == 0:
            return False  # a degree-0 user cannot be connected to the rest
        masks.append(mask)
    return _is_connected(masks, len(slot_ids))


def save_catalog(catalog: Catalog, path) -> None:
    payload = {
        "q": catalog.q,
        "max_mu": catalog.max_mu,
        "records": [
            {
                "profile": list(r.profile),
                "mu": r.mu,
                "nu": r.nu,
                "c": r.c,
                "vn_masks": list(r.vn_masks),
            }
            for r in catalog.records
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _catalog_from_payload(payload: dict) -> Catalog:
    records = tuple(
        StoppingSetRecord(
            profile=tuple(rec["profile"]),
            mu=rec["mu"],
            nu=rec["nu"],
            c=rec["c"],
            vn_masks=tuple(rec["vn_masks"]),
        )
        for rec in payload["records"]
    )
    return Catalog(q=payload["q"], max_mu=payload["max_mu"], records=records)


def load_catalog(path) -> Catalog:
    with open(path) as fh:
        return _catalog_from_payload(json.load(fh))


_DEFAULT_CATALOG: Catalog | None = None


def default_catalog() -> Catalog:
    """The shipped catalog (mu <= 4, q = 4) used by the error-floor formulas."""
    global _DEFAULT_CATALOG
    if _DEFAULT_CATALOG is None:
        ref = resources.files("bcsa").joinpath("data/stopping_sets_mu4_q4.json")
        _DEFAULT_CATALOG = _catalog_from_payload(json.loads(ref.read_text()))
    return _DEFAULT_CATALOG
