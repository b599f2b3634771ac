"""Deterministic ring simulator.

Plans are executed synchronously; the simulator only tracks what the ring
model counts, namely symbols per link. One node may be down at a time.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .construct import Lcg64
from .errors import (
    AnotherNodeFailed,
    BadNodeIndex,
    BadUserIndex,
    NotOrdss,
    PathBlockedByFailure,
)
from .protocol import (
    execute_reconstruction,
    execute_repair,
    plan_reconstruction,
    plan_repair,
)
from .scheme import Scheme, StoredState, encode, validate_ordss

ENCODE = "Encode"
USER_READ = "UserRead"
FAIL = "Fail"
REPAIR = "Repair"


@dataclass(frozen=True)
class Event:
    kind: str
    node_or_user: int
    bandwidth: int
    success: bool


@dataclass
class RingSim:
    scheme: Scheme
    state: StoredState
    original_x: tuple[int, ...]
    seed: int
    link_counters: Counter = field(default_factory=Counter)
    failed: set = field(default_factory=set)
    event_log: list = field(default_factory=list)
    # pre-failure contents, kept only to check exactness after repair
    _lost: dict = field(default_factory=dict, repr=False)

    def _charge(self, hops) -> None:
        for hop in hops:
            self.link_counters[hop.physical_link] += hop.size


def sim_new(s: Scheme, seed: int) -> RingSim:
    if not validate_ordss(s).is_ordss:
        raise NotOrdss("simulator needs an optimal-reconstruction scheme")
    x = Lcg64(seed).vector(s.m, s.field.p)
    sim = RingSim(scheme=s, state=encode(s, x), original_x=x, seed=seed)
    for i in range(1, s.n + 1):
        sim.link_counters[f"N{s.wrap(i + 1)}->N{i}"] = 0
        sim.link_counters[f"N{i}->U{i}"] = 0
    sim.event_log.append(Event(ENCODE, 0, 0, True))
    return sim


def sim_user_read(sim: RingSim, user: int) -> Event:
    s = sim.scheme
    if not 1 <= user <= s.n:
        raise BadUserIndex(f"user {user} outside 1..{s.n}")
    plan = plan_reconstruction(s, user)
    path = {user} | {h.from_node for h in plan.hops}
    blocked = sorted(path & sim.failed)
    if blocked:
        ev = Event(USER_READ, user, 0, False)
        sim.event_log.append(ev)
        raise PathBlockedByFailure(f"user {user} needs failed node(s) {blocked}")
    x, used = execute_reconstruction(s, sim.state, plan)
    if x != sim.original_x:
        raise RuntimeError(f"user {user} reconstructed {x}, expected {sim.original_x}")
    sim._charge(plan.hops)
    ev = Event(USER_READ, user, used, True)
    sim.event_log.append(ev)
    return ev


def sim_fail(sim: RingSim, node: int) -> Event:
    """Take ``node`` down; its contents are lost until repaired."""
    s = sim.scheme
    if not 1 <= node <= s.n:
        raise BadNodeIndex(f"node {node} outside 1..{s.n}")
    if sim.failed:
        raise AnotherNodeFailed(f"node(s) {sorted(sim.failed)} already failed")
    sim._lost[node] = sim.state.node(node)
    sim.state = sim.state.erase(node)
    sim.failed.add(node)
    ev = Event(FAIL, node, 0, True)
    sim.event_log.append(ev)
    return ev


def sim_repair(sim: RingSim, node: int) -> Event:
    """Rebuild a failed node in a substitute that takes over its index."""
    if node not in sim.failed:
        raise BadNodeIndex(f"node {node} is not failed")
    plan = plan_repair(sim.scheme, node)
    symbols, used = execute_repair(sim.scheme, sim.state, plan)
    if symbols != sim._lost[node]:
        raise RuntimeError(f"node {node} repaired to {symbols}, expected {sim._lost[node]}")
    sim._charge(plan.hops)
    sim.state = sim.state.install(node, symbols)
    sim.failed.discard(node)
    del sim._lost[node]
    ev = Event(REPAIR, node, used, True)
    sim.event_log.append(ev)
    return ev


def sim_fail_and_repair(sim: RingSim, node: int) -> Event:
    sim_fail(sim, node)
    try:
        return sim_repair(sim, node)
    except Exception:
        # leave the ring as it was so the failure does not linger
        sim.state = sim.state.install(node, sim._lost.pop(node))
        sim.failed.discard(node)
        sim.event_log.append(Event(REPAIR, node, 0, False))
        raise


@dataclass(frozen=True)
class SimStats:
    per_link: dict
    per_kind: dict
    events: int

    @property
    def busy_links(self) -> dict:
        return {k: v for k, v in self.per_link.items() if v}


def sim_stats(sim: RingSim) -> SimStats:
    per_kind: dict[str, int] = {}
    for ev in sim.event_log:
        per_kind[ev.kind] = per_kind.get(ev.kind, 0) + ev.bandwidth
    return SimStats(
        per_link=dict(sorted(sim.link_counters.items())),
        per_kind=per_kind,
        events=len(sim.event_log),
    )


def run_script(sim: RingSim, ops: Sequence[tuple[str, int]]) -> list[Event]:
    """Apply ``(op, index)`` pairs; op is read, fail, crash or repair.

    ``fail`` is fail-then-repair; ``crash`` leaves the node down.
    """
    actions = {
        "read": sim_user_read,
        "fail": sim_fail_and_repair,
        "crash": sim_fail,
        "repair": sim_repair,
    }
    out = []
    for op, idx in ops:
        if op not in actions:
            raise ValueError(f"unknown simulator op {op!r}")
        out.append(actions[op](sim, idx))
    return out
