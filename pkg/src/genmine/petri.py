"""Labeled Petri nets with silent transitions and bounded playout.

A net is a bipartite graph of places and transitions; a marking assigns a
non-negative token count to each place.  Playout walks the marking graph
depth-first and records the visible label sequence whenever a final marking
is reached.  Nets without declared final markings are played out in
permissive mode: any deadlock with at least one emitted label terminates a
variant, which is what unsound discovered nets need.

State explosion is kept in check three ways: a per-place token cap, a cap
on the visible sequence length, and a global expansion budget that raises
:class:`~genmine.errors.BudgetExceededError` with the partial result count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import BudgetExceededError, InvalidInputError
from .logs import UniqueVariantLog, Variant, VariantLog

Marking = dict[str, int]

DEFAULT_TOKEN_CAP = 3
DEFAULT_BUDGET = 10_000_000


@dataclass(frozen=True)
class Transition:
    """A transition; ``label is None`` marks it silent."""

    tid: str
    label: str | None


@dataclass(frozen=True)
class PetriNet:
    places: frozenset[str]
    transitions: tuple[Transition, ...]
    arcs: frozenset[tuple[str, str]]
    initial_marking: tuple[tuple[str, int], ...]
    final_markings: tuple[tuple[tuple[str, int], ...], ...]

    def __post_init__(self):
        tids = [t.tid for t in self.transitions]
        if not tids:
            raise InvalidInputError("net needs at least one transition")
        if len(set(tids)) != len(tids):
            raise InvalidInputError("transition ids must be unique")
        if self.places & set(tids):
            raise InvalidInputError("place and transition ids must not collide")
        tset = set(tids)
        for src, dst in self.arcs:
            src_is_place = src in self.places
            dst_is_place = dst in self.places
            if src_is_place == dst_is_place:
                raise InvalidInputError(f"arc {src!r}->{dst!r} must connect a place and a transition")
            if not ((src_is_place or src in tset) and (dst_is_place or dst in tset)):
                raise InvalidInputError(f"arc {src!r}->{dst!r} references unknown node")
        for p, c in self.initial_marking:
            if p not in self.places or c < 0:
                raise InvalidInputError(f"bad initial marking entry ({p!r}, {c})")
        if sum(c for _, c in self.initial_marking) < 1:
            raise InvalidInputError("initial marking must hold at least one token")
        for fm in self.final_markings:
            for p, c in fm:
                if p not in self.places or c < 0:
                    raise InvalidInputError(f"bad final marking entry ({p!r}, {c})")
        for t in self.transitions:
            if t.label is not None and not t.label:
                raise InvalidInputError(f"transition {t.tid!r} has an empty label")

    def labels(self) -> frozenset[str]:
        """Visible activity labels of the net."""
        return frozenset(t.label for t in self.transitions if t.label is not None)

    def initial(self) -> Marking:
        return dict(self.initial_marking)

    def finals(self) -> list[Marking]:
        return [dict(fm) for fm in self.final_markings]


def make_net(
    places: Iterable[str],
    transitions: Iterable[tuple[str, str | None]],
    arcs: Iterable[tuple[str, str]],
    initial_marking: Mapping[str, int],
    final_markings: Iterable[Mapping[str, int]] = (),
) -> PetriNet:
    """Convenience constructor from plain containers."""
    return PetriNet(
        places=frozenset(places),
        transitions=tuple(Transition(tid, label) for tid, label in transitions),
        arcs=frozenset(arcs),
        initial_marking=_freeze_marking(initial_marking),
        final_markings=tuple(_freeze_marking(fm) for fm in final_markings),
    )


def _freeze_marking(m: Mapping[str, int]) -> tuple[tuple[str, int], ...]:
    return tuple(sorted((p, c) for p, c in m.items() if c > 0))


# ---------------------------------------------------------------------------
# Compiled vector form used by the search loops
# ---------------------------------------------------------------------------

class CompiledNet:
    """Index-based view of a net: markings become tuples of ints."""

    def __init__(self, net: PetriNet):
        self.net = net
        self.place_order = sorted(net.places)
        self.place_index = {p: i for i, p in enumerate(self.place_order)}
        self.transitions = sorted(net.transitions, key=lambda t: t.tid)
        self.pre: list[tuple[int, ...]] = []
        self.post: list[tuple[int, ...]] = []
        pre_map: dict[str, list[int]] = {t.tid: [] for t in self.transitions}
        post_map: dict[str, list[int]] = {t.tid: [] for t in self.transitions}
        for src, dst in net.arcs:
            if src in net.places:
                pre_map[dst].append(self.place_index[src])
            else:
                post_map[src].append(self.place_index[dst])
        for t in self.transitions:
            self.pre.append(tuple(sorted(pre_map[t.tid])))
            self.post.append(tuple(sorted(post_map[t.tid])))
        self.initial = self.vector(net.initial())
        self.finals = tuple(self.vector(fm) for fm in net.finals())
        self.silent = tuple(i for i, t in enumerate(self.transitions) if t.label is None)
        self.by_label: dict[str, tuple[int, ...]] = {}
        for i, t in enumerate(self.transitions):
            if t.label is not None:
                self.by_label.setdefault(t.label, ())
                self.by_label[t.label] += (i,)

    def vector(self, marking: Mapping[str, int]) -> tuple[int, ...]:
        vec = [0] * len(self.place_order)
        for p, c in marking.items():
            if p not in self.place_index:
                raise InvalidInputError(f"marking references unknown place {p!r}")
            vec[self.place_index[p]] = c
        return tuple(vec)

    def unvector(self, vec: Sequence[int]) -> Marking:
        return {p: c for p, c in zip(self.place_order, vec) if c > 0}

    def is_enabled(self, vec: Sequence[int], ti: int) -> bool:
        return all(vec[p] >= 1 for p in self.pre[ti])

    def fire(self, vec: tuple[int, ...], ti: int) -> tuple[int, ...]:
        out = list(vec)
        for p in self.pre[ti]:
            out[p] -= 1
        for p in self.post[ti]:
            out[p] += 1
        return tuple(out)

    def enabled_indices(self, vec: Sequence[int]) -> list[int]:
        return [i for i in range(len(self.transitions)) if self.is_enabled(vec, i)]


def enabled(net: PetriNet, marking: Mapping[str, int]) -> set[str]:
    """Transition ids enabled in the given marking."""
    cn = CompiledNet(net)
    vec = cn.vector(marking)
    return {cn.transitions[i].tid for i in cn.enabled_indices(vec)}


def fire(net: PetriNet, marking: Mapping[str, int], tid: str) -> Marking:
    """Fire one transition; raises if it is not enabled."""
    cn = CompiledNet(net)
    vec = cn.vector(marking)
    for i, t in enumerate(cn.transitions):
        if t.tid == tid:
            if not cn.is_enabled(vec, i):
                raise InvalidInputError(f"transition {tid!r} is not enabled")
            return cn.unvector(cn.fire(vec, i))
    raise InvalidInputError(f"unknown transition {tid!r}")


def playout_enumerate(
    net: PetriNet,
    max_len: int | None,
    token_cap: int | None = DEFAULT_TOKEN_CAP,
    budget: int = DEFAULT_BUDGET,
) -> frozenset[Variant]:
    """Enumerate every variant the net can play out within the bounds.

    Exhaustive DFS over (marking, emitted prefix) states.  A state is pruned
    when any place would exceed ``token_cap`` or the visible prefix would
    exceed ``max_len``.  Silent transitions advance the marking without
    emitting.  With declared final markings a variant is recorded exactly
    when one is reached; otherwise any deadlock with a non-empty prefix
    records one (permissive mode).
    """
    if max_len is not None and max_len < 1:
        raise InvalidInputError("max_len must be positive")
    if token_cap is not None and token_cap < 1:
        raise InvalidInputError("token_cap must be positive")
    cn = CompiledNet(net)
    results: set[Variant] = set()
    start = (cn.initial, ())
    stack = [start]
    visited = {start}
    finals = set(cn.finals)
    expansions = 0
    while stack:
        vec, prefix = stack.pop()
        expansions += 1
        if expansions > budget:
            raise BudgetExceededError(
                f"playout exceeded budget of {budget} expansions",
                partial_count=len(results),
            )
        if finals and vec in finals and prefix:
            results.add(prefix)
        deadlock = True
        for ti in range(len(cn.transitions)):
            if not cn.is_enabled(vec, ti):
                continue
            deadlock = False
            nxt_vec = cn.fire(vec, ti)
            if token_cap is not None and any(c > token_cap for c in nxt_vec):
                continue
            label = cn.transitions[ti].label
            if label is None:
                nxt = (nxt_vec, prefix)
            else:
                if max_len is not None and len(prefix) >= max_len:
                    continue
                nxt = (nxt_vec, prefix + (label,))
            if nxt not in visited:
                visited.add(nxt)
                stack.append(nxt)
        if deadlock and not finals and prefix:
            results.add(prefix)
    return frozenset(results)


def has_reachable_final(
    net: PetriNet,
    token_cap: int | None = DEFAULT_TOKEN_CAP,
    budget: int = 100_000,
) -> bool:
    """Cheap diagnostic probe: can any declared final marking be reached?

    Not a soundness check; returns False for nets without final markings.
    """
    cn = CompiledNet(net)
    if not cn.finals:
        return False
    finals = set(cn.finals)
    stack = [cn.initial]
    visited = {cn.initial}
    expansions = 0
    while stack:
        vec = stack.pop()
        if vec in finals:
            return True
        expansions += 1
        if expansions > budget:
            return False
        for ti in cn.enabled_indices(vec):
            nxt = cn.fire(vec, ti)
            if token_cap is not None and any(c > token_cap for c in nxt):
                continue
            if nxt not in visited:
                visited.add(nxt)
                stack.append(nxt)
    return False


# ---------------------------------------------------------------------------
# Baseline model constructors
# ---------------------------------------------------------------------------

def trace_model(lplus: UniqueVariantLog) -> PetriNet:
    """Overfitting baseline: one isolated chain per observed variant.

    Its playout (at sufficient length, uncapped) equals the input exactly.
    """
    if len(lplus) == 0:
        raise InvalidInputError("trace_model requires a non-empty variant log")
    places = {"p_src", "p_sink"}
    transitions: list[tuple[str, str | None]] = []
    arcs: list[tuple[str, str]] = []
    for vi, v in enumerate(sorted(lplus.as_set())):
        prev_place = "p_src"
        for j, label in enumerate(v):
            tid = f"t_{vi}_{j}"
            transitions.append((tid, label))
            arcs.append((prev_place, tid))
            if j == len(v) - 1:
                arcs.append((tid, "p_sink"))
            else:
                mid = f"p_{vi}_{j}"
                places.add(mid)
                arcs.append((tid, mid))
                prev_place = mid
    return make_net(places, transitions, arcs, {"p_src": 1}, [{"p_sink": 1}])


def flower_model(alphabet: Iterable[str]) -> PetriNet:
    """Maximally imprecise baseline: any label, any order, any length."""
    labels = sorted(set(alphabet))
    if not labels:
        raise InvalidInputError("flower_model requires a non-empty alphabet")
    transitions = [(f"t_{label}", label) for label in labels]
    arcs = []
    for label in labels:
        arcs.append(("p_pool", f"t_{label}"))
        arcs.append((f"t_{label}", "p_pool"))
    return make_net({"p_pool"}, transitions, arcs, {"p_pool": 1}, [{"p_pool": 1}])


def dfg_discover(lstar: VariantLog) -> PetriNet:
    """Directly-follows baseline miner.

    The net is the state machine of the directly-follows graph: one place
    per activity ("just did a"), one labeled transition per DF edge, and a
    silent exit per observed end activity.  Every variant of the input is
    replayable by construction; the closure of the DF relation may play out
    more.
    """
    if len(lstar) == 0:
        raise InvalidInputError("dfg_discover requires a non-empty variant log")
    starts: set[str] = set()
    ends: set[str] = set()
    pairs: set[tuple[str, str]] = set()
    activities: set[str] = set()
    for v in lstar:
        starts.add(v[0])
        ends.add(v[-1])
        activities.update(v)
        pairs.update(zip(v, v[1:]))
    places = {"p_start", "p_end"} | {f"p_{a}" for a in activities}
    transitions: list[tuple[str, str | None]] = []
    arcs: list[tuple[str, str]] = []
    for a in sorted(starts):
        tid = f"t_enter_{a}"
        transitions.append((tid, a))
        arcs += [("p_start", tid), (tid, f"p_{a}")]
    for a, b in sorted(pairs):
        tid = f"t_step_{a}_{b}"
        transitions.append((tid, b))
        arcs += [(f"p_{a}", tid), (tid, f"p_{b}")]
    for a in sorted(ends):
        tid = f"t_exit_{a}"
        transitions.append((tid, None))
        arcs += [(f"p_{a}", tid), (tid, "p_end")]
    return make_net(places, transitions, arcs, {"p_start": 1}, [{"p_end": 1}])


# ---------------------------------------------------------------------------
# PN JSON interchange format
# ---------------------------------------------------------------------------

def net_to_dict(net: PetriNet) -> dict:
    return {
        "places": sorted(net.places),
        "transitions": [
            {"id": t.tid, "label": t.label}
            for t in sorted(net.transitions, key=lambda t: t.tid)
        ],
        "arcs": [
            {"from": src, "to": dst} for src, dst in sorted(net.arcs)
        ],
        "initial_marking": {p: c for p, c in net.initial_marking},
        "final_markings": [{p: c for p, c in fm} for fm in net.final_markings],
    }


def net_from_dict(data: Mapping) -> PetriNet:
    try:
        return make_net(
            places=data["places"],
            transitions=[(t["id"], t.get("label")) for t in data["transitions"]],
            arcs=[(a["from"], a["to"]) for a in data["arcs"]],
            initial_marking={p: int(c) for p, c in data["initial_marking"].items()},
            final_markings=[
                {p: int(c) for p, c in fm.items()} for fm in data.get("final_markings", [])
            ],
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed net JSON: {exc}") from exc


def save_net(net: PetriNet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(net_to_dict(net), indent=2, sort_keys=True) + "\n")


def load_net(path: str | Path) -> PetriNet:
    return net_from_dict(json.loads(Path(path).read_text()))
