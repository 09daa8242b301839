"""Structural checks on labeled portnets: choice, leg, observable choices,
diamond and loop, plus the combined well-formedness verdict.

Paths in a portnet never pass through interface places (inputs have no
producers, outputs no consumers), so every checker walks the skeleton.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

from .portnet import Direction, OpenNet, direction


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class PathWitness:
    nodes: tuple[str, ...]

    def transitions(self, n: OpenNet) -> tuple[str, ...]:
        return tuple(x for x in self.nodes if x in n.transitions)

    def __str__(self):
        return "<" + ", ".join(self.nodes) + ">"


@dataclass(frozen=True)
class Verdict:
    passed: bool
    witnesses: tuple = ()

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class DiamondWitness:
    place: str
    t: str
    t2: str
    q: str
    q2: str


@dataclass(frozen=True)
class LoopWitness:
    place: str
    t: str
    t2: str
    path: PathWitness


@dataclass(frozen=True)
class WellFormedReport:
    observable_choices: Verdict
    diamond: Verdict
    loop: Verdict
    choice: Verdict
    leg: Verdict
    well_formed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "well_formed", bool(self.observable_choices and self.diamond and self.loop)
        )


def _succ_transitions(n: OpenNet, p: str) -> list[str]:
    return sorted(t for t in n.postset(p) if t in n.transitions)


def _next_place(n: OpenNet, t: str) -> str | None:
    nxt = sorted(n.postset(t) & n.places)
    return nxt[0] if nxt else None


def check_choice(n: OpenNet) -> Verdict:
    bad = []
    for p in sorted(n.places):
        dirs = {direction(n, t) for t in n.postset(p)}
        if len(dirs) > 1:
            bad.append(p)
    return Verdict(not bad, tuple(bad))


def check_observable(n: OpenNet) -> Verdict:
    bad = []
    for p in sorted(n.places):
        for t, t2 in combinations(_succ_transitions(n, p), 2):
            if n.label(t) == n.label(t2):
                bad.append((p, t, t2))
    return Verdict(not bad, tuple(bad))


def check_diamond(n: OpenNet) -> Verdict:
    """Evaluate the diamond formula literally on skeleton successors."""
    bad = []
    for p in sorted(n.places):
        for t, t2 in combinations(_succ_transitions(n, p), 2):
            if direction(n, t) == direction(n, t2):
                continue
            for q in sorted(n.postset(t) & n.places):
                for q2 in sorted(n.postset(t2) & n.places):
                    if not _closes(n, t, t2, q, q2):
                        bad.append(DiamondWitness(p, t, t2, q, q2))
    return Verdict(not bad, tuple(bad))


def _closes(n: OpenNet, t: str, t2: str, q: str, q2: str) -> bool:
    for u in n.postset(q):
        if n.label(u) != n.label(t2):
            continue
        for u2 in n.postset(q2):
            if n.label(u2) == n.label(t) and n.postset(u) & n.postset(u2) & n.places:
                return True
    return False


def _search(n: OpenNet, p: str, t: str, label: str, traversable) -> list[PathWitness]:
    """Shortest paths <p, t, ..., t'', q> where ``t''`` carries ``label`` and every
    transition in between is traversable and not labeled ``label``.

    One witness per terminal transition.
    """
    first = _next_place(n, t)
    if first is None:
        return []
    parent: dict[str, tuple[str, str] | None] = {first: None}
    todo = deque([first])
    found: dict[str, PathWitness] = {}

    def path_to(place):
        rev = []
        while parent[place] is not None:
            via, prev = parent[place]
            rev += [place, via]
            place = prev
        rev.append(place)
        return [p, t] + rev[::-1]

    while todo:
        x = todo.popleft()
        for u in _succ_transitions(n, x):
            q = _next_place(n, u)
            if n.label(u) == label:
                if u not in found and traversable(u):
                    tail = [u] + ([q] if q is not None else [])
                    found[u] = PathWitness(tuple(path_to(x) + tail))
                continue
            if not traversable(u) or q is None or q in parent:
                continue
            parent[q] = (u, x)
            todo.append(q)
    return [found[u] for u in sorted(found)]


def pathset_violations(n: OpenNet, p: str, t: str, label: str, strict: bool = False) -> list[PathWitness]:
    """Paths of ``pathset(p, t, label)`` along which no transition changes direction.

    With ``strict`` a tau step does not count as a change; only the opposite
    communicating direction does.
    """
    if t not in n.postset(p) or t not in n.transitions:
        raise UsageError(f"{t!r} is not in the postset of {p!r}")
    if n.label(t) == label:
        raise UsageError(f"{t!r} already carries label {label!r}")
    return _pathset_violations(n, p, t, label, strict)


def _pathset_violations(n, p, t, label, strict):
    d = direction(n, t)
    if strict:
        ok = lambda u: direction(n, u) in (d, Direction.TAU)  # noqa: E731
    else:
        ok = lambda u: direction(n, u) == d  # noqa: E731
    if not ok(t):
        return []
    return _search(n, p, t, label, ok)


def check_loop(n: OpenNet, strict: bool = False) -> Verdict:
    bad = []
    for p in sorted(n.places):
        succ = _succ_transitions(n, p)
        for t in succ:
            for t2 in succ:
                if t == t2 or direction(n, t) != direction(n, t2):
                    continue
                for w in _pathset_violations(n, p, t, n.label(t2), strict):
                    bad.append(LoopWitness(p, t, t2, w))
    return Verdict(not bad, tuple(bad))


def check_leg(n: OpenNet) -> Verdict:
    """Every split/init to join/fin path (with at least one transition) must hold
    two communicating transitions of different directions.

    A path lacking them avoids all sends or all receives, so violations are
    paths that survive in one of the two pruned graphs.
    """
    starts = sorted(p for p in n.places if len(n.postset(p)) > 1 or p in n.init)
    ends = {p for p in n.places if len(n.preset(p) & n.transitions) > 1 or p in n.fin}
    bad = []
    for banned in (Direction.SEND, Direction.RECEIVE):
        keep = lambda u: direction(n, u) != banned  # noqa: E731
        for s in starts:
            w = _pruned_path(n, s, ends, keep)
            if w is not None:
                bad.append(w)
    return Verdict(not bad, tuple(bad))


def _pruned_path(n, s, ends, keep) -> PathWitness | None:
    parent: dict[str, tuple[str, str]] = {}
    todo = deque([s])
    seen = set()
    while todo:
        x = todo.popleft()
        for u in _succ_transitions(n, x):
            if not keep(u):
                continue
            q = _next_place(n, u)
            if q is None or q in seen:
                continue
            seen.add(q)
            parent[q] = (u, x)
            if q in ends:
                rev, cur = [q], q
                while True:
                    via, prev = parent[cur]
                    rev += [via, prev]
                    if prev == s:
                        break
                    cur = prev
                return PathWitness(tuple(rev[::-1]))
            todo.append(q)
    return None


def well_formed(n: OpenNet, strict_loop: bool = False) -> WellFormedReport:
    return WellFormedReport(
        observable_choices=check_observable(n),
        diamond=check_diamond(n),
        loop=check_loop(n, strict=strict_loop),
        choice=check_choice(n),
        leg=check_leg(n),
    )
