"""Bags, labeled Petri nets, markings and the firing rule."""

from __future__ import annotations

import re
from collections import deque
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType

LABEL_RE = re.compile(r"^[A-Za-z0-9_]+$")


class NetError(ValueError):
    """Malformed net structure."""


class UnknownNodeError(KeyError):
    pass


class NotEnabledError(ValueError):
    pass


class BagUnderflowError(ValueError):
    pass


def check_label(text: str) -> str:
    if not isinstance(text, str) or not LABEL_RE.match(text):
        raise NetError(f"invalid label {text!r}: expected letters, digits or underscore")
    return text


class Bag(Mapping):
    """Immutable multiset. Absent elements count zero; zero counts are never stored."""

    __slots__ = ("_counts", "_hash")

    def __init__(self, items: Mapping[str, int] | Iterable[str] = ()):
        counts: dict[str, int] = {}
        if isinstance(items, Mapping):
            for k, v in items.items():
                if v < 0:
                    raise BagUnderflowError(f"negative count {v} for {k!r}")
                if v:
                    counts[k] = int(v)
        else:
            for k in items:
                counts[k] = counts.get(k, 0) + 1
        self._counts = counts
        self._hash = None

    def __getitem__(self, key):
        return self._counts[key]

    def get(self, key, default=0):
        return self._counts.get(key, default)

    def __iter__(self) -> Iterator[str]:
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._counts.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Bag):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self._counts == {k: v for k, v in other.items() if v}
        return NotImplemented

    def __add__(self, other: Mapping[str, int]) -> Bag:
        out = dict(self._counts)
        for k, v in other.items():
            out[k] = out.get(k, 0) + v
        return Bag(out)

    def __sub__(self, other: Mapping[str, int]) -> Bag:
        out = dict(self._counts)
        for k, v in other.items():
            have = out.get(k, 0)
            if v > have:
                raise BagUnderflowError(f"cannot remove {v} x {k!r} from {have}")
            out[k] = have - v
        return Bag(out)

    def __le__(self, other: Mapping[str, int]) -> bool:
        return all(v <= other.get(k, 0) for k, v in self._counts.items())

    def __ge__(self, other: Mapping[str, int]) -> bool:
        return Bag(other) <= self

    def __lt__(self, other):
        return self <= other and self != other

    def size(self) -> int:
        return sum(self._counts.values())

    def canonical(self) -> tuple[tuple[str, int], ...]:
        return tuple(sorted(self._counts.items()))

    def __repr__(self):
        inner = ", ".join(f"{k}:{v}" for k, v in self.canonical())
        return "{" + inner + "}"


def bag_arith(a: Mapping[str, int], b: Mapping[str, int], op: str):
    a, b = Bag(a), Bag(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "leq":
        return a <= b
    raise ValueError(f"unknown bag operation {op!r}")


Marking = Bag


@dataclass(frozen=True)
class LabeledNet:
    places: frozenset[str]
    transitions: frozenset[str]
    flow: frozenset[tuple[str, str]]
    labeling: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        places = frozenset(self.places)
        transitions = frozenset(self.transitions)
        flow = frozenset((x, y) for x, y in self.flow)
        labeling = MappingProxyType(dict(self.labeling))
        object.__setattr__(self, "places", places)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "flow", flow)
        object.__setattr__(self, "labeling", labeling)

        both = places & transitions
        if both:
            raise NetError(f"nodes are both place and transition: {sorted(both)}")
        for x, y in flow:
            if not ((x in places and y in transitions) or (x in transitions and y in places)):
                raise NetError(f"arc ({x}, {y}) must join a place and a transition of the net")
        missing = transitions - labeling.keys()
        if missing:
            raise NetError(f"unlabeled transitions: {sorted(missing)}")
        extra = labeling.keys() - transitions
        if extra:
            raise NetError(f"labels for unknown transitions: {sorted(extra)}")
        for lab in labeling.values():
            check_label(lab)

    @classmethod
    def build(cls, places: Iterable[str], transitions: Mapping[str, str], arcs: Iterable[tuple[str, str]]):
        return cls(frozenset(places), frozenset(transitions), frozenset(arcs), dict(transitions))

    @property
    def nodes(self) -> frozenset[str]:
        return self.places | self.transitions

    @cached_property
    def _pre(self) -> dict[str, frozenset[str]]:
        acc: dict[str, set[str]] = {x: set() for x in self.nodes}
        for x, y in self.flow:
            acc[y].add(x)
        return {k: frozenset(v) for k, v in acc.items()}

    @cached_property
    def _post(self) -> dict[str, frozenset[str]]:
        acc: dict[str, set[str]] = {x: set() for x in self.nodes}
        for x, y in self.flow:
            acc[x].add(y)
        return {k: frozenset(v) for k, v in acc.items()}

    def preset(self, x: str) -> frozenset[str]:
        try:
            return self._pre[x]
        except KeyError:
            raise UnknownNodeError(x) from None

    def postset(self, x: str) -> frozenset[str]:
        try:
            return self._post[x]
        except KeyError:
            raise UnknownNodeError(x) from None

    def rename(self, mapping: Mapping[str, str]) -> LabeledNet:
        r = lambda x: mapping.get(x, x)  # noqa: E731
        return LabeledNet(
            frozenset(map(r, self.places)),
            frozenset(map(r, self.transitions)),
            frozenset((r(x), r(y)) for x, y in self.flow),
            {r(t): lab for t, lab in self.labeling.items()},
        )


def preset(net: LabeledNet, x: str) -> frozenset[str]:
    return net.preset(x)


def postset(net: LabeledNet, x: str) -> frozenset[str]:
    return net.postset(x)


def enabled(net: LabeledNet, m: Mapping[str, int]) -> frozenset[str]:
    return frozenset(t for t in net.transitions if all(m.get(p, 0) >= 1 for p in net.preset(t)))


def fire(net: LabeledNet, m: Mapping[str, int], t: str) -> Bag:
    if t not in net.transitions:
        raise UnknownNodeError(t)
    pre = net.preset(t)
    if not all(m.get(p, 0) >= 1 for p in pre):
        raise NotEnabledError(f"transition {t!r} is not enabled in {Bag(m)!r}")
    return Bag(m) - Bag(pre) + Bag(net.postset(t))


def fire_sequence(net: LabeledNet, m: Mapping[str, int], seq: Iterable[str]) -> Bag:
    m = Bag(m)
    for t in seq:
        m = fire(net, m, t)
    return m


@dataclass(frozen=True)
class NetSystem:
    """A net with initial and final markings. ``net`` may also be an open net."""

    net: object
    m0: Bag
    mf: Bag

    def __post_init__(self):
        object.__setattr__(self, "m0", Bag(self.m0))
        object.__setattr__(self, "mf", Bag(self.mf))
        places = plain(self.net).places
        for name, m in (("m0", self.m0), ("mf", self.mf)):
            unknown = set(m) - places
            if unknown:
                raise NetError(f"{name} marks unknown places {sorted(unknown)}")


def plain(net) -> LabeledNet:
    """The underlying labeled net of a plain or open net."""
    return net if isinstance(net, LabeledNet) else net.net


@dataclass(frozen=True)
class StructureReport:
    is_s_net: bool
    is_wfn: bool
    source: str | None
    sink: str | None
    is_strongly_connected: bool
    splits: frozenset[str]
    joins: frozenset[str]


def _reach(start: Iterable[str], succ) -> set[str]:
    seen = set(start)
    todo = deque(seen)
    while todo:
        x = todo.popleft()
        for y in succ(x):
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return seen


def structure(net: LabeledNet) -> StructureReport:
    s_net = all(len(net.preset(t)) <= 1 and len(net.postset(t)) <= 1 for t in net.transitions)
    sources = [p for p in net.places if not net.preset(p)]
    sinks = [p for p in net.places if not net.postset(p)]
    source = sources[0] if len(sources) == 1 else None
    sink = sinks[0] if len(sinks) == 1 else None
    wfn = False
    if source is not None and sink is not None:
        fwd = _reach([source], net.postset)
        bwd = _reach([sink], net.preset)
        wfn = net.nodes <= (fwd & bwd)
    nodes = net.nodes
    strongly = True
    if nodes:
        anchor = min(nodes)
        strongly = _reach([anchor], net.postset) == nodes and _reach([anchor], net.preset) == nodes
    return StructureReport(
        is_s_net=s_net,
        is_wfn=wfn,
        source=source if wfn else None,
        sink=sink if wfn else None,
        is_strongly_connected=strongly,
        splits=frozenset(p for p in net.places if len(net.postset(p)) > 1),
        joins=frozenset(p for p in net.places if len(net.preset(p)) > 1),
    )


def isomorphic(n1: LabeledNet, n2: LabeledNet) -> dict[str, str] | None:
    """Search a bijection preserving node sorts, labels and arcs.

    Backtracking with degree and label pruning; meant for small nets.
    """
    if (len(n1.places), len(n1.transitions), len(n1.flow)) != (
        len(n2.places),
        len(n2.transitions),
        len(n2.flow),
    ):
        return None

    def signature(net, x):
        kind = "t" if x in net.transitions else "p"
        return (kind, net.labeling.get(x), len(net.preset(x)), len(net.postset(x)))

    # colour refinement on both nets at once so colours stay comparable
    color = {(k, x): signature(net, x) for k, net in ((1, n1), (2, n2)) for x in net.nodes}
    while True:
        raw = {
            (k, x): (
                color[(k, x)],
                tuple(sorted(color[(k, a)] for a in net.preset(x))),
                tuple(sorted(color[(k, b)] for b in net.postset(x))),
            )
            for k, net in ((1, n1), (2, n2))
            for x in net.nodes
        }
        ids = {c: j for j, c in enumerate(sorted(set(raw.values()), key=repr))}
        new = {key: ids[c] for key, c in raw.items()}
        if len(ids) == len(set(color.values())):
            color = new
            break
        color = new
    if sorted(v for (k, _), v in color.items() if k == 1) != sorted(v for (k, _), v in color.items() if k == 2):
        return None

    buckets: dict[int, list[str]] = {}
    for y in sorted(n2.nodes):
        buckets.setdefault(color[(2, y)], []).append(y)
    order = sorted(n1.nodes, key=lambda x: (len(buckets[color[(1, x)]]), x))
    # visit nodes adjacent to already-mapped ones first, so arc checks prune early
    ordered: list[str] = []
    placed: set[str] = set()
    for seed in order:
        if seed in placed:
            continue
        todo = deque([seed])
        placed.add(seed)
        while todo:
            x = todo.popleft()
            ordered.append(x)
            for y in sorted(n1.preset(x) | n1.postset(x)):
                if y not in placed:
                    placed.add(y)
                    todo.append(y)

    psi: dict[str, str] = {}
    used: set[str] = set()

    def consistent(x, y):
        for a in n1.preset(x):
            if a in psi and psi[a] not in n2.preset(y):
                return False
        for b in n1.postset(x):
            if b in psi and psi[b] not in n2.postset(y):
                return False
        return True

    def search(k):
        if k == len(ordered):
            return True
        x = ordered[k]
        for y in buckets[color[(1, x)]]:
            if y in used or not consistent(x, y):
                continue
            psi[x] = y
            used.add(y)
            if search(k + 1):
                return True
            del psi[x]
            used.discard(y)
        return False

    return dict(psi) if search(0) else None
