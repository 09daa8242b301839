"""Explicit-state exploration: weak termination, deadlocks, proper completion,
linear place invariants and commutation checks on compositions."""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .foundation import Bag, LabeledNet, NetSystem, enabled, fire, plain
from .portnet import Direction, OpenNet, direction


class Inconclusive(RuntimeError):
    """Exploration stopped at a cap; no verdict can be given."""

    def __init__(self, message: str, trace: Sequence[str] = (), place: str | None = None):
        super().__init__(message)
        self.trace = list(trace)
        self.place = place


class BoundExceeded(Inconclusive):
    pass


class UnboundedSuspect(Inconclusive):
    pass


class ContractMisuse(ValueError):
    pass


@dataclass(frozen=True)
class ExplorationCaps:
    max_states: int = 100_000
    max_tokens_per_place: int = 8

    def __post_init__(self):
        if self.max_states < 1 or self.max_tokens_per_place < 1:
            raise ValueError("exploration caps must be at least 1")


@dataclass
class ReachabilityGraph:
    net: LabeledNet
    states: list[Bag]
    index: dict[Bag, int]
    edges: list[tuple[int, str, int]]
    parent: list[tuple[int, str] | None]
    root: int = 0
    truncated: str | None = None
    succ: list[list[tuple[str, int]]] = field(default_factory=list)

    def __len__(self):
        return len(self.states)

    def trace_to(self, s: int) -> list[str]:
        out = []
        while self.parent[s] is not None:
            s, t = self.parent[s]
            out.append(t)
        return out[::-1]

    def require_complete(self):
        if self.truncated:
            raise Inconclusive(f"graph is truncated ({self.truncated}); refusing to decide")


def explore(sys: NetSystem, caps: ExplorationCaps = ExplorationCaps(), partial: bool = False) -> ReachabilityGraph:
    """Breadth-first reachability graph from ``sys.m0``.

    Transitions fire in id order, so parent pointers give shortest traces with
    ties broken towards smaller transition ids. Hitting a cap raises
    :class:`Inconclusive` unless ``partial`` is set, in which case the graph is
    returned marked as truncated.
    """
    net = plain(sys.net)
    order = sorted(net.transitions)
    pre = {t: net.preset(t) for t in order}
    root = sys.m0
    g = ReachabilityGraph(net, [root], {root: 0}, [], [None], succ=[[]])
    todo = deque([0])
    while todo:
        s = todo.popleft()
        m = g.states[s]
        for t in order:
            if not all(m.get(p, 0) for p in pre[t]):
                continue
            m2 = fire(net, m, t)
            k = g.index.get(m2)
            if k is None:
                over = [p for p, c in m2.items() if c > caps.max_tokens_per_place]
                if over or len(g.states) >= caps.max_states:
                    trace = g.trace_to(s) + [t]
                    if over:
                        msg = f"place {over[0]} exceeds {caps.max_tokens_per_place} tokens"
                        exc = UnboundedSuspect(msg, trace, over[0])
                    else:
                        msg = f"more than {caps.max_states} states"
                        exc = BoundExceeded(msg, trace)
                    if not partial:
                        raise exc
                    g.truncated = msg
                    return g
                k = len(g.states)
                g.states.append(m2)
                g.index[m2] = k
                g.parent.append((s, t))
                g.succ.append([])
                todo.append(k)
            g.edges.append((s, t, k))
            g.succ[s].append((t, k))
    return g


def _co_reach(g: ReachabilityGraph, targets: Iterable[int]) -> set[int]:
    pred: list[list[int]] = [[] for _ in g.states]
    for s, _, k in g.edges:
        pred[k].append(s)
    seen = set(targets)
    todo = deque(seen)
    while todo:
        k = todo.popleft()
        for s in pred[k]:
            if s not in seen:
                seen.add(s)
                todo.append(s)
    return seen


@dataclass(frozen=True)
class TerminationResult:
    ok: bool
    bad_state: Bag | None = None
    trace: tuple[str, ...] = ()

    def __bool__(self):
        return self.ok


def check_weak_termination(g: ReachabilityGraph, mf: Mapping[str, int]) -> TerminationResult:
    g.require_complete()
    mf = Bag(mf)
    target = g.index.get(mf)
    good = _co_reach(g, [] if target is None else [target])
    for s in range(len(g.states)):
        if s not in good:
            return TerminationResult(False, g.states[s], tuple(g.trace_to(s)))
    return TerminationResult(True)


@dataclass(frozen=True)
class Deadlock:
    state: Bag
    trace: tuple[str, ...]


def find_deadlocks(g: ReachabilityGraph, mf: Mapping[str, int]) -> list[Deadlock]:
    g.require_complete()
    mf = Bag(mf)
    return [
        Deadlock(m, tuple(g.trace_to(s)))
        for s, m in enumerate(g.states)
        if not g.succ[s] and m != mf
    ]


def check_proper_completion(g: ReachabilityGraph, finals: Iterable[str]) -> TerminationResult:
    """Whenever every place in ``finals`` is marked, nothing else may be."""
    g.require_complete()
    finals = list(finals)
    expected = Bag({f: 1 for f in finals})
    for s, m in enumerate(g.states):
        if all(m.get(f, 0) for f in finals) and m != expected:
            return TerminationResult(False, m, tuple(g.trace_to(s)))
    return TerminationResult(True)


@dataclass(frozen=True)
class LinearInvariant:
    terms: Mapping[str, int]
    relation: str = "eq"
    bound: int = 0
    name: str = ""

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a linear invariant needs at least one term")
        if self.relation not in ("eq", "leq"):
            raise ValueError(f"unknown relation {self.relation!r}")

    def value(self, m: Mapping[str, int]) -> int:
        return sum(c * m.get(p, 0) for p, c in self.terms.items())

    def holds(self, m: Mapping[str, int]) -> bool:
        v = self.value(m)
        return v == self.bound if self.relation == "eq" else v <= self.bound


@dataclass(frozen=True)
class InvariantVerdict:
    invariant: LinearInvariant
    ok: bool
    state: Bag | None = None
    trace: tuple[str, ...] = ()


def check_linear_invariants(g: ReachabilityGraph, invs: Iterable[LinearInvariant]) -> list[InvariantVerdict]:
    g.require_complete()
    out = []
    for inv in invs:
        bad = next((s for s, m in enumerate(g.states) if not inv.holds(m)), None)
        if bad is None:
            out.append(InvariantVerdict(inv, True))
        else:
            out.append(InvariantVerdict(inv, False, g.states[bad], tuple(g.trace_to(bad))))
    return out


def check_predicates(g: ReachabilityGraph, preds: Mapping[str, Callable[[Bag], bool]]) -> dict[str, int | None]:
    """Index of the first state violating each predicate, or None."""
    g.require_complete()
    return {
        name: next((s for s, m in enumerate(g.states) if not pred(m)), None)
        for name, pred in preds.items()
    }


# --- traces and ownership annotations -------------------------------------


@dataclass(frozen=True)
class StepInfo:
    label: str
    direction: Direction
    owner: str


@dataclass(frozen=True)
class Trace:
    firing: tuple[str, ...]
    annotations: tuple[StepInfo, ...]


def owner_tags(components: Mapping[str, OpenNet]) -> dict[str, StepInfo]:
    """Per-transition label, direction and owner, taken from the nets before composition."""
    tags = {}
    for owner, n in components.items():
        for t in n.transitions:
            tags[t] = StepInfo(n.label(t), direction(n, t), owner)
    return tags


def annotate(firing: Iterable[str], tags: Mapping[str, StepInfo]) -> Trace:
    firing = tuple(firing)
    return Trace(firing, tuple(tags[t] for t in firing))


def replay(sys: NetSystem, firing: Iterable[str]) -> Bag:
    net = plain(sys.net)
    m = sys.m0
    for t in firing:
        m = fire(net, m, t)
    return m


# --- commutation of receives and sends ------------------------------------


@dataclass(frozen=True)
class CommutationVerdict:
    ok: bool
    claim: str = ""
    state: Bag | None = None
    detail: str = ""
    checked: int = 0

    def __bool__(self):
        return self.ok


def _validate_tags(net: LabeledNet, tags: Mapping[str, StepInfo]):
    missing = net.transitions - tags.keys()
    if missing:
        raise ContractMisuse(f"untagged transitions: {sorted(missing)}")
    owners = {tags[t].owner for t in net.transitions}
    if len(owners) != 2:
        raise ContractMisuse(f"expected exactly two owners, got {sorted(owners)}")
    for t in sorted(net.transitions):
        info = tags[t]
        foreign_in = [p for p in net.preset(t) if any(tags[u].owner != info.owner for u in net.preset(p))]
        foreign_out = [p for p in net.postset(t) if any(tags[u].owner != info.owner for u in net.postset(p))]
        if info.direction is Direction.RECEIVE and not foreign_in:
            raise ContractMisuse(f"{t} is tagged receive but consumes no message from the other side")
        if info.direction is Direction.SEND and not foreign_out:
            raise ContractMisuse(f"{t} is tagged send but produces no message for the other side")
        if info.direction is Direction.TAU and (foreign_in or foreign_out):
            raise ContractMisuse(f"{t} is tagged tau but touches a channel")


def _runs(net, m, allowed, depth):
    """All (sequence, end marking) pairs of fireable sequences over ``allowed``."""
    out = [((), m)]
    frontier = [((), m)]
    for _ in range(depth):
        nxt = []
        for seq, cur in frontier:
            for t in allowed:
                if all(cur.get(p, 0) for p in net.preset(t)):
                    item = (seq + (t,), fire(net, cur, t))
                    nxt.append(item)
        out += nxt
        frontier = nxt
    return out


def check_commutation_samples(
    sys: NetSystem,
    g: ReachabilityGraph,
    tags: Mapping[str, StepInfo],
    depth: int = 3,
    states: Iterable[int] | None = None,
) -> CommutationVerdict:
    """Check the receive/send commutation claims on reachable states.

    (a) receives of one side followed by receives of the other also run swapped;
    (b) an enabled send of one side survives receives of the other, ends commute;
    (c) an enabled send of a side can be completed against that side's receive
        run by a same-label send at the end of a label-matching run.
    Receive sequences are enumerated up to ``depth`` steps. Both sides play
    both roles.
    """
    g.require_complete()
    net = plain(sys.net)
    _validate_tags(net, tags)
    owners = sorted({tags[t].owner for t in net.transitions})
    recv = {o: sorted(t for t in net.transitions if tags[t].owner == o and tags[t].direction is Direction.RECEIVE)
            for o in owners}
    send = {o: sorted(t for t in net.transitions if tags[t].owner == o and tags[t].direction is Direction.SEND)
            for o in owners}
    checked = 0
    for s in (range(len(g.states)) if states is None else states):
        m = g.states[s]
        for a, b in (owners, owners[::-1]):
            runs_a = _runs(net, m, recv[a], depth)
            # (a) swap receive runs
            for seq_a, m_a in runs_a:
                for seq_b, end in _runs(net, m_a, recv[b], depth):
                    if not seq_a or not seq_b:
                        continue
                    checked += 1
                    try:
                        alt = replay_from(net, m, seq_b + seq_a)
                    except ValueError:
                        alt = None
                    if alt != end:
                        return CommutationVerdict(False, "receive-swap", m, f"{seq_a} then {seq_b}", checked)
            # (b) a send of b persists over a-receives
            for u in send[b]:
                if not all(m.get(p, 0) for p in net.preset(u)):
                    continue
                m_u = fire(net, m, u)
                for seq_a, m_a in runs_a:
                    checked += 1
                    if not all(m_a.get(p, 0) for p in net.preset(u)):
                        return CommutationVerdict(False, "send-persists", m, f"{u} disabled by {seq_a}", checked)
                    try:
                        alt = replay_from(net, m_u, seq_a)
                    except ValueError:
                        return CommutationVerdict(False, "send-persists", m, f"{seq_a} blocked after {u}", checked)
                    if alt != fire(net, m_a, u):
                        return CommutationVerdict(False, "send-persists", m, f"{u} vs {seq_a}", checked)
            # (c) diamond completion within side a
            for t in send[a]:
                if not all(m.get(p, 0) for p in net.preset(t)):
                    continue
                m_t = fire(net, m, t)
                for seq_a, m_a in runs_a:
                    if not seq_a:
                        continue
                    checked += 1
                    if not _completes(net, tags, recv[a], send[a], t, seq_a, m_t, m_a):
                        return CommutationVerdict(False, "diamond-path", m, f"{t} against {seq_a}", checked)
    return CommutationVerdict(True, checked=checked)


def replay_from(net: LabeledNet, m: Bag, seq: Iterable[str]) -> Bag:
    for t in seq:
        m = fire(net, m, t)
    return m


def _completes(net, tags, recv, sends, t, seq, m_t, m_n) -> bool:
    labels = [tags[x].label for x in seq]
    ends = {m_t}
    for lab in labels:
        nxt = set()
        for cur in ends:
            for r in recv:
                if tags[r].label == lab and all(cur.get(p, 0) for p in net.preset(r)):
                    nxt.add(fire(net, cur, r))
        ends = nxt
        if not ends:
            return False
    want = tags[t].label
    for bar in sends:
        if tags[bar].label == want and all(m_n.get(p, 0) for p in net.preset(bar)):
            if fire(net, m_n, bar) in ends:
                return True
    return False
