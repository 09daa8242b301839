"""Brute-force reference evaluations, written against raw arc sets only.

Nothing here calls the package's checkers or its preset/postset/direction
helpers; the nets are read through their public fields.
"""

from __future__ import annotations

from collections import Counter
from itertools import combinations, product

SEND, RECV, TAU = "send", "receive", "tau"


class Raw:
    def __init__(self, n):
        self.P = set(n.places)
        self.I = set(n.inputs)
        self.O = set(n.outputs)
        self.T = set(n.transitions)
        self.F = set(n.flow)
        self.mu = dict(n.labeling)
        self.init = set(n.init)
        self.fin = set(n.fin)

    def post(self, x):
        return {y for (a, y) in self.F if a == x}

    def pre(self, x):
        return {a for (a, y) in self.F if y == x}

    def lam(self, t):
        if any((t, o) in self.F for o in self.O):
            return SEND
        if any((i, t) in self.F for i in self.I):
            return RECV
        return TAU


def observable(n) -> bool:
    r = Raw(n)
    return all(
        r.mu[t] != r.mu[u]
        for p in r.P
        for t, u in combinations(sorted(r.post(p)), 2)
    )


def choice(n) -> bool:
    r = Raw(n)
    return all(len({r.lam(t) for t in r.post(p)}) <= 1 for p in r.P)


def diamond(n) -> bool:
    r = Raw(n)
    for p in r.P:
        for t, t2 in product(r.post(p), repeat=2):
            if t == t2 or r.lam(t) == r.lam(t2):
                continue
            for q, q2 in product(r.post(t) & r.P, r.post(t2) & r.P):
                if not any(
                    (r.post(u) & r.post(u2))
                    and r.mu[t] == r.mu[u2]
                    and r.mu[t2] == r.mu[u]
                    for u, u2 in product(r.post(q), r.post(q2))
                ):
                    return False
    return True


def _walks(r: Raw, start: list, max_arc_uses: int, keep_going):
    """Every path extending ``start`` with each arc used at most ``max_arc_uses``
    times, pruned where ``keep_going(path)`` is false."""
    uses = Counter(zip(start, start[1:]))
    path = list(start)

    def rec():
        yield tuple(path)
        if not keep_going(path):
            return
        x = path[-1]
        for y in sorted(r.post(x)):
            if y in r.I or y in r.O:
                continue
            if uses[(x, y)] >= max_arc_uses:
                continue
            uses[(x, y)] += 1
            path.append(y)
            yield from rec()
            path.pop()
            uses[(x, y)] -= 1

    yield from rec()


def pathset(n, p, t, label, max_arc_uses: int = 2):
    """Paths <p, t, ..., t''> (optionally followed by one more place) with
    label(t'') = label and no transition between t and t'' carrying the label."""
    r = Raw(n)
    found = []

    def keep_going(path):
        ts = [x for x in path if x in r.T]
        if path[-1] in r.T and len(ts) >= 2 and r.mu[path[-1]] == label:
            return True
        return all(r.mu[u] != label for u in ts[1:])

    for path in _walks(r, [p, t], max_arc_uses, keep_going):
        ts = [x for x in path if x in r.T]
        if len(ts) < 2 or r.mu[ts[-1]] != label or any(r.mu[u] == label for u in ts[1:-1]):
            continue
        if path[-1] == ts[-1] or path[-2] == ts[-1]:
            found.append(path)
    return found


def loop(n, strict: bool = False, max_arc_uses: int = 2) -> bool:
    r = Raw(n)
    for p in r.P:
        for t, t2 in product(r.post(p), repeat=2):
            if t == t2 or r.lam(t) != r.lam(t2):
                continue
            for path in pathset(n, p, t, r.mu[t2], max_arc_uses):
                ts = [x for x in path if x in r.T]
                if strict:
                    other = [u for u in ts if r.lam(u) not in (r.lam(t), TAU)]
                else:
                    other = [u for u in ts if r.lam(u) != r.lam(t)]
                if not other:
                    return False
    return True


def leg(n, max_arc_uses: int = 2) -> bool:
    r = Raw(n)
    starts = {p for p in r.P if len(r.post(p)) > 1} | r.init
    ends = {p for p in r.P if len(r.pre(p)) > 1} | r.fin

    def mixed(path):
        ds = {r.lam(x) for x in path if x in r.T} - {TAU}
        return len(ds) > 1

    for p in starts:
        for path in _walks(r, [p], max_arc_uses, lambda pa: not mixed(pa)):
            if len(path) > 1 and path[-1] in ends and not mixed(path):
                return False
    return True


def _successors(transitions, flow):
    pre = {t: [p for (p, x) in flow if x == t] for t in transitions}
    post = {t: [p for (x, p) in flow if x == t] for t in transitions}

    def succ(m):
        cur = Counter(dict(m))
        for t in sorted(transitions):
            if all(cur[p] >= 1 for p in pre[t]):
                m2 = cur.copy()
                for p in pre[t]:
                    m2[p] -= 1
                for p in post[t]:
                    m2[p] += 1
                yield tuple(sorted((p, c) for p, c in m2.items() if c))

    return succ


def bfs_depths(transitions, flow, m0):
    """Distance (in firings) from ``m0`` to every reachable marking, plus the edge count."""
    succ = _successors(transitions, flow)
    start = tuple(sorted(Counter(m0).items()))
    depth, frontier, edges = {start: 0}, [start], 0
    while frontier:
        nxt = []
        for m in frontier:
            for m2 in succ(m):
                edges += 1
                if m2 not in depth:
                    depth[m2] = depth[m] + 1
                    nxt.append(m2)
        frontier = nxt
    return depth, edges


def is_dead(marking, transitions, flow):
    return next(_successors(transitions, flow)(tuple(dict(marking).items())), None) is None
