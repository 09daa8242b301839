"""Named example portnets and a random portnet generator."""

from __future__ import annotations

import random
from collections.abc import Iterable

from .portnet import LabeledPortnet, OpenNet


def portnet(init: str, fin: str, steps: Iterable[tuple[str, str, str, str, str]]) -> LabeledPortnet:
    """Build a portnet from ``(tid, src, label, mark, dst)`` steps, ``mark`` being
    ``"!"`` for a send and ``"?"`` for a receive. Interface places are named
    ``in_<label>`` / ``out_<label>``."""
    places, labels, arcs = set(), {}, set()
    inputs, outputs = set(), set()
    for tid, src, label, mark, dst in steps:
        places |= {src, dst}
        labels[tid] = label
        arcs |= {(src, tid), (tid, dst)}
        if mark == "!":
            outputs.add(f"out_{label}")
            arcs.add((tid, f"out_{label}"))
        elif mark == "?":
            inputs.add(f"in_{label}")
            arcs.add((f"in_{label}", tid))
        else:
            raise ValueError(f"unknown mark {mark!r}")
    return LabeledPortnet.of(OpenNet.build(places, labels, arcs, inputs, outputs, [init], [fin]))


def ping() -> LabeledPortnet:
    return portnet("i", "f", [("t1", "i", "req", "?", "p"), ("t2", "p", "ack", "!", "f")])


def race() -> LabeledPortnet:
    return portnet("r", "f", [
        ("n1", "r", "notify", "!", "a"),
        ("c1", "r", "cmd", "?", "b"),
        ("c2", "a", "cmd", "?", "c"),
        ("n2", "b", "notify", "!", "c"),
        ("d", "c", "done", "!", "f"),
    ])


def loopviol(sync: bool = False, k: int = 0) -> LabeledPortnet:
    """Two competing sends where the loser's label is reachable again after the winner.

    With ``sync`` a receive is inserted before that second send, which repairs
    it. ``k`` adds that many extra sends on the winning branch.
    """
    steps = [
        ("ta", "p", "a", "!", "x0"),
        ("tb1", "p", "b", "!", "y"),
        ("tc1", "z", "c", "?", "f"),
        ("tc2", "y", "c", "?", "f"),
    ]
    steps += [(f"te{j}", f"x{j}", f"e{j}", "!", f"x{j + 1}") for j in range(k)]
    if sync:
        steps += [("ts", f"x{k}", "sync", "?", "xs"), ("tb2", "xs", "b", "!", "z")]
    else:
        steps += [("tb2", f"x{k}", "b", "!", "z")]
    return portnet("p", "f", steps)


def diamond_violation(k: int = 0) -> LabeledPortnet:
    """A send/receive race whose two branches never meet again.

    ``k`` lengthens both branches with extra receive/send pairs.
    """
    steps = [("tn", "r", "note", "!", "a0"), ("tc", "r", "cmd", "?", "b0")]
    for j in range(k):
        steps += [(f"ta{j}", f"a{j}", f"x{j}", "?", f"a{j + 1}"), (f"tb{j}", f"b{j}", f"y{j}", "!", f"b{j + 1}")]
    steps += [
        ("ta", f"a{k}", "cmd", "?", "c1"),
        ("tb", f"b{k}", "note", "!", "c2"),
        ("e1", "c1", "end1", "!", "f"),
        ("e2", "c2", "end2", "!", "f"),
    ]
    return portnet("r", "f", steps)


def race_with_exit() -> LabeledPortnet:
    """RACE plus a receive exit from ``a``; dropping only the client's second
    ``cmd`` send yields a partial mirror that loses the diamond."""
    return portnet("r", "f", [
        ("n1", "r", "notify", "!", "a"),
        ("c1", "r", "cmd", "?", "b"),
        ("c2", "a", "cmd", "?", "c"),
        ("q", "a", "quit", "?", "f"),
        ("n2", "b", "notify", "!", "c"),
        ("d", "c", "done", "!", "f"),
    ])


def choice_server() -> LabeledPortnet:
    """A request answered by either of two notifications; one branch waits for a
    confirmation. Two unsynchronized clients of its closure can deadlock."""
    return portnet("i", "f", [
        ("t1", "i", "req", "?", "p"),
        ("t2", "p", "ok", "!", "f"),
        ("t3", "p", "more", "!", "q"),
        ("t4", "q", "conf", "?", "f"),
    ])


# --- random generation ------------------------------------------------------


def random_portnet(
    rng: random.Random,
    max_places: int = 12,
    max_labels: int = 6,
    extra: int = 4,
    min_places: int = 2,
    diamonds: int = 0,
    alternate: bool = False,
) -> LabeledPortnet:
    """A random labeled portnet.

    Places are numbered with ``P0`` initial and the last one final. Forward
    arcs make every place reachable from ``P0`` and able to reach the final
    place; extra arcs (possibly backwards) add choices and loops without
    touching the initial place's preset or the final place's postset. Up to
    ``diamonds`` send/receive races that close again are grafted on top.
    With ``alternate``, arcs leaving even places receive and arcs leaving odd
    places send.
    """
    n = rng.randint(min_places, max_places)
    fin = n - 1
    pairs: list[tuple[str, str]] = []
    for k in range(1, fin):
        pairs.append((rng.randrange(0, k), k))
    for k in range(0, fin):
        pairs.append((k, rng.randint(k + 1, fin)))
    for _ in range(rng.randint(0, extra)):
        pairs.append((rng.randrange(0, fin), rng.randint(1, fin)))
    edges = [(f"P{a}", f"P{b}", None) for a, b in pairs]

    n_labels = rng.randint(1, max_labels)
    names = [f"l{j}" for j in range(n_labels)]
    marks = {lab: rng.choice("!?") for lab in names}
    sends = [x for x in names if marks[x] == "!"]
    recvs = [x for x in names if marks[x] == "?"]
    if sends and recvs:
        for d in range(rng.randint(0, diamonds)):
            src = rng.randrange(0, fin)
            dst = rng.randint(src + 1, fin)
            ls, lr = rng.choice(sends), rng.choice(recvs)
            r, a, b, c = (f"D{d}{x}" for x in "rabc")
            edges += [(f"P{src}", r, None), (r, a, ls), (r, b, lr), (a, c, lr), (b, c, ls),
                      (c, f"P{dst}", None)]
    steps = []
    for k, (src, dst, lab) in enumerate(edges):
        if lab is None and alternate and sends and recvs and src.startswith("P"):
            lab = rng.choice(recvs if int(src[1:]) % 2 == 0 else sends)
        lab = lab or rng.choice(names)
        steps.append((f"t{k}", src, lab, marks[lab], dst))
    return portnet("P0", f"P{fin}", steps)


def random_corpus(seed: int, count: int, **kw) -> list[LabeledPortnet]:
    rng = random.Random(seed)
    return [random_portnet(rng, **kw) for _ in range(count)]
