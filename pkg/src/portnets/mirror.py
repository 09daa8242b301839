"""Full and partial mirrors of a server portnet."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .foundation import LabeledNet, _reach
from .portnet import (
    Diagnostic,
    Direction,
    LabeledPortnet,
    OpenNet,
    PortnetError,
    direction,
    validate_portnet,
)


class MirrorError(PortnetError):
    pass


@dataclass(frozen=True)
class MirrorMap:
    """Injective node map from client to server."""

    node_map: Mapping[str, str]

    def __call__(self, x: str) -> str:
        return self.node_map[x]

    def __contains__(self, x):
        return x in self.node_map

    @property
    def is_injective(self) -> bool:
        return len(set(self.node_map.values())) == len(self.node_map)

    def inverse(self) -> dict[str, str]:
        return {v: k for k, v in self.node_map.items()}


def validate_partial_mirror(server: OpenNet, client: OpenNet, phi: MirrorMap) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    f = phi.node_map
    unmapped = sorted(client.nodes - f.keys())
    if unmapped:
        out.append(Diagnostic("MIRROR-1", "client nodes without an image", tuple(unmapped),
                              "map every client node into the server"))
    if not phi.is_injective:
        out.append(Diagnostic("MIRROR-1", "mapping is not injective", (), "map distinct nodes apart"))
    for sources, targets, what in (
        (client.places, server.places, "internal place to internal place"),
        (client.transitions, server.transitions, "transition to transition"),
        (client.inputs, server.outputs, "client input to server output"),
        (client.outputs, server.inputs, "client output to server input"),
    ):
        bad = sorted(x for x in sources if x in f and f[x] not in targets)
        if bad:
            out.append(Diagnostic("MIRROR-1", f"must map {what}", tuple(bad), "fix the node mapping"))
    if out:
        return out

    for x, y in sorted(client.flow):
        if x in client.inputs or y in client.outputs:
            want = (f[y], f[x])
        else:
            want = (f[x], f[y])
        if want not in server.flow:
            out.append(Diagnostic("MIRROR-2", f"client arc ({x}, {y}) has no server arc {want}", (x, y),
                                  "keep client arcs as (reversed on interfaces) server arcs"))
    if {f[x] for x in client.init} != set(server.init) or {f[x] for x in client.fin} != set(server.fin):
        out.append(Diagnostic("MIRROR-3", "init/fin not mapped onto server init/fin",
                              tuple(sorted(client.init | client.fin)), "map initial to initial and final to final"))
    for t in sorted(client.transitions):
        if client.label(t) != server.label(f[t]):
            out.append(Diagnostic("MIRROR-4", f"label {client.label(t)} differs from server {server.label(f[t])}",
                                  (t, f[t]), "copy server labels"))
    inv = phi.inverse()
    for p in sorted(client.places):
        for t in sorted(server.postset(f[p])):
            if direction(server, t) is not Direction.SEND:
                continue
            if not any(f.get(u) == t for u in client.postset(p)):
                out.append(Diagnostic("MIRROR-5", f"server send {t} ({server.label(t)}) from {f[p]} "
                                                  f"has no counterpart at client place {p}",
                                      (p, t) + ((inv[t],) if t in inv else ()),
                                      "a client must be able to receive every server send"))
    return out


def derive_full_mirror(server: OpenNet, suffix: str = "_c") -> tuple[LabeledPortnet, MirrorMap]:
    """Client with renamed internal nodes, shared interface places and flipped directions."""
    rename = {x: x + suffix for x in server.places | server.transitions}
    arcs = set()
    for x, y in server.flow:
        if x in server.interface or y in server.interface:
            arcs.add((rename.get(y, y), rename.get(x, x)))
        else:
            arcs.add((rename[x], rename[y]))
    net = LabeledNet(
        frozenset(rename[p] for p in server.places) | server.interface,
        frozenset(rename[t] for t in server.transitions),
        frozenset(arcs),
        {rename[t]: lab for t, lab in server.labeling.items()},
    )
    client = LabeledPortnet(
        net,
        inputs=server.outputs,
        outputs=server.inputs,
        init=frozenset(rename[p] for p in server.init),
        fin=frozenset(rename[p] for p in server.fin),
    )
    phi = {v: k for k, v in rename.items()}
    phi.update({x: x for x in server.interface})
    return client, MirrorMap(phi)


def derive_partial_mirror(
    server: OpenNet,
    drop: Iterable[str] = (),
    suffix: str = "_c",
    drop_transitions: Iterable[str] = (),
) -> tuple[LabeledPortnet, MirrorMap]:
    """Full mirror minus the client sends for the ``drop`` labels, pruned to
    the nodes still on an init-to-fin path.

    ``drop_transitions`` names individual server receive transitions whose
    client counterparts are removed as well.
    """
    drop = set(drop)
    by_label: dict[str, set[Direction]] = {}
    for t in server.transitions:
        by_label.setdefault(server.label(t), set()).add(direction(server, t))
    for lab in sorted(drop):
        if lab not in by_label:
            raise MirrorError(f"unknown label {lab}")
        if by_label[lab] != {Direction.RECEIVE}:
            raise MirrorError(f"refusing to drop {lab}",
                              [Diagnostic("MIRROR-5", f"server sends {lab}; a client must receive it", (lab,),
                                          "only client sends (server receives) may be dropped")])
    drop_t = set(drop_transitions)
    for t in sorted(drop_t):
        if t not in server.transitions or direction(server, t) is not Direction.RECEIVE:
            raise MirrorError(f"refusing to drop transition {t}",
                              [Diagnostic("MIRROR-5", f"{t} is not a server receive", (t,),
                                          "only client sends (server receives) may be dropped")])

    full, phi = derive_full_mirror(server, suffix)
    gone = {t for t in full.transitions
            if full.label(t) in drop or phi(t) in drop_t}
    trans = full.transitions - gone

    def succ(x):
        return [y for y in full.postset(x) if y not in gone and y not in full.interface]

    def pred(x):
        return [y for y in full.preset(x) if y not in gone and y not in full.interface]

    init, fin = next(iter(full.init)), next(iter(full.fin))
    alive = _reach([init], succ) & _reach([fin], pred)
    if fin not in alive:
        raise MirrorError("dropping disconnects the initial place from the final place",
                          [Diagnostic("MIRROR-PRUNE", "no init-to-fin path left", (init, fin),
                                      "drop fewer labels")])
    keep_places = (full.places & alive) | full.interface
    keep_trans = trans & alive
    net = LabeledNet(
        keep_places,
        keep_trans,
        frozenset((x, y) for x, y in full.flow if {x, y} <= keep_places | keep_trans),
        {t: full.label(t) for t in keep_trans},
    )
    candidate = OpenNet(net, full.inputs, full.outputs, full.init, full.fin)
    sub_phi = MirrorMap({x: phi(x) for x in candidate.nodes})
    diags = validate_portnet(candidate) + validate_partial_mirror(server, candidate, sub_phi)
    if diags:
        raise MirrorError("derived client is not a partial mirror", diags)
    return LabeledPortnet.of(candidate), sub_phi


def infer_mirror_map(server: OpenNet, client: OpenNet) -> MirrorMap | None:
    """Recover a mirror map by walking both nets in lockstep on labels.

    Interface places are matched by label and flipped direction. Returns None
    when the walk is ambiguous or fails.
    """
    def chan_by_label(n):
        out = {}
        for x in n.interface:
            labs = {n.label(t) for t in n.preset(x) | n.postset(x)}
            if len(labs) == 1:
                out[labs.pop()] = x
        return out

    s_chan, c_chan = chan_by_label(server), chan_by_label(client)
    f: dict[str, str] = {}
    for lab, x in c_chan.items():
        if lab not in s_chan:
            return None
        f[x] = s_chan[lab]
    if len(client.init) != 1 or len(server.init) != 1:
        return None
    ci, si = next(iter(client.init)), next(iter(server.init))
    f[ci] = si
    todo = deque([ci])
    while todo:
        p = todo.popleft()
        for t in sorted(client.postset(p)):
            cands = [u for u in server.postset(f[p]) if server.label(u) == client.label(t)]
            if len(cands) != 1:
                return None
            u = cands[0]
            if f.setdefault(t, u) != u:
                return None
            for q in client.postset(t) & client.places:
                (q2,) = server.postset(u) & server.places or (None,)
                if q2 is None:
                    return None
                if q not in f:
                    f[q] = q2
                    todo.append(q)
                elif f[q] != q2:
                    return None
    for x in client.interface - f.keys():
        if x not in server.interface:
            return None
        f[x] = x
    return MirrorMap(f)
