"""Synchronization pattern, place refinement and the partial mirrored portnet pattern."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .foundation import Bag, LabeledNet, NetSystem
from .mirror import MirrorMap, derive_full_mirror, validate_partial_mirror
from .portnet import (
    Diagnostic,
    OpenNet,
    PortnetError,
    align_interfaces,
    closure,
    compose,
    open_net_diagnostics,
    skeleton,
    validate_portnet,
)
from .verify import ExplorationCaps, LinearInvariant, check_weak_termination, explore
from .wellformed import well_formed


class PatternError(PortnetError):
    pass


@dataclass(frozen=True)
class SyncPattern:
    server: OpenNet
    clients: tuple[OpenNet, ...]
    net: OpenNet
    system: NetSystem
    prefix: str

    @property
    def n(self) -> int:
        return len(self.clients)

    def name(self, base: str, j: int | None = None) -> str:
        return f"{self.prefix}{base}" if j is None else f"{self.prefix}{base}_{j}"

    @property
    def server_refinable(self) -> str:
        return self.name("q")

    @property
    def client_refinables(self) -> list[str]:
        return [self.name("q", j) for j in range(1, self.n + 1)]


def _sync_server(pre: str) -> OpenNet:
    i, p, q, r = (pre + x for x in "ipqr")
    a1, a2, a3 = (pre + x for x in ("a1", "a2", "a3"))
    return OpenNet.build(
        [i, p, q, r],
        {pre + "u": "request", pre + "v": "grant", pre + "w": "release", pre + "t": "tau"},
        [(i, pre + "u"), (a1, pre + "u"), (pre + "u", p),
         (p, pre + "v"), (pre + "v", q), (pre + "v", a2),
         (q, pre + "w"), (a3, pre + "w"), (pre + "w", r),
         (r, pre + "t"), (pre + "t", i)],
        inputs=[a1, a3], outputs=[a2], init=[i], fin=[r],
    )


def _sync_client(pre: str, j: int) -> OpenNet:
    i, p, q, r = (f"{pre}{x}_{j}" for x in "ipqr")
    u, v, w = (f"{pre}{x}_{j}" for x in "uvw")
    a1, a2, a3 = (pre + x for x in ("a1", "a2", "a3"))
    return OpenNet.build(
        [i, p, q, r],
        {u: "request", v: "grant", w: "release"},
        [(i, u), (u, p), (u, a1),
         (p, v), (a2, v), (v, q),
         (q, w), (w, r), (w, a3)],
        inputs=[a2], outputs=[a1, a3], init=[i], fin=[r],
    )


def build_sync_pattern(n: int, prefix: str = "") -> SyncPattern:
    """Server cycle i-u-p-v-q-w-r-t-i and ``n`` request/grant/release clients."""
    if n < 1:
        raise PatternError("a synchronization pattern needs at least one client")
    server = _sync_server(prefix)
    clients = tuple(_sync_client(prefix, j) for j in range(1, n + 1))
    net = compose([server, *clients])
    m0 = Bag([prefix + "i"] + [f"{prefix}i_{j}" for j in range(1, n + 1)])
    mf = Bag([prefix + "i"] + [f"{prefix}r_{j}" for j in range(1, n + 1)])
    return SyncPattern(server, clients, net, NetSystem(net, m0, mf), prefix)


def sync_invariants(sp: SyncPattern) -> list[LinearInvariant]:
    """The five place invariants of the synchronization pattern (the per-client
    one once per client, the last split into its two parts)."""
    N = sp.name
    js = range(1, sp.n + 1)
    invs = [LinearInvariant({N("i"): 1, N("p"): 1, N("q"): 1, N("r"): 1}, "eq", 1, "server-token")]
    for j in js:
        invs.append(LinearInvariant({N("i", j): 1, N("p", j): 1, N("q", j): 1, N("r", j): 1}, "eq", 1,
                                    f"client-{j}-token"))
    requests = {N("p", j): 1 for j in js}
    for x in ("a1", "p", "a2"):
        requests[N(x)] = requests.get(N(x), 0) - 1
    invs.append(LinearInvariant(requests, "eq", 0, "pending-requests"))
    invs.append(LinearInvariant({**{N("q", j): 1 for j in js}, N("a2"): 1}, "leq", 1, "one-grant"))
    invs.append(LinearInvariant({N("a2"): 1, N("a3"): 1}, "leq", 1, "grant-or-release"))
    invs.append(LinearInvariant({N("a2"): 1, N("a3"): 1, N("q"): -1, **{N("q", j): 1 for j in js}}, "eq", 0,
                                "grant-balance"))
    return invs


def mutex_predicates(sp: SyncPattern) -> dict:
    q = sp.server_refinable
    qs = sp.client_refinables

    def served_alone(m):
        return m.get(q, 0) != 1 or sum(m.get(x, 0) for x in qs) <= 1

    def client_implies_server(m):
        return sum(m.get(x, 0) for x in qs) != 1 or m.get(q, 0) == 1

    return {"q-implies-one-client": served_alone, "client-implies-q": client_implies_server}


def refine_place(host: OpenNet, p: str, inner: OpenNet) -> OpenNet:
    """Replace place ``p`` of ``host`` by ``inner``: producers of ``p`` feed
    ``inner``'s init places, ``inner``'s fin places feed consumers of ``p``."""
    if p not in host.places:
        raise PatternError(f"{p} is not an internal place of the host")
    if p in host.init or p in host.fin:
        raise PatternError(f"{p} is initial or final in the host; refining it would change the markings")
    if not inner.init or not inner.fin:
        raise PatternError("the refining net needs initial and final places")
    clash = host.nodes & inner.nodes
    if clash:
        raise PatternError(f"nets are not disjoint: {sorted(clash)}")
    pre, post = host.preset(p), host.postset(p)
    flow = {(x, y) for x, y in host.flow if p not in (x, y)}
    flow |= set(inner.flow)
    flow |= {(t, i) for t in pre for i in inner.init}
    flow |= {(f, t) for f in inner.fin for t in post}
    labels = {**host.labeling, **inner.labeling}
    net = LabeledNet(
        (host.net.places - {p}) | inner.net.places,
        host.transitions | inner.transitions,
        frozenset(flow),
        labels,
    )
    return OpenNet(net, host.inputs | inner.inputs, host.outputs | inner.outputs, host.init, host.fin)


def build_pmpp(
    server: OpenNet,
    mirrors: Sequence[tuple[OpenNet, MirrorMap]],
    prefix: str = "sync_",
    caps: ExplorationCaps = ExplorationCaps(),
) -> NetSystem:
    """Embed a server and its partial mirrors in a synchronization pattern."""
    if not mirrors:
        raise PatternError("need at least one mirror")
    diags = validate_portnet(server)
    if diags:
        raise PatternError("server is not a labeled portnet", diags)
    report = well_formed(server)
    if not report.well_formed:
        raise PatternError("server is not well-formed",
                           [Diagnostic("PMPP-WF", "observable choices, diamond or loop fails", (),
                                       "run the well-formedness check on the server")])
    sk = skeleton(server)
    if not check_weak_termination(explore(sk.system(), caps), sk.fin):
        raise PatternError("server skeleton is not weakly terminating")

    clients = []
    for k, (m, phi) in enumerate(mirrors, 1):
        d = validate_portnet(m) + validate_partial_mirror(server, m, phi)
        if d:
            raise PatternError(f"mirror {k} is not a partial mirror of the server", d)
        clients.append(align_interfaces(server, m))
    skeletons = [server.places | server.transitions] + [c.places | c.transitions for c in clients]
    for a in range(len(skeletons)):
        for b in range(a + 1, len(skeletons)):
            clash = skeletons[a] & skeletons[b]
            if clash:
                raise PatternError("skeletons are not pairwise disjoint",
                                   [Diagnostic("PMPP-DISJOINT", f"nets {a} and {b} share nodes",
                                               tuple(sorted(clash)), "derive mirrors with distinct suffixes")])

    sp = build_sync_pattern(len(clients), prefix)
    srv = refine_place(sp.server, sp.server_refinable, server)
    cls = [refine_place(c, q, m) for c, q, m in zip(sp.clients, sp.client_refinables, clients)]
    for part in [srv, *cls]:
        d = open_net_diagnostics(part)
        if d:
            raise PatternError("refinement produced an invalid open net", d)
    net = compose([srv, *cls])
    m0 = Bag([sp.name("i")] + [sp.name("i", j) for j in range(1, len(cls) + 1)])
    mf = Bag([sp.name("i")] + [sp.name("r", j) for j in range(1, len(cls) + 1)])
    return NetSystem(net, m0, mf)


def unsynchronized_system(server: OpenNet, n: int = 2, suffix: str = "_c") -> NetSystem:
    """The closed server composed directly with ``n`` full mirrors, no synchronization.

    The server may serve clients in interleaved sessions, so messages meant for
    one client can be consumed by another.
    """
    if n < 1:
        raise PatternError("need at least one client")
    clients = [derive_full_mirror(server, f"{suffix}{j}")[0] for j in range(1, n + 1)]
    net = compose([closure(server), *clients])
    m0 = Bag([*server.init, *(x for c in clients for x in c.init)])
    mf = Bag([*server.init, *(x for c in clients for x in c.fin)])
    return NetSystem(net, m0, mf)
