"""Open Petri nets, labeled portnets and their composition."""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .foundation import LabeledNet, NetError, NetSystem, UnknownNodeError, structure


class Direction(enum.Enum):
    SEND = "send"
    RECEIVE = "receive"
    TAU = "tau"

    @property
    def mark(self) -> str:
        return {"send": "!", "receive": "?", "tau": ""}[self.value]


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    nodes: tuple[str, ...] = ()
    hint: str = ""

    def __str__(self):
        where = f" [{', '.join(self.nodes)}]" if self.nodes else ""
        hint = f" (hint: {self.hint})" if self.hint else ""
        return f"{self.code}{where}: {self.message}{hint}"


class PortnetError(NetError):
    def __init__(self, message: str, diagnostics: Iterable[Diagnostic] = ()):
        self.diagnostics = list(diagnostics)
        detail = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"{message}: {detail}" if detail else message)


class CompositionError(PortnetError):
    pass


@dataclass(frozen=True)
class OpenNet:
    """A labeled net with distinguished input and output places.

    ``net`` holds every place, interface places included. Construction checks
    that internal, input and output places are disjoint and that init/fin are
    internal; the flow restrictions on interface places are reported by
    :func:`open_net_diagnostics`.
    """

    net: LabeledNet
    inputs: frozenset[str] = field(default_factory=frozenset)
    outputs: frozenset[str] = field(default_factory=frozenset)
    init: frozenset[str] = field(default_factory=frozenset)
    fin: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        for name in ("inputs", "outputs", "init", "fin"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if self.inputs & self.outputs:
            raise NetError(f"places both input and output: {sorted(self.inputs & self.outputs)}")
        unknown = (self.inputs | self.outputs) - self.net.places
        if unknown:
            raise NetError(f"interface places missing from the net: {sorted(unknown)}")
        bad = (self.init | self.fin) - self.places
        if bad:
            raise NetError(f"init/fin must be internal places: {sorted(bad)}")

    @classmethod
    def build(
        cls,
        places: Iterable[str],
        transitions: Mapping[str, str],
        arcs: Iterable[tuple[str, str]],
        inputs: Iterable[str] = (),
        outputs: Iterable[str] = (),
        init: Iterable[str] = (),
        fin: Iterable[str] = (),
    ):
        inputs, outputs = frozenset(inputs), frozenset(outputs)
        net = LabeledNet.build(set(places) | inputs | outputs, transitions, arcs)
        return cls(net, inputs, outputs, frozenset(init), frozenset(fin))

    @property
    def places(self) -> frozenset[str]:
        return self.net.places - self.inputs - self.outputs

    @property
    def interface(self) -> frozenset[str]:
        return self.inputs | self.outputs

    @property
    def transitions(self) -> frozenset[str]:
        return self.net.transitions

    @property
    def flow(self) -> frozenset[tuple[str, str]]:
        return self.net.flow

    @property
    def labeling(self) -> Mapping[str, str]:
        return self.net.labeling

    @property
    def nodes(self) -> frozenset[str]:
        return self.net.nodes

    def preset(self, x: str) -> frozenset[str]:
        return self.net.preset(x)

    def postset(self, x: str) -> frozenset[str]:
        return self.net.postset(x)

    def label(self, t: str) -> str:
        return self.net.labeling[t]

    def channel(self, t: str) -> frozenset[str]:
        """Interface places attached to transition ``t``."""
        return (self.preset(t) | self.postset(t)) & self.interface

    def rename(self, mapping: Mapping[str, str]) -> OpenNet:
        r = lambda x: mapping.get(x, x)  # noqa: E731
        return type(self)(
            self.net.rename(mapping),
            frozenset(map(r, self.inputs)),
            frozenset(map(r, self.outputs)),
            frozenset(map(r, self.init)),
            frozenset(map(r, self.fin)),
        )

    def system(self) -> NetSystem:
        """Net system marking ``init`` initially and ``fin`` finally."""
        return NetSystem(self, self.init, self.fin)


def direction(n: OpenNet, t: str) -> Direction:
    if t not in n.transitions:
        raise UnknownNodeError(t)
    if n.postset(t) & n.outputs:
        return Direction.SEND
    if n.preset(t) & n.inputs:
        return Direction.RECEIVE
    return Direction.TAU


def open_net_diagnostics(n: OpenNet) -> list[Diagnostic]:
    out = []
    for x in sorted(n.inputs):
        if n.preset(x):
            out.append(Diagnostic("OPN-INPUT", f"input place {x} has producers", (x, *sorted(n.preset(x))),
                                  "inputs may only be consumed"))
    for x in sorted(n.outputs):
        if n.postset(x):
            out.append(Diagnostic("OPN-OUTPUT", f"output place {x} has consumers", (x, *sorted(n.postset(x))),
                                  "outputs may only be produced"))
    for t in sorted(n.transitions):
        if n.preset(t) & n.inputs and n.postset(t) & n.outputs:
            out.append(Diagnostic("OPN-MIXED", f"transition {t} both receives and sends", (t,),
                                  "split the transition into a receive and a send"))
    return out


def skeleton(n: OpenNet) -> OpenNet:
    internal = n.places
    flow = frozenset((x, y) for x, y in n.flow if x in internal or y in internal)
    net = LabeledNet(internal, n.transitions, flow, n.labeling)
    return OpenNet(net, frozenset(), frozenset(), n.init, n.fin)


def _fresh(base: str, taken: frozenset[str]) -> str:
    name, k = base, 1
    while name in taken:
        k += 1
        name = f"{base}{k}"
    return name


def closure(n: OpenNet, tid: str = "close", label: str = "tau") -> OpenNet:
    """Add a fresh tau transition from ``fin`` back to ``init``."""
    sk = skeleton(n)
    rep = structure(sk.net)
    if not (rep.is_s_net and rep.is_wfn and n.init == {rep.source} and n.fin == {rep.sink}):
        raise PortnetError("closure needs a state-machine open workflow net",
                           [Diagnostic("CLOSURE-PRE", "skeleton is not an S-net WFN with matching init/fin")])
    t = _fresh(tid, n.nodes)
    flow = set(n.flow) | {(f, t) for f in n.fin} | {(t, i) for i in n.init}
    labels = dict(n.labeling)
    labels[t] = label
    net = LabeledNet(n.net.places, n.transitions | {t}, frozenset(flow), labels)
    return OpenNet(net, n.inputs, n.outputs, n.init, n.fin)


def validate_portnet(n: OpenNet) -> list[Diagnostic]:
    """Diagnostics for every violated portnet condition; empty means valid."""
    out = open_net_diagnostics(n)
    sk = skeleton(n)
    rep = structure(sk.net)
    if not rep.is_s_net:
        bad = sorted(t for t in sk.transitions if len(sk.preset(t)) > 1 or len(sk.postset(t)) > 1)
        out.append(Diagnostic("LP-COND-1", "skeleton is not a state machine", tuple(bad),
                              "give each transition one internal input and one internal output place"))
    if not rep.is_wfn:
        sources = sorted(p for p in sk.places if not sk.preset(p))
        sinks = sorted(p for p in sk.places if not sk.postset(p))
        out.append(Diagnostic("LP-COND-1", f"skeleton is not a workflow net (sources {sources}, sinks {sinks})",
                              tuple(sources + sinks),
                              "keep one initial and one final place with every node on a path between them"))
    if len(n.init) != 1 or len(n.fin) != 1:
        out.append(Diagnostic("LP-COND-1", "init and fin must be singletons", tuple(sorted(n.init | n.fin)),
                              "declare exactly one initial and one final place"))
    elif rep.is_wfn and (n.init != {rep.source} or n.fin != {rep.sink}):
        out.append(Diagnostic("LP-COND-1", "init/fin do not match the skeleton's source/sink",
                              tuple(sorted(n.init | n.fin)), "mark the source place initial and the sink final"))
    for t in sorted(n.transitions):
        ch = n.channel(t)
        if len(ch) != 1:
            out.append(Diagnostic("LP-COND-2", f"transition {t} touches {len(ch)} interface places",
                                  (t, *sorted(ch)), "attach every transition to exactly one interface place"))
    for x in sorted(n.interface):
        labels = {n.label(t) for t in n.preset(x) | n.postset(x)}
        if len(labels) > 1:
            out.append(Diagnostic("LP-COND-3", f"interface place {x} carries labels {sorted(labels)}", (x,),
                                  "use one interface place per label"))
    by_label: dict[str, set[frozenset[str]]] = {}
    for t in n.transitions:
        by_label.setdefault(n.label(t), set()).add(n.channel(t))
    for lab, chans in sorted(by_label.items()):
        if len(chans) > 1:
            nodes = sorted({x for c in chans for x in c})
            out.append(Diagnostic("LP-COND-4", f"label {lab} is spread over interface places {nodes}",
                                  tuple(nodes), "route same-label transitions through one interface place"))
    if not out:
        seen: dict[str, Direction] = {}
        for t in sorted(n.transitions):
            d = direction(n, t)
            assert seen.setdefault(n.label(t), d) == d, f"equal labels with different directions at {t}"
    return out


class LabeledPortnet(OpenNet):
    """An open net that passed :func:`validate_portnet`."""

    def __post_init__(self):
        super().__post_init__()
        diags = validate_portnet(self)
        if diags:
            raise PortnetError("not a labeled portnet", diags)

    @classmethod
    def of(cls, n: OpenNet) -> LabeledPortnet:
        if isinstance(n, LabeledPortnet):
            return n
        return cls(n.net, n.inputs, n.outputs, n.init, n.fin)

    @property
    def init_place(self) -> str:
        return next(iter(self.init))

    @property
    def fin_place(self) -> str:
        return next(iter(self.fin))


def composable(a: OpenNet, b: OpenNet) -> list[Diagnostic]:
    out = []
    shared = a.nodes & b.nodes
    shared_iface = a.interface & b.interface
    if shared != shared_iface:
        bad = sorted(shared - shared_iface)
        out.append(Diagnostic("COMP-SHARED", "nets share nodes that are not common interface places",
                              tuple(bad), "rename internal nodes apart"))
    if (a.inputs & b.outputs) or (b.inputs & a.outputs):
        if not a.outputs <= b.inputs:
            out.append(Diagnostic("COMP-DIR", "outputs of the first net are not all inputs of the second",
                                  tuple(sorted(a.outputs - b.inputs)), "match every output with an input"))
        if not b.outputs <= a.inputs:
            out.append(Diagnostic("COMP-DIR", "outputs of the second net are not all inputs of the first",
                                  tuple(sorted(b.outputs - a.inputs)), "match every output with an input"))
        if a.inputs & b.inputs or a.outputs & b.outputs:
            nodes = sorted((a.inputs & b.inputs) | (a.outputs & b.outputs))
            out.append(Diagnostic("COMP-DIR", "connected nets share same-direction interface places",
                                  tuple(nodes), "a channel needs one producing and one consuming side"))
    return out


def compose(nets: Iterable[OpenNet]) -> OpenNet:
    """Compose a non-empty collection of pairwise composable open nets in one step.

    Composition is not associative, so there is deliberately no binary form.
    """
    nets = list(nets)
    if not nets:
        raise CompositionError("nothing to compose")
    for k, n in enumerate(nets):
        diags = open_net_diagnostics(n)
        if diags:
            raise CompositionError(f"operand {k} is not an open net", diags)
    for i in range(len(nets)):
        for j in range(i + 1, len(nets)):
            diags = composable(nets[i], nets[j])
            if diags:
                raise CompositionError(f"operands {i} and {j} are not composable", diags)
    if len(nets) == 1:
        return nets[0]
    all_in = frozenset().union(*(n.inputs for n in nets))
    all_out = frozenset().union(*(n.outputs for n in nets))
    labels: dict[str, str] = {}
    for n in nets:
        labels.update(n.labeling)
    net = LabeledNet(
        frozenset().union(*(n.net.places for n in nets)),
        frozenset().union(*(n.transitions for n in nets)),
        frozenset().union(*(n.flow for n in nets)),
        labels,
    )
    return OpenNet(
        net,
        all_in - all_out,
        all_out - all_in,
        frozenset().union(*(n.init for n in nets)),
        frozenset().union(*(n.fin for n in nets)),
    )


def align_interfaces(reference: OpenNet, other: OpenNet) -> OpenNet:
    """Rename ``other``'s interface places to ``reference``'s ids for the same label.

    Lets independently written nets (e.g. lowered from separate spec files)
    meet on shared channels before composition.
    """
    ref_ids = {}
    for x in reference.interface:
        for t in reference.preset(x) | reference.postset(x):
            ref_ids[reference.label(t)] = x
    mapping = {}
    for x in other.interface:
        labels = {other.label(t) for t in other.preset(x) | other.postset(x)}
        if len(labels) == 1:
            lab = labels.pop()
            if lab in ref_ids:
                mapping[x] = ref_ids[lab]
    return other.rename(mapping)


def namespace(n: OpenNet, prefix: str, keep_interface: bool = True) -> OpenNet:
    """Prefix internal node ids (and interface ids unless ``keep_interface``)."""
    keep = n.interface if keep_interface else frozenset()
    return n.rename({x: prefix + x for x in n.nodes if x not in keep})


def channel_names(nets: Iterable[OpenNet], prefix: str = "ch_") -> list[OpenNet]:
    """Rename each interface place to ``prefix + label`` so same-label channels fuse."""
    out = []
    for n in nets:
        mapping = {}
        for x in n.interface:
            labels = sorted({n.label(t) for t in n.preset(x) | n.postset(x)})
            if len(labels) == 1:
                mapping[x] = prefix + labels[0]
        out.append(n.rename(mapping))
    return out
