"""A small ComMA-like interface language.

    signature Ping { signals req notifications ack }
    interface Ping {
        initial state Idle { on req goto Busy }
        state Busy { do ack goto Done }
        final state Done { }
    }

``on X do a, b goto S`` receives signal X then sends notifications a and b.
``for all states { ... }`` copies its transitions into every non-final state.
Line comments start with ``//``.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass, field

from .foundation import LabeledNet
from .portnet import Diagnostic, Direction, OpenNet, PortnetError, direction, validate_portnet
from .verify import Trace

KEYWORDS = {"signature", "signals", "notifications", "interface", "initial", "final",
            "state", "on", "do", "goto", "for", "all", "states"}

_TOKEN = re.compile(r"(?P<ws>\s+)|(?P<comment>//[^\n]*)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[{},])")


class DslError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col, self.msg = line, col, message
        super().__init__(f"{line}:{col}: {message}" if line else message)


class DslSyntaxError(DslError):
    pass


class DslSemanticError(DslError):
    pass


class LoweringError(PortnetError):
    pass


@dataclass(frozen=True)
class SpecTransition:
    kind: str  # "triggered" or "nontriggered"
    trigger: str | None
    effects: tuple[str, ...]
    next: str

    def __post_init__(self):
        if self.kind == "triggered" and not self.trigger:
            raise DslSemanticError("triggered transition needs a trigger")
        if self.kind == "nontriggered" and (self.trigger or len(self.effects) != 1):
            raise DslSemanticError("non-triggered transition has exactly one effect and no trigger")
        if self.kind not in ("triggered", "nontriggered"):
            raise DslSemanticError(f"unknown transition kind {self.kind!r}")


@dataclass(frozen=True)
class SpecState:
    name: str
    transitions: tuple[SpecTransition, ...] = ()


@dataclass(frozen=True)
class InterfaceSpec:
    name: str
    signals: tuple[str, ...]
    notifications: tuple[str, ...]
    states: tuple[SpecState, ...]
    initial: str
    final: str
    interface_name: str = field(default="", compare=False)

    def state(self, name: str) -> SpecState:
        for s in self.states:
            if s.name == name:
                return s
        raise KeyError(name)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks, pos, line, lstart = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "id":
            toks.append(_Tok("kw" if chunk in KEYWORDS else "id", chunk, line, pos - lstart + 1))
        elif kind == "sym":
            toks.append(_Tok("sym", chunk, line, pos - lstart + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            lstart = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - lstart + 1))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _lex(text)
        self.k = 0
        self.where: dict[str, tuple[int, int]] = {}

    @property
    def cur(self):
        return self.toks[self.k]

    def fail(self, what):
        t = self.cur
        got = t.text or "end of input"
        raise DslSyntaxError(f"expected {what}, got {got!r}", t.line, t.col)

    def accept(self, text):
        if self.cur.kind in ("kw", "sym") and self.cur.text == text:
            self.k += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.fail(repr(text))

    def ident(self):
        t = self.cur
        if t.kind != "id":
            self.fail("identifier")
        self.k += 1
        return t

    def idlist(self):
        out = []
        if self.cur.kind != "id":
            return out
        out.append(self.ident())
        while self.accept(","):
            out.append(self.ident())
        return out

    def spec(self):
        self.expect("signature")
        sig = self.ident()
        self.expect("{")
        self.expect("signals")
        signals = self.idlist()
        self.expect("notifications")
        notes = self.idlist()
        self.expect("}")
        self.expect("interface")
        iface = self.ident()
        self.expect("{")
        states, common = [], []
        while not self.accept("}"):
            if self.accept("for"):
                self.expect("all")
                self.expect("states")
                self.expect("{")
                while not self.accept("}"):
                    common.append(self.trans())
            else:
                states.append(self.state())
        if self.cur.kind != "eof":
            self.fail("end of input")
        if not states:
            raise DslSyntaxError("interface declares no states", iface.line, iface.col)
        return sig, signals, notes, iface, states, common

    def state(self):
        flag = None
        if self.cur.text in ("initial", "final") and self.cur.kind == "kw":
            flag = self.cur.text
            self.k += 1
        self.expect("state")
        name = self.ident()
        self.expect("{")
        trans = []
        while not self.accept("}"):
            trans.append(self.trans())
        return flag, name, trans

    def trans(self):
        start = self.cur
        if self.accept("on"):
            trig = self.ident()
            effects = self.idlist() if self.accept("do") else []
            if self.accept("do"):
                self.fail("'goto'")
            self.expect("goto")
            nxt = self.ident()
            return start, trig, effects, nxt
        if self.accept("do"):
            eff = self.ident()
            self.expect("goto")
            nxt = self.ident()
            return start, None, [eff], nxt
        self.fail("'on', 'do' or '}'")


def parse(text: str) -> InterfaceSpec:
    sig, signals, notes, iface, raw_states, common = _Parser(text).spec()
    sig_names = [t.text for t in signals]
    note_names = [t.text for t in notes]
    for group in (signals, notes):
        seen = set()
        for t in group:
            if t.text in seen:
                raise DslSemanticError(f"event {t.text} declared twice", t.line, t.col)
            seen.add(t.text)
    both = set(sig_names) & set(note_names)
    if both:
        t = next(t for t in notes if t.text in both)
        raise DslSemanticError(f"event {t.text} is both a signal and a notification", t.line, t.col)

    names, initial, final = {}, [], []
    for flag, name, _ in raw_states:
        if name.text in names:
            raise DslSemanticError(f"state {name.text} declared twice", name.line, name.col)
        names[name.text] = name
        if flag == "initial":
            initial.append(name)
        elif flag == "final":
            final.append(name)
    if len(initial) != 1:
        at = initial[1] if len(initial) > 1 else iface
        raise DslSemanticError(f"expected exactly one initial state, found {len(initial)}", at.line, at.col)
    if len(final) != 1:
        at = final[1] if len(final) > 1 else iface
        raise DslSemanticError(f"expected exactly one final state, found {len(final)}", at.line, at.col)

    def convert(raw):
        start, trig, effects, nxt = raw
        if trig is not None and trig.text not in sig_names:
            raise DslSemanticError(f"unknown signal {trig.text}", trig.line, trig.col)
        for e in effects:
            if e.text not in note_names:
                raise DslSemanticError(f"unknown notification {e.text}", e.line, e.col)
        if nxt.text not in names:
            raise DslSemanticError(f"unknown state {nxt.text}", nxt.line, nxt.col)
        return SpecTransition(
            "triggered" if trig is not None else "nontriggered",
            trig.text if trig is not None else None,
            tuple(e.text for e in effects),
            nxt.text,
        )

    shared = [convert(r) for r in common]
    states = []
    for flag, name, trans in raw_states:
        ts = [convert(r) for r in trans]
        if flag == "final":
            if ts:
                raise DslSemanticError(f"final state {name.text} has outgoing transitions", name.line, name.col)
        else:
            ts += shared
        states.append(SpecState(name.text, tuple(ts)))
    return InterfaceSpec(sig.text, tuple(sig_names), tuple(note_names), tuple(states),
                         initial[0].text, final[0].text, iface.text)


def input_place(label: str) -> str:
    return f"in_{label}"


def output_place(label: str) -> str:
    return f"out_{label}"


def lower(spec: InterfaceSpec) -> OpenNet:
    """One place per state, one interface place per event, one receive or send transition per trigger and effect."""
    places = {s.name for s in spec.states}
    transitions: dict[str, str] = {}
    arcs = set()
    for s in spec.states:
        for k, tr in enumerate(s.transitions):
            tid = f"{s.name}.{k}"
            if tr.kind == "nontriggered":
                (eff,) = tr.effects
                transitions[tid] = eff
                arcs |= {(s.name, tid), (tid, tr.next), (tid, output_place(eff))}
                continue
            transitions[tid] = tr.trigger
            arcs |= {(s.name, tid), (input_place(tr.trigger), tid)}
            prev = tid
            for j, eff in enumerate(tr.effects, 1):
                mid = f"{s.name}__{tr.trigger}__{j}"
                if mid in places:
                    mid = f"{s.name}__{tr.trigger}_{k}__{j}"
                places.add(mid)
                arcs.add((prev, mid))
                sid = f"{tid}.{j}"
                transitions[sid] = eff
                arcs |= {(mid, sid), (sid, output_place(eff))}
                prev = sid
            arcs.add((prev, tr.next))
    inputs = {input_place(x) for x in spec.signals}
    outputs = {output_place(x) for x in spec.notifications}
    clash = places & (inputs | outputs)
    if clash:
        raise LoweringError("state names collide with interface places",
                            [Diagnostic("DSL-NAME", "rename the state", tuple(sorted(clash)),
                                        "avoid the in_/out_ prefixes for state names")])
    net = LabeledNet(frozenset(places | inputs | outputs), frozenset(transitions), frozenset(arcs), transitions)
    n = OpenNet(net, frozenset(inputs), frozenset(outputs), frozenset({spec.initial}), frozenset({spec.final}))
    diags = validate_portnet(n)
    if diags:
        raise LoweringError(f"interface {spec.interface_name or spec.name} does not lower to a labeled portnet",
                            diags)
    return n


def from_portnet(n: OpenNet, name: str, interface_name: str | None = None) -> InterfaceSpec:
    """Express a labeled portnet as a spec: receives become triggers, sends become ``do``."""
    def channel_label(x):
        labs = {n.label(t) for t in n.preset(x) | n.postset(x)}
        if labs:
            return labs.pop()
        return re.sub(r"^(in|out|ch)_", "", x)

    signals = sorted({channel_label(x) for x in n.inputs})
    notes = sorted({channel_label(x) for x in n.outputs})
    (init,), (fin,) = tuple(n.init), tuple(n.fin)
    order = [init] + sorted(n.places - {init, fin}) + [fin]
    states = []
    for p in order:
        trans = []
        for t in sorted(n.postset(p) & n.transitions):
            (nxt,) = tuple(n.postset(t) & n.places)
            d = direction(n, t)
            if d is Direction.RECEIVE:
                trans.append(SpecTransition("triggered", n.label(t), (), nxt))
            elif d is Direction.SEND:
                trans.append(SpecTransition("nontriggered", None, (n.label(t),), nxt))
            else:
                raise LoweringError(f"tau transition {t} has no spec form")
        states.append(SpecState(p, tuple(trans)))
    return InterfaceSpec(name, tuple(signals), tuple(notes), tuple(states), init, fin, interface_name or name)


def emit_dsl(spec: InterfaceSpec) -> str:
    lines = [
        f"signature {spec.name} {{",
        f"    signals {', '.join(spec.signals)}",
        f"    notifications {', '.join(spec.notifications)}",
        "}",
        "",
        f"interface {spec.interface_name or spec.name} {{",
    ]
    for s in spec.states:
        flag = "initial " if s.name == spec.initial else "final " if s.name == spec.final else ""
        if not s.transitions:
            lines.append(f"    {flag}state {s.name} {{ }}")
            continue
        lines.append(f"    {flag}state {s.name} {{")
        for tr in s.transitions:
            if tr.kind == "nontriggered":
                lines.append(f"        do {tr.effects[0]} goto {tr.next}")
            elif tr.effects:
                lines.append(f"        on {tr.trigger} do {', '.join(tr.effects)} goto {tr.next}")
            else:
                lines.append(f"        on {tr.trigger} goto {tr.next}")
        lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(n: OpenNet, name: str = "portnet") -> str:
    out = [f"digraph {_q(name)} {{", "    rankdir=LR;"]
    for p in sorted(n.net.places):
        attrs = ["shape=ellipse"]
        if p in n.interface:
            attrs.append("style=dashed")
        elif p in n.init or p in n.fin:
            attrs.append("peripheries=2")
        out.append(f"    {_q(p)} [{', '.join(attrs)}];")
    for t in sorted(n.transitions):
        label = n.label(t) + direction(n, t).mark
        out.append(f"    {_q(t)} [shape=box, label={_q(label)}];")
    for x, y in sorted(n.flow):
        style = " [style=dashed]" if x in n.interface or y in n.interface else ""
        out.append(f"    {_q(x)} -> {_q(y)}{style};")
    out.append("}")
    return "\n".join(out) + "\n"


def emit_state_diagram(spec: InterfaceSpec) -> str:
    """Mermaid state diagram of the interface state machine."""
    out = ["stateDiagram-v2", f"    [*] --> {spec.initial}"]
    for s in spec.states:
        for tr in s.transitions:
            if tr.kind == "nontriggered":
                text = f"{tr.effects[0]}!"
            else:
                text = f"{tr.trigger}?" + "".join(f" / {e}!" for e in tr.effects)
            out.append(f"    {s.name} --> {tr.next}: {text}")
    out.append(f"    {spec.final} --> [*]")
    return "\n".join(out) + "\n"


def emit_seqdiag(trace: Trace, owners: Mapping[str, str] | None = None, server: str = "Server") -> str:
    """Mermaid sequence diagram of an annotated trace.

    Sends are arrows towards the peer that consumes the message; receives are
    notes on the consuming side; tau steps are self-notes.
    """
    owners = dict(owners or {})
    show = lambda o: owners.get(o, o)  # noqa: E731
    parts = []
    for info in trace.annotations:
        if info.owner not in parts:
            parts.append(info.owner)
    if server in parts:
        parts.remove(server)
        parts.insert(0, server)
    out = ["sequenceDiagram"] + [f"    participant {show(o)}" for o in parts]
    steps = list(zip(trace.firing, trace.annotations))
    consumed = [False] * len(steps)
    for k, (_, info) in enumerate(steps):
        if info.direction is Direction.SEND:
            peer = _peer(steps, consumed, k, parts)
            out.append(f"    {show(info.owner)}->>{show(peer)}: {info.label}")
        elif info.direction is Direction.RECEIVE:
            out.append(f"    Note over {show(info.owner)}: consumes {info.label}")
        else:
            out.append(f"    Note over {show(info.owner)}: {info.label}")
    return "\n".join(out) + "\n"


def _peer(steps, consumed, k, parts):
    _, info = steps[k]
    for j in range(k + 1, len(steps)):
        _, other = steps[j]
        if (not consumed[j] and other.direction is Direction.RECEIVE
                and other.label == info.label and other.owner != info.owner):
            consumed[j] = True
            return other.owner
    for o in parts:
        if o != info.owner:
            return o
    return info.owner

