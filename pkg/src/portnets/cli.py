"""``portnet`` command line: check, mirror, verify, pattern and export.

Exit codes: 0 ok, 1 property violation, 2 input or validation error,
3 inconclusive (exploration caps exceeded).
"""

from __future__ import annotations

import argparse
import os
import sys
from collections.abc import Mapping, Sequence
from pathlib import Path

from .foundation import Bag, NetError, NetSystem
from .mirror import MirrorError, derive_full_mirror, derive_partial_mirror, infer_mirror_map
from .patterns import build_pmpp
from .portnet import (
    Diagnostic,
    OpenNet,
    PortnetError,
    align_interfaces,
    channel_names,
    closure,
    compose,
    namespace,
    skeleton,
)
from .specdsl import (
    DslError,
    DslSyntaxError,
    emit_dot,
    emit_dsl,
    emit_seqdiag,
    emit_state_diagram,
    from_portnet,
    lower,
    parse,
)
from .verify import (
    ExplorationCaps,
    Inconclusive,
    annotate,
    check_proper_completion,
    check_weak_termination,
    explore,
    find_deadlocks,
    owner_tags,
)
from .wellformed import well_formed

OK, VIOLATION, INPUT_ERROR, INCONCLUSIVE = 0, 1, 2, 3


class InputError(Exception):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        super().__init__("; ".join(map(str, diagnostics)))
        self.diagnostics = list(diagnostics)


class Reporter:
    """Diagnostics go to stderr, artifacts to stdout (or ``--out``)."""

    COLORS = {"error": "31", "violation": "33", "note": "36"}

    def __init__(self, out=None, err=None, color: str | None = None):
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        mode = (color or os.environ.get("PORTNET_COLOR", "auto")).lower()
        if mode not in ("auto", "always", "never"):
            mode = "auto"
        self.color = mode == "always" or (mode == "auto" and getattr(self.err, "isatty", lambda: False)())

    def _paint(self, kind: str, text: str) -> str:
        return f"\x1b[{self.COLORS[kind]}m{text}\x1b[0m" if self.color else text

    def diag(self, d: Diagnostic, kind: str = "error", where: str = ""):
        loc = where or (", ".join(d.nodes) if d.nodes else "-")
        self.err.write(f"{self._paint(kind, kind)}[{d.code}] {loc}: {d.message}\n")
        if d.hint:
            self.err.write(f"  hint: {d.hint}\n")

    def note(self, text: str):
        self.err.write(f"{self._paint('note', 'note')}: {text}\n")

    def emit(self, text: str, path: str | None = None):
        if path:
            Path(path).write_text(text, encoding="utf-8")
        else:
            self.out.write(text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError([Diagnostic("IO", f"cannot read {path}: {e}", (path,), "check the file path")])


def load_spec(path: str):
    try:
        return parse(_read(path))
    except DslError as e:
        where = f"{path}:{e.line}:{e.col}" if e.line else path
        code = "DSL-SYNTAX" if isinstance(e, DslSyntaxError) else "DSL-SEMANTIC"
        raise InputError([Diagnostic(code, e.msg, (where,), "fix the interface file")])


def load(path: str):
    spec = load_spec(path)
    try:
        return spec, lower(spec)
    except PortnetError as e:
        diags = e.diagnostics or [Diagnostic("LOWER", str(e), (path,), "fix the interface file")]
        raise InputError(diags)


def _caps(args) -> ExplorationCaps:
    try:
        return ExplorationCaps(args.max_states, args.max_tokens)
    except ValueError as e:
        raise InputError([Diagnostic("CAPS", str(e), (), "use positive caps")])


def _seqdiag(trace: Sequence[str], parts: Mapping[str, OpenNet], server: str) -> str:
    return emit_seqdiag(annotate(trace, owner_tags(parts)), server=server)


def _system(parts: Sequence[OpenNet]) -> NetSystem:
    net = compose(list(parts))
    m0 = Bag([p for n in parts for p in n.init])
    mf = Bag([p for n in parts for p in n.fin])
    return NetSystem(net, m0, mf)


# --- commands ---------------------------------------------------------------


def cmd_check(args, rep: Reporter) -> int:
    _, server = load(args.file)
    sk = skeleton(server)
    res = check_weak_termination(explore(sk.system(), _caps(args)), sk.fin)
    if not res:
        rep.diag(Diagnostic("SKEL-WT", "skeleton is not weakly terminating", res.trace,
                            "every state must reach the final state"), "violation")
        return VIOLATION
    report = well_formed(server, strict_loop=args.strict_loop)
    for w in report.observable_choices.witnesses:
        rep.diag(Diagnostic("WF-OBSERVABLE", f"transitions {w[1]} and {w[2]} from {w[0]} share a label",
                            tuple(map(str, w)), "give conflicting transitions distinct events"), "violation")
    for w in report.diamond.witnesses:
        rep.diag(Diagnostic("WF-DIAMOND", f"race between {w.t} and {w.t2} at {w.place} does not close "
                                          f"from {w.q} and {w.q2}", (w.place, w.t, w.t2, w.q, w.q2),
                            "let both branches continue with the other's event into a common state"),
                 "violation")
    for w in report.loop.witnesses:
        rep.diag(Diagnostic("WF-LOOP", f"after {w.t} wins over {w.t2} at {w.place}, label of {w.t2} "
                                       f"recurs without a direction change", w.path.nodes,
                            "insert an interaction of the opposite direction"), "violation")
    if report.well_formed:
        rep.emit(f"{args.file}: well-formed\n")
        return OK

    client, _ = derive_full_mirror(server)
    parts = {"Server": server, "Client": client}
    sys_ = _system(list(parts.values()))
    g = explore(sys_, _caps(args))
    dead = find_deadlocks(g, sys_.mf)
    if dead:
        rep.note(f"composition with the full mirror deadlocks after {len(dead[0].trace)} steps")
        rep.emit(_seqdiag(dead[0].trace, parts, "Server"))
    else:
        rep.note("no deadlock in the composition with the full mirror")
    return VIOLATION


def cmd_mirror(args, rep: Reporter) -> int:
    spec, server = load(args.file)
    drop = [x for x in (args.drop or "").split(",") if x]
    try:
        client, _ = derive_partial_mirror(server, drop, suffix=args.suffix) if drop else derive_full_mirror(
            server, args.suffix)
    except MirrorError as e:
        for d in e.diagnostics or [Diagnostic("MIRROR", str(e), (args.file,), "check the --drop labels")]:
            rep.diag(d)
        return INPUT_ERROR
    name = f"{spec.name}Mirror"
    rep.emit(emit_dsl(from_portnet(client, name, f"{spec.interface_name or spec.name}Mirror")), args.out)
    return OK


def _named(paths: Sequence[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for p in paths:
        stem = Path(p).stem or "net"
        seen[stem] = seen.get(stem, 0) + 1
        out.append(stem if seen[stem] == 1 else f"{stem}{seen[stem]}")
    return out


def cmd_verify(args, rep: Reporter) -> int:
    nets = [load(p)[1] for p in args.files]
    names = _named(args.files)
    nets = channel_names(nets)
    parts = {name: namespace(n, f"{name}.") for name, n in zip(names, nets)}
    server = names[0]
    mf_extra = ()
    if args.close:
        parts[server] = closure(parts[server])
        mf_extra = tuple(parts[server].init)
    try:
        net = compose(list(parts.values()))
    except PortnetError as e:
        for d in e.diagnostics or [Diagnostic("COMPOSE", str(e), tuple(args.files), "interfaces must meet on channels of opposite direction")]:
            rep.diag(d)
        return INPUT_ERROR
    m0 = Bag([p for n in parts.values() for p in n.init])
    if args.close:
        mf = Bag([*mf_extra, *(p for k, n in parts.items() if k != server for p in n.fin)])
    else:
        mf = Bag([p for n in parts.values() for p in n.fin])
    g = explore(NetSystem(net, m0, mf), _caps(args))
    rep.emit(f"{len(g)} states explored\n")
    wt = check_weak_termination(g, mf)
    finals = [p for k, n in parts.items() if not (args.close and k == server) for p in n.fin]
    pc = check_proper_completion(g, list(mf_extra) + finals)
    dead = find_deadlocks(g, mf)
    rep.emit(f"weak termination: {'ok' if wt else 'violated'}\n")
    rep.emit(f"proper completion: {'ok' if pc else 'violated'}\n")
    rep.emit(f"deadlocks: {len(dead)}\n")
    for d in dead:
        rep.emit(f"  {d.state.canonical()} via {' '.join(d.trace) or '<empty>'}\n")
    if not wt:
        rep.diag(Diagnostic("VERIFY-WT", f"final marking unreachable from {wt.bad_state.canonical()}",
                            wt.trace, "inspect the trace below"), "violation")
        trace = dead[0].trace if dead else wt.trace
        rep.emit(_seqdiag(trace, parts, server))
    if not pc:
        rep.diag(Diagnostic("VERIFY-PC", f"improper completion at {pc.bad_state.canonical()}", pc.trace,
                            "tokens remain when all final places are marked"), "violation")
    return OK if wt and pc else VIOLATION


def cmd_pattern(args, rep: Reporter) -> int:
    _, server = load(args.server)
    server = namespace(server, "S.")
    mirrors = []
    if args.clients:
        for k, path in enumerate(args.clients, 1):
            _, c = load(path)
            c = namespace(align_interfaces(server, c), f"C{k}.")
            phi = infer_mirror_map(server, c)
            if phi is None:
                rep.diag(Diagnostic("MIRROR-INFER", "cannot match the client to the server", (path,),
                                    "derive clients with `portnet mirror`"))
                return INPUT_ERROR
            mirrors.append((c, phi))
    else:
        mirrors = [derive_full_mirror(server, f"_m{j}") for j in range(1, args.mirrors + 1)]
    try:
        sys_ = build_pmpp(server, mirrors)
    except PortnetError as e:
        for d in e.diagnostics or [Diagnostic("PMPP", str(e), (args.server,), "check the server and client files")]:
            rep.diag(d)
        return INPUT_ERROR
    g = explore(sys_, _caps(args))
    rep.emit(f"{len(g)} states explored\n")
    wt = check_weak_termination(g, sys_.mf)
    rep.emit(f"weak termination: {'ok' if wt else 'violated'}\n")
    if not wt:
        rep.diag(Diagnostic("VERIFY-WT", "pattern is not weakly terminating", wt.trace, "inspect the trace"),
                 "violation")
        return VIOLATION
    return OK


def cmd_export(args, rep: Reporter) -> int:
    spec, net = load(args.file)
    if args.format == "dot":
        text = emit_dot(net, spec.interface_name or spec.name)
    elif args.format == "mermaid":
        text = emit_state_diagram(spec)
    else:
        text = emit_dsl(spec)
    rep.emit(text, args.out)
    return OK


# --- entry point ------------------------------------------------------------


def _add_caps(p):
    p.add_argument("--max-states", type=int, default=100_000)
    p.add_argument("--max-tokens", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="portnet", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate and check well-formedness of an interface")
    p.add_argument("file")
    p.add_argument("--strict-loop", action="store_true",
                   help="require an opposite-direction interaction (not tau) to break a loop")
    _add_caps(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("mirror", help="derive a (partial) mirror client as an interface file")
    p.add_argument("file")
    p.add_argument("--drop", help="comma-separated server receive labels the client never sends")
    p.add_argument("--suffix", default="_c")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mirror)

    p = sub.add_parser("verify", help="compose interfaces and check weak termination")
    p.add_argument("files", nargs="+")
    p.add_argument("--close", action="store_true",
                   help="let the first interface serve sessions repeatedly")
    _add_caps(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pattern", help="build and verify the partial mirrored portnet pattern")
    p.add_argument("server")
    p.add_argument("--clients", nargs="+")
    p.add_argument("--mirrors", type=int, default=2, help="full mirrors to use when no clients are given")
    _add_caps(p)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("export", help="render an interface")
    p.add_argument("file")
    p.add_argument("--format", choices=("dot", "mermaid", "ifs"), default="ifs")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    rep = Reporter(out, err)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else INPUT_ERROR
    try:
        return args.func(args, rep)
    except InputError as e:
        for d in e.diagnostics:
            rep.diag(d)
        return INPUT_ERROR
    except Inconclusive as e:
        rep.diag(Diagnostic("INCONCLUSIVE", str(e), tuple(e.trace), "raise --max-states or --max-tokens"),
                 "note")
        return INCONCLUSIVE
    except (PortnetError, NetError) as e:
        for d in getattr(e, "diagnostics", None) or [Diagnostic("INPUT", str(e), (), "check the input files")]:
            rep.diag(d)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
