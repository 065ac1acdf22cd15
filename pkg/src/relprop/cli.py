"""Command line interface: ``relprop run|query|explain <scenario>``.

Exit codes: 0 on success, 1 on usage, parse or scenario errors, 2 when an
``expect`` line fails.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .errors import ExpectFailed, ParseError, RelpropError
from .engine import format_trace, run_scenario
from .propagation import PropagationConfig
from .scenario import parse_scenario


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def bundled_scenarios() -> list[str]:
    """File names of the scenario corpus shipped with the package."""
    root = resources.files("relprop") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".rp"))


def read_scenario(path: str) -> str:
    """Read a scenario from disk, falling back to the bundled corpus by name."""
    p = Path(path)
    if p.is_file():
        return p.read_text(encoding="utf-8")
    bundled = resources.files("relprop") / "scenarios" / p.name
    if p.suffix == ".rp" and bundled.is_file():
        return bundled.read_text(encoding="utf-8")
    raise FileNotFoundError(path)


def _config(pairs) -> PropagationConfig:
    cfg = PropagationConfig()
    for item in pairs or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise RelpropError(f"--config expects name=value, got {item!r}")
        try:
            number = float(value)
        except ValueError:
            raise RelpropError(f"--config {name}: not a number: {value!r}") from None
        cfg = cfg.with_param(name, number)
    return cfg


def _load(args):
    text = read_scenario(args.scenario)
    events = parse_scenario(text)
    return run_scenario(events, _config(args.config))


def _cmd_run(args) -> int:
    state, trace = _load(args)
    if args.trace:
        Path(args.trace).write_text(format_trace(trace), encoding="utf-8")
    for ident, agent in sorted(state.agents.items()):
        for dim, value in agent.reliability.items():
            print(f"agent:{ident}\t{dim}\t{value:.9f}\tinertia={agent.inertia:g}")
    for ident, msg in sorted(state.messages.items()):
        for dim, value in msg.reliability.items():
            print(f"msg:{ident}\t{dim}\t{value:.9f}\tchain={msg.chain}")
    return 0


def _cmd_query(args) -> int:
    state, _ = _load(args)
    tau = state.config.tau if args.tau is None else args.tau
    accepted = state.store.accepted_at(tau, per_dimension=args.per_dimension)
    for st in sorted(accepted, key=lambda s: str(s.key)):
        print(f"{st.key}\t{st.reliability.av():.9f}\t{','.join(st.supporters)}")
    for topic, claim in state.store.conflict_report(tau):
        print(f"conflict\t{topic}:{claim}", file=sys.stderr)
    return 0


def _cmd_explain(args) -> int:
    state, trace = _load(args)
    ident = args.entity
    if ident in state.agents:
        entity = f"agent:{ident}"
        agent = state.agents[ident]
        print(f"{entity}\tinertia={agent.inertia:g}")
        for i, entry in enumerate(agent.history, start=1):
            prior = ",".join(f"{k}:{v:.9f}" for k, v in entry.prior.items())
            print(f"  history {i}\tprior={prior}\tcause={entry.cause}")
        touched = {
            cid
            for cid, record in state.chains.items()
            if any(ident in (h.source, h.destination) for h in record.hops)
        }
    elif ident in state.messages:
        entity = f"msg:{ident}"
        print(f"{entity}\tchain={state.messages[ident].chain}")
        touched = {state.messages[ident].chain}
    else:
        print(f"unknown entity {ident!r}", file=sys.stderr)
        return 1
    for rec in trace:
        if rec.entity == entity:
            print("  " + rec.to_tsv())
            touched.add(rec.cause)
    for cid in sorted(touched):
        hops = " ".join(f"{h.source}->{h.destination}/{h.direction}" for h in state.chains[cid].hops)
        print(f"chain {cid}: {hops}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relprop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("scenario")
    run.add_argument("--trace", help="write the trace as TSV to this path")
    run.set_defaults(func=_cmd_run)

    query = sub.add_parser("query", help="print statements accepted at level tau")
    query.add_argument("scenario")
    query.add_argument("--tau", type=float)
    query.add_argument("--per-dimension", action="store_true")
    query.set_defaults(func=_cmd_query)

    explain = sub.add_parser("explain", help="history of one agent or message")
    explain.add_argument("scenario")
    explain.add_argument("--entity", required=True)
    explain.set_defaults(func=_cmd_explain)

    for p in (run, query, explain):
        p.add_argument("--config", action="append", metavar="NAME=VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"relprop: no such scenario: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"relprop: {args.scenario}:{exc.line}: {exc.reason}", file=sys.stderr)
        return 1
    except ExpectFailed as exc:
        print(f"relprop: {exc}", file=sys.stderr)
        return 2
    except RelpropError as exc:
        print(f"relprop: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
